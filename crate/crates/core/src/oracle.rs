//! Brute-force cross-checks for the closed forms: the extensive-form game
//! tree with a backward-induction probe, grid sweeps over the two-round
//! strategy space and an exhaustive scan of pure profiles.
//!
//! Nothing here calls the equilibrium formulas; every value is rebuilt from
//! the payoff table.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game_model::{payoff_unchecked, CheatRound, GameParams, PayoffPair};
use crate::stackelberg::{require_two_rounds, utility_vs_best_response};

/// Absolute tolerance under which two device payoffs count as tied.
pub const FLAT_TOL: f64 = 1e-12;

/// Default resolution of Stackelberg value sweeps.
pub const DEFAULT_SVAL_GRID: usize = 100_000;

/// Default resolution of best-response sweeps.
pub const DEFAULT_BR_GRID: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoterAction {
    Cast,
    Audit,
}

/// The device either encrypts truthfully (`true`) or fakes it (`false`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JointAction {
    pub voter: VoterAction,
    pub truthful: bool,
}

impl JointAction {
    pub const fn new(voter: VoterAction, truthful: bool) -> Self {
        JointAction { voter, truthful }
    }
}

/// One state of the concurrent extensive-form game. Both players move at
/// once in every round; only `(audit, true)` continues to the next round.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTreeNode {
    pub round: u32,
    pub terminal: bool,
    pub outcome: Option<PayoffPair>,
    pub children: BTreeMap<JointAction, GameTreeNode>,
}

impl GameTreeNode {
    fn leaf(round: u32, outcome: PayoffPair) -> Self {
        GameTreeNode {
            round,
            terminal: true,
            outcome: Some(outcome),
            children: BTreeMap::new(),
        }
    }

    /// Number of decision levels below and including this node.
    pub fn depth(&self) -> u32 {
        if self.terminal {
            0
        } else {
            1 + self.children.values().map(GameTreeNode::depth).max().unwrap_or(0)
        }
    }
}

/// Builds the game tree for horizon `n_max`. Leaf payoffs are written out
/// from the protocol (who audited how often, who got caught) rather than
/// read from [`crate::game_model::payoff`], so the two can be compared.
pub fn build_game_tree(params: &GameParams) -> GameTreeNode {
    build_round(1, params)
}

fn build_round(round: u32, params: &GameParams) -> GameTreeNode {
    let audits_so_far = f64::from(round - 1) * params.c_audit();
    let mut children = BTreeMap::new();
    children.insert(
        JointAction::new(VoterAction::Cast, true),
        GameTreeNode::leaf(round, PayoffPair::new(params.asucc_v() - audits_so_far, 0.0)),
    );
    children.insert(
        JointAction::new(VoterAction::Cast, false),
        GameTreeNode::leaf(
            round,
            PayoffPair::new(-params.afail_v() - audits_so_far, params.asucc_d()),
        ),
    );
    if round < params.n_max() {
        // The audit opens the fake encryption in this round.
        children.insert(
            JointAction::new(VoterAction::Audit, false),
            GameTreeNode::leaf(
                round,
                PayoffPair::new(-audits_so_far - params.c_audit(), -params.afail_d()),
            ),
        );
        children.insert(
            JointAction::new(VoterAction::Audit, true),
            build_round(round + 1, params),
        );
    }
    GameTreeNode {
        round,
        terminal: false,
        outcome: None,
        children,
    }
}

/// Every root-to-leaf path with its payoff.
pub fn terminal_histories(tree: &GameTreeNode) -> Vec<(Vec<JointAction>, PayoffPair)> {
    fn walk(
        node: &GameTreeNode,
        path: &mut Vec<JointAction>,
        out: &mut Vec<(Vec<JointAction>, PayoffPair)>,
    ) {
        if let Some(outcome) = node.outcome.filter(|_| node.terminal) {
            out.push((path.clone(), outcome));
            return;
        }
        for (action, child) in &node.children {
            path.push(*action);
            walk(child, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(tree, &mut Vec::new(), &mut out);
    out
}

/// A pure profile `(n_cast, n_cheat)` that produces the given history.
/// Where the history leaves one of the two rounds open, any completion gives
/// the same payoff; the earliest (voter) or never (device) is returned.
pub fn history_profile(history: &[JointAction]) -> Option<(u32, CheatRound)> {
    let last = history.last()?;
    let round = history.len() as u32;
    Some(match (last.voter, last.truthful) {
        (VoterAction::Cast, true) => (round, CheatRound::Never),
        (VoterAction::Cast, false) => (round, CheatRound::At(round)),
        (VoterAction::Audit, false) => (round + 1, CheatRound::At(round)),
        (VoterAction::Audit, true) => return None,
    })
}

/// Result of running backward induction on the game tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// Truthful encryption in the last round is dominated and removed.
    pub last_round_eliminated: bool,
    /// Whether any choice is dominated in the round before; `None` when the
    /// game has a single round.
    pub second_to_last_eliminable: Option<bool>,
}

/// `a` weakly dominates `b`: no worse anywhere, strictly better somewhere.
fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
}

/// Payoff matrix of one concurrent round, as seen from both players.
struct StageGame {
    voter_actions: Vec<VoterAction>,
    device_actions: Vec<bool>,
    outcomes: BTreeMap<JointAction, PayoffPair>,
}

impl StageGame {
    fn from_node(node: &GameTreeNode, continuation: Option<PayoffPair>) -> Self {
        let mut outcomes = BTreeMap::new();
        for (action, child) in &node.children {
            let value = if child.terminal {
                child.outcome.expect("leaves carry payoffs")
            } else {
                continuation.expect("continuation value for inner node")
            };
            outcomes.insert(*action, value);
        }
        let mut voter_actions: Vec<VoterAction> = outcomes.keys().map(|a| a.voter).collect();
        voter_actions.dedup();
        let mut device_actions: Vec<bool> = outcomes.keys().map(|a| a.truthful).collect();
        device_actions.sort();
        device_actions.dedup();
        StageGame {
            voter_actions,
            device_actions,
            outcomes,
        }
    }

    fn voter_vector(&self, voter: VoterAction) -> Vec<f64> {
        self.device_actions
            .iter()
            .map(|&t| self.outcomes[&JointAction::new(voter, t)].u_v)
            .collect()
    }

    fn device_vector(&self, truthful: bool) -> Vec<f64> {
        self.voter_actions
            .iter()
            .map(|&v| self.outcomes[&JointAction::new(v, truthful)].u_d)
            .collect()
    }

    fn dominated_voter_actions(&self) -> Vec<VoterAction> {
        self.voter_actions
            .iter()
            .copied()
            .filter(|&v| {
                self.voter_actions
                    .iter()
                    .any(|&w| w != v && dominates(&self.voter_vector(w), &self.voter_vector(v)))
            })
            .collect()
    }

    fn dominated_device_actions(&self) -> Vec<bool> {
        self.device_actions
            .iter()
            .copied()
            .filter(|&t| {
                self.device_actions
                    .iter()
                    .any(|&u| u != t && dominates(&self.device_vector(u), &self.device_vector(t)))
            })
            .collect()
    }

    /// The single outcome left after removing dominated choices, if any.
    fn reduced_value(&self) -> Option<PayoffPair> {
        let bad_v = self.dominated_voter_actions();
        let bad_d = self.dominated_device_actions();
        let left: Vec<PayoffPair> = self
            .outcomes
            .iter()
            .filter(|(a, _)| !bad_v.contains(&a.voter) && !bad_d.contains(&a.truthful))
            .map(|(_, v)| *v)
            .collect();
        (left.len() == 1).then(|| left[0])
    }
}

pub fn backward_induction_probe(tree: &GameTreeNode) -> ProbeReport {
    let mut spine = vec![tree];
    while let Some(next) = spine
        .last()
        .and_then(|n| n.children.get(&JointAction::new(VoterAction::Audit, true)))
    {
        spine.push(next);
    }
    let last = StageGame::from_node(spine[spine.len() - 1], None);
    let last_round_eliminated = last.dominated_device_actions().contains(&true);

    let second_to_last_eliminable = if spine.len() < 2 {
        None
    } else {
        let prev = StageGame::from_node(spine[spine.len() - 2], last.reduced_value());
        Some(!prev.dominated_voter_actions().is_empty() || !prev.dominated_device_actions().is_empty())
    };

    ProbeReport {
        last_round_eliminated,
        second_to_last_eliminable,
    }
}

fn check_grid(grid_n: usize) -> Result<()> {
    if grid_n == 0 {
        return Err(GameError::InvalidArgument("grid_n must be >= 1".into()));
    }
    Ok(())
}

fn grid_point(i: usize, grid_n: usize) -> f64 {
    i as f64 / grid_n as f64
}

/// Maximum of the voter's payoff against best response over the grid
/// `{i / grid_n}`, with the maximizing `p_V` (lowest on ties).
pub fn grid_sweep_sval(params: &GameParams, grid_n: usize) -> Result<(f64, f64)> {
    require_two_rounds(params)?;
    check_grid(grid_n)?;
    let (value, index) = (0..=grid_n)
        .into_par_iter()
        .map(|i| {
            let u = utility_vs_best_response(grid_point(i, grid_n), params)
                .expect("grid point lies in [0, 1]");
            (u, i)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    Ok((value, grid_point(index, grid_n)))
}

/// Device's expected payoff in the two-round game, straight from the table.
fn device_payoff_from_table(p_v: f64, p_d: f64, params: &GameParams) -> f64 {
    let mut total = 0.0;
    for (n_cast, w_v) in [(1, p_v), (2, 1.0 - p_v)] {
        for (n_cheat, w_d) in [(CheatRound::At(1), p_d), (CheatRound::At(2), 1.0 - p_d)] {
            total += w_v * w_d * payoff_unchecked(n_cast, n_cheat, params).u_d;
        }
    }
    total
}

/// All `p_D` on the grid `{i / grid_n}` whose device payoff is within
/// [`FLAT_TOL`] of the best grid payoff.
pub fn brute_force_device_br(p_v: f64, params: &GameParams, grid_n: usize) -> Result<Vec<f64>> {
    require_two_rounds(params)?;
    check_grid(grid_n)?;
    if !(0.0..=1.0).contains(&p_v) {
        return Err(GameError::InvalidArgument(format!(
            "p_V must lie in [0, 1], got {p_v}"
        )));
    }
    let values: Vec<(f64, f64)> = (0..=grid_n)
        .map(|i| {
            let p_d = grid_point(i, grid_n);
            (p_d, device_payoff_from_table(p_v, p_d, params))
        })
        .collect();
    let best = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(values
        .into_iter()
        .filter(|(_, u)| best - u <= FLAT_TOL)
        .map(|(p_d, _)| p_d)
        .collect())
}

/// A pure profile and the best unilateral gains available from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureProfileCheck {
    pub n_cast: u32,
    pub n_cheat: CheatRound,
    pub voter_gain: f64,
    pub device_gain: f64,
}

impl PureProfileCheck {
    pub fn has_profitable_deviation(&self) -> bool {
        self.voter_gain > 0.0 || self.device_gain > 0.0
    }
}

/// Best unilateral deviation gains for every pure profile, never-cheat
/// included.
pub fn scan_pure_profiles(params: &GameParams) -> Vec<PureProfileCheck> {
    let n_max = params.n_max();
    let cheats: Vec<CheatRound> = (1..=n_max)
        .map(CheatRound::At)
        .chain(std::iter::once(CheatRound::Never))
        .collect();
    let mut out = Vec::with_capacity(n_max as usize * cheats.len());
    for n_cast in 1..=n_max {
        for &n_cheat in &cheats {
            let here = payoff_unchecked(n_cast, n_cheat, params);
            let best_v = (1..=n_max)
                .map(|m| payoff_unchecked(m, n_cheat, params).u_v)
                .fold(f64::NEG_INFINITY, f64::max);
            let best_d = cheats
                .iter()
                .map(|&c| payoff_unchecked(n_cast, c, params).u_d)
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(PureProfileCheck {
                n_cast,
                n_cheat,
                voter_gain: best_v - here.u_v,
                device_gain: best_d - here.u_d,
            });
        }
    }
    out
}
