//! Closed-form Nash equilibria of the finite game.
//!
//! In every equilibrium both players randomize over all rounds and the device
//! never stays honest for good. The voter's casting round is geometric with
//! ratio `R = asucc_D / (asucc_D + afail_D)`; the device's distribution is
//! whatever makes every casting round equally good for the voter.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game_model::{
    expected_payoffs, payoff_unchecked, CheatRound, DeviceMixedStrategy, GameParams, PayoffPair,
    VoterBehavioralStrategy, VoterMixedStrategy,
};

/// Default tolerance for analytic equilibrium checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The full equilibrium profile with its payoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashSolution {
    #[serde(rename = "s_V")]
    pub s_v: VoterMixedStrategy,
    #[serde(rename = "b_V")]
    pub b_v: VoterBehavioralStrategy,
    #[serde(rename = "s_D")]
    pub s_d: DeviceMixedStrategy,
    #[serde(rename = "Eu")]
    pub eu: PayoffPair,
    #[serde(rename = "R")]
    pub ratio: f64,
}

/// `p_n = (1 - R) R^(n-1) / (1 - R^n_max)`.
pub fn nash_voter_mixed(params: &GameParams) -> VoterMixedStrategy {
    let r = params.ratio();
    let n_max = params.n_max() as i32;
    let norm = 1.0 - r.powi(n_max);
    let probs = (0..n_max).map(|i| (1.0 - r) * r.powi(i) / norm).collect();
    VoterMixedStrategy::new(probs).expect("geometric weights are normalized")
}

/// `b_n = (1 - R) / (1 - R^(n_max - n + 1))`; the last entry is exactly 1.
pub fn nash_voter_behavioral(params: &GameParams) -> VoterBehavioralStrategy {
    let r = params.ratio();
    let n_max = params.n_max() as i32;
    let probs = (1..=n_max)
        .map(|n| (1.0 - r) / (1.0 - r.powi(n_max - n + 1)))
        .collect();
    VoterBehavioralStrategy::new(probs).expect("closed form lies in [0, 1]")
}

/// The constant-rate plan the behavioral equilibrium approaches when the
/// detection penalty dominates: cast with `afail_D / (asucc_D + afail_D)`
/// before the last round, then cast for sure.
pub fn approx_behavioral(params: &GameParams) -> VoterBehavioralStrategy {
    let rate = params.afail_d() / (params.asucc_d() + params.afail_d());
    let n_max = params.n_max() as usize;
    let mut probs = vec![rate; n_max];
    probs[n_max - 1] = 1.0;
    VoterBehavioralStrategy::new(probs).expect("rate lies in (0, 1)")
}

/// Device equilibrium strategy from the voter's indifference conditions.
///
/// Solves `Eu_V(n, s_D) = Eu_V(n + 1, s_D)` for `n < n_max` together with
/// `sum p_n = 1` (the honest atom is zero in equilibrium). Errors if the
/// system is singular or its solution is not strictly interior.
pub fn nash_device(params: &GameParams) -> Result<DeviceMixedStrategy> {
    let n = params.n_max() as usize;
    let mut system = vec![vec![0.0; n + 1]; n];
    for row in 0..n - 1 {
        let cast = row as u32 + 1;
        for col in 0..n {
            let cheat = CheatRound::At(col as u32 + 1);
            system[row][col] = payoff_unchecked(cast, cheat, params).u_v
                - payoff_unchecked(cast + 1, cheat, params).u_v;
        }
    }
    system[n - 1][..n].fill(1.0);
    system[n - 1][n] = 1.0;

    let probs = solve_dense(system).ok_or_else(|| {
        GameError::NoInteriorEquilibrium("indifference system is singular".into())
    })?;
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, &p)| !(p > 0.0 && p <= 1.0))
    {
        return Err(GameError::NoInteriorEquilibrium(format!(
            "component p_{} = {p} is outside (0, 1)",
            i + 1
        )));
    }
    // n_max = 1 gives exactly [1]; otherwise renormalize away elimination noise.
    let total: f64 = probs.iter().sum();
    let probs = probs.into_iter().map(|p| p / total).collect();
    DeviceMixedStrategy::new(probs, 0.0)
}

/// Gaussian elimination with partial pivoting on an augmented `n x (n+1)`
/// matrix. Returns `None` for a (numerically) singular system.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = a
        .iter()
        .flat_map(|row| row[..n].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() <= scale * 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..=n {
                a[row][k] -= factor * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - tail) / a[row][row];
    }
    Some(x)
}

/// All three equilibrium strategies and the resulting expected payoffs.
pub fn nash_solution(params: &GameParams) -> Result<NashSolution> {
    let s_v = nash_voter_mixed(params);
    let b_v = nash_voter_behavioral(params);
    let s_d = nash_device(params)?;
    let eu = expected_payoffs(&s_v, &s_d, params)?;
    Ok(NashSolution {
        s_v,
        b_v,
        s_d,
        eu,
        ratio: params.ratio(),
    })
}

/// Outcome of checking a profile against all deterministic deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub is_equilibrium: bool,
    /// Best improvement the voter gets from switching to a single round.
    pub max_gain_voter: f64,
    /// Best improvement the device gets from switching to a single round or
    /// to never cheating.
    pub max_gain_device: f64,
    /// Spread of `Eu_V(n, s_D)` over the casting rounds.
    pub voter_indifference_residual: f64,
    /// Spread of `Eu_D(s_V, n)` over the cheating rounds (never excluded).
    pub device_indifference_residual: f64,
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Checks that no player gains more than `tol` by a unilateral switch to a
/// deterministic strategy. Against a fixed mixed opponent some pure strategy
/// is always a best response, so this is a complete test.
pub fn verify_equilibrium(
    s_v: &VoterMixedStrategy,
    s_d: &DeviceMixedStrategy,
    params: &GameParams,
    tol: f64,
) -> Result<EquilibriumReport> {
    let current = expected_payoffs(s_v, s_d, params)?;
    let n_max = params.n_max();

    let voter_values: Vec<f64> = (1..=n_max)
        .map(|n| {
            s_d.atoms()
                .map(|(cheat, p)| p * payoff_unchecked(n, cheat, params).u_v)
                .sum()
        })
        .collect();
    let device_values: Vec<f64> = (1..=n_max)
        .map(CheatRound::At)
        .chain(std::iter::once(CheatRound::Never))
        .map(|cheat| {
            s_v.probs()
                .iter()
                .enumerate()
                .map(|(i, p)| p * payoff_unchecked(i as u32 + 1, cheat, params).u_d)
                .sum()
        })
        .collect();

    let best_v = voter_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_d = device_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_gain_voter = (best_v - current.u_v).max(0.0);
    let max_gain_device = (best_d - current.u_d).max(0.0);

    Ok(EquilibriumReport {
        is_equilibrium: max_gain_voter <= tol && max_gain_device <= tol,
        max_gain_voter,
        max_gain_device,
        voter_indifference_residual: spread(&voter_values),
        device_indifference_residual: spread(&device_values[..n_max as usize]),
    })
}
