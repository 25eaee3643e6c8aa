//! Monte Carlo play of repeated cast-or-audit interactions.
//!
//! Trial `t` draws from its own ChaCha8 stream (`seed`, stream `t`), device
//! first, then voter. Trials only increment integer counters per
//! `(n_cast, n_cheat)` cell, so the result is bit-identical however the trial
//! range is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game_model::{
    behavioral_to_mixed, payoff_unchecked, CheatRound, DeviceMixedStrategy, GameParams, Outcome,
    VoterBehavioralStrategy, VoterMixedStrategy, PROB_TOL,
};

/// How the voter's casting round is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoterSpec {
    /// One draw of `n_cast` before play.
    Mixed(VoterMixedStrategy),
    /// A fresh Bernoulli draw in every round.
    Behavioral(VoterBehavioralStrategy),
}

impl VoterSpec {
    fn n_max(&self) -> u32 {
        match self {
            VoterSpec::Mixed(s) => s.n_max(),
            VoterSpec::Behavioral(b) => b.n_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: GameParams,
    pub voter: VoterSpec,
    pub device: DeviceMixedStrategy,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(GameError::InvalidArgument("trials must be >= 1".into()));
        }
        let n_max = self.params.n_max();
        if self.voter.n_max() != n_max || self.device.n_max() != n_max {
            return Err(GameError::InvalidArgument(format!(
                "strategies have {} (voter) and {} (device) rounds but n_max = {n_max}",
                self.voter.n_max(),
                self.device.n_max()
            )));
        }
        if let VoterSpec::Behavioral(b) = &self.voter {
            behavioral_to_mixed(b)?;
        }
        Ok(())
    }
}

/// Sample means, standard errors and outcome frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    #[serde(rename = "mean_u_V")]
    pub mean_u_v: f64,
    #[serde(rename = "mean_u_D")]
    pub mean_u_d: f64,
    #[serde(rename = "stderr_u_V")]
    pub stderr_u_v: f64,
    #[serde(rename = "stderr_u_D")]
    pub stderr_u_d: f64,
    pub freq_cast_as_intended: f64,
    pub freq_cheated: f64,
    pub freq_caught: f64,
    pub trials: u64,
}

/// Draws an index from `weights` by inverse CDF, in index order. Falls back
/// to the last positive weight when rounding leaves `u` above the total.
fn inverse_cdf(weights: impl Iterator<Item = f64>, u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        cum += w;
        if u < cum {
            return i;
        }
    }
    last_positive
}

fn sample_cheat(device: &DeviceMixedStrategy, rng: &mut ChaCha8Rng) -> CheatRound {
    let u: f64 = rng.random();
    let i = inverse_cdf(device.atoms().map(|(_, p)| p), u);
    if i < device.probs().len() {
        CheatRound::At(i as u32 + 1)
    } else {
        CheatRound::Never
    }
}

fn sample_cast(voter: &VoterSpec, rng: &mut ChaCha8Rng) -> u32 {
    match voter {
        VoterSpec::Mixed(s) => {
            let u: f64 = rng.random();
            inverse_cdf(s.probs().iter().copied(), u) as u32 + 1
        }
        VoterSpec::Behavioral(b) => {
            let last = b.n_max();
            for (i, &p) in b.probs().iter().enumerate() {
                let u: f64 = rng.random();
                if u < p {
                    return i as u32 + 1;
                }
            }
            last
        }
    }
}

/// Cell index of `(n_cast, n_cheat)` in a row-major `n_max x (n_max + 1)`
/// table, never in the last column.
fn cell(n_cast: u32, n_cheat: CheatRound, n_max: u32) -> usize {
    let col = match n_cheat {
        CheatRound::At(m) => m - 1,
        CheatRound::Never => n_max,
    };
    ((n_cast - 1) * (n_max + 1) + col) as usize
}

fn count_cells(config: &SimConfig) -> Vec<u64> {
    let n_max = config.params.n_max();
    let cells = (n_max * (n_max + 1)) as usize;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.trials)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut counts, trial| {
                let mut rng = base.clone();
                rng.set_stream(trial);
                let n_cheat = sample_cheat(&config.device, &mut rng);
                let n_cast = sample_cast(&config.voter, &mut rng);
                counts[cell(n_cast, n_cheat, n_max)] += 1;
                counts
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let params = &config.params;
    let n_max = params.n_max();
    let counts = count_cells(config);
    let n = config.trials as f64;

    let mut table = Vec::with_capacity(counts.len());
    for n_cast in 1..=n_max {
        for n_cheat in (1..=n_max).map(CheatRound::At).chain([CheatRound::Never]) {
            let k = counts[cell(n_cast, n_cheat, n_max)];
            if k > 0 {
                table.push((
                    k as f64,
                    payoff_unchecked(n_cast, n_cheat, params),
                    Outcome::classify(n_cast, n_cheat),
                ));
            }
        }
    }

    let mean_u_v = table.iter().map(|(k, u, _)| k * u.u_v).sum::<f64>() / n;
    let mean_u_d = table.iter().map(|(k, u, _)| k * u.u_d).sum::<f64>() / n;
    let stderr = |mean: f64, pick: fn(&crate::game_model::PayoffPair) -> f64| {
        if config.trials < 2 {
            return 0.0;
        }
        let ss: f64 = table.iter().map(|(k, u, _)| k * (pick(u) - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    };
    let freq = |which: Outcome| {
        table
            .iter()
            .filter(|(_, _, o)| *o == which)
            .map(|(k, _, _)| k)
            .sum::<f64>()
            / n
    };

    Ok(SimResult {
        mean_u_v,
        mean_u_d,
        stderr_u_v: stderr(mean_u_v, |u| u.u_v),
        stderr_u_d: stderr(mean_u_d, |u| u.u_d),
        freq_cast_as_intended: freq(Outcome::CastAsIntended),
        freq_cheated: freq(Outcome::Cheated),
        freq_caught: freq(Outcome::Caught),
        trials: config.trials,
    })
}

/// Paired runs of a mixed voter and its behavioral image against the same
/// device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub mixed: SimResult,
    pub behavioral: SimResult,
    pub payoffs_agree: bool,
    pub frequencies_agree: bool,
    /// Largest `|difference| / combined stderr` over the compared statistics
    /// (zero when both sides are exact and equal).
    pub max_z: f64,
}

impl EquivalenceReport {
    pub fn agree(&self) -> bool {
        self.payoffs_agree && self.frequencies_agree
    }
}

/// `|a - b| <= 3 * sqrt(se_a^2 + se_b^2)`, returning the z-score as well.
fn within_ci(a: f64, se_a: f64, b: f64, se_b: f64) -> (bool, f64) {
    let diff = (a - b).abs();
    let se = (se_a * se_a + se_b * se_b).sqrt();
    let z = if diff == 0.0 { 0.0 } else { diff / se };
    (diff <= 3.0 * se, z)
}

fn freq_stderr(f: f64, trials: u64) -> f64 {
    (f * (1.0 - f) / trials as f64).sqrt()
}

/// Simulates `mixed` and `behavioral` under the same seed and checks that
/// mean payoffs and outcome frequencies agree within three combined standard
/// errors. The behavioral plan must be the image of the mixed strategy.
pub fn simulate_equivalence(
    params: &GameParams,
    mixed: &VoterMixedStrategy,
    behavioral: &VoterBehavioralStrategy,
    device: &DeviceMixedStrategy,
    trials: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    let image = behavioral_to_mixed(behavioral)?;
    if image.n_max() != mixed.n_max()
        || image
            .probs()
            .iter()
            .zip(mixed.probs())
            .any(|(a, b)| (a - b).abs() > PROB_TOL)
    {
        return Err(GameError::InvalidArgument(
            "behavioral strategy is not outcome-equivalent to the mixed strategy".into(),
        ));
    }
    let run = |voter: VoterSpec| {
        simulate(&SimConfig {
            params: *params,
            voter,
            device: device.clone(),
            trials,
            seed,
        })
    };
    let a = run(VoterSpec::Mixed(mixed.clone()))?;
    let b = run(VoterSpec::Behavioral(behavioral.clone()))?;

    let payoff_checks = [
        within_ci(a.mean_u_v, a.stderr_u_v, b.mean_u_v, b.stderr_u_v),
        within_ci(a.mean_u_d, a.stderr_u_d, b.mean_u_d, b.stderr_u_d),
    ];
    let freq_checks: Vec<(bool, f64)> = [
        (a.freq_cast_as_intended, b.freq_cast_as_intended),
        (a.freq_cheated, b.freq_cheated),
        (a.freq_caught, b.freq_caught),
    ]
    .into_iter()
    .map(|(x, y)| within_ci(x, freq_stderr(x, trials), y, freq_stderr(y, trials)))
    .collect();

    let max_z = payoff_checks
        .iter()
        .chain(&freq_checks)
        .map(|c| c.1)
        .fold(0.0, f64::max);
    Ok(EquivalenceReport {
        payoffs_agree: payoff_checks.iter().all(|c| c.0),
        frequencies_agree: freq_checks.iter().all(|c| c.0),
        max_z,
        mixed: a,
        behavioral: b,
    })
}
