//! Leader-follower analysis of the two-round game.
//!
//! With `n_max = 2` the voter's strategy is the probability `p_V` of casting
//! in round 1 and the device's is the probability `p_D` of cheating in
//! round 1. The device observes `p_V` and best-responds; ties are resolved
//! against the voter.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game_model::GameParams;
use crate::nash::nash_solution;

/// Best-response set of the device to a fixed `p_V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BestResponseSet {
    /// `p_D = 0`: stay honest in round 1.
    OnlyHonestFirst,
    /// `p_D = 1`: cheat in round 1.
    OnlyCheatFirst,
    /// Every `p_D` in `[0, 1]`.
    FullInterval,
}

impl BestResponseSet {
    pub fn contains(&self, p_d: f64) -> bool {
        match self {
            BestResponseSet::OnlyHonestFirst => p_d == 0.0,
            BestResponseSet::OnlyCheatFirst => p_d == 1.0,
            BestResponseSet::FullInterval => (0.0..=1.0).contains(&p_d),
        }
    }
}

/// Stackelberg value against the Nash payoff, with an epsilon-optimal
/// commitment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackelbergReport {
    pub sval: f64,
    #[serde(rename = "p_V_NE")]
    pub p_v_ne: f64,
    #[serde(rename = "nash_Eu_V")]
    pub nash_eu_v: f64,
    pub epsilon: f64,
    #[serde(rename = "p_V_eps")]
    pub p_v_eps: f64,
    #[serde(rename = "Eu_V_eps")]
    pub eu_v_eps: f64,
}

pub(crate) fn require_two_rounds(params: &GameParams) -> Result<()> {
    if params.n_max() != 2 {
        return Err(GameError::UnsupportedHorizon(params.n_max()));
    }
    Ok(())
}

fn check_p_v(p_v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_v) {
        return Err(GameError::InvalidArgument(format!(
            "p_V must lie in [0, 1], got {p_v}"
        )));
    }
    Ok(())
}

/// Equilibrium probability of casting in round 1,
/// `(asucc_D + afail_D) / (2 asucc_D + afail_D)`.
pub fn p_v_ne(params: &GameParams) -> f64 {
    let (s, f) = (params.asucc_d(), params.afail_d());
    (s + f) / (2.0 * s + f)
}

/// Slope of the voter's payoff on the left branch, `asucc_V + afail_V + c_audit`.
pub fn upper_branch_slope(params: &GameParams) -> f64 {
    params.asucc_v() + params.afail_v() + params.c_audit()
}

/// Voter's expected payoff in the two-round game for `(p_V, p_D)`.
pub fn voter_utility(p_v: f64, p_d: f64, params: &GameParams) -> f64 {
    let (sv, fv, c) = (params.asucc_v(), params.afail_v(), params.c_audit());
    p_v * p_d * (-fv) + p_v * (1.0 - p_d) * sv + (1.0 - p_v) * p_d * (-c)
        + (1.0 - p_v) * (1.0 - p_d) * (-c - fv)
}

/// Device's expected payoff in the two-round game for `(p_V, p_D)`.
pub fn device_utility(p_v: f64, p_d: f64, params: &GameParams) -> f64 {
    let (sd, fd) = (params.asucc_d(), params.afail_d());
    p_v * p_d * sd - (1.0 - p_v) * p_d * fd + (1.0 - p_v) * (1.0 - p_d) * sd
}

pub fn best_response_device(p_v: f64, params: &GameParams) -> Result<BestResponseSet> {
    require_two_rounds(params)?;
    check_p_v(p_v)?;
    let threshold = p_v_ne(params);
    Ok(if p_v < threshold {
        BestResponseSet::OnlyHonestFirst
    } else if p_v > threshold {
        BestResponseSet::OnlyCheatFirst
    } else {
        BestResponseSet::FullInterval
    })
}

/// Voter's guaranteed payoff when the device best-responds, worst case over
/// ties. Piecewise linear with a single downward jump at `p_V_NE`.
pub fn utility_vs_best_response(p_v: f64, params: &GameParams) -> Result<f64> {
    require_two_rounds(params)?;
    check_p_v(p_v)?;
    let (sv, fv, c) = (params.asucc_v(), params.afail_v(), params.c_audit());
    Ok(if p_v < p_v_ne(params) {
        p_v * sv - (1.0 - p_v) * (c + fv)
    } else {
        -p_v * fv - (1.0 - p_v) * c
    })
}

/// Supremum of [`utility_vs_best_response`]; approached from the left of
/// `p_V_NE` but never attained.
pub fn stackelberg_value(params: &GameParams) -> Result<f64> {
    require_two_rounds(params)?;
    let (sv, fv, c) = (params.asucc_v(), params.afail_v(), params.c_audit());
    let (sd, fd) = (params.asucc_d(), params.afail_d());
    Ok((sd * (sv - fv - c) + fd * sv) / (2.0 * sd + fd))
}

/// A commitment `p_V < p_V_NE` guaranteeing at least `SVal - epsilon`.
///
/// Steps left of `p_V_NE` by `epsilon / slope`, capped at half of `p_V_NE`.
/// Returns `(p_V, guaranteed payoff)`.
pub fn epsilon_optimal(params: &GameParams, epsilon: f64) -> Result<(f64, f64)> {
    require_two_rounds(params)?;
    if !(epsilon > 0.0) {
        return Err(GameError::InvalidArgument(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let p_ne = p_v_ne(params);
    let delta = (epsilon / upper_branch_slope(params)).min(p_ne / 2.0);
    let mut p_v = p_ne - delta;
    if p_v >= p_ne {
        // epsilon below float resolution around p_V_NE
        p_v = f64::from_bits(p_ne.to_bits() - 1);
    }
    let sval = stackelberg_value(params)?;
    let mut guaranteed = utility_vs_best_response(p_v, params)?;
    // delta = epsilon/slope lands exactly on SVal - epsilon; the utility rises
    // towards p_V_NE, so nudge right by ulps if rounding left us just under it.
    while guaranteed < sval - epsilon {
        let next = p_v.next_up();
        if next >= p_ne {
            break;
        }
        p_v = next;
        guaranteed = utility_vs_best_response(p_v, params)?;
    }
    Ok((p_v, guaranteed))
}

pub fn compare_nash_stackelberg(params: &GameParams, epsilon: f64) -> Result<StackelbergReport> {
    require_two_rounds(params)?;
    let sval = stackelberg_value(params)?;
    let nash = nash_solution(params)?;
    let (p_v_eps, eu_v_eps) = epsilon_optimal(params, epsilon)?;
    if !(sval > nash.eu.u_v) {
        return Err(GameError::InvariantViolation(format!(
            "Stackelberg value {sval} does not exceed the Nash payoff {}",
            nash.eu.u_v
        )));
    }
    Ok(StackelbergReport {
        sval,
        p_v_ne: p_v_ne(params),
        nash_eu_v: nash.eu.u_v,
        epsilon,
        p_v_eps,
        eu_v_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn preset() -> GameParams {
        GameParams::culnane_teague()
    }

    #[test]
    fn best_response_regions() {
        let p = preset();
        assert_eq!(best_response_device(0.5, &p).unwrap(), BestResponseSet::OnlyHonestFirst);
        assert_eq!(best_response_device(1.0, &p).unwrap(), BestResponseSet::OnlyCheatFirst);
        assert_eq!(best_response_device(5.0 / 6.0, &p).unwrap(), BestResponseSet::FullInterval);
        assert!(best_response_device(1.5, &p).is_err());
    }

    #[test]
    fn horizon_restriction() {
        let p = preset().with_n_max(3).unwrap();
        assert_eq!(best_response_device(0.5, &p), Err(GameError::UnsupportedHorizon(3)));
        assert_eq!(stackelberg_value(&p), Err(GameError::UnsupportedHorizon(3)));
        assert_eq!(utility_vs_best_response(0.5, &p), Err(GameError::UnsupportedHorizon(3)));
        assert!(compare_nash_stackelberg(&p, 0.1).is_err());
    }

    #[test]
    fn utility_branches() {
        let p = preset();
        assert_abs_diff_eq!(utility_vs_best_response(0.0, &p).unwrap(), -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(utility_vs_best_response(1.0, &p).unwrap(), -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            utility_vs_best_response(5.0 / 6.0, &p).unwrap(),
            -8.0 / 3.0,
            epsilon = 1e-12
        );
        let left = utility_vs_best_response(5.0 / 6.0 - 1e-9, &p).unwrap();
        assert!((left - 1.0).abs() < 1e-8);
    }

    #[test]
    fn closed_forms_agree_with_bilinear_payoffs() {
        let p = preset();
        for p_v in [0.0, 0.3, 0.8] {
            assert_abs_diff_eq!(
                utility_vs_best_response(p_v, &p).unwrap(),
                voter_utility(p_v, 0.0, &p),
                epsilon = 1e-12
            );
        }
        for p_v in [5.0 / 6.0, 0.9, 1.0] {
            assert_abs_diff_eq!(
                utility_vs_best_response(p_v, &p).unwrap(),
                voter_utility(p_v, 1.0, &p),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn stackelberg_value_cases() {
        assert_abs_diff_eq!(stackelberg_value(&preset()).unwrap(), 1.0, epsilon = 1e-12);

        let p = GameParams::new(4.0, 3.0, 1.5, 2.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(
            stackelberg_value(&p).unwrap(),
            2.0 * 4.0 / (3.0 + 2.0),
            epsilon = 1e-12
        );

        let p = GameParams::new(2.0, 3.0, 1.0, 1e6, 1.0, 2).unwrap();
        assert!((stackelberg_value(&p).unwrap() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn epsilon_optimal_paths() {
        let p = preset();
        let (p_v, g) = epsilon_optimal(&p, 0.06).unwrap();
        assert_abs_diff_eq!(p_v, 5.0 / 6.0 - 0.01, epsilon = 1e-12);
        assert!(g >= 0.94 - 1e-12);

        let (p_v, g) = epsilon_optimal(&p, 1e6).unwrap();
        assert_abs_diff_eq!(p_v, 5.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g, utility_vs_best_response(5.0 / 12.0, &p).unwrap(), epsilon = 1e-15);

        let (_, g) = epsilon_optimal(&p, 0.5).unwrap();
        assert!(g >= 0.5);

        assert!(epsilon_optimal(&p, 0.0).is_err());
        assert!(epsilon_optimal(&p, -1.0).is_err());
        assert!(epsilon_optimal(&p, f64::NAN).is_err());

        let (p_v, _) = epsilon_optimal(&p, 1e-30).unwrap();
        assert!(p_v < p_v_ne(&p));
    }

    #[test]
    fn report_for_preset() {
        let r = compare_nash_stackelberg(&preset(), 0.06).unwrap();
        assert_abs_diff_eq!(r.sval, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.nash_eu_v, -7.0 / 4.0, epsilon = 1e-12);
        assert!(r.p_v_eps < r.p_v_ne);
        assert!(r.eu_v_eps >= r.sval - r.epsilon);
    }

    #[test]
    fn report_for_even_device_odds() {
        let p = GameParams::new(1.0, 1.5, 1.0, 1.0, 1.0, 2).unwrap();
        let r = compare_nash_stackelberg(&p, 0.01).unwrap();
        assert!(r.sval > r.nash_eu_v);
    }

    #[test]
    fn positive_value_for_heavy_detection_penalty() {
        // asucc_V = afail_V / 2 and afail_D / asucc_D = 1e4.
        let p = GameParams::new(1.0, 2.0, 1.0, 1e4, 1.0, 2).unwrap();
        let r = compare_nash_stackelberg(&p, 0.01).unwrap();
        assert!(r.sval > 0.0);
    }
}
