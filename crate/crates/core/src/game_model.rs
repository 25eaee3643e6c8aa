//! Parameters, strategy representations and payoffs of the finite
//! cast-or-audit game.
//!
//! The voter picks the round `n_cast` in which the encrypted ballot is cast
//! (every earlier round is an audit); the device picks the round `n_cheat` in
//! which it first fakes an encryption, or never cheats at all.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Slack allowed when checking that a probability vector sums to one.
pub const PROB_TOL: f64 = 1e-9;

/// Largest supported horizon. Beyond this the geometric equilibrium weights
/// become denormal.
pub const MAX_ROUNDS: u32 = 64;

/// Payoff parameters and audit horizon of one game instance.
///
/// On the wire this is a flat JSON object with keys `asucc_V`, `afail_V`,
/// `asucc_D`, `afail_D`, `c_audit` and `n_max`. Deserialization validates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameParams", into = "RawGameParams")]
pub struct GameParams {
    asucc_v: f64,
    afail_v: f64,
    asucc_d: f64,
    afail_d: f64,
    c_audit: f64,
    n_max: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGameParams {
    #[serde(rename = "asucc_V")]
    asucc_v: f64,
    #[serde(rename = "afail_V")]
    afail_v: f64,
    #[serde(rename = "asucc_D")]
    asucc_d: f64,
    #[serde(rename = "afail_D")]
    afail_d: f64,
    c_audit: f64,
    n_max: u32,
}

impl TryFrom<RawGameParams> for GameParams {
    type Error = GameError;

    fn try_from(raw: RawGameParams) -> Result<Self> {
        GameParams::new(
            raw.asucc_v,
            raw.afail_v,
            raw.asucc_d,
            raw.afail_d,
            raw.c_audit,
            raw.n_max,
        )
    }
}

impl From<GameParams> for RawGameParams {
    fn from(p: GameParams) -> Self {
        RawGameParams {
            asucc_v: p.asucc_v,
            afail_v: p.afail_v,
            asucc_d: p.asucc_d,
            afail_d: p.afail_d,
            c_audit: p.c_audit,
            n_max: p.n_max,
        }
    }
}

impl GameParams {
    /// Validates and builds a parameter set.
    ///
    /// All five utilities must be finite and strictly positive, the audit
    /// cost must stay below the voter's loss from being cheated, and
    /// `1 <= n_max <= 64`.
    pub fn new(
        asucc_v: f64,
        afail_v: f64,
        asucc_d: f64,
        afail_d: f64,
        c_audit: f64,
        n_max: u32,
    ) -> Result<Self> {
        for (name, value) in [
            ("asucc_V", asucc_v),
            ("afail_V", afail_v),
            ("asucc_D", asucc_d),
            ("afail_D", afail_d),
            ("c_audit", c_audit),
        ] {
            if !value.is_finite() {
                return Err(GameError::InvalidParams(format!(
                    "{name} must be finite, got {value}"
                )));
            }
            if value <= 0.0 {
                return Err(GameError::InvalidParams(format!(
                    "{name} must be > 0, got {value}"
                )));
            }
        }
        if c_audit >= afail_v {
            return Err(GameError::InvalidParams(format!(
                "c_audit must be < afail_V (got c_audit = {c_audit}, afail_V = {afail_v})"
            )));
        }
        if n_max == 0 {
            return Err(GameError::InvalidParams("n_max must be >= 1".into()));
        }
        if n_max > MAX_ROUNDS {
            return Err(GameError::InvalidParams(format!(
                "n_max must be <= {MAX_ROUNDS}, got {n_max}"
            )));
        }
        Ok(GameParams {
            asucc_v,
            afail_v,
            asucc_d,
            afail_d,
            c_audit,
            n_max,
        })
    }

    /// The running two-round example: `asucc_V=2, afail_V=3, asucc_D=1,
    /// afail_D=4, c_audit=1, n_max=2`.
    pub fn culnane_teague() -> Self {
        GameParams::new(2.0, 3.0, 1.0, 4.0, 1.0, 2).expect("preset is valid")
    }

    /// Same utilities with a different horizon.
    pub fn with_n_max(&self, n_max: u32) -> Result<Self> {
        GameParams::new(
            self.asucc_v,
            self.afail_v,
            self.asucc_d,
            self.afail_d,
            self.c_audit,
            n_max,
        )
    }

    pub fn asucc_v(&self) -> f64 {
        self.asucc_v
    }

    pub fn afail_v(&self) -> f64 {
        self.afail_v
    }

    pub fn asucc_d(&self) -> f64 {
        self.asucc_d
    }

    pub fn afail_d(&self) -> f64 {
        self.afail_d
    }

    pub fn c_audit(&self) -> f64 {
        self.c_audit
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// The device's odds ratio `asucc_D / (asucc_D + afail_D)`.
    pub fn ratio(&self) -> f64 {
        self.asucc_d / (self.asucc_d + self.afail_d)
    }
}

/// Round in which the device first fakes an encryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheatRound {
    At(u32),
    Never,
}

impl fmt::Display for CheatRound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheatRound::At(n) => write!(f, "{n}"),
            CheatRound::Never => f.write_str("inf"),
        }
    }
}

/// Which row of the payoff table a play falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// `n_cast < n_cheat`.
    CastAsIntended,
    /// `n_cast == n_cheat`.
    Cheated,
    /// `n_cast > n_cheat`.
    Caught,
}

impl Outcome {
    pub fn classify(n_cast: u32, n_cheat: CheatRound) -> Outcome {
        match n_cheat {
            CheatRound::Never => Outcome::CastAsIntended,
            CheatRound::At(m) if n_cast < m => Outcome::CastAsIntended,
            CheatRound::At(m) if n_cast == m => Outcome::Cheated,
            CheatRound::At(_) => Outcome::Caught,
        }
    }
}

/// Utilities of the voter and the device.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PayoffPair {
    #[serde(rename = "u_V")]
    pub u_v: f64,
    #[serde(rename = "u_D")]
    pub u_d: f64,
}

impl PayoffPair {
    pub fn new(u_v: f64, u_d: f64) -> Self {
        PayoffPair { u_v, u_d }
    }
}

fn check_probability(value: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(GameError::InvalidArgument(format!(
            "{what} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

fn check_normalized(total: f64, what: &str) -> Result<()> {
    if (total - 1.0).abs() > PROB_TOL {
        return Err(GameError::InvalidArgument(format!(
            "{what} must sum to 1 (within {PROB_TOL}), got {total}"
        )));
    }
    Ok(())
}

/// Distribution over the casting round, `probs[n-1] = P(n_cast = n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct VoterMixedStrategy {
    probs: Vec<f64>,
}

impl VoterMixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(GameError::InvalidArgument(
                "voter strategy must have at least one round".into(),
            ));
        }
        for &p in &probs {
            check_probability(p, "voter cast probability")?;
        }
        check_normalized(probs.iter().sum(), "voter mixed strategy")?;
        Ok(VoterMixedStrategy { probs })
    }

    /// Always cast in round `n` (1-based).
    pub fn pure(n_cast: u32, n_max: u32) -> Result<Self> {
        if n_cast == 0 || n_cast > n_max {
            return Err(GameError::InvalidArgument(format!(
                "n_cast must lie in 1..={n_max}, got {n_cast}"
            )));
        }
        let mut probs = vec![0.0; n_max as usize];
        probs[n_cast as usize - 1] = 1.0;
        VoterMixedStrategy::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> u32 {
        self.probs.len() as u32
    }
}

impl TryFrom<Vec<f64>> for VoterMixedStrategy {
    type Error = GameError;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        VoterMixedStrategy::new(probs)
    }
}

impl From<VoterMixedStrategy> for Vec<f64> {
    fn from(s: VoterMixedStrategy) -> Self {
        s.probs
    }
}

/// Distribution over the first cheating round, plus the mass `p_never` on
/// always encrypting truthfully.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDeviceStrategy", into = "RawDeviceStrategy")]
pub struct DeviceMixedStrategy {
    probs: Vec<f64>,
    p_never: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeviceStrategy {
    probs: Vec<f64>,
    #[serde(default)]
    p_never: f64,
}

impl TryFrom<RawDeviceStrategy> for DeviceMixedStrategy {
    type Error = GameError;

    fn try_from(raw: RawDeviceStrategy) -> Result<Self> {
        DeviceMixedStrategy::new(raw.probs, raw.p_never)
    }
}

impl From<DeviceMixedStrategy> for RawDeviceStrategy {
    fn from(s: DeviceMixedStrategy) -> Self {
        RawDeviceStrategy {
            probs: s.probs,
            p_never: s.p_never,
        }
    }
}

impl DeviceMixedStrategy {
    pub fn new(probs: Vec<f64>, p_never: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(GameError::InvalidArgument(
                "device strategy must have at least one round".into(),
            ));
        }
        for &p in &probs {
            check_probability(p, "device cheat probability")?;
        }
        check_probability(p_never, "p_never")?;
        check_normalized(probs.iter().sum::<f64>() + p_never, "device mixed strategy")?;
        Ok(DeviceMixedStrategy { probs, p_never })
    }

    /// The device that never cheats.
    pub fn honest(n_max: u32) -> Result<Self> {
        DeviceMixedStrategy::new(vec![0.0; n_max as usize], 1.0)
    }

    /// Uniform over the cheating rounds, never honest.
    pub fn uniform(n_max: u32) -> Result<Self> {
        DeviceMixedStrategy::new(vec![1.0 / n_max as f64; n_max as usize], 0.0)
    }

    pub fn pure(n_cheat: CheatRound, n_max: u32) -> Result<Self> {
        match n_cheat {
            CheatRound::Never => DeviceMixedStrategy::honest(n_max),
            CheatRound::At(m) if m == 0 || m > n_max => Err(GameError::InvalidArgument(format!(
                "n_cheat must lie in 1..={n_max} or be never, got {m}"
            ))),
            CheatRound::At(m) => {
                let mut probs = vec![0.0; n_max as usize];
                probs[m as usize - 1] = 1.0;
                DeviceMixedStrategy::new(probs, 0.0)
            }
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn p_never(&self) -> f64 {
        self.p_never
    }

    pub fn n_max(&self) -> u32 {
        self.probs.len() as u32
    }

    /// `(n_cheat, probability)` over all `n_max + 1` atoms, never last.
    pub fn atoms(&self) -> impl Iterator<Item = (CheatRound, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (CheatRound::At(i as u32 + 1), p))
            .chain(std::iter::once((CheatRound::Never, self.p_never)))
    }
}

/// Per-round cast probabilities: in round `n`, having audited so far, cast
/// with probability `probs[n-1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct VoterBehavioralStrategy {
    probs: Vec<f64>,
}

impl VoterBehavioralStrategy {
    /// Entries must lie in `[0, 1]`. The last entry is not forced to 1 here;
    /// [`behavioral_to_mixed`] rejects plans that may never cast.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(GameError::InvalidArgument(
                "behavioral strategy must have at least one round".into(),
            ));
        }
        for &b in &probs {
            check_probability(b, "behavioral cast probability")?;
        }
        Ok(VoterBehavioralStrategy { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> u32 {
        self.probs.len() as u32
    }
}

impl TryFrom<Vec<f64>> for VoterBehavioralStrategy {
    type Error = GameError;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        VoterBehavioralStrategy::new(probs)
    }
}

impl From<VoterBehavioralStrategy> for Vec<f64> {
    fn from(s: VoterBehavioralStrategy) -> Self {
        s.probs
    }
}

/// Realized utilities when the voter casts in `n_cast` and the device first
/// cheats in `n_cheat`.
pub fn payoff(n_cast: u32, n_cheat: CheatRound, params: &GameParams) -> Result<PayoffPair> {
    let n_max = params.n_max;
    if n_cast == 0 || n_cast > n_max {
        return Err(GameError::InvalidArgument(format!(
            "n_cast must lie in 1..={n_max}, got {n_cast}"
        )));
    }
    if let CheatRound::At(m) = n_cheat {
        if m == 0 || m > n_max {
            return Err(GameError::InvalidArgument(format!(
                "n_cheat must lie in 1..={n_max} or be never, got {m}"
            )));
        }
    }
    Ok(payoff_unchecked(n_cast, n_cheat, params))
}

/// [`payoff`] without the range checks, for loops that already iterate over
/// valid rounds.
pub(crate) fn payoff_unchecked(n_cast: u32, n_cheat: CheatRound, params: &GameParams) -> PayoffPair {
    let audits = f64::from(n_cast - 1) * params.c_audit;
    match (Outcome::classify(n_cast, n_cheat), n_cheat) {
        (Outcome::CastAsIntended, _) => PayoffPair::new(params.asucc_v - audits, 0.0),
        (Outcome::Cheated, _) => PayoffPair::new(-params.afail_v - audits, params.asucc_d),
        (Outcome::Caught, CheatRound::At(m)) => {
            PayoffPair::new(-f64::from(m) * params.c_audit, -params.afail_d)
        }
        (Outcome::Caught, CheatRound::Never) => unreachable!("an honest device is never caught"),
    }
}

fn check_voter_dims(s_v: &VoterMixedStrategy, params: &GameParams) -> Result<()> {
    if s_v.n_max() != params.n_max {
        return Err(GameError::InvalidArgument(format!(
            "voter strategy has {} rounds but n_max = {}",
            s_v.n_max(),
            params.n_max
        )));
    }
    Ok(())
}

fn check_device_dims(s_d: &DeviceMixedStrategy, params: &GameParams) -> Result<()> {
    if s_d.n_max() != params.n_max {
        return Err(GameError::InvalidArgument(format!(
            "device strategy has {} rounds but n_max = {}",
            s_d.n_max(),
            params.n_max
        )));
    }
    Ok(())
}

/// Expected utilities of a mixed profile, including the never-cheat atom.
pub fn expected_payoffs(
    s_v: &VoterMixedStrategy,
    s_d: &DeviceMixedStrategy,
    params: &GameParams,
) -> Result<PayoffPair> {
    check_voter_dims(s_v, params)?;
    check_device_dims(s_d, params)?;
    let mut total = PayoffPair::default();
    for (i, &p_v) in s_v.probs.iter().enumerate() {
        for (n_cheat, p_d) in s_d.atoms() {
            let u = payoff_unchecked(i as u32 + 1, n_cheat, params);
            total.u_v += p_v * p_d * u.u_v;
            total.u_d += p_v * p_d * u.u_d;
        }
    }
    Ok(total)
}

/// Voter's expected utility from casting deterministically in `n_cast`
/// against a mixed device.
pub fn voter_payoff_against(
    n_cast: u32,
    s_d: &DeviceMixedStrategy,
    params: &GameParams,
) -> Result<f64> {
    check_device_dims(s_d, params)?;
    let s_v = VoterMixedStrategy::pure(n_cast, params.n_max)?;
    Ok(expected_payoffs(&s_v, s_d, params)?.u_v)
}

/// Device's expected utility from cheating deterministically in `n_cheat`
/// against a mixed voter.
pub fn device_payoff_against(
    s_v: &VoterMixedStrategy,
    n_cheat: CheatRound,
    params: &GameParams,
) -> Result<f64> {
    check_voter_dims(s_v, params)?;
    let s_d = DeviceMixedStrategy::pure(n_cheat, params.n_max)?;
    Ok(expected_payoffs(s_v, &s_d, params)?.u_d)
}

/// Mixed strategy with the same outcome distribution as a behavioral plan:
/// `p_n = (1 - b_1) ... (1 - b_{n-1}) b_n`.
pub fn behavioral_to_mixed(b_v: &VoterBehavioralStrategy) -> Result<VoterMixedStrategy> {
    let mut reach = 1.0;
    let mut probs = Vec::with_capacity(b_v.probs.len());
    for &b in &b_v.probs {
        probs.push(reach * b);
        reach *= 1.0 - b;
    }
    if reach > PROB_TOL {
        return Err(GameError::ResidualProbability { residual: reach });
    }
    VoterMixedStrategy::new(probs)
}

/// Behavioral plan with the same outcome distribution as a mixed strategy:
/// `b_n = p_n / P(n_cast >= n)`.
///
/// Rounds that are reached with probability zero get `b_n = 1`. The tail mass
/// is accumulated from the back, so it is never smaller than `p_n` and every
/// `b_n` lands in `[0, 1]`.
pub fn mixed_to_behavioral(s_v: &VoterMixedStrategy) -> VoterBehavioralStrategy {
    let n = s_v.probs.len();
    let mut probs = vec![1.0; n];
    let mut tail = 0.0;
    for i in (0..n).rev() {
        tail += s_v.probs[i];
        if i + 1 < n && tail > 0.0 {
            probs[i] = (s_v.probs[i] / tail).min(1.0);
        }
    }
    VoterBehavioralStrategy { probs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn preset() -> GameParams {
        GameParams::culnane_teague()
    }

    #[test]
    fn payoff_table_entries() {
        let p = preset();
        assert_eq!(payoff(1, CheatRound::At(1), &p).unwrap(), PayoffPair::new(-3.0, 1.0));
        assert_eq!(payoff(2, CheatRound::At(1), &p).unwrap(), PayoffPair::new(-1.0, -4.0));
        assert_eq!(payoff(1, CheatRound::At(2), &p).unwrap(), PayoffPair::new(2.0, 0.0));
        assert_eq!(payoff(2, CheatRound::At(2), &p).unwrap(), PayoffPair::new(-4.0, 1.0));
        assert_eq!(payoff(1, CheatRound::Never, &p).unwrap(), PayoffPair::new(2.0, 0.0));
        assert_eq!(payoff(2, CheatRound::Never, &p).unwrap(), PayoffPair::new(1.0, 0.0));
    }

    #[test]
    fn payoff_rejects_out_of_range_rounds() {
        let p = preset();
        assert!(matches!(payoff(0, CheatRound::At(1), &p), Err(GameError::InvalidArgument(_))));
        assert!(matches!(payoff(3, CheatRound::At(1), &p), Err(GameError::InvalidArgument(_))));
        assert!(matches!(payoff(1, CheatRound::At(0), &p), Err(GameError::InvalidArgument(_))));
        assert!(matches!(payoff(1, CheatRound::At(3), &p), Err(GameError::InvalidArgument(_))));
    }

    #[test]
    fn params_validation_messages() {
        let err = GameParams::new(2.0, 3.0, 1.0, 4.0, 3.0, 2).unwrap_err();
        assert!(err.to_string().contains("c_audit must be < afail_V"));
        assert!(GameParams::new(0.0, 3.0, 1.0, 4.0, 1.0, 2).is_err());
        assert!(GameParams::new(2.0, 3.0, -1.0, 4.0, 1.0, 2).is_err());
        assert!(GameParams::new(2.0, 3.0, 1.0, f64::NAN, 1.0, 2).is_err());
        assert!(GameParams::new(2.0, 3.0, 1.0, 4.0, 1.0, 0).is_err());
        assert!(GameParams::new(2.0, 3.0, 1.0, 4.0, 1.0, 65).is_err());
        assert!(GameParams::new(2.0, 3.0, 1.0, 4.0, 1.0, 64).is_ok());
    }

    #[test]
    fn params_json_shape() {
        let json = serde_json::to_value(preset()).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "asucc_V": 2.0, "afail_V": 3.0, "asucc_D": 1.0,
                "afail_D": 4.0, "c_audit": 1.0, "n_max": 2
            })
        );
        let bad = r#"{"asucc_V":2,"afail_V":1,"asucc_D":1,"afail_D":4,"c_audit":1,"n_max":2}"#;
        let err = serde_json::from_str::<GameParams>(bad).unwrap_err();
        assert!(err.to_string().contains("c_audit must be < afail_V"));
    }

    #[test]
    fn strategy_json_shapes() {
        let s_v: VoterMixedStrategy = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(s_v.probs(), &[0.25, 0.75]);
        let s_d: DeviceMixedStrategy =
            serde_json::from_str(r#"{"probs": [0.5, 0.25], "p_never": 0.25}"#).unwrap();
        assert_eq!(s_d.p_never(), 0.25);
        assert_eq!(
            serde_json::to_value(&s_d).unwrap(),
            serde_json::json!({"probs": [0.5, 0.25], "p_never": 0.25})
        );
        assert!(serde_json::from_str::<VoterMixedStrategy>("[0.5, 0.6]").is_err());
    }

    #[test]
    fn strategy_validation() {
        assert!(VoterMixedStrategy::new(vec![]).is_err());
        assert!(VoterMixedStrategy::new(vec![1.2, -0.2]).is_err());
        assert!(VoterMixedStrategy::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(VoterMixedStrategy::new(vec![0.5, 0.5 + 5e-9]).is_err());
        assert!(DeviceMixedStrategy::new(vec![0.5, 0.5], 0.1).is_err());
        assert!(VoterBehavioralStrategy::new(vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn example_expected_payoffs() {
        let p = preset();
        let s_v = VoterMixedStrategy::new(vec![5.0 / 6.0, 1.0 / 6.0]).unwrap();
        let s_d = DeviceMixedStrategy::new(vec![0.75, 0.25], 0.0).unwrap();
        let eu = expected_payoffs(&s_v, &s_d, &p).unwrap();
        // -3 * 15/24 + 2 * 5/24 - 1 * 3/24 - 4 * 1/24 = -42/24
        assert_abs_diff_eq!(eu.u_v, -7.0 / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eu.u_d, 1.0 / 6.0, epsilon = 1e-12);

        let eu = expected_payoffs(
            &VoterMixedStrategy::pure(1, 2).unwrap(),
            &DeviceMixedStrategy::honest(2).unwrap(),
            &p,
        )
        .unwrap();
        assert_eq!(eu, PayoffPair::new(2.0, 0.0));
    }

    #[test]
    fn half_half_profile_matches_cell_sum() {
        // Four cells of the concrete table, each with weight 1/4.
        let cells = [(-3.0, 1.0), (2.0, 0.0), (-1.0, -4.0), (-4.0, 1.0)];
        let want_v: f64 = cells.iter().map(|c| c.0).sum::<f64>() / 4.0;
        let want_d: f64 = cells.iter().map(|c| c.1).sum::<f64>() / 4.0;
        let s_v = VoterMixedStrategy::new(vec![0.5, 0.5]).unwrap();
        let s_d = DeviceMixedStrategy::new(vec![0.5, 0.5], 0.0).unwrap();
        let eu = expected_payoffs(&s_v, &s_d, &preset()).unwrap();
        assert_abs_diff_eq!(eu.u_v, want_v, epsilon = 1e-12);
        assert_abs_diff_eq!(eu.u_d, want_d, epsilon = 1e-12);
    }

    #[test]
    fn expected_payoffs_dimension_mismatch() {
        let s_v = VoterMixedStrategy::new(vec![1.0]).unwrap();
        let s_d = DeviceMixedStrategy::uniform(2).unwrap();
        assert!(matches!(
            expected_payoffs(&s_v, &s_d, &preset()),
            Err(GameError::InvalidArgument(_))
        ));
    }

    #[test]
    fn behavioral_conversions() {
        let b = VoterBehavioralStrategy::new(vec![5.0 / 6.0, 1.0]).unwrap();
        let s = behavioral_to_mixed(&b).unwrap();
        assert_abs_diff_eq!(s.probs()[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.probs()[1], 1.0 / 6.0, epsilon = 1e-15);

        let s = behavioral_to_mixed(&VoterBehavioralStrategy::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(s.probs(), &[1.0, 0.0]);

        let b = VoterBehavioralStrategy::new(vec![0.8, 0.801, 0.81, 0.83, 1.0]).unwrap();
        let s = behavioral_to_mixed(&b).unwrap();
        for (got, want) in s.probs().iter().zip([0.8, 0.16, 0.032, 0.006, 0.001]) {
            assert_abs_diff_eq!(*got, want, epsilon = 5e-3);
        }

        let back = mixed_to_behavioral(&VoterMixedStrategy::new(vec![5.0 / 6.0, 1.0 / 6.0]).unwrap());
        assert_abs_diff_eq!(back.probs()[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_eq!(back.probs()[1], 1.0);

        let back = mixed_to_behavioral(&VoterMixedStrategy::pure(1, 2).unwrap());
        assert_eq!(back.probs(), &[1.0, 1.0]);
    }

    #[test]
    fn residual_probability_is_rejected() {
        let b = VoterBehavioralStrategy::new(vec![0.5, 0.5]).unwrap();
        match behavioral_to_mixed(&b) {
            Err(GameError::ResidualProbability { residual }) => assert_abs_diff_eq!(residual, 0.25),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn geometric_mixed_gives_closed_form_behavioral() {
        let r: f64 = 0.2;
        let raw: Vec<f64> = (0..5).map(|i| 0.8 * r.powi(i)).collect();
        let total: f64 = raw.iter().sum();
        let s = VoterMixedStrategy::new(raw.iter().map(|p| p / total).collect()).unwrap();
        let b = mixed_to_behavioral(&s);
        for (i, got) in b.probs().iter().enumerate() {
            let k = 5 - i as i32;
            let want = (1.0 - r) / (1.0 - r.powi(k));
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn honest_device_payoff_is_audit_cost_only() {
        let p = preset().with_n_max(4).unwrap();
        let s_v = VoterMixedStrategy::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let eu = expected_payoffs(&s_v, &DeviceMixedStrategy::honest(4).unwrap(), &p).unwrap();
        let want: f64 = s_v
            .probs()
            .iter()
            .enumerate()
            .map(|(i, q)| q * (p.asucc_v() - i as f64 * p.c_audit()))
            .sum();
        assert_abs_diff_eq!(eu.u_v, want, epsilon = 1e-12);
        assert_eq!(eu.u_d, 0.0);
    }
}
