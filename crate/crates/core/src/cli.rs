//! `benaloh` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 I/O
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::game_model::{
    behavioral_to_mixed, mixed_to_behavioral, DeviceMixedStrategy, GameParams,
    VoterBehavioralStrategy, VoterMixedStrategy,
};
use crate::nash::{nash_solution, verify_equilibrium, NashSolution, DEFAULT_TOL};
use crate::oracle::{
    backward_induction_probe, brute_force_device_br, build_game_tree, grid_sweep_sval,
    history_profile, scan_pure_profiles, terminal_histories, DEFAULT_BR_GRID, DEFAULT_SVAL_GRID,
};
use crate::simulator::{simulate, SimConfig, VoterSpec};
use crate::stackelberg::{
    best_response_device, compare_nash_stackelberg, p_v_ne, stackelberg_value,
    upper_branch_slope, utility_vs_best_response, BestResponseSet,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_IO: i32 = 3;

const DEFAULT_TRIALS: u64 = 1_000_000;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_SWEEP_GRID: usize = 1_000;
const DEFAULT_EPSILON: f64 = 0.01;

/// Sweep CSV header.
pub const SWEEP_HEADER: [&str; 4] = ["p_V", "eu_vs_br", "nash_eu_V", "sval"];

#[derive(Debug, Parser)]
#[command(name = "benaloh", version, about = "Equilibria, Stackelberg analysis and simulation of the Benaloh cast-or-audit game")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, conflicts_with = "example")]
    config: Option<PathBuf>,

    /// Built-in parameter preset instead of a config file.
    #[arg(long, global = true, value_enum)]
    example: Option<Example>,

    /// Print machine-readable JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,

    /// Simulation seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Grid resolution for sweeps (overrides the config).
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Approximation margin for the Stackelberg value.
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,

    /// Output path for sweep data (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Example {
    /// asucc_V=2, afail_V=3, asucc_D=1, afail_D=4, c_audit=1, n_max=2.
    CulnaneTeague,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nash equilibrium strategies and payoffs.
    Nash,
    /// Stackelberg value against the Nash payoff (n_max = 2 only).
    Stackelberg,
    /// Monte Carlo estimate of the payoffs.
    Simulate {
        /// Play the voter through its per-round behavioral form.
        #[arg(long)]
        behavioral: bool,
        /// Number of trials (overrides the config).
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Voter payoff against best response over a p_V grid, as CSV.
    Sweep,
    /// Cross-check the closed forms against brute-force oracles.
    Verify,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub params: Option<GameParams>,
    #[serde(default)]
    pub strategies: StrategyOverrides,
    pub sim: Option<SimSection>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyOverrides {
    pub voter: Option<VoterMixedStrategy>,
    pub voter_behavioral: Option<VoterBehavioralStrategy>,
    pub device: Option<DeviceMixedStrategy>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub grid_n: Option<usize>,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID_INPUT,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        let code = match e {
            GameError::InvariantViolation(_) | GameError::NoInteriorEquilibrium(_) => {
                EXIT_VERIFY_FAILED
            }
            _ => EXIT_INVALID_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A validated configuration ready for the commands.
struct Loaded {
    params: GameParams,
    file: RunConfigFile,
}

impl Loaded {
    fn voter(&self) -> CliResult<Option<VoterMixedStrategy>> {
        let s = &self.file.strategies;
        Ok(match (&s.voter, &s.voter_behavioral) {
            (Some(_), Some(_)) => {
                return Err(CliError::invalid(
                    "strategies: give either voter or voter_behavioral, not both",
                ))
            }
            (Some(v), None) => Some(v.clone()),
            (None, Some(b)) => Some(behavioral_to_mixed(b)?),
            (None, None) => None,
        })
    }
}

fn load(cli: &Cli) -> CliResult<Loaded> {
    let file = match (&cli.config, cli.example) {
        (Some(path), _) => read_config(path)?,
        (None, Some(Example::CulnaneTeague)) => RunConfigFile {
            params: Some(GameParams::culnane_teague()),
            ..RunConfigFile::default()
        },
        (None, None) => {
            return Err(CliError::invalid(
                "no parameters: pass --config <path> or --example culnane-teague",
            ))
        }
    };
    let params = file
        .params
        .ok_or_else(|| CliError::invalid("config is missing the params section"))?;
    let n_max = params.n_max();
    let s = &file.strategies;
    let dims = [
        ("voter", s.voter.as_ref().map(|v| v.n_max())),
        ("voter_behavioral", s.voter_behavioral.as_ref().map(|b| b.n_max())),
        ("device", s.device.as_ref().map(|d| d.n_max())),
    ];
    for (name, len) in dims {
        if let Some(len) = len.filter(|&len| len != n_max) {
            return Err(CliError::invalid(format!(
                "strategies.{name} has {len} rounds but n_max = {n_max}"
            )));
        }
    }
    let loaded = Loaded { params, file };
    loaded.voter()?;
    Ok(loaded)
}

fn read_config(path: &Path) -> CliResult<RunConfigFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::invalid(format!("invalid config {}: {e}", path.display())))
}

/// Fixed six decimals with trailing zeros dropped.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn fmt_vec(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| fmt6(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult<()> {
    writeln!(out, "{text}").map_err(|e| CliError::io(format!("cannot write output: {e}")))
}

fn cmd_nash(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(cli)?;
    let sol = nash_solution(&loaded.params)?;
    if cli.json {
        return write_out(out, &to_json(&sol));
    }
    write_out(out, &nash_table(&sol))
}

fn nash_table(sol: &NashSolution) -> String {
    [
        format!("s_V = {}", fmt_vec(sol.s_v.probs())),
        format!("b_V = {}", fmt_vec(sol.b_v.probs())),
        format!("s_D = {}", fmt_vec(sol.s_d.probs())),
        format!("R = {}", fmt6(sol.ratio)),
        format!("Eu_V = {}", fmt6(sol.eu.u_v)),
        format!("Eu_D = {}", fmt6(sol.eu.u_d)),
    ]
    .join("\n")
}

fn cmd_stackelberg(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(cli)?;
    let epsilon = cli.epsilon.unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0) {
        return Err(CliError::invalid(format!("--epsilon must be > 0, got {epsilon}")));
    }
    let report = compare_nash_stackelberg(&loaded.params, epsilon)?;
    if cli.json {
        return write_out(out, &to_json(&report));
    }
    let table = [
        format!("SVal = {}", fmt6(report.sval)),
        format!("p_V_NE = {}", fmt6(report.p_v_ne)),
        format!("nash_Eu_V = {}", fmt6(report.nash_eu_v)),
        format!("epsilon = {}", fmt6(report.epsilon)),
        format!("p_V_eps = {}", fmt6(report.p_v_eps)),
        format!("Eu_V_eps = {}", fmt6(report.eu_v_eps)),
    ]
    .join("\n");
    write_out(out, &table)
}

fn cmd_simulate(
    cli: &Cli,
    behavioral: bool,
    trials: Option<u64>,
    out: &mut dyn Write,
) -> CliResult<()> {
    let loaded = load(cli)?;
    let params = loaded.params;
    let mixed = match loaded.voter()? {
        Some(v) => v,
        None => nash_solution(&params)?.s_v,
    };
    let device = match &loaded.file.strategies.device {
        Some(d) => d.clone(),
        None => nash_solution(&params)?.s_d,
    };
    let voter = if behavioral {
        VoterSpec::Behavioral(match &loaded.file.strategies.voter_behavioral {
            Some(b) => b.clone(),
            None => mixed_to_behavioral(&mixed),
        })
    } else {
        VoterSpec::Mixed(mixed)
    };
    let sim = loaded.file.sim.as_ref();
    let config = SimConfig {
        params,
        voter,
        device,
        trials: trials
            .or(sim.and_then(|s| s.trials))
            .unwrap_or(DEFAULT_TRIALS),
        seed: cli.seed.or(sim.and_then(|s| s.seed)).unwrap_or(DEFAULT_SEED),
    };
    let result = simulate(&config)?;
    write_out(out, &to_json(&result))
}

/// Rows of the sweep: `(p_V, eu_vs_br, nash_eu_V, sval)` for `p_V = i / grid`.
pub fn sweep_rows(params: &GameParams, grid: usize) -> crate::Result<Vec<[f64; 4]>> {
    if grid == 0 {
        return Err(GameError::InvalidArgument("--grid must be >= 1".into()));
    }
    let sval = stackelberg_value(params)?;
    let nash_eu_v = nash_solution(params)?.eu.u_v;
    (0..=grid)
        .map(|i| {
            let p_v = i as f64 / grid as f64;
            Ok([p_v, utility_vs_best_response(p_v, params)?, nash_eu_v, sval])
        })
        .collect()
}

fn cmd_sweep(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(cli)?;
    let grid = cli
        .grid
        .or(loaded.file.sweep.as_ref().and_then(|s| s.grid_n))
        .unwrap_or(DEFAULT_SWEEP_GRID);
    let rows = sweep_rows(&loaded.params, grid)?;

    let mut buf = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    buf.write_record(SWEEP_HEADER).expect("in-memory write");
    for row in &rows {
        buf.write_record(row.iter().map(|v| format!("{v}")))
            .expect("in-memory write");
    }
    let bytes = buf.into_inner().expect("in-memory flush");

    match &cli.out {
        Some(path) => fs::write(path, &bytes)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(&bytes)
            .map_err(|e| CliError::io(format!("cannot write output: {e}"))),
    }
}

/// One line of the `verify` report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Runs every oracle check that applies to the loaded configuration.
fn verification_checks(loaded: &Loaded, grid: Option<usize>) -> CliResult<Vec<CheckResult>> {
    let params = &loaded.params;
    let sol = nash_solution(params)?;
    let mut checks = Vec::new();

    let s_v = loaded.voter()?.unwrap_or_else(|| sol.s_v.clone());
    let s_d = loaded
        .file
        .strategies
        .device
        .clone()
        .unwrap_or_else(|| sol.s_d.clone());
    let eq = verify_equilibrium(&s_v, &s_d, params, DEFAULT_TOL)?;
    checks.push(CheckResult::new(
        "verify_equilibrium",
        eq.is_equilibrium,
        format!(
            "max deviation gain V = {:e}, D = {:e}",
            eq.max_gain_voter, eq.max_gain_device
        ),
    ));

    let nash_eq = verify_equilibrium(&sol.s_v, &sol.s_d, params, DEFAULT_TOL)?;
    checks.push(CheckResult::new(
        "indifference",
        nash_eq.voter_indifference_residual < DEFAULT_TOL
            && nash_eq.device_indifference_residual < DEFAULT_TOL,
        format!(
            "voter residual = {:e}, device residual = {:e}",
            nash_eq.voter_indifference_residual, nash_eq.device_indifference_residual
        ),
    ));

    let image = behavioral_to_mixed(&sol.b_v)?;
    let gap = image
        .probs()
        .iter()
        .zip(sol.s_v.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    checks.push(CheckResult::new(
        "behavioral_consistency",
        gap <= 1e-12,
        format!("max |p - p(b)| = {gap:e}"),
    ));

    let pure = scan_pure_profiles(params);
    let stable = pure.iter().filter(|c| !c.has_profitable_deviation()).count();
    checks.push(CheckResult::new(
        "no_pure_equilibrium",
        stable == 0,
        format!("{} pure profiles, {stable} without a profitable deviation", pure.len()),
    ));

    let tree = build_game_tree(params);
    let histories = terminal_histories(&tree);
    let mismatches = histories
        .iter()
        .filter(|(h, outcome)| {
            history_profile(h)
                .map(|(n_cast, n_cheat)| crate::game_model::payoff(n_cast, n_cheat, params))
                .is_none_or(|u| u.ok() != Some(*outcome))
        })
        .count();
    checks.push(CheckResult::new(
        "tree_matches_table",
        mismatches == 0,
        format!("{} terminal histories, {mismatches} mismatches", histories.len()),
    ));

    let probe = backward_induction_probe(&tree);
    let expected_second = (params.n_max() > 1).then_some(false);
    checks.push(CheckResult::new(
        "backward_induction_probe",
        probe.last_round_eliminated && probe.second_to_last_eliminable == expected_second,
        format!(
            "last_round_eliminated = {}, second_to_last_eliminable = {}",
            probe.last_round_eliminated,
            probe
                .second_to_last_eliminable
                .map_or("n/a".to_string(), |b| b.to_string())
        ),
    ));

    if params.n_max() == 2 {
        let grid_n = grid.unwrap_or(DEFAULT_SVAL_GRID);
        let sval = stackelberg_value(params)?;
        let (sup, _) = grid_sweep_sval(params, grid_n)?;
        let bound = upper_branch_slope(params) / grid_n as f64;
        checks.push(CheckResult::new(
            "sval_grid_sweep",
            sup < sval && sval - sup <= bound + 1e-12,
            format!("SVal = {sval}, grid sup = {sup}, gap bound = {bound:e}"),
        ));

        let mut points: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        points.push(p_v_ne(params));
        let mut disagreements = 0;
        for &p_v in &points {
            let closed = best_response_device(p_v, params)?;
            let brute = brute_force_device_br(p_v, params, DEFAULT_BR_GRID)?;
            let agrees = match closed {
                BestResponseSet::FullInterval => brute.len() == DEFAULT_BR_GRID + 1,
                _ => brute.len() == 1 && closed.contains(brute[0]),
            };
            if !agrees {
                disagreements += 1;
            }
        }
        checks.push(CheckResult::new(
            "device_best_response",
            disagreements == 0,
            format!("{} voter strategies, {disagreements} disagreements", points.len()),
        ));

        let nash_eu_v = sol.eu.u_v;
        checks.push(CheckResult::new(
            "stackelberg_beats_nash",
            sval > nash_eu_v,
            format!("SVal = {sval}, Nash Eu_V = {nash_eu_v}"),
        ));
    }
    Ok(checks)
}

fn cmd_verify(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(cli)?;
    let checks = verification_checks(&loaded, cli.grid)?;
    let text = if cli.json {
        to_json(&checks)
    } else {
        checks
            .iter()
            .map(|c| {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                format!("{tag} {}: {}", c.name, c.detail)
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    write_out(out, &text)?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_VERIFY_FAILED,
            message: format!("failing checks: {}", failed.join(", ")),
        })
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Nash => cmd_nash(&cli, out),
        Command::Stackelberg => cmd_stackelberg(&cli, out),
        Command::Simulate { behavioral, trials } => cmd_simulate(&cli, *behavioral, *trials, out),
        Command::Sweep => cmd_sweep(&cli, out),
        Command::Verify => cmd_verify(&cli, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
