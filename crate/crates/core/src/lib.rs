//! Solver, verifier and simulator for the finite Benaloh challenge viewed as
//! an inspection game between a voter (cast or audit) and an encryption
//! device (encrypt truthfully or cheat).
//!
//! * [`game_model`]: parameters, strategies, payoff table, expectations.
//! * [`nash`]: closed-form Nash equilibria and an equilibrium checker.
//! * [`stackelberg`]: best responses and the Stackelberg value for two rounds.
//! * [`oracle`]: brute-force cross-checks (game tree, grid sweeps).
//! * [`simulator`]: seeded Monte Carlo play.
//! * [`cli`]: the `benaloh` command-line front end.

pub mod cli;
pub mod error;
pub mod game_model;
pub mod nash;
pub mod oracle;
pub mod simulator;
pub mod stackelberg;

pub use error::{GameError, Result};
pub use game_model::{
    behavioral_to_mixed, expected_payoffs, mixed_to_behavioral, payoff, CheatRound,
    DeviceMixedStrategy, GameParams, Outcome, PayoffPair, VoterBehavioralStrategy,
    VoterMixedStrategy,
};
pub use nash::{
    approx_behavioral, nash_device, nash_solution, nash_voter_behavioral, nash_voter_mixed,
    verify_equilibrium, EquilibriumReport, NashSolution,
};
pub use simulator::{simulate, simulate_equivalence, SimConfig, SimResult, VoterSpec};
pub use stackelberg::{
    best_response_device, compare_nash_stackelberg, epsilon_optimal, stackelberg_value,
    utility_vs_best_response, BestResponseSet, StackelbergReport,
};
