//! Multi-stage continuous-time quantum walks for Ising ground-state search.
//!
//! A walk of `m` stages evolves the uniform superposition under
//! `H_I - gamma_k H_G` for `k = 1..m`, where `H_I` is the diagonal Ising
//! Hamiltonian and `H_G` the hypercube adjacency matrix. The crate covers
//! problem generation and exact spectra ([`ising`], [`dataset`]), spectral
//! statistics and spread estimators ([`stats`]), heuristic schedules
//! ([`schedule`], [`hardware`]), state-vector evolution ([`evolver`]),
//! dense infinite-time averages ([`exact`]) and batch experiments
//! ([`harness`]).
//!
//! ```
//! use msqw::{build_schedule, sk_instance, SpreadMethod, Walker};
//!
//! let p = sk_instance(6, 1, 0, false).unwrap();
//! let schedule = build_schedule(&p, 3, SpreadMethod::Gumbel).unwrap();
//! let walker = Walker::new(&p).unwrap();
//! let out = walker.run(&schedule.stages).unwrap();
//! let prob = walker.success_probability(&out.state).unwrap();
//! assert!(prob > 0.0 && prob <= 1.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod evolver;
pub mod exact;
pub mod hardware;
pub mod harness;
pub mod ising;
pub mod schedule;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use evolver::{propagate, HamiltonianAction, RunResult, StateVector, Walker};
pub use exact::{p_inf_nested, p_inf_nested_with, DegeneracyMode, PInfResult};
pub use hardware::{hardware_time, HardwareSchedule};
pub use harness::{curate_hard, fit_scaling, sweep, Mode, SweepConfig, SweepRecord};
pub use ising::{brute_force_spectrum, sk_instance, IsingProblem, SpectrumSummary};
pub use schedule::{build_schedule, Stage, WalkSchedule};
pub use stats::{estimate_spread, SpreadMethod, StatsSummary};
