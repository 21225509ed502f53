//! Simulation and compilation for time-bin boson sampling in a nested
//! fiber-loop interferometer.
//!
//! A pulse train of `n` time bins passes through a length-τ inner loop whose
//! coupler is reconfigured at every bin arrival. One traversal of the train
//! is a [`LoopPass`]; an outer loop replays passes, giving a
//! [`NestedLoopProgram`]. This crate
//!
//! * evaluates the exact time-bin unitary a program induces ([`loop_model`]),
//! * lowers arbitrary unitaries into switch schedules ([`compiler`]),
//! * computes exact multi-photon output statistics through matrix permanents
//!   and samples from them ([`sampler`]),
//! * and runs the uniformity, loss, and timing studies ([`analysis`]).
//!
//! Mode and event indices are zero-based throughout the Rust API. The JSON
//! program format carries one-based switch-event indices `t`; the translation
//! happens in [`io`].

pub mod analysis;
pub mod compiler;
pub mod error;
pub mod io;
pub mod loop_model;
pub mod matrices;
pub mod sampler;

pub use num_complex::Complex64;

pub use analysis::{LossParams, SimilarityStudyResult, TimingParams, TimingReport};
pub use compiler::{GivensStep, PhaseLayer, Strategy};
pub use error::{Error, Result};
pub use loop_model::{LoopPass, NestedLoopProgram, SwitchSetting};
pub use matrices::{ComplexMatrix, UnitaryMatrix};
pub use sampler::{OccupationConfiguration, ProbabilityTable, TableEntry};
