//! surfq: a surface-code QEC toolchain.
//!
//! The crate compiles a logical circuit down to a lattice-surgery schedule
//! over a grid of surface-code patches, lowers that schedule to a noisy
//! physical stabilizer circuit with detectors and observables, samples and
//! decodes it at scale, partitions the decoding work into tasks with
//! shape/frame dependencies, and quantifies controller-decoder system
//! requirements (feed-forward latency penalties, channel bandwidth, decoder
//! parallelism) with closed-form models and a deterministic discrete-event
//! simulation.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --release --example census_reference  # schedule metrics
//! cargo run --release --example memory_experiment # logical error vs d
//! cargo run --release --example cds_closed_loop   # latency simulation
//! ```
//!
//! or the pipeline binary (`surfq compile|lower|memory|inject|full|tasks|budget|cds|report`).

pub mod budget;
pub mod cds;
pub mod cli;
pub mod decoder;
pub mod engine;
pub mod error;
pub mod logical;
pub mod pauli;
pub mod physical;
pub mod surface;
pub mod tableau;
pub mod tasks;

pub use error::{Result, SurfqError};
