//! Numerical laboratory for multiscale reconstruction of distributions from
//! coherent germs on dyadic grids.
//!
//! The crate builds mollifier stacks with vanishing moments, evaluates local
//! coherence functionals of germ families, reconstructs a distribution from
//! a coherent germ by mollifier telescoping, measures the reconstruction
//! error in Besov and Triebel-Lizorkin quasinorms, and applies the same
//! pipeline to sew two-parameter processes into paths (Young integration).
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example mollifier_moments
//! cargo run --release --example telescope_identity
//! cargo run --release --example coherence_fields
//! cargo run --release --example quasinorm_scaling
//! cargo run --release --example reconstruct_taylor
//! cargo run --release --example uniqueness_two_bumps
//! cargo run --release --example besov_sewing
//! cargo run --release --example negative_regularity
//! ```
//!
//! A thin `reconlab` binary exposes the same experiments as subcommands
//! (`moments`, `coherence`, `norms`, `reconstruct`, `sewing`, `verify`,
//! `report`) with CSV output for regression tracking.

pub mod cli;
pub mod coherence;
pub mod error;
pub mod germ;
pub mod grid;
pub mod mollifier;
pub mod quasinorm;
pub mod reconstruct;
pub mod sewing;

pub use error::{Error, Result};
pub use grid::{
    ball_average, compensated_sum, convolve, dilate_translate, DyadicGrid, SampledFunction,
    TestClassDictionary,
};
pub use mollifier::MollifierStack;
