//! Robust transceiver beamforming for a secondary MIMO link sharing spectrum
//! with a single-antenna primary user whose channels are only known up to a
//! norm-bounded error.
//!
//! * [`hermitian`]: dense complex Hermitian kernels (Jacobi eigensolver, square roots, solves).
//! * [`channel`]: channel sampling, the uncertainty model and the robust matrices `A`, `B`, `D`.
//! * [`beamformer`]: single-user receive/transmit design and realized performance.
//! * [`sdp`]: the semidefinite relaxation, rank-one extraction and the full-band multiuser design.
//! * [`allocator`]: interference-budget splits for users on orthogonal sub-bands.
//! * [`harness`]: Monte Carlo campaigns and CSV output.

pub mod allocator;
pub mod beamformer;
pub mod channel;
pub mod error;
pub mod harness;
pub mod hermitian;
pub mod sdp;

pub use error::{Error, Result};
