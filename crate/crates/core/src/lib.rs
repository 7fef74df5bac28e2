//! Spectral analysis of dense real symmetric matrices under additive noise.
//!
//! The crate provides four layers, each usable on its own:
//!
//! * [`mat`] / [`eigen`] — symmetric matrices, a cyclic Jacobi eigensolver,
//!   and power-iteration spectral norms;
//! * [`spectral`] — spectral projectors, best rank-`p` approximants,
//!   eigenvalue gaps, and the bilinear noise statistics consumed by the
//!   bound evaluators;
//! * [`contour`] — rectangle contours in the complex plane, resolvent
//!   evaluation, spectral functionals `f_S(A)` by numerical contour
//!   integration, and the segment integrals used to audit the analytic
//!   estimates behind the bounds;
//! * [`bounds`] / [`noise`] — gated perturbation-bound evaluators producing
//!   auditable reports, plus seeded noise ensembles and the noisy low-rank
//!   pipeline.
//!
//! Everything is deterministic: all randomness flows through explicit
//! [`noise::NoiseSpec`] seeds, and no operation consults OS entropy or the
//! clock. The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature only switches float intrinsics and enables `serde/std`.
//!
//! ```
//! use matperturb_core::{eigendecompose, SymmetricMatrix};
//! use matperturb_core::spectral::{best_rank_p, projector};
//!
//! let a = SymmetricMatrix::diagonal(&[3.0, 1.0, -2.0]);
//! let d = eigendecompose(&a).unwrap();
//! assert_eq!(d.eigenvalues(), &[3.0, 1.0, -2.0]);
//! // Magnitude order ranks -2 ahead of 1.
//! assert_eq!(d.singular_order(), &[0, 2, 1]);
//! let leading = projector(&d, &[1]).unwrap();
//! assert_eq!(leading.get(0, 0), 1.0);
//! // The best rank-2 approximation keeps 3 and -2.
//! let a2 = best_rank_p(&d, 2).unwrap();
//! assert_eq!(a2, SymmetricMatrix::diagonal(&[3.0, 0.0, -2.0]));
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
// Index loops mirror the matrix arithmetic they implement; gate comparisons
// use the negated form so NaN statistics fail closed.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod cmat;
pub mod contour;
pub mod eigen;
pub mod error;
pub mod mat;
pub mod noise;
pub mod norms;
pub mod quad;
pub mod spectral;

pub use bounds::{actual_perturbation, BoundName, BoundReport, PerturbationKind};
pub use contour::{ClearanceReport, ContourFn, RectContour};
pub use eigen::{eigendecompose, singular_order, SpectralDecomposition};
pub use error::Error;
pub use mat::{Matrix, SymmetricMatrix};
pub use noise::{sample_noise, NoiseKind, NoiseSpec};
pub use spectral::{compute_stats, GapProfile, PerturbationStats};
