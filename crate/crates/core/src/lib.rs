//! Adversarial example detection from the magnitudes of Benford-Fourier
//! coefficients of per-layer network responses.
//!
//! The crate covers the statistical model (generalized Gaussian responses,
//! exact and estimated coefficients, Rayleigh error law, KS tests), a kernel
//! SVM detector, a small from-scratch network with gradient attacks, the
//! end-to-end experiment pipeline and the on-disk formats.

// `!(x > 0.0)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod benford;
pub mod data;
pub mod error;
pub mod ggd;
pub mod io;
pub mod net;
pub mod par;
pub mod pipeline;
pub mod record;
pub mod rng;
pub mod special;
pub mod stats;
pub mod svm;

pub use benford::{
    estimate_bf_coefficient, exact_bf_coefficient, exact_bf_magnitude, extract_batch,
    extract_mbf_features, log_mantissa, BfCoefficient, ExtractionConfig,
};
pub use error::{Error, Result};
pub use ggd::{fit_shape, GgdParams, ShapeFit};
pub use record::{ActivationRecord, AttackId, Group, MbfFeature};
