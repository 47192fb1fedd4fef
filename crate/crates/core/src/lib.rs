//! Holographic search algorithms for binary and multi-level spatial light
//! modulators.
//!
//! The crate models a Fraunhofer hologram as a unitary 2D DFT of the SLM
//! aperture function and optimises the aperture one pixel at a time with
//! Direct Search or Simulated Annealing. Test pixels are drawn either
//! uniformly at random or in order of decreasing quantisation change
//! (sorted pixel selection, SPS).
//!
//! All numerical code is generic over a [`Scalar`] (`f32` or `f64`). The
//! experiments and the CLI use the `f64` aliases exported here.

// `!(x >= 0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod field;
pub mod metrics;
pub mod pgm;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod slm;
pub mod target;

pub use error::{HoloError, Result};
pub use field::{dft2, fresnel_premultiply, idft2, delta_update, ComplexField, DeltaKernel, Dft2, FresnelParams};
pub use metrics::{mse, pearson, relative_improvement, ConvergenceTrace, TraceSample};
pub use rng::{SplitMix64, Stream, Streams};
pub use scalar::Scalar;
pub use search::{
    back_project, direct_search, simulated_annealing, sps_order, AnnealingSchedule, Algorithm,
    PixelOrder, SearchConfig, SearchResult, Selection,
};
pub use slm::{change_map, propose_value, quantise, ChangeMap, Levels, Modulation, ModulationScheme};
pub use target::TargetImage;

pub use num_complex::Complex;

/// Complex field in double precision.
pub type Field = ComplexField<f64>;
/// Single-precision field; transforms work, search runs are not supported at this precision.
pub type Field32 = ComplexField<f32>;
pub type Target = TargetImage<f64>;
pub type Changes = ChangeMap<f64>;
pub type Trace = ConvergenceTrace<f64>;
pub type Outcome = SearchResult<f64>;
pub type Schedule = AnnealingSchedule<f64>;
pub type C64 = Complex<f64>;
