//! Random Fourier-series stochastic measures.
//!
//! `μ(A) = Σᵢ αᵢ εᵢ ∫_A cos(it) dt` with `αᵢ ∈ {0, 1}` given by a
//! [`CoefficientProfile`] and `εᵢ` an independent Rademacher sequence. The
//! induced process is `μ_t = μ((0, t]) = Σᵢ αᵢ εᵢ sin(it)/i`.

mod holder;
mod measure;
mod path;
mod profile;
mod rademacher;

pub use holder::{holder_diagnostic, HolderReport, ScaleRow};
pub use measure::{FourierSM, IntervalMeasure, Mode, TruncationPolicy, DEFAULT_HORIZON};
pub use path::{GridSpec, SampledPath};
pub use profile::{CoefficientProfile, UNBOUNDED};
pub use rademacher::RademacherSequence;
