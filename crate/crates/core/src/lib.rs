//! Finite-resolution toolkit for slalom fatness, tree-condition fusion and
//! translate avoidance of Cantor sets.
//!
//! * [`symbolic`]: digit strings over `∏ Z_{m+3}`, slaloms, escape, ‖.
//! * [`fatness`]: exact k-fatness decisions and the fatness-preserving transforms.
//! * [`poset`]: finite prefixes of tree conditions, builders, fusion, certificates.
//! * [`fractal`]: interval covers, similarity IFS, Minkowski sums, dimensions.
//! * [`avoidance`]: the `F_N` oracle, shrink step, Cantor scheme and greedy sampler.
//!
//! Geometry is generic over [`Scalar`]; the aliases below fix it to exact
//! rationals, which is what the certificates need.

pub mod avoidance;
pub mod fatness;
pub mod fractal;
pub mod poset;
pub mod rng;
pub mod scalar;
pub mod symbolic;

pub use scalar::Scalar;
pub use symbolic::{DigitString, Slalom};

/// Exact rational scalar used for all certified geometry.
pub type Rational = num_rational::BigRational;

pub type Interval = fractal::Interval<Rational>;
pub type IntervalCover = fractal::IntervalCover<Rational>;
pub type SimilarIfs = fractal::SimilarIfs<Rational>;
pub type CantorScheme = avoidance::CantorScheme<Rational>;
pub type SampleSet = avoidance::SampleSet<Rational>;
pub type TupleVerdict = avoidance::TupleVerdict<Rational>;

/// Float variants for quick, uncertified exploration.
pub type IntervalCoverF64 = fractal::IntervalCover<f64>;
pub type SimilarIfsF64 = fractal::SimilarIfs<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
