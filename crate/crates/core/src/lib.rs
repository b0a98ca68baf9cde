//! Self-intersection numbers of closed curves on orientable surfaces with
//! boundary, encoded as reduced cyclic words, and the statistics of those
//! numbers over words of a fixed length.
//!
//! The Markov and moment calculus is generic over [`Scalar`]; the aliases
//! below pick the exact and floating instantiations used by the tools.

pub mod clt;
pub mod error;
pub mod intersection;
pub mod markov;
pub mod moments;
pub mod report;
pub mod scalar;
pub mod surface;
pub mod words;

pub use error::{Error, Result};
pub use intersection::{
    count_self_intersections, pair_kernel, self_intersection, self_intersection_definitional,
    self_intersection_of_word, u_k, v_k, IntersectionResult, KernelKind, Witness,
};
pub use markov::{MarkovModel, SampleMode, SamplerConfig};
pub use moments::{limit_constants, MomentReport};
pub use scalar::Scalar;
pub use surface::{Letter, Notation, Surface};
pub use words::{JoinableWord, Necklace, Word};

/// Arbitrary-precision rational used for every exact quantity.
pub type Rational = num_rational::BigRational;

pub type ExactMarkov = MarkovModel<Rational>;
pub type FloatMarkov = MarkovModel<f64>;
pub type ExactMoments = MomentReport<Rational>;
pub type FloatMoments = MomentReport<f64>;
