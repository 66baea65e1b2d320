//! Shot-budgeted noisy quantum phase estimation for GHZ magnetometry:
//! exact response oracles, Richardson zero-noise extrapolation,
//! trigonometric response learning, six estimation protocols with Monte
//! Carlo BMSE evaluation, and the matching analytic error bounds.

pub mod bounds;
pub mod error;
pub mod inference;
pub mod noise;
pub mod protocols;
pub mod response;
pub mod seeding;
pub mod source;
pub mod zne;

pub use error::{Error, Result};
pub use noise::{Interrogation, LindbladSpec, NoiseSpec, PrepNoise};
pub use protocols::{PhasePrior, ProtocolKind, ProtocolSpec, SensingSystem};
pub use response::{InvertibleBranch, ResponseFn, ShotEstimate, TrigPolynomial};
pub use source::ResponseSource;
pub use zne::ZneConfig;
