//! Exact simulation of network-nonlocality sharing in an extended bilocal
//! network: two two-qubit sources, a middle party measuring a generalized
//! elegant joint measurement, and two sequential observers on each side (an
//! unsharp one followed by a strong one), evaluated against the nonlinear
//! ternary-input bilocal inequality B = S/3 - T <= 3 + 5Z.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, partial traces, Hermitian eigenvalues
//! - [`measurement`]: observable triads, the joint-measurement basis, pointer
//!   (F, G) pairs
//! - [`channel`]: unsharp and strong measurement updates, joint projection
//! - [`scenario`]: full-experiment assembly into an exact correlation tensor
//! - [`tbg`]: pair marginals, correlators and the inequality report
//! - [`sweep`]: sharpness sweeps, violation windows, onset and visibility
//!   searches
//! - [`emit`]: deterministic CSV/JSON rendering and run manifests
//! - [`cli`]: the command-line front end

pub mod channel;
pub mod cli;
pub mod emit;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod scenario;
pub mod sweep;
pub mod tbg;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix};
pub use measurement::{EjmBasis, ObservableTriad, PointerKind, PointerPair};
pub use scenario::{CorrelationTensor, ScenarioConfig, SourceSpec};
pub use sweep::{SweepRow, SweepSpec, ThresholdResult};
pub use tbg::{PairDistribution, TbgReport, ZMode};
