//! Exact-arithmetic kernels for rank-two Drinfeld modules over the projective
//! line with a degree-two place at infinity, the isogeny recursions between
//! their normalized and minimal models, and the reduced optimal tower over
//! F_{q^4} together with its genus / supersingular-count analytics.

pub mod error;
pub mod ff;
pub mod modules;
pub mod params;
pub mod recursion;
pub mod report;
pub mod skew;
pub mod tower;

pub use error::{Error, Result};
pub use ff::{Field, FieldElement};
pub use modules::{DrinfeldModule, Ideal, Model, ModelParam, ModuleReport, TypeTag};
pub use params::{Mode, ParamsConfig, ReducedCtx, TowerParams};
pub use recursion::{Chain, ChainLevel, ChainRoot, ChainStart};
pub use report::{ReconciliationReport, VerificationMatrix};
pub use skew::SkewPoly;
pub use tower::{GenusRow, IdealFactorization, IharaReport, SupersingularScan, TowerEnumeration, TowerPoint};
