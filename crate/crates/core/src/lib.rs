//! Exact computation of the K₁-valued Reidemeister–Turaev torsion of homology
//! cylinders over the surface Σ_{g,1}.
//!
//! Group rings are modeled through a Magnus expansion in the tensor algebra
//! over `H = H₁(Σ_{g,1}; ℚ)`, truncated at a degree `D` that every series
//! carries. All coefficients are arbitrary-precision rationals.
//!
//! Layering, bottom to top:
//!
//! * [`word`]: free-group words, the rational group ring, bar, Fox calculus.
//! * [`series`]: truncated tensor series, exp/log, Magnus expansions.
//! * [`cyclic`]: necklace classes (the target of the log-determinant), the
//!   involution 𝔯 and its eigenprojections.
//! * [`k1`]: series matrices, the log-determinant, the alternating sums Δ_d and
//!   the commutative reduction.
//! * [`johnson`]: expansion automorphisms, Johnson maps, the trace `Tr_d` and the
//!   Magnus matrix.
//! * [`cylinder`]: labeled balanced presentations, the label solver, the
//!   normalized torsion, composition, mirror and the Magnus representation.
//! * [`clasper`]: Y / 1-loop / theta clasper presentations and the closed
//!   formula for 1-loop surgery.
//! * [`sample`] and [`verify`]: seeded random instances and the property
//!   suites run by the CLI and the acceptance target.
//!
//! Full (non-graded) torsion values depend on the Magnus expansion. Unless a
//! different [`series::Expansion`] is passed explicitly, everything is
//! reported relative to the standard expansion `γ_i ↦ 1 + x_i`.

pub mod clasper;
pub mod cyclic;
pub mod cylinder;
pub mod error;
pub mod johnson;
pub mod k1;
pub mod linalg;
pub mod sample;
pub mod series;
pub mod verify;
pub mod word;

mod rational;

pub use clasper::{OneLoopClasper, TreeClasper};
pub use cyclic::{CyclicSeries, CyclicWord, LoopDiagramElement};
pub use cylinder::{CylinderInvariant, LabeledPresentation};
pub use error::{Error, Result};
pub use johnson::{ExpansionAuto, HomDerivation, SymplecticForm};
pub use k1::{CommSeries, K1Value, SeriesMatrix};
pub use rational::{format_q, parse_q, Q};
pub use series::{DegreeBound, Expansion, TensorSeries};
pub use word::{GroupWord, Letter, RingElement};
