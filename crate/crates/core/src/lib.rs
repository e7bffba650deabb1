//! Numerical toolkit for topological vector spaces of measurable functions.
//!
//! The crate works over finite discrete measure spaces and provides:
//!
//! * quasi-normed value spaces and their modulus of concavity ([`quasinorm`]);
//! * the basic neighbourhoods of convergence in measure and their algebra ([`l0`]);
//! * gauges on `L⁺(μ)`, their homogeneity function and modular axioms ([`gauge`]);
//! * the Luxemburg and "bar" functionals derived from a gauge ([`derived`]);
//! * Musielak–Orlicz modulars, their balls and local equivalence tests ([`orlicz`]);
//! * local-basis axioms and completeness machinery for nested ball families
//!   ([`completeness`]).
//!
//! Every checker returns structured results ([`report`]) with witnesses, and
//! all randomness is derived from an explicit seed ([`rng`]).

pub mod completeness;
pub mod derived;
pub mod gauge;
pub mod l0;
pub mod measure;
pub mod orlicz;
pub mod quasinorm;
pub mod report;
pub mod rng;
pub mod sample;
pub mod solver;

pub use derived::{DerivedGauge, DerivedKind};
pub use gauge::{Gauge, GaugeMeta};
pub use measure::{ExtReal, MeasureError, MeasureSpace, PlusFunction, Subset};
pub use orlicz::{MusielakOrliczFunction, MusielakOrliczGauge, OrliczFunction};
pub use quasinorm::{Exponent, QuasiNormSpace, VectorFunction};
pub use report::{AxiomOutcome, AxiomReport, Verdict, Witness};
