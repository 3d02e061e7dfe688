//! Intersection-type cohomology of model stratified spaces with perversity
//! data, stratified Morse-Bott inequalities, and a finite-difference model of
//! the deformed Hodge Laplacian on suspensions.

pub mod catalog;
pub mod cohomology;
pub mod error;
pub mod morse;
pub mod perversity;
pub mod poly;
pub mod problem;
pub mod rational;
pub mod sample;
pub mod space;
pub mod spectral;

pub use error::{Error, Result};
pub use morse::{CriticalComponent, MorseProblem};
pub use perversity::{Subspace, Transform};
pub use poly::GradedPoly;
pub use problem::{Problem, ProblemFile, Report};
pub use space::{GradedBasis, SpaceExpr};
pub use spectral::SpectralModel;
