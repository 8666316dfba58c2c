//! Exact computation of the scale, tidy subgroups and the contraction,
//! Levi and parabolic decompositions of linear endomorphisms over the
//! local fields `Q_p` and `F_p((X))`, together with finite models of the
//! shift and Heisenberg example groups.

pub mod error;
pub mod groups;
pub mod localfield;

pub use error::{Error, Result};
pub use localfield::{AbsValue, FieldElement, FieldKind, FieldSpec};
pub mod matrixlat;
pub mod polynomials;
pub mod sampling;
pub mod spectral;
pub mod tidy;
pub(crate) mod ratio_serde;

pub use matrixlat::{Lattice, Matrix};
pub use polynomials::{NewtonPolygon, Poly};
