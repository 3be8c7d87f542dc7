//! Finite-horizon laboratory for disjoint distributional chaos of operator
//! families: seminorm spaces and metrics, integer sets with upper density,
//! closed-form operator powers, multivalued cosets, the twelve disjointness
//! conditions and the sufficient criteria built on them.

// `!(x > 0.0)` is how input guards reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod criteria;
pub mod error;
pub mod indexset;
pub mod mlo;
pub mod operators;
pub mod space;

pub use error::{Error, Result};
pub use indexset::{BlockSet, Density, DensityProfile, ExactSet, PieceSet};
pub use space::{
    GridFunction, IndexDomain, Point, SeminormKind, SeminormSpace, SeqVector, YoungFunction,
};
