//! Paradoxical decompositions, piecewise translations and their
//! certificates in finitely generated groups, checked exactly on finite
//! windows.

pub mod cert;
pub mod crossed;
pub mod dyadic;
pub mod embedding;
pub mod error;
pub mod flow;
pub mod group;
pub mod induced;
pub mod matching;
pub mod paradox;
pub mod pwt;
pub mod report;
mod semigroup;
pub mod sets;
pub mod smallsets;
pub mod verify;

pub use error::{Error, Result};
pub use group::{Coords, Elem, GroupSpec, Window};
pub use report::ValidationReport;
pub use sets::{Membership, SetExpr, Universe};
