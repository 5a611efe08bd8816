//! Counting field elements with prescribed norm and trace.
//!
//! The central quantity is the number of z in the degree-n extension of
//! F_q with norm a and trace b down to F_q. The crate computes it several
//! independent ways: direct enumeration, point counts on associated
//! Artin-Schreier curves and toric hypersurfaces, character-sum evaluation,
//! and exact closed forms for small q, together with exact interval bounds
//! and a cross-checking verification harness.

pub mod bounds;
pub mod charsum;
pub mod closedforms;
pub mod error;
pub mod fieldtower;
pub mod oracle;
pub mod pnab;

pub use error::{Error, Result};
pub use fieldtower::{FieldElement, FieldTower, Level};
