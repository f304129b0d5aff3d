//! Exact finite computations with approximate groups in nilpotent groups:
//! product sets, covering lemmas, progressions and step-reduction
//! decompositions.

pub mod approx;
pub mod budget;
pub mod covering;
pub mod error;
pub mod group;
pub mod oracle;
pub mod pipeline;
pub mod progressions;
pub mod setcalc;

pub use budget::Budget;
pub use error::{Error, Result};
pub use group::{Element, Group, GroupDescriptor, QuotientView, SubgroupHandle};
pub use setcalc::{GSet, GrowthStats};
