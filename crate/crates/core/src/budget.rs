//! Element budgets guarding every closure and product computation.

use crate::error::{Error, Result};

/// Default element budget.
pub const DEFAULT_ELEMENTS: usize = 5_000_000;

/// Pair iterations allowed per product, as a multiple of the element budget.
pub const PAIR_FACTOR: u64 = 200;

/// Limits on the size of materialised sets and on product work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum cardinality of any set produced.
    pub elements: usize,
    /// Maximum number of pair multiplications in a single product.
    pub pairs: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_ELEMENTS)
    }
}

impl Budget {
    pub fn new(elements: usize) -> Self {
        Budget {
            elements,
            pairs: elements as u64 * PAIR_FACTOR,
        }
    }

    pub fn check_size(&self, size: usize, context: &str) -> Result<()> {
        if size > self.elements {
            Err(Error::budget(context, self.elements as u64))
        } else {
            Ok(())
        }
    }

    pub fn check_pairs(&self, pairs: u64, context: &str) -> Result<()> {
        if pairs > self.pairs {
            Err(Error::budget(context, self.pairs))
        } else {
            Ok(())
        }
    }
}
