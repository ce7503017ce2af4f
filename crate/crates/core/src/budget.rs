use std::time::Duration;

use crate::numerics::Precision;

/// Limits shared by the searches.
///
/// `max_height` bounds the witness and zero enumerations: rational and
/// Gaussian-rational coordinates up to that height, and winding rectangles
/// whose centers lie within that max-norm radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_weight: u64,
    pub max_height: u64,
    pub max_bits: Precision,
    pub timeout: Duration,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_weight: 5,
            max_height: 6,
            max_bits: Precision::new(256),
            timeout: Duration::from_secs(10),
        }
    }
}

impl EnumerationBudget {
    pub fn with_weight(mut self, w: u64) -> Self {
        self.max_weight = w;
        self
    }

    pub fn with_height(mut self, h: u64) -> Self {
        self.max_height = h;
        self
    }
}
