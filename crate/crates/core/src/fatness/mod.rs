//! Exact k-fatness at finite height, escaper search, and the transforms that
//! keep fatness: finite removal, antichain extraction, ‖-pruning.

mod brute;
mod family;
mod search;
mod transform;

pub use brute::brute_force_is_fat;
pub use family::{CylinderFamily, Family, FiniteFamily};
pub use search::{is_fat, FatnessVerdict, SearchStats};
pub use transform::{
    augment_killer, extract_incomparable, extract_to_max_height, prune_parallel, remove_finite,
    ExtractMode, Extraction, GreedyExtraction,
};

use crate::symbolic::{DigitString, Slalom};

/// First member of `f` escaping `s` with length at least `min_len`.
pub fn find_escaper<F: Family>(f: &F, s: &Slalom, min_len: usize) -> Option<DigitString> {
    f.find_escaper(s, min_len)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FatnessError {
    #[error("INSUFFICIENT_FATNESS: no long enough escaper for {slalom}")]
    InsufficientFatness { slalom: Slalom },
    #[error("BASE_NOT_PARALLEL: base {base} is not parallel to {sigma}")]
    BaseNotParallel { base: DigitString, sigma: DigitString },
    #[error("member {member} does not extend base {base}")]
    NotAboveBase { member: DigitString, base: DigitString },
    #[error("width must be at least 1")]
    WidthTooSmall,
}
