//! The digit space Σ: strings, slaloms, the ‖ relation, `C_EK` prefixes and the
//! real-number codec `s ↦ Σ s(m)/(m+3)!`.

mod digits;
mod enumerate;
mod slalom;

pub use digits::{
    alphabet, cek_prefix, extends, parallel, parallel_iff_cek, DigitString, FiniteSupportPoint,
    MAX_LEN,
};
pub use enumerate::{column_choices, count_slaloms, enumerate_slaloms, SlalomIter};
pub use slalom::{escapes, DigitSet, Slalom};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("digit {digit} at column {index} is outside Z_{}", index + 3)]
    DigitOutOfRange { index: usize, digit: usize },
    #[error("length {len} exceeds the maximum {max}")]
    TooLong { len: usize, max: usize },
    #[error("slalom column {column} lies below a base of length {base_len}")]
    ColumnBelowBase { column: usize, base_len: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("parse error: {0}")]
    Parse(String),
}
