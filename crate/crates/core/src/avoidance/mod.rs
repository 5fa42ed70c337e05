//! Translate avoidance: the `F_N` oracle, the shrink step, certified Cantor
//! schemes with their hit counter, and the greedy `K - K` sampler.

mod membership;
mod sample;
mod scheme;

pub use membership::{fn_membership, in_attractor, product_avoids_fn, Exact, TupleVerdict, DESCENT_CAP};
pub use sample::{greedy_sample, verify_single_hit, SampleSet};
pub use scheme::{
    build_scheme, shrink_step, translate_hit_count, validate_scheme, CantorScheme, CellVerdict, HitReport,
    SchemeClause, SchemeConfig, SchemeReport, TupleCert,
};

use crate::fractal::FractalError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AvoidError {
    #[error("RESOLUTION_EXHAUSTED: nothing certified up to depth {budget}")]
    ResolutionExhausted { budget: usize },
    #[error("BUDGET_EXCEEDED: {count} tuples exceeds cap {cap}")]
    BudgetExceeded { count: u128, cap: u128 },
    #[error("GRID_EXHAUSTED: {found} of {wanted} points found")]
    GridExhausted { found: usize, wanted: usize },
    #[error("N = {n} is below the required {required}")]
    NBelowChoice { n: usize, required: usize },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Fractal(#[from] FractalError),
}
