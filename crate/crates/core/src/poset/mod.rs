//! Tree conditions built from fat successor families, the fusion engine that
//! runs through them, its independent replayer and the extracted certificate.

mod build;
mod certificate;
mod condition;
mod dense;
mod fusion;
mod replay;

pub use build::build_condition;
pub use certificate::{extract_certificate, validate_certificate, BnCertificate, CertLevel, CertReport, ClauseResult, ClauseStatus};
pub use condition::{
    barrier_check, extend_root_length, in_p0, length_schedule, strengthen_root, validate_condition,
    BarrierReport, ConditionReport, KSchedule, NodeCert, NodeFailure, ScheduleLine, TreeCondition,
};
pub use dense::{dense_open_member, extend_into, DefaultRule, DenseOpenSpec, Membership};
pub use fusion::{
    avoid_extend, dense_open_at, fat_height, fuse, obligation_width, DefaultOracle, FusionConfig,
    FusionError, FusionMode, FusionRun, ObligationRecord, OracleOutput, Outcome, RoundChecks,
    RoundRecord, StepOracle,
};
pub use replay::{replay_run, InvariantCheck, InvariantReport};

use crate::symbolic::DigitString;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("node {0} is not in the condition")]
    NodeAbsent(DigitString),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("empty condition")]
    Empty,
    #[error("NO_FAT_NODE: no node with a {k}-fat successor family")]
    NoFatNode { k: usize },
    #[error("DEPTH_EXHAUSTED: {detail}")]
    DepthExhausted { detail: String },
    #[error("bad dense open set: {0}")]
    BadDenseOpen(String),
}
