//! Structure-aware evaluation: conditional L1/L2/L3 precision, recall and F1
//! micro-accumulated over a corpus, plus ParseRate.

mod corpus;
mod matching;
mod report;

pub use corpus::{evaluate_corpus, EvalConfig, EvalMode, EvalOutput};
pub use matching::{
    check_threshold, evaluate_record, match_affordances, match_objects, match_parts, parse_rate,
    AffordancePair, LevelCounts, MatchPair, ObjectPair, ParseRateCounts, PartPair, RecordCounts,
    PARSE_RATE_IOU,
};
pub use report::{pct, EvalReport, LevelMetrics, ThresholdReport};
