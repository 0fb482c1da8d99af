//! File and text formats: dataset JSONL, the coordinate-token hierarchy text,
//! and the JSON reader both rely on.

pub mod json;
pub mod jsonl;
pub mod target;
pub mod tokens;

pub use jsonl::{open_jsonl, read_jsonl, write_jsonl, BadLinePolicy, JsonlReader, ReadOutcome};
pub use target::{
    parse_serialized, parse_serialized_bytes, serialize_hierarchy, ParseDiagnostics, ParseMode,
    ParseOutcome,
};
pub use tokens::{dequantize, quantize, CoordBin, TokenSyntax};
