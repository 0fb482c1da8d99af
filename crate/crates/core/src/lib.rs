//! Toolkit for hierarchical scene parses: a scene → object → part →
//! affordance data model, the coordinate-token text format, structure-aware
//! evaluation (conditional L1/L2/L3 precision/recall/F1 and ParseRate),
//! flat-triplet conversion, reconstruction and quality control, curriculum
//! sampling and corpus statistics.

pub mod curriculum;
pub mod error;
pub mod eval;
pub mod flat;
pub mod geometry;
pub mod model;
pub mod qc;
pub mod serialization;
pub mod stats;
pub mod validate;

pub use error::{
    EvalError, GeometryError, JsonlError, ParseError, SamplerError, SerializationError,
};
pub use geometry::{iou, point_in_box, BBox, Point};
pub use model::{
    eligibility, normalize_label, strip_placeholders, Affordance, Eligibility, ObjectNode,
    PartNode, SceneRecord, PLACEHOLDER_ACTION, PLACEHOLDER_PART,
};
pub use validate::{validate_scene, validate_scene_with, ValidationConfig, ValidationReport};
