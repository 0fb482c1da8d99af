//! The serialized hierarchy text: a JSON-style document whose boxes and
//! points are coordinate-token strings.
//!
//! ```text
//! {"objects": [{"name": "drawer", "bbox": "<10><500><480><990>", "parts": [
//!   {"part_name": "handle", "bbox": "<200><700><300><740>", "affordances": [
//!     {"action": "pull", "point": "<250><720>"}]}]}]}
//! ```
//!
//! Affordance boxes, image ids and target categories are not part of the
//! text; a parsed record carries `affordance_box: None` and an empty id.

use serde::{Deserialize, Serialize};

use super::json::{self, Diagnostic, Kind, Value};
use super::tokens::{decode_box, decode_point, encode_box, encode_point, TokenSyntax};
use crate::error::{ParseError, SerializationError};
use crate::geometry::{BBox, Point};
use crate::model::{normalize_label, Affordance, ObjectNode, PartNode, SceneRecord};
use crate::validate::validate_scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Any deviation from the format aborts with its byte offset.
    Strict,
    /// Malformed entries are skipped and reported; well-formed siblings survive.
    #[default]
    Tolerant,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub recovered: bool,
    pub issues: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    /// `None` exactly when `diagnostics.recovered` is false.
    pub record: Option<SceneRecord>,
    pub diagnostics: ParseDiagnostics,
}

pub const SCHEMA: &str = "SCHEMA";
pub const UNKNOWN_KEY: &str = "UNKNOWN_KEY";
pub const DUPLICATE_KEY: &str = "DUPLICATE_KEY";
pub const MISSING_LIST: &str = "MISSING_LIST";
pub const SKIPPED_OBJECT: &str = "SKIPPED_OBJECT";
pub const SKIPPED_PART: &str = "SKIPPED_PART";
pub const SKIPPED_AFFORDANCE: &str = "SKIPPED_AFFORDANCE";

/// Renders the record in the serialized token format.
pub fn serialize_hierarchy(r: &SceneRecord) -> Result<String, SerializationError> {
    let report = validate_scene(r);
    if let Some(e) = report.errors.first() {
        return Err(SerializationError::InvalidRecord {
            image_id: r.image_id.clone(),
            reason: e.to_string(),
        });
    }
    let (w, h) = (f64::from(r.width), f64::from(r.height));
    let mut out = String::from("{\"objects\": [");
    for (i, obj) in r.objects.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str("{\"name\": ");
        push_json_string(&mut out, &obj.name);
        out.push_str(", \"bbox\": \"");
        out.push_str(&encode_box(&obj.bbox, w, h)?);
        out.push_str("\", \"parts\": [");
        for (j, part) in obj.parts.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str("{\"part_name\": ");
            push_json_string(&mut out, &part.name);
            out.push_str(", \"bbox\": \"");
            out.push_str(&encode_box(&part.bbox, w, h)?);
            out.push_str("\", \"affordances\": [");
            for (k, aff) in part.affordances.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str("{\"action\": ");
                push_json_string(&mut out, &aff.action);
                out.push_str(", \"point\": \"");
                out.push_str(&encode_point(&aff.point, w, h)?);
                out.push_str("\"}");
            }
            out.push_str("]}");
        }
        out.push_str("]}");
    }
    out.push_str("]}");
    Ok(out)
}

fn push_json_string(out: &mut String, s: &str) {
    // serde_json's string escaping cannot fail for &str
    out.push_str(&serde_json::to_string(s).expect("string serialization"));
}

/// Parses serialized hierarchy text for an image of the given size.
///
/// Strict mode returns `Err` on the first deviation. Tolerant mode always
/// returns `Ok`; an unrecoverable document yields `record: None`.
pub fn parse_serialized(
    text: &str,
    width: u32,
    height: u32,
    mode: ParseMode,
) -> Result<ParseOutcome, ParseError> {
    let mut walker = Walker {
        mode,
        width: f64::from(width),
        height: f64::from(height),
        issues: Vec::new(),
    };
    let root = match mode {
        ParseMode::Strict => json::parse_strict(text)?,
        ParseMode::Tolerant => match json::parse_lenient(text) {
            Ok((v, diags)) => {
                walker.issues = diags;
                v
            }
            Err(e) => {
                return Ok(ParseOutcome {
                    record: None,
                    diagnostics: ParseDiagnostics {
                        recovered: false,
                        issues: vec![e.into()],
                    },
                })
            }
        },
    };
    match walker.document(&root) {
        Ok(objects) => Ok(ParseOutcome {
            record: Some(SceneRecord::new("", width, height).with_objects(objects)),
            diagnostics: ParseDiagnostics {
                recovered: true,
                issues: walker.issues,
            },
        }),
        Err(e) if mode == ParseMode::Strict => Err(e),
        Err(e) => {
            walker.issues.push(e.into());
            Ok(ParseOutcome {
                record: None,
                diagnostics: ParseDiagnostics {
                    recovered: false,
                    issues: walker.issues,
                },
            })
        }
    }
}

/// Byte-level entry point; non-UTF-8 input is the only tolerant-mode failure.
pub fn parse_serialized_bytes(
    bytes: &[u8],
    width: u32,
    height: u32,
    mode: ParseMode,
) -> Result<ParseOutcome, SerializationError> {
    let text = std::str::from_utf8(bytes).map_err(|_| SerializationError::NotText)?;
    Ok(parse_serialized(text, width, height, mode)?)
}

struct Walker {
    mode: ParseMode,
    width: f64,
    height: f64,
    issues: Vec<Diagnostic>,
}

type Fields<'v> = Vec<(&'v str, &'v Value)>;

impl Walker {
    fn syntax(&self) -> TokenSyntax {
        match self.mode {
            ParseMode::Strict => TokenSyntax::Exact,
            ParseMode::Tolerant => TokenSyntax::Relaxed,
        }
    }

    /// Records a recoverable deviation; fatal in strict mode.
    fn soft(&mut self, e: ParseError) -> Result<(), ParseError> {
        match self.mode {
            ParseMode::Strict => Err(e),
            ParseMode::Tolerant => {
                self.issues.push(e.into());
                Ok(())
            }
        }
    }

    /// Collects the members of `v`, checking for duplicates and unknown keys.
    fn fields<'v>(
        &mut self,
        v: &'v Value,
        what: &str,
        allowed: &[&str],
    ) -> Result<Fields<'v>, ParseError> {
        let members = v.as_object().ok_or_else(|| {
            ParseError::new(
                v.offset,
                SCHEMA,
                format!("{what} must be an object, found {}", v.type_name()),
            )
        })?;
        let mut out: Fields<'v> = Vec::with_capacity(members.len());
        for m in members {
            if !allowed.contains(&m.key.as_str()) {
                self.soft(ParseError::new(
                    m.key_offset,
                    UNKNOWN_KEY,
                    format!("unexpected key {:?} in {what}", m.key),
                ))?;
                continue;
            }
            if out.iter().any(|(k, _)| *k == m.key) {
                self.soft(ParseError::new(
                    m.key_offset,
                    DUPLICATE_KEY,
                    format!("duplicate key {:?} in {what}; first kept", m.key),
                ))?;
                continue;
            }
            out.push((m.key.as_str(), &m.value));
        }
        Ok(out)
    }

    fn required<'v>(
        fields: &Fields<'v>,
        key: &str,
        owner: &Value,
        what: &str,
    ) -> Result<&'v Value, ParseError> {
        fields
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                ParseError::new(owner.offset, SCHEMA, format!("{what} is missing {key:?}"))
            })
    }

    fn label(v: &Value, what: &str) -> Result<String, ParseError> {
        let s = v
            .as_str()
            .ok_or_else(|| ParseError::new(v.offset, SCHEMA, format!("{what} must be a string")))?;
        if normalize_label(s).is_empty() {
            return Err(ParseError::new(
                v.offset,
                SCHEMA,
                format!("{what} is empty"),
            ));
        }
        Ok(s.to_string())
    }

    fn bbox(&self, v: &Value) -> Result<BBox, ParseError> {
        let s = v
            .as_str()
            .ok_or_else(|| ParseError::new(v.offset, SCHEMA, "bbox must be a token string"))?;
        decode_box(s, self.width, self.height, self.syntax())
            .map_err(|m| ParseError::new(v.offset, SCHEMA, m))
    }

    fn point(&self, v: &Value) -> Result<Point, ParseError> {
        let s = v
            .as_str()
            .ok_or_else(|| ParseError::new(v.offset, SCHEMA, "point must be a token string"))?;
        decode_point(s, self.width, self.height, self.syntax())
            .map_err(|m| ParseError::new(v.offset, SCHEMA, m))
    }

    /// Optional-but-expected list; absence is a soft deviation read as empty.
    fn list<'v>(
        &mut self,
        fields: &Fields<'v>,
        key: &str,
        owner: &Value,
        what: &str,
    ) -> Result<&'v [Value], ParseError> {
        match fields.iter().find(|(k, _)| *k == key) {
            Some((_, v)) => v.as_array().ok_or_else(|| {
                ParseError::new(v.offset, SCHEMA, format!("{what}.{key} must be an array"))
            }),
            None => {
                self.soft(ParseError::new(
                    owner.offset,
                    MISSING_LIST,
                    format!("{what} has no {key:?}; read as empty"),
                ))?;
                Ok(&[])
            }
        }
    }

    fn document(&mut self, root: &Value) -> Result<Vec<ObjectNode>, ParseError> {
        let items = match &root.kind {
            Kind::Object(_) => {
                let fields = self.fields(root, "document", &["objects"])?;
                Self::required(&fields, "objects", root, "document")?
                    .as_array()
                    .ok_or_else(|| {
                        ParseError::new(root.offset, SCHEMA, "\"objects\" must be an array")
                    })?
            }
            Kind::Array(items) => {
                self.soft(ParseError::new(
                    root.offset,
                    SCHEMA,
                    "bare array read as the objects list",
                ))?;
                items
            }
            _ => {
                return Err(ParseError::new(
                    root.offset,
                    SCHEMA,
                    "document must be an object",
                ))
            }
        };
        let mut objects = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            match self.object(item) {
                Ok(o) => objects.push(o),
                Err(e) => self.skip(e, SKIPPED_OBJECT, format!("objects[{i}]"))?,
            }
        }
        Ok(objects)
    }

    fn skip(&mut self, e: ParseError, code: &'static str, path: String) -> Result<(), ParseError> {
        match self.mode {
            ParseMode::Strict => Err(e),
            ParseMode::Tolerant => {
                self.issues.push(Diagnostic::new(
                    e.offset,
                    code,
                    format!("{path} dropped: {}", e.message),
                ));
                Ok(())
            }
        }
    }

    fn object(&mut self, v: &Value) -> Result<ObjectNode, ParseError> {
        let fields = self.fields(v, "object", &["name", "bbox", "parts"])?;
        let name = Self::label(Self::required(&fields, "name", v, "object")?, "object name")?;
        let bbox = self.bbox(Self::required(&fields, "bbox", v, "object")?)?;
        let items = self.list(&fields, "parts", v, "object")?;
        let mut parts = Vec::with_capacity(items.len());
        for (j, item) in items.iter().enumerate() {
            match self.part(item) {
                Ok(p) => parts.push(p),
                Err(e) => self.skip(e, SKIPPED_PART, format!("{name}.parts[{j}]"))?,
            }
        }
        Ok(ObjectNode { name, bbox, parts })
    }

    fn part(&mut self, v: &Value) -> Result<PartNode, ParseError> {
        let fields = self.fields(v, "part", &["part_name", "bbox", "affordances"])?;
        let name = Self::label(
            Self::required(&fields, "part_name", v, "part")?,
            "part name",
        )?;
        let bbox = self.bbox(Self::required(&fields, "bbox", v, "part")?)?;
        let items = self.list(&fields, "affordances", v, "part")?;
        let mut affordances = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            match self.affordance(item) {
                Ok(a) => affordances.push(a),
                Err(e) => self.skip(e, SKIPPED_AFFORDANCE, format!("{name}.affordances[{k}]"))?,
            }
        }
        Ok(PartNode {
            name,
            bbox,
            affordances,
        })
    }

    fn affordance(&mut self, v: &Value) -> Result<Affordance, ParseError> {
        let fields = self.fields(v, "affordance", &["action", "point"])?;
        let action = Self::label(
            Self::required(&fields, "action", v, "affordance")?,
            "action",
        )?;
        let point = self.point(Self::required(&fields, "point", v, "affordance")?)?;
        Ok(Affordance::new(action, point))
    }
}
