//! A small JSON reader that keeps byte offsets on every value.
//!
//! Strict mode accepts exactly RFC 8259 JSON. Lenient mode additionally
//! recovers from the damage typically found in generated text: prose or code
//! fences around the document, trailing commas, trailing text, and output
//! truncated mid-structure. Each recovery is recorded as a [`Diagnostic`].

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub struct Value {
    /// Byte offset of the first character of the value.
    pub offset: usize,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Null,
    Bool(bool),
    Number(f64),
    String(String),
    Array(Vec<Value>),
    Object(Vec<Member>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub key: String,
    pub key_offset: usize,
    pub value: Value,
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self.kind {
            Kind::Null => "null",
            Kind::Bool(_) => "boolean",
            Kind::Number(_) => "number",
            Kind::String(_) => "string",
            Kind::Array(_) => "array",
            Kind::Object(_) => "object",
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match &self.kind {
            Kind::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Value]> {
        match &self.kind {
            Kind::Array(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_object(&self) -> Option<&[Member]> {
        match &self.kind {
            Kind::Object(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.kind {
            Kind::Number(n) => Some(n),
            _ => None,
        }
    }

    /// First member with the given key.
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.as_object()?
            .iter()
            .find(|m| m.key == key)
            .map(|m| &m.value)
    }
}

/// A recovery performed by the lenient reader, or a schema problem found later.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Diagnostic {
    pub offset: usize,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(offset: usize, code: &str, message: impl Into<String>) -> Self {
        Self {
            offset,
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<ParseError> for Diagnostic {
    fn from(e: ParseError) -> Self {
        Diagnostic::new(e.offset, e.code, e.message)
    }
}

pub const LEADING_TEXT: &str = "LEADING_TEXT";
pub const TRAILING_TEXT: &str = "TRAILING_TEXT";
pub const TRAILING_COMMA: &str = "TRAILING_COMMA";
pub const TRUNCATED: &str = "TRUNCATED";
pub const SYNTAX: &str = "SYNTAX";
pub const UNEXPECTED_EOF: &str = "UNEXPECTED_EOF";

/// Parse a complete JSON document.
pub fn parse_strict(text: &str) -> Result<Value, ParseError> {
    let mut p = Reader::new(text, false);
    let v = p.document()?;
    Ok(v)
}

/// Parse with recovery. Fails only when no JSON container can be found or the
/// damage is not one of the recoverable kinds.
pub fn parse_lenient(text: &str) -> Result<(Value, Vec<Diagnostic>), ParseError> {
    let mut p = Reader::new(text, true);
    let v = p.document()?;
    Ok((v, p.diagnostics))
}

enum Stop {
    Eof(usize),
    Fail(ParseError),
}

impl From<ParseError> for Stop {
    fn from(e: ParseError) -> Self {
        Stop::Fail(e)
    }
}

struct Reader<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    lenient: bool,
    truncated: bool,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str, lenient: bool) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            lenient,
            truncated: false,
            diagnostics: Vec::new(),
        }
    }

    fn document(&mut self) -> Result<Value, ParseError> {
        self.skip_ws();
        if self.lenient {
            let start = self.pos;
            match self.bytes[start..]
                .iter()
                .position(|&b| b == b'{' || b == b'[')
            {
                Some(0) => {}
                Some(n) => {
                    self.pos = start + n;
                    self.note(
                        start,
                        LEADING_TEXT,
                        format!("skipped {n} bytes before the document"),
                    );
                }
                None => {
                    return Err(ParseError::new(
                        start,
                        SYNTAX,
                        "no JSON object or array found",
                    ));
                }
            }
        }
        let value = match self.value() {
            Ok(v) => v,
            Err(Stop::Fail(e)) => return Err(e),
            Err(Stop::Eof(at)) => {
                return Err(ParseError::new(
                    at,
                    UNEXPECTED_EOF,
                    "input ended inside a value",
                ));
            }
        };
        self.skip_ws();
        if self.pos < self.bytes.len() {
            if self.lenient {
                let n = self.bytes.len() - self.pos;
                self.note(
                    self.pos,
                    TRAILING_TEXT,
                    format!("ignored {n} bytes after the document"),
                );
            } else {
                return Err(ParseError::new(
                    self.pos,
                    SYNTAX,
                    "unexpected text after the document",
                ));
            }
        }
        Ok(value)
    }

    fn note(&mut self, offset: usize, code: &str, message: String) {
        self.diagnostics
            .push(Diagnostic::new(offset, code, message));
    }

    fn mark_truncated(&mut self) {
        if !self.truncated {
            self.truncated = true;
            let at = self.bytes.len();
            self.note(
                at,
                TRUNCATED,
                "input ended early; open containers were closed".into(),
            );
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while let Some(b' ' | b'\t' | b'\n' | b'\r') = self.peek() {
            self.pos += 1;
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> Stop {
        Stop::Fail(ParseError::new(self.pos, SYNTAX, msg))
    }

    fn value(&mut self) -> Result<Value, Stop> {
        self.skip_ws();
        let offset = self.pos;
        let kind = match self.peek() {
            None => return Err(Stop::Eof(offset)),
            Some(b'{') => self.object()?,
            Some(b'[') => self.array()?,
            Some(b'"') => Kind::String(self.string()?),
            Some(b't') => self.literal("true", Kind::Bool(true))?,
            Some(b'f') => self.literal("false", Kind::Bool(false))?,
            Some(b'n') => self.literal("null", Kind::Null)?,
            Some(b'-' | b'0'..=b'9') => Kind::Number(self.number()?),
            Some(c) => return Err(self.syntax(format!("unexpected character {:?}", c as char))),
        };
        Ok(Value { offset, kind })
    }

    fn literal(&mut self, word: &str, kind: Kind) -> Result<Kind, Stop> {
        let end = self.pos + word.len();
        if end > self.bytes.len() {
            if word.as_bytes().starts_with(&self.bytes[self.pos..]) {
                return Err(Stop::Eof(self.pos));
            }
        } else if &self.bytes[self.pos..end] == word.as_bytes() {
            self.pos = end;
            return Ok(kind);
        }
        Err(self.syntax(format!("expected {word}")))
    }

    fn number(&mut self) -> Result<f64, Stop> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        match self.peek() {
            Some(b'0') => self.pos += 1,
            Some(b'1'..=b'9') => self.digits(),
            None => return Err(Stop::Eof(start)),
            _ => return Err(self.syntax("expected digit")),
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            match self.peek() {
                Some(b'0'..=b'9') => self.digits(),
                None => return Err(Stop::Eof(start)),
                _ => return Err(self.syntax("expected digit after decimal point")),
            }
        }
        if let Some(b'e' | b'E') = self.peek() {
            self.pos += 1;
            if let Some(b'+' | b'-') = self.peek() {
                self.pos += 1;
            }
            match self.peek() {
                Some(b'0'..=b'9') => self.digits(),
                None => return Err(Stop::Eof(start)),
                _ => return Err(self.syntax("expected exponent digits")),
            }
        }
        // Truncation directly after a number may have cut off more digits.
        if self.lenient && self.pos == self.bytes.len() {
            return Err(Stop::Eof(start));
        }
        self.src[start..self.pos]
            .parse::<f64>()
            .map_err(|e| Stop::Fail(ParseError::new(start, SYNTAX, format!("bad number: {e}"))))
    }

    fn digits(&mut self) {
        while let Some(b'0'..=b'9') = self.peek() {
            self.pos += 1;
        }
    }

    fn hex4(&mut self) -> Result<u32, Stop> {
        if self.pos + 4 > self.bytes.len() {
            return Err(Stop::Eof(self.pos));
        }
        let s = &self.src[self.pos..self.pos + 4];
        let v = u32::from_str_radix(s, 16).map_err(|_| self.syntax("bad \\u escape"))?;
        self.pos += 4;
        Ok(v)
    }

    fn string(&mut self) -> Result<String, Stop> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            let run_start = self.pos;
            while let Some(b) = self.peek() {
                if b == b'"' || b == b'\\' || b < 0x20 {
                    break;
                }
                self.pos += 1;
            }
            out.push_str(&self.src[run_start..self.pos]);
            match self.peek() {
                None => return Err(Stop::Eof(start)),
                Some(b'"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let Some(esc) = self.peek() else {
                        return Err(Stop::Eof(start));
                    };
                    self.pos += 1;
                    match esc {
                        b'"' => out.push('"'),
                        b'\\' => out.push('\\'),
                        b'/' => out.push('/'),
                        b'b' => out.push('\u{8}'),
                        b'f' => out.push('\u{c}'),
                        b'n' => out.push('\n'),
                        b'r' => out.push('\r'),
                        b't' => out.push('\t'),
                        b'u' => {
                            let hi = self.hex4()?;
                            let c = if (0xD800..0xDC00).contains(&hi) {
                                if self.bytes.get(self.pos..self.pos + 2) != Some(b"\\u") {
                                    return Err(self.syntax("unpaired surrogate"));
                                }
                                self.pos += 2;
                                let lo = self.hex4()?;
                                if !(0xDC00..0xE000).contains(&lo) {
                                    return Err(self.syntax("invalid low surrogate"));
                                }
                                0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                            } else {
                                hi
                            };
                            out.push(
                                char::from_u32(c)
                                    .ok_or_else(|| self.syntax("invalid code point"))?,
                            );
                        }
                        _ => return Err(self.syntax("invalid escape")),
                    }
                }
                Some(_) => return Err(self.syntax("control character in string")),
            }
        }
    }

    fn array(&mut self) -> Result<Kind, Stop> {
        self.pos += 1;
        let mut items = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(Kind::Array(items));
        }
        loop {
            self.skip_ws();
            match self.peek() {
                None => return self.close_at_eof(Kind::Array(items)),
                Some(b']') if !items.is_empty() => {
                    if !self.lenient {
                        return Err(Stop::Fail(ParseError::new(
                            self.pos,
                            TRAILING_COMMA,
                            "trailing comma in array",
                        )));
                    }
                    self.note(self.pos, TRAILING_COMMA, "trailing comma in array".into());
                    self.pos += 1;
                    return Ok(Kind::Array(items));
                }
                _ => {}
            }
            match self.value() {
                Ok(v) => items.push(v),
                Err(Stop::Eof(_)) if self.lenient => return self.close_at_eof(Kind::Array(items)),
                Err(e) => return Err(e),
            }
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(Kind::Array(items));
                }
                None => return self.close_at_eof(Kind::Array(items)),
                Some(_) => return Err(self.syntax("expected ',' or ']'")),
            }
        }
    }

    fn object(&mut self) -> Result<Kind, Stop> {
        self.pos += 1;
        let mut members = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b'}') {
            self.pos += 1;
            return Ok(Kind::Object(members));
        }
        loop {
            self.skip_ws();
            let key_offset = self.pos;
            match self.peek() {
                None => return self.close_at_eof(Kind::Object(members)),
                Some(b'}') if !members.is_empty() => {
                    if !self.lenient {
                        return Err(Stop::Fail(ParseError::new(
                            self.pos,
                            TRAILING_COMMA,
                            "trailing comma in object",
                        )));
                    }
                    self.note(self.pos, TRAILING_COMMA, "trailing comma in object".into());
                    self.pos += 1;
                    return Ok(Kind::Object(members));
                }
                Some(b'"') => {}
                Some(_) => return Err(self.syntax("expected object key")),
            }
            let key = match self.string() {
                Ok(k) => k,
                Err(Stop::Eof(_)) if self.lenient => {
                    return self.close_at_eof(Kind::Object(members))
                }
                Err(e) => return Err(e),
            };
            self.skip_ws();
            match self.peek() {
                Some(b':') => self.pos += 1,
                None => return self.close_at_eof(Kind::Object(members)),
                Some(_) => return Err(self.syntax("expected ':'")),
            }
            match self.value() {
                Ok(value) => members.push(Member {
                    key,
                    key_offset,
                    value,
                }),
                Err(Stop::Eof(_)) if self.lenient => {
                    return self.close_at_eof(Kind::Object(members))
                }
                Err(e) => return Err(e),
            }
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(Kind::Object(members));
                }
                None => return self.close_at_eof(Kind::Object(members)),
                Some(_) => return Err(self.syntax("expected ',' or '}'")),
            }
        }
    }

    fn close_at_eof(&mut self, partial: Kind) -> Result<Kind, Stop> {
        if self.lenient {
            self.mark_truncated();
            Ok(partial)
        } else {
            Err(Stop::Eof(self.pos))
        }
    }
}
