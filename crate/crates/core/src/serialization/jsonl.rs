//! One-record-per-line dataset files with plain pixel coordinates.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::JsonlError;
use crate::model::SceneRecord;

/// What to do with a line that fails to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BadLinePolicy {
    Abort,
    Skip,
}

/// Streams `(line number, item)` pairs; blank lines are ignored.
pub struct JsonlReader<R, T = SceneRecord> {
    inner: R,
    line: usize,
    buf: String,
    _item: PhantomData<T>,
}

impl<R: BufRead, T: DeserializeOwned> JsonlReader<R, T> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line: 0,
            buf: String::new(),
            _item: PhantomData,
        }
    }
}

impl<R: BufRead, T: DeserializeOwned> Iterator for JsonlReader<R, T> {
    type Item = Result<(usize, T), JsonlError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    return Some(Err(JsonlError::Line {
                        line: self.line,
                        message: e.to_string(),
                    }))
                }
            }
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str(text)
                    .map(|item| (self.line, item))
                    .map_err(|e| JsonlError::Line {
                        line: self.line,
                        message: e.to_string(),
                    }),
            );
        }
    }
}

pub fn open_jsonl<T: DeserializeOwned>(
    path: &Path,
) -> Result<JsonlReader<BufReader<File>, T>, JsonlError> {
    let file = File::open(path).map_err(|source| JsonlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(JsonlReader::new(BufReader::new(file)))
}

#[derive(Debug, Clone, Default)]
pub struct ReadOutcome<T = SceneRecord> {
    pub items: Vec<T>,
    /// `(line number, message)` for every skipped line.
    pub bad_lines: Vec<(usize, String)>,
}

/// Reads a whole file, aborting on or skipping malformed lines.
pub fn read_jsonl<T: DeserializeOwned>(
    path: &Path,
    policy: BadLinePolicy,
) -> Result<ReadOutcome<T>, JsonlError> {
    collect(open_jsonl(path)?, policy)
}

pub fn read_jsonl_from<R: BufRead, T: DeserializeOwned>(
    reader: R,
    policy: BadLinePolicy,
) -> Result<ReadOutcome<T>, JsonlError> {
    collect(JsonlReader::new(reader), policy)
}

fn collect<R: BufRead, T: DeserializeOwned>(
    reader: JsonlReader<R, T>,
    policy: BadLinePolicy,
) -> Result<ReadOutcome<T>, JsonlError> {
    let mut out = ReadOutcome {
        items: Vec::new(),
        bad_lines: Vec::new(),
    };
    for item in reader {
        match item {
            Ok((_, v)) => out.items.push(v),
            Err(JsonlError::Line { line, message }) if policy == BadLinePolicy::Skip => {
                out.bad_lines.push((line, message))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn write_jsonl_to<'a, W, T, I>(items: I, mut w: W) -> std::io::Result<()>
where
    W: Write,
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_jsonl<'a, T, I>(items: I, path: &Path) -> Result<(), JsonlError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let io = |source| JsonlError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_jsonl_to(items, BufWriter::new(file)).map_err(io)
}
