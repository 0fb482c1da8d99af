//! 1000-bin coordinate quantization and the `<k>` token lexical form.

use std::fmt;

use crate::error::SerializationError;
use crate::geometry::{BBox, Point};

pub const NUM_BINS: u16 = 1000;

/// One of the 1000 relative-coordinate bins, `0..=999`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoordBin(u16);

impl CoordBin {
    pub const MAX: CoordBin = CoordBin(NUM_BINS - 1);

    pub fn new(bin: u16) -> Option<Self> {
        (bin < NUM_BINS).then_some(Self(bin))
    }

    pub fn get(self) -> u16 {
        self.0
    }
}

impl fmt::Display for CoordBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

fn check_extent(extent: f64) -> Result<(), SerializationError> {
    if extent.is_finite() && extent > 0.0 {
        Ok(())
    } else {
        Err(SerializationError::Extent(extent))
    }
}

/// `min(floor(v / extent * 1000), 999)`. Negative inputs land in bin 0.
pub fn quantize(v: f64, extent: f64) -> Result<CoordBin, SerializationError> {
    check_extent(extent)?;
    if !v.is_finite() {
        return Err(SerializationError::Coordinate(v));
    }
    let raw = (v / extent * f64::from(NUM_BINS)).floor();
    let bin = raw.clamp(0.0, f64::from(NUM_BINS - 1)) as u16;
    Ok(CoordBin(bin))
}

/// Bin center in pixels: `(bin + 0.5) / 1000 * extent`.
pub fn dequantize(b: CoordBin, extent: f64) -> Result<f64, SerializationError> {
    check_extent(extent)?;
    Ok((f64::from(b.0) + 0.5) * extent / f64::from(NUM_BINS))
}

pub fn encode_box(b: &BBox, width: f64, height: f64) -> Result<String, SerializationError> {
    Ok(format!(
        "{}{}{}{}",
        quantize(b.x1, width)?,
        quantize(b.y1, height)?,
        quantize(b.x2, width)?,
        quantize(b.y2, height)?
    ))
}

pub fn encode_point(p: &Point, width: f64, height: f64) -> Result<String, SerializationError> {
    Ok(format!(
        "{}{}",
        quantize(p.x, width)?,
        quantize(p.y, height)?
    ))
}

/// Lexical strictness for token strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenSyntax {
    /// `<k>` runs with no whitespace and no leading zeros.
    Exact,
    /// Also accepts whitespace around tokens and zero-padded decimals.
    Relaxed,
}

/// Splits a token string into exactly `N` bins.
pub fn decode_tokens<const N: usize>(
    s: &str,
    syntax: TokenSyntax,
) -> Result<[CoordBin; N], String> {
    let mut out = [CoordBin(0); N];
    let mut rest = s;
    for (i, slot) in out.iter_mut().enumerate() {
        if syntax == TokenSyntax::Relaxed {
            rest = rest.trim_start();
        }
        let body = rest
            .strip_prefix('<')
            .ok_or_else(|| format!("token {} of {N}: expected '<' in {s:?}", i + 1))?;
        let close = body
            .find('>')
            .ok_or_else(|| format!("token {} of {N}: missing '>' in {s:?}", i + 1))?;
        let digits = &body[..close];
        let digits = if syntax == TokenSyntax::Relaxed {
            digits.trim()
        } else {
            digits
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!(
                "token {} of {N}: {digits:?} is not a bin number",
                i + 1
            ));
        }
        if syntax == TokenSyntax::Exact && digits.len() > 1 && digits.starts_with('0') {
            return Err(format!(
                "token {} of {N}: leading zero in {digits:?}",
                i + 1
            ));
        }
        let bin = digits
            .parse::<u32>()
            .ok()
            .and_then(|v| u16::try_from(v).ok())
            .and_then(CoordBin::new)
            .ok_or_else(|| format!("token {} of {N}: bin {digits} outside 0..=999", i + 1))?;
        *slot = bin;
        rest = &body[close + 1..];
    }
    let rest = if syntax == TokenSyntax::Relaxed {
        rest.trim()
    } else {
        rest
    };
    if !rest.is_empty() {
        return Err(format!(
            "unexpected trailing text {rest:?} after {N} tokens"
        ));
    }
    Ok(out)
}

pub fn decode_box(s: &str, width: f64, height: f64, syntax: TokenSyntax) -> Result<BBox, String> {
    let [x1, y1, x2, y2] = decode_tokens::<4>(s, syntax)?;
    let d = |b, e| dequantize(b, e).map_err(|e| e.to_string());
    Ok(BBox::new(
        d(x1, width)?,
        d(y1, height)?,
        d(x2, width)?,
        d(y2, height)?,
    ))
}

pub fn decode_point(
    s: &str,
    width: f64,
    height: f64,
    syntax: TokenSyntax,
) -> Result<Point, String> {
    let [x, y] = decode_tokens::<2>(s, syntax)?;
    let d = |b, e| dequantize(b, e).map_err(|e| e.to_string());
    Ok(Point::new(d(x, width)?, d(y, height)?))
}
