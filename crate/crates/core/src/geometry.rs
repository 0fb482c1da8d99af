//! Axis-aligned pixel boxes and interaction points.
//!
//! Coordinates are continuous pixel values in the image frame (origin at the
//! top-left corner). Boxes are stored as `(x1, y1, x2, y2)`.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Axis-aligned box `(x1, y1, x2, y2)` in pixels.
///
/// Construction through [`BBox::new`] does not validate, since predicted
/// records routinely carry malformed boxes that must still be reported.
/// Use [`BBox::try_new`] or [`BBox::check`] where validity is required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

impl BBox {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn try_new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        let b = Self::new(x1, y1, x2, y2);
        b.check()?;
        Ok(b)
    }

    /// Checks finiteness, non-negativity and corner ordering.
    pub fn check(&self) -> Result<(), GeometryError> {
        let coords = [self.x1, self.y1, self.x2, self.y2];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite(*self));
        }
        if coords.iter().any(|&c| c < 0.0) {
            return Err(GeometryError::Negative(*self));
        }
        if self.x1 > self.x2 || self.y1 > self.y2 {
            return Err(GeometryError::BoxOrder(*self));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// True when either side has zero length.
    pub fn is_degenerate(&self) -> bool {
        self.x2 - self.x1 <= 0.0 || self.y2 - self.y1 <= 0.0
    }

    pub fn width(&self) -> f64 {
        (self.x2 - self.x1).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y2 - self.y1).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Area of the overlap with `other` (0 when disjoint).
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// True when `other` lies entirely inside `self` (edges inclusive).
    pub fn contains_box(&self, other: &BBox) -> bool {
        other.x1 >= self.x1 && other.y1 >= self.y1 && other.x2 <= self.x2 && other.y2 <= self.y2
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        point_in_box(p, self)
    }
}

/// Interaction point `(x, y)` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.x >= 0.0 && self.y >= 0.0
    }
}

/// Intersection over union of two boxes.
///
/// Returns 0 when the union is empty (both boxes degenerate). Fails when
/// either box has its corners out of order.
pub fn iou(a: &BBox, b: &BBox) -> Result<f64, GeometryError> {
    for bx in [a, b] {
        if bx.x1 > bx.x2 || bx.y1 > bx.y2 {
            return Err(GeometryError::BoxOrder(*bx));
        }
        if ![bx.x1, bx.y1, bx.x2, bx.y2].iter().all(|c| c.is_finite()) {
            return Err(GeometryError::NonFinite(*bx));
        }
    }
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return Ok(0.0);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Boundary-inclusive point containment.
pub fn point_in_box(p: &Point, b: &BBox) -> bool {
    b.x1 <= p.x && p.x <= b.x2 && b.y1 <= p.y && p.y <= b.y2
}

/// Fraction of `inner` covered by `outer`: `area(inner ∩ outer) / area(inner)`.
///
/// A zero-area `inner` scores 1 when it lies inside `outer` and 0 otherwise.
/// Malformed boxes score 0.
pub fn containment_ratio(inner: &BBox, outer: &BBox) -> f64 {
    if !inner.is_valid() || !outer.is_valid() {
        return 0.0;
    }
    let area = inner.area();
    if area <= 0.0 {
        return if outer.contains_box(inner) { 1.0 } else { 0.0 };
    }
    (inner.intersection_area(outer) / area).clamp(0.0, 1.0)
}
