//! Spatial adjacency between block bounding boxes.

use crate::model::{AdjacencyConfig, Block};

/// Maximum gap, in pixels, across which two blocks still count as adjoining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tolerance(pub u32);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(10)
    }
}

/// Closed rectangle `[x0, x1] × [y0, y1]` in screen coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x: i64, y: i64, w: i64, h: i64) -> Self {
        Rect {
            x0: x,
            y0: y,
            x1: x + w,
            y1: y + h,
        }
    }

    pub fn of(block: &Block) -> Self {
        Rect::new(block.x, block.y, block.w, block.h)
    }

    pub fn contains(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    /// Signed overlap of the x projections: positive is shared length,
    /// negative is the gap between them.
    pub fn overlap_x(&self, other: &Rect) -> i64 {
        self.x1.min(other.x1) - self.x0.max(other.x0)
    }

    pub fn overlap_y(&self, other: &Rect) -> i64 {
        self.y1.min(other.y1) - self.y0.max(other.y0)
    }
}

/// Classifies how two rectangles are adjacent, if at all.
///
/// Containment wins over partial overlap, which wins over adjoining.
/// Adjoining needs a gap of at most `tol` on one axis and a strictly
/// positive overlap on the other, so corner-only contact is not adjacent.
pub fn classify(a: &Rect, b: &Rect, tol: Tolerance) -> Option<AdjacencyConfig> {
    if a.contains(b) || b.contains(a) {
        return Some(AdjacencyConfig::Containment);
    }
    let (ox, oy) = (a.overlap_x(b), a.overlap_y(b));
    if ox > 0 && oy > 0 {
        return Some(AdjacencyConfig::PartialOverlap);
    }
    let t = i64::from(tol.0);
    if (ox > 0 && -oy <= t) || (oy > 0 && -ox <= t) {
        return Some(AdjacencyConfig::Adjoining);
    }
    None
}

pub fn detect_adjacency(a: &Block, b: &Block, tol: Tolerance) -> Option<AdjacencyConfig> {
    classify(&Rect::of(a), &Rect::of(b), tol)
}
