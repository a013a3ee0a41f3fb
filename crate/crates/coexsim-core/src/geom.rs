//! Planar geometry primitives. Coordinates are meters in a projected plane.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// A point in the scenario plane.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
}

impl Position {
    pub fn new(x_m: f64, y_m: f64) -> Self {
        Position { x_m, y_m }
    }

    pub fn distance_m(&self, other: &Position) -> f64 {
        let dx = self.x_m - other.x_m;
        let dy = self.y_m - other.y_m;
        libm::sqrt(dx * dx + dy * dy)
    }

    pub fn is_finite(&self) -> bool {
        self.x_m.is_finite() && self.y_m.is_finite()
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Rect {
    pub min_x_m: f64,
    pub min_y_m: f64,
    pub max_x_m: f64,
    pub max_y_m: f64,
}

impl Rect {
    pub fn new(min_x_m: f64, min_y_m: f64, max_x_m: f64, max_y_m: f64) -> Self {
        Rect {
            min_x_m,
            min_y_m,
            max_x_m,
            max_y_m,
        }
    }

    /// Tight bounding box of a point set, padded on all sides.
    pub fn bounding(points: impl IntoIterator<Item = Position>, pad_m: f64) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect::new(first.x_m, first.y_m, first.x_m, first.y_m);
        for p in it {
            r.min_x_m = r.min_x_m.min(p.x_m);
            r.min_y_m = r.min_y_m.min(p.y_m);
            r.max_x_m = r.max_x_m.max(p.x_m);
            r.max_y_m = r.max_y_m.max(p.y_m);
        }
        r.min_x_m -= pad_m;
        r.min_y_m -= pad_m;
        r.max_x_m += pad_m;
        r.max_y_m += pad_m;
        Some(r)
    }

    pub fn width_m(&self) -> f64 {
        self.max_x_m - self.min_x_m
    }

    pub fn height_m(&self) -> f64 {
        self.max_y_m - self.min_y_m
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.x_m >= self.min_x_m && p.x_m <= self.max_x_m && p.y_m >= self.min_y_m && p.y_m <= self.max_y_m
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width_m() > 0.0 && self.height_m() > 0.0)
    }
}
