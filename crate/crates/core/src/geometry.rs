//! Three-point circles and midpoint circle rasterization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edges::EdgeMap;
use crate::Pixel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate point triplet (collinear or coincident)")]
    Degenerate,
    #[error("edge index {index} outside [1, {np}]")]
    IndexOutOfRange { index: i64, np: usize },
    #[error("radius {0} rounds below 1 pixel")]
    RadiusTooSmall(f64),
}

/// Circle with real-valued center and radius, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub x0: f64,
    pub y0: f64,
    pub r: f64,
}

impl Circle {
    pub fn new(x0: f64, y0: f64, r: f64) -> Self {
        Self { x0, y0, r }
    }

    /// Distance from `(x, y)` to the circumference.
    pub fn radial_distance(&self, x: f64, y: f64) -> f64 {
        ((x - self.x0).hypot(y - self.y0) - self.r).abs()
    }

    /// Integer center and radius used for rasterization, rounded half away
    /// from zero.
    pub fn rounded(&self) -> (i32, i32, i32) {
        (
            self.x0.round() as i32,
            self.y0.round() as i32,
            self.r.round() as i32,
        )
    }
}

/// Circle through three pixels.
///
/// The center is the quotient of two 2x2 determinants over
/// `4((xj-xi)(yk-yi) - (xk-xi)(yj-yi))`; the radius is the distance from the
/// center to `pi`. Determinants are evaluated in exact integer arithmetic.
pub fn circle_from_points(pi: Pixel, pj: Pixel, pk: Pixel) -> Result<Circle, GeometryError> {
    if pi == pj || pj == pk || pi == pk {
        return Err(GeometryError::Degenerate);
    }
    let (xi, yi) = (pi.0 as i64, pi.1 as i64);
    let (xj, yj) = (pj.0 as i64, pj.1 as i64);
    let (xk, yk) = (pk.0 as i64, pk.1 as i64);

    let denom = 4 * ((xj - xi) * (yk - yi) - (xk - xi) * (yj - yi));
    if denom == 0 {
        return Err(GeometryError::Degenerate);
    }
    let si = xi * xi + yi * yi;
    let sj = xj * xj + yj * yj;
    let sk = xk * xk + yk * yk;

    // | sj-si  2(yj-yi) |        | 2(xj-xi)  sj-si |
    // | sk-si  2(yk-yi) |        | 2(xk-xi)  sk-si |
    let det_a = (sj - si) as i128 * (2 * (yk - yi)) as i128
        - (2 * (yj - yi)) as i128 * (sk - si) as i128;
    let det_b = (2 * (xj - xi)) as i128 * (sk - si) as i128
        - (sj - si) as i128 * (2 * (xk - xi)) as i128;

    let x0 = det_a as f64 / denom as f64;
    let y0 = det_b as f64 / denom as f64;
    let r = (x0 - xi as f64).hypot(y0 - yi as f64);
    Ok(Circle { x0, y0, r })
}

/// Maps a 1-based index triplet into the edge array to its circle.
pub fn candidate_to_circle(i: i64, j: i64, k: i64, edges: &EdgeMap) -> Result<Circle, GeometryError> {
    let pts = edges.points();
    let fetch = |idx: i64| {
        if idx < 1 || idx as usize > pts.len() {
            Err(GeometryError::IndexOutOfRange {
                index: idx,
                np: pts.len(),
            })
        } else {
            Ok(pts[idx as usize - 1])
        }
    };
    circle_from_points(fetch(i)?, fetch(j)?, fetch(k)?)
}

/// Rasterized circumference used as the test set of a candidate circle.
///
/// Points outside the image are kept (and counted) but flagged as not inside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPointSet {
    pub points: Vec<Pixel>,
    pub inside: Vec<bool>,
}

impl TestPointSet {
    pub fn ns(&self) -> usize {
        self.points.len()
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
}

/// Midpoint circle rasterization of `c` after rounding its center and radius.
pub fn rasterize_circle(c: &Circle, width: usize, height: usize) -> Result<TestPointSet, GeometryError> {
    let (cx, cy, r) = c.rounded();
    if r < 1 {
        return Err(GeometryError::RadiusTooSmall(c.r));
    }
    let mut points = Vec::with_capacity(8 * r as usize);
    let mut inside = Vec::with_capacity(8 * r as usize);
    for_each_midpoint(cx, cy, r, |x, y| {
        points.push((x, y));
        inside.push(x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height);
    });
    Ok(TestPointSet { points, inside })
}

/// First-octant midpoint points `(x, y)` with `x >= y >= 0`, starting at `(r, 0)`.
pub fn midpoint_octant(r: i32) -> Vec<Pixel> {
    let mut out = Vec::new();
    octant(r, |x, y| out.push((x, y)));
    out
}

#[inline]
fn octant(r: i32, mut emit: impl FnMut(i32, i32)) {
    let (mut x, mut y) = (r, 0);
    let mut d = 1 - r;
    while x >= y {
        emit(x, y);
        y += 1;
        if d < 0 {
            d += 2 * y + 1;
        } else {
            x -= 1;
            d += 2 * (y - x) + 1;
        }
    }
}

/// Visits every distinct midpoint-circle pixel of radius `r >= 1` around
/// `(cx, cy)` exactly once, reflecting the first octant eight ways.
#[inline]
pub fn for_each_midpoint(cx: i32, cy: i32, r: i32, mut visit: impl FnMut(i32, i32)) {
    octant(r, |x, y| {
        if y == 0 {
            visit(cx + x, cy);
            visit(cx, cy + x);
            visit(cx - x, cy);
            visit(cx, cy - x);
        } else if x == y {
            visit(cx + x, cy + x);
            visit(cx - x, cy + x);
            visit(cx - x, cy - x);
            visit(cx + x, cy - x);
        } else {
            visit(cx + x, cy + y);
            visit(cx + y, cy + x);
            visit(cx - y, cy + x);
            visit(cx - x, cy + y);
            visit(cx - x, cy - y);
            visit(cx - y, cy - x);
            visit(cx + y, cy - x);
            visit(cx + x, cy - y);
        }
    });
}

/// Bresenham line from `a` to `b`, both endpoints included.
pub fn line_pixels(a: Pixel, b: Pixel) -> Vec<Pixel> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy) as usize + 1);
    loop {
        out.push((x, y));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}
