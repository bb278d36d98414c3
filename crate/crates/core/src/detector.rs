//! Circle objective and the detection loops built on the DDE engine.
//!
//! A candidate is a triplet of 1-based indices into the edge array. Its circle
//! is rasterized with the midpoint algorithm and every raster point is tested
//! for an edge pixel inside a `window × window` square centered on it. The
//! objective is the fraction of raster points without such support, so 0 is
//! a fully present circle and 1 a circle with no edge evidence at all.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dde::{self, BoxError, DdeConfig, DdeError, Objective};
use crate::edges::EdgeMap;
use crate::geometry::{self, candidate_to_circle, Circle};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("edge map has {0} edge pixels; at least 3 are required")]
    InsufficientEdges(usize),
    #[error("no feasible circle candidate was found")]
    NoFeasibleCandidate,
    #[error("invalid detector configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] DdeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Side of the square tolerance window around each raster point (odd).
    pub window: usize,
    pub min_radius: f64,
    /// Candidates with a larger radius are penalized. `None` uses the image
    /// diagonal.
    pub max_radius: Option<f64>,
    pub max_circles: usize,
    /// Minimum hit ratio for a detection to count as a circle.
    pub completeness_threshold: f64,
    /// Half-width of the annulus erased around a detected circle.
    pub mask_tolerance: f64,
    pub dde: DdeConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window: 5,
            min_radius: 3.0,
            max_radius: None,
            max_circles: 1,
            completeness_threshold: 0.7,
            mask_tolerance: 1.0,
            dde: DdeConfig {
                target_objective: Some(0.0),
                ..DdeConfig::default()
            },
        }
    }
}

impl DetectorConfig {
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), DetectError> {
        let err = |m: String| Err(DetectError::Config(m));
        if self.window == 0 || self.window.is_multiple_of(2) {
            return err(format!("window must be odd and >= 1, got {}", self.window));
        }
        if !(self.min_radius >= 3.0) {
            return err(format!("min_radius must be >= 3, got {}", self.min_radius));
        }
        if let Some(m) = self.max_radius {
            if !(m >= self.min_radius) {
                return err(format!("max_radius {m} is below min_radius"));
            }
        }
        if self.max_circles == 0 {
            return err("max_circles must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.completeness_threshold) {
            return err(format!(
                "completeness_threshold must lie in [0, 1], got {}",
                self.completeness_threshold
            ));
        }
        if !(self.mask_tolerance >= 0.0) {
            return err("mask_tolerance must be >= 0".into());
        }
        if !(self.dde.penalty_cost > 1.0) {
            return err(format!(
                "dde.penalty_cost must exceed 1 (the largest objective value), got {}",
                self.dde.penalty_cost
            ));
        }
        if self.dde.dim != 3 {
            return err(format!("dde.dim must be 3 for circle candidates, got {}", self.dde.dim));
        }
        Ok(())
    }
}

/// A detected circle and how it was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub circle: Circle,
    pub objective: f64,
    pub hit_ratio: f64,
    pub generations: usize,
    /// Wall-clock seconds spent in the search.
    pub elapsed: f64,
}

/// Whether any edge pixel lies in the `window × window` square around
/// `(x, y)`, clipped to the image.
pub fn edge_hit(edges: &EdgeMap, x: i32, y: i32, window: usize) -> bool {
    let half = (window / 2) as i32;
    for yy in y - half..=y + half {
        for xx in x - half..=x + half {
            if edges.contains(xx, yy) {
                return true;
            }
        }
    }
    false
}

/// Summed-area table over the edge mask for O(1) window queries.
#[derive(Debug, Clone)]
pub struct WindowIndex {
    width: i32,
    height: i32,
    // (width + 1) × (height + 1), first row and column zero.
    sums: Vec<u32>,
}

impl WindowIndex {
    pub fn new(edges: &EdgeMap) -> Self {
        let (w, h) = (edges.width(), edges.height());
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        let mask = edges.mask();
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += mask[y * w + x] as u32;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self {
            width: w as i32,
            height: h as i32,
            sums,
        }
    }

    /// Number of edge pixels in the square of side `window` around `(x, y)`.
    #[inline]
    pub fn count(&self, x: i32, y: i32, window: usize) -> u32 {
        let half = (window / 2) as i32;
        let x0 = (x - half).max(0);
        let y0 = (y - half).max(0);
        let x1 = (x + half + 1).min(self.width);
        let y1 = (y + half + 1).min(self.height);
        if x0 >= x1 || y0 >= y1 {
            return 0;
        }
        let s = (self.width + 1) as usize;
        let at = |xx: i32, yy: i32| self.sums[yy as usize * s + xx as usize];
        at(x1, y1) + at(x0, y0) - at(x0, y1) - at(x1, y0)
    }
}

/// Circle-detection objective bound to one edge map.
pub struct CircleObjective<'a> {
    edges: &'a EdgeMap,
    index: WindowIndex,
    window: usize,
    min_radius: f64,
    max_radius: f64,
    penalty: f64,
}

impl<'a> CircleObjective<'a> {
    pub fn new(edges: &'a EdgeMap, cfg: &DetectorConfig) -> Self {
        let diagonal = (edges.width() as f64).hypot(edges.height() as f64);
        Self {
            edges,
            index: WindowIndex::new(edges),
            window: cfg.window,
            min_radius: cfg.min_radius,
            max_radius: cfg.max_radius.unwrap_or(diagonal),
            penalty: cfg.dde.penalty_cost,
        }
    }

    /// J for a 1-based index triplet; the penalty for anything infeasible.
    pub fn evaluate_candidate(&self, candidate: &[i64]) -> f64 {
        let &[i, j, k] = candidate else {
            return self.penalty;
        };
        match candidate_to_circle(i, j, k, self.edges) {
            Ok(c) => self.evaluate_circle(&c),
            Err(_) => self.penalty,
        }
    }

    /// J for an explicit circle.
    pub fn evaluate_circle(&self, c: &Circle) -> f64 {
        if !(c.r >= self.min_radius && c.r <= self.max_radius) || !c.x0.is_finite() || !c.y0.is_finite() {
            return self.penalty;
        }
        let (ns, hits) = self.raster_support(c);
        1.0 - hits as f64 / ns as f64
    }

    /// `(Ns, hits)` for the circle's raster. Points outside the image count
    /// toward Ns but never hit.
    pub fn raster_support(&self, c: &Circle) -> (usize, usize) {
        let (cx, cy, r) = c.rounded();
        let (w, h) = (self.index.width, self.index.height);
        let mut ns = 0usize;
        let mut hits = 0usize;
        geometry::for_each_midpoint(cx, cy, r.max(1), |x, y| {
            ns += 1;
            if x >= 0 && y >= 0 && x < w && y < h && self.index.count(x, y, self.window) > 0 {
                hits += 1;
            }
        });
        (ns, hits)
    }
}

impl Objective for CircleObjective<'_> {
    fn evaluate(&self, candidate: &[i64]) -> Result<f64, BoxError> {
        Ok(self.evaluate_candidate(candidate))
    }
}

/// J for one candidate. Builds the window index on every call; use
/// [`CircleObjective`] for repeated evaluation.
pub fn objective_j(candidate: [i64; 3], edges: &EdgeMap, cfg: &DetectorConfig) -> f64 {
    CircleObjective::new(edges, cfg).evaluate_candidate(&candidate)
}

/// Single-circle detection: evolves index triplets over `edges` and returns
/// the best circle.
pub fn detect_circle<R: Rng + ?Sized>(
    edges: &EdgeMap,
    cfg: &DetectorConfig,
    rng: &mut R,
) -> Result<Detection, DetectError> {
    cfg.validate()?;
    if edges.np() < 3 {
        return Err(DetectError::InsufficientEdges(edges.np()));
    }
    let start = Instant::now();
    let objective = CircleObjective::new(edges, cfg);
    let dde_cfg = DdeConfig {
        lower_bound: 1,
        upper_bound: edges.np() as i64,
        dim: 3,
        ..cfg.dde.clone()
    };
    let result = dde::evolve(&objective, &dde_cfg, rng)?;
    if result.best_objective >= cfg.dde.penalty_cost {
        return Err(DetectError::NoFeasibleCandidate);
    }
    let b = &result.best;
    let circle = candidate_to_circle(b[0], b[1], b[2], edges)
        .expect("non-penalized candidate decodes to a circle");
    Ok(Detection {
        circle,
        objective: result.best_objective,
        hit_ratio: 1.0 - result.best_objective,
        generations: result.generations_run,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Removes every edge pixel within `tol` of the circle's circumference.
pub fn mask_detected(edges: &EdgeMap, c: &Circle, tol: f64) -> EdgeMap {
    edges.retain(|(x, y)| c.radial_distance(x as f64, y as f64) > tol)
}

/// Repeated detect-and-mask, keeping detections whose hit ratio reaches the
/// completeness threshold. Stops at the first rejected detection, when fewer
/// than three edge pixels remain, or when masking removes nothing.
pub fn detect_multiple<R: Rng + ?Sized>(
    edges: &EdgeMap,
    cfg: &DetectorConfig,
    rng: &mut R,
) -> Result<Vec<Detection>, DetectError> {
    detect_loop(edges, cfg, cfg.completeness_threshold, rng)
}

/// Approximates the contents of `edges` by up to `max_circles` circles in
/// discovery order, without completeness rejection.
pub fn approximate_shape<R: Rng + ?Sized>(
    edges: &EdgeMap,
    cfg: &DetectorConfig,
    rng: &mut R,
) -> Result<Vec<Detection>, DetectError> {
    detect_loop(edges, cfg, 0.0, rng)
}

fn detect_loop<R: Rng + ?Sized>(
    edges: &EdgeMap,
    cfg: &DetectorConfig,
    threshold: f64,
    rng: &mut R,
) -> Result<Vec<Detection>, DetectError> {
    cfg.validate()?;
    let mut current = edges.clone();
    let mut found = Vec::new();
    while found.len() < cfg.max_circles && current.np() >= 3 {
        let det = match detect_circle(&current, cfg, rng) {
            Ok(d) => d,
            Err(DetectError::NoFeasibleCandidate) => break,
            Err(e) => return Err(e),
        };
        if det.hit_ratio < threshold {
            break;
        }
        let masked = mask_detected(&current, &det.circle, cfg.mask_tolerance);
        let progressed = masked.np() < current.np();
        found.push(det);
        if !progressed {
            break;
        }
        current = masked;
    }
    Ok(found)
}
