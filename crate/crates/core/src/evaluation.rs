//! Ground-truth scoring, synthetic scenes and the benchmark runner.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::{detect_circle, detect_multiple, DetectError, Detection, DetectorConfig};
use crate::edges::EdgeMap;
use crate::geometry::{for_each_midpoint, line_pixels, Circle};
use crate::par;
use crate::pnm::GrayImage;
use crate::Pixel;

/// Weights of the center-shift and radius terms of the error score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub eta: f64,
    pub mu: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self { eta: 0.05, mu: 0.1 }
    }
}

/// `η·(|Δx| + |Δy|) + μ·|Δr|`
pub fn error_score(truth: &Circle, detected: &Circle, w: &ScoreWeights) -> f64 {
    w.eta * ((truth.x0 - detected.x0).abs() + (truth.y0 - detected.y0).abs())
        + w.mu * (truth.r - detected.r).abs()
}

/// A detection succeeds when its error score is strictly below 1.
pub fn is_success(es: f64) -> bool {
    es < 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    pub circles: Vec<Circle>,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("circle ({x0}, {y0}, r={r}) does not fit in {width}x{height} with margin {margin}")]
    Placement {
        x0: f64,
        y0: f64,
        r: f64,
        width: usize,
        height: usize,
        margin: f64,
    },
    #[error("could not place {0} after repeated attempts")]
    Crowded(String),
    #[error("invalid scene: {0}")]
    Invalid(String),
}

/// Non-circular distractor drawn as 1-pixel strokes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Segment { a: Pixel, b: Pixel },
    Rectangle { x: i32, y: i32, w: i32, h: i32 },
    Triangle { a: Pixel, b: Pixel, c: Pixel },
    /// Part of a circle's raster between two angles (radians, image
    /// coordinates, counter-clockwise from +x toward −y).
    Arc { circle: Circle, start: f64, sweep: f64 },
}

impl Shape {
    pub fn pixels(&self) -> Vec<Pixel> {
        match *self {
            Shape::Segment { a, b } => line_pixels(a, b),
            Shape::Rectangle { x, y, w, h } => {
                let c = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)];
                polyline(&[c[0], c[1], c[2], c[3], c[0]])
            }
            Shape::Triangle { a, b, c } => polyline(&[a, b, c, a]),
            Shape::Arc { circle, start, sweep } => {
                let (cx, cy, r) = circle.rounded();
                let mut out = Vec::new();
                for_each_midpoint(cx, cy, r, |x, y| {
                    let ang = (-(y - cy) as f64).atan2((x - cx) as f64);
                    let rel = (ang - start).rem_euclid(std::f64::consts::TAU);
                    if rel <= sweep {
                        out.push((x, y));
                    }
                });
                out
            }
        }
    }

    /// Axis-aligned bounding box `(x_min, y_min, x_max, y_max)`.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        let px = self.pixels();
        let xs = px.iter().map(|p| p.0);
        let ys = px.iter().map(|p| p.1);
        (
            xs.clone().min().unwrap_or(0),
            ys.clone().min().unwrap_or(0),
            xs.max().unwrap_or(0),
            ys.max().unwrap_or(0),
        )
    }
}

fn polyline(pts: &[Pixel]) -> Vec<Pixel> {
    pts.windows(2).flat_map(|w| line_pixels(w[0], w[1])).collect()
}

/// Description of a synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub circles: Vec<Circle>,
    #[serde(default)]
    pub shapes: Vec<Shape>,
    /// Salt-and-pepper density applied to the edge map.
    #[serde(default)]
    pub noise_density: f64,
    /// Minimum clearance between each circle and the image border.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    5.0
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    /// Clean render: filled white disks and white distractor strokes on black.
    pub image: GrayImage,
    /// Midpoint rasters of circles and shapes, after salt-and-pepper noise.
    pub edges: EdgeMap,
    pub truth: GroundTruth,
}

/// Draws the scene's circles with the midpoint algorithm and its shapes
/// with Bresenham strokes, then applies noise: every background pixel turns
/// on with probability `noise_density` and every drawn pixel turns off with
/// the same probability.
pub fn generate_synthetic<R: Rng + ?Sized>(spec: &SceneSpec, rng: &mut R) -> Result<SyntheticScene, SynthError> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(SynthError::Invalid("image dimensions must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.noise_density) {
        return Err(SynthError::Invalid(format!(
            "noise density {} outside [0, 1]",
            spec.noise_density
        )));
    }
    for c in &spec.circles {
        check_fit(c, w, h, spec.margin)?;
    }

    let mut drawn = vec![false; w * h];
    let mut gray = vec![0u8; w * h];
    let plot = |mask: &mut Vec<bool>, (x, y): Pixel| {
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            mask[y as usize * w + x as usize] = true;
        }
    };
    for c in &spec.circles {
        let (cx, cy, r) = c.rounded();
        for_each_midpoint(cx, cy, r, |x, y| plot(&mut drawn, (x, y)));
        for y in (cy - r).max(0)..=(cy + r).min(h as i32 - 1) {
            for x in (cx - r).max(0)..=(cx + r).min(w as i32 - 1) {
                if (x as f64 - c.x0).hypot(y as f64 - c.y0) <= c.r {
                    gray[y as usize * w + x as usize] = 255;
                }
            }
        }
    }
    for s in &spec.shapes {
        for p in s.pixels() {
            plot(&mut drawn, p);
            if p.0 >= 0 && p.1 >= 0 && (p.0 as usize) < w && (p.1 as usize) < h {
                gray[p.1 as usize * w + p.0 as usize] = 255;
            }
        }
    }

    let p = spec.noise_density;
    let mask = if p > 0.0 {
        drawn
            .iter()
            .map(|&on| {
                let flip = rng.gen_bool(p);
                on != flip
            })
            .collect()
    } else {
        drawn
    };

    Ok(SyntheticScene {
        image: GrayImage::new(w, h, gray).expect("dimensions checked"),
        edges: EdgeMap::from_mask(w, h, mask),
        truth: GroundTruth {
            width: w,
            height: h,
            circles: spec.circles.clone(),
        },
    })
}

fn check_fit(c: &Circle, w: usize, h: usize, margin: f64) -> Result<(), SynthError> {
    let fits = c.r >= 1.0
        && c.x0 - c.r >= margin
        && c.y0 - c.r >= margin
        && c.x0 + c.r <= w as f64 - 1.0 - margin
        && c.y0 + c.r <= h as f64 - 1.0 - margin;
    if fits {
        Ok(())
    } else {
        Err(SynthError::Placement {
            x0: c.x0,
            y0: c.y0,
            r: c.r,
            width: w,
            height: h,
            margin,
        })
    }
}

/// Draws `count` integer circles with radius in `radius` (inclusive), fully
/// inside the frame with `margin` clearance and at least `gap` pixels apart.
pub fn random_circles<R: Rng + ?Sized>(
    rng: &mut R,
    width: usize,
    height: usize,
    count: usize,
    radius: (i32, i32),
    margin: f64,
    gap: f64,
) -> Result<Vec<Circle>, SynthError> {
    let mut out: Vec<Circle> = Vec::with_capacity(count);
    for n in 0..count {
        let mut placed = false;
        for _ in 0..10_000 {
            let r = rng.gen_range(radius.0..=radius.1) as f64;
            let lo = (r + margin).ceil() as i32;
            let hi_x = (width as f64 - 1.0 - margin - r).floor() as i32;
            let hi_y = (height as f64 - 1.0 - margin - r).floor() as i32;
            if hi_x < lo || hi_y < lo {
                continue;
            }
            let c = Circle::new(rng.gen_range(lo..=hi_x) as f64, rng.gen_range(lo..=hi_y) as f64, r);
            let clear = out
                .iter()
                .all(|o| (o.x0 - c.x0).hypot(o.y0 - c.y0) >= o.r + c.r + gap);
            if clear {
                out.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SynthError::Crowded(format!("circle {} of {count}", n + 1)));
        }
    }
    Ok(out)
}

/// Random segments, rectangles and triangles kept `gap` pixels away from
/// every circle in `avoid`.
pub fn random_distractors<R: Rng + ?Sized>(
    rng: &mut R,
    width: usize,
    height: usize,
    count: usize,
    avoid: &[Circle],
    gap: f64,
) -> Result<Vec<Shape>, SynthError> {
    let (w, h) = (width as i32, height as i32);
    let mut out: Vec<Shape> = Vec::with_capacity(count);
    for n in 0..count {
        let mut placed = false;
        for _ in 0..10_000 {
            let span = (w.min(h) / 3).max(6);
            let ox = rng.gen_range(2..(w - 2).max(3));
            let oy = rng.gen_range(2..(h - 2).max(3));
            let mut pt = || {
                (
                    (ox + rng.gen_range(-span..=span)).clamp(2, w - 3),
                    (oy + rng.gen_range(-span..=span)).clamp(2, h - 3),
                )
            };
            let shape = match n % 3 {
                0 => Shape::Segment { a: pt(), b: pt() },
                1 => {
                    let (x, y) = pt();
                    let sw = rng.gen_range(6..=span);
                    let sh = rng.gen_range(6..=span);
                    Shape::Rectangle {
                        x: x.min(w - 3 - sw).max(2),
                        y: y.min(h - 3 - sh).max(2),
                        w: sw,
                        h: sh,
                    }
                }
                _ => Shape::Triangle { a: pt(), b: pt(), c: pt() },
            };
            let (x0, y0, x1, y1) = shape.bounds();
            if (x1 - x0).max(y1 - y0) < 6 {
                continue;
            }
            let clear = avoid.iter().all(|c| {
                // Distance from circle center to the shape's bounding box.
                let dx = (x0 as f64 - c.x0).max(0.0).max(c.x0 - x1 as f64);
                let dy = (y0 as f64 - c.y0).max(0.0).max(c.y0 - y1 as f64);
                dx.hypot(dy) >= c.r + gap
            });
            if clear {
                out.push(shape);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SynthError::Crowded(format!("distractor {} of {count}", n + 1)));
        }
    }
    Ok(out)
}

/// One fixture of a benchmark suite.
#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub edges: EdgeMap,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// One seed per run; the number of runs is `seeds.len()`.
    pub seeds: Vec<u64>,
    pub weights: ScoreWeights,
    /// Run independent seeds on the rayon pool.
    pub parallel: bool,
    /// Record wall-clock times. When false, time columns are zero and the
    /// report is a pure function of the inputs.
    pub timing: bool,
}

impl BenchOptions {
    pub fn new(seeds: Vec<u64>) -> Self {
        Self {
            seeds,
            weights: ScoreWeights::default(),
            parallel: true,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub image: String,
    pub runs: usize,
    pub mean_time_s: f64,
    pub std_time_s: f64,
    pub success_rate_pct: f64,
    /// Mean over runs that matched at least one circle; NaN if none did.
    pub mean_es: f64,
    pub std_es: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

pub const CSV_HEADER: &str = "image,runs,mean_time_s,std_time_s,success_rate_pct,mean_es,std_es";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.2},{:.6},{:.6}\n",
                csv_field(&r.image),
                r.runs,
                r.mean_time_s,
                r.std_time_s,
                r.success_rate_pct,
                r.mean_es,
                r.std_es
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Outcome of one detection run against its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub seconds: f64,
    pub success: bool,
    /// Mean error score of the matched pairs, `None` when nothing matched.
    pub es: Option<f64>,
}

/// Greedy assignment: repeatedly pairs the truth/detection couple with the
/// smallest error score, each used at most once. Returns `(truth, detection,
/// es)` triples.
pub fn match_detections(truth: &[Circle], found: &[Circle], w: &ScoreWeights) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(f64, usize, usize)> = truth
        .iter()
        .enumerate()
        .flat_map(|(t, tc)| {
            found
                .iter()
                .enumerate()
                .map(move |(d, dc)| (error_score(tc, dc, w), t, d))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_t = vec![false; truth.len()];
    let mut used_d = vec![false; found.len()];
    let mut out = Vec::new();
    for (es, t, d) in pairs {
        if !used_t[t] && !used_d[d] {
            used_t[t] = true;
            used_d[d] = true;
            out.push((t, d, es));
        }
    }
    out
}

/// Detects on one case with one seed: single-circle detection when the truth
/// holds one circle, otherwise multi-circle detection asking for as many
/// circles as the truth holds.
pub fn run_once(case: &BenchCase, cfg: &DetectorConfig, seed: u64, weights: &ScoreWeights) -> Result<RunOutcome, DetectError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expected = case.truth.circles.len();
    let start = Instant::now();
    let found: Vec<Detection> = if expected <= 1 {
        match detect_circle(&case.edges, cfg, &mut rng) {
            Ok(d) => vec![d],
            Err(DetectError::NoFeasibleCandidate) => vec![],
            Err(e) => return Err(e),
        }
    } else {
        let cfg = DetectorConfig {
            max_circles: expected,
            ..cfg.clone()
        };
        detect_multiple(&case.edges, &cfg, &mut rng)?
    };
    let seconds = start.elapsed().as_secs_f64();
    let circles: Vec<Circle> = found.iter().map(|d| d.circle).collect();
    let matched = match_detections(&case.truth.circles, &circles, weights);
    let success = matched.len() == expected && matched.iter().all(|m| is_success(m.2));
    let es = if matched.is_empty() {
        None
    } else {
        Some(matched.iter().map(|m| m.2).sum::<f64>() / matched.len() as f64)
    };
    Ok(RunOutcome { seconds, success, es })
}

/// Runs every case once per seed and aggregates time, success rate and
/// error score. Standard deviations are population deviations.
pub fn run_benchmark(suite: &[BenchCase], cfg: &DetectorConfig, opts: &BenchOptions) -> Result<BenchReport, DetectError> {
    if opts.seeds.is_empty() {
        return Err(DetectError::Config("benchmark needs at least one seed".into()));
    }
    cfg.validate()?;
    let mut rows = Vec::with_capacity(suite.len());
    for case in suite {
        let outcomes = par::map_indexed(opts.parallel, opts.seeds.len(), |i| {
            run_once(case, cfg, opts.seeds[i], &opts.weights)
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
        let times: Vec<f64> = outcomes
            .iter()
            .map(|o| if opts.timing { o.seconds } else { 0.0 })
            .collect();
        let es: Vec<f64> = outcomes.iter().filter_map(|o| o.es).collect();
        let successes = outcomes.iter().filter(|o| o.success).count();
        let (mean_time_s, std_time_s) = mean_std(&times);
        let (mean_es, std_es) = mean_std(&es);
        rows.push(BenchRow {
            image: case.name.clone(),
            runs: outcomes.len(),
            mean_time_s,
            std_time_s,
            success_rate_pct: 100.0 * successes as f64 / outcomes.len() as f64,
            mean_es,
            std_es,
        });
    }
    Ok(BenchReport { rows })
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
