//! Binary edge maps and the built-in Canny detector.

use std::path::Path;

use crate::pnm::{self, Encoding, GrayImage, PnmError};
use crate::Pixel;

/// Binary edge raster together with its row-major list of edge pixels.
///
/// The point list is the search space of the detector: candidate indices
/// refer to positions in [`EdgeMap::points`], so the ordering is fixed to a
/// row-major scan and is rebuilt whenever the mask changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    points: Vec<Pixel>,
}

impl EdgeMap {
    /// Builds an edge map from a row-major mask.
    ///
    /// # Panics
    /// If `mask.len() != width * height`.
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), width * height, "mask size mismatch");
        let points = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| ((i % width) as i32, (i / width) as i32))
            .collect();
        Self {
            width,
            height,
            mask,
            points,
        }
    }

    /// Builds an edge map from pixel coordinates; points outside the frame are
    /// dropped and duplicates collapse.
    pub fn from_points(width: usize, height: usize, pts: impl IntoIterator<Item = Pixel>) -> Self {
        let mut mask = vec![false; width * height];
        for (x, y) in pts {
            if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                mask[y as usize * width + x as usize] = true;
            }
        }
        Self::from_mask(width, height, mask)
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::from_mask(width, height, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Edge pixels in row-major order (0-based positions).
    pub fn points(&self) -> &[Pixel] {
        &self.points
    }

    /// Number of edge pixels.
    pub fn np(&self) -> usize {
        self.points.len()
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        self.in_bounds(x, y) && self.mask[y as usize * self.width + x as usize]
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Keeps only the edge pixels for which `keep` returns true.
    pub fn retain(&self, mut keep: impl FnMut(Pixel) -> bool) -> Self {
        let mut mask = self.mask.clone();
        for &(x, y) in &self.points {
            if !keep((x, y)) {
                mask[y as usize * self.width + x as usize] = false;
            }
        }
        Self::from_mask(self.width, self.height, mask)
    }

    /// Union of two edge maps of the same size.
    pub fn union(&self, other: &EdgeMap) -> Self {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let mask = self
            .mask
            .iter()
            .zip(&other.mask)
            .map(|(a, b)| *a || *b)
            .collect();
        Self::from_mask(self.width, self.height, mask)
    }
}

/// Reads an edge map from PBM (1 = edge) or PGM (nonzero = edge).
pub fn load_edge_map(path: impl AsRef<Path>) -> Result<EdgeMap, PnmError> {
    let bytes = pnm::read_file(path.as_ref())?;
    let (w, h, mask) = pnm::decode_bitmap(&bytes)?;
    Ok(EdgeMap::from_mask(w, h, mask))
}

/// Writes an edge map as binary PBM (P4).
pub fn save_edge_map(edges: &EdgeMap, path: impl AsRef<Path>) -> Result<(), PnmError> {
    let bytes = pnm::encode_pbm(edges.width, edges.height, &edges.mask, Encoding::Binary);
    pnm::write_file(path.as_ref(), &bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CannyParams {
    pub gaussian_sigma: f64,
    /// Fraction of the maximum gradient magnitude.
    pub low_threshold: f64,
    /// Fraction of the maximum gradient magnitude.
    pub high_threshold: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            gaussian_sigma: 1.4,
            low_threshold: 0.1,
            high_threshold: 0.3,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(format!("gaussian_sigma must be > 0, got {}", self.gaussian_sigma));
        }
        if !(0.0 <= self.low_threshold
            && self.low_threshold <= self.high_threshold
            && self.high_threshold <= 1.0)
        {
            return Err(format!(
                "thresholds must satisfy 0 <= low <= high <= 1, got low={} high={}",
                self.low_threshold, self.high_threshold
            ));
        }
        Ok(())
    }
}

/// Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression and hysteresis. Thresholds are relative to the largest
/// gradient magnitude in the image. Pixels on the one-pixel image border are
/// never reported.
///
/// # Panics
/// If `params` fails [`CannyParams::validate`].
pub fn canny_edges(img: &GrayImage, params: &CannyParams) -> EdgeMap {
    if let Err(e) = params.validate() {
        panic!("invalid Canny parameters: {e}");
    }
    let (w, h) = (img.width(), img.height());
    let smoothed = gaussian_blur(img, params.gaussian_sigma);
    let (gx, gy) = sobel(&smoothed, w, h);
    let mag: Vec<f32> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();

    let max = mag.iter().cloned().fold(0.0f32, f32::max);
    if max <= 1e-6 {
        return EdgeMap::empty(w, h);
    }

    let thin = non_maximum_suppression(&mag, &gx, &gy, w, h);
    let high = params.high_threshold as f32 * max;
    let low = params.low_threshold as f32 * max;
    EdgeMap::from_mask(w, h, hysteresis(&thin, w, h, low, high))
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil().max(1.0) as i32;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k.into_iter().map(|v| v as f32).collect()
}

// Separable blur, edges replicated.
fn gaussian_blur(img: &GrayImage, sigma: f64) -> Vec<f32> {
    let (w, h) = (img.width(), img.height());
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let src: Vec<f32> = img.data().iter().map(|&v| v as f32).collect();
    let mut tmp = vec![0f32; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * row[clamp(x as isize + i as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp[clamp(y as isize + i as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

fn sobel(src: &[f32], w: usize, h: usize) -> (Vec<f32>, Vec<f32>) {
    let mut gx = vec![0f32; w * h];
    let mut gy = vec![0f32; w * h];
    if w < 3 || h < 3 {
        return (gx, gy);
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| {
                src[(y as isize + dy) as usize * w + (x as isize + dx) as usize]
            };
            gx[y * w + x] = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            gy[y * w + x] = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        }
    }
    (gx, gy)
}

// Keeps a pixel when its magnitude is >= the forward neighbour and > the
// backward neighbour along the quantized gradient direction, so plateaus of
// equal magnitude across a symmetric step resolve to one pixel.
fn non_maximum_suppression(mag: &[f32], gx: &[f32], gy: &[f32], w: usize, h: usize) -> Vec<f32> {
    let mut out = vec![0f32; w * h];
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let angle = gy[i].atan2(gx[i]).to_degrees();
            let a = if angle < 0.0 { angle + 180.0 } else { angle };
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&a) {
                (1, 0)
            } else if a < 67.5 {
                (1, 1)
            } else if a < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let fwd = mag[((y as isize + dy) as usize) * w + (x as isize + dx) as usize];
            let back = mag[((y as isize - dy) as usize) * w + (x as isize - dx) as usize];
            if m >= fwd && m > back {
                out[i] = m;
            }
        }
    }
    out
}

fn hysteresis(thin: &[f32], w: usize, h: usize, low: f32, high: f32) -> Vec<bool> {
    let mut mask = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= high && m > 0.0 && !mask[i] {
            mask[i] = true;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (x, y) = ((j % w) as isize, (j / w) as isize);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let k = ny as usize * w + nx as usize;
                        if !mask[k] && thin[k] >= low && thin[k] > 0.0 {
                            mask[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    mask
}
