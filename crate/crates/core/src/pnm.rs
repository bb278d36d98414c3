//! Netpbm codecs: PGM (P2/P5) and PBM (P1/P4), plus the grayscale image type.
//!
//! Headers accept arbitrary whitespace and `#` comments between tokens. Binary
//! rasters start after exactly one whitespace byte following the last header
//! token. 16-bit PGM samples are big-endian.

use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format{0}")]
    Unsupported(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("raster data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("malformed raster: {0}")]
    MalformedRaster(String),
    #[error("invalid image: {0}")]
    Invalid(String),
}

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, PnmError> {
        if width == 0 || height == 0 {
            return Err(PnmError::Invalid(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(PnmError::Invalid(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    /// Image filled with a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, PnmError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// Raster encoding of a written Netpbm file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    /// P2 / P1.
    Ascii,
    /// P5 / P4.
    #[default]
    Binary,
}

/// Loads a grayscale image from PGM, PBM or (with the `png` feature) PNG.
///
/// PBM black pixels become 0 and white pixels 255. PGM samples are rescaled
/// from `[0, maxval]` to `[0, 255]` with rounding.
pub fn load_gray_image(path: impl AsRef<Path>) -> Result<GrayImage, PnmError> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    decode_gray(&bytes)
}

pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    if bytes.starts_with(b"\x89PNG") {
        return decode_png(bytes);
    }
    let mut parser = Header::new(bytes);
    let magic = parser.magic()?;
    match magic {
        b'1' | b'4' => {
            let (w, h, bits) = decode_pbm_body(&mut parser, magic == b'4')?;
            let data = bits.into_iter().map(|b| if b { 0 } else { 255 }).collect();
            GrayImage::new(w, h, data)
        }
        b'2' | b'5' => {
            let (w, h, maxval, samples) = decode_pgm_body(&mut parser, magic == b'5')?;
            let data = samples
                .into_iter()
                .map(|s| ((s as u32 * 255 + maxval / 2) / maxval) as u8)
                .collect();
            GrayImage::new(w, h, data)
        }
        other => Err(PnmError::Unsupported(format!(
            ": magic P{}",
            char::from(other)
        ))),
    }
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| PnmError::MalformedRaster(e.to_string()))?
        .into_luma8();
    let (w, h) = img.dimensions();
    GrayImage::new(w as usize, h as usize, img.into_raw())
}

#[cfg(not(feature = "png"))]
fn decode_png(_bytes: &[u8]) -> Result<GrayImage, PnmError> {
    Err(PnmError::Unsupported(
        " (PNG support requires the `png` feature)".into(),
    ))
}

/// Decodes a PBM or PGM into a boolean mask. For PBM, 1 (black) is `true`;
/// for PGM, every nonzero sample is `true`.
pub fn decode_bitmap(bytes: &[u8]) -> Result<(usize, usize, Vec<bool>), PnmError> {
    let mut parser = Header::new(bytes);
    let magic = parser.magic()?;
    match magic {
        b'1' | b'4' => decode_pbm_body(&mut parser, magic == b'4'),
        b'2' | b'5' => {
            let (w, h, _, samples) = decode_pgm_body(&mut parser, magic == b'5')?;
            Ok((w, h, samples.into_iter().map(|s| s != 0).collect()))
        }
        other => Err(PnmError::Unsupported(format!(
            ": magic P{}",
            char::from(other)
        ))),
    }
}

pub fn encode_pgm(img: &GrayImage, encoding: Encoding) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match encoding {
        Encoding::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(img.data());
            out
        }
        Encoding::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in img.data().chunks(w) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

/// Encodes a mask as PBM, `true` written as 1 (black).
pub fn encode_pbm(width: usize, height: usize, mask: &[bool], encoding: Encoding) -> Vec<u8> {
    assert_eq!(mask.len(), width * height, "mask size mismatch");
    match encoding {
        Encoding::Binary => {
            let mut out = format!("P4\n{width} {height}\n").into_bytes();
            let row_bytes = width.div_ceil(8);
            for row in mask.chunks(width) {
                let mut packed = vec![0u8; row_bytes];
                for (x, &bit) in row.iter().enumerate() {
                    if bit {
                        packed[x / 8] |= 0x80 >> (x % 8);
                    }
                }
                out.extend_from_slice(&packed);
            }
            out
        }
        Encoding::Ascii => {
            let mut out = format!("P1\n{width} {height}\n");
            for row in mask.chunks(width) {
                let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>, encoding: Encoding) -> Result<(), PnmError> {
    write_file(path.as_ref(), &encode_pgm(img, encoding))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, PnmError> {
    fs::read(path).map_err(|source| PnmError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PnmError> {
    fs::write(path, bytes).map_err(|source| PnmError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn decode_pbm_body(
    parser: &mut Header<'_>,
    binary: bool,
) -> Result<(usize, usize, Vec<bool>), PnmError> {
    let w = parser.positive("width")?;
    let h = parser.positive("height")?;
    let n = w * h;
    let mut bits = Vec::with_capacity(n);
    if binary {
        parser.single_whitespace()?;
        let row_bytes = w.div_ceil(8);
        let raster = parser.rest();
        let expected = row_bytes * h;
        if raster.len() < expected {
            return Err(PnmError::Truncated {
                expected,
                found: raster.len(),
            });
        }
        for row in raster[..expected].chunks(row_bytes) {
            for x in 0..w {
                bits.push(row[x / 8] & (0x80 >> (x % 8)) != 0);
            }
        }
    } else {
        // P1 samples need not be whitespace separated.
        while bits.len() < n {
            match parser.next_raster_byte() {
                Some(b'0') => bits.push(false),
                Some(b'1') => bits.push(true),
                Some(other) => {
                    return Err(PnmError::MalformedRaster(format!(
                        "unexpected byte {other:#04x} in P1 raster"
                    )))
                }
                None => {
                    return Err(PnmError::Truncated {
                        expected: n,
                        found: bits.len(),
                    })
                }
            }
        }
    }
    Ok((w, h, bits))
}

fn decode_pgm_body(
    parser: &mut Header<'_>,
    binary: bool,
) -> Result<(usize, usize, u32, Vec<u16>), PnmError> {
    let w = parser.positive("width")?;
    let h = parser.positive("height")?;
    let maxval = parser.positive("maxval")?;
    if maxval > 65535 {
        return Err(PnmError::MalformedHeader(format!(
            "maxval {maxval} exceeds 65535"
        )));
    }
    let n = w * h;
    let mut samples = Vec::with_capacity(n);
    if binary {
        parser.single_whitespace()?;
        let raster = parser.rest();
        let wide = maxval > 255;
        let expected = if wide { 2 * n } else { n };
        if raster.len() < expected {
            return Err(PnmError::Truncated {
                expected,
                found: raster.len(),
            });
        }
        if wide {
            samples.extend(
                raster[..expected]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]])),
            );
        } else {
            samples.extend(raster[..expected].iter().map(|&b| b as u16));
        }
    } else {
        for _ in 0..n {
            let v = parser.number("sample")?;
            samples.push(v as u16);
        }
    }
    if let Some(&bad) = samples.iter().find(|&&s| s as usize > maxval) {
        return Err(PnmError::MalformedRaster(format!(
            "sample {bad} exceeds maxval {maxval}"
        )));
    }
    Ok((w, h, maxval as u32, samples))
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn magic(&mut self) -> Result<u8, PnmError> {
        if self.bytes.len() < 2 || self.bytes[0] != b'P' {
            return Err(PnmError::Unsupported(": not a Netpbm file".into()));
        }
        self.pos = 2;
        Ok(self.bytes[1])
    }

    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, PnmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::MalformedHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PnmError::MalformedHeader(format!("{what} out of range")))
    }

    fn positive(&mut self, what: &str) -> Result<usize, PnmError> {
        match self.number(what)? {
            0 => Err(PnmError::MalformedHeader(format!("{what} must be positive"))),
            v => Ok(v),
        }
    }

    fn single_whitespace(&mut self) -> Result<(), PnmError> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(PnmError::MalformedHeader(
                "expected whitespace before raster".into(),
            )),
        }
    }

    fn next_raster_byte(&mut self) -> Option<u8> {
        self.skip_whitespace_and_comments();
        let b = *self.bytes.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}
