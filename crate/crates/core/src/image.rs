//! Binary and grayscale page rasters: Netpbm i/o, Sauvola binarization,
//! projection profiles and connected components.
//!
//! These are the substrate every segmentation routine works on. All
//! operations are pure; images are immutable after construction.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// Row-major bilevel raster, 1 = ink, 0 = background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// Inclusive pixel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Box2 {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Box2 {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn union(&self, other: &Box2) -> Box2 {
        Box2 {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn intersection_area(&self, other: &Box2) -> usize {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        if x0 > x1 || y0 > y1 {
            0
        } else {
            (x1 - x0 + 1) * (y1 - y0 + 1)
        }
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn iou(&self, other: &Box2) -> f64 {
        let inter = self.intersection_area(other) as f64;
        let union = (self.area() + other.area()) as f64 - inter;
        if union == 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

/// One 8-connected blob of ink pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectedComponent {
    /// Inclusive bounding box.
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub pixel_count: usize,
}

/// Result of [`load_image`]: the payload type follows the file format.
#[derive(Debug, Clone)]
pub enum LoadedImage {
    Gray(GrayImage),
    Binary(BinaryImage),
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("image dimensions", "width and height must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::param(
                "image data",
                format!("payload length {} != {}x{}", data.len(), width, height),
            ));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("image dimensions", "width and height must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::param(
                "image data",
                format!("payload length {} != {}x{}", data.len(), width, height),
            ));
        }
        if let Some(bad) = data.iter().find(|&&v| v > 1) {
            return Err(Error::param("image data", format!("value {bad} not in {{0,1}}")));
        }
        Ok(BinaryImage { width, height, data })
    }

    /// All-background canvas.
    pub fn blank(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        debug_assert!(v <= 1);
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn ink_count(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    /// Copy of the rectangle `x0..=x1` x `y0..=y1` (inclusive, in bounds).
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryImage {
        assert!(x0 <= x1 && x1 < self.width && y0 <= y1 && y1 < self.height);
        let w = x1 - x0 + 1;
        let h = y1 - y0 + 1;
        let mut data = Vec::with_capacity(w * h);
        for y in y0..=y1 {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x1 + 1]);
        }
        BinaryImage { width: w, height: h, data }
    }

    /// Tight bounding box of all ink, or None for an all-background image.
    pub fn ink_bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bounds: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) == 1 {
                    bounds = Some(match bounds {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        bounds
    }
}

// ---------------------------------------------------------------------------
// Netpbm readers/writers (PBM P1/P4, PGM P2/P5)
// ---------------------------------------------------------------------------

struct PnmParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmParser<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        PnmParser { bytes, pos: 0 }
    }

    /// Next whitespace-separated token, skipping `#` comments.
    fn token(&mut self) -> Result<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return Err(Error::PnmFormat("unexpected end of header".into()));
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::PnmFormat(format!("bad {what}: {:?}", String::from_utf8_lossy(tok))))
    }

    /// Consume exactly one whitespace byte, the separator before a raw payload.
    fn raw_payload(&mut self) -> Result<&'a [u8]> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err(Error::PnmFormat("missing separator before raw payload".into()));
        }
        self.pos += 1;
        Ok(&self.bytes[self.pos..])
    }
}

/// Load a PGM (P2/P5) as grayscale or a PBM (P1/P4) as binary.
///
/// PBM black (1) maps to ink. PGM maxval above 255 is rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes)
}

pub fn decode_pnm(bytes: &[u8]) -> Result<LoadedImage> {
    let mut p = PnmParser::new(bytes);
    let magic = p.token()?;
    match magic {
        b"P1" => {
            let (w, h) = (p.number("width")?, p.number("height")?);
            check_dims(w, h)?;
            let mut data = Vec::with_capacity(w * h);
            while data.len() < w * h {
                let tok = p.token().map_err(|_| short_payload())?;
                // P1 digits may or may not be whitespace separated.
                for &c in tok {
                    match c {
                        b'0' => data.push(0),
                        b'1' => data.push(1),
                        _ => return Err(Error::PnmFormat(format!("bad P1 digit {:?}", c as char))),
                    }
                }
            }
            if data.len() > w * h {
                return Err(Error::PnmFormat("payload longer than declared dimensions".into()));
            }
            Ok(LoadedImage::Binary(BinaryImage::new(w, h, data)?))
        }
        b"P4" => {
            let (w, h) = (p.number("width")?, p.number("height")?);
            check_dims(w, h)?;
            let payload = p.raw_payload()?;
            let row_bytes = w.div_ceil(8);
            if payload.len() < row_bytes * h {
                return Err(short_payload());
            }
            let mut data = Vec::with_capacity(w * h);
            for y in 0..h {
                let row = &payload[y * row_bytes..(y + 1) * row_bytes];
                for x in 0..w {
                    let bit = (row[x / 8] >> (7 - x % 8)) & 1;
                    data.push(bit);
                }
            }
            Ok(LoadedImage::Binary(BinaryImage::new(w, h, data)?))
        }
        b"P2" => {
            let (w, h) = (p.number("width")?, p.number("height")?);
            check_dims(w, h)?;
            let maxval = p.number("maxval")?;
            check_maxval(maxval)?;
            let mut data = Vec::with_capacity(w * h);
            while data.len() < w * h {
                let v = p.number("P2 sample").map_err(|_| short_payload())?;
                if v > maxval {
                    return Err(Error::PnmFormat(format!("sample {v} exceeds maxval {maxval}")));
                }
                data.push(v as u8);
            }
            Ok(LoadedImage::Gray(GrayImage::new(w, h, data)?))
        }
        b"P5" => {
            let (w, h) = (p.number("width")?, p.number("height")?);
            check_dims(w, h)?;
            let maxval = p.number("maxval")?;
            check_maxval(maxval)?;
            let payload = p.raw_payload()?;
            if payload.len() < w * h {
                return Err(short_payload());
            }
            Ok(LoadedImage::Gray(GrayImage::new(w, h, payload[..w * h].to_vec())?))
        }
        other => Err(Error::PnmFormat(format!(
            "unsupported magic {:?}",
            String::from_utf8_lossy(other)
        ))),
    }
}

fn check_dims(w: usize, h: usize) -> Result<()> {
    if w == 0 || h == 0 {
        return Err(Error::PnmFormat("zero dimension".into()));
    }
    Ok(())
}

fn check_maxval(maxval: usize) -> Result<()> {
    if maxval == 0 || maxval > 255 {
        return Err(Error::PnmFormat(format!("unsupported maxval {maxval}")));
    }
    Ok(())
}

fn short_payload() -> Error {
    Error::PnmFormat("payload shorter than declared dimensions".into())
}

/// Write a binary image as raw PBM (P4). Ink maps to PBM black.
pub fn save_pbm(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pbm(img)).map_err(|e| Error::io(path, e))
}

pub fn encode_pbm(img: &BinaryImage) -> Vec<u8> {
    let row_bytes = img.width.div_ceil(8);
    let mut out = format!("P4\n{} {}\n", img.width, img.height).into_bytes();
    for y in 0..img.height {
        let mut row = vec![0u8; row_bytes];
        for x in 0..img.width {
            if img.get(x, y) == 1 {
                row[x / 8] |= 1 << (7 - x % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    out
}

// ---------------------------------------------------------------------------
// Sauvola binarization
// ---------------------------------------------------------------------------

const SAUVOLA_R: f64 = 128.0;

/// Sauvola adaptive threshold: `T = m * (1 + k * (s / R - 1))`, R = 128,
/// over a `window` x `window` neighborhood clipped to the image bounds.
/// A pixel is ink iff its intensity is strictly below T.
///
/// Integral images keep the window sums exact, so the output matches a
/// direct per-pixel evaluation bit for bit.
pub fn sauvola_binarize(img: &GrayImage, window: usize, k: f64) -> Result<BinaryImage> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::param("sauvola.window", format!("must be odd and >= 3, got {window}")));
    }
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::param("sauvola.k", format!("must be in (0, 1), got {k}")));
    }
    let (w, h) = (img.width, img.height);
    // Integral images with a zero row/column in front; u64 sums are exact.
    let stride = w + 1;
    let mut sum = vec![0u64; stride * (h + 1)];
    let mut sq = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row_sum = 0u64;
        let mut row_sq = 0u64;
        for x in 0..w {
            let v = img.get(x, y) as u64;
            row_sum += v;
            row_sq += v * v;
            sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row_sum;
            sq[(y + 1) * stride + x + 1] = sq[y * stride + x + 1] + row_sq;
        }
    }
    let rect = |acc: &[u64], x0: usize, y0: usize, x1: usize, y1: usize| -> u64 {
        // inclusive rectangle
        acc[(y1 + 1) * stride + x1 + 1] + acc[y0 * stride + x0]
            - acc[y0 * stride + x1 + 1]
            - acc[(y1 + 1) * stride + x0]
    };
    let half = window / 2;
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let y0 = y.saturating_sub(half);
        let y1 = (y + half).min(h - 1);
        for x in 0..w {
            let x0 = x.saturating_sub(half);
            let x1 = (x + half).min(w - 1);
            let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
            let s1 = rect(&sum, x0, y0, x1, y1) as f64;
            let s2 = rect(&sq, x0, y0, x1, y1) as f64;
            let mean = s1 / n;
            let var = (s2 - s1 * s1 / n) / n;
            let std = var.max(0.0).sqrt();
            let t = mean * (1.0 + k * (std / SAUVOLA_R - 1.0));
            data.push(((img.get(x, y) as f64) < t) as u8);
        }
    }
    BinaryImage::new(w, h, data)
}

// ---------------------------------------------------------------------------
// Projection profiles
// ---------------------------------------------------------------------------

/// Per-row ink counts, top to bottom.
pub fn horizontal_projection(img: &BinaryImage) -> Vec<usize> {
    (0..img.height)
        .map(|y| img.row(y).iter().map(|&v| v as usize).sum())
        .collect()
}

/// Per-column ink counts, left to right.
pub fn vertical_projection(img: &BinaryImage) -> Vec<usize> {
    let mut profile = vec![0usize; img.width];
    for y in 0..img.height {
        for (x, &v) in img.row(y).iter().enumerate() {
            profile[x] += v as usize;
        }
    }
    profile
}

// ---------------------------------------------------------------------------
// Connected components
// ---------------------------------------------------------------------------

/// 8-connected components of the ink pixels, sorted by (y0, x0).
///
/// Flood fill with an explicit stack; the union of components covers every
/// ink pixel exactly once.
pub fn connected_components(img: &BinaryImage) -> Vec<ConnectedComponent> {
    let (w, h) = (img.width, img.height);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start_y in 0..h {
        for start_x in 0..w {
            let idx = start_y * w + start_x;
            if img.data[idx] == 0 || seen[idx] {
                continue;
            }
            seen[idx] = true;
            stack.push((start_x, start_y));
            let (mut x0, mut y0, mut x1, mut y1) = (start_x, start_y, start_x, start_y);
            let mut count = 0usize;
            while let Some((x, y)) = stack.pop() {
                count += 1;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
                let xa = x.saturating_sub(1);
                let xb = (x + 1).min(w - 1);
                let ya = y.saturating_sub(1);
                let yb = (y + 1).min(h - 1);
                for ny in ya..=yb {
                    for nx in xa..=xb {
                        let nidx = ny * w + nx;
                        if img.data[nidx] == 1 && !seen[nidx] {
                            seen[nidx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            out.push(ConnectedComponent { x0, y0, x1, y1, pixel_count: count });
        }
    }
    out.sort_by_key(|c| (c.y0, c.x0));
    out
}
