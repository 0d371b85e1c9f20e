//! Dense real-valued image grids and RGB composites.
//!
//! Intensities are kept as `f64` in the nominal range `[0, 255]`; quantization
//! happens only when an image is written to disk.

use crate::error::{Error, Result};

/// A dense 2-D field of real values stored in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Wraps `data` as a `width` x `height` grid.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "grid data has {} values, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// A grid with every pixel set to `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds a grid by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Value at column `x`, row `y`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn same_dims(&self, other: &ImageGrid) -> bool {
        self.dims() == other.dims()
    }

    pub(crate) fn check_dims(&self, other: &ImageGrid) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    /// Applies `f` to every pixel, producing a new grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageGrid {
        ImageGrid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixelwise combination of two equally sized grids.
    ///
    /// Panics on a dimension mismatch; callers validate dimensions first.
    pub fn zip_map(&self, other: &ImageGrid, f: impl Fn(f64, f64) -> f64) -> ImageGrid {
        assert!(self.same_dims(other), "zip_map on grids of different size");
        ImageGrid {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> ImageGrid {
        self.map(|v| v.clamp(lo, hi))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Mirror image about the vertical axis (columns reversed).
    pub fn flip_horizontal(&self) -> ImageGrid {
        let (w, h) = self.dims();
        ImageGrid::from_fn(w, h, |x, y| self.get(w - 1 - x, y))
    }

    /// Mirror image about the horizontal axis (rows reversed).
    pub fn flip_vertical(&self) -> ImageGrid {
        let (w, h) = self.dims();
        ImageGrid::from_fn(w, h, |x, y| self.get(x, h - 1 - y))
    }

    pub fn rotate_180(&self) -> ImageGrid {
        let mut data = self.data.clone();
        data.reverse();
        ImageGrid {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Swaps rows and columns.
    pub fn transpose(&self) -> ImageGrid {
        let (w, h) = self.dims();
        ImageGrid::from_fn(h, w, |x, y| self.get(y, x))
    }

    /// Counter-clockwise quarter turn.
    pub fn rotate_90(&self) -> ImageGrid {
        let (w, h) = self.dims();
        ImageGrid::from_fn(h, w, |x, y| self.get(w - 1 - y, x))
    }

    /// Extracts the `width` x `height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<ImageGrid> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop {width}x{height}+{x0}+{y0} outside {}x{} grid",
                self.width, self.height
            )));
        }
        Ok(ImageGrid::from_fn(width, height, |x, y| {
            self.get(x0 + x, y0 + y)
        }))
    }
}

/// Index of `i` after mirror reflection into `0..n`, without repeating the
/// edge sample (`-1 -> 1`, `n -> n - 2`). Offsets larger than the grid fold
/// repeatedly; a single-sample axis maps everything to 0.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - m;
    }
    m as usize
}

/// Margin of a mirror-reflection pad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadSpec {
    pub margin: usize,
}

impl PadSpec {
    pub fn new(margin: usize) -> Self {
        Self { margin }
    }
}

/// Pads `img` by mirror reflection about its edges.
///
/// The margin must be strictly smaller than both dimensions so that a single
/// reflection covers the border.
pub fn pad_mirror(img: &ImageGrid, spec: PadSpec) -> Result<ImageGrid> {
    let m = spec.margin;
    if m == 0 {
        return Ok(img.clone());
    }
    let (w, h) = img.dims();
    if m >= w.min(h) {
        return Err(Error::InvalidParameter(format!(
            "mirror margin {m} must be below the smaller grid dimension {}",
            w.min(h)
        )));
    }
    let mi = m as isize;
    Ok(ImageGrid::from_fn(w + 2 * m, h + 2 * m, |x, y| {
        let sx = reflect_index(x as isize - mi, w);
        let sy = reflect_index(y as isize - mi, h);
        img.get(sx, sy)
    }))
}

/// Three equally sized channel grids.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: ImageGrid,
    pub g: ImageGrid,
    pub b: ImageGrid,
}

impl RgbImage {
    pub fn new(r: ImageGrid, g: ImageGrid, b: ImageGrid) -> Result<Self> {
        r.check_dims(&g)?;
        r.check_dims(&b)?;
        Ok(Self { r, g, b })
    }

    /// Gray image replicated into all three channels.
    pub fn from_gray(gray: &ImageGrid) -> Self {
        Self {
            r: gray.clone(),
            g: gray.clone(),
            b: gray.clone(),
        }
    }

    pub fn width(&self) -> usize {
        self.r.width()
    }

    pub fn height(&self) -> usize {
        self.r.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.r.dims()
    }

    pub fn channels(&self) -> [&ImageGrid; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub fn map_channels(&self, f: impl Fn(&ImageGrid) -> ImageGrid) -> RgbImage {
        RgbImage {
            r: f(&self.r),
            g: f(&self.g),
            b: f(&self.b),
        }
    }
}

pub fn split_channels(img: &RgbImage) -> (ImageGrid, ImageGrid, ImageGrid) {
    (img.r.clone(), img.g.clone(), img.b.clone())
}

pub fn merge_channels(r: ImageGrid, g: ImageGrid, b: ImageGrid) -> Result<RgbImage> {
    RgbImage::new(r, g, b)
}
