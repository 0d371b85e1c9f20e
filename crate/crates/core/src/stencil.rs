//! Finite-difference stencils and Gaussian pre-smoothing.
//!
//! Every operator reads its neighbours through mirror reflection about the
//! grid edge (`-1 -> 1`), which realizes the homogeneous Neumann condition.
//! Symmetric neighbour pairs are always summed as `(left + right)` so that a
//! flip of the input produces a bitwise flip of the output.

use crate::grid::{reflect_index, ImageGrid};

/// Two equally sized component grids of a per-pixel 2-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub dx: ImageGrid,
    pub dy: ImageGrid,
}

impl VectorField {
    pub fn new(dx: ImageGrid, dy: ImageGrid) -> Self {
        assert!(dx.same_dims(&dy), "vector field components differ in size");
        Self { dx, dy }
    }
}

/// Image copied into a buffer with a reflected border of `m` samples per side.
struct Padded {
    stride: usize,
    m: usize,
    data: Vec<f64>,
}

impl Padded {
    fn new(img: &ImageGrid, m: usize) -> Self {
        let (w, h) = img.dims();
        let stride = w + 2 * m;
        let cols: Vec<usize> = (0..stride)
            .map(|x| reflect_index(x as isize - m as isize, w))
            .collect();
        let mut data = Vec::with_capacity(stride * (h + 2 * m));
        for y in 0..h + 2 * m {
            let sy = reflect_index(y as isize - m as isize, h);
            let src = &img.data()[sy * w..(sy + 1) * w];
            data.extend(cols.iter().map(|&sx| src[sx]));
        }
        Self { stride, m, data }
    }

    /// Sample at interior coordinates offset by `(ox, oy)`.
    #[inline(always)]
    fn at(&self, x: usize, y: usize, ox: isize, oy: isize) -> f64 {
        let px = (x + self.m) as isize + ox;
        let py = (y + self.m) as isize + oy;
        self.data[py as usize * self.stride + px as usize]
    }
}

/// Central-difference gradient `((I[x+1] - I[x-1]) / 2h, (I[y+1] - I[y-1]) / 2h)`.
pub fn gradient_central(img: &ImageGrid, h: f64) -> VectorField {
    let (w, ht) = img.dims();
    let p = Padded::new(img, 1);
    let inv = 1.0 / (2.0 * h);
    let mut dx = Vec::with_capacity(w * ht);
    let mut dy = Vec::with_capacity(w * ht);
    for y in 0..ht {
        for x in 0..w {
            dx.push((p.at(x, y, 1, 0) - p.at(x, y, -1, 0)) * inv);
            dy.push((p.at(x, y, 0, 1) - p.at(x, y, 0, -1)) * inv);
        }
    }
    VectorField::new(
        ImageGrid::from_vec(w, ht, dx).unwrap(),
        ImageGrid::from_vec(w, ht, dy).unwrap(),
    )
}

/// Per-pixel Euclidean norm of a vector field.
pub fn gradient_magnitude(v: &VectorField) -> ImageGrid {
    v.dx.zip_map(&v.dy, |a, b| (a * a + b * b).sqrt())
}

/// Axial second differences: `dx = (I[x+1] - 2I + I[x-1]) / h^2`, likewise `dy`.
pub fn axial_second_differences(img: &ImageGrid, h: f64) -> VectorField {
    let (w, ht) = img.dims();
    let p = Padded::new(img, 1);
    let inv = 1.0 / (h * h);
    let mut dx = Vec::with_capacity(w * ht);
    let mut dy = Vec::with_capacity(w * ht);
    for y in 0..ht {
        for x in 0..w {
            let c = 2.0 * p.at(x, y, 0, 0);
            dx.push(((p.at(x, y, -1, 0) + p.at(x, y, 1, 0)) - c) * inv);
            dy.push(((p.at(x, y, 0, -1) + p.at(x, y, 0, 1)) - c) * inv);
        }
    }
    VectorField::new(
        ImageGrid::from_vec(w, ht, dx).unwrap(),
        ImageGrid::from_vec(w, ht, dy).unwrap(),
    )
}

/// Five-point Laplacian with spacing `h` in both directions.
pub fn laplacian(img: &ImageGrid, h: f64) -> ImageGrid {
    let (w, ht) = img.dims();
    let p = Padded::new(img, 1);
    let inv = 1.0 / (h * h);
    let mut out = Vec::with_capacity(w * ht);
    for y in 0..ht {
        for x in 0..w {
            let c = 2.0 * p.at(x, y, 0, 0);
            let ax = ((p.at(x, y, -1, 0) + p.at(x, y, 1, 0)) - c) * inv;
            let ay = ((p.at(x, y, 0, -1) + p.at(x, y, 0, 1)) - c) * inv;
            out.push(ax + ay);
        }
    }
    ImageGrid::from_vec(w, ht, out).unwrap()
}

/// `sqrt(dx^2 + dy^2)` of the axial second differences.
pub fn laplacian_magnitude(img: &ImageGrid, h: f64) -> ImageGrid {
    gradient_magnitude(&axial_second_differences(img, h))
}

/// Central-difference divergence of a flux field.
///
/// The flux of a Neumann problem is odd about the boundary, so out-of-range
/// neighbours are reflected with a sign change (`F[-1] = -F[1]`). With this
/// closure the trapezoid-weighted sum of the divergence vanishes, i.e. the
/// discrete mass [`trapezoid_mass`] is conserved.
pub fn divergence(flux: &VectorField, h: f64) -> ImageGrid {
    let (w, ht) = flux.dx.dims();
    let inv = 1.0 / (2.0 * h);
    let fx = flux.dx.data();
    let fy = flux.dy.data();
    let odd = |data: &[f64], x: isize, y: isize| -> f64 {
        let (wi, hi) = (w as isize, ht as isize);
        let mut sign = 1.0;
        let sx = if x < 0 || x >= wi {
            sign = -sign;
            reflect_index(x, w)
        } else {
            x as usize
        };
        let sy = if y < 0 || y >= hi {
            sign = -sign;
            reflect_index(y, ht)
        } else {
            y as usize
        };
        sign * data[sy * w + sx]
    };
    let mut out = Vec::with_capacity(w * ht);
    for y in 0..ht as isize {
        for x in 0..w as isize {
            let ddx = odd(fx, x + 1, y) - odd(fx, x - 1, y);
            let ddy = odd(fy, x, y + 1) - odd(fy, x, y - 1);
            out.push(ddx * inv + ddy * inv);
        }
    }
    ImageGrid::from_vec(w, ht, out).unwrap()
}

/// Sum of pixel values with half weight on edge rows/columns (quarter weight
/// on corners): the mass conserved by [`divergence`] and [`laplacian`] under
/// mirror boundaries.
pub fn trapezoid_mass(img: &ImageGrid) -> f64 {
    let (w, h) = img.dims();
    let weight = |i: usize, n: usize| {
        if n > 1 && (i == 0 || i == n - 1) {
            0.5
        } else {
            1.0
        }
    };
    let mut total = 0.0;
    for y in 0..h {
        let wy = weight(y, h);
        for x in 0..w {
            total += wy * weight(x, w) * img.get(x, y);
        }
    }
    total
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// Normalized, truncated 2-D Gaussian of standard deviation `sigma` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    radius: usize,
    taps: Vec<f64>,
}

impl GaussianKernel {
    /// Kernel with support radius `ceil(4 sigma)`.
    ///
    /// Panics unless `sigma` is positive and finite.
    pub fn new(sigma: f64) -> Self {
        let radius = (4.0 * sigma).ceil() as usize;
        Self::with_radius(sigma, radius.max(1))
    }

    pub fn with_radius(sigma: f64, radius: usize) -> Self {
        assert!(
            sigma.is_finite() && sigma > 0.0,
            "gaussian sigma must be positive"
        );
        let denom = 2.0 * sigma * sigma;
        let raw: Vec<f64> = (0..=2 * radius)
            .map(|i| {
                let d = i as f64 - radius as f64;
                (-d * d / denom).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        let taps = raw.into_iter().map(|v| v / total).collect();
        Self {
            sigma,
            radius,
            taps,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Normalized 1-D taps, indexed `0..=2 * radius`.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// The full `(2r+1) x (2r+1)` weight table, row-major.
    pub fn weights(&self) -> Vec<f64> {
        self.taps
            .iter()
            .flat_map(|a| self.taps.iter().map(move |b| a * b))
            .collect()
    }

    /// Convolves `img` with the kernel under mirror boundaries.
    ///
    /// Evaluated as two 1-D passes; each pass adds mirrored tap pairs
    /// symmetrically, which keeps the result exactly flip-equivariant.
    pub fn apply(&self, img: &ImageGrid) -> ImageGrid {
        // x-then-y and y-then-x differ in rounding; their mean is exactly
        // transpose-equivariant
        let xy = self.pass(&self.pass(img, Axis::X), Axis::Y);
        let yx = self.pass(&self.pass(img, Axis::Y), Axis::X);
        xy.zip_map(&yx, |a, b| 0.5 * (a + b))
    }

    fn pass(&self, img: &ImageGrid, axis: Axis) -> ImageGrid {
        let (w, h) = img.dims();
        let (n, lines, step, stride) = match axis {
            Axis::X => (w, h, 1, w),
            Axis::Y => (h, w, w, 1),
        };
        let r = self.radius;
        let centre = self.taps[r];
        let idx: Vec<usize> = (0..n + 2 * r)
            .map(|i| reflect_index(i as isize - r as isize, n))
            .collect();
        let src = img.data();
        let mut out = vec![0.0; w * h];
        let mut line = vec![0.0; n + 2 * r];
        for l in 0..lines {
            let base = l * stride;
            for (dst, &i) in line.iter_mut().zip(&idx) {
                *dst = src[base + i * step];
            }
            for i in 0..n {
                let c = i + r;
                let mut acc = centre * line[c];
                for k in 1..=r {
                    acc += self.taps[r + k] * (line[c - k] + line[c + k]);
                }
                out[base + i * step] = acc;
            }
        }
        ImageGrid::from_vec(w, h, out).unwrap()
    }
}

/// Gaussian smoothing `J_sigma * I`.
pub fn gaussian_smooth(img: &ImageGrid, sigma: f64) -> ImageGrid {
    GaussianKernel::new(sigma).apply(img)
}

/// Largest absolute pixel value.
pub fn max_abs(img: &ImageGrid) -> f64 {
    img.data().iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
}
