//! Brute-force reference implementations, written index by index and kept
//! independent of the library's padded-buffer kernels.
#![allow(dead_code)]

use despeckle_core::ImageGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reflect an out-of-range index back into `0..n` by repeated bouncing.
pub fn mirror(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

pub fn at(g: &ImageGrid, x: isize, y: isize) -> f64 {
    g.get(mirror(x, g.width()), mirror(y, g.height()))
}

pub fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, lo: f64, hi: f64) -> ImageGrid {
    ImageGrid::from_fn(w, h, |_, _| rng.random_range(lo..hi))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn oracle_gradient(g: &ImageGrid, h: f64) -> (ImageGrid, ImageGrid) {
    let (w, ht) = g.dims();
    let dx = ImageGrid::from_fn(w, ht, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (at(g, x + 1, y) - at(g, x - 1, y)) / (2.0 * h)
    });
    let dy = ImageGrid::from_fn(w, ht, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (at(g, x, y + 1) - at(g, x, y - 1)) / (2.0 * h)
    });
    (dx, dy)
}

pub fn oracle_axial(g: &ImageGrid, h: f64) -> (ImageGrid, ImageGrid) {
    let (w, ht) = g.dims();
    let dxx = ImageGrid::from_fn(w, ht, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (at(g, x + 1, y) - 2.0 * at(g, x, y) + at(g, x - 1, y)) / (h * h)
    });
    let dyy = ImageGrid::from_fn(w, ht, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (at(g, x, y + 1) - 2.0 * at(g, x, y) + at(g, x, y - 1)) / (h * h)
    });
    (dxx, dyy)
}

pub fn oracle_laplacian(g: &ImageGrid, h: f64) -> ImageGrid {
    let (w, ht) = g.dims();
    ImageGrid::from_fn(w, ht, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (at(g, x + 1, y) - 2.0 * at(g, x, y) + at(g, x - 1, y)) / (h * h)
            + (at(g, x, y + 1) - 2.0 * at(g, x, y) + at(g, x, y - 1)) / (h * h)
    })
}

pub fn oracle_laplacian_magnitude(g: &ImageGrid, h: f64) -> ImageGrid {
    let (a, b) = oracle_axial(g, h);
    a.zip_map(&b, |p, q| (p * p + q * q).sqrt())
}

/// Direct double-loop convolution with the 2-D truncated Gaussian.
pub fn oracle_gaussian(g: &ImageGrid, sigma: f64, radius: usize) -> ImageGrid {
    let r = radius as isize;
    let mut weights = Vec::new();
    let mut total = 0.0;
    for b in -r..=r {
        for a in -r..=r {
            let v = (-((a * a + b * b) as f64) / (2.0 * sigma * sigma)).exp();
            weights.push(v);
            total += v;
        }
    }
    let (w, ht) = g.dims();
    ImageGrid::from_fn(w, ht, |x, y| {
        let mut acc = 0.0;
        let mut idx = 0;
        for b in -r..=r {
            for a in -r..=r {
                acc += weights[idx] / total * at(g, x as isize + a, y as isize + b);
                idx += 1;
            }
        }
        acc
    })
}

pub fn max_rel_diff(a: &ImageGrid, b: &ImageGrid) -> f64 {
    assert_eq!(a.dims(), b.dims());
    let scale = a
        .data()
        .iter()
        .chain(b.data())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}
