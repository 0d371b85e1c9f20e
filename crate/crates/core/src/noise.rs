//! Multiplicative gamma speckle.
//!
//! A speckle field holds independent draws `eta ~ Gamma(shape = L, scale = 1/L)`
//! (mean 1, variance `1/L`). Each pixel draws from its own ChaCha stream keyed
//! by the seed and the pixel index, so the field is a pure function of
//! `(seed, index)` regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, RgbImage};

/// Intensity floor applied to noisy observations and solver iterates.
pub const INTENSITY_FLOOR: f64 = 1.0;

/// Upper end of the working intensity range.
pub const INTENSITY_MAX: f64 = 255.0;

/// Number of looks and the reproducibility seed of a speckle realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub looks: u32,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(looks: u32, seed: u64) -> Result<Self> {
        if looks == 0 {
            return Err(Error::InvalidParameter("looks must be at least 1".into()));
        }
        Ok(Self { looks, seed })
    }

    fn distribution(&self) -> Result<Gamma<f64>> {
        if self.looks == 0 {
            return Err(Error::InvalidParameter("looks must be at least 1".into()));
        }
        let l = self.looks as f64;
        Gamma::new(l, 1.0 / l).map_err(|e| Error::InvalidParameter(format!("gamma law: {e}")))
    }
}

/// Draws `count` speckle samples; element `i` depends only on `(spec, i)`.
pub fn speckle_samples(spec: NoiseSpec, count: usize) -> Result<Vec<f64>> {
    let gamma = spec.distribution()?;
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = base.clone();
            rng.set_stream(i as u64);
            loop {
                // a zero draw is possible only through underflow; redraw
                let v = gamma.sample(&mut rng);
                if v > 0.0 {
                    break v;
                }
            }
        })
        .collect())
}

/// A `width` x `height` field of independent speckle gains.
pub fn speckle_field(spec: NoiseSpec, width: usize, height: usize) -> Result<ImageGrid> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "speckle field dimensions must be positive, got {width}x{height}"
        )));
    }
    ImageGrid::from_vec(width, height, speckle_samples(spec, width * height)?)
}

/// `N = I * eta`, clamped to `[INTENSITY_FLOOR, INTENSITY_MAX]`.
pub fn apply_multiplicative(clean: &ImageGrid, field: &ImageGrid) -> Result<ImageGrid> {
    clean.check_dims(field)?;
    Ok(clean.zip_map(field, |i, eta| {
        (i * eta).clamp(INTENSITY_FLOOR, INTENSITY_MAX)
    }))
}

/// Speckles `clean` with a fresh field drawn from `spec`.
pub fn add_speckle(clean: &ImageGrid, spec: NoiseSpec) -> Result<ImageGrid> {
    let field = speckle_field(spec, clean.width(), clean.height())?;
    apply_multiplicative(clean, &field)
}

/// Speckles each channel independently. Channel `c` uses samples
/// `c*n .. (c+1)*n` of the stream, `n` being the pixel count.
pub fn add_speckle_rgb(clean: &RgbImage, spec: NoiseSpec) -> Result<RgbImage> {
    let (w, h) = clean.dims();
    if w == 0 || h == 0 {
        return Err(Error::InvalidParameter(format!(
            "speckle field dimensions must be positive, got {w}x{h}"
        )));
    }
    let n = w * h;
    let samples = speckle_samples(spec, 3 * n)?;
    let field = |c: usize| ImageGrid::from_vec(w, h, samples[c * n..(c + 1) * n].to_vec());
    RgbImage::new(
        apply_multiplicative(&clean.r, &field(0)?)?,
        apply_multiplicative(&clean.g, &field(1)?)?,
        apply_multiplicative(&clean.b, &field(2)?)?,
    )
}
