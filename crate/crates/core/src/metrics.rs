//! Image-quality and convergence metrics.

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, RgbImage};
use crate::stencil::GaussianKernel;

/// Quality summary of one restoration.
///
/// `psnr` and `mssim` are `None` when no reference image was available. A
/// perfect reconstruction has `psnr == Some(f64::INFINITY)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub psnr: Option<f64>,
    pub mssim: Option<f64>,
    pub speckle_index: f64,
    pub relative_error: f64,
    /// Solver steps executed.
    pub iterations: usize,
    /// Iterate returned to the caller (differs from `iterations` under PSNR-peak stopping).
    pub selected_iteration: usize,
    pub wall_time: f64,
}

/// Window and stabilizer constants of SSIM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConfig {
    pub window_radius: usize,
    pub window_sigma: f64,
    pub d1: f64,
    pub d2: f64,
    pub dynamic_range: f64,
}

impl SsimConfig {
    /// Standard constants `d1 = (0.01 L)^2`, `d2 = (0.03 L)^2` for dynamic range `L`.
    pub fn for_range(dynamic_range: f64) -> Self {
        Self {
            window_radius: 5,
            window_sigma: 1.5,
            d1: (0.01 * dynamic_range).powi(2),
            d2: (0.03 * dynamic_range).powi(2),
            dynamic_range,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.d1 > 0.0 && self.d2 > 0.0) {
            return Err(Error::InvalidParameter(
                "SSIM stabilizers d1, d2 must be positive".into(),
            ));
        }
        if self.window_radius == 0 || self.window_sigma.is_nan() || self.window_sigma <= 0.0 {
            return Err(Error::InvalidParameter(
                "SSIM window must be non-empty".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self::for_range(255.0)
    }
}

/// Mean squared pixel difference.
pub fn mse(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    a.check_dims(b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

fn psnr_from_mse(mse: f64, max_val: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_val * max_val / mse).log10()
    }
}

/// `10 log10(max_val^2 / MSE)`; `+inf` for identical images.
pub fn psnr(a: &ImageGrid, b: &ImageGrid, max_val: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, max_val))
}

/// PSNR with the MSE pooled over all three channels.
pub fn psnr_rgb(a: &RgbImage, b: &RgbImage, max_val: f64) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in a.channels().into_iter().zip(b.channels()) {
        total += mse(x, y)?;
    }
    Ok(psnr_from_mse(total / 3.0, max_val))
}

/// Per-pixel SSIM from Gaussian-weighted local moments.
pub fn ssim_map(a: &ImageGrid, b: &ImageGrid, cfg: &SsimConfig) -> Result<ImageGrid> {
    a.check_dims(b)?;
    cfg.validate()?;
    let kernel = GaussianKernel::with_radius(cfg.window_sigma, cfg.window_radius);
    let mu_a = kernel.apply(a);
    let mu_b = kernel.apply(b);
    let e_aa = kernel.apply(&a.map(|v| v * v));
    let e_bb = kernel.apply(&b.map(|v| v * v));
    let e_ab = kernel.apply(&a.zip_map(b, |x, y| x * y));

    let (d1, d2) = (cfg.d1, cfg.d2);
    let data = (0..a.len())
        .map(|i| {
            let (ma, mb) = (mu_a.data()[i], mu_b.data()[i]);
            let var_a = e_aa.data()[i] - ma * ma;
            let var_b = e_bb.data()[i] - mb * mb;
            let cov = e_ab.data()[i] - ma * mb;
            ((2.0 * ma * mb + d1) * (2.0 * cov + d2))
                / ((ma * ma + mb * mb + d1) * (var_a + var_b + d2))
        })
        .collect();
    ImageGrid::from_vec(a.width(), a.height(), data)
}

/// Mean of the SSIM map.
pub fn mssim(a: &ImageGrid, b: &ImageGrid, cfg: &SsimConfig) -> Result<f64> {
    Ok(ssim_map(a, b, cfg)?.mean())
}

/// Mean of per-channel MSSIM.
pub fn mssim_rgb(a: &RgbImage, b: &RgbImage, cfg: &SsimConfig) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in a.channels().into_iter().zip(b.channels()) {
        total += mssim(x, y, cfg)?;
    }
    Ok(total / 3.0)
}

/// Speckle index: population standard deviation over mean.
pub fn speckle_index(img: &ImageGrid) -> Result<f64> {
    let mean = img.mean();
    if mean == 0.0 {
        return Err(Error::InvalidParameter(
            "speckle index undefined for a zero-mean image".into(),
        ));
    }
    // moments about the first sample; a constant image gives exactly 0
    let shift = img.data()[0];
    let n = img.len() as f64;
    let m = img.data().iter().map(|v| v - shift).sum::<f64>() / n;
    let var = img
        .data()
        .iter()
        .map(|v| {
            let d = v - shift - m;
            d * d
        })
        .sum::<f64>()
        / n;
    Ok(var.sqrt() / mean.abs())
}

/// Speckle index of all channel samples pooled together.
pub fn speckle_index_rgb(img: &RgbImage) -> Result<f64> {
    let pooled: Vec<f64> = img
        .channels()
        .iter()
        .flat_map(|c| c.data().iter().copied())
        .collect();
    speckle_index(&ImageGrid::from_vec(pooled.len(), 1, pooled)?)
}

/// `||next - current||_2 / ||current||_2`.
pub fn relative_error(next: &ImageGrid, current: &ImageGrid) -> Result<f64> {
    next.check_dims(current)?;
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (n, c) in next.data().iter().zip(current.data()) {
        diff += (n - c) * (n - c);
        norm += c * c;
    }
    if norm == 0.0 {
        return Err(Error::InvalidParameter(
            "relative error undefined for a zero reference".into(),
        ));
    }
    Ok((diff / norm).sqrt())
}
