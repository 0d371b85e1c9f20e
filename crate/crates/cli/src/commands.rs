//! Subcommand bodies. Each returns what it would print so tests can drive
//! them without spawning the binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use despeckle_core::io::save_auto;
use despeckle_core::metrics::{self, SsimConfig};
use despeckle_core::{
    add_speckle, add_speckle_rgb, denoise, denoise_rgb, load_any, Error, Image, NoiseSpec,
};

use crate::bench::format_psnr;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Speckles `input` and writes the result; returns the output's speckle index.
pub fn cmd_add_noise(input: &Path, output: &Path, looks: u32, seed: u64) -> CliResult<f64> {
    let spec = NoiseSpec::new(looks, seed)
        .map_err(|_| CliError::Usage("looks must be at least 1".into()))?;
    let noisy = match load_any(input)? {
        Image::Gray(g) => Image::Gray(add_speckle(&g, spec)?),
        Image::Rgb(c) => Image::Rgb(add_speckle_rgb(&c, spec)?),
    };
    save_auto(&noisy, output)?;
    Ok(image_speckle_index(&noisy)?)
}

fn image_speckle_index(img: &Image) -> despeckle_core::Result<f64> {
    match img {
        Image::Gray(g) => metrics::speckle_index(g),
        Image::Rgb(c) => metrics::speckle_index_rgb(c),
    }
}

fn quality(restored: &Image, reference: &Image) -> despeckle_core::Result<(f64, f64)> {
    let cfg = SsimConfig::default();
    match (restored, reference) {
        (Image::Gray(a), Image::Gray(b)) => {
            Ok((metrics::psnr(a, b, 255.0)?, metrics::mssim(a, b, &cfg)?))
        }
        (Image::Rgb(a), Image::Rgb(b)) => Ok((
            metrics::psnr_rgb(a, b, 255.0)?,
            metrics::mssim_rgb(a, b, &cfg)?,
        )),
        (a, b) => Err(Error::ColorMismatch {
            expected: kind_name(b),
            found: kind_name(a),
        }),
    }
}

fn kind_name(img: &Image) -> &'static str {
    match img {
        Image::Gray(_) => "grayscale",
        Image::Rgb(_) => "RGB",
    }
}

/// Outcome of [`cmd_denoise`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseSummary {
    pub psnr: Option<f64>,
    pub mssim: Option<f64>,
    pub speckle_index: f64,
    pub relative_error: f64,
    /// Largest step count over channels.
    pub iterations: usize,
    pub selected_iteration: usize,
    pub wall_time: f64,
    pub output: PathBuf,
    pub report: PathBuf,
    /// Contents written to `report`.
    pub text: String,
}

/// Default report location: the output path with a `.report` suffix.
pub fn default_report_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".report");
    output.with_file_name(name)
}

/// Restores the configured input and writes the image and a `key = value` report.
pub fn cmd_denoise(cfg: &RunConfig) -> CliResult<DenoiseSummary> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("no input image given".into()))?;
    let output = cfg
        .output
        .clone()
        .ok_or_else(|| CliError::Usage("no output path given".into()))?;
    let report = cfg
        .report
        .clone()
        .unwrap_or_else(|| default_report_path(&output));

    let mut observed = load_any(input)?;
    if let Some(spec) = cfg.noise {
        observed = match observed {
            Image::Gray(g) => Image::Gray(add_speckle(&g, spec)?),
            Image::Rgb(c) => Image::Rgb(add_speckle_rgb(&c, spec)?),
        };
    }
    let reference = cfg.reference.as_deref().map(load_any).transpose()?;
    if let Some(r) = &reference {
        if r.kind() != observed.kind() {
            return Err(Error::ColorMismatch {
                expected: kind_name(&observed),
                found: kind_name(r),
            }
            .into());
        }
    }

    let (restored, iterations, selected, rel, wall) = match (&observed, &reference) {
        (Image::Gray(n), r) => {
            let r = match r {
                Some(Image::Gray(g)) => Some(g),
                _ => None,
            };
            let out = denoise(cfg.model, n, &cfg.params, &cfg.stop, r)?;
            let rep = out.report;
            (
                Image::Gray(out.image),
                rep.iterations,
                rep.selected_iteration,
                rep.relative_error,
                rep.wall_time,
            )
        }
        (Image::Rgb(n), r) => {
            let r = match r {
                Some(Image::Rgb(c)) => Some(c),
                _ => None,
            };
            let out = denoise_rgb(cfg.model, n, &cfg.params, &cfg.stop, r)?;
            let reps = out.reports();
            let iterations = reps.iter().map(|r| r.iterations).max().unwrap_or(0);
            let selected = reps.iter().map(|r| r.selected_iteration).max().unwrap_or(0);
            let rel = reps.iter().map(|r| r.relative_error).fold(0.0, f64::max);
            let wall = reps.iter().map(|r| r.wall_time).fold(0.0, f64::max);
            (Image::Rgb(out.image), iterations, selected, rel, wall)
        }
    };

    let si = image_speckle_index(&restored)?;
    let (psnr, mssim) = match &reference {
        Some(r) => {
            let (p, m) = quality(&restored, r)?;
            (Some(p), Some(m))
        }
        None => (None, None),
    };
    save_auto(&restored, &output)?;

    let mut text = String::new();
    let _ = writeln!(text, "model = {}", cfg.model);
    let _ = writeln!(text, "input = {}", input.display());
    let _ = writeln!(text, "output = {}", output.display());
    if let Some(p) = psnr {
        let _ = writeln!(text, "psnr = {}", format_psnr(p));
    }
    if let Some(m) = mssim {
        let _ = writeln!(text, "mssim = {m:.6}");
    }
    let _ = writeln!(text, "si = {si}");
    let _ = writeln!(text, "relative_error = {rel:e}");
    let _ = writeln!(text, "iterations = {iterations}");
    let _ = writeln!(text, "selected_iteration = {selected}");
    let _ = writeln!(text, "wall_time = {wall:.3}");
    fs::write(&report, &text).map_err(|e| CliError::io(&report, e))?;

    Ok(DenoiseSummary {
        psnr,
        mssim,
        speckle_index: si,
        relative_error: rel,
        iterations,
        selected_iteration: selected,
        wall_time: wall,
        output,
        report,
        text,
    })
}

/// Scores `restored` against `reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub psnr: f64,
    pub mssim: f64,
    pub si: f64,
}

impl Evaluation {
    /// `psnr,mssim,si` with the table precision.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.4},{:.4}",
            format_psnr(self.psnr),
            self.mssim,
            self.si
        )
    }
}

pub fn cmd_evaluate(restored: &Path, reference: &Path) -> CliResult<Evaluation> {
    let a = load_any(restored)?;
    let b = load_any(reference)?;
    let (psnr, mssim) = quality(&a, &b)?;
    Ok(Evaluation {
        psnr,
        mssim,
        si: image_speckle_index(&a)?,
    })
}
