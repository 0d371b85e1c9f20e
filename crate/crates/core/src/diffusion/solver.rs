use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, RgbImage};
use crate::metrics::{self, MetricsReport, SsimConfig};
use crate::noise::{INTENSITY_FLOOR, INTENSITY_MAX};

use super::coeff::{cfl_bound, SchemeOrder};
use super::step::{coefficient_for, step};
use super::{Model, ModelParams, SolverState};

/// Termination criterion of a restoration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopKind {
    /// Stop once `||I^{k+1} - I^k|| / ||I^k|| <= epsilon`.
    RelativeError { epsilon: f64 },
    /// Track PSNR against the reference and return the best iterate after
    /// `patience` consecutive non-improving steps.
    PsnrPeak { patience: usize },
    /// Run exactly `n` steps (or until the cap).
    MaxIters { n: usize },
}

/// A [`StopKind`] together with a hard iteration ceiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub kind: StopKind,
    pub cap: usize,
}

impl StoppingRule {
    pub const DEFAULT_CAP: usize = 500;
    pub const DEFAULT_PATIENCE: usize = 5;
    pub const DEFAULT_EPSILON: f64 = 1e-4;

    pub fn relative_error(epsilon: f64) -> Self {
        Self {
            kind: StopKind::RelativeError { epsilon },
            cap: Self::DEFAULT_CAP,
        }
    }

    pub fn psnr_peak(patience: usize) -> Self {
        Self {
            kind: StopKind::PsnrPeak { patience },
            cap: Self::DEFAULT_CAP,
        }
    }

    pub fn max_iters(n: usize) -> Self {
        Self {
            kind: StopKind::MaxIters { n },
            cap: n.max(1),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn needs_reference(&self) -> bool {
        matches!(self.kind, StopKind::PsnrPeak { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.cap == 0 {
            return Err(Error::InvalidParameter(
                "iteration cap must be at least 1".into(),
            ));
        }
        match self.kind {
            StopKind::RelativeError { epsilon } if epsilon.is_nan() || epsilon <= 0.0 => Err(
                Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")),
            ),
            StopKind::PsnrPeak { patience: 0 } => Err(Error::InvalidParameter(
                "patience must be at least 1".into(),
            )),
            StopKind::MaxIters { n: 0 } => Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }

    fn limit(&self) -> usize {
        match self.kind {
            StopKind::MaxIters { n } => n.min(self.cap),
            _ => self.cap,
        }
    }
}

/// Per-step diagnostics recorded by [`denoise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub relative_error: f64,
    pub psnr: Option<f64>,
}

/// Output of a grayscale restoration.
#[derive(Debug, Clone)]
pub struct Restoration {
    pub image: ImageGrid,
    pub report: MetricsReport,
    pub trace: Vec<TraceEntry>,
}

/// Output of a colour restoration: the merged image and one run per channel.
#[derive(Debug, Clone)]
pub struct RgbRestoration {
    pub image: RgbImage,
    pub channels: [Restoration; 3],
}

impl RgbRestoration {
    pub fn reports(&self) -> [&MetricsReport; 3] {
        [
            &self.channels[0].report,
            &self.channels[1].report,
            &self.channels[2].report,
        ]
    }
}

/// Restores a noisy grayscale image.
///
/// The input is clamped to the working range `[1, 255]` and used both as the
/// initial iterate and as the fidelity target. `reference`, when given, is used
/// for PSNR-peak stopping and for the PSNR/MSSIM entries of the report.
pub fn denoise(
    model: Model,
    noisy: &ImageGrid,
    params: &ModelParams,
    stop: &StoppingRule,
    reference: Option<&ImageGrid>,
) -> Result<Restoration> {
    params.validate()?;
    stop.validate()?;
    if let Some(r) = reference {
        noisy.check_dims(r)?;
    }
    if stop.needs_reference() && reference.is_none() {
        return Err(Error::InvalidParameter(
            "PSNR-peak stopping requires a reference image".into(),
        ));
    }

    let started = Instant::now();
    let observed = noisy.clamp(INTENSITY_FLOOR, INTENSITY_MAX);
    let mut state = SolverState::new(observed);

    let order = match model {
        Model::Proposed => SchemeOrder::Fourth,
        Model::Tdm | Model::Shan => SchemeOrder::Second,
    };
    let coeff_max = coefficient_for(model, &state.current, params).max_value();
    let cfl = cfl_bound(coeff_max, params.h, order, params.tau);
    if !cfl.ok {
        log::warn!(
            "{model}: tau = {} exceeds the advisory CFL bound {:.4}",
            params.tau,
            cfl.bound
        );
    }

    let psnr_of = |img: &ImageGrid| reference.map(|r| metrics::psnr(img, r, INTENSITY_MAX));
    let mut best: Option<(f64, usize, ImageGrid)> = match stop.kind {
        StopKind::PsnrPeak { .. } => {
            Some((psnr_of(&state.current).unwrap()?, 0, state.current.clone()))
        }
        _ => None,
    };
    let mut stale = 0usize;
    let mut trace = Vec::new();
    let mut last_rel = 0.0;

    while state.iteration < stop.limit() {
        let next = step(model, &state, params)?;
        let rel = metrics::relative_error(&next.current, &state.current)?;
        let psnr = psnr_of(&next.current).transpose()?;
        trace.push(TraceEntry {
            iteration: next.iteration,
            relative_error: rel,
            psnr,
        });
        state = next;
        last_rel = rel;

        match stop.kind {
            StopKind::RelativeError { epsilon } => {
                if rel <= epsilon {
                    break;
                }
            }
            StopKind::PsnrPeak { patience } => {
                let p = psnr.expect("reference checked above");
                let b = best.as_mut().expect("initialized for psnr_peak");
                if p > b.0 {
                    *b = (p, state.iteration, state.current.clone());
                    stale = 0;
                } else {
                    stale += 1;
                    if stale >= patience {
                        break;
                    }
                }
            }
            StopKind::MaxIters { .. } => {}
        }
    }

    let iterations = state.iteration;
    let (image, selected_iteration) = match best {
        Some((_, it, img)) => (img, it),
        None => (state.current, iterations),
    };
    let (psnr, mssim) = match reference {
        Some(r) => (
            Some(metrics::psnr(&image, r, INTENSITY_MAX)?),
            Some(metrics::mssim(&image, r, &SsimConfig::default())?),
        ),
        None => (None, None),
    };
    let report = MetricsReport {
        psnr,
        mssim,
        speckle_index: metrics::speckle_index(&image)?,
        relative_error: last_rel,
        iterations,
        selected_iteration,
        wall_time: started.elapsed().as_secs_f64(),
    };
    Ok(Restoration {
        image,
        report,
        trace,
    })
}

/// Restores each channel independently with identical settings and merges.
pub fn denoise_rgb(
    model: Model,
    noisy: &RgbImage,
    params: &ModelParams,
    stop: &StoppingRule,
    reference: Option<&RgbImage>,
) -> Result<RgbRestoration> {
    let refs: [Option<&ImageGrid>; 3] = match reference {
        Some(r) => [Some(&r.r), Some(&r.g), Some(&r.b)],
        None => [None; 3],
    };
    let run = |c: &ImageGrid, r: Option<&ImageGrid>| denoise(model, c, params, stop, r);
    let (r, (g, b)) = rayon::join(
        || run(&noisy.r, refs[0]),
        || rayon::join(|| run(&noisy.g, refs[1]), || run(&noisy.b, refs[2])),
    );
    let (r, g, b) = (r?, g?, b?);
    let image = RgbImage::new(r.image.clone(), g.image.clone(), b.image.clone())?;
    Ok(RgbRestoration {
        image,
        channels: [r, g, b],
    })
}
