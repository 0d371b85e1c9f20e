//! Diffusion coefficients, explicit time steppers and the restoration driver.
//!
//! Three models are provided:
//!
//! * [`Model::Proposed`]: fourth-order telegraph diffusion
//!   `I_tt + gamma I_t = -lap(C(I_s, |lap I_s|) lap I) - lambda ((I - f) / I)^2`,
//! * [`Model::Tdm`]: second-order telegraph diffusion
//!   `I_tt + gamma I_t = div(C(I_s, |grad I_s|) grad I)`,
//! * [`Model::Shan`]: the parabolic gray-level indicator model
//!   `I_t = div(C(I_s, |grad I_s|) grad I)`,
//!
//! where `I_s` is the Gaussian-smoothed iterate.

mod coeff;
pub mod presets;
mod solver;
mod step;

pub use coeff::{
    cfl_bound, coeff_proposed, coeff_shan, coeff_tdm, fidelity_term, CflCheck, SchemeOrder,
};
pub use solver::{
    denoise, denoise_rgb, Restoration, RgbRestoration, StopKind, StoppingRule, TraceEntry,
};
pub use step::{
    advance_proposed, advance_shan, advance_tdm, coefficient_for, step, step_proposed, step_shan,
    step_tdm, DIVERGENCE_EXCURSION,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// Guard for `M_xi` on all-zero images.
pub const TINY: f64 = 1e-12;

/// Restoration model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Proposed,
    Tdm,
    Shan,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Shan, Model::Tdm, Model::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            Model::Proposed => "proposed",
            Model::Tdm => "tdm",
            Model::Shan => "shan",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(Model::Proposed),
            "tdm" | "tde" => Ok(Model::Tdm),
            "shan" => Ok(Model::Shan),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

/// Form of the fidelity term of the fourth-order model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityForm {
    /// `((I - f) / I)^2`
    #[default]
    Squared,
    /// `((I - f) / I) * (f / I)`
    Signed,
}

impl FromStr for FidelityForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "squared" => Ok(FidelityForm::Squared),
            "signed" => Ok(FidelityForm::Signed),
            other => Err(Error::InvalidParameter(format!(
                "unknown fidelity form '{other}'"
            ))),
        }
    }
}

impl fmt::Display for FidelityForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FidelityForm::Squared => "squared",
            FidelityForm::Signed => "signed",
        })
    }
}

/// Scalar knobs of a solver run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Damping of the wave term.
    pub gamma: f64,
    /// Gray-level indicator exponent.
    pub alpha: f64,
    /// Edge threshold of the TDM and proposed edge stoppers.
    pub k: f64,
    /// Gradient exponent of the SHAN edge stopper (the tables' beta).
    pub nu: f64,
    /// Fidelity weight.
    pub lambda: f64,
    /// Time step.
    pub tau: f64,
    /// Standard deviation of the Gaussian pre-smoothing.
    pub xi: f64,
    /// Grid spacing.
    pub h: f64,
    pub fidelity_form: FidelityForm,
}

impl Default for ModelParams {
    /// The BSD68 profile of the proposed model (`gamma = 5, alpha = 2, k = 2,
    /// lambda = 0.08`) with `tau = 0.2`, `xi = 2`.
    fn default() -> Self {
        Self {
            gamma: 5.0,
            alpha: 2.0,
            k: 2.0,
            nu: 1.0,
            lambda: 0.08,
            tau: 0.2,
            xi: 2.0,
            h: 1.0,
            fidelity_form: FidelityForm::Squared,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("xi", self.xi),
            ("alpha", self.alpha),
            ("k", self.k),
            ("nu", self.nu),
            ("h", self.h),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("lambda", self.lambda)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Two-time-level state of an explicit scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub current: ImageGrid,
    pub previous: ImageGrid,
    pub observed: ImageGrid,
    pub iteration: usize,
}

impl SolverState {
    /// Initial state `I^0 = I^-1 = f`, i.e. zero initial velocity.
    pub fn new(observed: ImageGrid) -> Self {
        Self {
            current: observed.clone(),
            previous: observed.clone(),
            observed,
            iteration: 0,
        }
    }

    /// State with explicit time levels; all grids must share dimensions.
    pub fn from_levels(
        current: ImageGrid,
        previous: ImageGrid,
        observed: ImageGrid,
        iteration: usize,
    ) -> Result<Self> {
        current.check_dims(&previous)?;
        current.check_dims(&observed)?;
        Ok(Self {
            current,
            previous,
            observed,
            iteration,
        })
    }

    /// Applies the same geometric transform to all three grids.
    pub fn map_grids(&self, f: impl Fn(&ImageGrid) -> ImageGrid) -> SolverState {
        SolverState {
            current: f(&self.current),
            previous: f(&self.previous),
            observed: f(&self.observed),
            iteration: self.iteration,
        }
    }
}
