use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::noise::{INTENSITY_FLOOR, INTENSITY_MAX};
use crate::stencil::{
    divergence, gaussian_smooth, gradient_central, gradient_magnitude, laplacian,
    laplacian_magnitude, max_abs, VectorField,
};

use super::coeff::{coeff_proposed, coeff_shan, coeff_tdm, fidelity_term};
use super::{Model, ModelParams, SolverState, TINY};

/// An unclamped iterate leaving `[floor - E * 255, 255 + E * 255]` is treated as
/// a blow-up. Every iterate is clamped to the working range, so without this
/// guard an unstable step would oscillate between the clamp bounds instead of
/// overflowing.
pub const DIVERGENCE_EXCURSION: f64 = 10.0;

/// Diffusion coefficient of `model` for the iterate `current`.
pub fn coefficient_for(model: Model, current: &ImageGrid, params: &ModelParams) -> ImageGrid {
    let smoothed = gaussian_smooth(current, params.xi);
    let m_xi = max_abs(&smoothed).max(TINY);
    match model {
        Model::Proposed => coeff_proposed(
            &smoothed,
            &laplacian_magnitude(&smoothed, params.h),
            m_xi,
            params.alpha,
            params.k,
        ),
        Model::Tdm => coeff_tdm(
            &smoothed,
            &gradient_magnitude(&gradient_central(&smoothed, params.h)),
            m_xi,
            params.alpha,
            params.k,
        ),
        Model::Shan => coeff_shan(
            &smoothed,
            &gradient_magnitude(&gradient_central(&smoothed, params.h)),
            m_xi,
            params.alpha,
            params.nu,
        ),
    }
}

fn flux_divergence(current: &ImageGrid, coeff: &ImageGrid, h: f64) -> ImageGrid {
    let grad = gradient_central(current, h);
    let flux = VectorField::new(
        coeff.zip_map(&grad.dx, |c, g| c * g),
        coeff.zip_map(&grad.dy, |c, g| c * g),
    );
    divergence(&flux, h)
}

/// Damped two-level update `[(2 + g t) I^n - I^{n-1} + t^2 R] / (1 + g t)`.
fn telegraph_update(state: &SolverState, rhs: &ImageGrid, params: &ModelParams) -> Vec<f64> {
    let gt = params.gamma * params.tau;
    let tt = params.tau * params.tau;
    let (a, d) = (2.0 + gt, 1.0 + gt);
    state
        .current
        .data()
        .iter()
        .zip(state.previous.data())
        .zip(rhs.data())
        .map(|((&cur, &prev), &r)| (a * cur - prev + tt * r) / d)
        .collect()
}

fn finish(state: &SolverState, next: Vec<f64>) -> Result<SolverState> {
    let iteration = state.iteration + 1;
    let lo = INTENSITY_FLOOR - DIVERGENCE_EXCURSION * INTENSITY_MAX;
    let hi = INTENSITY_MAX + DIVERGENCE_EXCURSION * INTENSITY_MAX;
    if let Some(&bad) = next.iter().find(|v| !v.is_finite() || **v < lo || **v > hi) {
        return Err(Error::Divergence {
            iteration,
            detail: format!("unclamped value {bad:e} outside the stable range; reduce tau"),
        });
    }
    let next = next
        .into_iter()
        .map(|v| v.clamp(INTENSITY_FLOOR, INTENSITY_MAX))
        .collect();
    let (w, h) = state.current.dims();
    Ok(SolverState {
        current: ImageGrid::from_vec(w, h, next)?,
        previous: state.current.clone(),
        observed: state.observed.clone(),
        iteration,
    })
}

/// One step of the fourth-order model with a given coefficient field.
pub fn advance_proposed(
    state: &SolverState,
    params: &ModelParams,
    coeff: &ImageGrid,
) -> Result<SolverState> {
    let h = params.h;
    let lap = laplacian(&state.current, h);
    let weighted = coeff.zip_map(&lap, |c, l| c * l);
    let bilap = laplacian(&weighted, h);
    let fid = fidelity_term(&state.current, &state.observed, params.fidelity_form);
    let lambda = params.lambda;
    let rhs = bilap.zip_map(&fid, |b, f| -b - lambda * f);
    finish(state, telegraph_update(state, &rhs, params))
}

/// One step of the second-order telegraph model with a given coefficient field.
pub fn advance_tdm(
    state: &SolverState,
    params: &ModelParams,
    coeff: &ImageGrid,
) -> Result<SolverState> {
    let rhs = flux_divergence(&state.current, coeff, params.h);
    finish(state, telegraph_update(state, &rhs, params))
}

/// One forward-Euler step of the parabolic model with a given coefficient field.
pub fn advance_shan(
    state: &SolverState,
    params: &ModelParams,
    coeff: &ImageGrid,
) -> Result<SolverState> {
    let rhs = flux_divergence(&state.current, coeff, params.h);
    let tau = params.tau;
    let next = state
        .current
        .data()
        .iter()
        .zip(rhs.data())
        .map(|(&c, &r)| c + tau * r)
        .collect();
    finish(state, next)
}

pub fn step_proposed(state: &SolverState, params: &ModelParams) -> Result<SolverState> {
    let c = coefficient_for(Model::Proposed, &state.current, params);
    advance_proposed(state, params, &c)
}

pub fn step_tdm(state: &SolverState, params: &ModelParams) -> Result<SolverState> {
    let c = coefficient_for(Model::Tdm, &state.current, params);
    advance_tdm(state, params, &c)
}

pub fn step_shan(state: &SolverState, params: &ModelParams) -> Result<SolverState> {
    let c = coefficient_for(Model::Shan, &state.current, params);
    advance_shan(state, params, &c)
}

/// Dispatches one step of `model`.
pub fn step(model: Model, state: &SolverState, params: &ModelParams) -> Result<SolverState> {
    match model {
        Model::Proposed => step_proposed(state, params),
        Model::Tdm => step_tdm(state, params),
        Model::Shan => step_shan(state, params),
    }
}
