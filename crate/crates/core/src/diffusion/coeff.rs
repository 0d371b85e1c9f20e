use crate::grid::ImageGrid;

use super::{FidelityForm, TINY};

#[inline]
fn gray_indicator(s: f64, m_pow: f64, alpha: f64) -> f64 {
    let a = s.abs().powf(alpha);
    2.0 * a / (m_pow + a)
}

/// `2|I_s|^a / (M^a + |I_s|^a) * 1 / (1 + (|lap I_s| / k)^2)`.
pub fn coeff_proposed(
    smoothed: &ImageGrid,
    lap_mag: &ImageGrid,
    m_xi: f64,
    alpha: f64,
    k: f64,
) -> ImageGrid {
    let m_pow = m_xi.max(TINY).powf(alpha);
    smoothed.zip_map(lap_mag, |s, l| {
        let r = l / k;
        gray_indicator(s, m_pow, alpha) / (1.0 + r * r)
    })
}

/// Same gray-level indicator as [`coeff_proposed`], edge stopper on `|grad I_s|`.
pub fn coeff_tdm(
    smoothed: &ImageGrid,
    grad_mag: &ImageGrid,
    m_xi: f64,
    alpha: f64,
    k: f64,
) -> ImageGrid {
    coeff_proposed(smoothed, grad_mag, m_xi, alpha, k)
}

/// `(I_s / M)^a * 1 / (1 + |grad I_s|^nu)`.
pub fn coeff_shan(
    smoothed: &ImageGrid,
    grad_mag: &ImageGrid,
    m_xi: f64,
    alpha: f64,
    nu: f64,
) -> ImageGrid {
    let m = m_xi.max(TINY);
    smoothed.zip_map(grad_mag, |s, g| {
        let ratio = (s.max(0.0) / m).min(1.0);
        ratio.powf(alpha) / (1.0 + g.powf(nu))
    })
}

/// Fidelity term evaluated pixelwise on the current iterate.
pub fn fidelity_term(current: &ImageGrid, observed: &ImageGrid, form: FidelityForm) -> ImageGrid {
    match form {
        FidelityForm::Squared => current.zip_map(observed, |i, f| {
            let r = (i - f) / i;
            r * r
        }),
        FidelityForm::Signed => current.zip_map(observed, |i, f| ((i - f) / i) * (f / i)),
    }
}

/// Differential order of a scheme, carried for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeOrder {
    Second,
    Fourth,
}

/// Result of the advisory CFL check `tau <= h / max g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflCheck {
    pub bound: f64,
    pub ok: bool,
    pub order: SchemeOrder,
}

/// Advisory CFL bound with `g` read as the diffusion coefficient magnitude.
pub fn cfl_bound(coeff_max: f64, h: f64, order: SchemeOrder, tau: f64) -> CflCheck {
    let bound = h / coeff_max.max(TINY);
    CflCheck {
        bound,
        ok: tau <= bound,
        order,
    }
}
