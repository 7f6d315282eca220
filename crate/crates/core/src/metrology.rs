//! Quantum Fisher information and phase-sensitivity bounds for a
//! Mach-Zehnder interferometer whose second port carries a coherent state `|β⟩`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{snfcs_moments_closed_form, FockAmplitudes, ModeMoments};
use crate::special::poisson_weight;

/// Port-1 state together with the port-2 coherent amplitude.
#[derive(Clone, Debug)]
pub struct InputConfig {
    pub port1: FockAmplitudes,
    pub beta: Complex64,
}

impl InputConfig {
    pub fn new(port1: FockAmplitudes, beta: Complex64) -> Self {
        InputConfig { port1, beta }
    }
}

/// Fisher information and the bounds derived from it, all in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseBounds {
    pub fisher: f64,
    /// `1/√F`
    pub qcrb: f64,
    /// `1/√N_tot`
    pub sql: f64,
    /// `1/N_tot`
    pub hl: f64,
    /// `qcrb / hl`
    pub theta_ratio: f64,
}

impl PhaseBounds {
    /// Bounds from a Fisher information and the total mean photon number at the input.
    pub fn new(fisher: f64, total_photons: f64) -> Result<Self> {
        if !(total_photons > 0.0) {
            return Err(Error::NoPhotons);
        }
        if !(fisher > 0.0) {
            return Err(Error::Numerical(format!("non-positive Fisher information {fisher}")));
        }
        let qcrb = 1.0 / fisher.sqrt();
        let hl = 1.0 / total_photons;
        if hl > qcrb * (1.0 + 1e-12) {
            log::warn!("QCRB {qcrb} lies below the Heisenberg limit {hl}");
        }
        Ok(PhaseBounds { fisher, qcrb, sql: 1.0 / total_photons.sqrt(), hl, theta_ratio: qcrb / hl })
    }
}

/// Fisher information of `|ψ₁⟩|β⟩` from the port-1 moments.
///
/// `F = ⟨n₁⟩ + |β|² + 2|β|²(⟨n₁⟩ − |⟨a₁⟩|²) − [β*²(⟨a₁²⟩ − ⟨a₁⟩²) + c.c.]`.
/// For real `β` the bracket is `|β|²(⟨a₁†²⟩ + ⟨a₁²⟩ − ⟨a₁†⟩² − ⟨a₁⟩²)`; the
/// `β*²` weighting keeps the expression exact when `β` carries a phase.
pub fn qfi_port2_coherent(m1: &ModeMoments, beta: Complex64) -> Result<f64> {
    let b2 = beta.norm_sqr();
    let quad = m1.mean_a2 - m1.mean_a * m1.mean_a;
    let weight = beta.conj() * beta.conj();
    let bracket = weight * quad + (weight * quad).conj();
    if bracket.im.abs() > 1e-10 * (1.0 + bracket.re.abs()) {
        return Err(Error::Numerical(format!("quadrature bracket has imaginary residue {}", bracket.im)));
    }
    let f = m1.mean_n + b2 + 2.0 * b2 * (m1.mean_n - m1.mean_a.norm_sqr()) - bracket.re;
    if f < -1e-9 {
        return Err(Error::Numerical(format!("negative Fisher information {f}")));
    }
    Ok(f.max(0.0))
}

pub fn bounds_from_moments(m1: &ModeMoments, beta: Complex64) -> Result<PhaseBounds> {
    let total = m1.mean_n + beta.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::NoPhotons);
    }
    PhaseBounds::new(qfi_port2_coherent(m1, beta)?, total)
}

/// Bounds for a constructed port-1 state; Heisenberg limit uses that state's own `⟨n⟩`.
pub fn bounds_for(config: &InputConfig) -> Result<PhaseBounds> {
    let norm = config.port1.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("port-1 state is not normalized (norm² = {norm})")));
    }
    if !(config.beta.re.is_finite() && config.beta.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite beta {}", config.beta)));
    }
    bounds_from_moments(&config.port1.moments(), config.beta)
}

/// Bounds for `|ψ(α, m)⟩|β⟩` from the closed-form single-filter moments.
pub fn qcrb_snfcs_closed_form(alpha: Complex64, m: usize, beta: Complex64) -> Result<PhaseBounds> {
    bounds_from_moments(&snfcs_moments_closed_form(alpha, m)?, beta)
}

/// Filter index used for the `m = |α|²` prescription (nearest integer).
pub fn matched_filter_index(alpha_sq: f64) -> usize {
    alpha_sq.round().max(0.0) as usize
}

/// Large-photon-number form `(√2/N)√(N_m²/(1−N_m²))` with `m = |α|² = |β|²`, `N = 2|α|²`.
pub fn heisenberg_scaling_qcrb(alpha_sq: f64) -> f64 {
    let m = matched_filter_index(alpha_sq);
    let removed = poisson_weight(alpha_sq, m as u64);
    let total = 2.0 * alpha_sq;
    std::f64::consts::SQRT_2 / total * ((1.0 - removed) / removed).sqrt()
}

/// `|β|²e^{2r} + sinh²r`, the Fisher information with squeezed vacuum in port 1.
pub fn fisher_squeezed_vacuum(r: f64, beta: Complex64) -> f64 {
    beta.norm_sqr() * (2.0 * r).exp() + r.sinh().powi(2)
}

/// `1/√(|β|²e^{2r} + sinh²r)` for squeezed vacuum in port 1.
pub fn qcrb_squeezed_vacuum(r: f64, beta: Complex64) -> f64 {
    1.0 / fisher_squeezed_vacuum(r, beta).sqrt()
}

/// Squeezing parameter with `sinh²r = mean_photons`.
pub fn matched_squeezing(mean_photons: f64) -> f64 {
    mean_photons.sqrt().asinh()
}

pub fn ecs_mean_photons(alpha: Complex64) -> f64 {
    let a2 = alpha.norm_sqr();
    a2 * a2.tanh()
}

pub fn ocs_mean_photons(alpha: Complex64) -> Result<f64> {
    let a2 = alpha.norm_sqr();
    if a2 == 0.0 {
        return Err(Error::DegenerateState("odd coherent state of zero amplitude vanishes".into()));
    }
    Ok(a2 / a2.tanh())
}

fn parity_qcrb(alpha: Complex64, beta: Complex64, mean_n: f64) -> Result<f64> {
    let a2 = alpha.norm_sqr();
    let b2 = beta.norm_sqr();
    let radicand = mean_n + b2 * (1.0 + 2.0 * mean_n - 2.0 * a2 * (2.0 * alpha.arg()).cos());
    if !(radicand > 0.0) {
        return Err(Error::Numerical(format!("non-positive radicand {radicand}")));
    }
    Ok(1.0 / radicand.sqrt())
}

/// QCRB for `|α,+⟩|β⟩`.
pub fn qcrb_ecs_closed_form(alpha: Complex64, beta: Complex64) -> Result<f64> {
    parity_qcrb(alpha, beta, ecs_mean_photons(alpha))
}

/// QCRB for `|α,−⟩|β⟩`.
pub fn qcrb_ocs_closed_form(alpha: Complex64, beta: Complex64) -> Result<f64> {
    parity_qcrb(alpha, beta, ocs_mean_photons(alpha)?)
}
