//! Crystal physics: phase-matched coupling, its derivatives, the one-pole
//! thermal response and the photothermal coupling coefficients.

use nalgebra::ComplexField;
use serde::Serialize;
use thiserror::Error;

use crate::config::{CavityRates, OpaParams};
use crate::scalar::{cx, polar, re, Cx, Real, C_LIGHT, HBAR};
use crate::steady_state::SteadyState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrystalError {
    #[error("Δk·z/2 = {x} sits on a sinc zero (cot pole); derivative undefined")]
    SingularInput { x: f64 },
}

/// Below this |Δk z/2| the derivative uses its series expansion.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Δk = ξ (T − T0).
pub fn phase_mismatch<T: Real>(dt_offset: T, xi: T) -> T {
    xi * dt_offset
}

fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        x.sin() / x
    }
}

/// ε = κ0 z e^{iΔkz/2} sinc(Δkz/2).
pub fn coupling_strength<T: Real>(delta_k: T, z: T, kappa0: T) -> Cx<T> {
    let x = delta_k * z / T::lit(2.0);
    polar(kappa0 * z * sinc(x), x)
}

/// Returns (∂ε/∂Δk, ∂ε/∂z).
///
/// ∂ε/∂Δk = ε (iz/2 − 1/Δk + (z/2) cot x) with x = Δkz/2, switching to
/// ε (iz/2 − Δk z²/12) for |x| < [`SERIES_THRESHOLD`].
/// ∂ε/∂z = ε (Δk/2)(i + cot x), which simplifies to κ0 e^{iΔkz} and is
/// evaluated in that form.
pub fn coupling_derivatives<T: Real>(
    delta_k: T,
    z: T,
    kappa0: T,
) -> Result<(Cx<T>, Cx<T>), CrystalError> {
    let two = T::lit(2.0);
    let x = delta_k * z / two;
    let eps = coupling_strength(delta_k, z, kappa0);
    let d_dz = polar(kappa0, two * x);
    if x.abs() < T::lit(SERIES_THRESHOLD) {
        let d_dk = eps * cx(-delta_k * z * z / T::lit(12.0), z / two);
        return Ok((d_dk, d_dz));
    }
    let m = (x / T::pi()).round();
    if m != T::zero() && (x - m * T::pi()).abs() <= T::lit(1e-12) * x.abs() {
        return Err(CrystalError::SingularInput { x: x.as_f64() });
    }
    let cot = x.cos() / x.sin();
    let d_dk = eps * cx(-T::one() / delta_k + z / two * cot, z / two);
    Ok((d_dk, d_dz))
}

/// Mean coupling and its derivatives at the operating temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingState<T> {
    pub delta_k: T,
    pub eps_bar: Cx<T>,
    pub d_eps_d_dk: Cx<T>,
    pub d_eps_dz: Cx<T>,
}

impl<T: Real> CouplingState<T> {
    pub fn from_params(p: &OpaParams<T>) -> Result<Self, CrystalError> {
        let delta_k = phase_mismatch(p.dt_offset, p.xi);
        let eps_bar = coupling_strength(delta_k, p.z, p.kappa0);
        let (d_eps_d_dk, d_eps_dz) = coupling_derivatives(delta_k, p.z, p.kappa0)?;
        Ok(CouplingState {
            delta_k,
            eps_bar,
            d_eps_d_dk,
            d_eps_dz,
        })
    }
}

/// Ω_T = κ_th / (C ρ r0²).
pub fn thermal_cutoff<T: Real>(p: &OpaParams<T>) -> T {
    p.kappa_th / (p.c_heat * p.rho * p.r0 * p.r0)
}

/// H_T(Ω) = 1 / ((iΩ + Ω_T) C ρ V), in K/W.
pub fn thermal_response<T: Real>(omega: T, omega_t: T, c_heat: T, rho: T, volume: T) -> Cx<T> {
    let heat = c_heat * rho * volume;
    Cx::new(T::one(), T::zero()) / (cx(omega_t, omega) * heat)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalCoeffs<T> {
    pub omega_t: T,
    /// 1 / (C ρ V) (K/J).
    pub h_t_scale: T,
    pub c_a: Cx<T>,
    pub c_b: Cx<T>,
    pub pi_a: T,
    pub pi_b: T,
    pub k_a: T,
    pub k_b: T,
}

impl<T: Real> ThermalCoeffs<T> {
    /// 1 / (iΩ + Ω_T), the prefactor shared by every photothermal matrix.
    pub fn pole(&self, omega: T) -> Cx<T> {
        re(T::one()) / cx(self.omega_t, omega)
    }
}

/// Photothermal coefficients at an operating point.
///
/// Π_x = ħω_x √(2γ_x^abs) |x̄| / (CρV); C_x = Π_x [(∂ε/∂Δk) ξ + (∂ε/∂z) α z];
/// K_x = (2πc/λ_x)(dn_x/dT / n_x + α_x). The crystal elongation uses α_a.
pub fn photothermal_coeffs<T: Real>(
    p: &OpaParams<T>,
    rates: &CavityRates<T>,
    ss: &SteadyState<T>,
    cs: &CouplingState<T>,
) -> ThermalCoeffs<T> {
    let two = T::lit(2.0);
    let h_t_scale = T::one() / (p.c_heat * p.rho * p.mode_volume());
    let hbar = T::lit(HBAR);
    let pi_a = hbar * p.omega_a() * (two * rates.a.absorb).sqrt() * ss.a_bar.modulus() * h_t_scale;
    let pi_b = hbar * p.omega_b() * (two * rates.b.absorb).sqrt() * ss.b_bar.modulus() * h_t_scale;
    let bracket = cs.d_eps_d_dk * p.xi + cs.d_eps_dz * (p.alpha_a * p.z);
    let two_pi_c = T::two_pi() * T::lit(C_LIGHT);
    ThermalCoeffs {
        omega_t: thermal_cutoff(p),
        h_t_scale,
        c_a: bracket * pi_a,
        c_b: bracket * pi_b,
        pi_a,
        pi_b,
        k_a: two_pi_c / p.lambda_a * (p.dn_a_dt / p.n_a() + p.alpha_a),
        k_b: two_pi_c / p.lambda_b * (p.dn_b_dt / p.n_b() + p.alpha_b),
    }
}
