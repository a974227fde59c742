//! Coherent operating point under the undepleted-pump approximation.

use nalgebra::ComplexField;
use serde::Serialize;
use thiserror::Error;

use crate::config::{derive_rates, CavityRates, OpaParams, PumpSetting};
use crate::crystal::{coupling_strength, phase_mismatch};
use crate::scalar::{cx, polar, Cx, Real, HBAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    #[error("operating point at or above threshold (denominator {denominator:e} <= 0)")]
    AboveThreshold { denominator: f64 },
    #[error("nonlinear coupling is zero; threshold undefined")]
    ZeroCoupling,
    #[error("pump input coupler transmits nothing; threshold undefined")]
    PumpBlocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState<T> {
    /// Input amplitudes, √(photons/s).
    pub a_in: Cx<T>,
    pub b_in: Cx<T>,
    /// Intra-cavity amplitudes, √photons.
    pub a_bar: Cx<T>,
    pub b_bar: Cx<T>,
    pub p_th: T,
    pub p_pump: T,
    /// |ā|² with the pump on over |ā|² with the pump off.
    pub gain: T,
}

/// b̄ = √(2γ_b^in) B_in / (γ_b^tot − iω_b^det).
pub fn pump_steady<T: Real>(b_in: Cx<T>, rates: &CavityRates<T>, omega_b_det: T) -> Cx<T> {
    let two = T::lit(2.0);
    b_in * (two * rates.b.input).sqrt() / cx(rates.b.total, -omega_b_det)
}

/// Solves (iω_a^det − γ_a^tot) ā + ε̄* b̄ ā* + √(2γ_a^in) A_in = 0.
///
/// The closed form is ā = [s (γ + iω) + ε̄* b̄ s*] / (γ² + ω² − |ε̄|²|b̄|²) with
/// s = √(2γ_a^in) A_in; factoring s gives the e^{i(φ_b − 2φ_a)} phase factor.
pub fn seed_steady<T: Real>(
    a_in: Cx<T>,
    b_bar: Cx<T>,
    eps_bar: Cx<T>,
    rates: &CavityRates<T>,
    omega_a_det: T,
) -> Result<Cx<T>, SteadyStateError> {
    let g = rates.a.total;
    let den = g * g + omega_a_det * omega_a_det - eps_bar.norm_sqr() * b_bar.norm_sqr();
    if !(den > T::zero()) {
        return Err(SteadyStateError::AboveThreshold {
            denominator: den.as_f64(),
        });
    }
    let s = a_in * (T::lit(2.0) * rates.a.input).sqrt();
    Ok((s * cx(g, omega_a_det) + eps_bar.conj() * b_bar * s.conj()) / den)
}

/// On-resonance threshold pump power |B_th|² ħω_b with
/// |B_th| = γ_a^tot γ_b^tot / (|ε̄| √(2γ_b^in)).
pub fn threshold_power<T: Real>(
    rates: &CavityRates<T>,
    eps_bar: Cx<T>,
    hbar_omega_b: T,
) -> Result<T, SteadyStateError> {
    let amp = threshold_amplitude(rates, eps_bar)?;
    Ok(hbar_omega_b * amp * amp)
}

fn threshold_amplitude<T: Real>(rates: &CavityRates<T>, eps_bar: Cx<T>) -> Result<T, SteadyStateError> {
    let e = eps_bar.modulus();
    if e == T::zero() {
        return Err(SteadyStateError::ZeroCoupling);
    }
    if rates.b.input == T::zero() {
        return Err(SteadyStateError::PumpBlocked);
    }
    Ok(rates.a.total * rates.b.total / (e * (T::lit(2.0) * rates.b.input).sqrt()))
}

/// Full operating point from a parameter set.
pub fn operating_point<T: Real>(p: &OpaParams<T>) -> Result<SteadyState<T>, SteadyStateError> {
    let rates = derive_rates(p);
    let eps = coupling_strength(phase_mismatch(p.dt_offset, p.xi), p.z, p.kappa0);
    operating_point_with(p, &rates, eps)
}

pub fn operating_point_with<T: Real>(
    p: &OpaParams<T>,
    rates: &CavityRates<T>,
    eps_bar: Cx<T>,
) -> Result<SteadyState<T>, SteadyStateError> {
    let hbar_wa = T::lit(HBAR) * p.omega_a();
    let hbar_wb = T::lit(HBAR) * p.omega_b();
    let (p_th, p_pump) = match p.pump {
        PumpSetting::Fraction(f) => {
            let p_th = threshold_power(rates, eps_bar, hbar_wb)?;
            (p_th, f * p_th)
        }
        PumpSetting::Watts(w) => {
            let p_th = threshold_power(rates, eps_bar, hbar_wb).unwrap_or(T::max_value().unwrap());
            (p_th, w)
        }
    };
    let b_in = polar((p_pump / hbar_wb).sqrt(), p.phi_b);
    let a_in = polar((p.p_seed / hbar_wa).sqrt(), p.phi_a);
    let b_bar = pump_steady(b_in, rates, p.omega_b_det);
    let a_bar = seed_steady(a_in, b_bar, eps_bar, rates, p.omega_a_det)?;
    // gain does not depend on the seed amplitude; evaluate it with a unit seed
    let unit = polar(T::one(), p.phi_a);
    let on = seed_steady(unit, b_bar, eps_bar, rates, p.omega_a_det)?;
    let off = seed_steady(unit, Cx::new(T::zero(), T::zero()), eps_bar, rates, p.omega_a_det)?;
    Ok(SteadyState {
        a_in,
        b_in,
        a_bar,
        b_bar,
        p_th,
        p_pump,
        gain: on.norm_sqr() / off.norm_sqr(),
    })
}
