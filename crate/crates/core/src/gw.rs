//! Projection of output quadrature spectra onto the quantum noise of a
//! conventional (lossless, non-signal-recycled) GW interferometer.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{Real, HBAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GwError {
    #[error("h_SQL is undefined at zero frequency")]
    ZeroFrequency,
    #[error("amplitude-filter scheme needs a filter linewidth gamma_f")]
    MissingFilterLinewidth,
    #[error("invalid interferometer parameters: {0}")]
    InvalidIfo(String),
}

/// Injected squeeze angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SqueezeAngle<T> {
    Fixed(T),
    /// θ(Ω) = −Φ(Ω): only the first quadrature reaches the readout.
    FrequencyDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IfoParams<T> {
    /// Mirror mass (kg).
    pub m: T,
    /// Arm length (m).
    pub l: T,
    /// Arm-cavity linewidth (rad/s).
    pub gamma_arm: T,
    /// I0 / I_SQL.
    pub power_ratio: T,
    pub theta: SqueezeAngle<T>,
    /// Amplitude-filter linewidth (rad/s).
    pub gamma_f: Option<T>,
}

impl<T: Real> Default for IfoParams<T> {
    /// 40 kg mirrors, 4 km arms, 2π·100 Hz arm linewidth, I0 = I_SQL, θ = π/2.
    fn default() -> Self {
        IfoParams {
            m: T::lit(40.0),
            l: T::lit(4000.0),
            gamma_arm: T::two_pi() * T::lit(100.0),
            power_ratio: T::one(),
            theta: SqueezeAngle::Fixed(T::frac_pi_2()),
            gamma_f: None,
        }
    }
}

impl<T: Real> IfoParams<T> {
    pub fn validate(&self) -> Result<(), GwError> {
        for (k, v) in [
            ("m", self.m),
            ("L", self.l),
            ("gamma_arm", self.gamma_arm),
            ("power_ratio", self.power_ratio),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(GwError::InvalidIfo(format!("{k} must be positive and finite")));
            }
        }
        if let Some(g) = self.gamma_f {
            if !(g > T::zero()) {
                return Err(GwError::InvalidIfo("gamma_f must be positive".into()));
            }
        }
        Ok(())
    }
}

/// h_SQL(Ω) = √(8ħ / (m Ω² L²)).
pub fn h_sql<T: Real>(omega: T, m: T, l: T) -> Result<T, GwError> {
    if omega == T::zero() {
        return Err(GwError::ZeroFrequency);
    }
    Ok((T::lit(8.0 * HBAR) / (m * omega * omega * l * l)).sqrt())
}

/// η(Ω) = 2 (I0/I_SQL) γ⁴ / (Ω² (γ² + Ω²)).
pub fn eta<T: Real>(omega: T, power_ratio: T, gamma_arm: T) -> T {
    let g2 = gamma_arm * gamma_arm;
    let w2 = omega * omega;
    T::lit(2.0) * power_ratio * g2 * g2 / (w2 * (g2 + w2))
}

/// Φ = cot⁻¹ η, in (0, π/2) for η > 0.
pub fn phi<T: Real>(eta: T) -> T {
    T::one().atan2(eta)
}

/// Frequency where η = 1, i.e. where the unsqueezed curve touches the SQL.
pub fn sql_touch_omega<T: Real>(power_ratio: T, gamma_arm: T) -> T {
    let root = (T::one() + T::lit(8.0) * power_ratio).sqrt();
    gamma_arm * ((root - T::one()) / T::lit(2.0)).sqrt()
}

/// S / h²_SQL = ½(1/η + η)(V1 cos²(θ+Φ) + V2 sin²(θ+Φ)).
pub fn gw_noise_normalized<T: Real>(omega: T, v1: T, v2: T, ifo: &IfoParams<T>) -> T {
    let e = eta(omega, ifo.power_ratio, ifo.gamma_arm);
    let p = phi(e);
    let (c2, s2) = match ifo.theta {
        SqueezeAngle::FrequencyDependent => (T::one(), T::zero()),
        SqueezeAngle::Fixed(th) => {
            let (s, c) = (th + p).sin_cos();
            (c * c, s * s)
        }
    };
    T::lit(0.5) * (T::one() / e + e) * (v1 * c2 + v2 * s2)
}

/// Strain noise spectral density (1/Hz).
pub fn gw_noise<T: Real>(omega: T, v1: T, v2: T, ifo: &IfoParams<T>) -> Result<T, GwError> {
    let h = h_sql(omega, ifo.m, ifo.l)?;
    Ok(h * h * gw_noise_normalized(omega, v1, v2, ifo))
}

/// ζ1 = Ω²/(γ_f² + Ω²), ζ2 = γ_f²/(γ_f² + Ω²).
pub fn filter_weights<T: Real>(omega: T, gamma_f: T) -> (T, T) {
    let w2 = omega * omega;
    let g2 = gamma_f * gamma_f;
    (w2 / (g2 + w2), g2 / (g2 + w2))
}

/// Amplitude-filtered injection, S / h²_SQL = [ζ1(V1 + η²V2) + ζ2(1 + η²)] / (2η).
pub fn filtered_noise_normalized<T: Real>(omega: T, v1: T, v2: T, ifo: &IfoParams<T>) -> Result<T, GwError> {
    let gf = ifo.gamma_f.ok_or(GwError::MissingFilterLinewidth)?;
    let e = eta(omega, ifo.power_ratio, ifo.gamma_arm);
    let (z1, z2) = filter_weights(omega, gf);
    let e2 = e * e;
    Ok((z1 * (v1 + e2 * v2) + z2 * (T::one() + e2)) / (T::lit(2.0) * e))
}

pub fn filtered_noise<T: Real>(omega: T, v1: T, v2: T, ifo: &IfoParams<T>) -> Result<T, GwError> {
    let h = h_sql(omega, ifo.m, ifo.l)?;
    Ok(h * h * filtered_noise_normalized(omega, v1, v2, ifo)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn h_sql_scaling() {
        let w = 2.0 * PI * 100.0;
        let h = h_sql(w, 40.0, 4000.0).unwrap();
        assert_relative_eq!(h_sql(2.0 * w, 40.0, 4000.0).unwrap(), h / 2.0, max_relative = 1e-15);
        assert_relative_eq!(h_sql(w, 160.0, 4000.0).unwrap(), h / 2.0, max_relative = 1e-15);
        // hand arithmetic: 8ħ = 8.436574536e-34; mΩ²L² = 40·(628.3185307)²·1.6e7
        let denom = 40.0 * 628.318_530_717_958_6f64.powi(2) * 1.6e7;
        assert_relative_eq!(h, (8.436_574_536e-34 / denom).sqrt(), max_relative = 1e-9);
        assert!(h > 1e-24 && h < 1e-23);
        assert_eq!(h_sql(0.0, 40.0, 4000.0), Err(GwError::ZeroFrequency));
    }

    #[test]
    fn eta_and_phi_limits() {
        let g = 2.0 * PI * 100.0;
        assert_relative_eq!(eta(g, 1.0, g), 1.0, max_relative = 1e-15);
        assert_relative_eq!(phi(1.0), FRAC_PI_4, max_relative = 1e-15);
        assert!(eta(1e9, 1.0, g) < 1e-9);
        assert_relative_eq!(phi(eta(1e9, 1.0, g)), FRAC_PI_2, max_relative = 1e-9);
        assert!(eta(1e-3, 1.0, g) > 1e9);
        assert!(phi(eta(1e-3, 1.0, g)) < 1e-9);
    }

    #[test]
    fn sql_touch_point() {
        let ifo = IfoParams::<f64> {
            theta: SqueezeAngle::Fixed(0.3),
            ..Default::default()
        };
        let w = sql_touch_omega(ifo.power_ratio, ifo.gamma_arm);
        assert_relative_eq!(eta(w, ifo.power_ratio, ifo.gamma_arm), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gw_noise_normalized(w, 1.0, 1.0, &ifo), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn frequency_dependent_angle_decouples_phase_quadrature() {
        let ifo = IfoParams::<f64> {
            theta: SqueezeAngle::FrequencyDependent,
            ..Default::default()
        };
        for w in [10.0, 300.0, 1e4] {
            let e = eta(w, 1.0, ifo.gamma_arm);
            let s = gw_noise_normalized(w, 0.2, 50.0, &ifo);
            assert_relative_eq!(s, 0.5 * (1.0 / e + e) * 0.2, max_relative = 1e-14);
            // explicit θ = −Φ through the fixed-angle branch
            let fixed = IfoParams {
                theta: SqueezeAngle::Fixed(-phi(e)),
                ..ifo
            };
            assert_relative_eq!(gw_noise_normalized(w, 0.2, 50.0, &fixed), s, max_relative = 1e-12);
        }
    }

    #[test]
    fn filter_limits() {
        let gf = 2.0 * PI * 400.0;
        let ifo = IfoParams::<f64> {
            gamma_f: Some(gf),
            ..Default::default()
        };
        let (v1, v2) = (0.3, 12.0);
        let hi = 1e3 * gf;
        assert_relative_eq!(
            filtered_noise_normalized(hi, v1, v2, &ifo).unwrap(),
            gw_noise_normalized(hi, v1, v2, &ifo),
            max_relative = 1e-5
        );
        let lo = 1e-4 * gf;
        assert_relative_eq!(
            filtered_noise_normalized(lo, v1, v2, &ifo).unwrap(),
            gw_noise_normalized(lo, 1.0, 1.0, &ifo),
            max_relative = 1e-6
        );
        let bare = IfoParams::<f64>::default();
        assert_eq!(
            filtered_noise_normalized(1.0, v1, v2, &bare),
            Err(GwError::MissingFilterLinewidth)
        );
    }

    #[test]
    fn absolute_and_normalized_agree() {
        let ifo = IfoParams::<f64>::default();
        let w = 2.0 * PI * 50.0;
        let h = h_sql(w, ifo.m, ifo.l).unwrap();
        assert_relative_eq!(
            gw_noise(w, 0.5, 4.0, &ifo).unwrap(),
            h * h * gw_noise_normalized(w, 0.5, 4.0, &ifo),
            max_relative = 1e-15
        );
    }

    proptest! {
        #[test]
        fn filter_weights_partition_unity(w in 1e-3f64..1e7, g in 1e-3f64..1e7) {
            let (a, b) = filter_weights(w, g);
            prop_assert!((a + b - 1.0).abs() < 1e-14);
        }

        #[test]
        fn angle_periodicity(w in 1.0f64..1e5, th in -10.0f64..10.0, v1 in 0.01f64..100.0, v2 in 0.01f64..100.0) {
            let a = IfoParams { theta: SqueezeAngle::Fixed(th), ..IfoParams::<f64>::default() };
            let b = IfoParams { theta: SqueezeAngle::Fixed(th + PI), ..a };
            let sa = gw_noise_normalized(w, v1, v2, &a);
            let sb = gw_noise_normalized(w, v1, v2, &b);
            prop_assert!((sa - sb).abs() <= 1e-12 * sa);
        }

        #[test]
        fn unsqueezed_is_angle_independent(w in 1.0f64..1e5, th in -10.0f64..10.0) {
            let a = IfoParams { theta: SqueezeAngle::Fixed(th), ..IfoParams::<f64>::default() };
            let b = IfoParams { theta: SqueezeAngle::Fixed(0.0), ..a };
            let sa = gw_noise_normalized(w, 1.0, 1.0, &a);
            let sb = gw_noise_normalized(w, 1.0, 1.0, &b);
            prop_assert!((sa - sb).abs() <= 1e-12 * sa);
        }

        #[test]
        fn frequency_dependent_squeezing_always_helps(w in 1.0f64..1e6, v1 in 0.01f64..0.999, v2 in 1.0f64..1e3) {
            let fd = IfoParams { theta: SqueezeAngle::FrequencyDependent, ..IfoParams::<f64>::default() };
            prop_assert!(gw_noise_normalized(w, v1, v2, &fd) < gw_noise_normalized(w, 1.0, 1.0, &fd));
        }
    }
}
