//! Physical parameters, the flat `key = value unit` config format, and derived
//! cavity damping rates.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{Real, C_LIGHT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("cannot parse value or unit for key `{0}`")]
    UnitParseError(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("line {line}: expected `key = value [unit]`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given more than once")]
    DuplicateKey(String),
}

/// How the pump drive is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PumpSetting<T> {
    /// Pump power as a fraction of the on-resonance threshold power.
    Fraction(T),
    /// Absolute pump power (W).
    Watts(T),
}

/// Every crystal and cavity constant plus the drive fields, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpaParams<T> {
    pub lambda_a: T,
    pub lambda_b: T,
    pub r_a_in: T,
    pub r_a_out: T,
    pub r_b_in: T,
    pub r_b_out: T,
    /// Intensity loss per metre.
    pub sigma_a_abs: T,
    pub sigma_a_sc: T,
    pub sigma_b_abs: T,
    pub sigma_b_sc: T,
    pub z: T,
    pub kappa0: T,
    pub n: T,
    pub n_a: Option<T>,
    pub n_b: Option<T>,
    pub c_heat: T,
    pub rho: T,
    pub kappa_th: T,
    pub r0: T,
    pub xi: T,
    pub alpha_a: T,
    pub alpha_b: T,
    pub dn_a_dt: T,
    pub dn_b_dt: T,
    /// Operating temperature minus the phase-matching optimum (K).
    pub dt_offset: T,
    pub omega_a_det: T,
    pub omega_b_det: T,
    pub p_seed: T,
    pub phi_a: T,
    pub phi_b: T,
    pub pump: PumpSetting<T>,
    pub v_a1_in: T,
    pub v_a2_in: T,
    pub v_b1_in: T,
    pub v_b2_in: T,
}

impl<T: Real> OpaParams<T> {
    /// Table I constants with a 1 mW seed, pump at half threshold, both
    /// phases zero and shot-noise-limited inputs.
    pub fn table1() -> Self {
        let l = T::lit;
        OpaParams {
            lambda_a: l(1064e-9),
            lambda_b: l(532e-9),
            r_a_in: l(0.9996),
            r_a_out: l(0.956),
            r_b_in: l(0.04),
            r_b_out: l(0.9996),
            sigma_a_abs: l(0.1),
            sigma_a_sc: l(0.02),
            sigma_b_abs: l(4.0),
            sigma_b_sc: l(0.5),
            z: l(7.5e-3),
            kappa0: l(8e5),
            n: l(2.233),
            n_a: None,
            n_b: None,
            c_heat: l(633.0),
            rho: l(4648.0),
            kappa_th: l(4.0),
            r0: l(36e-6),
            xi: l(749.0),
            alpha_a: l(5e-6),
            alpha_b: l(5e-6),
            dn_a_dt: l(3.3e-6),
            dn_b_dt: l(37e-6),
            dt_offset: l(1e-3),
            omega_a_det: T::zero(),
            omega_b_det: T::zero(),
            p_seed: l(1e-3),
            phi_a: T::zero(),
            phi_b: T::zero(),
            pump: PumpSetting::Fraction(l(0.5)),
            v_a1_in: T::one(),
            v_a2_in: T::one(),
            v_b1_in: T::one(),
            v_b2_in: T::one(),
        }
    }

    pub fn n_a(&self) -> T {
        self.n_a.unwrap_or(self.n)
    }

    pub fn n_b(&self) -> T {
        self.n_b.unwrap_or(self.n)
    }

    /// Carrier angular frequency of the fundamental (rad/s).
    pub fn omega_a(&self) -> T {
        T::two_pi() * T::lit(C_LIGHT) / self.lambda_a
    }

    /// Carrier angular frequency of the second harmonic (rad/s).
    pub fn omega_b(&self) -> T {
        T::two_pi() * T::lit(C_LIGHT) / self.lambda_b
    }

    /// Interaction volume V = π r0² z.
    pub fn mode_volume(&self) -> T {
        T::pi() * self.r0 * self.r0 * self.z
    }

    pub fn with_seed_power(mut self, watts: T) -> Self {
        self.p_seed = watts;
        self
    }

    pub fn with_pump_fraction(mut self, fraction: T) -> Self {
        self.pump = PumpSetting::Fraction(fraction);
        self
    }

    pub fn with_pump_phase(mut self, phi_b: T) -> Self {
        self.phi_b = phi_b;
        self
    }

    /// Sets the pump amplitude-quadrature noise, keeping the input at
    /// minimum uncertainty when the new value squeezes below the old product.
    pub fn with_pump_noise(mut self, v_b1: T) -> Self {
        self.v_b1_in = v_b1;
        if self.v_b1_in * self.v_b2_in < T::one() {
            self.v_b2_in = T::one() / v_b1;
        }
        self
    }

    /// Zeroes both absorption coefficients.
    pub fn without_absorption(mut self) -> Self {
        self.sigma_a_abs = T::zero();
        self.sigma_b_abs = T::zero();
        self
    }

    /// Converts every field to another scalar type.
    pub fn cast<U: Real>(&self) -> OpaParams<U> {
        let c = |x: T| U::lit(x.as_f64());
        OpaParams {
            lambda_a: c(self.lambda_a),
            lambda_b: c(self.lambda_b),
            r_a_in: c(self.r_a_in),
            r_a_out: c(self.r_a_out),
            r_b_in: c(self.r_b_in),
            r_b_out: c(self.r_b_out),
            sigma_a_abs: c(self.sigma_a_abs),
            sigma_a_sc: c(self.sigma_a_sc),
            sigma_b_abs: c(self.sigma_b_abs),
            sigma_b_sc: c(self.sigma_b_sc),
            z: c(self.z),
            kappa0: c(self.kappa0),
            n: c(self.n),
            n_a: self.n_a.map(c),
            n_b: self.n_b.map(c),
            c_heat: c(self.c_heat),
            rho: c(self.rho),
            kappa_th: c(self.kappa_th),
            r0: c(self.r0),
            xi: c(self.xi),
            alpha_a: c(self.alpha_a),
            alpha_b: c(self.alpha_b),
            dn_a_dt: c(self.dn_a_dt),
            dn_b_dt: c(self.dn_b_dt),
            dt_offset: c(self.dt_offset),
            omega_a_det: c(self.omega_a_det),
            omega_b_det: c(self.omega_b_det),
            p_seed: c(self.p_seed),
            phi_a: c(self.phi_a),
            phi_b: c(self.phi_b),
            pump: match self.pump {
                PumpSetting::Fraction(f) => PumpSetting::Fraction(c(f)),
                PumpSetting::Watts(w) => PumpSetting::Watts(c(w)),
            },
            v_a1_in: c(self.v_a1_in),
            v_a2_in: c(self.v_a2_in),
            v_b1_in: c(self.v_b1_in),
            v_b2_in: c(self.v_b2_in),
        }
    }

    /// Checks every invariant of the parameter set.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::InvariantViolation(msg));
        for (key, v) in self.to_pairs() {
            if !v.is_finite() {
                return bad(format!("{key} is not finite"));
            }
        }
        for (key, v) in [
            ("R_a_in", self.r_a_in),
            ("R_a_out", self.r_a_out),
            ("R_b_in", self.r_b_in),
            ("R_b_out", self.r_b_out),
        ] {
            if !(T::zero()..=T::one()).contains(&v) {
                return bad(format!("{key} = {} outside [0, 1]", v.as_f64()));
            }
        }
        for (key, v) in [
            ("sigma_a_abs", self.sigma_a_abs),
            ("sigma_a_sc", self.sigma_a_sc),
            ("sigma_b_abs", self.sigma_b_abs),
            ("sigma_b_sc", self.sigma_b_sc),
            ("kappa0", self.kappa0),
            ("P_seed", self.p_seed),
        ] {
            if v < T::zero() {
                return bad(format!("{key} must be non-negative"));
            }
        }
        for (key, v) in [
            ("lambda_a", self.lambda_a),
            ("lambda_b", self.lambda_b),
            ("z", self.z),
            ("n", self.n),
            ("n_a", self.n_a()),
            ("n_b", self.n_b()),
            ("C", self.c_heat),
            ("rho", self.rho),
            ("kappa_th", self.kappa_th),
            ("r0", self.r0),
        ] {
            if v <= T::zero() {
                return bad(format!("{key} must be strictly positive"));
            }
        }
        match self.pump {
            PumpSetting::Fraction(f) if f < T::zero() => {
                return bad("pump_fraction must be non-negative".into())
            }
            PumpSetting::Watts(w) if w < T::zero() => {
                return bad("P_pump must be non-negative".into())
            }
            _ => {}
        }
        let tol = T::lit(1e-12);
        for (name, v1, v2) in [
            ("A", self.v_a1_in, self.v_a2_in),
            ("B", self.v_b1_in, self.v_b2_in),
        ] {
            if v1 < T::zero() || v2 < T::zero() {
                return bad(format!("input variances of {name} must be non-negative"));
            }
            if v1 * v2 < T::one() - tol {
                return bad(format!(
                    "V_{name}1_in * V_{name}2_in = {} is below the uncertainty bound 1",
                    (v1 * v2).as_f64()
                ));
            }
        }
        let half = self.lambda_a / T::lit(2.0);
        if ((self.lambda_b - half) / half).abs() > T::lit(1e-6) {
            return bad("lambda_b must equal lambda_a / 2 within 1 ppm".into());
        }
        Ok(())
    }

    fn to_pairs(&self) -> Vec<(&'static str, T)> {
        let mut v = vec![
            ("lambda_a", self.lambda_a),
            ("lambda_b", self.lambda_b),
            ("R_a_in", self.r_a_in),
            ("R_a_out", self.r_a_out),
            ("R_b_in", self.r_b_in),
            ("R_b_out", self.r_b_out),
            ("sigma_a_abs", self.sigma_a_abs),
            ("sigma_a_sc", self.sigma_a_sc),
            ("sigma_b_abs", self.sigma_b_abs),
            ("sigma_b_sc", self.sigma_b_sc),
            ("z", self.z),
            ("kappa0", self.kappa0),
            ("n", self.n),
        ];
        if let Some(x) = self.n_a {
            v.push(("n_a", x));
        }
        if let Some(x) = self.n_b {
            v.push(("n_b", x));
        }
        v.extend([
            ("C", self.c_heat),
            ("rho", self.rho),
            ("kappa_th", self.kappa_th),
            ("r0", self.r0),
            ("xi", self.xi),
            ("alpha_a", self.alpha_a),
            ("alpha_b", self.alpha_b),
            ("dn_a_dT", self.dn_a_dt),
            ("dn_b_dT", self.dn_b_dt),
            ("dT_offset", self.dt_offset),
            ("omega_a_det", self.omega_a_det),
            ("omega_b_det", self.omega_b_det),
            ("P_seed", self.p_seed),
            ("phi_a", self.phi_a),
            ("phi_b", self.phi_b),
        ]);
        v.push(match self.pump {
            PumpSetting::Fraction(f) => ("pump_fraction", f),
            PumpSetting::Watts(w) => ("P_pump", w),
        });
        v.extend([
            ("V_A1_in", self.v_a1_in),
            ("V_A2_in", self.v_a2_in),
            ("V_B1_in", self.v_b1_in),
            ("V_B2_in", self.v_b2_in),
        ]);
        v
    }

    /// Writes the parameter set in the config format, SI units, one key per
    /// line. Values use the shortest representation that parses back exactly.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        for (key, v) in self.to_pairs() {
            let _ = writeln!(s, "{key} = {:?}", v.as_f64());
        }
        s
    }
}

impl<T: Real> Default for OpaParams<T> {
    fn default() -> Self {
        Self::table1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Reflectivity,
    LossRate,
    Coupling,
    Scalar,
    SpecificHeat,
    Density,
    Conductivity,
    PerMetreKelvin,
    PerKelvin,
    Temperature,
    AngularRate,
    Power,
    Angle,
}

const KEYS: &[(&str, Dim, bool)] = &[
    // (key, dimension, part of Table I)
    ("lambda_a", Dim::Length, true),
    ("lambda_b", Dim::Length, true),
    ("R_a_in", Dim::Reflectivity, true),
    ("R_a_out", Dim::Reflectivity, true),
    ("R_b_in", Dim::Reflectivity, true),
    ("R_b_out", Dim::Reflectivity, true),
    ("sigma_a_abs", Dim::LossRate, true),
    ("sigma_a_sc", Dim::LossRate, true),
    ("sigma_b_abs", Dim::LossRate, true),
    ("sigma_b_sc", Dim::LossRate, true),
    ("z", Dim::Length, true),
    ("kappa0", Dim::Coupling, true),
    ("n", Dim::Scalar, true),
    ("n_a", Dim::Scalar, false),
    ("n_b", Dim::Scalar, false),
    ("C", Dim::SpecificHeat, true),
    ("rho", Dim::Density, true),
    ("kappa_th", Dim::Conductivity, true),
    ("r0", Dim::Length, true),
    ("xi", Dim::PerMetreKelvin, true),
    ("alpha_a", Dim::PerKelvin, true),
    ("alpha_b", Dim::PerKelvin, true),
    ("dn_a_dT", Dim::PerKelvin, true),
    ("dn_b_dT", Dim::PerKelvin, true),
    ("dT_offset", Dim::Temperature, true),
    ("omega_a_det", Dim::AngularRate, true),
    ("omega_b_det", Dim::AngularRate, true),
    ("P_seed", Dim::Power, false),
    ("phi_a", Dim::Angle, false),
    ("phi_b", Dim::Angle, false),
    ("pump_fraction", Dim::Reflectivity, false),
    ("P_pump", Dim::Power, false),
    ("V_A1_in", Dim::Scalar, false),
    ("V_A2_in", Dim::Scalar, false),
    ("V_B1_in", Dim::Scalar, false),
    ("V_B2_in", Dim::Scalar, false),
];

fn unit_factor(dim: Dim, unit: &str) -> Option<f64> {
    use std::f64::consts::PI;
    let f = match (dim, unit) {
        (Dim::Length, "m" | "") => 1.0,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "mm") => 1e-3,
        (Dim::Length, "um" | "µm") => 1e-6,
        (Dim::Length, "nm") => 1e-9,
        (Dim::Reflectivity, "") => 1.0,
        (Dim::Reflectivity, "%") => 1e-2,
        (Dim::LossRate, "" | "1/m" | "/m") => 1.0,
        (Dim::LossRate, "1/cm" | "/cm") => 1e2,
        (Dim::LossRate, "%/cm") => 1.0,
        (Dim::LossRate, "%/m") => 1e-2,
        (Dim::Coupling, "" | "1/m/s") => 1.0,
        (Dim::Scalar, "") => 1.0,
        (Dim::SpecificHeat, "" | "J/kg/K") => 1.0,
        (Dim::Density, "" | "kg/m3") => 1.0,
        (Dim::Density, "g/cm3") => 1e3,
        (Dim::Conductivity, "" | "W/K/m" | "W/m/K") => 1.0,
        (Dim::PerMetreKelvin, "" | "1/m/K") => 1.0,
        (Dim::PerKelvin, "" | "1/K") => 1.0,
        (Dim::Temperature, "" | "K") => 1.0,
        (Dim::Temperature, "mK") => 1e-3,
        (Dim::AngularRate, "" | "rad/s") => 1.0,
        (Dim::AngularRate, "Hz") => 2.0 * PI,
        (Dim::AngularRate, "kHz") => 2.0 * PI * 1e3,
        (Dim::AngularRate, "MHz") => 2.0 * PI * 1e6,
        (Dim::Power, "" | "W") => 1.0,
        (Dim::Power, "mW") => 1e-3,
        (Dim::Power, "uW" | "µW") => 1e-6,
        (Dim::Angle, "" | "rad") => 1.0,
        (Dim::Angle, "deg") => PI / 180.0,
        _ => return None,
    };
    Some(f)
}

/// Options for [`load_params_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Fill unspecified keys from the Table I defaults. When false, every
    /// Table I key and one pump setting must be present.
    pub defaults: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { defaults: true }
    }
}

/// Parses config text with Table I defaults enabled.
pub fn load_params(text: &str) -> Result<OpaParams<f64>, ConfigError> {
    load_params_with(text, LoadOptions::default())
}

pub fn load_params_with(text: &str, opts: LoadOptions) -> Result<OpaParams<f64>, ConfigError> {
    let mut seen: Vec<(&'static str, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: idx + 1 })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: idx + 1 });
        }
        let &(name, dim, _) = KEYS
            .iter()
            .find(|(k, _, _)| *k == key)
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        if seen.iter().any(|(k, _)| *k == name) {
            return Err(ConfigError::DuplicateKey(name.to_string()));
        }
        let rest = rest.trim();
        let split = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let (num, unit) = rest.split_at(split);
        let unit = unit.trim();
        // a glued percent sign, e.g. `95.6%`
        let (num, unit) = match num.strip_suffix('%') {
            Some(n) if unit.is_empty() => (n, "%"),
            _ => (num, unit),
        };
        let value: f64 = num
            .replace('_', "")
            .parse()
            .map_err(|_| ConfigError::UnitParseError(name.to_string()))?;
        let factor =
            unit_factor(dim, unit).ok_or_else(|| ConfigError::UnitParseError(name.to_string()))?;
        seen.push((name, value * factor));
    }

    let get = |k: &str| seen.iter().find(|(n, _)| *n == k).map(|(_, v)| *v);
    if !opts.defaults {
        for (k, _, required) in KEYS {
            if *required && get(k).is_none() {
                return Err(ConfigError::MissingKey(k.to_string()));
            }
        }
        if get("pump_fraction").is_none() && get("P_pump").is_none() {
            return Err(ConfigError::MissingKey("pump_fraction".into()));
        }
    }
    let mut p = OpaParams::<f64>::table1();
    let pairs: [(&str, &mut f64); 32] = [
        ("lambda_a", &mut p.lambda_a),
        ("lambda_b", &mut p.lambda_b),
        ("R_a_in", &mut p.r_a_in),
        ("R_a_out", &mut p.r_a_out),
        ("R_b_in", &mut p.r_b_in),
        ("R_b_out", &mut p.r_b_out),
        ("sigma_a_abs", &mut p.sigma_a_abs),
        ("sigma_a_sc", &mut p.sigma_a_sc),
        ("sigma_b_abs", &mut p.sigma_b_abs),
        ("sigma_b_sc", &mut p.sigma_b_sc),
        ("z", &mut p.z),
        ("kappa0", &mut p.kappa0),
        ("n", &mut p.n),
        ("C", &mut p.c_heat),
        ("rho", &mut p.rho),
        ("kappa_th", &mut p.kappa_th),
        ("r0", &mut p.r0),
        ("xi", &mut p.xi),
        ("alpha_a", &mut p.alpha_a),
        ("alpha_b", &mut p.alpha_b),
        ("dn_a_dT", &mut p.dn_a_dt),
        ("dn_b_dT", &mut p.dn_b_dt),
        ("dT_offset", &mut p.dt_offset),
        ("omega_a_det", &mut p.omega_a_det),
        ("omega_b_det", &mut p.omega_b_det),
        ("P_seed", &mut p.p_seed),
        ("phi_a", &mut p.phi_a),
        ("phi_b", &mut p.phi_b),
        ("V_A1_in", &mut p.v_a1_in),
        ("V_A2_in", &mut p.v_a2_in),
        ("V_B1_in", &mut p.v_b1_in),
        ("V_B2_in", &mut p.v_b2_in),
    ];
    for (k, slot) in pairs {
        if let Some(v) = get(k) {
            *slot = v;
        }
    }
    p.n_a = get("n_a");
    p.n_b = get("n_b");
    match (get("pump_fraction"), get("P_pump")) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::InvariantViolation(
                "set exactly one of pump_fraction and P_pump".into(),
            ))
        }
        (Some(f), None) => p.pump = PumpSetting::Fraction(f),
        (None, Some(w)) => p.pump = PumpSetting::Watts(w),
        (None, None) => {}
    }
    p.validate()?;
    Ok(p)
}

/// Damping rates of one carrier (1/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarrierRates<T> {
    pub input: T,
    pub output: T,
    pub scatter: T,
    pub absorb: T,
    pub total: T,
}

impl<T: Real> CarrierRates<T> {
    fn new(input: T, output: T, scatter: T, absorb: T) -> Self {
        CarrierRates {
            input,
            output,
            scatter,
            absorb,
            total: input + output + scatter + absorb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityRates<T> {
    /// Round-trip time of the monolithic cavity (s).
    pub tau_rt: T,
    pub a: CarrierRates<T>,
    pub b: CarrierRates<T>,
}

/// Rates of a monolithic standing-wave cavity: round-trip optical path 2nz,
/// each rate equal to the round-trip power loss over 2 τ_rt.
pub fn derive_rates<T: Real>(p: &OpaParams<T>) -> CavityRates<T> {
    let two = T::lit(2.0);
    let tau = two * p.n * p.z / T::lit(C_LIGHT);
    let mirror = |r: T| (T::one() - r) / (two * tau);
    let bulk = |sigma: T| two * sigma * p.z / (two * tau);
    CavityRates {
        tau_rt: tau,
        a: CarrierRates::new(
            mirror(p.r_a_in),
            mirror(p.r_a_out),
            bulk(p.sigma_a_sc),
            bulk(p.sigma_a_abs),
        ),
        b: CarrierRates::new(
            mirror(p.r_b_in),
            mirror(p.r_b_out),
            bulk(p.sigma_b_sc),
            bulk(p.sigma_b_abs),
        ),
    }
}
