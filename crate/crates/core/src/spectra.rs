//! Output quadrature variance spectra, the limiting-case analytic transfer
//! matrices, and photothermal cutoff estimation.

use rayon::prelude::*;
use nalgebra::ComplexField;
use serde::Serialize;
use thiserror::Error;

use crate::config::{derive_rates, CavityRates, OpaParams};
use crate::crystal::{photothermal_coeffs, CouplingState, ThermalCoeffs};
use crate::dynamics::{
    build_photothermal_matrices, build_system_matrices, transfer_matrices,
    transfer_matrices_reduced, Detunings, DynamicsError, PhotothermalMatrices, SystemMatrices,
    ThetaSet, M4,
};
use crate::scalar::{im, re, Cx, Real};
use crate::steady_state::{operating_point_with, SteadyState};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("no photothermal cutoff found: {0}")]
    NoCutoffFound(String),
    #[error("limiting-case assumptions violated: {}", .0.join("; "))]
    AssumptionViolated(Vec<String>),
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
}

/// One point of an output spectrum. Variances are normalized to shot noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint<T> {
    /// Sideband angular frequency (rad/s).
    pub omega: T,
    pub v1: T,
    pub v2: T,
}

impl<T: Real> SpectrumPoint<T> {
    pub fn freq_hz(&self) -> T {
        self.omega / T::two_pi()
    }

    pub fn get(&self, q: Quadrature) -> T {
        match q {
            Quadrature::Amplitude => self.v1,
            Quadrature::Phase => self.v2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    Amplitude,
    Phase,
}

impl Quadrature {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Quadrature::Amplitude),
            2 => Some(Quadrature::Phase),
            _ => None,
        }
    }
}

/// Normalized input quadrature variances of the seed and pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputVariances<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
}

impl<T: Real> InputVariances<T> {
    pub fn shot_noise() -> Self {
        InputVariances {
            a1: T::one(),
            a2: T::one(),
            b1: T::one(),
            b2: T::one(),
        }
    }

    pub fn from_params(p: &OpaParams<T>) -> Self {
        InputVariances {
            a1: p.v_a1_in,
            a2: p.v_a2_in,
            b1: p.v_b1_in,
            b2: p.v_b2_in,
        }
    }
}

/// V¹ and V² of the fundamental output: |Θ_in|² rows weighted by the input
/// variances plus unit-weighted vacuum-port contributions.
pub fn output_variances<T: Real>(ts: &ThetaSet<T>, iv: &InputVariances<T>) -> (T, T) {
    let w = [iv.a1, iv.a2, iv.b1, iv.b2];
    let row = |i: usize| {
        let mut v = T::zero();
        for j in 0..4 {
            v += ts.input[(i, j)].norm_sqr() * w[j]
                + ts.output[(i, j)].norm_sqr()
                + ts.scatter[(i, j)].norm_sqr()
                + ts.absorb[(i, j)].norm_sqr();
        }
        v
    };
    (row(0), row(1))
}

/// Logarithmic frequency grid in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points_per_decade: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid {
            f_min_hz: 1.0,
            f_max_hz: 1e8,
            points_per_decade: 400,
        }
    }
}

impl FrequencyGrid {
    pub fn new(f_min_hz: f64, f_max_hz: f64, points_per_decade: usize) -> Result<Self, SpectraError> {
        if !(f_min_hz > 0.0 && f_min_hz < f_max_hz && f_max_hz.is_finite()) {
            return Err(SpectraError::InvalidGrid(format!(
                "need 0 < f_min < f_max, got [{f_min_hz}, {f_max_hz}]"
            )));
        }
        if points_per_decade < 10 {
            return Err(SpectraError::InvalidGrid(format!(
                "points per decade must be at least 10, got {points_per_decade}"
            )));
        }
        Ok(FrequencyGrid {
            f_min_hz,
            f_max_hz,
            points_per_decade,
        })
    }

    pub fn len(&self) -> usize {
        ((self.f_max_hz / self.f_min_hz).log10() * self.points_per_decade as f64).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn freqs_hz(&self) -> Vec<f64> {
        let n = self.len();
        let (lo, hi) = (self.f_min_hz.log10(), self.f_max_hz.log10());
        (0..n)
            .map(|k| {
                if k == 0 {
                    self.f_min_hz
                } else if k == n - 1 {
                    self.f_max_hz
                } else {
                    10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64)
                }
            })
            .collect()
    }

    /// Angular frequencies (rad/s).
    pub fn omegas<T: Real>(&self) -> Vec<T> {
        self.freqs_hz()
            .into_iter()
            .map(|f| T::lit(2.0 * std::f64::consts::PI * f))
            .collect()
    }
}

/// Fully assembled OPA model at one operating point.
#[derive(Debug, Clone)]
pub struct Opa<T: Real> {
    pub params: OpaParams<T>,
    pub rates: CavityRates<T>,
    pub coupling: CouplingState<T>,
    pub steady: SteadyState<T>,
    pub thermal: ThermalCoeffs<T>,
    pub system: SystemMatrices<T>,
    photothermal: bool,
}

impl<T: Real> Opa<T> {
    pub fn new(p: &OpaParams<T>) -> Result<Self, Error> {
        p.validate()?;
        let rates = derive_rates(p);
        let coupling = CouplingState::from_params(p)?;
        let steady = operating_point_with(p, &rates, coupling.eps_bar)?;
        let thermal = photothermal_coeffs(p, &rates, &steady, &coupling);
        let system = build_system_matrices(&steady, coupling.eps_bar, &rates, p.detunings());
        Ok(Opa {
            params: p.clone(),
            rates,
            coupling,
            steady,
            thermal,
            system,
            photothermal: true,
        })
    }

    /// Same operating point and absorption loss with the photothermal
    /// coupling matrices zeroed.
    pub fn without_photothermal_coupling(&self) -> Self {
        Opa {
            photothermal: false,
            ..self.clone()
        }
    }

    pub fn has_photothermal_coupling(&self) -> bool {
        self.photothermal
    }

    pub fn photothermal_matrices(&self, omega: T) -> PhotothermalMatrices<T> {
        if self.photothermal {
            build_photothermal_matrices(omega, &self.steady, &self.thermal, &self.rates)
        } else {
            PhotothermalMatrices::zero()
        }
    }

    pub fn theta(&self, omega: T) -> Result<ThetaSet<T>, DynamicsError> {
        transfer_matrices(omega, &self.system, &self.photothermal_matrices(omega))
    }

    pub fn theta_reduced(&self, omega: T) -> Result<ThetaSet<T>, DynamicsError> {
        transfer_matrices_reduced(omega, &self.system)
    }

    pub fn input_variances(&self) -> InputVariances<T> {
        InputVariances::from_params(&self.params)
    }

    pub fn point(&self, omega: T) -> Result<SpectrumPoint<T>, DynamicsError> {
        let (v1, v2) = output_variances(&self.theta(omega)?, &self.input_variances());
        Ok(SpectrumPoint { omega, v1, v2 })
    }

    pub fn reduced_point(&self, omega: T) -> Result<SpectrumPoint<T>, DynamicsError> {
        let (v1, v2) = output_variances(&self.theta_reduced(omega)?, &self.input_variances());
        Ok(SpectrumPoint { omega, v1, v2 })
    }

    /// Evaluates every frequency in parallel; output order follows `omegas`.
    pub fn spectrum(&self, omegas: &[T]) -> Result<Vec<SpectrumPoint<T>>, DynamicsError> {
        omegas.par_iter().map(|&w| self.point(w)).collect()
    }

    pub fn reduced_spectrum(&self, omegas: &[T]) -> Result<Vec<SpectrumPoint<T>>, DynamicsError> {
        omegas.par_iter().map(|&w| self.reduced_point(w)).collect()
    }

    pub fn limiting_theta(&self, omega: T) -> Result<ThetaSet<T>, SpectraError> {
        limiting_theta(
            omega,
            &self.steady,
            self.coupling.eps_bar,
            &self.rates,
            &self.thermal,
            self.params.detunings(),
        )
    }
}

impl<T: Real> OpaParams<T> {
    pub fn detunings(&self) -> Detunings<T> {
        Detunings {
            a: self.omega_a_det,
            b: self.omega_b_det,
        }
    }
}

/// Composes operating point, matrices, Θ and variances over a grid.
pub fn spectrum<T: Real>(p: &OpaParams<T>, grid: &FrequencyGrid) -> Result<Vec<SpectrumPoint<T>>, Error> {
    Ok(Opa::new(p)?.spectrum(&grid.omegas())?)
}

/// Ratio |ā|/|b̄| above which the weak-seed assumption is rejected.
pub const WEAK_SEED_RATIO: f64 = 0.1;

/// Approximate Θ rows 1 and 2 of the limiting case (weak seed, no scattering,
/// no detuning, in-band frequency, real pump). Rows 3 and 4 are zero.
pub fn limiting_theta<T: Real>(
    omega: T,
    ss: &SteadyState<T>,
    eps_bar: Cx<T>,
    rates: &CavityRates<T>,
    tc: &ThermalCoeffs<T>,
    det: Detunings<T>,
) -> Result<ThetaSet<T>, SpectraError> {
    let (ra, rb) = (&rates.a, &rates.b);
    let mut bad = Vec::new();
    let (a, b) = (ss.a_bar, ss.b_bar);
    if a.modulus() >= T::lit(WEAK_SEED_RATIO) * b.modulus() {
        bad.push(format!(
            "|a|/|b| = {:.3e} not below {WEAK_SEED_RATIO}",
            (a.modulus() / b.modulus()).as_f64()
        ));
    }
    let tiny = T::lit(1e-9);
    if det.a.abs() > tiny * ra.total || det.b.abs() > tiny * rb.total {
        bad.push("mean detunings are nonzero".into());
    }
    if ra.scatter != T::zero() || rb.scatter != T::zero() {
        bad.push("intra-cavity scattering is nonzero".into());
    }
    if !(omega < ra.total) {
        bad.push(format!(
            "Ω = {:.3e} rad/s is outside the cavity linewidth {:.3e}",
            omega.as_f64(),
            ra.total.as_f64()
        ));
    }
    if b.im.abs() > tiny * b.modulus() {
        bad.push("pump phase is neither 0 nor π".into());
    }
    if !bad.is_empty() {
        return Err(SpectraError::AssumptionViolated(bad));
    }

    let two = T::lit(2.0);
    let (e, ec, bc, ac) = (eps_bar, eps_bar.conj(), b.conj(), a.conj());
    let ga = ra.total;
    let gb = rb.total;
    let den = ga * ga - eps_bar.norm_sqr() * b.norm_sqr();
    let sum = e * bc + ec * b;
    let diff = ec * b - e * bc;
    let f = re(T::one()) / Cx::new(omega, -tc.omega_t);
    let cb = tc.c_b;
    let pp = a * bc * cb * (re(ga) + ec * b) + ac * b * cb.conj() * (re(ga) + e * bc);
    let qq = a * bc * cb * (re(ga) - ec * b) - ac * b * cb.conj() * (re(ga) - e * bc);
    let r2 = two.sqrt();
    let i1 = im(T::one());
    let zero = re(T::zero());

    let s_io = (ra.input * ra.output).sqrt();
    let s_ao = (ra.absorb * ra.output).sqrt();
    let ao = ra.output;
    let pump_in = (ao * rb.absorb * rb.input).sqrt();
    let pump_out = (ao * rb.absorb * rb.output).sqrt();
    let pump_abs = (two * ao).sqrt() * (two * rb.absorb - gb);
    let pump_den = gb * den;

    let direct = |s: T| {
        [
            [(re(two * ga) + sum) * s / den, i1 * diff * s / den],
            [i1 * diff * s / den, (re(two * ga) - sum) * s / den],
        ]
    };
    let pump_col = |k: T| {
        [
            -f * i1 * pp * k / pump_den,
            -f * qq * k / pump_den,
        ]
    };

    let fill = |d: [[Cx<T>; 2]; 2], p: [Cx<T>; 2]| {
        let mut m = M4::zeros();
        for i in 0..2 {
            m[(i, 0)] = d[i][0];
            m[(i, 1)] = d[i][1];
            m[(i, 2)] = p[i];
            m[(i, 3)] = zero;
        }
        m
    };

    let input = fill(direct(s_io), pump_col(two * r2 * pump_in));
    let absorb = fill(direct(s_ao), pump_col(pump_abs));
    let e2b2 = eps_bar.norm_sqr() * b.norm_sqr();
    let out_diag = |sign: T| {
        (re(-ga * ga + two * ao * ga + e2b2) + sum * (sign * ao)) / den
    };
    let output = fill(
        [
            [out_diag(T::one()), i1 * diff * ao / den],
            [i1 * diff * ao / den, out_diag(-T::one())],
        ],
        pump_col(two * r2 * pump_out),
    );
    Ok(ThetaSet {
        input,
        output,
        scatter: M4::zeros(),
        absorb,
    })
}

/// Number of points on each side of the centred log-log slope stencil.
fn slope_half_width(n: usize, ppd: f64) -> usize {
    ((ppd / 10.0).round() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Plateau run must cover at least this many decades.
pub const MIN_PLATEAU_DECADES: f64 = 0.3;

/// Frequency (rad/s) at which the chosen variance first exceeds its mid-band
/// plateau by 3 dB coming down from the photothermal band.
///
/// The plateau is located by scanning upward: the centred log-log slope must
/// fall below −0.5 (photothermal roll-off) and then recover above −0.05; the
/// following run with |slope| < 0.05 spanning at least
/// [`MIN_PLATEAU_DECADES`] is the plateau, its level the median. The crossing
/// of plateau·10^0.3 is bisected on the running-maximum (monotone) envelope,
/// interpolated linearly in log-log.
pub fn cutoff_estimate<T: Real>(spec: &[SpectrumPoint<T>], q: Quadrature) -> Result<T, SpectraError> {
    let n = spec.len();
    if n < 3 {
        return Err(SpectraError::NoCutoffFound("spectrum has fewer than 3 points".into()));
    }
    let lw: Vec<f64> = spec.iter().map(|s| s.omega.as_f64().log10()).collect();
    let lv: Vec<f64> = spec.iter().map(|s| s.get(q).as_f64().log10()).collect();
    if lw.iter().chain(lv.iter()).any(|x| !x.is_finite()) {
        return Err(SpectraError::NoCutoffFound("non-finite or non-positive values".into()));
    }
    let ppd = (n - 1) as f64 / (lw[n - 1] - lw[0]);
    let k = slope_half_width(n, ppd);
    let slope: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(k);
            let hi = (i + k).min(n - 1);
            (lv[hi] - lv[lo]) / (lw[hi] - lw[lo])
        })
        .collect();

    let mut i = 0;
    while i < n && slope[i] > -0.5 {
        i += 1;
    }
    if i == n {
        return Err(SpectraError::NoCutoffFound("no roll-off".into()));
    }
    while i < n && slope[i] < -0.05 {
        i += 1;
    }
    if i == n {
        return Err(SpectraError::NoCutoffFound("roll-off never flattens".into()));
    }
    let mut j = i;
    while j < n && slope[j].abs() < 0.05 {
        j += 1;
    }
    if lw[j - 1] - lw[i] < MIN_PLATEAU_DECADES {
        return Err(SpectraError::NoCutoffFound("plateau too short".into()));
    }
    let mut run: Vec<f64> = lv[i..j].to_vec();
    run.sort_by(|x, y| x.total_cmp(y));
    let m = run.len();
    let plateau = if m % 2 == 1 {
        run[m / 2]
    } else {
        0.5 * (run[m / 2 - 1] + run[m / 2])
    };
    let target = plateau + 0.3;

    // envelope(x) = max of lv over [x, i]: non-increasing in frequency
    let mut env = vec![f64::NEG_INFINITY; i + 1];
    env[i] = lv[i];
    for t in (0..i).rev() {
        env[t] = env[t + 1].max(lv[t]);
    }
    if env[0] < target {
        return Err(SpectraError::NoCutoffFound("variance never exceeds plateau by 3 dB".into()));
    }
    // bisection on the index interval bracketing the crossing
    let (mut lo, mut hi) = (0usize, i);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if env[mid] >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (x0, x1, y0, y1) = (lw[lo], lw[hi], env[lo], env[hi]);
    let x = if y1 == y0 { x0 } else { x0 + (target - y0) * (x1 - x0) / (y1 - y0) };
    Ok(T::lit(10f64.powf(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid(ppd: usize) -> Vec<f64> {
        FrequencyGrid::new(1.0, 1e8, ppd).unwrap().omegas()
    }

    #[test]
    fn grid_shape() {
        let g = FrequencyGrid::default();
        let f = g.freqs_hz();
        assert_eq!(f.len(), 3201);
        assert_eq!(f[0], 1.0);
        assert_eq!(*f.last().unwrap(), 1e8);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
        assert!(FrequencyGrid::new(10.0, 1.0, 40).is_err());
        assert!(FrequencyGrid::new(1.0, 10.0, 5).is_err());
    }

    #[test]
    fn passive_variances_are_unity() {
        let mut p = OpaParams::<f64>::table1();
        p.kappa0 = 0.0;
        p.pump = crate::config::PumpSetting::Watts(0.5);
        let opa = Opa::new(&p).unwrap().without_photothermal_coupling();
        for w in [0.0, 1e3, 1e8, 1e10] {
            let s = opa.point(w).unwrap();
            assert_relative_eq!(s.v1, 1.0, max_relative = 1e-12);
            assert_relative_eq!(s.v2, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn variances_linear_in_input() {
        let opa = Opa::new(&OpaParams::<f64>::table1()).unwrap();
        let ts = opa.theta(2e4).unwrap();
        let base = output_variances(&ts, &InputVariances::shot_noise());
        let iv = InputVariances { b1: 2.0, ..InputVariances::shot_noise() };
        let more = output_variances(&ts, &iv);
        assert_relative_eq!(more.0 - base.0, ts.input[(0, 2)].norm_sqr(), max_relative = 1e-9);
        assert_relative_eq!(more.1 - base.1, ts.input[(1, 2)].norm_sqr(), max_relative = 1e-9);
    }

    #[test]
    fn default_spectrum_shape() {
        let opa = Opa::new(&OpaParams::<f64>::table1()).unwrap();
        let s = opa.spectrum(&grid(20)).unwrap();
        let lo = s.iter().find(|p| p.freq_hz() >= 1.0).unwrap();
        let mid = s.iter().find(|p| p.freq_hz() >= 1e5).unwrap();
        assert!(mid.v2 < 0.1, "phase quadrature squeezed mid-band: {}", mid.v2);
        assert!(lo.v2 > 1.0, "photothermal noise at 1 Hz: {}", lo.v2);
        let c = cutoff_estimate(&s, Quadrature::Phase).unwrap() / (2.0 * PI);
        assert!(c < 1e4, "knee {c} Hz");
    }

    #[test]
    fn no_absorption_is_flat_in_band() {
        let p = OpaParams::<f64>::table1().without_absorption();
        let opa = Opa::new(&p).unwrap();
        let s = opa.spectrum(&FrequencyGrid::new(1.0, 1e5, 20).unwrap().omegas()).unwrap();
        let v0 = s[0].v2;
        assert!(s.iter().all(|x| (x.v2 / v0 - 1.0).abs() < 1e-4));
        assert!(matches!(
            cutoff_estimate(&s, Quadrature::Phase),
            Err(SpectraError::NoCutoffFound(_))
        ));
    }

    #[test]
    fn flat_below_thermal_cutoff() {
        let opa = Opa::new(&OpaParams::<f64>::table1()).unwrap();
        let wt = opa.thermal.omega_t;
        let a = opa.point(wt / 100.0).unwrap().v2;
        let b = opa.point(wt / 30.0).unwrap().v2;
        assert_relative_eq!(a, b, max_relative = 2e-3);
    }

    #[test]
    fn photothermal_off_spectrum_has_no_cutoff() {
        let opa = Opa::new(&OpaParams::<f64>::table1()).unwrap().without_photothermal_coupling();
        let s = opa.spectrum(&grid(40)).unwrap();
        assert!(cutoff_estimate(&s, Quadrature::Phase).is_err());
        assert!(cutoff_estimate(&s, Quadrature::Amplitude).is_err());
    }

    #[test]
    fn limiting_theta_rejects_noncompliant_setups() {
        let opa = Opa::new(&OpaParams::<f64>::table1()).unwrap();
        match opa.limiting_theta(1e5) {
            Err(SpectraError::AssumptionViolated(v)) => {
                assert!(v.iter().any(|s| s.contains("scattering")));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    fn compliant(phi_b: f64) -> Opa<f64> {
        let mut p = OpaParams::<f64>::table1().with_pump_phase(phi_b);
        p.sigma_a_sc = 0.0;
        p.sigma_b_sc = 0.0;
        p.dt_offset = 0.0;
        Opa::new(&p).unwrap()
    }

    #[test]
    fn limiting_theta_structure() {
        let opa = compliant(PI);
        let t = opa.limiting_theta(1e4).unwrap();
        // Θ_in(12) vanishes for a real pump
        assert!(t.input[(0, 1)].norm() < 1e-12 * t.input[(0, 0)].norm());
        for i in 0..2 {
            assert_eq!(t.input[(i, 3)], re(0.0));
            for j in 0..4 {
                assert_eq!(t.scatter[(i, j)], re(0.0));
            }
        }
        // pump column ∝ 1/(Ω − iΩ_T)
        let wt = opa.thermal.omega_t;
        let t1 = opa.limiting_theta(wt).unwrap();
        let t2 = opa.limiting_theta(10.0 * wt).unwrap();
        let expect = Cx::new(10.0 * wt, -wt) / Cx::new(wt, -wt);
        let got = t1.input[(1, 2)] / t2.input[(1, 2)];
        assert_relative_eq!(got.re, expect.re, max_relative = 1e-12);
        assert_relative_eq!(got.im, expect.im, max_relative = 1e-12);
    }

    #[test]
    fn limiting_theta_frequency_independent_entries_match_dc() {
        // with Ω well inside the thermal-free band the non-pump entries are
        // the Ω → 0 limits of the full solution
        let opa = compliant(0.0).without_photothermal_coupling();
        let w = 1e-3 * opa.rates.a.total;
        let full = opa.theta(w).unwrap();
        let lim = opa.limiting_theta(w).unwrap();
        for m in [(&full.input, &lim.input), (&full.output, &lim.output), (&full.absorb, &lim.absorb)] {
            for (i, j) in [(0, 0), (1, 1)] {
                let d = (m.0[(i, j)] - m.1[(i, j)]).norm() / m.0[(i, j)].norm();
                assert!(d < 1e-2, "({i},{j}) rel {d}");
            }
        }
    }

    #[test]
    fn f32_tracks_f64() {
        let p64 = OpaParams::<f64>::table1();
        let opa64 = Opa::new(&p64).unwrap();
        let opa32 = Opa::new(&p64.cast::<f32>()).unwrap();
        for f in [10.0, 1e3, 1e5, 1e7] {
            let w = 2.0 * PI * f;
            let a = opa64.point(w).unwrap();
            let b = opa32.point(w as f32).unwrap();
            assert_relative_eq!(b.v1 as f64, a.v1, max_relative = 2e-2);
            assert_relative_eq!(b.v2 as f64, a.v2, max_relative = 2e-2);
        }
    }
}
