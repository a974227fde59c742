//! Time-domain Monte-Carlo estimate of the output quadrature spectra.
//!
//! The linearized Langevin equations are written for the real quadratures
//! (X¹_a, X²_a, X¹_b, X²_b) plus the crystal temperature δT, driven by 16
//! independent white noises (two quadratures for each of the in, out,
//! scatter and absorption ports of both carriers). The system is discretized
//! exactly (Van Loan), so the sample interval can be tied to the probe
//! frequency regardless of the cavity linewidths. The sampled output is the
//! box average of the output quadratures over each interval, and Welch
//! averaging with a Hann window gives the two-sided spectral density at the
//! probe.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::OpaParams;
use crate::scalar::Cx;
use crate::spectra::Opa;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("unstable integration: {0}")]
    UnstableIntegration(String),
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
}

pub const STATE_DIM: usize = 5;
const NOISE_DIM: usize = 16;
const AUG_DIM: usize = 2 * STATE_DIM + NOISE_DIM;
const JOINT_DIM: usize = STATE_DIM + 2;

/// Welch segment length in samples.
pub const SEGMENT_LEN: usize = 256;
/// The sample interval is chosen so the probe sits on this DFT bin.
pub const PROBE_BIN: usize = 16;
pub const MIN_SEGMENTS: usize = 64;
pub const DEFAULT_MAX_SEGMENTS: usize = 4096;
/// Variance inflation from 50% overlap with a Hann window.
const OVERLAP_VARIANCE_FACTOR: f64 = 1.056;

const X1A: usize = 0;
const X2A: usize = 1;
const X1B: usize = 2;
const X2B: usize = 3;
const TEMP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub omega: f64,
    pub v1: f64,
    pub v2: f64,
    /// One-sigma statistical errors.
    pub se1: f64,
    pub se2: f64,
    pub segments: usize,
    /// Simulated time actually used (s).
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Simulated time per probe (s). Clamped to the segment limits.
    pub duration: f64,
    pub max_segments: usize,
    pub rng_seed: u64,
}

/// Linear Langevin system dy = A y dt + B dW, Cov(dW) = diag(V) dt, with
/// output quadratures z = s_out (y₀, y₁) − (dW₂, dW₃)/dt.
#[derive(Debug, Clone)]
pub struct LangevinModel {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub noise_var: [f64; NOISE_DIM],
    pub out_coupling: f64,
}

// Writes a coefficient of δx (c) or δx† (q) from the equation of the carrier
// at `row` into the real quadrature drift.
fn add_linear(a: &mut DMatrix<f64>, row: usize, col: usize, c: Cx<f64>, q: Cx<f64>) {
    a[(row, col)] += c.re + q.re;
    a[(row, col + 1)] += c.im - q.im;
    a[(row + 1, col)] += -c.im - q.im;
    a[(row + 1, col + 1)] += c.re - q.re;
}

impl LangevinModel {
    pub fn from_opa(m: &Opa<f64>) -> Self {
        let zero = Cx::new(0.0, 0.0);
        let (ab, bb) = (m.steady.a_bar, m.steady.b_bar);
        let e = m.coupling.eps_bar;
        let ec = e.conj();
        let r = &m.rates;
        let p = &m.params;
        let tc = &m.thermal;

        let mut a = DMatrix::zeros(STATE_DIM, STATE_DIM);
        add_linear(&mut a, X1A, X1A, Cx::new(-r.a.total, p.omega_a_det), ec * bb);
        add_linear(&mut a, X1A, X1B, ec * ab.conj(), zero);
        add_linear(&mut a, X1B, X1A, -(e * ab), zero);
        add_linear(&mut a, X1B, X1B, Cx::new(-r.b.total, p.omega_b_det), zero);

        let sa_abs = (2.0 * r.a.absorb).sqrt();
        let sb_abs = (2.0 * r.b.absorb).sqrt();
        a[(TEMP, TEMP)] = -tc.omega_t;
        if m.has_photothermal_coupling() {
            let d = m.coupling.d_eps_d_dk * p.xi + m.coupling.d_eps_dz * (p.alpha_a * p.z);
            let i = Cx::new(0.0, 1.0);
            // per kelvin of δT; the Π factors sit in the temperature row
            let ga = ab.conj() * bb * d.conj() + i * ab * tc.k_a;
            let gb = -(ab * ab * d) * 0.5 + i * bb * tc.k_b;
            a[(X1A, TEMP)] = 2.0 * ga.re;
            a[(X2A, TEMP)] = -2.0 * ga.im;
            a[(X1B, TEMP)] = 2.0 * gb.re;
            a[(X2B, TEMP)] = -2.0 * gb.im;
            a[(TEMP, X1A)] = tc.pi_a * sa_abs;
            a[(TEMP, X1B)] = tc.pi_b * sb_abs;
        }

        let mut b = DMatrix::zeros(STATE_DIM, NOISE_DIM);
        let rates_a = [r.a.input, r.a.output, r.a.scatter, r.a.absorb];
        let rates_b = [r.b.input, r.b.output, r.b.scatter, r.b.absorb];
        for (port, (&ga, &gb)) in rates_a.iter().zip(rates_b.iter()).enumerate() {
            let (sa, sb) = ((2.0 * ga).sqrt(), (2.0 * gb).sqrt());
            b[(X1A, 2 * port)] = sa;
            b[(X2A, 2 * port + 1)] = sa;
            b[(X1B, 8 + 2 * port)] = sb;
            b[(X2B, 8 + 2 * port + 1)] = sb;
        }
        if m.has_photothermal_coupling() {
            b[(TEMP, 6)] = -tc.pi_a;
            b[(TEMP, 14)] = -tc.pi_b;
        }

        let mut noise_var = [1.0; NOISE_DIM];
        noise_var[0] = p.v_a1_in;
        noise_var[1] = p.v_a2_in;
        noise_var[8] = p.v_b1_in;
        noise_var[9] = p.v_b2_in;

        LangevinModel {
            drift: a,
            diffusion: b,
            noise_var,
            out_coupling: (2.0 * r.a.output).sqrt(),
        }
    }

    /// Slowest decay rate among the drift eigenvalues (1/s).
    fn slowest_rate(&self) -> f64 {
        self.drift
            .complex_eigenvalues()
            .iter()
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact transition and noise covariance over `dt` of the augmented state
/// (y, ∫y, W), each interval starting from ∫y = 0, W = 0.
fn discretize(model: &LangevinModel, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut at = DMatrix::zeros(AUG_DIM, AUG_DIM);
    at.view_mut((0, 0), (STATE_DIM, STATE_DIM)).copy_from(&model.drift);
    for i in 0..STATE_DIM {
        at[(STATE_DIM + i, i)] = 1.0;
    }
    let mut bt = DMatrix::zeros(AUG_DIM, NOISE_DIM);
    bt.view_mut((0, 0), (STATE_DIM, NOISE_DIM)).copy_from(&model.diffusion);
    for k in 0..NOISE_DIM {
        bt[(2 * STATE_DIM + k, k)] = 1.0;
    }
    let sigma = DMatrix::from_diagonal(&DVector::from_column_slice(&model.noise_var));
    let qc = &bt * sigma * bt.transpose();

    let norm = at.abs().row_sum().max().max(1.0);
    let doublings = ((norm * dt / 0.5).log2().ceil()).max(0.0) as i32;
    let h = dt / 2f64.powi(doublings);

    let n = AUG_DIM;
    let mut vl = DMatrix::zeros(2 * n, 2 * n);
    vl.view_mut((0, 0), (n, n)).copy_from(&(-&at * h));
    vl.view_mut((0, n), (n, n)).copy_from(&(&qc * h));
    vl.view_mut((n, n), (n, n)).copy_from(&(at.transpose() * h));
    let ex = vl.exp();
    let mut f = ex.view((n, n), (n, n)).transpose();
    let mut q = &f * ex.view((0, n), (n, n));
    for _ in 0..doublings {
        q = &f * &q * f.transpose() + &q;
        f = &f * &f;
    }
    q = (&q + q.transpose()) * 0.5;
    (f, q)
}

/// Per-step sampler of (y_{n+1}, box-averaged output quadratures).
struct StepSampler {
    mean_map: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl StepSampler {
    fn new(model: &LangevinModel, dt: f64) -> Result<Self, OracleError> {
        let (f, q) = discretize(model, dt);
        if f.iter().chain(q.iter()).any(|x| !x.is_finite()) {
            return Err(OracleError::UnstableIntegration(format!(
                "non-finite discretization at dt = {dt:e} s"
            )));
        }
        let fyy = f.view((0, 0), (STATE_DIM, STATE_DIM)).into_owned();
        let radius = fyy
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max);
        if radius >= 1.0 {
            return Err(OracleError::UnstableIntegration(format!(
                "transition spectral radius {radius} at dt = {dt:e} s"
            )));
        }

        let mut l = DMatrix::zeros(JOINT_DIM, AUG_DIM);
        for i in 0..STATE_DIM {
            l[(i, i)] = 1.0;
        }
        let s = model.out_coupling;
        l[(STATE_DIM, STATE_DIM + X1A)] = s / dt;
        l[(STATE_DIM, 2 * STATE_DIM + 2)] = -1.0 / dt;
        l[(STATE_DIM + 1, STATE_DIM + X2A)] = s / dt;
        l[(STATE_DIM + 1, 2 * STATE_DIM + 3)] = -1.0 / dt;

        let mean_map = (&l * &f).columns(0, STATE_DIM).into_owned();
        let cov = &l * &q * l.transpose();
        let d: Vec<f64> = (0..JOINT_DIM).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
        let mut corr = cov.clone();
        for i in 0..JOINT_DIM {
            for j in 0..JOINT_DIM {
                let dd = d[i] * d[j];
                corr[(i, j)] = if dd > 0.0 { cov[(i, j)] / dd } else { 0.0 };
            }
        }
        let eig = SymmetricEigen::new(corr);
        let mut factor = eig.eigenvectors;
        for j in 0..JOINT_DIM {
            let sv = eig.eigenvalues[j].max(0.0).sqrt();
            for i in 0..JOINT_DIM {
                factor[(i, j)] *= sv * d[i];
            }
        }
        Ok(StepSampler { mean_map, factor })
    }

    fn step(&self, y: &mut [f64; STATE_DIM], rng: &mut ChaCha8Rng) -> (f64, f64) {
        let mut xi = [0.0; JOINT_DIM];
        for v in xi.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let mut out = [0.0; JOINT_DIM];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, yj) in y.iter().enumerate() {
                acc += self.mean_map[(i, j)] * yj;
            }
            for (j, x) in xi.iter().enumerate() {
                acc += self.factor[(i, j)] * x;
            }
            *o = acc;
        }
        y.copy_from_slice(&out[..STATE_DIM]);
        (out[STATE_DIM], out[STATE_DIM + 1])
    }
}

fn probe_seed(seed: u64, idx: usize) -> u64 {
    seed ^ (idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn estimate_probe(
    model: &LangevinModel,
    omega: f64,
    settings: &OracleSettings,
    seed: u64,
) -> Result<OracleEstimate, OracleError> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(OracleError::InvalidProbe(format!("Ω = {omega} rad/s")));
    }
    if !(settings.duration > 0.0) {
        return Err(OracleError::InvalidProbe(format!("duration = {} s", settings.duration)));
    }
    let dt = std::f64::consts::TAU * PROBE_BIN as f64 / (SEGMENT_LEN as f64 * omega);
    let hop = SEGMENT_LEN / 2;
    let wanted = (settings.duration / (hop as f64 * dt)).floor() as usize;
    let segments = wanted.saturating_sub(1).clamp(MIN_SEGMENTS, settings.max_segments.max(MIN_SEGMENTS));
    let n_samples = hop * (segments + 1);

    let sampler = StepSampler::new(model, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = [0.0; STATE_DIM];
    let burn = ((10.0 / (model.slowest_rate() * dt)).ceil() as usize).clamp(SEGMENT_LEN, 1 << 20);
    for _ in 0..burn {
        sampler.step(&mut y, &mut rng);
    }
    let mut x1 = Vec::with_capacity(n_samples);
    let mut x2 = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let (a, b) = sampler.step(&mut y, &mut rng);
        x1.push(a);
        x2.push(b);
    }

    // Hann-weighted twiddles at the probe bin
    let phase = std::f64::consts::TAU * PROBE_BIN as f64 / SEGMENT_LEN as f64;
    let mut wc = vec![0.0; SEGMENT_LEN];
    let mut ws = vec![0.0; SEGMENT_LEN];
    let mut w2 = 0.0;
    for n in 0..SEGMENT_LEN {
        let w = 0.5 * (1.0 - (std::f64::consts::TAU * n as f64 / SEGMENT_LEN as f64).cos());
        wc[n] = w * (phase * n as f64).cos();
        ws[n] = w * (phase * n as f64).sin();
        w2 += w * w;
    }
    let norm = dt / w2;
    let periodogram = |x: &[f64]| -> Vec<f64> {
        (0..segments)
            .map(|k| {
                let seg = &x[k * hop..k * hop + SEGMENT_LEN];
                let (mut re, mut im) = (0.0, 0.0);
                for n in 0..SEGMENT_LEN {
                    re += wc[n] * seg[n];
                    im -= ws[n] * seg[n];
                }
                norm * (re * re + im * im)
            })
            .collect()
    };
    let stats = |p: Vec<f64>| -> (f64, f64) {
        let k = p.len() as f64;
        let mean = p.iter().sum::<f64>() / k;
        let var = p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (mean, (var / k * OVERLAP_VARIANCE_FACTOR).sqrt())
    };
    let (v1, se1) = stats(periodogram(&x1));
    let (v2, se2) = stats(periodogram(&x2));
    Ok(OracleEstimate {
        omega,
        v1,
        v2,
        se1,
        se2,
        segments,
        duration: n_samples as f64 * dt,
    })
}

/// Monte-Carlo spectra of an assembled model at each probe frequency (rad/s).
/// Probes run in parallel with independent seeded streams; results follow the
/// probe order and are reproducible for a given seed.
pub fn sde_oracle_model(
    m: &Opa<f64>,
    probes: &[f64],
    settings: &OracleSettings,
) -> Result<Vec<OracleEstimate>, OracleError> {
    let model = LangevinModel::from_opa(m);
    probes
        .par_iter()
        .enumerate()
        .map(|(i, &w)| estimate_probe(&model, w, settings, probe_seed(settings.rng_seed, i)))
        .collect()
}

pub fn sde_oracle(
    p: &OpaParams<f64>,
    probes: &[f64],
    duration: f64,
    rng_seed: u64,
) -> Result<Vec<OracleEstimate>, Error> {
    let m = Opa::new(p)?;
    let settings = OracleSettings {
        duration,
        max_segments: DEFAULT_MAX_SEGMENTS,
        rng_seed,
    };
    Ok(sde_oracle_model(&m, probes, &settings)?)
}
