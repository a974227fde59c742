//! Linearized fluctuation dynamics: 4×4 coupling matrices in the
//! (δa, δa†, δb, δb†) basis and the extra-cavity quadrature transfer
//! matrices Θ.

use nalgebra::{ComplexField, Matrix4, Vector4};
use thiserror::Error;

use crate::config::CavityRates;
use crate::crystal::ThermalCoeffs;
use crate::scalar::{cx, im, re, Cx, Real};
use crate::steady_state::SteadyState;

pub type M4<T> = Matrix4<Cx<T>>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("system matrix is singular at Ω = {omega} rad/s")]
    SingularSystem { omega: f64 },
}

/// Frequency-independent coupling matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices<T: Real> {
    pub m_c: M4<T>,
    pub m_in: M4<T>,
    pub m_out: M4<T>,
    pub m_sc: M4<T>,
    pub m_abs: M4<T>,
}

fn diag_rates<T: Real>(ga: T, gb: T) -> M4<T> {
    let two = T::lit(2.0);
    let sa = re((two * ga).sqrt());
    let sb = re((two * gb).sqrt());
    M4::from_diagonal(&Vector4::new(sa, sa, sb, sb))
}

/// Mean detunings (ω_a^det, ω_b^det) in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detunings<T> {
    pub a: T,
    pub b: T,
}

pub fn build_system_matrices<T: Real>(
    ss: &SteadyState<T>,
    eps_bar: Cx<T>,
    rates: &CavityRates<T>,
    det: Detunings<T>,
) -> SystemMatrices<T> {
    let z = Cx::new(T::zero(), T::zero());
    let (a, b) = (ss.a_bar, ss.b_bar);
    let e = eps_bar;
    let ec = eps_bar.conj();
    let (ga, gb) = (rates.a.total, rates.b.total);
    #[rustfmt::skip]
    let m_c = M4::new(
        cx(-ga, det.a),  ec * b,           ec * a.conj(),  z,
        e * b.conj(),    cx(-ga, -det.a),  z,              e * a,
        -(e * a),        z,                cx(-gb, det.b), z,
        z,               -(ec * a.conj()), z,              cx(-gb, -det.b),
    );
    SystemMatrices {
        m_c,
        m_in: diag_rates(rates.a.input, rates.b.input),
        m_out: diag_rates(rates.a.output, rates.b.output),
        m_sc: diag_rates(rates.a.scatter, rates.b.scatter),
        m_abs: diag_rates(rates.a.absorb, rates.b.absorb),
    }
}

/// Photothermal coupling matrices at one sideband frequency. Each carries
/// the one-pole prefactor 1/(iΩ + Ω_T).
#[derive(Debug, Clone, PartialEq)]
pub struct PhotothermalMatrices<T: Real> {
    pub m_eps_c: M4<T>,
    pub m_eps_abs: M4<T>,
    pub m_omega_c: M4<T>,
    pub m_omega_abs: M4<T>,
}

impl<T: Real> PhotothermalMatrices<T> {
    pub fn zero() -> Self {
        PhotothermalMatrices {
            m_eps_c: M4::zeros(),
            m_eps_abs: M4::zeros(),
            m_omega_c: M4::zeros(),
            m_omega_abs: M4::zeros(),
        }
    }
}

pub fn build_photothermal_matrices<T: Real>(
    omega: T,
    ss: &SteadyState<T>,
    tc: &ThermalCoeffs<T>,
    rates: &CavityRates<T>,
) -> PhotothermalMatrices<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let pole = tc.pole(omega);
    let (a, b) = (ss.a_bar, ss.b_bar);
    let sa = (two * rates.a.absorb).sqrt();
    let sb = (two * rates.b.absorb).sqrt();

    // δε enters through ε̄* b̄ ā*, its adjoint, and −½ ε ā² in the pump rows
    let eps_rows = [a.conj() * b, a * b.conj(), -(a * a) * half, -(a.conj() * a.conj()) * half];
    let eps_conj_row = [true, false, false, true];
    let c_cols = [tc.c_a, tc.c_a, tc.c_b, tc.c_b];
    // δω enters as ±i x̄ K δT
    let omega_rows = [im(tc.k_a) * a, -(im(tc.k_a) * a.conj()), im(tc.k_b) * b, -(im(tc.k_b) * b.conj())];
    let pi_cols = [tc.pi_a, tc.pi_a, tc.pi_b, tc.pi_b];
    let s_cols = [sa, sa, sb, sb];

    let mut m = PhotothermalMatrices::zero();
    for i in 0..4 {
        for j in 0..4 {
            let c = if eps_conj_row[i] { c_cols[j].conj() } else { c_cols[j] };
            let eps_abs = eps_rows[i] * c * pole;
            let omega_abs = omega_rows[i] * pi_cols[j] * pole;
            m.m_eps_c[(i, j)] = eps_abs * s_cols[j];
            m.m_omega_c[(i, j)] = omega_abs * s_cols[j];
            // the absorption-vacuum port enters as −A_vac in place of √(2γ) x
            m.m_eps_abs[(i, j)] = -eps_abs;
            m.m_omega_abs[(i, j)] = -omega_abs;
        }
    }
    m
}

/// Λ, mapping (δx, δx†) pairs to (X¹, X²) quadratures.
pub fn quadrature_transform<T: Real>() -> M4<T> {
    let (o, z, i) = (re(T::one()), re(T::zero()), im(T::one()));
    #[rustfmt::skip]
    let l = M4::new(
        o, o,  z, z,
        i, -i, z, z,
        z, z,  o, o,
        z, z,  i, -i,
    );
    l
}

/// Λ⁻¹ in closed form.
pub fn quadrature_transform_inv<T: Real>() -> M4<T> {
    let h = T::lit(0.5);
    let (o, z, i) = (re(h), re(T::zero()), im(h));
    #[rustfmt::skip]
    let l = M4::new(
        o, -i, z, z,
        o, i,  z, z,
        z, z,  o, -i,
        z, z,  o, i,
    );
    l
}

/// Quadrature-basis transfer matrices from each input port to the output.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSet<T: Real> {
    pub input: M4<T>,
    pub output: M4<T>,
    pub scatter: M4<T>,
    pub absorb: M4<T>,
}

impl<T: Real> ThetaSet<T> {
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut d = T::zero();
        for (x, y) in [
            (&self.input, &other.input),
            (&self.output, &other.output),
            (&self.scatter, &other.scatter),
            (&self.absorb, &other.absorb),
        ] {
            for (u, v) in x.iter().zip(y.iter()) {
                d = d.max((*u - *v).modulus());
            }
        }
        d
    }
}

fn norm1<T: Real>(m: &M4<T>) -> T {
    let mut best = T::zero();
    for j in 0..4 {
        let mut s = T::zero();
        for i in 0..4 {
            s += m[(i, j)].modulus();
        }
        best = best.max(s);
    }
    best
}

/// (iΩ I − A)⁻¹ with a conditioning guard.
fn resolvent<T: Real>(omega: T, a: &M4<T>) -> Result<M4<T>, DynamicsError> {
    let sys = M4::from_diagonal_element(im(omega)) - a;
    let fail = || DynamicsError::SingularSystem { omega: omega.as_f64() };
    let inv = sys.lu().try_inverse().ok_or_else(fail)?;
    let cond = norm1(&sys) * norm1(&inv);
    if !cond.is_finite() || cond * T::default_epsilon() > T::lit(1e-2) {
        return Err(fail());
    }
    Ok(inv)
}

/// Full transfer matrices with photothermal coupling.
pub fn transfer_matrices<T: Real>(
    omega: T,
    sm: &SystemMatrices<T>,
    pm: &PhotothermalMatrices<T>,
) -> Result<ThetaSet<T>, DynamicsError> {
    let g = resolvent(omega, &(sm.m_c + pm.m_eps_c + pm.m_omega_c))?;
    let l = quadrature_transform::<T>();
    let li = quadrature_transform_inv::<T>();
    let og = sm.m_out * g;
    let wrap = |m: M4<T>| l * m * li;
    Ok(ThetaSet {
        input: wrap(og * sm.m_in),
        output: wrap(og * sm.m_out - M4::identity()),
        scatter: wrap(og * sm.m_sc),
        absorb: wrap(og * (sm.m_abs + pm.m_eps_abs + pm.m_omega_abs)),
    })
}

/// Transfer matrices of the model without photothermal effects. As in the
/// reduced solution, the absorption-vacuum channel is dropped (Θ_abs = 0).
pub fn transfer_matrices_reduced<T: Real>(
    omega: T,
    sm: &SystemMatrices<T>,
) -> Result<ThetaSet<T>, DynamicsError> {
    let g = resolvent(omega, &sm.m_c)?;
    let l = quadrature_transform::<T>();
    let li = quadrature_transform_inv::<T>();
    let og = sm.m_out * g;
    let wrap = |m: M4<T>| l * m * li;
    Ok(ThetaSet {
        input: wrap(og * sm.m_in),
        output: wrap(og * sm.m_out - M4::identity()),
        scatter: wrap(og * sm.m_sc),
        absorb: M4::zeros(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{derive_rates, OpaParams};
    use crate::crystal::{photothermal_coeffs, CouplingState};
    use crate::steady_state::operating_point;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    struct Fixture {
        ss: SteadyState<f64>,
        rates: CavityRates<f64>,
        cs: CouplingState<f64>,
        tc: ThermalCoeffs<f64>,
    }

    fn fixture(p: &OpaParams<f64>) -> Fixture {
        let rates = derive_rates(p);
        let cs = CouplingState::from_params(p).unwrap();
        let ss = operating_point(p).unwrap();
        let tc = photothermal_coeffs(p, &rates, &ss, &cs);
        Fixture { ss, rates, cs, tc }
    }

    fn passive(f: &Fixture) -> SystemMatrices<f64> {
        let ss = SteadyState { a_bar: Cx::new(0.0, 0.0), ..f.ss };
        build_system_matrices(&ss, Cx::new(0.0, 0.0), &f.rates, Detunings::default())
    }

    #[test]
    fn decoupled_modes_are_diagonal() {
        let f = fixture(&OpaParams::table1());
        let sm = passive(&f);
        let ga = f.rates.a.total;
        let gb = f.rates.b.total;
        let expect = M4::from_diagonal(&Vector4::new(re(-ga), re(-ga), re(-gb), re(-gb)));
        assert_eq!(sm.m_c, expect);
    }

    #[test]
    fn block_structure_and_pump_coupling() {
        let f = fixture(&OpaParams::table1());
        let sm = build_system_matrices(&f.ss, f.cs.eps_bar, &f.rates, Detunings::default());
        for (i, j) in [(0, 3), (1, 2), (2, 1), (2, 3), (3, 0), (3, 2)] {
            assert_eq!(sm.m_c[(i, j)], re(0.0));
        }
        assert_relative_eq!(
            sm.m_c[(0, 1)].norm(),
            0.5f64.sqrt() * f.rates.a.total,
            max_relative = 1e-12
        );
        for m in [sm.m_in, sm.m_out, sm.m_sc, sm.m_abs] {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert_eq!(m[(i, j)], re(0.0));
                    } else {
                        assert_eq!(m[(i, j)].im, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn lossless_mirrors_give_zero_port_matrices() {
        let mut p = OpaParams::<f64>::table1().without_absorption();
        p.r_a_in = 1.0;
        p.r_a_out = 1.0;
        p.r_b_out = 1.0;
        p.sigma_a_sc = 0.0;
        p.sigma_b_sc = 0.0;
        let rates = derive_rates(&p);
        let ss = SteadyState {
            a_in: re(0.0),
            b_in: re(0.0),
            a_bar: re(0.0),
            b_bar: re(0.0),
            p_th: 1.0,
            p_pump: 0.0,
            gain: 1.0,
        };
        let sm = build_system_matrices(&ss, re(0.0), &rates, Detunings::default());
        assert_eq!(sm.m_out, M4::zeros());
        assert_eq!(sm.m_sc, M4::zeros());
        assert_eq!(sm.m_abs, M4::zeros());
        assert_eq!(sm.m_in[(0, 0)], re(0.0));
    }

    #[test]
    fn photothermal_matrices_vanish_without_absorption() {
        let f = fixture(&OpaParams::<f64>::table1().without_absorption());
        let pm = build_photothermal_matrices(1e3, &f.ss, &f.tc, &f.rates);
        assert_eq!(pm, PhotothermalMatrices::zero());
    }

    #[test]
    fn photothermal_abs_column_relation_and_pole() {
        let f = fixture(&OpaParams::table1());
        let wt = f.tc.omega_t;
        let p0 = build_photothermal_matrices(0.0, &f.ss, &f.tc, &f.rates);
        let p1 = build_photothermal_matrices(wt, &f.ss, &f.tc, &f.rates);
        let pinf = build_photothermal_matrices(1e12, &f.ss, &f.tc, &f.rates);
        let s = [
            (2.0 * f.rates.a.absorb).sqrt(),
            (2.0 * f.rates.a.absorb).sqrt(),
            (2.0 * f.rates.b.absorb).sqrt(),
            (2.0 * f.rates.b.absorb).sqrt(),
        ];
        for i in 0..4 {
            for j in 0..4 {
                for (c, a) in [(p0.m_eps_c, p0.m_eps_abs), (p0.m_omega_c, p0.m_omega_abs)] {
                    let d = c[(i, j)] / -s[j] - a[(i, j)];
                    assert!(d.norm() <= 1e-14 * a[(i, j)].norm());
                }
                let r = p0.m_omega_c[(i, j)].norm() / p1.m_omega_c[(i, j)].norm();
                assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-12);
                let big = pinf.m_omega_c[(i, j)].norm() * 1e12 / p0.m_omega_c[(i, j)].norm();
                assert_relative_eq!(big, wt, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn lambda_inverse_is_exact() {
        let l = quadrature_transform::<f64>();
        let li = quadrature_transform_inv::<f64>();
        assert_eq!(l * li, M4::identity());
        assert_eq!(li * l, M4::identity());
    }

    #[test]
    fn passive_cavity_at_dc() {
        let f = fixture(&OpaParams::<f64>::table1());
        let sm = passive(&f);
        let t = transfer_matrices(0.0, &sm, &PhotothermalMatrices::zero()).unwrap();
        let r = &f.rates.a;
        assert_relative_eq!(
            t.input[(0, 0)].re,
            2.0 * (r.input * r.output).sqrt() / r.total,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            t.output[(0, 0)].re,
            (2.0 * r.output - r.total) / r.total,
            max_relative = 1e-12
        );
    }

    #[test]
    fn far_off_resonance_reflects() {
        let f = fixture(&OpaParams::<f64>::table1());
        let sm = build_system_matrices(&f.ss, f.cs.eps_bar, &f.rates, Detunings::default());
        let pm = build_photothermal_matrices(1e15, &f.ss, &f.tc, &f.rates);
        let t = transfer_matrices(1e15, &sm, &pm).unwrap();
        let t2 = transfer_matrices(2e15, &sm, &build_photothermal_matrices(2e15, &f.ss, &f.tc, &f.rates)).unwrap();
        let id = M4::<f64>::identity();
        for (i, j) in (0..4).flat_map(|i| (0..4).map(move |j| (i, j))) {
            assert!((t.output[(i, j)] + id[(i, j)]).norm() < 1e-5);
            let a = t.input[(i, j)].norm();
            if a > 1e-12 {
                assert_relative_eq!(a / t2.input[(i, j)].norm(), 2.0, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn reduced_equals_full_without_absorption() {
        let f = fixture(&OpaParams::<f64>::table1().without_absorption());
        let sm = build_system_matrices(&f.ss, f.cs.eps_bar, &f.rates, Detunings::default());
        for w in [0.0, 10.0, 1e4, 1e7, 1e9] {
            let pm = build_photothermal_matrices(w, &f.ss, &f.tc, &f.rates);
            let full = transfer_matrices(w, &sm, &pm).unwrap();
            let red = transfer_matrices_reduced(w, &sm).unwrap();
            assert_eq!(full, red);
        }
    }

    #[test]
    fn above_threshold_is_singular() {
        let f = fixture(&OpaParams::table1());
        let ga = f.rates.a.total;
        let e = f.cs.eps_bar.norm();
        let ss = SteadyState { b_bar: re(ga / e), a_bar: re(0.0), ..f.ss };
        let sm = build_system_matrices(&ss, re(e), &f.rates, Detunings::default());
        assert!(matches!(
            transfer_matrices_reduced(0.0, &sm),
            Err(DynamicsError::SingularSystem { .. })
        ));
    }

    #[test]
    fn reduced_entries_are_rational_in_frequency() {
        // each Θ entry times det(iΩ − M_c) is a polynomial of degree ≤ 4 in iΩ;
        // a degree-4 fit through 16 samples must leave no residual
        let f = fixture(&OpaParams::table1());
        let sm = build_system_matrices(&f.ss, f.cs.eps_bar, &f.rates, Detunings::default());
        let scale = f.rates.b.total;
        let ws: Vec<f64> = (0..16).map(|k| scale * (k as f64 + 1.0) / 16.0).collect();
        let det = |w: f64| (M4::from_diagonal_element(im(w)) - sm.m_c).determinant();
        for (i, j) in [(0, 0), (0, 2), (1, 1), (1, 2)] {
            let ys: Vec<Cx<f64>> = ws
                .iter()
                .map(|&w| transfer_matrices_reduced(w, &sm).unwrap().input[(i, j)] * det(w))
                .collect();
            let n = ys.len();
            let mut a = nalgebra::DMatrix::<Cx<f64>>::zeros(n, 5);
            for (r, &w) in ws.iter().enumerate() {
                let s = im(w / scale);
                let mut pw = re(1.0);
                for c in 0..5 {
                    a[(r, c)] = pw;
                    pw *= s;
                }
            }
            let y = nalgebra::DVector::from_vec(ys.clone());
            let ymax = ys.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let svd = a.clone().svd(true, true);
            let coef = svd.solve(&y, 1e-14).unwrap();
            let resid = (&a * coef - &y).norm() / (ymax * (n as f64).sqrt());
            assert!(resid < 1e-9, "({i},{j}) residual {resid}");
        }
    }

    proptest! {
        #[test]
        fn passive_unitarity(w in 0.0f64..1e10, ra in 0.5f64..1.0, sig in 0.0f64..5.0) {
            let mut p = OpaParams::<f64>::table1();
            p.r_a_out = ra;
            p.sigma_a_abs = sig;
            p.sigma_b_sc = sig;
            let f = fixture(&p);
            let sm = passive(&f);
            let t = transfer_matrices(w, &sm, &PhotothermalMatrices::zero()).unwrap();
            for i in 0..4 {
                let mut s = 0.0;
                for j in 0..4 {
                    s += t.input[(i, j)].norm_sqr() + t.output[(i, j)].norm_sqr()
                        + t.scatter[(i, j)].norm_sqr() + t.absorb[(i, j)].norm_sqr();
                }
                prop_assert!((s - 1.0).abs() < 1e-9, "row {} sum {}", i, s);
            }
        }

        #[test]
        fn photothermal_off_commutators_preserved(w in 0.0f64..1e10) {
            // with [X1, X2†] = −2i per field, Σ_ports Θ J Θ† = J on the output block
            let f = fixture(&OpaParams::<f64>::table1().without_absorption());
            let sm = build_system_matrices(&f.ss, f.cs.eps_bar, &f.rates, Detunings::default());
            let t = transfer_matrices_reduced(w, &sm).unwrap();
            let mut c12 = Cx::new(0.0, 0.0);
            let mut c11 = Cx::new(0.0, 0.0);
            for m in [&t.input, &t.output, &t.scatter] {
                for k in [0usize, 2] {
                    c12 += m[(0, k)] * m[(1, k + 1)].conj() - m[(0, k + 1)] * m[(1, k)].conj();
                    c11 += m[(0, k)] * m[(0, k + 1)].conj() - m[(0, k + 1)] * m[(0, k)].conj();
                }
            }
            prop_assert!((c12 - Cx::new(1.0, 0.0)).norm() < 1e-9, "{}", c12);
            prop_assert!(c11.norm() < 1e-9, "{}", c11);
        }
    }
}
