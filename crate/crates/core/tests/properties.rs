use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use opa_photothermal::config::PumpSetting;
use opa_photothermal::spectra::{cutoff_estimate, FrequencyGrid, Quadrature};
use opa_photothermal::{derive_rates, load_params, Model, Params};

fn arb_params() -> impl Strategy<Value = Params> {
    (
        0.9f64..1.0,
        0.9f64..1.0,
        0.0f64..0.2,
        0.0f64..8.0,
        0.0f64..1.0,
        0.05f64..0.9,
        1e-5f64..2e-2,
        prop::bool::ANY,
    )
        .prop_map(|(ra_in, ra_out, sa_abs, sb_abs, sb_sc, frac, seed, amp)| {
            let mut p = Params::table1()
                .with_pump_fraction(frac)
                .with_seed_power(seed)
                .with_pump_phase(if amp { PI } else { 0.0 });
            p.r_a_in = ra_in;
            p.r_a_out = ra_out;
            p.sigma_a_abs = sa_abs;
            p.sigma_b_abs = sb_abs;
            p.sigma_b_sc = sb_sc;
            p
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_sum_identity(p in arb_params()) {
        let r = derive_rates(&p);
        for c in [r.a, r.b] {
            let s = c.input + c.output + c.scatter + c.absorb;
            prop_assert!((s - c.total).abs() <= 4.0 * f64::EPSILON * c.total);
        }
    }

    #[test]
    fn config_text_round_trip(p in arb_params(), watts in prop::option::of(0.01f64..0.5)) {
        let mut p = p;
        if let Some(w) = watts {
            p.pump = PumpSetting::Watts(w);
        }
        let q = load_params(&p.to_config_text()).unwrap();
        prop_assert_eq!(q, p);
    }

    #[test]
    fn lossless_channel_zeroes_only_itself(p in arb_params(), which in 0usize..4) {
        let mut q = p.clone();
        match which {
            0 => q.r_a_out = 1.0,
            1 => q.sigma_a_abs = 0.0,
            2 => q.sigma_b_sc = 0.0,
            _ => q.r_b_in = 1.0,
        }
        let (r, s) = (derive_rates(&p), derive_rates(&q));
        let before = [r.a.input, r.a.output, r.a.scatter, r.a.absorb, r.b.input, r.b.output, r.b.scatter, r.b.absorb];
        let after = [s.a.input, s.a.output, s.a.scatter, s.a.absorb, s.b.input, s.b.output, s.b.scatter, s.b.absorb];
        let target = [1, 3, 6, 4][which];
        for k in 0..8 {
            if k == target {
                prop_assert_eq!(after[k], 0.0);
            } else {
                prop_assert_eq!(after[k], before[k]);
            }
        }
    }

    #[test]
    fn uncertainty_product_without_photothermal_coupling(p in arb_params(), lw in 0.0f64..9.0) {
        let m = Model::new(&p).unwrap().without_photothermal_coupling();
        let s = m.point(10f64.powf(lw)).unwrap();
        prop_assert!(s.v1 > 0.0 && s.v2 > 0.0);
        prop_assert!(s.v1 * s.v2 >= 1.0 - 1e-9, "V1 V2 = {}", s.v1 * s.v2);
    }

    #[test]
    fn photothermal_noise_only_adds(p in arb_params(), lw in 0.0f64..9.0) {
        let m = Model::new(&p).unwrap();
        let w = 10f64.powf(lw);
        let on = m.point(w).unwrap();
        let off = m.without_photothermal_coupling().point(w).unwrap();
        prop_assert!(on.v1 > 0.0 && on.v2 > 0.0);
        // the extra terms are driven by independent thermal fluctuations
        prop_assert!(on.v2 >= off.v2 * (1.0 - 1e-6) || on.v1 >= off.v1 * (1.0 - 1e-6));
    }

    #[test]
    fn zero_absorption_matches_reduced_model(p in arb_params(), lw in 0.0f64..9.0) {
        let m = Model::new(&p.without_absorption()).unwrap();
        let w = 10f64.powf(lw);
        prop_assert_eq!(m.point(w).unwrap(), m.reduced_point(w).unwrap());
    }
}

#[test]
fn spectrum_is_ordered_and_deterministic() {
    let g = FrequencyGrid::new(1.0, 1e8, 50).unwrap();
    let a = opa_photothermal::spectrum(&Params::table1(), &g).unwrap();
    let b = opa_photothermal::spectrum(&Params::table1(), &g).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), g.len());
    assert!(a.windows(2).all(|w| w[1].omega > w[0].omega));
    assert!((a[0].freq_hz() - 1.0).abs() < 1e-12);
}

#[test]
fn cutoff_grows_with_absorption() {
    let grid = FrequencyGrid::default().omegas();
    let cut = |s: f64| {
        let mut p = Params::table1();
        p.sigma_b_abs *= s;
        p.sigma_a_abs *= s;
        let m = Model::new(&p).unwrap();
        cutoff_estimate(&m.spectrum(&grid).unwrap(), Quadrature::Phase).unwrap()
    };
    assert!(cut(0.25) < cut(1.0));
}

#[test]
fn above_threshold_is_an_error() {
    let err = Model::new(&Params::table1().with_pump_fraction(1.01)).unwrap_err();
    assert_eq!(err.category(), "above_threshold");
    let p = Params::table1();
    let w = TAU * 1e3;
    assert!(Model::new(&p).unwrap().point(w).is_ok());
}
