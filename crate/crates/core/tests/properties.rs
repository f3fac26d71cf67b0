use std::f64::consts::TAU;

use mcmv_core::cmv::{cmv_window, BandedWindow, VerblunskySequence};
use mcmv_core::magic::magic_check;
use mcmv_core::mcmv::{mcmv_window, PoleVector};
use mcmv_core::random;
use mcmv_core::scalar::{blaschke, DiskPoint};
use mcmv_core::spectral::{bands_from_discriminant, caratheodory_eval, SpectralMeasure};
use mcmv_core::transfer::{schur_algorithm, schur_reconstruct, MonodromyEvaluator};
use mcmv_core::C64;
use proptest::prelude::*;

fn disk(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, 0.0..TAU).prop_map(|(m, a)| C64::from_polar(m, a))
}

fn instance() -> impl Strategy<Value = (VerblunskySequence, PoleVector)> {
    (1usize..=3, any::<u64>()).prop_map(|(n, seed)| random::instance(&mut random::rng(seed), n, 0.7))
}

/// Orthonormality defect of the columns in `cols`, summed over all rows of the window.
fn inner_defect(w: &BandedWindow, cols: std::ops::Range<i64>) -> f64 {
    let mut worst = 0.0f64;
    for j in cols.clone() {
        for k in cols.clone() {
            let s: C64 = w.row_range().map(|i| w.at(i, j).conj() * w.at(i, k)).sum();
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blaschke_factor_is_unimodular_on_circle(w in disk(0.95), t in 0.0..TAU) {
        let b = blaschke(w, C64::from_polar(1.0, t)).unwrap();
        prop_assert!((b.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blaschke_factor_maps_disk_into_disk(w in disk(0.9), z in disk(0.99)) {
        prop_assert!(blaschke(w, z).unwrap().norm() < 1.0 + 1e-14);
    }

    #[test]
    fn schur_parameters_roundtrip(vals in prop::collection::vec(disk(0.9), 1..6), z in disk(0.9)) {
        let params: Vec<DiskPoint> = vals.iter().map(|&a| DiskPoint::new(a).unwrap()).collect();
        let f = |z: C64| schur_reconstruct(&params, C64::new(0.0, 0.0), z);
        let got = schur_algorithm(&f, params.len());
        for (a, b) in got.params.iter().zip(&params) {
            prop_assert!((a.value() - b.value()).norm() < 1e-9);
        }
        prop_assert!(f(z).norm() < 1.0);
    }

    #[test]
    fn cmv_windows_are_unitary(vals in prop::collection::vec(disk(0.95), 2..8), theta in 0.0..TAU) {
        let mut vals = vals;
        if vals.len() % 2 == 1 {
            vals.pop();
        }
        let seq = VerblunskySequence::from_values(&vals, theta).unwrap();
        let w = cmv_window(&seq, -12..12, -12..12).unwrap();
        prop_assert!(inner_defect(&w, -9..9) < 1e-12);
    }

    #[test]
    fn mcmv_windows_are_unitary((seq, z) in instance()) {
        let p = 2 * z.n() as i64;
        let w = mcmv_window(&seq, &z, -3 * p..3 * p).unwrap();
        prop_assert!(inner_defect(&w, -2 * p..2 * p) < 1e-12);
    }

    #[test]
    fn discriminant_is_real_on_circle((seq, z) in instance(), t in 0.0..TAU) {
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        let d = ev.discriminant(C64::from_polar(1.0, t)).unwrap();
        prop_assert!(d.im.abs() < 1e-9 * (1.0 + d.re.abs()), "{d}");
    }

    #[test]
    fn discriminant_is_symmetric_under_reflection((seq, z) in instance(), w in disk(0.9)) {
        prop_assume!(w.norm() > 0.05);
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        let Ok(inner) = ev.discriminant(w) else { return Ok(()) };
        let Ok(outer) = ev.discriminant(1.0 / w.conj()) else { return Ok(()) };
        prop_assert!((inner - outer.conj()).norm() < 1e-8 * (1.0 + inner.norm()));
    }

    #[test]
    fn caratheodory_function_has_positive_real_part((seq, z) in instance(), w in disk(0.95)) {
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        if let Ok(f) = caratheodory_eval(&ev, w) {
            prop_assert!(f.re > -1e-9, "{f}");
        }
    }

    #[test]
    fn bands_are_where_discriminant_is_small((seq, z) in instance(), t in 0.0..TAU) {
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        let bd = bands_from_discriminant(&ev, 512).unwrap();
        let (d, _) = ev.discriminant_on_circle(t).unwrap();
        if (d.abs() - 2.0).abs() > 1e-6 {
            prop_assert_eq!(bd.in_band(t), d.abs() < 2.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn spectral_measure_is_a_probability_measure((seq, z) in instance()) {
        let ev = MonodromyEvaluator::new(&seq, &z).unwrap();
        let sm = SpectralMeasure::from_evaluator(&ev, 512).unwrap();
        prop_assert!(sm.masses.iter().all(|m| m.1 > 0.0 && m.1 < 1.0));
        prop_assert!((sm.total_mass().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn magic_formula_holds((seq, z) in instance()) {
        let p = 2 * z.n() as i64;
        let r = magic_check(&seq, &z, -p..2 * p, 1e-9).unwrap();
        prop_assert!(r.pass, "{}", r.max_deviation);
    }
}
