use super::*;
use crate::kronig_penney::kp_make;
use crate::potential::{derived_coeffs, fourier_table, TrigPoly};
use crate::Potential;
use num_rational::Ratio;
use proptest::prelude::*;
use std::f64::consts::PI;

fn table(p: &Potential<f64>, k: usize) -> FourierTable<f64> {
    fourier_table(p, k).unwrap()
}

fn kp_half() -> Potential<f64> {
    kp_make(1.0, Ratio::new(1, 2)).unwrap().potential()
}

fn two_cos() -> Potential<f64> {
    Potential::TrigPoly(TrigPoly::cosine(1.0, 1))
}

/// Direct nested sum over n_1..n_k with absolute spectral parameter.
fn brute(t: &FourierTable<f64>, parity: Parity, n: usize, lambda: f64, order: usize, k: i64) -> (Complex<f64>, Complex<f64>) {
    let kappa = parity.kappa(n);
    let mut acc = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    fn go(
        t: &FourierTable<f64>,
        kappa: i64,
        lambda: f64,
        left: usize,
        k: i64,
        partial: i64,
        weight: Complex<f64>,
        acc: &mut (Complex<f64>, Complex<f64>),
    ) {
        if left == 0 {
            let qa = if partial.abs() <= k { t.get(-partial) } else { Complex::new(0.0, 0.0) };
            let qb = if (kappa - partial).abs() <= k { t.get(kappa - partial) } else { Complex::new(0.0, 0.0) };
            acc.0 += weight * qa;
            acc.1 += weight * qb;
            return;
        }
        for step in -k..=k {
            let p = partial + step;
            if step == 0 || p == 0 || p == kappa {
                continue;
            }
            let d = lambda - (PI * (kappa - 2 * p) as f64).powi(2);
            go(t, kappa, lambda, left - 1, k, p, weight * t.get(step) / d, acc);
        }
    }
    go(t, kappa, lambda, order, k, 0, Complex::new(1.0, 0.0), &mut acc);
    acc
}

#[test]
fn transfer_matches_nested_sum() {
    let potentials = [
        Potential::TrigPoly(TrigPoly::<f64>::random(3, 0.8, 2)),
        Potential::TrigPoly(TrigPoly::from_terms(&[(1, Complex::new(0.3, 0.4)), (2, Complex::new(-0.2, 0.1)), (-3, Complex::new(0.5, 0.0))]).unwrap()),
        kp_half(),
    ];
    for p in &potentials {
        let t = table(p, 6);
        for parity in [Parity::Periodic, Parity::Antiperiodic] {
            for n in [1, 2, 5] {
                let sp = SeriesParams::new(4);
                let x = 0.37;
                let lambda = parity.free_level::<f64>(n) + x;
                let got = series_terms(&t, parity, n, x, 3, &sp).unwrap();
                for order in 1..=3 {
                    let (a, b) = brute(&t, parity, n, lambda, order, 4);
                    let scale = 1e-10 * (1.0 + a.norm() + b.norm());
                    assert!((got.a[order - 1] - a).norm() <= scale, "{parity} n={n} order={order}");
                    assert!((got.b[order - 1] - b).norm() <= scale);
                }
            }
        }
    }
}

#[test]
fn zero_potential_gives_free_levels() {
    let t = table(&Potential::zero(), 8);
    let d = derived_coeffs(&t, 16).unwrap();
    let sp = SeriesParams::new(8);
    for parity in [Parity::Periodic, Parity::Antiperiodic] {
        let terms = series_terms(&t, parity, 3, 0.0, 3, &sp).unwrap();
        assert!(terms.a.iter().chain(&terms.b).all(|v| v.norm() == 0.0));
        assert_eq!(gap_first_order(&t, 5), 0.0);
        assert_eq!(gap_second_order(&t, &d, 4), 0.0);
        let e = eig_second_order(&t, &d, 2, 1, parity, &sp).unwrap();
        assert_eq!(e.value, parity.free_level::<f64>(2));
        assert_eq!(gap_order_m(&t, 4, 3, parity, &sp).unwrap(), 0.0);
    }
    let e = eig_first_order(&t, 2, 1, Parity::Periodic).unwrap();
    assert!((e.value - 16.0 * PI * PI).abs() < 1e-12);
    assert!((e.value - 157.9137).abs() < 1e-4);
    let r = e_recursion(&t, Parity::Periodic, 3, 2, 0, &sp).unwrap();
    assert!((r.estimate.value - 355.3058).abs() < 1e-4);
    assert_eq!(r.trace, vec![0.0]);
}

#[test]
fn first_order_examples() {
    let t = table(&kp_half(), 64);
    assert!((gap_first_order(&t, 5) - 4.0 / (5.0 * PI)).abs() < 1e-12);
    assert!(gap_first_order(&t, 4) < 1e-15);
    let up = eig_first_order(&t, 1, 2, Parity::Antiperiodic).unwrap();
    let lo = eig_first_order(&t, 1, 1, Parity::Antiperiodic).unwrap();
    assert!((up.value - (9.0 * PI * PI + 2.0 / (3.0 * PI))).abs() < 1e-12);
    assert!((up.value - 89.0386).abs() < 1e-4);
    assert!((lo.value - 88.6142).abs() < 1e-4);
    assert!(eig_first_order(&t, 1, 3, Parity::Periodic).is_err());
}

#[test]
fn a1_closed_examples() {
    let t = table(&two_cos(), 4);
    assert!((a1_closed(&t, Parity::Periodic, 1) - 1.0 / (6.0 * PI * PI)).abs() < 1e-15);
    assert!((a1_closed(&t, Parity::Periodic, 2) - 1.0 / (30.0 * PI * PI)).abs() < 1e-15);
    assert_eq!(a1_closed(&table(&Potential::zero(), 4), Parity::Periodic, 3), 0.0);
}

#[test]
fn a1_grouped_form_matches_series() {
    let corpus = [
        two_cos(),
        kp_half(),
        kp_make(2.0, Ratio::new(1, 3)).unwrap().potential(),
        Potential::TrigPoly(TrigPoly::<f64>::random(5, 1.0, 8)),
    ];
    for p in &corpus {
        let t = table(p, 40);
        for parity in [Parity::Periodic, Parity::Antiperiodic] {
            for n in 1..=12 {
                let a = a_term(&t, 1, parity, n, 0.0, &SeriesParams::for_table(&t)).unwrap();
                let c = a1_closed(&t, parity, n);
                assert!((a.re - c).abs() <= 1e-12 * (1.0 + c.abs()), "{parity} n={n}");
                assert!(a.im.abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn second_order_examples() {
    let p = kp_half();
    let t = table(&p, 512);
    let d = derived_coeffs(&t, 1024).unwrap();
    let g5 = gap_second_order(&t, &d, 5);
    assert!((g5 - 4.0 / (5.0 * PI)).abs() < 1e-3 * g5, "{g5}");
    let g20 = gap_second_order(&t, &d, 20);
    let lead = 1.0 / (PI * PI * 400.0);
    assert!((g20 - lead).abs() <= 0.1 * lead, "{g20}");

    let sp = SeriesParams::for_table(&t);
    let up = eig_second_order(&t, &d, 10, 2, Parity::Periodic, &sp).unwrap();
    let lo = eig_second_order(&t, &d, 10, 1, Parity::Periodic, &sp).unwrap();
    let g = gap_second_order(&t, &d, 20);
    assert!(((up.offset - lo.offset) - g).abs() <= 1e-15 * g.max(1e-300) * 4.0);
    assert!(((up.value - lo.value) - g).abs() <= 1e-15 * up.value);

    let c = table(&two_cos(), 4);
    let dc = derived_coeffs(&c, 8).unwrap();
    let sp = SeriesParams::new(4);
    let up = eig_second_order(&c, &dc, 1, 2, Parity::Periodic, &sp).unwrap();
    let lo = eig_second_order(&c, &dc, 1, 1, Parity::Periodic, &sp).unwrap();
    let mid = 4.0 * PI * PI + up.a_part.re;
    assert!(lo.value <= mid && mid <= up.value);
    assert_eq!(up.a_part, lo.a_part);
}

#[test]
fn recursion_first_step_is_first_order_with_a1() {
    let t = table(&Potential::TrigPoly(TrigPoly::<f64>::random(4, 0.5, 3)), 4);
    let sp = SeriesParams::new(4);
    for j in 1..=2 {
        let r = e_recursion(&t, Parity::Periodic, 3, j, 1, &sp).unwrap();
        let a1 = a_term(&t, 1, Parity::Periodic, 3, 0.0, &sp).unwrap();
        let b1 = b_term(&t, 1, Parity::Periodic, 3, 0.0, &sp).unwrap();
        let s = if j == 1 { -1.0 } else { 1.0 };
        let want = a1.re + s * (t.get(6) + b1).norm();
        assert!((r.estimate.offset - want).abs() < 1e-15);
        assert_eq!(r.trace.len(), 2);
    }
}

#[test]
fn gap_order_m_requires_m_two() {
    let t = table(&kp_half(), 32);
    let sp = SeriesParams::for_table(&t);
    assert!(matches!(gap_order_m(&t, 4, 1, Parity::Periodic, &sp), Err(Error::InvalidArgument(_))));
    assert!(gap_order_m(&t, 4, 2, Parity::Periodic, &sp).unwrap() >= 0.0);
}

#[test]
fn denominator_guard_names_partial_sum() {
    let t = table(&two_cos(), 2);
    let sp = SeriesParams::new(2);
    // x = −4π²·1·(2−1) makes D(1) vanish for n = 1 periodic.
    let x = -4.0 * PI * PI;
    match series_terms(&t, Parity::Periodic, 1, x, 1, &sp) {
        Err(Error::DenominatorGuard { partial_sum, .. }) => assert!(partial_sum == 1),
        other => panic!("{other:?}"),
    }
    assert!(SeriesParams { cutoff: 0, guard: 1e-8 }.validate().is_err());
    assert!(SeriesParams { cutoff: 3, guard: 0.0 }.validate().is_err());
}

#[test]
fn cutoff_beyond_degree_is_bit_identical() {
    let p = Potential::TrigPoly(TrigPoly::<f64>::random(5, 1.0, 17));
    let t = table(&p, 5);
    let base = series_terms(&t, Parity::Antiperiodic, 7, 0.2, 3, &SeriesParams::new(5)).unwrap();
    for k in [6, 20, 100] {
        let more = series_terms(&t, Parity::Antiperiodic, 7, 0.2, 3, &SeriesParams::new(k)).unwrap();
        assert_eq!(base.a, more.a);
        assert_eq!(base.b, more.b);
        assert_eq!(more.tail, 0.0);
    }
}

#[test]
fn tail_is_reported_for_infinite_support() {
    let t = table(&kp_half(), 64);
    let s = series_terms(&t, Parity::Periodic, 3, 0.0, 1, &SeriesParams::for_table(&t)).unwrap();
    assert!(s.tail > 0.0 && s.tail < 1e-5);
}

#[test]
fn condition_examples() {
    let c = table(&two_cos(), 8);
    let dc = derived_coeffs(&c, 16).unwrap();
    let sp = SeriesParams::new(8);
    assert!(!condition_check(&c, &dc, Parity::Periodic, 2, 0.1, ConditionKind::FirstOrder, 1, &sp).unwrap());

    let t = table(&kp_half(), 256);
    let d = derived_coeffs(&t, 512).unwrap();
    let sp = SeriesParams::for_table(&t);
    assert!(condition_check(&t, &d, Parity::Antiperiodic, 10, 0.1, ConditionKind::FirstOrder, 1, &sp).unwrap());
    assert!(!condition_check(&t, &d, Parity::Periodic, 10, 0.1, ConditionKind::SecondOrder, 2, &sp).unwrap());
    assert!(condition_check(&t, &d, Parity::Antiperiodic, 10, 0.1, ConditionKind::Recursion, 2, &sp).unwrap());
    assert!(condition_check(&t, &d, Parity::Periodic, 0, 0.1, ConditionKind::FirstOrder, 1, &sp).is_err());
    assert_eq!("52".parse::<ConditionKind>().unwrap(), ConditionKind::Recursion);
    assert!("44".parse::<ConditionKind>().is_err());
}

#[test]
fn eigenfunction_model_examples() {
    let t = table(&kp_half(), 64);
    for n in [1, 4, 9] {
        let v = eigenfunction_model(&t, n, 2, Parity::Antiperiodic, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
    let c = table(&Potential::TrigPoly(TrigPoly::cosine(1.0, 2)), 4);
    assert!(eigenfunction_model(&c, 1, 1, Parity::Periodic, 0.0).unwrap().abs() < 1e-15);
    assert!(matches!(
        eigenfunction_model(&table(&Potential::zero(), 4), 1, 1, Parity::Periodic, 0.0),
        Err(Error::PhaseUndefined { index: 2 })
    ));
    // L² orthogonality and normalisation by the midpoint rule, exact for these trig polynomials
    let r = table(&Potential::TrigPoly(TrigPoly::<f64>::random(6, 1.0, 4)), 6);
    let m = 512;
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let x = (i as f64 + 0.5) / m as f64;
        let a = eigenfunction_model(&r, 2, 1, Parity::Periodic, x).unwrap();
        let b = eigenfunction_model(&r, 2, 2, Parity::Periodic, x).unwrap();
        s11 += a * a / m as f64;
        s12 += a * b / m as f64;
        s22 += b * b / m as f64;
    }
    assert!(s12.abs() < 1e-12 && (s11 - 1.0).abs() < 1e-12 && (s22 - 1.0).abs() < 1e-12);
}

#[test]
fn a1_decays_faster_than_one_over_n() {
    let corpus = [kp_half(), kp_make(2.0, Ratio::new(1, 3)).unwrap().potential(), Potential::TrigPoly(TrigPoly::<f64>::random(3, 0.5, 11))];
    for p in &corpus {
        let t = table(p, 256);
        let vals: Vec<f64> = (8..=64).step_by(8).map(|n| n as f64 * a1_closed(&t, Parity::Periodic, n).abs()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{vals:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn series_terms_are_real_for_real_potentials(seed in 0_u64..1000, degree in 1_usize..6, n in 1_usize..12, anti in any::<bool>()) {
        let t = table(&Potential::TrigPoly(TrigPoly::random(degree, 1.0, seed)), degree);
        let parity = if anti { Parity::Antiperiodic } else { Parity::Periodic };
        let s = series_terms(&t, parity, n, 0.0, 3, &SeriesParams::new(degree)).unwrap();
        for v in &s.a {
            prop_assert!(v.im.abs() <= 1e-10 * (v.norm() + 1e-300));
        }
    }

    #[test]
    fn estimates_are_ordered_in_j(seed in 0_u64..1000, n in 1_usize..10, m in 0_usize..4) {
        let t = table(&Potential::TrigPoly(TrigPoly::random(4, 1.0, seed)), 4);
        let sp = SeriesParams::new(4);
        let lo = e_recursion(&t, Parity::Periodic, n, 1, m, &sp).unwrap().estimate.offset;
        let hi = e_recursion(&t, Parity::Periodic, n, 2, m, &sp).unwrap().estimate.offset;
        if m <= 1 {
            prop_assert!(hi >= lo);
        } else {
            prop_assert!(gap_order_m(&t, n, m, Parity::Periodic, &sp).unwrap() >= -1e-9);
        }
    }
}
