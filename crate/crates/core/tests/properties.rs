use gkdv_core::dispersion::{classify, h_n, h_n_telescoped, ComparabilityConstants, FrequencyTuple};
use gkdv_core::experiments::{parse_smoothing_csv, write_smoothing_csv, RunMeta, SmoothingReport, SmoothingRow};
use gkdv_core::nonlinearity::hl_apply;
use gkdv_core::normal_form::sigma_minus_mu;
use gkdv_core::SpectralField;
use num_complex::Complex64;
use proptest::prelude::*;

fn field(max_n: usize) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_n)
        .prop_map(|v| SpectralField::from_positive(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn nonzero(k: i64) -> impl Strategy<Value = i64> {
    (1..=k, any::<bool>()).prop_map(|(x, neg)| if neg { -x } else { x })
}

fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
    (a - b).sobolev_norm(0.0) <= tol * (1.0 + a.sobolev_norm(0.0) + b.sobolev_norm(0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn telescoped_dispersion_matches(t in prop::collection::vec(-10_000i64..=10_000, 2..=8)) {
        let k: i128 = t.iter().map(|&x| x as i128).sum();
        let direct = k.pow(3) - t.iter().map(|&x| (x as i128).pow(3)).sum::<i128>();
        prop_assert_eq!(h_n(&t).unwrap(), direct);
        prop_assert_eq!(h_n_telescoped(&t).unwrap(), direct);
    }

    #[test]
    fn classification_ignores_order(t in prop::collection::vec(nonzero(40), 2..=5), rot in 0usize..5) {
        prop_assume!(t.iter().sum::<i64>() != 0);
        let c = ComparabilityConstants::default();
        let mut s = t.clone();
        s.rotate_left(rot % t.len());
        s.reverse();
        let a = classify(&FrequencyTuple::new(t).unwrap(), &c).unwrap();
        let b = classify(&FrequencyTuple::new(s).unwrap(), &c).unwrap();
        prop_assert_eq!(a.holds, b.holds);
        prop_assert_eq!(a.witness.h, b.witness.h);
    }

    #[test]
    fn translation_is_isometric(u in field(24), h in -10.0f64..10.0, s in -1.0f64..3.0) {
        let v = u.translate(h);
        let (a, b) = (u.sobolev_norm(s), v.sobolev_norm(s));
        prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
        prop_assert!(close(&v.translate(-h), &u, 1e-13));
    }

    #[test]
    fn airy_group_law(u in field(24), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        prop_assert!(close(&u.free_flow(a).free_flow(b), &u.free_flow(a + b), 1e-10));
    }

    #[test]
    fn square_matches_convolution(u in field(10)) {
        let sq = u.power(2).unwrap();
        let n = u.cutoff() as i64;
        for k in 0..=2 * n {
            let mut acc = Complex64::default();
            for j in -n..=n {
                if j != 0 && k - j != 0 {
                    acc += u.coeff(j) * u.coeff(k - j);
                }
            }
            let got = sq.coeff(k);
            prop_assert!((got - acc).norm() <= 1e-12 * (1.0 + acc.norm()), "k={} {} {}", k, got, acc);
            prop_assert!((sq.coeff(-k) - got.conj()).norm() <= 1e-15 * (1.0 + got.norm()));
        }
    }

    #[test]
    fn high_low_is_linear_in_each_slot(a in field(8), b in field(8), v in field(4), alpha in -2.0f64..2.0) {
        let mix = &(&a * alpha) + &b;
        for slot in 0..3 {
            let with = |x: &SpectralField| {
                let mut inputs = vec![&v, &v, &v];
                inputs[slot] = x;
                hl_apply(&inputs, 4.0, 24).unwrap()
            };
            let lhs = with(&mix);
            let rhs = &(&with(&a) * alpha) + &with(&b);
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }
    }

    #[test]
    fn sigma_mu_routes_agree(head in prop::collection::vec(nonzero(12), 2..=4), k1 in 50i64..500) {
        let mut t = head.clone();
        t[0] = k1;
        prop_assume!(t[1..].iter().sum::<i64>() != 0);
        prop_assume!(h_n(&t).unwrap() != 0);
        let r = sigma_minus_mu(&t).unwrap();
        prop_assert!(r.consistent(), "{:?}", r);
    }

    #[test]
    fn smoothing_csv_round_trip(
        vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 12),
        seed in any::<u64>(),
    ) {
        let rows = (0..3)
            .map(|i| SmoothingRow {
                t: i as f64 + vals[0].abs().fract(),
                norms: vec![vals[3 * i + 1], vals[3 * i + 2]],
                slope_u: vals[3 * i + 3],
                slope_w: vals[10],
            })
            .collect();
        let report = SmoothingReport {
            meta: RunMeta { cutoff: 64, dt: vals[11], horizon: 1.0, seed, p: "1*u^3".into() },
            s: 1.0,
            gammas: vec![0.25, 0.5],
            rows,
            gamma_fit: vals[1],
        };
        let mut buf = Vec::new();
        write_smoothing_csv(&report, &mut buf).unwrap();
        let back = parse_smoothing_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back, report);
    }
}
