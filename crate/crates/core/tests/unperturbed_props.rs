use lattice_bands::oracle::{oracle_tau_scan, tau_scan_tolerance};
use lattice_bands::unperturbed::{band_membership_positive, negative_band_roots};
use lattice_bands::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn intervals() -> impl Strategy<Value = Vec<Interval>> {
    prop::collection::vec((-50.0f64..50.0, 0.0f64..5.0), 0..40)
        .prop_map(|v| v.into_iter().map(|(lo, w)| EnergyInterval::new(lo, lo + w).unwrap()).collect())
}

proptest! {
    #[test]
    fn merged_intervals_sorted_disjoint_and_stable(raw in intervals(), eps in 0.0f64..0.5) {
        let out = merge_intervals(&raw, eps);
        for w in out.windows(2) {
            prop_assert!(w[0].hi + eps < w[1].lo);
        }
        prop_assert_eq!(merge_intervals(&out, eps), out.clone());
        for iv in &raw {
            prop_assert!(out.iter().any(|o| o.lo <= iv.lo && iv.hi <= o.hi));
        }
    }

    #[test]
    fn bracket_root_stable_under_halved_tolerance(c in 0.1f64..100.0, tol in 1e-12f64..1e-6) {
        let f = |x: f64| x * x * x - c;
        let r1 = bracket_root(f, 0.0, 10.0, tol).unwrap();
        let r2 = bracket_root(f, 0.0, 10.0, tol / 2.0).unwrap();
        prop_assert!((r1 - r2).abs() <= tol);
        prop_assert!((r1 - c.cbrt()).abs() <= tol);
    }

    #[test]
    fn gap_closures_disjoint(a in 0.5f64..4.0, b in 0.5f64..4.0, g in -10.0f64..10.0) {
        let p = LatticeParams::new(a, b, g).unwrap();
        let bs = compute_bands(&p, EnergyInterval::new(-200.0, 80.0).unwrap()).unwrap();
        for w in bs.bands.windows(2) {
            prop_assert!(w[0].hi < w[1].lo, "{:?}", w);
        }
        for gap in bs.gaps() {
            prop_assert!(gap.width() > 0.0);
        }
    }

    #[test]
    fn agrees_with_tau_scan_outside_edge_bands(a in 0.5f64..4.0, b in 0.5f64..4.0, g in -10.0f64..10.0, seed in 0u64..1000) {
        let p = LatticeParams::new(a, b, g).unwrap();
        let mut mismatches = 0;
        let mut x = seed as f64 * 0.618_033_988_749_895;
        for _ in 0..500 {
            x = (x + 0.618_033_988_749_895).fract();
            let k = 0.05 + 15.0 * x;
            if (k * b).sin().abs() < 1e-6 {
                continue;
            }
            let tol = tau_scan_tolerance(&p, k, 301);
            let f = f_tau(&p, 0.0, k).unwrap();
            let r = ((k * a).sin() / (k * b).sin()).abs();
            // distance of the band condition from its threshold, in τ units
            if (f.abs() - (1.0 + r)).abs() <= 2.0 * tol {
                continue;
            }
            if band_membership_positive(&p, k) != oracle_tau_scan(&p, k, 301).unwrap() {
                mismatches += 1;
            }
        }
        prop_assert_eq!(mismatches, 0);
    }
}

#[test]
fn threshold_at_gamma_star() {
    for (a, b) in [(1.0, 3.0), (2.0, 3.0), (1.5, 1.0)] {
        let gs = gamma_star(&LatticeParams::new(a, b, 0.0).unwrap());
        for i in 0..20 {
            let g = gs * (0.5 + 0.05 * i as f64 + 0.0123);
            let p = LatticeParams::new(a, b, g).unwrap();
            let bs = compute_bands(&p, EnergyInterval::new(0.0, 40.0).unwrap()).unwrap();
            let first = bs.positive_bands()[0];
            if g > gs && g <= 0.0 {
                assert!(first.lo < 1e-6, "a={a} b={b} g={g} first band {first:?}");
            } else {
                assert!(first.lo > 1e-4, "a={a} b={b} g={g} first band {first:?}");
            }
        }
    }
}

#[test]
fn flat_band_sits_at_band_edge() {
    let p = LatticeParams::new(3.0, 2.0, -6.0).unwrap();
    let bs = compute_bands(&p, EnergyInterval::new(0.0, 40.0).unwrap()).unwrap();
    let e = PI * PI;
    assert!(bs.flat_bands.iter().any(|&f| ((f - e) / e).abs() < 1e-9));
    let at_edge = bs.bands.iter().any(|b| ((b.lo - e) / e).abs() < 1e-9 || ((b.hi - e) / e).abs() < 1e-9);
    assert!(at_edge, "{:?}", bs.bands);
}

#[test]
fn negative_band_roots_solve_their_equations() {
    for g in [-1.0f64, -4.0, -5.0, -6.0, -12.0] {
        let p = LatticeParams::new(1.0, 3.0, g).unwrap();
        let r = negative_band_roots::<f64>(&p).unwrap().unwrap();
        let k1 = r.kappa1;
        let res1 = g / (2.0 * k1) + (k1 / 2.0).tanh() + (1.5 * k1).tanh();
        assert!(res1.abs() < 1e-10, "g={g} residual {res1}");
        match r.kappa2 {
            Some(k2) => {
                assert!(g < -16.0 / 3.0);
                let res2 = g / (2.0 * k2) + 1.0 / (k2 / 2.0).tanh() + 1.0 / (1.5 * k2).tanh();
                assert!(res2.abs() < 1e-10, "g={g} residual {res2}");
                let nb = negative_band(&p).unwrap().unwrap();
                assert!(nb.hi < 0.0);
            }
            None => {
                assert!(g > -16.0 / 3.0);
                assert_eq!(negative_band(&p).unwrap().unwrap().hi, 0.0);
            }
        }
    }
}

#[test]
fn membership_examples() {
    let p = LatticeParams::new(1.0, 3.0, 0.0).unwrap();
    assert!((1..200).all(|i| band_membership_positive(&p, 0.0731 * i as f64)));
    let p = LatticeParams::new(1.0, 3.0, 4.0).unwrap();
    for n in 1..10 {
        assert!(band_membership_positive(&p, n as f64 * PI));
        assert!(band_membership_positive(&p, n as f64 * PI / 3.0));
    }
    assert!(!band_membership_positive(&p, 0.2));
    assert_eq!(band_membership_positive(&p, 0.5), oracle_tau_scan(&p, 0.5, 301).unwrap());
}
