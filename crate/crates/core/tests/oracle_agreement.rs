use lattice_bands::oracle::{oracle_comb_discretization, oracle_comb_richardson};
use lattice_bands::*;
use std::f64::consts::PI;

fn example_one(gt: f64) -> Lattice {
    LatticeParams::perturbed(1.0, 3.0, 4.0, gt).unwrap()
}

fn gaps(p: &Lattice) -> Vec<Gap> {
    gaps_in_window(p, EnergyInterval::new(-5.0, 12.0).unwrap()).unwrap()
}

#[test]
fn richardson_matches_closed_form() {
    let p = example_one(1.0);
    let mut checked = 0;
    for theta in [0.0, 1.0, 2.5, -PI / 2.0, PI, -2.0] {
        let fiber = FiberParams::new(theta).unwrap();
        for gap in gaps(&p) {
            let Some(eig) = fiber_discrete_eigenvalue(&p, &fiber, &gap).unwrap() else { continue };
            if eig.lambda_decaying.abs().powi(30) > 1e-8 {
                continue;
            }
            let r = oracle_comb_richardson(&p, &fiber, &gap, 0.02, 30).unwrap();
            assert_eq!(r.extrapolated.len(), 1, "theta={theta} gap={:?}: {r:?}", gap.interval);
            let rel = (r.extrapolated[0] - eig.energy).abs() / eig.energy.abs().max(1.0);
            assert!(rel < 1e-4, "theta={theta}: {} vs {}", r.extrapolated[0], eig.energy);
            checked += 1;
        }
    }
    assert!(checked >= 4, "{checked}");
}

#[test]
fn cell_doubling_changes_less_than_mesh_error() {
    let p = example_one(1.0);
    let fiber = FiberParams::new(0.0).unwrap();
    let gap = gaps(&p).into_iter().next().unwrap();
    let eig = fiber_discrete_eigenvalue(&p, &fiber, &gap).unwrap().unwrap();
    let coarse = oracle_comb_discretization(&p, &fiber, &gap, 0.02, 20).unwrap();
    let doubled = oracle_comb_discretization(&p, &fiber, &gap, 0.02, 40).unwrap();
    assert_eq!(coarse.len(), 1);
    assert_eq!(doubled.len(), 1);
    let mesh_error = (coarse[0] - eig.energy).abs();
    assert!((coarse[0] - doubled[0]).abs() < mesh_error, "{coarse:?} {doubled:?} {}", eig.energy);
}

#[test]
fn no_eigenvalue_without_perturbation() {
    let p = example_one(4.0);
    for theta in [0.0, 1.3] {
        let fiber = FiberParams::new(theta).unwrap();
        for gap in gaps(&p) {
            let ev = oracle_comb_discretization(&p, &fiber, &gap, 0.02, 20).unwrap();
            assert!(ev.is_empty(), "theta={theta} gap={:?}: {ev:?}", gap.interval);
        }
    }
}

#[test]
fn preconditions() {
    let p = example_one(1.0);
    let fiber = FiberParams::new(0.0).unwrap();
    let gap = gaps(&p).into_iter().next().unwrap();
    assert!(oracle_comb_discretization(&p, &fiber, &gap, 0.05, 20).unwrap_err().is_validation());
    assert!(oracle_comb_discretization(&p, &fiber, &gap, 0.02, 10).unwrap_err().is_validation());
}
