use std::f64::consts::TAU;

use nalgebra::Matrix2;
use reeblab::profile::{make_oval, Beta, ContactModel, ProfileCurve};
use reeblab::reeb::{integrate_orbit, linearized_return_map, rational_tori, Classification, Closure, ReebError};
use reeblab::spectral::{operator_from_orbit, spectrum, SpectralOptions};
use reeblab::torsion::{verify_torsion_lemma, DiamondRegion, Verdict};

fn oval_model(eps: f64) -> ContactModel {
    ContactModel::new(make_oval(eps).unwrap()).unwrap()
}

/// Period of the torus with direction (p, q) as the support function of the
/// region bounded by γ, by brute-force maximization over a fine grid.
fn support_period(model: &ContactModel, p: i64, q: i64) -> f64 {
    let m = 200_000;
    (0..m)
        .map(|i| {
            let pt = model.evaluate(i as f64 / m as f64);
            p as f64 * pt.f + q as f64 * pt.g
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn torsion_lemma_for_three_widths() {
    for eps in [0.05, 0.1, 0.2] {
        let t = std::time::Instant::now();
        let rep = verify_torsion_lemma(&make_oval(eps).unwrap(), 50).unwrap();
        eprintln!(
            "eps {eps}: {:?} tori={} special={:?} min_other={} at {:?} bounds_ok={} in {:?}",
            rep.verdict, rep.torus_count, rep.special_periods, rep.min_other_period, rep.min_other_witness, rep.bounds_ok,
            t.elapsed()
        );
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.special_periods.0 - eps).abs() < 1e-9);
        assert!((rep.special_periods.1 - eps).abs() < 1e-9);
        assert!(rep.min_other_period > 0.25);
        for r in &rep.diamond_case_log {
            if !r.bound_ok {
                eprintln!("  bound miss: {r:?}");
            }
        }
        assert!(rep.diamond_case_log.iter().any(|r| r.region == DiamondRegion::Inside));
    }
}

#[test]
fn min_other_period_matches_support_function() {
    let model = oval_model(0.1);
    let rep = verify_torsion_lemma(&model.curve, 12).unwrap();
    let w = rep.min_other_witness.unwrap();
    let oracle = support_period(&model, w.p, w.q);
    assert!((oracle - rep.min_other_period).abs() < 1e-8, "{oracle} vs {}", rep.min_other_period);
}

#[test]
fn unit_period_at_theta_zero_by_flow() {
    let model = oval_model(0.1);
    let tori = rational_tori(&model, 3).unwrap();
    let t0 = tori.iter().find(|t| (t.p, t.q) == (1, 0)).unwrap();
    assert!(t0.theta.abs() < 1e-12);
    assert!((t0.period - 1.0).abs() < 1e-12);
    let traj = integrate_orbit(&model, [0.3, 0.7, 0.0], 5.0, 1e-10).unwrap();
    match traj.closure {
        Closure::Closed { period, homology, .. } => {
            assert!((period - 1.0).abs() < 1e-6, "{period}");
            assert_eq!(homology, (1, 0));
        }
        Closure::Open => panic!("orbit did not close"),
    }
}

#[test]
fn formula_vs_flow_on_many_tori() {
    let mut models = vec![oval_model(0.1), oval_model(0.2)];
    for n in 1..=3 {
        models.push(ContactModel::tight(n).unwrap());
    }
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for model in &models {
        let tori = rational_tori(model, 6).unwrap();
        for t in tori.iter().step_by(3) {
            let traj = integrate_orbit(model, [0.1, 0.2, t.theta], 2.0 * t.period + 1.0, 1e-10).unwrap();
            match traj.closure {
                Closure::Closed { period, homology, .. } => {
                    worst = worst.max((period - t.period).abs());
                    assert!((period - t.period).abs() < 1e-6, "{t:?} flow {period}");
                    assert_eq!(homology, (t.p, t.q));
                }
                Closure::Open => panic!("no closure for {t:?}"),
            }
            checked += 1;
        }
    }
    eprintln!("checked {checked} tori, worst period error {worst:e}");
    assert!(checked >= 100);
}

#[test]
fn return_map_is_the_curvature_shear() {
    let model = oval_model(0.1);
    for t in rational_tori(&model, 4).unwrap() {
        let m = linearized_return_map(&model, &t).unwrap();
        let pt = model.evaluate(t.theta);
        let shear = t.period * pt.convexity() / (pt.det() * pt.det());
        let want = Matrix2::new(1.0, 0.0, shear, 1.0);
        assert!((m - want).abs().max() < 1e-8 * shear.abs().max(1.0), "{t:?}: {m} vs {want}");
        assert_eq!(t.classification, Classification::MorseBott);
    }
}

#[test]
fn flat_sided_curve_is_rejected() {
    let model = ContactModel::new(ProfileCurve::flat_sided(0.8, 0.05).unwrap()).unwrap();
    assert!(matches!(rational_tori(&model, 5), Err(ReebError::NonConvex(_))));
}

#[test]
fn tight_torus_periods_are_norms() {
    let model = ContactModel::tight(1).unwrap();
    for t in rational_tori(&model, 5).unwrap() {
        let norm = ((t.p * t.p + t.q * t.q) as f64).sqrt();
        assert!((t.period - norm).abs() < 1e-12);
        assert!((t.theta - (t.q as f64).atan2(t.p as f64).rem_euclid(TAU) / TAU).abs() < 1e-12);
    }
}

#[test]
fn morse_bott_operators_have_one_dimensional_kernel() {
    let model = oval_model(0.1);
    for t in rational_tori(&model, 3).unwrap() {
        let op = operator_from_orbit(&model, &t, &Beta::default(), 1).unwrap();
        let data = spectrum(&op, &SpectralOptions { n_modes: 64, window: 6.0 * std::f64::consts::PI }).unwrap();
        let zeros = data.eigenpairs.iter().filter(|e| e.eigenvalue.abs() < 1e-6).count();
        assert_eq!(zeros, 1, "{t:?}");
    }
}
