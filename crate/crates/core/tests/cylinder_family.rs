use reeblab::cylinder::{
    complex_structure, cr_residual, cylinder_ode, decay_rate, dlambda_energy, linearized_decay_rate, CylinderOptions,
    CylinderSolution, End,
};
use reeblab::profile::{make_oval, Beta, ContactModel};
use reeblab::reeb::rational_tori;
use reeblab::spectral::{operator_from_orbit, spectrum, SpectralOptions};

fn oval(eps: f64) -> ContactModel {
    ContactModel::new(make_oval(eps).unwrap()).unwrap()
}

fn solve(model: &ContactModel, opts: CylinderOptions) -> CylinderSolution {
    cylinder_ode(model, &opts).unwrap()
}

/// Derivative at `x` of the quadratic through three samples.
fn quadratic_slope(s: &[f64], v: &[f64], x: f64) -> f64 {
    let (s0, s1, s2) = (s[0], s[1], s[2]);
    v[0] * ((x - s1) + (x - s2)) / ((s0 - s1) * (s0 - s2))
        + v[1] * ((x - s0) + (x - s2)) / ((s1 - s0) * (s1 - s2))
        + v[2] * ((x - s0) + (x - s1)) / ((s2 - s0) * (s2 - s1))
}

#[test]
fn residual_on_the_default_grid() {
    for eps in [0.05, 0.1, 0.2] {
        let m = oval(eps);
        let sol = solve(&m, CylinderOptions::default());
        assert_eq!(sol.s.len(), 2048);
        let r = cr_residual(&sol, &m, &Beta::default());
        assert!(r < 1e-6, "eps {eps}: {r:e}");
    }
}

#[test]
fn residual_converges_at_fourth_order_or_better() {
    let m = oval(0.1);
    let beta = Beta::default();
    let coarse = cr_residual(&solve(&m, CylinderOptions { points: 384, ..Default::default() }), &m, &beta);
    let fine = cr_residual(&solve(&m, CylinderOptions { points: 768, ..Default::default() }), &m, &beta);
    assert!(coarse / fine >= 16.0, "{coarse:e} -> {fine:e}");
}

#[test]
fn residual_with_varying_beta() {
    let m = oval(0.1);
    let beta = Beta { mean: 1.0, amplitude: 0.3, harmonic: 2 };
    let sol = solve(&m, CylinderOptions { beta, ..Default::default() });
    assert!(cr_residual(&sol, &m, &beta) < 1e-6);
    // The same samples are not holomorphic for a different J.
    assert!(cr_residual(&sol, &m, &Beta::default()) > 1e-3);
}

#[test]
fn corrupted_and_empty_solutions() {
    let m = oval(0.1);
    let sol = solve(&m, CylinderOptions::default());
    let mut bad = sol.clone();
    bad.rho.iter_mut().for_each(|r| *r += 0.01);
    assert!(cr_residual(&bad, &m, &Beta::default()) > 1e-3);
    let empty = solve(&m, CylinderOptions { s_range: Some((0.0, 0.0)), ..Default::default() });
    assert_eq!(cr_residual(&empty, &m, &Beta::default()), 0.0);
}

#[test]
fn shape_of_the_solution() {
    let m = oval(0.1);
    let sol = solve(&m, CylinderOptions::default());
    assert!(sol.rho.windows(2).all(|w| w[1] < w[0]));
    assert!(sol.rho.iter().all(|&r| r > 0.25 && r < 0.75));
    assert!(sol.rho[0] > 0.75 - 1e-8 && *sol.rho.last().unwrap() < 0.25 + 1e-8);
    let mid = sol.s.partition_point(|&s| s < 0.0);
    let a_mid = sol.alpha[mid];
    assert!(sol.alpha[0] > a_mid + 0.3 && *sol.alpha.last().unwrap() > a_mid + 0.3);
}

#[test]
fn initial_slope_is_g_of_rho_mid() {
    let m = oval(0.1);
    for rho_mid in [0.3, 0.5, 0.7] {
        let sol = solve(&m, CylinderOptions { rho_mid, s_range: Some((-1e-3, 1e-3)), points: 41, ..Default::default() });
        let i = sol.s.partition_point(|&s| s < 0.0).clamp(1, sol.s.len() - 2);
        let slope = quadratic_slope(&sol.s[i - 1..=i + 1], &sol.alpha[i - 1..=i + 1], 0.0);
        let want = m.evaluate(rho_mid).g;
        assert!((slope - want).abs() < 1e-8 * want.abs().max(1.0), "{slope} vs {want}");
    }
}

#[test]
fn translation_invariance_in_a0_x0() {
    let m = oval(0.1);
    let base = solve(&m, CylinderOptions::default());
    for (a0, x0) in [(1.5, 0.25), (-3.0, 0.9)] {
        let moved = solve(&m, CylinderOptions { a0, x0, ..Default::default() });
        assert_eq!(moved.s, base.s);
        assert_eq!(moved.alpha, base.alpha);
        assert_eq!(moved.rho, base.rho);
        assert_eq!((moved.a0, moved.x0), (a0, x0));
        assert!(cr_residual(&moved, &m, &Beta::default()) < 1e-6);
    }
}

#[test]
fn leaves_with_distinct_x0_are_disjoint() {
    let m = oval(0.1);
    let leaves: Vec<CylinderSolution> = [0.0, 0.3, 0.6]
        .iter()
        .zip([0.3, 0.5, 0.7])
        .map(|(&x0, rho_mid)| solve(&m, CylinderOptions { x0, rho_mid, points: 512, ..Default::default() }))
        .collect();
    for (i, a) in leaves.iter().enumerate() {
        for b in &leaves[i + 1..] {
            // Images in the (x, θ) projection: {x0} × ρ-range.
            let overlap_x = (a.x0 - b.x0).abs() < 1e-15;
            let ra = (a.rho[a.rho.len() - 1], a.rho[0]);
            let rb = (b.rho[b.rho.len() - 1], b.rho[0]);
            assert!((ra.0 - rb.0).abs() < 1e-6 && (ra.1 - rb.1).abs() < 1e-6);
            assert!(!overlap_x);
        }
    }
}

#[test]
fn energy_equals_sum_of_end_periods() {
    for (eps, tol) in [(0.1, 1e-4), (0.05, 5e-5), (0.2, 1e-4)] {
        let m = oval(eps);
        let sol = solve(&m, CylinderOptions::default());
        let e = dlambda_energy(&sol, &m, 1e-4).unwrap();
        assert!((e.extrapolated - 2.0 * eps).abs() < tol, "eps {eps}: {e:?}");
    }
}

#[test]
fn truncated_energy_is_bounded_and_monotone() {
    let eps = 0.1;
    let m = oval(eps);
    let sol = solve(&m, CylinderOptions::default());
    let mut prev = f64::INFINITY;
    for delta in [1e-4, 1e-3, 1e-2, 0.05, 0.1] {
        let e = dlambda_energy(&sol, &m, delta).unwrap().truncated;
        assert!(e >= 0.0 && e <= 2.0 * eps);
        assert!(e <= prev);
        prev = e;
    }
    assert!(dlambda_energy(&sol, &m, 0.2).is_err());
}

#[test]
fn decay_rates_at_both_ends() {
    for eps in [0.05, 0.1, 0.2] {
        let m = oval(eps);
        let beta = Beta::default();
        let sol = solve(&m, CylinderOptions::default());
        let nu = linearized_decay_rate(&m, &beta, End::Plus);
        let plus = decay_rate(&sol, End::Plus).unwrap();
        let minus = decay_rate(&sol, End::Minus).unwrap();
        assert!(plus.rate < 0.0);
        assert!(((plus.rate - nu) / nu).abs() < 0.01);
        let nu_minus = linearized_decay_rate(&m, &beta, End::Minus);
        assert!(minus.rate > 0.0);
        assert!(((minus.rate - nu_minus) / nu_minus).abs() < 0.01);

        let t = rational_tori(&m, 1).unwrap().into_iter().find(|t| (t.p, t.q) == (0, 1)).unwrap();
        let op = operator_from_orbit(&m, &t, &beta, 1).unwrap();
        let data = spectrum(&op, &SpectralOptions::default()).unwrap();
        let closest = data
            .eigenvalues()
            .into_iter()
            .filter(|&mu| mu < 0.0)
            .map(|mu| ((plus.rate - mu) / mu).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 0.05, "eps {eps}: {closest}");
    }
}

#[test]
fn fit_fails_without_end_samples() {
    let m = oval(0.1);
    let sol = solve(&m, CylinderOptions { s_range: Some((-1.0, 1.0)), points: 200, ..Default::default() });
    assert!(decay_rate(&sol, End::Plus).is_err());
}

#[test]
fn complex_structure_squares_to_minus_one() {
    let m = oval(0.1);
    let beta = Beta { mean: 1.2, amplitude: 0.2, harmonic: 1 };
    for theta in [0.26, 0.4, 0.5, 0.61, 0.74] {
        let j = complex_structure(&m, &beta, theta);
        assert!((j * j + nalgebra::Matrix4::identity()).abs().max() < 1e-10);
    }
}

#[test]
fn invalid_cylinder_options() {
    let m = oval(0.1);
    assert!(cylinder_ode(&m, &CylinderOptions { rho_mid: 0.8, ..Default::default() }).is_err());
    assert!(cylinder_ode(&m, &CylinderOptions { s_range: Some((0.5, 1.0)), ..Default::default() }).is_err());
    let bad_beta = Beta { mean: 0.1, amplitude: 0.5, harmonic: 1 };
    assert!(cylinder_ode(&m, &CylinderOptions { beta: bad_beta, ..Default::default() }).is_err());
    assert!(cylinder_ode(&ContactModel::tight(2).unwrap(), &CylinderOptions::default()).is_err());
}
