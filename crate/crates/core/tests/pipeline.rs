//! Cross-module checks: words feed the amalgamated evaluator, optimizer
//! output feeds the moment and hull code.

use hyperlinear::amalgam::{claim2_check, monte_carlo_tau, McConfig};
use hyperlinear::approx::ApproxRep;
use hyperlinear::linalg::{c64, phase, ProjectionMatrix};
use hyperlinear::moments::{hull_membership, projection_moments, simulate_abelian};
use hyperlinear::optimizer::{brute_force_diagonal, kkt_check, solve, FunctionalCoeffs, SolveOptions};
use hyperlinear::random::{random_projection, seeded};
use hyperlinear::words::{britton_equal, normalize_step_iv, parse};
use rand::Rng;

/// The relator instantiates to `a₁ (v b³ v*) a₁⁻¹ b⁻²`, whose trace has a
/// closed form in the root of unity of order `6n`.
#[test]
fn relator_trace_matches_closed_form() {
    let w = parse("a b^3 a^-1 b^-2").unwrap();
    for n in [1usize, 2, 4, 8] {
        let rep = ApproxRep::build(n).unwrap();
        let r = claim2_check(&w, &rep).unwrap();
        assert!(r.is_identity);
        let om = phase(1.0 / (6 * n) as f64);
        let exact = (c64(2.0, 0.0) + om * 2.0 + om.powi(-4) + om.powi(-1)) / 6.0;
        assert!((c64(r.tau_re, r.tau_im) - exact).norm() < 1e-12, "n={n}: {r:?} vs {exact}");
    }
}

#[test]
fn normalized_words_keep_their_trace() {
    let rep = ApproxRep::build(8).unwrap();
    for text in ["a^-2 b^2 a^2", "a b^-2 a^-1 b a b a^-1", "b a^-1 b^4 a"] {
        let w = parse(text).unwrap();
        let normal = normalize_step_iv(&w).unwrap();
        assert!(britton_equal(&w, &normal));
        let before = claim2_check(&w, &rep).unwrap();
        assert!(before.abs_tau <= 1.0 + 1e-12);
        assert!(claim2_check(&normal, &rep).unwrap().abs_tau <= 1.0 + 1e-12);
    }
}

#[test]
fn exact_trace_agrees_with_sampling() {
    let rep = ApproxRep::build(4).unwrap();
    let w = parse("a b a^-1 b^-1").unwrap();
    let exact = claim2_check(&w, &rep).unwrap();
    let est = monte_carlo_tau(&w, &rep, &McConfig { samples: 300, amplification: 8, seed: 5 });
    assert!(est.within(c64(exact.tau_re, exact.tau_im), 3.0), "{est:?} vs {exact:?}");
}

#[test]
fn optimizer_output_is_consistent_downstream() {
    let mut rng = seeded(99);
    for _ in 0..10 {
        let n = rng.random_range(1..=3usize);
        let d = rng.random_range(1..=3usize);
        let a = FunctionalCoeffs::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let state = solve(&a, d, &SolveOptions { restarts: 4, ..SolveOptions::default() }).unwrap();
        let pm = state.moments();
        assert!((a.evaluate(&pm) - state.objective).abs() < 1e-10);
        assert!(pm.invariant_violations(1e-10).is_empty());
        assert!(kkt_check(&state, 1e-8).unwrap().passed);
        assert!(state.objective >= brute_force_diagonal(&a, d).unwrap() - 1e-6);
    }
}

#[test]
fn commuting_projections_land_in_the_hull() {
    let mut rng = seeded(3);
    for _ in 0..20 {
        let n = rng.random_range(1..=5usize);
        let d = rng.random_range(1..=6usize);
        let es: Vec<ProjectionMatrix> = (0..n)
            .map(|_| ProjectionMatrix::diagonal_indicator(d, (0..d).filter(|_| rng.random_bool(0.5))))
            .collect();
        let pm = projection_moments(&es).unwrap();
        let hull = hull_membership(&pm).unwrap();
        assert!(hull.member);
        let back = simulate_abelian(n, &hull.atoms(n)).unwrap();
        assert!(back.values().iter().zip(pm.values()).all(|(x, y)| (x - y).abs() < 1e-9));
    }
}

#[test]
fn generic_projection_pairs_stay_in_the_hull() {
    // For n = 2 every projection pair is realized abelianly.
    let mut rng = seeded(4);
    for _ in 0..20 {
        let d = rng.random_range(2..=5usize);
        let es = [random_projection(&mut rng, d), random_projection(&mut rng, d)];
        assert!(hull_membership(&projection_moments(&es).unwrap()).unwrap().member);
    }
}
