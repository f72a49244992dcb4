//! Maximizing `L(λ) = Σ_{i≤j} a_ij τ(e_i e_j)` over projection tuples by
//! spectral coordinate ascent.
//!
//! With the other projections fixed, `L` is `τ(e_i Ω_i)` plus a constant,
//! where `Ω_i = a_ii·1 + Σ_{j≠i} a_ij e_j`. The best `e_i` is the positive
//! spectral projection of `Ω_i`, so each step cannot decrease `L`.

mod tangent;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{support_neg, support_pos, CMatrix, HermitianMatrix, ProjectionMatrix, C64, SUPPORT_EPS};
use crate::moments::{projection_moments, PairMoments};
use crate::random::{derive_seed, random_projection, seeded};

pub use tangent::{tangent_probe, TangentProbe, TangentReport};

/// Symmetric coefficients `a_ij`, stored in the [`PairMoments`] layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalCoeffs {
    n: usize,
    values: Vec<f64>,
}

impl FunctionalCoeffs {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let pm = PairMoments::new(n, values)?;
        Ok(FunctionalCoeffs { n, values: pm.values().to_vec() })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        let pm = PairMoments::from_fn(n, f);
        FunctionalCoeffs { n, values: pm.values().to_vec() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `a_ij`, 1-based and symmetric.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.values[(i - 1) * self.n - (i - 1) * i / 2 + (j - 1)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        FunctionalCoeffs { n: self.n, values: self.values.iter().map(|a| a * c).collect() }
    }

    pub fn evaluate(&self, pm: &PairMoments) -> f64 {
        self.values.iter().zip(pm.values()).map(|(a, l)| a * l).sum()
    }

    /// Whether row `i` has only zero coefficients, so `Ω_i = 0`.
    fn row_is_zero(&self, i: usize) -> bool {
        (1..=self.n).all(|j| self.get(i, j) == 0.0)
    }
}

/// `a_ii·1 + Σ_{j≠i} a_ij e_j` for 1-based `i`.
pub fn omega(i: usize, es: &[ProjectionMatrix], a: &FunctionalCoeffs) -> Result<HermitianMatrix> {
    if !(1..=a.n()).contains(&i) || es.len() != a.n() {
        return Err(Error::Precondition(format!("index {i} out of range for {} projections", es.len())));
    }
    let d = es[0].dim();
    let mut m = CMatrix::identity(d).scale_re(a.get(i, i));
    for (j, e) in es.iter().enumerate() {
        if j + 1 != i {
            e.check_dim(d)?;
            m = &m + &e.matrix().scale_re(a.get(i, j + 1));
        }
    }
    Ok(HermitianMatrix::symmetrized(&m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub commutator: f64,
    /// Smallest eigenvalue of `e Ω e` on the range of `e`; `None` if `e = 0`.
    pub corner_pos_min: Option<f64>,
    /// Largest eigenvalue of `(1−e) Ω (1−e)` on its range; `None` if `e = 1`.
    pub corner_neg_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub sweep: usize,
    pub index: usize,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub coeffs: FunctionalCoeffs,
    pub es: Vec<ProjectionMatrix>,
    pub objective: f64,
    pub omegas: Vec<HermitianMatrix>,
    pub residuals: Vec<Residual>,
    pub converged: bool,
    pub sweeps: usize,
    pub restart: usize,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl OptimizerState {
    pub fn new(coeffs: FunctionalCoeffs, es: Vec<ProjectionMatrix>) -> Result<Self> {
        if es.len() != coeffs.n() {
            return Err(Error::DimensionMismatch { expected: coeffs.n(), found: es.len() });
        }
        let objective = coeffs.evaluate(&projection_moments(&es)?);
        let mut s = OptimizerState {
            coeffs,
            es,
            objective,
            omegas: Vec::new(),
            residuals: Vec::new(),
            converged: false,
            sweeps: 0,
            restart: 0,
            trajectory: Vec::new(),
        };
        s.refresh()?;
        Ok(s)
    }

    pub fn moments(&self) -> PairMoments {
        projection_moments(&self.es).expect("dimensions checked on construction")
    }

    fn refresh(&mut self) -> Result<()> {
        self.objective = self.coeffs.evaluate(&projection_moments(&self.es)?);
        self.omegas = (1..=self.es.len()).map(|i| omega(i, &self.es, &self.coeffs)).collect::<Result<_>>()?;
        self.residuals = self.es.iter().zip(&self.omegas).map(|(e, w)| residual(e, w)).collect::<Result<_>>()?;
        Ok(())
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("sweep,index,objective\n");
        for p in &self.trajectory {
            let _ = writeln!(out, "{},{},{:.16e}", p.sweep, p.index, p.objective);
        }
        out
    }
}

fn compressed_extreme(q: &ProjectionMatrix, w: &HermitianMatrix, smallest: bool) -> Result<Option<f64>> {
    let basis = q.range_basis()?;
    if basis.ncols() == 0 {
        return Ok(None);
    }
    let c = basis.adjoint() * w.inner() * &basis;
    let vals = HermitianMatrix::symmetrized(&CMatrix::new(c)?).eigenvalues()?;
    Ok(Some(if smallest { vals[0] } else { vals[vals.len() - 1] }))
}

fn residual(e: &ProjectionMatrix, w: &HermitianMatrix) -> Result<Residual> {
    Ok(Residual {
        commutator: e.matrix().commutator(w).hs_norm(),
        corner_pos_min: compressed_extreme(e, w, true)?,
        corner_neg_max: compressed_extreme(&e.complement(), w, false)?,
    })
}

/// Replaces `e_i` (1-based) by the positive support of `Ω_i`. A zero row
/// leaves `e_i` alone.
pub fn ascent_step(state: &mut OptimizerState, i: usize) -> Result<()> {
    if state.coeffs.row_is_zero(i) {
        return Ok(());
    }
    let w = omega(i, &state.es, &state.coeffs)?;
    if w.inner().iter().all(|z| *z == C64::default()) {
        return Ok(());
    }
    state.es[i - 1] = support_pos(&w, SUPPORT_EPS)?;
    state.objective = state.coeffs.evaluate(&projection_moments(&state.es)?);
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tol: f64,
    pub seed: u64,
    /// Also start from every tuple of scalar projections `0` / `1` when
    /// `n ≤ SCALAR_START_MAX`. Random starts alone can settle on a fixed
    /// point below the best commuting tuple.
    pub scalar_starts: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { restarts: 16, max_sweeps: 500, tol: 1e-12, seed: 0, scalar_starts: true }
    }
}

pub const SCALAR_START_MAX: usize = 8;

const SAME_PROJECTION: f64 = 1e-10;

/// Ascent from `state` followed by plateau escapes: where some `Ω_i` has a
/// kernel, swapping `e_i` for `1 − supp(Ω_i)_−` keeps the objective, and the
/// swap is kept if ascending from there strictly improves it.
pub fn ascend(state: OptimizerState, max_sweeps: usize, tol: f64) -> Result<OptimizerState> {
    let mut state = ascend_plain(state, max_sweeps, tol)?;
    let n = state.es.len();
    let mut escapes = 0;
    'outer: while state.converged && escapes < ESCAPE_LIMIT * n {
        for i in 1..=n {
            if state.coeffs.row_is_zero(i) {
                continue;
            }
            let w = &state.omegas[i - 1];
            let widened = support_neg(w, SUPPORT_EPS)?.complement();
            if widened.max_abs_diff(&state.es[i - 1]) <= SAME_PROJECTION {
                continue;
            }
            escapes += 1;
            let mut trial = state.clone();
            trial.es[i - 1] = widened;
            trial.converged = false;
            let trial = ascend_plain(trial, max_sweeps, tol)?;
            if trial.objective > state.objective + ESCAPE_GAIN * (1.0 + state.objective.abs()) {
                state = trial;
                continue 'outer;
            }
        }
        break;
    }
    Ok(state)
}

const ESCAPE_LIMIT: usize = 4;
const ESCAPE_GAIN: f64 = 1e-9;

fn ascend_plain(mut state: OptimizerState, max_sweeps: usize, tol: f64) -> Result<OptimizerState> {
    let n = state.es.len();
    for sweep in 1..=max_sweeps {
        let before = state.objective;
        let mut moved = false;
        for i in 1..=n {
            let prev_obj = state.objective;
            let prev = state.es[i - 1].clone();
            ascent_step(&mut state, i)?;
            if state.objective < prev_obj - 1e-12 * (1.0 + prev_obj.abs()) {
                return Err(Error::Verification(format!(
                    "ascent step {i} decreased the objective from {prev_obj} to {}",
                    state.objective
                )));
            }
            moved |= state.es[i - 1].max_abs_diff(&prev) > SAME_PROJECTION;
            state.trajectory.push(TrajectoryPoint { sweep, index: i, objective: state.objective });
        }
        state.sweeps = sweep;
        if state.objective - before < tol && !moved {
            state.converged = true;
            break;
        }
    }
    state.refresh()?;
    Ok(state)
}

/// Start `r`: the first `opts.restarts` are random, the rest scalar tuples
/// indexed by bitmask.
fn run_restart(a: &FunctionalCoeffs, d: usize, opts: &SolveOptions, r: usize) -> Result<OptimizerState> {
    let es = if r < opts.restarts {
        let mut rng = seeded(derive_seed(opts.seed, r as u64));
        (0..a.n()).map(|_| random_projection(&mut rng, d)).collect()
    } else {
        let mask = r - opts.restarts;
        (0..a.n())
            .map(|i| if mask >> i & 1 == 1 { ProjectionMatrix::identity(d) } else { ProjectionMatrix::zero(d) })
            .collect()
    };
    let mut state = OptimizerState::new(a.clone(), es)?;
    state.restart = r;
    ascend(state, opts.max_sweeps, opts.tol)
}

/// Best fixed point over seeded random restarts and scalar starts. Ties go to the lowest
/// restart index, so the result does not depend on scheduling.
pub fn solve(a: &FunctionalCoeffs, d: usize, opts: &SolveOptions) -> Result<OptimizerState> {
    if d == 0 || opts.restarts == 0 {
        return Err(Error::Precondition("need dimension ≥ 1 and at least one restart".into()));
    }
    let scalar = if opts.scalar_starts && a.n() <= SCALAR_START_MAX { 1usize << a.n() } else { 0 };
    let starts = opts.restarts + scalar;
    #[cfg(feature = "parallel")]
    let runs: Vec<Result<OptimizerState>> = {
        use rayon::prelude::*;
        (0..starts).into_par_iter().map(|r| run_restart(a, d, opts, r)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Result<OptimizerState>> = (0..starts).map(|r| run_restart(a, d, opts, r)).collect();

    let mut best: Option<OptimizerState> = None;
    for run in runs {
        let s = run?;
        if best.as_ref().is_none_or(|b| s.objective > b.objective) {
            best = Some(s);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktEntry {
    pub index: usize,
    pub commutator: f64,
    pub corner_pos_min: Option<f64>,
    pub corner_neg_max: Option<f64>,
    /// `τ(e_i Ω_i) = a_ii λ_ii + Σ_{j≠i} a_ij λ_ij`, must be `≥ 0`.
    pub tau_e_omega: f64,
    /// `τ((1−e_i) Ω_i)`, must be `≤ 0`.
    pub tau_complement_omega: f64,
    /// `a_ii + Σ_{j≠i} a_ij λ_jj`, which the trace conditions place at or
    /// below `tau_e_omega`.
    pub diagonal_combination: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub tol: f64,
    pub entries: Vec<KktEntry>,
    pub passed: bool,
}

/// First-order conditions at a maximum: each `e_i` commutes with `Ω_i`,
/// `Ω_i ≥ 0` on the range of `e_i` and `Ω_i ≤ 0` on its complement.
pub fn kkt_check(state: &OptimizerState, tol: f64) -> Result<KktReport> {
    let pm = projection_moments(&state.es)?;
    let a = &state.coeffs;
    let n = a.n();
    let mut entries = Vec::with_capacity(n);
    let mut passed = true;
    for i in 1..=n {
        let w = omega(i, &state.es, a)?;
        let e = &state.es[i - 1];
        let r = residual(e, &w)?;
        let tau_e_omega = (e.matrix() * &w).normalized_trace().re;
        let tau_complement_omega = (e.complement().matrix() * &w).normalized_trace().re;
        let diagonal_combination = a.get(i, i) + (1..=n).filter(|&j| j != i).map(|j| a.get(i, j) * pm.get(j, j)).sum::<f64>();
        let scale = 1.0 + w.op_norm();
        let ok = r.commutator <= tol * scale
            && r.corner_pos_min.is_none_or(|x| x >= -tol * scale)
            && r.corner_neg_max.is_none_or(|x| x <= tol * scale)
            && tau_e_omega >= -tol * scale
            && tau_complement_omega <= tol * scale;
        passed &= ok;
        entries.push(KktEntry {
            index: i,
            commutator: r.commutator,
            corner_pos_min: r.corner_pos_min,
            corner_neg_max: r.corner_neg_max,
            tau_e_omega,
            tau_complement_omega,
            diagonal_combination,
        });
    }
    Ok(KktReport { tol, entries, passed })
}

pub const BRUTE_FORCE_MAX: usize = 24;

/// Exact maximum of `L` over tuples of diagonal 0/1 projections in
/// dimension `d`, by enumerating all `2^{nd}` patterns.
pub fn brute_force_diagonal(a: &FunctionalCoeffs, d: usize) -> Result<f64> {
    let n = a.n();
    if d == 0 || n * d > BRUTE_FORCE_MAX {
        return Err(Error::Precondition(format!("brute force needs 1 ≤ n·d ≤ {BRUTE_FORCE_MAX}, got n={n}, d={d}")));
    }
    let mask = (1u32 << d) - 1;
    let pairs: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).map(|(i, j)| (i, j, a.get(i + 1, j + 1))).collect();
    let mut best = f64::NEG_INFINITY;
    for code in 0u64..(1u64 << (n * d)) {
        let sets: Vec<u32> = (0..n).map(|i| ((code >> (i * d)) as u32) & mask).collect();
        let value: f64 = pairs.iter().map(|&(i, j, c)| c * (sets[i] & sets[j]).count_ones() as f64).sum::<f64>() / d as f64;
        best = best.max(value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use rand::Rng;

    fn coeffs(n: usize, v: &[f64]) -> FunctionalCoeffs {
        FunctionalCoeffs::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn omega_examples() {
        let a = coeffs(1, &[1.0]);
        let w = omega(1, &[ProjectionMatrix::zero(3)], &a).unwrap();
        assert!(w.max_abs_diff(&CMatrix::identity(3)) < 1e-15);

        let a = coeffs(2, &[1.0, -2.0, 0.0]);
        let w = omega(1, &[ProjectionMatrix::zero(2), ProjectionMatrix::identity(2)], &a).unwrap();
        assert!(w.max_abs_diff(&CMatrix::identity(2).scale_re(-1.0)) < 1e-15);

        let a = coeffs(2, &[0.0, 1.0, 0.0]);
        let e2 = ProjectionMatrix::diagonal_indicator(2, [0]);
        let w = omega(1, &[ProjectionMatrix::zero(2), e2.clone()], &a).unwrap();
        assert!(w.max_abs_diff(e2.matrix()) < 1e-15);
    }

    #[test]
    fn ascent_examples() {
        let mut rng = seeded(51);
        let start = vec![random_projection(&mut rng, 3)];
        let mut s = OptimizerState::new(coeffs(1, &[1.0]), start.clone()).unwrap();
        ascent_step(&mut s, 1).unwrap();
        assert!(s.es[0].max_abs_diff(&CMatrix::identity(3)) < 1e-12);
        assert!((s.objective - 1.0).abs() < 1e-12);

        let mut s = OptimizerState::new(coeffs(1, &[-1.0]), start).unwrap();
        ascent_step(&mut s, 1).unwrap();
        assert!(s.es[0].op_norm() < 1e-12 && s.objective.abs() < 1e-12);

        let es = vec![ProjectionMatrix::zero(2), ProjectionMatrix::identity(2)];
        let mut s = OptimizerState::new(coeffs(2, &[0.0, 1.0, 0.0]), es).unwrap();
        ascent_step(&mut s, 1).unwrap();
        assert!(s.es[0].max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn zero_row_is_skipped() {
        let mut rng = seeded(52);
        let e = random_projection(&mut rng, 3);
        let mut s = OptimizerState::new(coeffs(2, &[0.0, 0.0, 1.0]), vec![e.clone(), e.clone()]).unwrap();
        ascent_step(&mut s, 1).unwrap();
        assert_eq!(s.es[0], e);
    }

    #[test]
    fn solve_examples() {
        let opts = SolveOptions { restarts: 4, ..Default::default() };
        let s = solve(&coeffs(2, &[1.0, -2.0, 1.0]), 2, &opts).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-10);
        let random_only = SolveOptions { scalar_starts: false, ..opts };
        for d in 1..=4 {
            let s = solve(&coeffs(2, &[0.0, 1.0, 0.0]), d, &opts).unwrap();
            assert!((s.objective - 1.0).abs() < 1e-10);
            // Random starts stall at e₁ = e₂ until the plateau escape widens e₁.
            let s = solve(&coeffs(2, &[0.0, 1.0, 0.0]), d, &random_only).unwrap();
            assert!((s.objective - 1.0).abs() < 1e-10);
        }
        let s = solve(&coeffs(1, &[1.0]), 3, &opts).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(s.converged);
    }

    #[test]
    fn kkt_at_known_optimum() {
        let a = coeffs(2, &[1.0, -2.0, 1.0]);
        let es = vec![ProjectionMatrix::identity(2), ProjectionMatrix::zero(2)];
        let s = OptimizerState::new(a, es).unwrap();
        let r = kkt_check(&s, 1e-8).unwrap();
        assert!(r.passed);
        let e2 = &r.entries[1];
        assert!(e2.tau_e_omega.abs() < 1e-15);
        assert!((e2.tau_complement_omega + 1.0).abs() < 1e-15);
        assert_eq!(e2.corner_pos_min, None);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_diagonal(&coeffs(1, &[1.0]), 3).unwrap(), 1.0);
        assert_eq!(brute_force_diagonal(&coeffs(2, &[1.0, -2.0, 1.0]), 2).unwrap(), 1.0);
        assert_eq!(brute_force_diagonal(&coeffs(2, &[0.0, 1.0, 0.0]), 2).unwrap(), 1.0);
        assert!(brute_force_diagonal(&coeffs(5, &[0.0; 15]), 5).is_err());
    }

    /// A diagonal pattern's objective is a sum over coordinates, so the
    /// enumeration must match the best single 0/1 vector.
    #[test]
    fn brute_force_matches_separable_form() {
        let mut rng = seeded(53);
        for _ in 0..20 {
            let n = rng.random_range(1..=4);
            let a = FunctionalCoeffs::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let single = (0u32..1 << n)
                .map(|s| {
                    let x = |i: usize| ((s >> (i - 1)) & 1) as f64;
                    (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).map(|(i, j)| a.get(i, j) * x(i) * x(j)).sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            for d in 1..=3 {
                assert!((brute_force_diagonal(&a, d).unwrap() - single).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_points_and_dominance() {
        let mut rng = seeded(54);
        for _ in 0..10 {
            let n = rng.random_range(2..=4);
            let d = rng.random_range(1..=4);
            let a = FunctionalCoeffs::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let s = solve(&a, d, &SolveOptions { restarts: 4, seed: rng.random(), ..Default::default() }).unwrap();
            assert!(s.converged);
            let r = kkt_check(&s, 1e-8).unwrap();
            assert!(r.passed, "{r:?}");
            for e in &r.entries {
                assert!(e.tau_e_omega >= e.diagonal_combination - 1e-8);
            }
            if n * d <= BRUTE_FORCE_MAX {
                assert!(s.objective >= brute_force_diagonal(&a, d).unwrap() - 1e-6);
            }
            assert!((s.objective - a.evaluate(&s.moments())).abs() < 1e-10);
        }
    }

    #[test]
    fn two_projections_match_brute_force() {
        let mut rng = seeded(55);
        for _ in 0..20 {
            let a12 = rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let a = coeffs(2, &[rng.random_range(-2.0..2.0), a12, rng.random_range(-2.0..2.0)]);
            let d = rng.random_range(1..=3);
            let s = solve(&a, d, &SolveOptions { restarts: 8, seed: rng.random(), ..Default::default() }).unwrap();
            assert!((s.objective - brute_force_diagonal(&a, d).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn scale_covariance() {
        let a = coeffs(3, &[0.5, -1.0, 0.7, -0.2, 1.1, -0.4]);
        let opts = SolveOptions { restarts: 3, seed: 7, ..Default::default() };
        let s1 = solve(&a, 4, &opts).unwrap();
        let s2 = solve(&a.scaled(2.5), 4, &opts).unwrap();
        assert!((s2.objective - 2.5 * s1.objective).abs() < 1e-10);
        for (x, y) in s1.es.iter().zip(&s2.es) {
            assert!(x.max_abs_diff(y) < 1e-8);
        }
    }

    #[test]
    fn deterministic_and_trajectory_monotone() {
        let a = coeffs(3, &[0.3, -1.0, 0.8, 0.1, -0.6, 0.2]);
        let opts = SolveOptions { restarts: 6, seed: 99, ..Default::default() };
        let s1 = solve(&a, 3, &opts).unwrap();
        let s2 = solve(&a, 3, &opts).unwrap();
        assert_eq!(s1.objective, s2.objective);
        assert_eq!(s1.restart, s2.restart);
        assert!(s1.trajectory.windows(2).all(|w| w[1].objective >= w[0].objective - 1e-12));
        assert!(s1.trajectory_csv().starts_with("sweep,index,objective\n1,1,"));
    }

    #[test]
    fn coefficient_layout() {
        let a = coeffs(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!((a.get(1, 3), a.get(3, 1), a.get(2, 2), a.get(3, 2)), (3.0, 3.0, 4.0, 5.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn fixed_points_satisfy_first_order_conditions(
                seed in any::<u64>(),
                n in 1usize..=3,
                d in 1usize..=4,
                raw in proptest::collection::vec(-2.0f64..2.0, 6),
            ) {
                let a = FunctionalCoeffs::new(n, raw[..n * (n + 1) / 2].to_vec()).unwrap();
                let s = solve(&a, d, &SolveOptions { restarts: 3, seed, ..Default::default() }).unwrap();
                prop_assert!(s.converged);
                prop_assert!(kkt_check(&s, 1e-8).unwrap().passed);
                prop_assert!((s.objective - a.evaluate(&s.moments())).abs() < 1e-10);
                prop_assert!(s.objective >= brute_force_diagonal(&a, d).unwrap() - 1e-6);
                prop_assert!(s.moments().invariant_violations(1e-10).is_empty());
            }
        }
    }
}
