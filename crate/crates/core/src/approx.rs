//! The dimension-`6n` approximate representation of `ab³a⁻¹ = b²`.
//!
//! Basis vectors `e_0 .. e_{6n-1}` carry the diagonal unitary
//! `b = Σ ω^k e_k` with `ω = e^{2πi/6n}`. The permutation unitary `v` is fixed
//! by `v* e_i v = e_{σ(i)}` where
//!
//! ```text
//! σ(3k+ε)      = 2k+ε          ε ∈ {0,1}
//! σ(3k+3n+ε)   = 2k+4n+ε       ε ∈ {0,1}
//! σ(3k+2)      = 2k+2n
//! σ(3k+3n+2)   = 2k+2n+1       k = 0..n-1
//! ```
//!
//! so `v b^α v*` is the diagonal matrix with entries `ω^{α σ(i)}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, phase, CMatrix, ProjectionMatrix, UnitaryMatrix, C64};

/// Largest exponent used for the vanishing-expectation residuals.
pub const DEFAULT_P_MAX: i64 = 6;

#[derive(Clone, Debug)]
pub struct ApproxRep {
    n: usize,
    sigma: Vec<usize>,
    b: UnitaryMatrix,
    v: UnitaryMatrix,
}

/// Index map of `Ad v*` on the diagonal matrix units.
pub fn sigma_map(n: usize) -> Vec<usize> {
    let mut sigma = vec![usize::MAX; 6 * n];
    for k in 0..n {
        for eps in 0..2 {
            sigma[3 * k + eps] = 2 * k + eps;
            sigma[3 * k + 3 * n + eps] = 2 * k + 4 * n + eps;
        }
        sigma[3 * k + 2] = 2 * k + 2 * n;
        sigma[3 * k + 3 * n + 2] = 2 * k + 2 * n + 1;
    }
    sigma
}

fn check_bijection(sigma: &[usize]) -> Result<()> {
    let dim = sigma.len();
    let mut seen = vec![false; dim];
    for (i, &s) in sigma.iter().enumerate() {
        if s >= dim {
            return Err(Error::NotBijective {
                dim,
                detail: format!("index {i} maps outside the range"),
            });
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::NotBijective {
                dim,
                detail: format!("target {s} hit twice"),
            });
        }
    }
    Ok(())
}

/// `e^{2πi·num/den}` with the numerator reduced exactly first.
pub(crate) fn root_of_unity(num: i128, den: usize) -> C64 {
    let r = num.rem_euclid(den as i128);
    phase(r as f64 / den as f64)
}

impl ApproxRep {
    pub fn build(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("n must be >= 1".into()));
        }
        let dim = 6 * n;
        let sigma = sigma_map(n);
        check_bijection(&sigma)?;
        let b_diag: Vec<C64> = (0..dim).map(|k| root_of_unity(k as i128, dim)).collect();
        let b = UnitaryMatrix::from_diagonal(&b_diag)?;
        let mut v = CMatrix::zeros(dim);
        for (i, &s) in sigma.iter().enumerate() {
            v.set(i, s, c64(1.0, 0.0));
        }
        let v = UnitaryMatrix::new(v)?;
        Ok(ApproxRep { n, sigma, b, v })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        6 * self.n
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn b(&self) -> &UnitaryMatrix {
        &self.b
    }

    pub fn v(&self) -> &UnitaryMatrix {
        &self.v
    }

    /// `b^α`, computed entrywise so large exponents stay exact.
    pub fn b_pow(&self, alpha: i64) -> CMatrix {
        let dim = self.dim();
        let diag: Vec<C64> = (0..dim)
            .map(|k| root_of_unity(alpha as i128 * k as i128, dim))
            .collect();
        CMatrix::from_diagonal(&diag)
    }

    /// `v b^α v*` through matrix products.
    pub fn conj_b_pow(&self, alpha: i64) -> CMatrix {
        &(self.v.matrix() * &self.b_pow(alpha)) * &self.v.matrix().adjoint()
    }

    pub fn e(&self, k: usize) -> ProjectionMatrix {
        ProjectionMatrix::diagonal_indicator(self.dim(), [k])
    }

    pub fn f_indices(&self, k: usize) -> [usize; 6] {
        let n = self.n;
        [3 * k, 3 * k + 1, 3 * k + 2, 3 * k + 3 * n, 3 * k + 3 * n + 1, 3 * k + 3 * n + 2]
    }

    pub fn g_indices(&self, k: usize) -> [usize; 6] {
        let n = self.n;
        [2 * k, 2 * k + 1, 2 * k + 2 * n, 2 * k + 2 * n + 1, 2 * k + 4 * n, 2 * k + 4 * n + 1]
    }

    pub fn f(&self, k: usize) -> ProjectionMatrix {
        ProjectionMatrix::diagonal_indicator(self.dim(), self.f_indices(k))
    }

    pub fn g(&self, k: usize) -> ProjectionMatrix {
        ProjectionMatrix::diagonal_indicator(self.dim(), self.g_indices(k))
    }

    /// `P_n = Σ_k e_{3k}`.
    pub fn test_projection(&self) -> ProjectionMatrix {
        ProjectionMatrix::diagonal_indicator(self.dim(), (0..self.n).map(|k| 3 * k))
    }

    pub fn b0(&self) -> B0Algebra {
        B0Algebra { n: self.n }
    }

    /// Residuals of the defining estimates and identities of the construction.
    pub fn equation_residuals(&self) -> EquationResiduals {
        let n = self.n;
        let b2 = self.b_pow(2);
        let b3 = self.b_pow(3);
        let v = self.v.matrix();
        let mut eq1: f64 = 0.0;
        let mut eq2: f64 = 0.0;
        let mut intertwining: f64 = 0.0;
        for k in 0..n {
            let target = root_of_unity(k as i128, n);
            let f = self.f(k);
            let g = self.g(k);
            eq1 = eq1.max((&b2 * f.matrix()).dist(&f.scale(target)));
            eq2 = eq2.max((&b3 * g.matrix()).dist(&g.scale(target)));
            let lhs = &v.adjoint() * f.matrix();
            let rhs = g.matrix() * &v.adjoint();
            intertwining = intertwining.max(lhs.max_abs_diff(&rhs));
        }
        // Phases of v b v* predicted entrywise.
        let vbv = self.conj_b_pow(1);
        let mut predicted = vec![c64(0.0, 0.0); self.dim()];
        let six_n = 6.0 * n as f64;
        for k in 0..n {
            for alpha in 0..2usize {
                for eps in 0..2usize {
                    let idx = 3 * k + eps + alpha * 3 * n;
                    predicted[idx] =
                        phase((2 * k + eps) as f64 / six_n + alpha as f64 * 2.0 / 3.0);
                }
                let idx = 3 * k + 2 + alpha * 3 * n;
                predicted[idx] = phase((2 * k + alpha) as f64 / six_n + 1.0 / 3.0);
            }
        }
        let phases = vbv.max_abs_diff(&CMatrix::from_diagonal(&predicted));
        EquationResiduals {
            eq1_max: eq1,
            eq1_bound: 4.0 * std::f64::consts::PI / (3.0 * n as f64),
            eq2_max: eq2,
            eq2_bound: std::f64::consts::PI / n as f64,
            phase_residual: phases,
            intertwining_residual: intertwining,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EquationResiduals {
    /// `max_k ‖b²f_k − e^{2πik/n} f_k‖_∞`.
    pub eq1_max: f64,
    pub eq1_bound: f64,
    /// `max_k ‖b³g_k − e^{2πik/n} g_k‖_∞`.
    pub eq2_max: f64,
    pub eq2_bound: f64,
    /// Entrywise gap between `v b v*` and the predicted diagonal phases.
    pub phase_residual: f64,
    /// `max_k |v* f_k − g_k v*|`.
    pub intertwining_residual: f64,
}

/// The abelian algebra generated by `b²`, spanned by the pair projections
/// `q_k = e_k + e_{k+3n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct B0Algebra {
    n: usize,
}

impl B0Algebra {
    pub fn new(n: usize) -> Self {
        B0Algebra { n }
    }

    pub fn dim(&self) -> usize {
        6 * self.n
    }

    pub fn pairs(&self) -> usize {
        3 * self.n
    }

    pub fn q(&self, k: usize) -> ProjectionMatrix {
        ProjectionMatrix::diagonal_indicator(self.dim(), [k, k + 3 * self.n])
    }

    /// Pair averages `(m_kk + m_{k+3n,k+3n}) / 2`, one per `q_k`.
    pub fn pair_averages(&self, m: &CMatrix) -> Result<Vec<C64>> {
        m.check_dim(self.dim())?;
        let h = self.pairs();
        Ok((0..h)
            .map(|k| (m.get(k, k) + m.get(k + h, k + h)) * 0.5)
            .collect())
    }

    /// Expands per-pair coefficients into the diagonal matrix `Σ c_k q_k`.
    pub fn from_pair_coeffs(&self, coeffs: &[C64]) -> CMatrix {
        let h = self.pairs();
        let diag: Vec<C64> = (0..self.dim()).map(|i| coeffs[i % h]).collect();
        CMatrix::from_diagonal(&diag)
    }

    /// `E(m) = Σ_k q_k τ(q_k m)/τ(q_k)`.
    pub fn cond_exp(&self, m: &CMatrix) -> Result<CMatrix> {
        Ok(self.from_pair_coeffs(&self.pair_averages(m)?))
    }

    /// `Φ(m) = m − E(m)`.
    pub fn phi(&self, m: &CMatrix) -> Result<CMatrix> {
        Ok(m - &self.cond_exp(m)?)
    }

    /// Whether `m` lies in the span of the `q_k` up to `tol` entrywise.
    pub fn contains(&self, m: &CMatrix, tol: f64) -> bool {
        if m.dim() != self.dim() {
            return false;
        }
        match self.cond_exp(m) {
            Ok(e) => e.max_abs_diff(m) <= tol,
            Err(_) => false,
        }
    }
}

/// Measured quantities behind the three properties of the construction.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PropertyReport {
    pub n: usize,
    pub dim: usize,
    /// `‖v b³ v* − b²‖_∞`.
    pub relation_error: f64,
    /// `‖Φ(v b^α v*)‖₂` for α = 1, −1, 2, −2.
    pub centered_norm_plus1: f64,
    pub centered_norm_minus1: f64,
    pub centered_norm_plus2: f64,
    pub centered_norm_minus2: f64,
    /// `max_α ‖E(v b^α v*)‖₂` over α ∈ {±1, ±2}.
    pub expectation_norm_max: f64,
    /// Max `‖·‖_∞` over `E(b^{±1})`, `E(v b^α)`, `E(b^α v)`, `1 ≤ |α| ≤ p_max`.
    pub property3_residual: f64,
    /// The `E(b^{±1})` part of the above alone.
    pub property3_b_residual: f64,
    /// Same family as `property3_residual`, measured in `‖·‖₂`.
    pub property3_l2_residual: f64,
    pub p_max: i64,
    /// `‖P_n Φ(v b v*)‖₂`.
    pub pn_lower: f64,
    pub eq1_max: f64,
    pub eq2_max: f64,
    pub phase_residual: f64,
    pub intertwining_residual: f64,
}

impl PropertyReport {
    pub fn centered_norms(&self) -> [(i64, f64); 4] {
        [
            (1, self.centered_norm_plus1),
            (-1, self.centered_norm_minus1),
            (2, self.centered_norm_plus2),
            (-2, self.centered_norm_minus2),
        ]
    }

    pub fn min_centered_norm(&self) -> f64 {
        self.centered_norms()
            .iter()
            .map(|&(_, x)| x)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn verify_properties(rep: &ApproxRep) -> PropertyReport {
    verify_properties_with(rep, DEFAULT_P_MAX)
}

pub fn verify_properties_with(rep: &ApproxRep, p_max: i64) -> PropertyReport {
    let alg = rep.b0();
    let ce = |m: &CMatrix| alg.cond_exp(m).expect("dimension matches by construction");
    let ph = |m: &CMatrix| alg.phi(m).expect("dimension matches by construction");

    let relation_error = rep.conj_b_pow(3).dist(&rep.b_pow(2));

    let mut centered = [0.0; 4];
    let mut expectation_norm_max: f64 = 0.0;
    for (slot, alpha) in [1i64, -1, 2, -2].into_iter().enumerate() {
        let x = rep.conj_b_pow(alpha);
        centered[slot] = ph(&x).hs_norm();
        expectation_norm_max = expectation_norm_max.max(ce(&x).hs_norm());
    }

    let b_res = ce(&rep.b_pow(1)).op_norm().max(ce(&rep.b_pow(-1)).op_norm());
    let b_res_l2 = ce(&rep.b_pow(1)).hs_norm().max(ce(&rep.b_pow(-1)).hs_norm());
    let mut p3 = b_res;
    let mut p3_l2 = b_res_l2;
    let v = rep.v().matrix();
    for alpha in (-p_max..=p_max).filter(|&a| a != 0) {
        let ba = rep.b_pow(alpha);
        for m in [v * &ba, &ba * v] {
            let e = ce(&m);
            p3 = p3.max(e.op_norm());
            p3_l2 = p3_l2.max(e.hs_norm());
        }
    }

    let p = rep.test_projection();
    let pn_lower = (p.matrix() * &ph(&rep.conj_b_pow(1))).hs_norm();

    let eqs = rep.equation_residuals();
    PropertyReport {
        n: rep.n(),
        dim: rep.dim(),
        relation_error,
        centered_norm_plus1: centered[0],
        centered_norm_minus1: centered[1],
        centered_norm_plus2: centered[2],
        centered_norm_minus2: centered[3],
        expectation_norm_max,
        property3_residual: p3,
        property3_b_residual: b_res,
        property3_l2_residual: p3_l2,
        p_max,
        pn_lower,
        eq1_max: eqs.eq1_max,
        eq2_max: eqs.eq2_max,
        phase_residual: eqs.phase_residual,
        intertwining_residual: eqs.intertwining_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega6(k: i64) -> C64 {
        phase(k as f64 / 6.0)
    }

    #[test]
    fn build_one_matches_hand_values() {
        let rep = ApproxRep::build(1).unwrap();
        let b_expected = CMatrix::from_diagonal(&(0..6).map(omega6).collect::<Vec<_>>());
        assert!(rep.b().max_abs_diff(&b_expected) < 1e-14);
        // Oracle: permute the diagonal of b by hand.
        let vbv_expected = CMatrix::from_diagonal(&[0, 1, 2, 4, 5, 3].map(omega6));
        assert!(rep.conj_b_pow(1).max_abs_diff(&vbv_expected) < 1e-14);
    }

    #[test]
    fn sigma_is_a_bijection_and_v_is_a_permutation() {
        for n in 1..20 {
            let rep = ApproxRep::build(n).unwrap();
            let mut s = rep.sigma().to_vec();
            s.sort_unstable();
            assert_eq!(s, (0..6 * n).collect::<Vec<_>>());
            let v = rep.v().matrix();
            for i in 0..rep.dim() {
                for j in 0..rep.dim() {
                    let x = v.get(i, j);
                    assert!(x == c64(0.0, 0.0) || x == c64(1.0, 0.0));
                }
            }
        }
        assert!(check_bijection(&[0, 0]).is_err());
        assert!(check_bijection(&[0, 5]).is_err());
        assert!(ApproxRep::build(0).is_err());
    }

    #[test]
    fn traces_vanish_and_projection_traces() {
        for n in 1..10 {
            let rep = ApproxRep::build(n).unwrap();
            assert!(rep.b().normalized_trace().norm() < 1e-12);
            assert!(rep.conj_b_pow(1).normalized_trace().norm() < 1e-12);
            assert!((rep.test_projection().tau() - 1.0 / 6.0).abs() < 1e-14);
            for k in 0..n {
                assert!((rep.f(k).tau() - 1.0 / n as f64).abs() < 1e-14);
                assert!((rep.g(k).tau() - 1.0 / n as f64).abs() < 1e-14);
                let lhs = &rep.v().matrix().adjoint() * &(rep.f(k).matrix() * rep.v().matrix());
                assert_eq!(&lhs, rep.g(k).matrix());
            }
        }
    }

    #[test]
    fn defining_estimates_hold() {
        for n in 1..30 {
            let r = ApproxRep::build(n).unwrap().equation_residuals();
            assert!(r.eq1_max <= r.eq1_bound + 1e-12, "n={n} {r:?}");
            assert!(r.eq2_max <= r.eq2_bound + 1e-12, "n={n} {r:?}");
            assert!(r.phase_residual <= 1e-12, "n={n} {r:?}");
            assert!(r.intertwining_residual == 0.0);
        }
    }

    #[test]
    fn cond_exp_examples() {
        let rep = ApproxRep::build(1).unwrap();
        let alg = rep.b0();
        assert!(alg.cond_exp(&rep.b_pow(1)).unwrap().op_norm() < 1e-15);
        assert!(alg.cond_exp(&rep.b_pow(-1)).unwrap().op_norm() < 1e-15);
        let b2 = rep.b_pow(2);
        assert!(alg.cond_exp(&b2).unwrap().max_abs_diff(&b2) < 1e-15);

        let w = omega6;
        let avg = [(w(0) + w(4)) * 0.5, (w(1) + w(5)) * 0.5, (w(2) + w(3)) * 0.5];
        let expected = CMatrix::from_diagonal(&[avg[0], avg[1], avg[2], avg[0], avg[1], avg[2]]);
        let got = alg.cond_exp(&rep.conj_b_pow(1)).unwrap();
        assert!(got.max_abs_diff(&expected) < 1e-15);

        assert!(alg.cond_exp(&CMatrix::identity(5)).is_err());
    }

    #[test]
    fn cond_exp_is_idempotent_trace_preserving_and_positive() {
        let mut rng = crate::random::seeded(1);
        for n in 1..5 {
            let alg = B0Algebra::new(n);
            let m = crate::random::random_matrix(&mut rng, 6 * n);
            let e = alg.cond_exp(&m).unwrap();
            assert!(alg.cond_exp(&e).unwrap().max_abs_diff(&e) < 1e-14);
            assert!((e.normalized_trace() - m.normalized_trace()).norm() < 1e-12);
            assert!(alg.contains(&e, 1e-14));
            assert!(alg.cond_exp(&alg.phi(&m).unwrap()).unwrap().op_norm() < 1e-12);
            let pos: Vec<f64> = (0..6 * n).map(|i| (i % 5) as f64).collect();
            let ep = alg.cond_exp(&CMatrix::from_real_diagonal(&pos)).unwrap();
            assert!(ep.diagonal().iter().all(|z| z.re >= 0.0 && z.im == 0.0));
        }
    }

    #[test]
    fn phi_examples() {
        let rep = ApproxRep::build(1).unwrap();
        let alg = rep.b0();
        assert!(alg.phi(&rep.b_pow(2)).unwrap().op_norm() < 1e-15);
        assert!(alg.phi(&CMatrix::identity(6)).unwrap().op_norm() < 1e-15);
        // Oracle: entries (1−ω⁴)/2, (ω−ω⁵)/2, (ω²−ω³)/2 and their negatives.
        let w = omega6;
        let d = [(w(0) - w(4)) * 0.5, (w(1) - w(5)) * 0.5, (w(2) - w(3)) * 0.5];
        let oracle = CMatrix::from_diagonal(&[d[0], d[1], d[2], -d[0], -d[1], -d[2]]);
        let got = alg.phi(&rep.conj_b_pow(1)).unwrap();
        assert!(got.max_abs_diff(&oracle) < 1e-15);
        assert!((oracle.hs_norm() - (7.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert!((got.hs_norm() - 0.763_762_615_825_973_3).abs() < 1e-12);
    }

    /// Max phase gap `|1 − e^{iθ}|` of `v b³ v* − b²`, computed directly from
    /// the index map.
    fn relation_error_oracle(n: usize) -> f64 {
        let sigma = sigma_map(n);
        let dim = 6 * n as i128;
        sigma
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let gap = (3 * s as i128 - 2 * i as i128).rem_euclid(dim);
                (c64(1.0, 0.0) - phase(gap as f64 / dim as f64)).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn relation_error_matches_oracle_and_bound() {
        for n in [1, 2, 3, 8, 16] {
            let rep = ApproxRep::build(n).unwrap();
            let r = verify_properties(&rep);
            assert!((r.relation_error - relation_error_oracle(n)).abs() < 1e-12);
            assert!(r.relation_error * n as f64 <= 8.0);
        }
        let r16 = verify_properties(&ApproxRep::build(16).unwrap());
        assert!(r16.relation_error <= 0.5);
        // Closed form 2 sin(2π/3n).
        let closed = 2.0 * (std::f64::consts::TAU / 48.0).sin();
        assert!((r16.relation_error - closed).abs() < 1e-12);
    }

    #[test]
    fn centered_norms_and_pn_lower() {
        for n in 1..12 {
            let r = verify_properties(&ApproxRep::build(n).unwrap());
            assert!(r.min_centered_norm() >= 1.0 / 6.0, "{r:?}");
            let mechanism = (1.0 / 6.0) * (c64(1.0, 0.0) - phase(2.0 / 3.0)).norm() / 4.0;
            assert!(r.pn_lower.powi(2) >= mechanism);
            assert!((r.pn_lower.powi(2) - 0.125).abs() < 1e-12);
        }
        let r1 = verify_properties(&ApproxRep::build(1).unwrap());
        assert!((r1.centered_norm_plus1 - (7.0f64 / 12.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn b_expectations_vanish_but_fixed_points_of_v_do_not() {
        for n in 1..9 {
            let r = verify_properties(&ApproxRep::build(n).unwrap());
            assert!(r.property3_b_residual <= 1e-12);
            // σ fixes indices 0 and 1, so E(v b^α) keeps a 1/2 on q_0 and q_1.
            assert!((r.property3_residual - 0.5).abs() < 1e-12, "{r:?}");
            let expected_l2 = if n == 1 { (1.5f64 / 6.0).sqrt() } else { (1.0 / (6.0 * n as f64)).sqrt() };
            assert!((r.property3_l2_residual - expected_l2).abs() < 1e-12, "{r:?}");
        }
    }
}
