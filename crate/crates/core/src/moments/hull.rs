//! Membership in the convex hull of the 0/1 product vertices, by a
//! phase-one simplex.
//!
//! The system is `Σ_S w_S = 1`, `Σ_S w_S ε(S) = λ`, `w ≥ 0`. At a phase-one
//! optimum with positive value the simplex multipliers `y` satisfy
//! `yᵀA ≤ 0` and `yᵀb > 0` (Farkas), which is a functional separating `λ`
//! from every vertex.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::pairs::{pair_count, Atom, HullVertexSet, PairMoments};
use crate::error::{Error, Result};

pub const HULL_MAX_N: usize = 12;
pub const HULL_TOL: f64 = 1e-8;
const PIVOT_TOL: f64 = 1e-12;
const DEGENERATE_LIMIT: usize = 50;

/// `c · λ > offset ≥ c · ε(S)` for every vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatingFunctional {
    /// One coefficient per pair, in the [`PairMoments`] order.
    pub coeffs: Vec<f64>,
    pub offset: f64,
    /// `c · λ − max_S c · ε(S)`, positive when the certificate is valid.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullResult {
    pub member: bool,
    /// Nonzero weights as `(subset bitmask, weight)`, bit `i-1` for index `i`.
    pub weights: Vec<(u32, f64)>,
    /// `max |Σ w_S ε(S) − λ|` including the weight-sum row.
    pub residual: f64,
    pub certificate: Option<SeparatingFunctional>,
}

impl SeparatingFunctional {
    pub fn value(&self, pm: &PairMoments) -> f64 {
        self.coeffs.iter().zip(pm.values()).map(|(c, x)| c * x).sum()
    }

    /// Rechecks `c · λ > offset ≥ c · ε(S)` over all `2ⁿ` vertices, with
    /// `slack` allowed on the vertex side.
    pub fn separates(&self, pm: &PairMoments, slack: f64) -> bool {
        self.coeffs.len() == pm.values().len()
            && pm.n() <= HULL_MAX_N
            && self.value(pm) > self.offset
            && (0..1u32 << pm.n()).all(|s| self.value(&HullVertexSet::vertex(pm.n(), s)) <= self.offset + slack)
    }
}

impl HullResult {
    /// The weights as atoms of an abelian realization.
    pub fn atoms(&self, n: usize) -> Vec<Atom> {
        self.weights
            .iter()
            .map(|&(s, w)| Atom { weight: w, members: (0..n).map(|i| (s >> i) & 1 == 1).collect() })
            .collect()
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; the last row holds reduced
    /// costs, the last column right-hand sides.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        let pivot_row: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    self.t[r * w + c] -= f * pivot_row[c];
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimizes the objective row. Entering columns follow the most
    /// negative reduced cost; after a run of degenerate pivots the rule
    /// switches to Bland's (lowest index), which cannot cycle.
    fn run(&mut self) {
        let obj = self.rows;
        let mut degenerate_run = 0;
        loop {
            let candidates = (0..self.cols).filter(|&c| self.at(obj, c) < -PIVOT_TOL);
            let entering = if degenerate_run > DEGENERATE_LIMIT {
                candidates.min()
            } else {
                candidates.min_by(|&x, &y| self.at(obj, x).total_cmp(&self.at(obj, y)))
            };
            let Some(pc) = entering else {
                return;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    let better = match best {
                        None => true,
                        Some((b, _, bvar)) => ratio < b - PIVOT_TOL || (ratio <= b + PIVOT_TOL && self.basis[r] < bvar),
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            // Phase one is bounded below by zero, so a pivot row exists.
            let (ratio, pr, _) = best.expect("phase-one objective is bounded");
            degenerate_run = if ratio <= PIVOT_TOL { degenerate_run + 1 } else { 0 };
            self.pivot(pr, pc);
        }
    }
}

/// Decides whether `pm` is a convex combination of the product vertices.
pub fn hull_membership(pm: &PairMoments) -> Result<HullResult> {
    let n = pm.n();
    if n > HULL_MAX_N {
        return Err(Error::Precondition(format!("hull membership supports n ≤ {HULL_MAX_N}, got {n}")));
    }
    let vertices = HullVertexSet::new(n);
    let nv = vertices.vertices().len();
    let m = 1 + pair_count(n);

    // Rows: weight sum, then one row per pair. Rows with negative right-hand
    // side are negated so the artificial basis starts feasible.
    let mut a = vec![vec![0.0; nv]; m];
    let mut b = vec![1.0; m];
    for (s, v) in vertices.vertices().iter().enumerate() {
        a[0][s] = 1.0;
        for (k, &x) in v.values().iter().enumerate() {
            a[k + 1][s] = x;
        }
    }
    b[1..].copy_from_slice(pm.values());
    let sign: Vec<f64> = b.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect();

    let cols = nv + m;
    let w = cols + 1;
    let mut t = vec![0.0; (m + 1) * w];
    for r in 0..m {
        for c in 0..nv {
            t[r * w + c] = sign[r] * a[r][c];
        }
        t[r * w + nv + r] = 1.0;
        t[r * w + cols] = sign[r] * b[r];
    }
    // Reduced costs for cost 1 on artificials with the artificial basis.
    for c in 0..=cols {
        let cost = if (nv..cols).contains(&c) { 1.0 } else { 0.0 };
        let col_sum: f64 = (0..m).map(|r| t[r * w + c]).sum();
        t[m * w + c] = cost - col_sum;
    }
    let mut tab = Tableau { rows: m, cols, t, basis: (nv..cols).collect() };
    tab.run();

    // The tableau drifts over many pivots, so primal values and multipliers
    // are recomputed from the final basis against the original columns.
    let column = |c: usize, r: usize| if c < nv { sign[r] * a[r][c] } else if c - nv == r { 1.0 } else { 0.0 };
    let basis_matrix = DMatrix::from_fn(m, m, |r, k| column(tab.basis[k], r));
    let signed_b = DVector::from_fn(m, |r, _| sign[r] * b[r]);
    let cost_b = DVector::from_fn(m, |k, _| if tab.basis[k] >= nv { 1.0 } else { 0.0 });
    let lu = basis_matrix.clone().lu();
    let (Some(x_b), Some(y_signed)) = (lu.solve(&signed_b), basis_matrix.transpose().lu().solve(&cost_b)) else {
        return Err(Error::Verification("final simplex basis is singular".into()));
    };

    let infeasibility = cost_b.dot(&x_b);
    let mut weights = vec![0.0; nv];
    for (k, &c) in tab.basis.iter().enumerate() {
        if c < nv {
            weights[c] = x_b[k].max(0.0);
        }
    }
    let residual = (0..m)
        .map(|r| ((0..nv).map(|s| a[r][s] * weights[s]).sum::<f64>() - b[r]).abs())
        .fold(0.0, f64::max);

    if infeasibility <= HULL_TOL && residual <= HULL_TOL {
        let weights = weights.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(s, &x)| (s as u32, x)).collect();
        return Ok(HullResult { member: true, weights, residual, certificate: None });
    }

    let y: Vec<f64> = (0..m).map(|r| sign[r] * y_signed[r]).collect();
    let coeffs = y[1..].to_vec();
    let offset = -y[0];
    let value = |v: &[f64]| coeffs.iter().zip(v).map(|(c, x)| c * x).sum::<f64>();
    let vertex_max = vertices.vertices().iter().map(|v| value(v.values())).fold(f64::NEG_INFINITY, f64::max);
    let margin = value(pm.values()) - vertex_max;
    if !(margin > 0.0) {
        return Err(Error::Verification(format!(
            "phase one left infeasibility {infeasibility:.3e}, residual {residual:.3e}, but the dual functional does not separate (margin {margin:.3e})"
        )));
    }
    Ok(HullResult {
        member: false,
        weights: Vec::new(),
        residual,
        certificate: Some(SeparatingFunctional { coeffs, offset, margin }),
    })
}
