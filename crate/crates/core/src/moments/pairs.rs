//! Pair moments `λ_ij = τ(e_i e_j)` of projection tuples.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ProjectionMatrix;

/// `λ_ij` for `1 ≤ i ≤ j ≤ n`, stored row by row:
/// `(1,1), (1,2), …, (1,n), (2,2), …, (n,n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    n: usize,
    values: Vec<f64>,
}

pub(crate) fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(i, j)`, 0-based with `i ≤ j`, in the row-by-row order.
pub(crate) fn pair_position(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl PairMoments {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("need at least one projection".into()));
        }
        if values.len() != pair_count(n) {
            return Err(Error::DimensionMismatch { expected: pair_count(n), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("pair moments must be finite".into()));
        }
        Ok(PairMoments { n, values })
    }

    /// Builds from a closure over 1-based `(i, j)` with `i ≤ j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(pair_count(n));
        for i in 1..=n {
            for j in i..=n {
                values.push(f(i, j));
            }
        }
        PairMoments { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `λ_ij` with 1-based, unordered indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!((1..=self.n).contains(&i) && (1..=self.n).contains(&j));
        self.values[pair_position(self.n, i - 1, j - 1)]
    }

    /// Pairs `(i, j)` breaking `0 ≤ λ_ij ≤ min(λ_ii, λ_jj) ≤ 1`.
    pub fn invariant_violations(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for i in 1..=self.n {
            for j in i..=self.n {
                let v = self.get(i, j);
                let cap = self.get(i, i).min(self.get(j, j));
                if v < -tol || v > 1.0 + tol || v > cap + tol {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,lambda\n");
        for i in 1..=self.n {
            for j in i..=self.n {
                let _ = writeln!(out, "{i},{j},{:.16e}", self.get(i, j));
            }
        }
        out
    }
}

/// The `2ⁿ` 0/1 pair-moment vectors `ε_ij = [i ∈ S and j ∈ S]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullVertexSet {
    n: usize,
    vertices: Vec<PairMoments>,
}

impl HullVertexSet {
    pub fn new(n: usize) -> Self {
        assert!((1..=20).contains(&n));
        let vertices = (0..1u32 << n).map(|s| Self::vertex(n, s)).collect();
        HullVertexSet { n, vertices }
    }

    /// Vertex for the subset with bitmask `s` (bit `i - 1` for index `i`).
    pub fn vertex(n: usize, s: u32) -> PairMoments {
        PairMoments::from_fn(n, |i, j| f64::from(((s >> (i - 1)) & (s >> (j - 1)) & 1) as u8))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[PairMoments] {
        &self.vertices
    }
}

/// `λ_ij = τ(e_i e_j)`.
pub fn projection_moments(es: &[ProjectionMatrix]) -> Result<PairMoments> {
    let first = es.first().ok_or_else(|| Error::Precondition("empty projection tuple".into()))?;
    let d = first.dim();
    for e in es {
        e.check_dim(d)?;
    }
    let n = es.len();
    Ok(PairMoments::from_fn(n, |i, j| (es[i - 1].matrix() * es[j - 1].matrix()).normalized_trace().re))
}

/// A point mass of an abelian measure space with the sets it lies in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    pub members: Vec<bool>,
}

/// Pair moments of indicator functions: `λ_ij` is the mass of the atoms
/// lying in both `A_i` and `A_j`.
pub fn simulate_abelian(n: usize, atoms: &[Atom]) -> Result<PairMoments> {
    let sum: f64 = atoms.iter().map(|a| a.weight).sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::WeightSum { sum });
    }
    for a in atoms {
        if !(a.weight > 0.0) {
            return Err(Error::Precondition(format!("atom weight {} is not positive", a.weight)));
        }
        if a.members.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.members.len() });
        }
    }
    Ok(PairMoments::from_fn(n, |i, j| {
        atoms.iter().filter(|a| a.members[i - 1] && a.members[j - 1]).map(|a| a.weight).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn layout() {
        let pm = PairMoments::from_fn(3, |i, j| (10 * i + j) as f64);
        assert_eq!(pm.values(), &[11.0, 12.0, 13.0, 22.0, 23.0, 33.0]);
        assert_eq!(pm.get(3, 2), 23.0);
        assert!(PairMoments::new(2, vec![0.0; 4]).is_err());
    }

    #[test]
    fn projection_examples() {
        let id = ProjectionMatrix::identity(2);
        let pm = projection_moments(&[id.clone(), id]).unwrap();
        assert_eq!(pm.values(), &[1.0, 1.0, 1.0]);

        let e1 = ProjectionMatrix::diagonal_indicator(2, [0]);
        let e2 = ProjectionMatrix::diagonal_indicator(2, [1]);
        let pm = projection_moments(&[e1.clone(), e2]).unwrap();
        assert_eq!(pm.values(), &[0.5, 0.0, 0.5]);

        let r = ProjectionMatrix::rank_one(&[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        let pm = projection_moments(&[e1, r]).unwrap();
        assert!((pm.get(1, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn abelian_examples() {
        let atoms = [
            Atom { weight: 0.5, members: vec![true, false] },
            Atom { weight: 0.5, members: vec![false, true] },
        ];
        assert_eq!(simulate_abelian(2, &atoms).unwrap().values(), &[0.5, 0.0, 0.5]);
        let atoms = [Atom { weight: 1.0, members: vec![true, true] }];
        assert_eq!(simulate_abelian(2, &atoms).unwrap().values(), &[1.0, 1.0, 1.0]);
        // [0, 1/2] and [1/4, 3/4] on four quarters
        let quarters = [[true, false], [true, true], [false, true], [false, false]];
        let atoms: Vec<Atom> = quarters.iter().map(|m| Atom { weight: 0.25, members: m.to_vec() }).collect();
        assert_eq!(simulate_abelian(2, &atoms).unwrap().values(), &[0.5, 0.25, 0.5]);
        let bad = [Atom { weight: 0.4, members: vec![true] }];
        assert!(matches!(simulate_abelian(1, &bad), Err(Error::WeightSum { .. })));
    }

    #[test]
    fn vertices_are_products() {
        let hv = HullVertexSet::new(4);
        assert_eq!(hv.vertices().len(), 16);
        for v in hv.vertices() {
            for i in 1..=4 {
                for j in 1..=4 {
                    assert_eq!(v.get(i, j), v.get(i, i) * v.get(j, j));
                }
            }
        }
    }

    #[test]
    fn invariant_detection() {
        let ok = PairMoments::new(2, vec![0.5, 0.25, 0.5]).unwrap();
        assert!(ok.invariant_violations(1e-12).is_empty());
        let bad = PairMoments::new(2, vec![0.5, 0.5, 0.25]).unwrap();
        assert_eq!(bad.invariant_violations(1e-12), vec![(1, 2)]);
    }
}
