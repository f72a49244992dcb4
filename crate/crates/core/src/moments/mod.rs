//! Moment vectors of unitary tuples and pair moments of projection tuples,
//! with matrix-level witnesses for their closure properties.

mod hull;
mod pairs;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, phase, CMatrix, UnitaryMatrix, C64};

pub use hull::{hull_membership, HullResult, SeparatingFunctional, HULL_MAX_N, HULL_TOL};
pub use pairs::{projection_moments, simulate_abelian, Atom, HullVertexSet, PairMoments};

pub const MAX_WORD_LENGTH: usize = 6;
const WITNESS_TOL: f64 = 1e-10;

/// All index tuples of length `1..=p` over `1..=n`, in dictionary order:
/// `(1), (1,1), (1,2), (2), (2,1), (2,2)` for `n = p = 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentIndexSet {
    n: usize,
    p: usize,
    indices: Vec<Vec<usize>>,
}

impl MomentIndexSet {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 || p > MAX_WORD_LENGTH {
            return Err(Error::Precondition(format!("need n ≥ 1 and 1 ≤ p ≤ {MAX_WORD_LENGTH}, got n={n}, p={p}")));
        }
        let mut indices = Vec::new();
        let mut stack = Vec::new();
        fn walk(n: usize, p: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            for i in 1..=n {
                stack.push(i);
                out.push(stack.clone());
                if stack.len() < p {
                    walk(n, p, stack, out);
                }
                stack.pop();
            }
        }
        walk(n, p, &mut stack, &mut indices);
        Ok(MomentIndexSet { n, p, indices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, index: &[usize]) -> Option<usize> {
        self.indices.binary_search_by(|x| x.as_slice().cmp(index)).ok()
    }
}

pub fn format_index(index: &[usize]) -> String {
    let parts: Vec<String> = index.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub index: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// `λ_I = τ(u_{i₁} ⋯ u_{i_k})` for every `I` in the index set.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    index_set: MomentIndexSet,
    values: Vec<C64>,
}

impl MomentVector {
    pub fn new(index_set: MomentIndexSet, values: Vec<C64>) -> Result<Self> {
        if values.len() != index_set.len() {
            return Err(Error::DimensionMismatch { expected: index_set.len(), found: values.len() });
        }
        Ok(MomentVector { index_set, values })
    }

    pub fn constant(index_set: MomentIndexSet, value: C64) -> Self {
        let values = vec![value; index_set.len()];
        MomentVector { index_set, values }
    }

    pub fn index_set(&self) -> &MomentIndexSet {
        &self.index_set
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> Option<C64> {
        self.index_set.position(index).map(|k| self.values[k])
    }

    pub fn max_abs_diff(&self, other: &MomentVector) -> Result<f64> {
        check_same(self, other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Whether every value is within `tol` of 0 or 1, i.e. the vector is
    /// a 0/1 moment pattern.
    pub fn is_zero_one(&self, tol: f64) -> bool {
        self.values.iter().all(|z| z.norm() <= tol || (z - c64(1.0, 0.0)).norm() <= tol)
    }

    pub fn entries(&self) -> Vec<MomentEntry> {
        self.index_set
            .indices
            .iter()
            .zip(&self.values)
            .map(|(i, z)| MomentEntry { index: i.clone(), re: z.re, im: z.im })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, z) in self.index_set.indices.iter().zip(&self.values) {
            let idx: Vec<String> = i.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{},{:.16e},{:.16e}", idx.join(" "), z.re, z.im);
        }
        out
    }
}

impl Serialize for MomentVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n: usize,
            p: usize,
            moments: Vec<MomentEntry>,
        }
        Repr { n: self.index_set.n, p: self.index_set.p, moments: self.entries() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            p: usize,
            moments: Vec<MomentEntry>,
        }
        let r = Repr::deserialize(d)?;
        let set = MomentIndexSet::new(r.n, r.p).map_err(serde::de::Error::custom)?;
        if r.moments.len() != set.len() || r.moments.iter().zip(&set.indices).any(|(m, i)| &m.index != i) {
            return Err(serde::de::Error::custom("moments are not in index order"));
        }
        let values = r.moments.iter().map(|m| c64(m.re, m.im)).collect();
        Ok(MomentVector { index_set: set, values })
    }
}

fn check_same(x: &MomentVector, y: &MomentVector) -> Result<()> {
    if x.index_set != y.index_set {
        return Err(Error::IndexMismatch(format!(
            "(n={}, p={}) vs (n={}, p={})",
            x.index_set.n, x.index_set.p, y.index_set.n, y.index_set.p
        )));
    }
    Ok(())
}

fn common_dim(us: &[UnitaryMatrix]) -> Result<usize> {
    let first = us.first().ok_or_else(|| Error::Precondition("empty unitary tuple".into()))?;
    let d = first.dim();
    for u in us {
        u.check_dim(d)?;
    }
    Ok(d)
}

/// Moments of a unitary tuple, reusing prefix products.
pub fn unitary_moments(us: &[UnitaryMatrix], p: usize) -> Result<MomentVector> {
    common_dim(us)?;
    let set = MomentIndexSet::new(us.len(), p)?;
    let mut values = Vec::with_capacity(set.len());
    fn walk(us: &[UnitaryMatrix], p: usize, prefix: Option<&CMatrix>, out: &mut Vec<C64>) {
        for u in us {
            let prod = match prefix {
                Some(pre) => pre * u.matrix(),
                None => u.matrix().clone(),
            };
            out.push(prod.normalized_trace());
            if p > 1 {
                walk(us, p - 1, Some(&prod), out);
            }
        }
    }
    walk(us, p, None, &mut values);
    Ok(MomentVector { index_set: set, values })
}

pub fn pointwise_product(x: &MomentVector, y: &MomentVector) -> Result<MomentVector> {
    check_same(x, y)?;
    let values = x.values.iter().zip(&y.values).map(|(a, b)| a * b).collect();
    Ok(MomentVector { index_set: x.index_set.clone(), values })
}

/// The tuple `(u_i ⊗ w_i)`.
pub fn kron_realize(us: &[UnitaryMatrix], ws: &[UnitaryMatrix]) -> Result<Vec<UnitaryMatrix>> {
    if us.len() != ws.len() {
        return Err(Error::IndexMismatch(format!("{} vs {} unitaries", us.len(), ws.len())));
    }
    common_dim(us)?;
    common_dim(ws)?;
    Ok(us.iter().zip(ws).map(|(u, w)| u.kron(w)).collect())
}

/// The tuple `(u_i ⊕ w_i)`.
pub fn direct_sum_realize(us: &[UnitaryMatrix], ws: &[UnitaryMatrix]) -> Result<Vec<UnitaryMatrix>> {
    if us.len() != ws.len() {
        return Err(Error::IndexMismatch(format!("{} vs {} unitaries", us.len(), ws.len())));
    }
    common_dim(us)?;
    common_dim(ws)?;
    Ok(us.iter().zip(ws).map(|(u, w)| u.direct_sum(w)).collect())
}

/// `t x + (1 - t) y` with `t = d₁ / (d₁ + d₂)`.
pub fn convex_combine(x: &MomentVector, d1: usize, y: &MomentVector, d2: usize) -> Result<MomentVector> {
    check_same(x, y)?;
    if d1 == 0 || d2 == 0 {
        return Err(Error::Precondition("block dimensions must be positive".into()));
    }
    let t = d1 as f64 / (d1 + d2) as f64;
    let values = x.values.iter().zip(&y.values).map(|(a, b)| a * t + b * (1.0 - t)).collect();
    Ok(MomentVector { index_set: x.index_set.clone(), values })
}

/// A moment vector computed two ways: by formula and from a realizing
/// tuple.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub formula: MomentVector,
    pub realized: MomentVector,
    pub residual: f64,
}

impl Witness {
    fn checked(formula: MomentVector, realized: MomentVector, tol: f64) -> Result<Self> {
        let residual = formula.max_abs_diff(&realized)?;
        if residual > tol {
            return Err(Error::Verification(format!("witness residual {residual:.3e} exceeds {tol:.1e}")));
        }
        Ok(Witness { formula, realized, residual })
    }
}

/// Moments of `(u_i ⊗ w_i)` against the pointwise product.
pub fn kron_witness(us: &[UnitaryMatrix], ws: &[UnitaryMatrix], p: usize) -> Result<Witness> {
    let formula = pointwise_product(&unitary_moments(us, p)?, &unitary_moments(ws, p)?)?;
    let realized = unitary_moments(&kron_realize(us, ws)?, p)?;
    Witness::checked(formula, realized, WITNESS_TOL)
}

/// Moments of `(u_i ⊕ w_i)` against the trace-weighted average.
pub fn direct_sum_witness(us: &[UnitaryMatrix], ws: &[UnitaryMatrix], p: usize) -> Result<Witness> {
    let x = unitary_moments(us, p)?;
    let y = unitary_moments(ws, p)?;
    let formula = convex_combine(&x, us[0].dim(), &y, ws[0].dim())?;
    let realized = unitary_moments(&direct_sum_realize(us, ws)?, p)?;
    Witness::checked(formula, realized, WITNESS_TOL)
}

/// Zeroes every moment whose index mentions the first unitary.
pub fn gauge_average(x: &MomentVector) -> MomentVector {
    let values = x
        .index_set
        .indices
        .iter()
        .zip(&x.values)
        .map(|(i, z)| if i.contains(&1) { C64::default() } else { *z })
        .collect();
    MomentVector { index_set: x.index_set.clone(), values }
}

/// Average of the moments of `(ζ u₁, u₂, …)` over the `(p+1)`-th roots of
/// unity `ζ`. Each moment is a monomial of degree at most `p` in `ζ`, so
/// this equals [`gauge_average`] of the moments of `us`.
pub fn root_of_unity_average(us: &[UnitaryMatrix], p: usize) -> Result<MomentVector> {
    let set = MomentIndexSet::new(us.len(), p)?;
    let mut acc = vec![C64::default(); set.len()];
    let count = p + 1;
    for k in 0..count {
        let zeta = phase(k as f64 / count as f64);
        let mut twisted = us.to_vec();
        twisted[0] = us[0].scale_phase(zeta);
        let m = unitary_moments(&twisted, p)?;
        for (a, v) in acc.iter_mut().zip(&m.values) {
            *a += v;
        }
    }
    let values = acc.into_iter().map(|z| z / count as f64).collect();
    Ok(MomentVector { index_set: set, values })
}

/// Gauge average against the root-of-unity average, tolerance `1e-12`.
pub fn gauge_witness(us: &[UnitaryMatrix], p: usize) -> Result<Witness> {
    let formula = gauge_average(&unitary_moments(us, p)?);
    let realized = root_of_unity_average(us, p)?;
    Witness::checked(formula, realized, 1e-12)
}

/// Appends the adjoints `u_i*` as extra unitaries, so moments of the
/// longer tuple include words with inverses.
pub fn augment_with_adjoints(us: &[UnitaryMatrix]) -> Vec<UnitaryMatrix> {
    us.iter().cloned().chain(us.iter().map(UnitaryMatrix::adjoint)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unitary, seeded};
    use rand::Rng;

    fn diag(entries: &[C64]) -> UnitaryMatrix {
        UnitaryMatrix::from_diagonal(entries).unwrap()
    }

    #[test]
    fn index_order_and_count() {
        let s = MomentIndexSet::new(2, 2).unwrap();
        assert_eq!(s.indices(), &[vec![1], vec![1, 1], vec![1, 2], vec![2], vec![2, 1], vec![2, 2]]);
        for (n, p) in [(1, 6), (3, 3), (2, 5), (4, 2)] {
            let s = MomentIndexSet::new(n, p).unwrap();
            let expected: usize = (1..=p as u32).map(|k| n.pow(k)).sum();
            assert_eq!(s.len(), expected);
            assert!(s.indices().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(s.position(&s.indices()[expected / 2]), Some(expected / 2));
        }
        assert!(MomentIndexSet::new(2, 7).is_err());
        assert!(MomentIndexSet::new(0, 1).is_err());
    }

    #[test]
    fn unitary_moment_examples() {
        let u = diag(&[c64(1.0, 0.0), c64(-1.0, 0.0)]);
        let m = unitary_moments(&[u], 2).unwrap();
        assert!(m.get(&[1]).unwrap().norm() < 1e-15);
        assert!((m.get(&[1, 1]).unwrap() - c64(1.0, 0.0)).norm() < 1e-15);

        let id = UnitaryMatrix::identity(3);
        let m = unitary_moments(&[id.clone(), id], 1).unwrap();
        assert_eq!(m.values(), &[c64(1.0, 0.0), c64(1.0, 0.0)]);

        let u = diag(&[c64(1.0, 0.0), c64(0.0, 1.0)]);
        let m = unitary_moments(&[u], 2).unwrap();
        assert!((m.get(&[1]).unwrap() - c64(0.5, 0.5)).norm() < 1e-15);
        assert!(m.get(&[1, 1]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn moments_match_direct_products() {
        let mut rng = seeded(31);
        let us: Vec<UnitaryMatrix> = (0..3).map(|_| random_unitary(&mut rng, 3)).collect();
        let m = unitary_moments(&us, 3).unwrap();
        for (idx, val) in m.index_set().indices().iter().zip(m.values()) {
            let mut prod = CMatrix::identity(3);
            for &i in idx {
                prod = &prod * us[i - 1].matrix();
            }
            assert!((prod.normalized_trace() - val).norm() < 1e-13);
            assert!(val.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let r = unitary_moments(&[UnitaryMatrix::identity(2), UnitaryMatrix::identity(3)], 1);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pointwise_examples() {
        let u = diag(&[c64(1.0, 0.0), c64(0.0, 1.0)]);
        let x = unitary_moments(&[u.clone()], 2).unwrap();
        let ones = MomentVector::constant(x.index_set().clone(), c64(1.0, 0.0));
        assert_eq!(pointwise_product(&x, &ones).unwrap(), x);
        let zeros = MomentVector::constant(x.index_set().clone(), C64::default());
        assert!(pointwise_product(&x, &zeros).unwrap().values().iter().all(|z| z.norm() == 0.0));
        let w = kron_witness(&[u.clone()], &[u], 2).unwrap();
        assert!((w.realized.get(&[1]).unwrap() - c64(0.0, 0.5)).norm() < 1e-15);
        let other = MomentVector::constant(MomentIndexSet::new(1, 3).unwrap(), C64::default());
        assert!(matches!(pointwise_product(&x, &other), Err(Error::IndexMismatch(_))));
    }

    #[test]
    fn convex_examples() {
        let plus = diag(&[c64(1.0, 0.0)]);
        let minus = diag(&[c64(-1.0, 0.0)]);
        let w = direct_sum_witness(&[plus.clone()], &[minus.clone()], 1).unwrap();
        assert!(w.realized.get(&[1]).unwrap().norm() < 1e-15);
        // d₁ = 1, d₂ = 3 puts weight 1/4 on the first block.
        let minus3 = UnitaryMatrix::identity(3).scale_phase(c64(-1.0, 0.0));
        let w = direct_sum_witness(&[plus], &[minus3], 1).unwrap();
        assert!((w.realized.get(&[1]).unwrap() - c64(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gauge_examples() {
        let mut rng = seeded(32);
        let u = random_unitary(&mut rng, 3);
        let g = gauge_average(&unitary_moments(&[u], 3).unwrap());
        assert!(g.values().iter().all(|z| z.norm() == 0.0));

        let us: Vec<UnitaryMatrix> = (0..2).map(|_| random_unitary(&mut rng, 2)).collect();
        let x = unitary_moments(&us, 2).unwrap();
        let g = gauge_average(&x);
        for idx in [vec![2], vec![2, 2]] {
            assert_eq!(g.get(&idx), x.get(&idx));
        }
        for idx in [vec![1], vec![1, 2], vec![2, 1], vec![1, 1]] {
            assert_eq!(g.get(&idx), Some(C64::default()));
        }

        let u = diag(&[c64(1.0, 0.0), c64(0.0, 1.0)]);
        gauge_witness(&[u], 2).unwrap();
    }

    #[test]
    fn random_witnesses() {
        let mut rng = seeded(33);
        for _ in 0..200 {
            let n = rng.random_range(1..=3);
            let p = rng.random_range(1..=3);
            let d1 = rng.random_range(1..=4);
            let d2 = rng.random_range(1..=4);
            let us: Vec<UnitaryMatrix> = (0..n).map(|_| random_unitary(&mut rng, d1)).collect();
            let ws: Vec<UnitaryMatrix> = (0..n).map(|_| random_unitary(&mut rng, d2)).collect();
            kron_witness(&us, &ws, p).unwrap();
            direct_sum_witness(&us, &ws, p).unwrap();
            gauge_witness(&us, p).unwrap();
        }
    }

    #[test]
    fn zero_one_patterns() {
        let u = diag(&[c64(1.0, 0.0), c64(1.0, 0.0)]);
        assert!(unitary_moments(&[u], 3).unwrap().is_zero_one(1e-8));
        let u = diag(&[c64(1.0, 0.0), c64(0.0, 1.0)]);
        assert!(!unitary_moments(&[u], 2).unwrap().is_zero_one(1e-8));
    }

    #[test]
    fn adjoint_augmentation_gives_unit_words() {
        let mut rng = seeded(34);
        let u = random_unitary(&mut rng, 3);
        let m = unitary_moments(&augment_with_adjoints(&[u]), 2).unwrap();
        assert!((m.get(&[1, 2]).unwrap() - c64(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn serde_and_csv() {
        let u = diag(&[c64(1.0, 0.0), c64(0.0, 1.0)]);
        let m = unitary_moments(&[u], 2).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: MomentVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let csv = m.to_csv();
        assert!(csv.starts_with("index,re,im\n1,"));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(format_index(&[1, 2]), "(1,2)");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn moments_bounded_and_identity_is_one(seed in any::<u64>(), n in 1usize..=3, p in 1usize..=3, d in 1usize..=4) {
                let mut rng = seeded(seed);
                let mut us: Vec<UnitaryMatrix> = (0..n).map(|_| random_unitary(&mut rng, d)).collect();
                let m = unitary_moments(&us, p).unwrap();
                prop_assert!(m.values().iter().all(|z| z.norm() <= 1.0 + 1e-12));
                us[0] = UnitaryMatrix::identity(d);
                let m = unitary_moments(&us, p).unwrap();
                let ones: Vec<usize> = vec![1; p];
                prop_assert!((m.get(&ones).unwrap() - c64(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }
}
