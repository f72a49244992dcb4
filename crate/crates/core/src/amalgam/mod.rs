//! Exact conditional expectation on the amalgamated free product of
//! `L(ℤ) ⊗ B₀` and the matrix algebra `M₆ₙ`, amalgamated over `B₀`.
//!
//! `a₁` is a formal Haar unitary commuting with `B₀`, so an element of the
//! first algebra is a finite Laurent series `Σ a₁^α ⊗ c_α` with `c_α ∈ B₀`.
//! `B₀` elements are stored as their pair coefficients (one per `q_k`).

mod monte_carlo;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::approx::{ApproxRep, B0Algebra};
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, C64};
use crate::words::{britton_is_identity, A13Report, GroupWord, Syllable};

pub use monte_carlo::{monte_carlo_tau, McConfig, McEstimate};

/// Maximum number of letters after merging.
pub const LENGTH_GUARD: usize = 14;

const B0_TOL: f64 = 1e-12;
const PRUNE: f64 = 1e-14;

/// `Σ_α a₁^α ⊗ c_α`, coefficients as pair vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ZElement {
    pairs: usize,
    terms: BTreeMap<i64, Vec<C64>>,
}

impl ZElement {
    pub fn zero(b0: &B0Algebra) -> Self {
        ZElement { pairs: b0.pairs(), terms: BTreeMap::new() }
    }

    /// `a₁^α ⊗ 1`.
    pub fn generator(b0: &B0Algebra, alpha: i64) -> Self {
        Self::from_pair_coeffs(b0, alpha, vec![c64(1.0, 0.0); b0.pairs()])
    }

    /// `a₁^α ⊗ c`; `c` must lie in `B₀`.
    pub fn monomial(b0: &B0Algebra, alpha: i64, c: &CMatrix) -> Result<Self> {
        if !b0.contains(c, B0_TOL) {
            c.check_dim(b0.dim())?;
            return Err(Error::Precondition("coefficient is not in the pair-projection algebra".into()));
        }
        Ok(Self::from_pair_coeffs(b0, alpha, b0.pair_averages(c)?))
    }

    pub fn from_pair_coeffs(b0: &B0Algebra, alpha: i64, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), b0.pairs());
        let mut terms = BTreeMap::new();
        terms.insert(alpha, coeffs);
        ZElement { pairs: b0.pairs(), terms }
    }

    pub fn add_term(&mut self, alpha: i64, coeffs: &[C64]) {
        assert_eq!(coeffs.len(), self.pairs);
        let slot = self.terms.entry(alpha).or_insert_with(|| vec![C64::default(); coeffs.len()]);
        for (s, c) in slot.iter_mut().zip(coeffs) {
            *s += c;
        }
    }

    pub fn terms(&self) -> &BTreeMap<i64, Vec<C64>> {
        &self.terms
    }

    pub fn coefficient(&self, b0: &B0Algebra, alpha: i64) -> CMatrix {
        match self.terms.get(&alpha) {
            Some(c) => b0.from_pair_coeffs(c),
            None => CMatrix::zeros(b0.dim()),
        }
    }

    fn expectation(&self) -> Vec<C64> {
        self.terms.get(&0).cloned().unwrap_or_else(|| vec![C64::default(); self.pairs])
    }

    fn centered(&self) -> Self {
        let mut c = self.clone();
        c.terms.remove(&0);
        c
    }

    fn mul(&self, other: &ZElement) -> ZElement {
        let mut out = ZElement { pairs: self.pairs, terms: BTreeMap::new() };
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let prod: Vec<C64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
                out.add_term(a + b, &prod);
            }
        }
        out
    }

    fn scale(&self, e: &[C64]) -> ZElement {
        ZElement {
            pairs: self.pairs,
            terms: self
                .terms
                .iter()
                .map(|(a, x)| (*a, x.iter().zip(e).map(|(p, q)| p * q).collect()))
                .collect(),
        }
    }

    fn max_abs(&self) -> f64 {
        self.terms.values().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// An element of the matrix algebra `M₆ₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatElement {
    pub m: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Letter {
    Z(ZElement),
    Mat(MatElement),
}

impl Letter {
    pub fn mat(m: CMatrix) -> Self {
        Letter::Mat(MatElement { m })
    }

    fn same_algebra(&self, other: &Letter) -> bool {
        matches!((self, other), (Letter::Z(_), Letter::Z(_)) | (Letter::Mat(_), Letter::Mat(_)))
    }

    fn mul(&self, other: &Letter) -> Letter {
        match (self, other) {
            (Letter::Z(x), Letter::Z(y)) => Letter::Z(x.mul(y)),
            (Letter::Mat(x), Letter::Mat(y)) => Letter::mat(&x.m * &y.m),
            _ => unreachable!("merging letters of different algebras"),
        }
    }
}

/// Product of letters from the two algebras, stored with adjacent
/// same-algebra letters already multiplied together.
#[derive(Clone, Debug, PartialEq)]
pub struct AmalgamatedWord {
    b0: B0Algebra,
    letters: Vec<Letter>,
}

impl AmalgamatedWord {
    pub fn new(b0: B0Algebra, letters: impl IntoIterator<Item = Letter>) -> Result<Self> {
        let mut merged: Vec<Letter> = Vec::new();
        for l in letters {
            match &l {
                Letter::Z(z) if z.pairs != b0.pairs() => {
                    return Err(Error::DimensionMismatch { expected: b0.pairs(), found: z.pairs })
                }
                Letter::Mat(x) => x.m.check_dim(b0.dim())?,
                _ => {}
            }
            match merged.last_mut() {
                Some(last) if last.same_algebra(&l) => *last = last.mul(&l),
                _ => merged.push(l),
            }
        }
        Ok(AmalgamatedWord { b0, letters: merged })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn b0(&self) -> &B0Algebra {
        &self.b0
    }
}

/// Expectation onto `B₀` together with the number of recursion nodes.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub pair_coeffs: Vec<C64>,
    pub nodes: usize,
}

struct Evaluator {
    b0: B0Algebra,
    nodes: usize,
}

impl Evaluator {
    fn zeros(&self) -> Vec<C64> {
        vec![C64::default(); self.b0.pairs()]
    }

    fn expectation(&self, l: &Letter) -> Vec<C64> {
        match l {
            Letter::Z(z) => z.expectation(),
            Letter::Mat(x) => self.b0.pair_averages(&x.m).expect("dimension checked on entry"),
        }
    }

    fn centered(&self, l: &Letter, e: &[C64]) -> Letter {
        match l {
            Letter::Z(z) => Letter::Z(z.centered()),
            Letter::Mat(x) => Letter::mat(&x.m - &self.b0.from_pair_coeffs(e)),
        }
    }

    fn left_scale(&self, e: &[C64], l: &Letter) -> Letter {
        match l {
            Letter::Z(z) => Letter::Z(z.scale(e)),
            Letter::Mat(x) => {
                let h = self.b0.pairs();
                let mut m: DMatrix<C64> = x.m.inner().clone();
                for (i, mut row) in m.row_iter_mut().enumerate() {
                    row *= e[i % h];
                }
                Letter::mat(CMatrix::new(m).expect("square"))
            }
        }
    }

    fn max_abs(l: &Letter) -> f64 {
        match l {
            Letter::Z(z) => z.max_abs(),
            Letter::Mat(x) => x.m.inner().iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Expectation of the product, letters before `i` already centered.
    fn rec(&mut self, word: Vec<Letter>, i: usize) -> Vec<C64> {
        self.nodes += 1;
        let len = word.len();
        if len == 0 {
            return vec![c64(1.0, 0.0); self.b0.pairs()];
        }
        if i == len {
            // A nonempty alternating product of centered letters.
            return self.zeros();
        }
        let x = &word[i];
        let e = self.expectation(x);
        if len == 1 {
            return e;
        }
        let scale = 1.0 + Self::max_abs(x);
        let e_norm = e.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let c = self.centered(x, &e);
        let mut out = self.zeros();

        if Self::max_abs(&c) > PRUNE * scale {
            let mut w2 = word.clone();
            w2[i] = c;
            add_into(&mut out, &self.rec(w2, i + 1));
        }
        if e_norm > PRUNE * scale {
            if i == 0 {
                let mut w2 = Vec::with_capacity(len - 1);
                w2.push(self.left_scale(&e, &word[1]));
                w2.extend_from_slice(&word[2..]);
                add_into(&mut out, &self.rec(w2, 0));
            } else if i + 1 < len {
                // word[i-1]·e stays centered; fold it into word[i+1].
                let merged = word[i - 1].mul(&self.left_scale(&e, &word[i + 1]));
                let mut w2 = Vec::with_capacity(len - 2);
                w2.extend_from_slice(&word[..i - 1]);
                w2.push(merged);
                w2.extend_from_slice(&word[i + 2..]);
                add_into(&mut out, &self.rec(w2, i - 1));
            }
            // At the last position, word[i-1]·e is centered and the whole
            // product is alternating centered.
        }
        out
    }
}

fn add_into(acc: &mut [C64], x: &[C64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

pub fn evaluate(w: &AmalgamatedWord) -> Result<Evaluation> {
    if w.len() > LENGTH_GUARD {
        return Err(Error::LengthGuard { len: w.len(), guard: LENGTH_GUARD });
    }
    let mut ev = Evaluator { b0: w.b0, nodes: 0 };
    let pair_coeffs = ev.rec(w.letters.clone(), 0);
    Ok(Evaluation { pair_coeffs, nodes: ev.nodes })
}

/// `E_{B₀}` of the product, as a diagonal `6n × 6n` matrix.
pub fn expect(w: &AmalgamatedWord) -> Result<CMatrix> {
    let ev = evaluate(w)?;
    Ok(w.b0.from_pair_coeffs(&ev.pair_coeffs))
}

pub fn tau(w: &AmalgamatedWord) -> Result<C64> {
    let ev = evaluate(w)?;
    Ok(mean(&ev.pair_coeffs))
}

fn mean(c: &[C64]) -> C64 {
    c.iter().sum::<C64>() / c.len() as f64
}

fn reduce_b_exp(beta: &BigInt, dim: usize) -> i64 {
    beta.mod_floor(&BigInt::from(dim)).to_i64().expect("reduced exponent fits")
}

/// Letters of `w` with `A = a₁ v` and `B = b`.
pub fn ab_instantiate(w: &GroupWord, rep: &ApproxRep) -> AmalgamatedWord {
    let b0 = rep.b0();
    let v = rep.v().matrix().clone();
    let v_star = v.adjoint();
    let mut letters = Vec::new();
    for s in w.syllables() {
        match s {
            Syllable::A(alpha) => {
                for _ in 0..alpha.unsigned_abs() {
                    if *alpha > 0 {
                        letters.push(Letter::Z(ZElement::generator(&b0, 1)));
                        letters.push(Letter::mat(v.clone()));
                    } else {
                        letters.push(Letter::mat(v_star.clone()));
                        letters.push(Letter::Z(ZElement::generator(&b0, -1)));
                    }
                }
            }
            Syllable::B(beta) => letters.push(Letter::mat(rep.b_pow(reduce_b_exp(beta, rep.dim())))),
        }
    }
    AmalgamatedWord::new(b0, letters).expect("letters built at the representation's dimension")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Claim2Report {
    pub word: GroupWord,
    pub n: usize,
    pub tau_re: f64,
    pub tau_im: f64,
    pub abs_tau: f64,
    pub is_identity: bool,
    pub a13: A13Report,
    /// Some `b` exponent has `|β| ≥ 6n`, so `b^β` wraps around.
    pub wraps: bool,
    pub letters: usize,
    pub nodes: usize,
}

pub fn claim2_check(w: &GroupWord, rep: &ApproxRep) -> Result<Claim2Report> {
    let aw = ab_instantiate(w, rep);
    let ev = evaluate(&aw)?;
    let t = mean(&ev.pair_coeffs);
    let dim = BigInt::from(rep.dim());
    Ok(Claim2Report {
        word: w.clone(),
        n: rep.n(),
        tau_re: t.re,
        tau_im: t.im,
        abs_tau: t.norm(),
        is_identity: britton_is_identity(w),
        a13: w.a13_check(),
        wraps: w.syllables().iter().filter_map(Syllable::b_exp).any(|b| b.abs() >= dim),
        letters: aw.len(),
        nodes: ev.nodes,
    })
}

/// Random letters and words in the amalgamated product.
pub mod sample {
    use super::*;
    use crate::random::{complex_normal, random_matrix};
    use rand::Rng;

    /// A random `ZElement` with zero expectation, supported on `b^{±1}`, `b^{±2}`.
    pub fn centered_z<R: Rng + ?Sized>(rng: &mut R, b0: &B0Algebra) -> Letter {
        let mut z = ZElement::zero(b0);
        for alpha in [-2i64, -1, 1, 2] {
            if rng.random_bool(0.7) {
                let c: Vec<C64> = (0..b0.pairs()).map(|_| complex_normal(rng)).collect();
                z.add_term(alpha, &c);
            }
        }
        if z.terms.is_empty() {
            z.add_term(1, &vec![c64(1.0, 0.0); b0.pairs()]);
        }
        Letter::Z(z)
    }

    /// `Φ(m)` for a Ginibre matrix `m`.
    pub fn centered_mat<R: Rng + ?Sized>(rng: &mut R, b0: &B0Algebra) -> Letter {
        let m = random_matrix(rng, b0.dim());
        Letter::mat(b0.phi(&m).expect("dimension matches"))
    }

    /// Alternating product of `len` centered letters, random starting side.
    pub fn centered_alternating<R: Rng + ?Sized>(rng: &mut R, b0: &B0Algebra, len: usize) -> AmalgamatedWord {
        let start_z = rng.random_bool(0.5);
        let letters: Vec<Letter> =
            (0..len).map(|i| if (i % 2 == 0) == start_z { centered_z(rng, b0) } else { centered_mat(rng, b0) }).collect();
        AmalgamatedWord::new(*b0, letters).expect("alternating letters at a common dimension")
    }
}
