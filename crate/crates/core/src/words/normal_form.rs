//! Conjugate expansions and the rewrite to A1–A3 form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{GroupWord, Syllable};
use crate::error::{Error, Result};

pub const DEFAULT_REWRITE_CAP: usize = 1_000_000;

/// Largest `t ≤ budget` with `p^t | e`.
fn valuation_capped(e: &BigInt, p: u32, budget: i64) -> i64 {
    let p = BigInt::from(p);
    let mut e = e.clone();
    let mut t = 0;
    while t < budget && !e.is_zero() && e.is_multiple_of(&p) {
        e /= &p;
        t += 1;
    }
    t
}

/// Rewrites `a^{-n} b^k a^n` as `b^{θ₀}` followed by factors `a^{-r} b a^{r}`
/// with strictly decreasing `r`, reduced freely.
pub fn lemma23_expand(n: i64, k: &BigInt) -> Result<GroupWord> {
    if n < 1 || *k < BigInt::from(2) {
        return Err(Error::Precondition(format!("conjugate expansion needs n ≥ 1 and k ≥ 2, got n={n}, k={k}")));
    }
    let (two, three) = (BigInt::from(2), BigInt::from(3));
    let mut e = k.clone();
    let mut r = n;
    let mut splits = Vec::new();
    loop {
        let t = valuation_capped(&e, 2, r);
        for _ in 0..t {
            e = e / &two * &three;
        }
        r -= t;
        if r == 0 {
            break;
        }
        // All factors of two are gone, so e is odd and e - 1 ≥ 2 is even.
        e -= 1;
        splits.push(r);
    }
    let mut w = GroupWord::b(e);
    for &r in splits.iter().rev() {
        w = w.concat(&GroupWord::from_syllables([Syllable::A(-r), Syllable::B(BigInt::one()), Syllable::A(r)]));
    }
    Ok(w)
}

/// Rewrites `a^n b^k a^{-n}` as `b^{θ₀}` followed by factors
/// `a^{r} b^{ρ} a^{-r}`, `ρ ∈ {1, 2}`, with strictly decreasing `r`.
///
/// When the remaining exponent hits zero before the budget runs out there
/// is no leading `b` power: `a² b³ a⁻²` is `a b² a⁻¹` and nothing shorter.
pub fn lemma24_expand(n: i64, k: &BigInt) -> Result<GroupWord> {
    if n < 1 || *k < BigInt::from(3) {
        return Err(Error::Precondition(format!("conjugate expansion needs n ≥ 1 and k ≥ 3, got n={n}, k={k}")));
    }
    let (two, three) = (BigInt::from(2), BigInt::from(3));
    let mut e = k.clone();
    let mut r = n;
    let mut splits = Vec::new();
    loop {
        let t = valuation_capped(&e, 3, r);
        for _ in 0..t {
            e = e / &three * &two;
        }
        r -= t;
        if r == 0 || e.is_zero() {
            break;
        }
        let rho = e.mod_floor(&three);
        e -= &rho;
        splits.push((r, rho));
    }
    let mut w = GroupWord::b(e);
    for (r, rho) in splits.into_iter().rev() {
        w = w.concat(&GroupWord::from_syllables([Syllable::A(r), Syllable::B(rho), Syllable::A(-r)]));
    }
    Ok(w)
}

fn shape_err(msg: impl Into<String>) -> Result<()> {
    Err(Error::Verification(msg.into()))
}

/// Checks the conjugate-expansion shape for `a^{-n} b^k a^n`: a leading
/// `b^{θ₀}` with `θ₀ ≥ 3`, interior `b` exponents 1, a-exponents negative
/// except the last which lies in `(0, n]`. The leading-exponent bound is
/// only checked when a split occurred, since `n = 1, k = 2` gives bare `b³`.
pub fn check_lemma23_shape(w: &GroupWord, n: i64) -> Result<()> {
    let s = w.syllables();
    let Some((Syllable::B(theta0), rest)) = s.split_first() else {
        return shape_err(format!("`{w}` does not start with a b power"));
    };
    if rest.is_empty() {
        return Ok(());
    }
    if *theta0 < BigInt::from(3) {
        return shape_err(format!("leading exponent {theta0} < 3 in `{w}`"));
    }
    check_alternating(rest, w, |i, last, a| {
        if last {
            a > 0 && a <= n
        } else {
            a < 0 && (i > 0 || a >= -n)
        }
    }, |b| b.is_one())
}

/// Checks the dual shape for `a^n b^k a^{-n}`: leading `b^{θ₀}` with
/// `θ₀ ≥ 2` (or absent), interior `b` exponents in `{1, 2}`, a-exponents
/// positive except the last which lies in `[-n, 0)`.
pub fn check_lemma24_shape(w: &GroupWord, n: i64) -> Result<()> {
    let s = w.syllables();
    let rest = match s.split_first() {
        None => return shape_err("empty expansion"),
        Some((Syllable::B(theta0), rest)) => {
            if *theta0 < BigInt::from(2) {
                return shape_err(format!("leading exponent {theta0} < 2 in `{w}`"));
            }
            rest
        }
        Some((Syllable::A(_), _)) => s,
    };
    if rest.is_empty() {
        return Ok(());
    }
    check_alternating(rest, w, |i, last, a| {
        if last {
            a < 0 && a >= -n
        } else {
            a > 0 && (i > 0 || a <= n)
        }
    }, |b| b.is_one() || *b == BigInt::from(2))
}

fn check_alternating(
    rest: &[Syllable],
    w: &GroupWord,
    a_ok: impl Fn(usize, bool, i64) -> bool,
    b_ok: impl Fn(&BigInt) -> bool,
) -> Result<()> {
    if rest.len().is_multiple_of(2) {
        return shape_err(format!("`{w}` does not end with an a power"));
    }
    let a_count = rest.len() / 2 + 1;
    for (j, syl) in rest.iter().enumerate() {
        match (j % 2, syl) {
            (0, Syllable::A(a)) => {
                let i = j / 2;
                if !a_ok(i, i + 1 == a_count, *a) {
                    return shape_err(format!("a-exponent {a} out of place in `{w}`"));
                }
            }
            (1, Syllable::B(b)) if b_ok(b) => {}
            _ => return shape_err(format!("unexpected syllable in `{w}`")),
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizeOutcome {
    pub output: GroupWord,
    pub rewrites: usize,
}

/// First `b` syllable at a sign change whose exponent breaks A2 or A3.
fn first_violation(s: &[Syllable]) -> Option<usize> {
    (1..s.len().saturating_sub(1)).find(|&i| {
        let (Some(l), Some(k), Some(r)) = (s[i - 1].a_exp(), s[i].b_exp(), s[i + 1].a_exp()) else {
            return false;
        };
        let k = k.abs();
        (l < 0 && r > 0 && k >= BigInt::from(2)) || (l > 0 && r < 0 && k >= BigInt::from(3))
    })
}

pub fn normalize_step_iv(w: &GroupWord) -> Result<GroupWord> {
    normalize_step_iv_with_cap(w, DEFAULT_REWRITE_CAP).map(|o| o.output)
}

/// Rewrites `w` into an equal word obeying A1–A3 (for degree-zero input).
/// Each pass replaces the first violating bracket `a^{∓m} b^k a^{±m}`, `m`
/// the smaller adjacent a-exponent, by its conjugate expansion and restarts.
pub fn normalize_step_iv_with_cap(w: &GroupWord, cap: usize) -> Result<NormalizeOutcome> {
    let mut cur = w.clone();
    let mut rewrites = 0;
    while let Some(i) = first_violation(cur.syllables()) {
        if rewrites == cap {
            return Err(Error::IterationCap { cap });
        }
        rewrites += 1;
        let s = cur.syllables();
        let (Syllable::A(l), Syllable::B(k), Syllable::A(r)) = (&s[i - 1], &s[i], &s[i + 1]) else {
            unreachable!()
        };
        let (l, r) = (*l, *r);
        let (m, expansion) = if l < 0 {
            let m = (-l).min(r);
            (m, lemma23_expand(m, &k.abs())?)
        } else {
            let m = l.min(-r);
            (m, lemma24_expand(m, &k.abs())?)
        };
        let expansion = if k.is_negative() { expansion.inverse() } else { expansion };
        // a^{l} b^{k} a^{r} = a^{l ± m} (a^{∓m} b^k a^{±m}) a^{r ∓ m}
        let shift = if l < 0 { m } else { -m };
        let mut next = s[..i - 1].to_vec();
        next.push(Syllable::A(l + shift));
        next.extend(expansion.into_syllables());
        next.push(Syllable::A(r - shift));
        next.extend_from_slice(&s[i + 2..]);
        cur = GroupWord::from_syllables(next);
    }
    Ok(NormalizeOutcome { output: cur, rewrites })
}
