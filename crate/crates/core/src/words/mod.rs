//! Words in the Baumslag group `⟨a, b | a b³ a⁻¹ = b²⟩`.
//!
//! A [`GroupWord`] is kept in freely reduced syllable form: adjacent
//! syllables use different generators and no exponent is zero. Exponents of
//! `b` are arbitrary precision because pinch reduction multiplies them by
//! 3/2 at every step.

mod britton;
mod normal_form;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use britton::{britton_b_power, britton_equal, britton_is_identity, britton_reduce};
pub use normal_form::{
    check_lemma23_shape, check_lemma24_shape, lemma23_expand, lemma24_expand, normalize_step_iv,
    normalize_step_iv_with_cap, NormalizeOutcome, DEFAULT_REWRITE_CAP,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Syllable {
    A(i64),
    B(BigInt),
}

impl Syllable {
    fn is_trivial(&self) -> bool {
        match self {
            Syllable::A(e) => *e == 0,
            Syllable::B(e) => e.is_zero(),
        }
    }

    fn inverse(&self) -> Syllable {
        match self {
            Syllable::A(e) => Syllable::A(-e),
            Syllable::B(e) => Syllable::B(-e),
        }
    }

    pub fn a_exp(&self) -> Option<i64> {
        match self {
            Syllable::A(e) => Some(*e),
            Syllable::B(_) => None,
        }
    }

    pub fn b_exp(&self) -> Option<&BigInt> {
        match self {
            Syllable::B(e) => Some(e),
            Syllable::A(_) => None,
        }
    }
}

/// Freely reduced word in `a` and `b`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupWord {
    syllables: Vec<Syllable>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    /// Builds a word from arbitrary syllables, reducing freely.
    pub fn from_syllables(syllables: impl IntoIterator<Item = Syllable>) -> Self {
        let mut w = GroupWord::identity();
        for s in syllables {
            w.push(s);
        }
        w
    }

    pub fn a(exp: i64) -> Self {
        Self::from_syllables([Syllable::A(exp)])
    }

    pub fn b(exp: impl Into<BigInt>) -> Self {
        Self::from_syllables([Syllable::B(exp.into())])
    }

    /// The defining relator `a b³ a⁻¹ b⁻²`.
    pub fn relator() -> Self {
        Self::from_syllables([
            Syllable::A(1),
            Syllable::B(3.into()),
            Syllable::A(-1),
            Syllable::B((-2).into()),
        ])
    }

    /// Appends one syllable, merging with the tail and cancelling zeros.
    pub fn push(&mut self, s: Syllable) {
        if s.is_trivial() {
            return;
        }
        let merged = match (self.syllables.last_mut(), &s) {
            (Some(Syllable::A(x)), Syllable::A(y)) => {
                *x += y;
                true
            }
            (Some(Syllable::B(x)), Syllable::B(y)) => {
                *x += y;
                true
            }
            _ => false,
        };
        if !merged {
            self.syllables.push(s);
        } else if self.syllables.last().is_some_and(Syllable::is_trivial) {
            self.syllables.pop();
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn into_syllables(self) -> Vec<Syllable> {
        self.syllables
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn inverse(&self) -> Self {
        GroupWord {
            syllables: self.syllables.iter().rev().map(Syllable::inverse).collect(),
        }
    }

    /// Freely reduced product `self · other`.
    pub fn concat(&self, other: &GroupWord) -> Self {
        let mut w = self.clone();
        for s in &other.syllables {
            w.push(s.clone());
        }
        w
    }

    pub fn total_a_degree(&self) -> i64 {
        self.syllables.iter().filter_map(Syllable::a_exp).sum()
    }

    pub fn a_letter_count(&self) -> u64 {
        self.syllables
            .iter()
            .filter_map(Syllable::a_exp)
            .map(i64::unsigned_abs)
            .sum()
    }

    /// `Σ|a-exponents|` plus the number of `b` syllables: the number of
    /// letters once each `A` and each `B^β` counts as one.
    pub fn letter_length(&self) -> u64 {
        self.a_letter_count() + self.syllables.iter().filter(|s| s.b_exp().is_some()).count() as u64
    }

    pub fn max_abs_b_exp(&self) -> BigInt {
        self.syllables
            .iter()
            .filter_map(Syllable::b_exp)
            .map(|e| e.abs())
            .max()
            .unwrap_or_default()
    }

    /// Checks the consecutive-exponent conditions A1–A3.
    pub fn a13_check(&self) -> A13Report {
        let mut violations = Vec::new();
        let s = &self.syllables;
        for i in 1..s.len().saturating_sub(1) {
            let (Some(left), Some(beta), Some(right)) = (s[i - 1].a_exp(), s[i].b_exp(), s[i + 1].a_exp()) else {
                continue;
            };
            let beta = beta.abs();
            if left < 0 && right > 0 && !beta.is_one() {
                violations.push(A13Violation { position: i, rule: A13Rule::A2 });
            }
            if left > 0 && right < 0 && !(beta.is_one() || beta == BigInt::from(2)) {
                violations.push(A13Violation { position: i, rule: A13Rule::A3 });
            }
        }
        A13Report {
            satisfied: violations.is_empty(),
            violations,
        }
    }
}

/// Which of the sign-change conditions failed. A1 (no sign change) cannot
/// fail on a reduced word, so only A2 and A3 are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum A13Rule {
    A2,
    A3,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct A13Violation {
    /// Syllable index of the offending `b` power.
    pub position: usize,
    pub rule: A13Rule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct A13Report {
    pub satisfied: bool,
    pub violations: Vec<A13Violation>,
}

pub fn a13_check(w: &GroupWord) -> A13Report {
    w.a13_check()
}

/// Parses whitespace-separated tokens `a`, `b`, `a^<int>`, `b^<int>`.
pub fn parse(text: &str) -> Result<GroupWord> {
    let mut w = GroupWord::identity();
    let mut offset = 0;
    for token in text.split_inclusive(char::is_whitespace) {
        let start = offset;
        offset += token.len();
        let tok = token.trim_end();
        if tok.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { position: start, message };
        let (gen, exp) = match tok.split_once('^') {
            Some((g, e)) => (g, Some(e)),
            None => (tok, None),
        };
        let exp_value: BigInt = match exp {
            None => BigInt::one(),
            Some(e) => {
                let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
                if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
                    return Err(err(format!("bad exponent in `{tok}`")));
                }
                BigInt::from_str(e.strip_prefix('+').unwrap_or(e))
                    .map_err(|_| err(format!("bad exponent in `{tok}`")))?
            }
        };
        match gen {
            "a" => {
                let e = i64::try_from(&exp_value)
                    .map_err(|_| err(format!("a-exponent out of range in `{tok}`")))?;
                w.push(Syllable::A(e));
            }
            "b" => w.push(Syllable::B(exp_value)),
            _ => return Err(err(format!("unknown generator in `{tok}`"))),
        }
    }
    Ok(w)
}

impl FromStr for GroupWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let (g, e) = match s {
                Syllable::A(e) => ("a", BigInt::from(*e)),
                Syllable::B(e) => ("b", e.clone()),
            };
            if e.is_one() {
                f.write_str(g)?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

pub fn format(w: &GroupWord) -> String {
    w.to_string()
}

impl Serialize for GroupWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Random words for experiments and property checks.
pub mod sample {
    use super::*;
    use rand::Rng;

    fn nonzero<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> i64 {
        loop {
            let x = rng.random_range(-bound..=bound);
            if x != 0 {
                return x;
            }
        }
    }

    /// A reduced word of total `a`-degree zero with at most `max_syllables`
    /// syllables, `|a-exp| ≤ a_bound`, `|b-exp| ≤ b_bound`.
    pub fn degree_zero_word<R: Rng + ?Sized>(
        rng: &mut R,
        max_syllables: usize,
        a_bound: i64,
        b_bound: i64,
    ) -> GroupWord {
        assert!(max_syllables >= 3 && a_bound >= 1 && b_bound >= 1);
        loop {
            let lead_b = rng.random_bool(0.5);
            let trail_b = rng.random_bool(0.5);
            let fixed = lead_b as usize + trail_b as usize;
            // a-syllables m need m-1 interior b's: 2m - 1 + fixed ≤ max.
            let max_a = (max_syllables - fixed).div_ceil(2);
            if max_a < 2 {
                continue;
            }
            let m = rng.random_range(2..=max_a);
            let mut a_exps: Vec<i64> = (0..m - 1).map(|_| nonzero(rng, a_bound)).collect();
            let last = -a_exps.iter().sum::<i64>();
            if last == 0 || last.abs() > a_bound {
                continue;
            }
            a_exps.push(last);
            let mut syl = Vec::new();
            if lead_b {
                syl.push(Syllable::B(nonzero(rng, b_bound).into()));
            }
            for (i, &a) in a_exps.iter().enumerate() {
                if i > 0 {
                    syl.push(Syllable::B(nonzero(rng, b_bound).into()));
                }
                syl.push(Syllable::A(a));
            }
            if trail_b {
                syl.push(Syllable::B(nonzero(rng, b_bound).into()));
            }
            return GroupWord::from_syllables(syl);
        }
    }

    /// Any reduced word with `syllables` syllables, alternating generators.
    pub fn any_word<R: Rng + ?Sized>(rng: &mut R, syllables: usize, a_bound: i64, b_bound: i64) -> GroupWord {
        let start_a = rng.random_bool(0.5);
        GroupWord::from_syllables((0..syllables).map(|i| {
            if (i % 2 == 0) == start_a {
                Syllable::A(nonzero(rng, a_bound))
            } else {
                Syllable::B(nonzero(rng, b_bound).into())
            }
        }))
    }
}
