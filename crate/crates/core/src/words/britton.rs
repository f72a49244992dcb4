//! Word problem by pinch removal.
//!
//! The group is an HNN extension of `⟨b⟩` with stable letter `a`
//! conjugating `⟨b³⟩` onto `⟨b²⟩`. A pinch is `a b^{3m} a⁻¹` (becomes
//! `b^{2m}`) or `a⁻¹ b^{2m} a` (becomes `b^{3m}`). By Britton's lemma a
//! word with no pinch left is trivial iff it is empty.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::{GroupWord, Syllable};

/// Removes pinches until none is left; the result equals `w` in the group.
pub fn britton_reduce(w: &GroupWord) -> GroupWord {
    let mut cur = w.clone();
    let three = BigInt::from(3);
    let two = BigInt::from(2);
    loop {
        let s = cur.syllables();
        let mut pinch = None;
        for i in 0..s.len() {
            // `a^{x} a^{-y}` never survives free reduction, so a pinch is
            // always a `b` syllable flanked by opposite-sign a-syllables.
            let (Some(Syllable::A(l)), Some(Syllable::B(k)), Some(Syllable::A(r))) =
                (i.checked_sub(1).and_then(|j| s.get(j)), s.get(i), s.get(i + 1))
            else {
                continue;
            };
            if *l > 0 && *r < 0 && k.is_multiple_of(&three) {
                pinch = Some((i, 1, k / &three * &two));
                break;
            }
            if *l < 0 && *r > 0 && k.is_multiple_of(&two) {
                pinch = Some((i, -1, k / &two * &three));
                break;
            }
        }
        let Some((i, sign, new_b)) = pinch else {
            return cur;
        };
        let s = cur.syllables();
        let (Syllable::A(l), Syllable::A(r)) = (&s[i - 1], &s[i + 1]) else {
            unreachable!()
        };
        let mut next: Vec<Syllable> = s[..i - 1].to_vec();
        next.push(Syllable::A(l - sign));
        next.push(Syllable::B(new_b));
        next.push(Syllable::A(r + sign));
        next.extend_from_slice(&s[i + 2..]);
        cur = GroupWord::from_syllables(next);
    }
}

pub fn britton_is_identity(w: &GroupWord) -> bool {
    britton_reduce(w).is_empty()
}

pub fn britton_equal(w1: &GroupWord, w2: &GroupWord) -> bool {
    britton_is_identity(&w1.concat(&w2.inverse()))
}

/// True when `w` reduces to a pure power of `b` (possibly trivial); returns
/// the exponent.
pub fn britton_b_power(w: &GroupWord) -> Option<BigInt> {
    let r = britton_reduce(w);
    match r.syllables() {
        [] => Some(BigInt::zero()),
        [Syllable::B(k)] => Some(k.clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use crate::words::{parse, sample};
    use rand::Rng;

    fn w(s: &str) -> GroupWord {
        parse(s).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert!(britton_is_identity(&w("a b^3 a^-1 b^-2")));
        assert!(britton_is_identity(&GroupWord::identity()));
        assert!(!britton_is_identity(&w("a b a^-1 b^-1")));
    }

    #[test]
    fn exponent_growth_is_exact() {
        // a^{-k} b^{2^k} a^{k} = b^{3^k}
        let k = 60;
        let x = GroupWord::a(-k).concat(&GroupWord::b(BigInt::from(2).pow(k as u32))).concat(&GroupWord::a(k));
        assert_eq!(britton_b_power(&x), Some(BigInt::from(3).pow(k as u32)));
    }

    #[test]
    fn non_trivial_small_words() {
        for s in ["a", "b", "a b a^-1", "a^-1 b^3 a", "a b^2 a^-1 b^-1", "a b a^-1 b a b^-1 a^-1 b^-1"] {
            assert!(!britton_is_identity(&w(s)), "{s}");
        }
        assert!(britton_equal(&w("a^-1 b^4 a"), &w("b^6")));
    }

    /// Products of conjugated relators are trivial by construction; a stray
    /// `b` makes them nontrivial.
    #[test]
    fn soundness_against_construction() {
        let mut rng = seeded(11);
        let rel = GroupWord::relator();
        for _ in 0..1000 {
            let mut product = GroupWord::identity();
            for _ in 0..20 {
                let len = rng.random_range(1..=6);
                let c = sample::any_word(&mut rng, len, 3, 5);
                let r = if rng.random_bool(0.5) { rel.clone() } else { rel.inverse() };
                product = product.concat(&c.concat(&r).concat(&c.inverse()));
            }
            let len = rng.random_range(1..=6);
            let wrap = sample::any_word(&mut rng, len, 3, 5);
            let trivial = wrap.concat(&product).concat(&wrap.inverse());
            assert!(britton_is_identity(&trivial));
            let stray = trivial.concat(&GroupWord::b(1));
            assert!(!britton_is_identity(&stray));
        }
    }
}
