//! Free-group words, the rational group ring ℚπ, the bar involution and Fox
//! free calculus.
//!
//! Generators are 0-based internally and 1-based in text: `g1` is generator 0,
//! `G1` its inverse.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_q, parse_q, Q};

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: usize, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    /// Exponent sign, `+1` or `-1`.
    pub fn sign(self) -> i64 {
        if self.inv {
            -1
        } else {
            1
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupWord(Vec<Letter>);

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord(Vec::new())
    }

    pub fn generator(gen: usize) -> Self {
        GroupWord(vec![Letter::new(gen, false)])
    }

    /// Reduces with a single stack pass.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = GroupWord::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Builds from signed 1-based indices: `3` is `g3`, `-3` is `G3`.
    pub fn from_signed(indices: &[i64]) -> Self {
        Self::from_letters(indices.iter().map(|&i| {
            assert!(i != 0, "signed generator index must be nonzero");
            Letter::new(i.unsigned_abs() as usize - 1, i < 0)
        }))
    }

    fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn mul(&self, other: &GroupWord) -> Self {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = GroupWord::identity();
        for _ in 0..k.unsigned_abs() {
            w = w.mul(&base);
        }
        w
    }

    /// `[a, b] = a b a⁻¹ b⁻¹`.
    pub fn commutator(a: &GroupWord, b: &GroupWord) -> Self {
        a.mul(b).mul(&a.inverse()).mul(&b.inverse())
    }

    /// Largest generator index used plus one.
    pub fn rank_hint(&self) -> usize {
        self.0.iter().map(|l| l.gen + 1).max().unwrap_or(0)
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        match self.0.iter().find(|l| l.gen >= rank) {
            Some(l) => Err(Error::GeneratorOutOfRange { index: l.gen + 1, rank }),
            None => Ok(()),
        }
    }

    /// Exponent sum of each generator.
    pub fn abelianize(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0; rank];
        for l in &self.0 {
            v[l.gen] += l.sign();
        }
        v
    }

    /// Replaces every generator by a word.
    pub fn substitute(&self, images: &[GroupWord]) -> GroupWord {
        let mut w = GroupWord::identity();
        for l in &self.0 {
            let img = &images[l.gen];
            if l.inv {
                w = w.mul(&img.inverse());
            } else {
                w = w.mul(img);
            }
        }
        w
    }

    /// Parses whitespace-separated `gK` / `GK` tokens; `1` or the empty string
    /// is the identity.
    pub fn parse(s: &str) -> Result<Self> {
        Self::parse_with(s, |name| {
            name.strip_prefix('g')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(|k| k - 1)
        })
    }

    /// Parses tokens naming generators through `lookup`; a token whose first
    /// character is uppercase is the inverse of its lowercased form.
    pub fn parse_with(s: &str, lookup: impl Fn(&str) -> Option<usize>) -> Result<Self> {
        let mut w = GroupWord::identity();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let mut chars = tok.chars();
            let first = chars.next().unwrap();
            let inv = first.is_uppercase();
            let name: String = first.to_lowercase().chain(chars).collect();
            let gen = lookup(&name).ok_or_else(|| Error::Parse(format!("unknown generator {tok:?}")))?;
            w.push(Letter::new(gen, inv));
        }
        Ok(w)
    }

    /// Writes the word with the given generator names, uppercasing the first
    /// character for inverses.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        let toks: Vec<String> = self
            .0
            .iter()
            .map(|l| {
                let name = &names[l.gen];
                if l.inv {
                    let mut c = name.chars();
                    let first = c.next().unwrap();
                    first.to_uppercase().chain(c).collect()
                } else {
                    name.clone()
                }
            })
            .collect();
        toks.join(" ")
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", if l.inv { 'G' } else { 'g' }, l.gen + 1)?;
        }
        Ok(())
    }
}

/// A finite rational combination of group words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RingElement {
    terms: BTreeMap<GroupWord, Q>,
}

impl RingElement {
    pub fn zero() -> Self {
        RingElement::default()
    }

    pub fn one() -> Self {
        Self::from_word(GroupWord::identity())
    }

    pub fn from_word(w: GroupWord) -> Self {
        Self::term(Q::one(), w)
    }

    pub fn term(c: Q, w: GroupWord) -> Self {
        let mut r = RingElement::zero();
        r.add_term(c, w);
        r
    }

    pub fn add_term(&mut self, c: Q, w: GroupWord) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupWord, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn augmentation(&self) -> Q {
        self.terms.values().fold(Q::zero(), |a, c| a + c)
    }

    pub fn add(&self, other: &RingElement) -> Self {
        let mut r = self.clone();
        for (w, c) in &other.terms {
            r.add_term(c.clone(), w.clone());
        }
        r
    }

    pub fn sub(&self, other: &RingElement) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return RingElement::zero();
        }
        RingElement { terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect() }
    }

    pub fn mul(&self, other: &RingElement) -> Self {
        let mut r = RingElement::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                r.add_term(a * b, u.mul(v));
            }
        }
        r
    }

    /// The linear anti-involution induced by `w ↦ w⁻¹`.
    pub fn bar(&self) -> Self {
        RingElement { terms: self.terms.iter().map(|(w, c)| (w.inverse(), c.clone())).collect() }
    }

    /// Parses `coeff*word` terms joined by `+` / `-`, coefficients as `p/q`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut r = RingElement::zero();
        let mut sign = Q::one();
        let mut coeff: Option<Q> = None;
        let mut word: Vec<&str> = Vec::new();
        let mut open = false;
        let flush = |r: &mut RingElement, sign: &Q, coeff: &mut Option<Q>, word: &mut Vec<&str>| -> Result<()> {
            let w = GroupWord::parse(&word.join(" "))?;
            let c = coeff.take().unwrap_or_else(Q::one);
            r.add_term(sign * c, w);
            word.clear();
            Ok(())
        };
        for tok in s.split_whitespace() {
            if tok == "+" || tok == "-" {
                if open {
                    flush(&mut r, &sign, &mut coeff, &mut word)?;
                    open = false;
                }
                sign = if tok == "-" { -Q::one() } else { Q::one() };
                continue;
            }
            let mut tok = tok;
            if !open {
                if let Some(rest) = tok.strip_prefix('-') {
                    sign = -sign;
                    tok = rest;
                }
                open = true;
                if let Some((c, w)) = tok.split_once('*') {
                    coeff = Some(parse_q(c)?);
                    tok = w;
                } else if tok.starts_with(|ch: char| ch.is_ascii_digit()) && tok != "1" {
                    coeff = Some(parse_q(tok)?);
                    continue;
                }
            }
            word.push(tok);
        }
        if open {
            flush(&mut r, &sign, &mut coeff, &mut word)?;
        }
        Ok(r)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let neg = c < &Q::zero();
            let a = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            match (a.is_one(), w.is_identity()) {
                (true, _) => write!(f, "{w}")?,
                (false, true) => write!(f, "{}", format_q(&a))?,
                (false, false) => write!(f, "{}*{w}", format_q(&a))?,
            }
        }
        Ok(())
    }
}

/// `∂w/∂γ_gen` from `∂(uv) = ∂u + u ∂v`, `∂γ/∂γ = 1`, `∂γ⁻¹/∂γ = −γ⁻¹`.
pub fn fox_derivative(w: &GroupWord, gen: usize) -> RingElement {
    let mut r = RingElement::zero();
    let mut prefix = GroupWord::identity();
    for &l in w.letters() {
        if l.gen == gen {
            if l.inv {
                r.add_term(-Q::one(), prefix.mul(&GroupWord::from_letters([l])));
            } else {
                r.add_term(Q::one(), prefix.clone());
            }
        }
        prefix.push(l);
    }
    r
}

/// Linear extension of [`fox_derivative`].
pub fn fox_derivative_ring(v: &RingElement, gen: usize) -> RingElement {
    let mut r = RingElement::zero();
    for (w, c) in v.terms() {
        r = r.add(&fox_derivative(w, gen).scale(c));
    }
    r
}

/// Entry `(i, j)` is `bar(∂r_j / ∂gens_i)`.
pub fn fox_matrix(relators: &[GroupWord], gens: &[usize]) -> Vec<Vec<RingElement>> {
    gens.iter()
        .map(|&g| relators.iter().map(|r| fox_derivative(r, g).bar()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s).unwrap()
    }

    fn re(s: &str) -> RingElement {
        RingElement::parse(s).unwrap()
    }

    #[test]
    fn reduction_and_io() {
        assert_eq!(w("g1 G1 g2"), w("g2"));
        assert_eq!(w("g1 g2 G2 G1").to_string(), "1");
        assert_eq!(w("g3 G12").to_string(), "g3 G12");
        assert!(GroupWord::parse("x1").is_err());
        assert!(GroupWord::parse("g0").is_err());
    }

    #[test]
    fn bar_examples() {
        assert_eq!(re("g1 g2").bar(), re("G2 G1"));
        assert_eq!(RingElement::one().bar(), RingElement::one());
        assert_eq!(re("2*g1 - G2").bar(), re("2*G1 - g2"));
    }

    #[test]
    fn ring_element_text_round_trip() {
        for s in ["2*g1 g2 - 1/3*G1 + 1", "-g2", "0", "3/2"] {
            let r = re(s);
            assert_eq!(re(&r.to_string()), r, "{s}");
        }
        assert_eq!(re("g1 - g1"), RingElement::zero());
    }

    #[test]
    fn fox_examples() {
        assert_eq!(fox_derivative(&w("g1"), 0), RingElement::one());
        assert_eq!(fox_derivative(&w("G1"), 0), re("-G1"));
        assert_eq!(fox_derivative(&w("g1 g2 G1 G2"), 0), re("1 - g1 g2 G1"));
        assert_eq!(fox_matrix(&[w("g1 g2 G1 G2")], &[0]), vec![vec![re("1 - g1 G2 G1")]]);
        assert_eq!(fox_matrix(&[w("g1")], &[0]), vec![vec![RingElement::one()]]);
    }

    fn word_strategy(rank: usize, len: usize) -> impl Strategy<Value = GroupWord> {
        prop::collection::vec((0..rank, any::<bool>()), 0..=len)
            .prop_map(|ls| GroupWord::from_letters(ls.into_iter().map(|(g, i)| Letter::new(g, i))))
    }

    proptest! {
        #[test]
        fn fundamental_formula(wd in word_strategy(3, 12)) {
            let mut rhs = RingElement::zero();
            for i in 0..3 {
                let gi = RingElement::from_word(GroupWord::generator(i)).sub(&RingElement::one());
                rhs = rhs.add(&fox_derivative(&wd, i).mul(&gi));
            }
            prop_assert_eq!(RingElement::from_word(wd).sub(&RingElement::one()), rhs);
        }

        #[test]
        fn bar_is_anti_multiplicative(a in word_strategy(3, 6), b in word_strategy(3, 6), c in -3i64..4) {
            let u = RingElement::from_word(a).add(&RingElement::term(Q::from_integer(c.into()), b.clone()));
            let v = RingElement::from_word(b.inverse()).add(&RingElement::one());
            prop_assert_eq!(u.mul(&v).bar(), v.bar().mul(&u.bar()));
        }

        #[test]
        fn reduction_is_confluent(ls in prop::collection::vec((0usize..2, any::<bool>()), 0..14)) {
            let letters: Vec<Letter> = ls.into_iter().map(|(g, i)| Letter::new(g, i)).collect();
            let whole = GroupWord::from_letters(letters.clone());
            for cut in 0..=letters.len() {
                let left = GroupWord::from_letters(letters[..cut].to_vec());
                let right = GroupWord::from_letters(letters[cut..].to_vec());
                prop_assert_eq!(left.mul(&right), whole.clone());
            }
        }
    }
}
