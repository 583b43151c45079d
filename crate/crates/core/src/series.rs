//! Truncated tensor series `T̂ / T̂_{D+1}` over `H = ℚ⟨x₁,…,x_n⟩` and Magnus
//! expansions of group words.
//!
//! A monomial `x_{i₁}⋯x_{i_k}` of degree `k` is packed as the base-`n` integer
//! with digits `i₁,…,i_k` (0-based) and stored in the degree-`k` stratum, so a
//! product only visits pairs of strata whose degrees sum to at most the cap.
//! Within one stratum, key order is lexicographic order of monomials.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{format_q, parse_q, Q};
use crate::word::{GroupWord, Letter, RingElement};

/// `rank^k` as a key multiplier.
pub(crate) fn key_pow(rank: usize, k: usize) -> u64 {
    (rank as u64).pow(k as u32)
}

pub(crate) fn encode(mono: &[usize], rank: usize) -> u64 {
    mono.iter().fold(0u64, |k, &i| k * rank as u64 + i as u64)
}

pub(crate) fn decode(mut key: u64, degree: usize, rank: usize) -> Vec<usize> {
    let mut out = vec![0; degree];
    for slot in out.iter_mut().rev() {
        *slot = (key % rank as u64) as usize;
        key /= rank as u64;
    }
    out
}

pub(crate) fn add_into(map: &mut BTreeMap<u64, Q>, key: u64, c: Q) {
    match map.entry(key) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// A lower bound on the filtration degree, or a certificate that the quantity
/// vanishes up to the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DegreeBound {
    Finite(usize),
    ExceedsCap,
}

impl fmt::Display for DegreeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeBound::Finite(k) => write!(f, "{k}"),
            DegreeBound::ExceedsCap => write!(f, "exceeds D"),
        }
    }
}

/// An element of the tensor algebra truncated above degree `cap`.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorSeries {
    rank: usize,
    cap: usize,
    strata: Vec<BTreeMap<u64, Q>>,
}

impl fmt::Debug for TensorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorSeries(rank={}, cap={}; {})", self.rank, self.cap, self)
    }
}

impl fmt::Display for TensorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mono, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let m: Vec<String> = mono.iter().map(|i| format!("x{}", i + 1)).collect();
            if m.is_empty() {
                write!(f, "{}", format_q(c))?;
            } else {
                write!(f, "{}*{}", format_q(c), m.join(""))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl TensorSeries {
    pub fn zero(rank: usize, cap: usize) -> Self {
        assert!(rank >= 1, "rank must be positive");
        assert!(
            (rank as u64).checked_pow(cap as u32).is_some(),
            "monomials of degree {cap} over rank {rank} do not fit a packed key"
        );
        TensorSeries { rank, cap, strata: vec![BTreeMap::new(); cap + 1] }
    }

    pub fn constant(rank: usize, cap: usize, c: Q) -> Self {
        let mut s = Self::zero(rank, cap);
        add_into(&mut s.strata[0], 0, c);
        s
    }

    pub fn one(rank: usize, cap: usize) -> Self {
        Self::constant(rank, cap, Q::one())
    }

    /// The degree-one generator `x_i`.
    pub fn x(rank: usize, cap: usize, i: usize) -> Self {
        Self::monomial(rank, cap, &[i], Q::one())
    }

    /// `c · x_{m₁}⋯x_{m_k}`, or zero when `k > cap`.
    pub fn monomial(rank: usize, cap: usize, mono: &[usize], c: Q) -> Self {
        let mut s = Self::zero(rank, cap);
        s.add_monomial(mono, c);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<usize>, Q)>>(rank: usize, cap: usize, terms: I) -> Self {
        let mut s = Self::zero(rank, cap);
        for (m, c) in terms {
            s.add_monomial(&m, c);
        }
        s
    }

    pub fn add_monomial(&mut self, mono: &[usize], c: Q) {
        assert!(mono.iter().all(|&i| i < self.rank), "monomial index outside rank");
        if mono.len() <= self.cap {
            add_into(&mut self.strata[mono.len()], encode(mono, self.rank), c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub(crate) fn stratum(&self, k: usize) -> &BTreeMap<u64, Q> {
        &self.strata[k]
    }

    pub(crate) fn stratum_mut(&mut self, k: usize) -> &mut BTreeMap<u64, Q> {
        &mut self.strata[k]
    }

    pub fn coeff(&self, mono: &[usize]) -> Q {
        if mono.len() > self.cap {
            return Q::zero();
        }
        self.strata[mono.len()].get(&encode(mono, self.rank)).cloned().unwrap_or_else(Q::zero)
    }

    /// The constant term ε(s).
    pub fn augmentation(&self) -> Q {
        self.coeff(&[])
    }

    /// Terms ordered by degree, then lexicographically.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &Q)> + '_ {
        let rank = self.rank;
        self.strata
            .iter()
            .enumerate()
            .flat_map(move |(d, st)| st.iter().map(move |(&k, c)| (decode(k, d, rank), c)))
    }

    pub fn num_terms(&self) -> usize {
        self.strata.iter().map(|s| s.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.strata.iter().all(|s| s.is_empty())
    }

    /// Lowest degree carrying a nonzero term.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.strata.iter().position(|s| !s.is_empty())
    }

    /// Whether every term has degree exactly `k`.
    pub fn is_homogeneous_of(&self, k: usize) -> bool {
        self.strata.iter().enumerate().all(|(d, s)| d == k || s.is_empty())
    }

    /// The degree-`k` component.
    pub fn homogeneous(&self, k: usize) -> Self {
        let mut s = Self::zero(self.rank, self.cap);
        if k <= self.cap {
            s.strata[k] = self.strata[k].clone();
        }
        s
    }

    /// Drops all terms of degree below `k`.
    pub fn from_degree(&self, k: usize) -> Self {
        let mut s = self.clone();
        for st in s.strata.iter_mut().take(k.min(self.cap + 1)) {
            st.clear();
        }
        s
    }

    /// Reinterprets with a smaller cap, discarding higher terms.
    pub fn truncate(&self, cap: usize) -> Self {
        assert!(cap <= self.cap, "truncate can only lower the cap");
        TensorSeries { rank: self.rank, cap, strata: self.strata[..=cap].to_vec() }
    }

    /// Reinterprets with a larger cap; the new strata are zero.
    pub fn widen(&self, cap: usize) -> Self {
        assert!(cap >= self.cap, "widen can only raise the cap");
        let mut s = Self::zero(self.rank, cap);
        s.strata[..=self.cap].clone_from_slice(&self.strata);
        s
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rank == other.rank && self.cap == other.cap
    }

    fn shape_check(&self, other: &Self) {
        assert!(self.same_shape(other), "truncation mismatch: ({}, {}) vs ({}, {})", self.rank, self.cap, other.rank, other.cap);
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::TruncationMismatch);
        }
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::TruncationMismatch);
        }
        Ok(self * other)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.rank, self.cap);
        }
        let mut s = self.clone();
        for st in &mut s.strata {
            for v in st.values_mut() {
                *v *= c;
            }
        }
        s
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        self.shape_check(other);
        for (a, b) in self.strata.iter_mut().zip(&other.strata) {
            for (&k, c) in b {
                add_into(a, k, c.clone());
            }
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Self) {
        self.shape_check(other);
        for (a, b) in self.strata.iter_mut().zip(&other.strata) {
            for (&k, c) in b {
                add_into(a, k, -c.clone());
            }
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &Self, c: &Q) {
        self.shape_check(other);
        if c.is_zero() {
            return;
        }
        for (a, b) in self.strata.iter_mut().zip(&other.strata) {
            for (&k, v) in b {
                add_into(a, k, v * c);
            }
        }
    }

    /// Truncated product; the result never holds terms above the cap.
    pub fn mul_ref(&self, other: &Self) -> Self {
        self.shape_check(other);
        let (rank, cap) = (self.rank, self.cap);
        let mut out = Self::zero(rank, cap);
        for (da, sa) in self.strata.iter().enumerate() {
            if sa.is_empty() {
                continue;
            }
            for (db, sb) in other.strata.iter().enumerate().take(cap - da + 1) {
                if sb.is_empty() {
                    continue;
                }
                let shift = key_pow(rank, db);
                let target = &mut out.strata[da + db];
                for (&ka, ca) in sa {
                    let base = ka * shift;
                    for (&kb, cb) in sb {
                        add_into(target, base + kb, ca * cb);
                    }
                }
            }
        }
        out
    }

    /// `self · x_i`.
    pub fn mul_x_right(&self, i: usize) -> Self {
        let mut out = Self::zero(self.rank, self.cap);
        for d in 0..self.cap {
            let target = &mut out.strata[d + 1];
            for (&k, c) in &self.strata[d] {
                target.insert(k * self.rank as u64 + i as u64, c.clone());
            }
        }
        out
    }

    /// `x_i · self`.
    pub fn mul_x_left(&self, i: usize) -> Self {
        let mut out = Self::zero(self.rank, self.cap);
        for d in 0..self.cap {
            let shift = key_pow(self.rank, d) * i as u64;
            let target = &mut out.strata[d + 1];
            for (&k, c) in &self.strata[d] {
                target.insert(shift + k, c.clone());
            }
        }
        out
    }

    /// The part of `self` whose monomials start with `x_i`, with that letter
    /// removed (the left partial derivative in the tensor algebra).
    pub fn strip_left(&self, i: usize) -> Self {
        let mut out = Self::zero(self.rank, self.cap);
        for d in 1..=self.cap {
            let p = key_pow(self.rank, d - 1);
            let lo = i as u64 * p;
            for (&k, c) in self.strata[d].range(lo..lo + p) {
                out.strata[d - 1].insert(k - lo, c.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.rank, self.cap);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse via the geometric series.
    pub fn invert(&self) -> Result<Self> {
        let e = self.augmentation();
        if e.is_zero() {
            return Err(Error::NotAUnit);
        }
        let einv = e.recip();
        let mut n = self.scale(&einv);
        n.strata[0].clear();
        let neg_n = -&n;
        let mut acc = Self::one(self.rank, self.cap);
        let mut power = acc.clone();
        for _ in 0..self.cap {
            power = &power * &neg_n;
            if power.is_zero() {
                break;
            }
            acc.add_assign_ref(&power);
        }
        Ok(acc.scale(&einv))
    }

    /// `log(u) = Σ (−1)^{k−1}/k (u−1)^k`, for `ε(u) = 1`.
    pub fn log(&self) -> Result<Self> {
        let e = self.augmentation();
        if !e.is_one() {
            return Err(Error::BadAugmentation { expected: "1".into(), found: format_q(&e) });
        }
        let mut n = self.clone();
        n.strata[0].clear();
        let mut acc = Self::zero(self.rank, self.cap);
        let mut power = Self::one(self.rank, self.cap);
        for k in 1..=self.cap as i64 {
            power = &power * &n;
            if power.is_zero() {
                break;
            }
            let c = Q::new(if k % 2 == 1 { 1.into() } else { (-1).into() }, k.into());
            acc.add_scaled(&power, &c);
        }
        Ok(acc)
    }

    /// `exp(v) = Σ v^k / k!`, for `ε(v) = 0`.
    pub fn exp(&self) -> Result<Self> {
        let e = self.augmentation();
        if !e.is_zero() {
            return Err(Error::BadAugmentation { expected: "0".into(), found: format_q(&e) });
        }
        let mut acc = Self::one(self.rank, self.cap);
        let mut power = acc.clone();
        for k in 1..=self.cap as i64 {
            power = (&power * self).scale(&Q::new(1.into(), k.into()));
            if power.is_zero() {
                break;
            }
            acc.add_assign_ref(&power);
        }
        Ok(acc)
    }

    /// `{"cap": D, "terms": [{"mono": [..1-based..], "coeff": "p/q"}]}`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .map(|(m, c)| json!({"mono": m.iter().map(|i| i + 1).collect::<Vec<_>>(), "coeff": format_q(c)}))
            .collect();
        json!({"cap": self.cap, "terms": terms})
    }

    pub fn from_json(v: &Value, rank: usize) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("series JSON: {m}"));
        let cap = v.get("cap").and_then(Value::as_u64).ok_or_else(|| bad("missing cap"))? as usize;
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
        let mut s = Self::zero(rank, cap);
        for t in terms {
            let mono = t.get("mono").and_then(Value::as_array).ok_or_else(|| bad("missing mono"))?;
            let mono: Vec<usize> = mono
                .iter()
                .map(|i| match i.as_u64() {
                    Some(k) if k >= 1 && (k as usize) <= rank => Ok(k as usize - 1),
                    _ => Err(bad("monomial index out of range")),
                })
                .collect::<Result<_>>()?;
            if mono.len() > cap {
                return Err(bad("monomial longer than cap"));
            }
            let c = parse_q(t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("missing coeff"))?)?;
            s.add_monomial(&mono, c);
        }
        Ok(s)
    }
}

impl<'a> Add for &'a TensorSeries {
    type Output = TensorSeries;
    fn add(self, rhs: Self) -> TensorSeries {
        let mut s = self.clone();
        s.add_assign_ref(rhs);
        s
    }
}

impl<'a> Sub for &'a TensorSeries {
    type Output = TensorSeries;
    fn sub(self, rhs: Self) -> TensorSeries {
        let mut s = self.clone();
        s.sub_assign_ref(rhs);
        s
    }
}

impl<'a> Mul for &'a TensorSeries {
    type Output = TensorSeries;
    fn mul(self, rhs: Self) -> TensorSeries {
        self.mul_ref(rhs)
    }
}

impl<'a> Neg for &'a TensorSeries {
    type Output = TensorSeries;
    fn neg(self) -> TensorSeries {
        self.scale(&-Q::one())
    }
}

/// A multiplicative map `γ_i ↦ 1 + x_i + (higher)` from the free group into the
/// truncated tensor algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    images: Vec<TensorSeries>,
    inverses: Vec<TensorSeries>,
    standard: bool,
}

impl Expansion {
    /// The standard Magnus expansion `γ_i ↦ 1 + x_i`.
    pub fn standard(rank: usize, cap: usize) -> Self {
        let images: Vec<TensorSeries> =
            (0..rank).map(|i| &TensorSeries::one(rank, cap) + &TensorSeries::x(rank, cap, i)).collect();
        let inverses = images.iter().map(|u| u.invert().expect("unit")).collect();
        Expansion { images, inverses, standard: true }
    }

    /// Any assignment with `ε = 1` and degree-one part `x_i`.
    pub fn custom(images: Vec<TensorSeries>) -> Result<Self> {
        let rank = images.first().map(|u| u.rank()).ok_or(Error::PreconditionViolated("empty expansion".into()))?;
        let cap = images[0].cap();
        for (i, u) in images.iter().enumerate() {
            if u.rank() != rank || u.cap() != cap {
                return Err(Error::TruncationMismatch);
            }
            let lin = TensorSeries::x(rank, cap, i);
            if !u.augmentation().is_one() || (cap >= 1 && u.homogeneous(1) != lin) {
                return Err(Error::PreconditionViolated(format!("image of generator {} is not 1 + x{} + higher", i + 1, i + 1)));
            }
        }
        if images.len() != rank {
            return Err(Error::PreconditionViolated("expansion needs one image per generator".into()));
        }
        let inverses = images.iter().map(|u| u.invert()).collect::<Result<_>>()?;
        Ok(Expansion { images, inverses, standard: false })
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn cap(&self) -> usize {
        self.images[0].cap()
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn image(&self, i: usize) -> &TensorSeries {
        &self.images[i]
    }

    pub fn truncate(&self, cap: usize) -> Self {
        Expansion {
            images: self.images.iter().map(|u| u.truncate(cap)).collect(),
            inverses: self.inverses.iter().map(|u| u.truncate(cap)).collect(),
            standard: self.standard,
        }
    }

    /// `s · θ(letter)`.
    pub fn mul_letter(&self, s: &TensorSeries, l: Letter) -> TensorSeries {
        if self.standard {
            if !l.inv {
                return s + &s.mul_x_right(l.gen);
            }
            let mut acc = s.clone();
            let mut t = s.clone();
            loop {
                t = -&t.mul_x_right(l.gen);
                if t.is_zero() {
                    return acc;
                }
                acc.add_assign_ref(&t);
            }
        }
        let f = if l.inv { &self.inverses[l.gen] } else { &self.images[l.gen] };
        s * f
    }

    /// θ(w).
    pub fn word(&self, w: &GroupWord) -> TensorSeries {
        let mut s = TensorSeries::one(self.rank(), self.cap());
        for &l in w.letters() {
            s = self.mul_letter(&s, l);
        }
        s
    }

    /// Linear extension of θ.
    pub fn ring(&self, r: &RingElement) -> TensorSeries {
        let mut s = TensorSeries::zero(self.rank(), self.cap());
        for (w, c) in r.terms() {
            s.add_scaled(&self.word(w), c);
        }
        s
    }
}

/// Lowest nonzero degree of θ(w) − 1.
pub fn word_degree_bound(w: &GroupWord, expansion: &Expansion) -> DegreeBound {
    let mut s = expansion.word(w);
    s.stratum_mut(0).clear();
    match s.lowest_degree() {
        Some(k) => DegreeBound::Finite(k),
        None => DegreeBound::ExceedsCap,
    }
}

/// Integer-valued sign helper used by several modules.
pub(crate) fn alt_sign(k: usize) -> Q {
    if k % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Whether every coefficient is an integer.
pub fn is_integral(s: &TensorSeries) -> bool {
    s.terms().all(|(_, c)| c.is_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q_frac, q_int};
    use proptest::prelude::*;

    fn x(rank: usize, cap: usize, i: usize) -> TensorSeries {
        TensorSeries::x(rank, cap, i)
    }

    fn mono(rank: usize, cap: usize, m: &[usize], c: Q) -> TensorSeries {
        TensorSeries::monomial(rank, cap, m, c)
    }

    #[test]
    fn invert_examples() {
        let one = TensorSeries::one(1, 3);
        let inv = (&one + &x(1, 3, 0)).invert().unwrap();
        let want = TensorSeries::from_terms(1, 3, (0..=3).map(|k| (vec![0; k], alt_sign(k))));
        assert_eq!(inv, want);
        assert_eq!(TensorSeries::constant(1, 3, q_int(2)).invert().unwrap(), TensorSeries::constant(1, 3, q_frac(1, 2)));
        let u = &TensorSeries::one(2, 4) + &mono(2, 4, &[0, 1], q_int(1));
        let want = TensorSeries::from_terms(2, 4, [(vec![], q_int(1)), (vec![0, 1], q_int(-1)), (vec![0, 1, 0, 1], q_int(1))]);
        assert_eq!(u.invert().unwrap(), want);
        assert_eq!(&u * &want, TensorSeries::one(2, 4));
        assert_eq!(x(2, 4, 0).invert(), Err(Error::NotAUnit));
    }

    #[test]
    fn log_exp_examples() {
        let u = &TensorSeries::one(1, 2) + &x(1, 2, 0);
        assert_eq!(u.log().unwrap(), TensorSeries::from_terms(1, 2, [(vec![0], q_int(1)), (vec![0, 0], q_frac(-1, 2))]));
        let e = x(1, 3, 0).exp().unwrap();
        let want = TensorSeries::from_terms(1, 3, [(vec![], q_int(1)), (vec![0], q_int(1)), (vec![0, 0], q_frac(1, 2)), (vec![0, 0, 0], q_frac(1, 6))]);
        assert_eq!(e, want);
        assert!(matches!(x(1, 3, 0).log(), Err(Error::BadAugmentation { .. })));
        assert!(matches!(TensorSeries::one(1, 3).exp(), Err(Error::BadAugmentation { .. })));
    }

    #[test]
    fn bch_degree_two() {
        // Frozen from the second-order BCH term ½[x₁, x₂] plus the two −½x_i² terms.
        let one = TensorSeries::one(2, 2);
        let u = &(&one + &x(2, 2, 0)) * &(&one + &x(2, 2, 1));
        let got = u.log().unwrap().homogeneous(2);
        let want = TensorSeries::from_terms(
            2,
            2,
            [(vec![0, 0], q_frac(-1, 2)), (vec![1, 1], q_frac(-1, 2)), (vec![0, 1], q_frac(1, 2)), (vec![1, 0], q_frac(-1, 2))],
        );
        assert_eq!(got, want);
    }

    #[test]
    fn magnus_examples() {
        let th = Expansion::standard(2, 3);
        assert_eq!(th.word(&GroupWord::parse("g1").unwrap()), &TensorSeries::one(2, 3) + &x(2, 3, 0));
        let inv = th.word(&GroupWord::parse("G1").unwrap());
        assert_eq!(inv, TensorSeries::from_terms(2, 3, (0..=3).map(|k| (vec![0; k], alt_sign(k)))));
        let c = th.word(&GroupWord::parse("g1 g2 G1 G2").unwrap()).homogeneous(2);
        assert_eq!(c, &mono(2, 3, &[0, 1], q_int(1)) - &mono(2, 3, &[1, 0], q_int(1)));
    }

    #[test]
    fn degree_bound_examples() {
        let th = Expansion::standard(2, 4);
        let p = |s: &str| GroupWord::parse(s).unwrap();
        assert_eq!(word_degree_bound(&p("g1"), &th), DegreeBound::Finite(1));
        assert_eq!(word_degree_bound(&p("g1 g2 G1 G2"), &th), DegreeBound::Finite(2));
        assert_eq!(word_degree_bound(&GroupWord::identity(), &th), DegreeBound::ExceedsCap);
        // Iterated commutators of known weight.
        let a = p("g1");
        let b = p("g2");
        let c2 = GroupWord::commutator(&a, &b);
        let c3 = GroupWord::commutator(&c2, &a);
        let c4 = GroupWord::commutator(&c3, &b);
        assert_eq!(word_degree_bound(&c3, &th), DegreeBound::Finite(3));
        assert_eq!(word_degree_bound(&c4, &th), DegreeBound::Finite(4));
        assert_eq!(word_degree_bound(&GroupWord::commutator(&c4, &a), &th), DegreeBound::ExceedsCap);
    }

    #[test]
    fn strip_and_shift() {
        let s = TensorSeries::from_terms(2, 3, [(vec![0, 1], q_int(2)), (vec![1, 0, 0], q_int(3)), (vec![0], q_int(5))]);
        assert_eq!(s.strip_left(0), TensorSeries::from_terms(2, 3, [(vec![1], q_int(2)), (vec![], q_int(5))]));
        assert_eq!(s.strip_left(1), TensorSeries::from_terms(2, 3, [(vec![0, 0], q_int(3))]));
        assert_eq!(x(2, 3, 1).mul_x_left(0), mono(2, 3, &[0, 1], q_int(1)));
        assert_eq!(x(2, 3, 1).mul_x_right(0), mono(2, 3, &[1, 0], q_int(1)));
    }

    #[test]
    fn json_round_trip() {
        let s = TensorSeries::from_terms(2, 3, [(vec![0, 1, 0], q_frac(-3, 2)), (vec![], q_int(1))]);
        let v = s.to_json();
        assert_eq!(v["terms"][1]["mono"], json!([1, 2, 1]));
        assert_eq!(TensorSeries::from_json(&v, 2).unwrap(), s);
    }

    fn series_strategy(rank: usize, cap: usize) -> impl Strategy<Value = TensorSeries> {
        prop::collection::vec((prop::collection::vec(0..rank, 0..=cap), -3i64..4), 0..8)
            .prop_map(move |ts| TensorSeries::from_terms(rank, cap, ts.into_iter().map(|(m, c)| (m, q_int(c)))))
    }

    fn word_strategy(rank: usize) -> impl Strategy<Value = GroupWord> {
        prop::collection::vec((0..rank, any::<bool>()), 0..8)
            .prop_map(|ls| GroupWord::from_letters(ls.into_iter().map(|(g, i)| Letter::new(g, i))))
    }

    proptest! {
        #[test]
        fn ring_axioms(a in series_strategy(2, 4), b in series_strategy(2, 4), c in series_strategy(2, 4)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        }

        #[test]
        fn magnus_is_multiplicative(u in word_strategy(3), v in word_strategy(3)) {
            let th = Expansion::standard(3, 4);
            prop_assert_eq!(th.word(&u.mul(&v)), &th.word(&u) * &th.word(&v));
        }

        #[test]
        fn log_exp_inverse(a in series_strategy(2, 4)) {
            let v = a.from_degree(1);
            prop_assert_eq!(v.exp().unwrap().log().unwrap(), v.clone());
            let u = &TensorSeries::one(2, 4) + &v;
            prop_assert_eq!(u.log().unwrap().exp().unwrap(), u);
        }

        #[test]
        fn custom_expansion_is_multiplicative(u in word_strategy(2), v in word_strategy(2), c in -2i64..3) {
            let images = (0..2).map(|i| {
                let mut s = &TensorSeries::one(2, 4) + &x(2, 4, i);
                s.add_monomial(&[i, 1 - i], q_int(c));
                s
            }).collect();
            let th = Expansion::custom(images).unwrap();
            prop_assert_eq!(th.word(&u.mul(&v)), &th.word(&u) * &th.word(&v));
        }
    }
}
