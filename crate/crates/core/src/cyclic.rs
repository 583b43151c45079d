//! Necklace classes `∏_{k≤D} H^{⊗k}/ℤ_k`, the involution 𝔯 and its
//! eigenprojections.
//!
//! A class is keyed by its lexicographically minimal rotation, packed like a
//! tensor monomial. Projection adds the coefficient of every monomial to its
//! class, so a periodic word such as `x₁x₂x₁x₂` keeps coefficient 1.
//!
//! The 1-loop diagram space in degree `d` is modeled by the (+1)-eigenspace
//! of 𝔯: the diagram `O(x₁,…,x_d)` corresponds to `(w + 𝔯w)/2` for
//! `w = x₁⊗⋯⊗x_d`. No further normalization is applied.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::johnson::ExpansionAuto;
use crate::rational::{format_q, parse_q, q_frac, Q};
use crate::series::{add_into, decode, encode, key_pow, TensorSeries};

/// Minimal rotation of a packed degree-`d` monomial.
pub(crate) fn canonical_key(key: u64, d: usize, rank: usize) -> u64 {
    if d <= 1 {
        return key;
    }
    let hi = key_pow(rank, d - 1);
    let mut best = key;
    let mut k = key;
    for _ in 1..d {
        k = (k % hi) * rank as u64 + k / hi;
        best = best.min(k);
    }
    best
}

/// A necklace in canonical (minimal-rotation) form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicWord {
    letters: Vec<usize>,
}

impl CyclicWord {
    pub fn new(letters: &[usize]) -> Self {
        assert!(!letters.is_empty(), "cyclic words have degree at least 1");
        let d = letters.len();
        let best = (0..d)
            .map(|r| letters[r..].iter().chain(&letters[..r]).copied().collect::<Vec<_>>())
            .min()
            .unwrap();
        CyclicWord { letters: best }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn degree(&self) -> usize {
        self.letters.len()
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.letters {
            write!(f, "x{}", i + 1)?;
        }
        Ok(())
    }
}

/// A graded sum of necklaces in degrees `1..=cap`.
#[derive(Clone, PartialEq, Eq)]
pub struct CyclicSeries {
    rank: usize,
    cap: usize,
    strata: Vec<BTreeMap<u64, Q>>,
}

impl fmt::Debug for CyclicSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicSeries(rank={}, cap={}; {})", self.rank, self.cap, self)
    }
}

impl fmt::Display for CyclicSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (w, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*cyc({w})", format_q(c))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl CyclicSeries {
    pub fn zero(rank: usize, cap: usize) -> Self {
        CyclicSeries { rank, cap, strata: vec![BTreeMap::new(); cap + 1] }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<usize>, Q)>>(rank: usize, cap: usize, terms: I) -> Self {
        let mut s = Self::zero(rank, cap);
        for (w, c) in terms {
            s.add_word(&w, c);
        }
        s
    }

    /// Adds `c · cyc(w)`; words longer than the cap are dropped.
    pub fn add_word(&mut self, w: &[usize], c: Q) {
        assert!(!w.is_empty(), "cyclic words have degree at least 1");
        assert!(w.iter().all(|&i| i < self.rank), "letter outside rank");
        let d = w.len();
        if d <= self.cap {
            add_into(&mut self.strata[d], canonical_key(encode(w, self.rank), d, self.rank), c);
        }
    }

    /// The degree-1 class of an H-vector.
    pub fn from_h_vector(rank: usize, cap: usize, h: &[Q]) -> Self {
        Self::from_terms(rank, cap, h.iter().enumerate().map(|(i, c)| (vec![i], c.clone())))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeff(&self, w: &[usize]) -> Q {
        let d = w.len();
        if d == 0 || d > self.cap {
            return Q::zero();
        }
        let k = canonical_key(encode(w, self.rank), d, self.rank);
        self.strata[d].get(&k).cloned().unwrap_or_else(Q::zero)
    }

    /// Terms ordered by degree, then by canonical word.
    pub fn terms(&self) -> impl Iterator<Item = (CyclicWord, &Q)> + '_ {
        let rank = self.rank;
        self.strata.iter().enumerate().flat_map(move |(d, st)| {
            st.iter().map(move |(&k, c)| (CyclicWord { letters: decode(k, d, rank) }, c))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.strata.iter().all(|s| s.is_empty())
    }

    pub fn lowest_degree(&self) -> Option<usize> {
        self.strata.iter().position(|s| !s.is_empty())
    }

    /// Number of classes with nonzero coefficient in degree `k`.
    pub fn support_size(&self, k: usize) -> usize {
        self.strata.get(k).map_or(0, |s| s.len())
    }

    /// The degree-`k` part.
    pub fn slice(&self, k: usize) -> Self {
        let mut s = Self::zero(self.rank, self.cap);
        if k <= self.cap {
            s.strata[k] = self.strata[k].clone();
        }
        s
    }

    /// The degree-1 part read as an H-vector.
    pub fn h_vector(&self) -> Vec<Q> {
        (0..self.rank).map(|i| self.coeff(&[i])).collect()
    }

    pub fn truncate(&self, cap: usize) -> Self {
        assert!(cap <= self.cap, "truncate can only lower the cap");
        CyclicSeries { rank: self.rank, cap, strata: self.strata[..=cap].to_vec() }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rank == other.rank && self.cap == other.cap
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_shape(other), "truncation mismatch");
        let mut s = self.clone();
        for (a, b) in s.strata.iter_mut().zip(&other.strata) {
            for (&k, c) in b {
                add_into(a, k, c.clone());
            }
        }
        s
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::TruncationMismatch);
        }
        Ok(self.add(other))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
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

    /// `[{"degree": k, "word": [..1-based..], "coeff": "p/q"}, ...]`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms()
                .map(|(w, c)| {
                    json!({
                        "degree": w.degree(),
                        "word": w.letters().iter().map(|i| i + 1).collect::<Vec<_>>(),
                        "coeff": format_q(c),
                    })
                })
                .collect(),
        )
    }

    pub fn from_json(v: &Value, rank: usize, cap: usize) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("cyclic JSON: {m}"));
        let arr = v.as_array().ok_or_else(|| bad("expected an array"))?;
        let mut s = Self::zero(rank, cap);
        for t in arr {
            let w = t.get("word").and_then(Value::as_array).ok_or_else(|| bad("missing word"))?;
            let w: Vec<usize> = w
                .iter()
                .map(|i| match i.as_u64() {
                    Some(k) if k >= 1 && (k as usize) <= rank => Ok(k as usize - 1),
                    _ => Err(bad("letter out of range")),
                })
                .collect::<Result<_>>()?;
            if w.is_empty() || w.len() > cap {
                return Err(bad("word degree outside 1..=cap"));
            }
            if let Some(d) = t.get("degree").and_then(Value::as_u64) {
                if d as usize != w.len() {
                    return Err(bad("degree does not match word length"));
                }
            }
            let c = parse_q(t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("missing coeff"))?)?;
            s.add_word(&w, c);
        }
        Ok(s)
    }
}

/// Projection `T̂₁ → T̂₁ / [T̂₁, T̂₁]`.
pub fn project_cyclic(s: &TensorSeries) -> Result<CyclicSeries> {
    if !s.augmentation().is_zero() {
        return Err(Error::NonzeroConstantTerm);
    }
    let (rank, cap) = (s.rank(), s.cap());
    let mut out = CyclicSeries::zero(rank, cap);
    for d in 1..=cap {
        for (&k, c) in s.stratum(d) {
            add_into(&mut out.strata[d], canonical_key(k, d, rank), c.clone());
        }
    }
    Ok(out)
}

/// 𝔯: reverse each word and multiply by `(−1)^d`.
pub fn rho(c: &CyclicSeries) -> CyclicSeries {
    let mut out = CyclicSeries::zero(c.rank, c.cap);
    for (d, st) in c.strata.iter().enumerate() {
        for (&k, v) in st {
            let mut w = decode(k, d, c.rank);
            w.reverse();
            let v = if d % 2 == 1 { -v.clone() } else { v.clone() };
            out.add_word(&w, v);
        }
    }
    out
}

/// `(c − 𝔯c)/2`.
pub fn p_minus(c: &CyclicSeries) -> CyclicSeries {
    c.sub(&rho(c)).scale(&q_frac(1, 2))
}

/// `(c + 𝔯c)/2`.
pub fn p_plus(c: &CyclicSeries) -> CyclicSeries {
    c.add(&rho(c)).scale(&q_frac(1, 2))
}

/// Applies the algebra automorphism `x_i ↦ u_i − 1` to a lift of each class
/// and projects back.
pub fn act_auto(sigma: &ExpansionAuto, c: &CyclicSeries) -> Result<CyclicSeries> {
    if sigma.rank() != c.rank || sigma.cap() < c.cap {
        return Err(Error::TruncationMismatch);
    }
    let sigma = sigma.truncate(c.cap);
    let lifted = lift(c);
    project_cyclic(&sigma.apply(&lifted))
}

/// A tensor representative of a cyclic series (each class by its canonical word).
pub fn lift(c: &CyclicSeries) -> TensorSeries {
    let mut s = TensorSeries::zero(c.rank, c.cap);
    for (d, st) in c.strata.iter().enumerate() {
        for (&k, v) in st {
            add_into(s.stratum_mut(d), k, v.clone());
        }
    }
    s
}

fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// `(1/d) Σ_{e | d} φ(e) n^{d/e}`: the number of necklaces of length `d` over
/// `n` letters.
pub fn necklace_count(d: usize, n: usize) -> u64 {
    let d64 = d as u64;
    let total: u64 = (1..=d64).filter(|e| d64 % e == 0).map(|e| euler_phi(e) * (n as u64).pow((d64 / e) as u32)).sum();
    total / d64
}

/// All canonical necklaces of length `d` over `n` letters, in order.
pub fn necklaces(d: usize, n: usize) -> Vec<CyclicWord> {
    (0..key_pow(n, d))
        .filter(|&k| canonical_key(k, d, n) == k)
        .map(|k| CyclicWord { letters: decode(k, d, n) })
        .collect()
}

/// A degree-`d` element of the (+1)-eigenspace of 𝔯.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopDiagramElement {
    degree: usize,
    value: CyclicSeries,
}

impl LoopDiagramElement {
    pub fn new(degree: usize, value: CyclicSeries) -> Result<Self> {
        if value.slice(degree) != value {
            return Err(Error::PreconditionViolated(format!("value is not concentrated in degree {degree}")));
        }
        if rho(&value) != value {
            return Err(Error::PreconditionViolated("value is not fixed by the involution".into()));
        }
        Ok(LoopDiagramElement { degree, value })
    }

    /// `p₊` of the degree-`d` slice.
    pub fn project(c: &CyclicSeries, degree: usize) -> Self {
        LoopDiagramElement { degree, value: p_plus(&c.slice(degree)) }
    }

    /// The diagram `O(x_{i₁},…,x_{i_d})` for basis letters.
    pub fn one_loop(rank: usize, cap: usize, letters: &[usize]) -> Self {
        let mut w = CyclicSeries::zero(rank, cap);
        w.add_word(letters, Q::one());
        Self::project(&w, letters.len())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value(&self) -> &CyclicSeries {
        &self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_int;
    use crate::series::Expansion;
    use crate::word::{GroupWord, Letter};
    use proptest::prelude::*;

    fn cyc(rank: usize, cap: usize, terms: &[(&[usize], i64)]) -> CyclicSeries {
        CyclicSeries::from_terms(rank, cap, terms.iter().map(|(w, c)| (w.to_vec(), q_int(*c))))
    }

    fn ts(rank: usize, cap: usize, terms: &[(&[usize], i64)]) -> TensorSeries {
        TensorSeries::from_terms(rank, cap, terms.iter().map(|(w, c)| (w.to_vec(), q_int(*c))))
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_cyclic(&ts(2, 4, &[(&[1, 0], 1)])).unwrap(), cyc(2, 4, &[(&[0, 1], 1)]));
        assert!(project_cyclic(&ts(2, 4, &[(&[0, 1], 1), (&[1, 0], -1)])).unwrap().is_zero());
        let p = project_cyclic(&ts(2, 4, &[(&[0, 1, 0, 1], 1)])).unwrap();
        assert_eq!(p.coeff(&[0, 1, 0, 1]), q_int(1));
        assert_eq!(p.coeff(&[1, 0, 1, 0]), q_int(1));
        assert_eq!(project_cyclic(&TensorSeries::one(2, 3)), Err(Error::NonzeroConstantTerm));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&cyc(3, 3, &[(&[0, 1, 2], 1)])), cyc(3, 3, &[(&[0, 2, 1], -1)]));
        assert_eq!(rho(&cyc(2, 3, &[(&[0, 1], 1)])), cyc(2, 3, &[(&[0, 1], 1)]));
    }

    #[test]
    fn projector_examples() {
        assert!(p_minus(&cyc(2, 3, &[(&[0, 1], 1)])).is_zero());
        let half = q_frac(1, 2);
        let want = CyclicSeries::from_terms(3, 3, [(vec![0, 1, 2], half.clone()), (vec![0, 2, 1], -half)]);
        assert_eq!(p_plus(&cyc(3, 3, &[(&[0, 1, 2], 1)])), want);
        assert!(p_minus(&cyc(2, 3, &[(&[0, 1], -2)])).is_zero());
    }

    #[test]
    fn swap_action() {
        let th = Expansion::standard(2, 3);
        let sigma = ExpansionAuto::from_words(&[GroupWord::parse("g2").unwrap(), GroupWord::parse("g1").unwrap()], &th).unwrap();
        let got = act_auto(&sigma, &cyc(2, 3, &[(&[0, 0, 1], 1)])).unwrap();
        assert_eq!(got, cyc(2, 3, &[(&[0, 1, 1], 1)]));
        let id = ExpansionAuto::identity(2, 3);
        let c = cyc(2, 3, &[(&[0, 0, 1], 3), (&[1], -1)]);
        assert_eq!(act_auto(&id, &c).unwrap(), c);
    }

    #[test]
    fn necklace_counts_match_orbits() {
        for n in [2usize, 4] {
            for d in 1..=5 {
                assert_eq!(necklaces(d, n).len() as u64, necklace_count(d, n), "d={d} n={n}");
            }
        }
        // Classic values: binary necklaces of length 1..6.
        let binary: Vec<u64> = (1..=6).map(|d| necklace_count(d, 2)).collect();
        assert_eq!(binary, vec![2, 3, 4, 6, 8, 14]);
    }

    #[test]
    fn loop_diagram_requires_eigenvector() {
        let w = cyc(3, 3, &[(&[0, 1, 2], 1)]);
        assert!(LoopDiagramElement::new(3, w.clone()).is_err());
        let o = LoopDiagramElement::one_loop(3, 3, &[0, 1, 2]);
        assert_eq!(rho(o.value()), *o.value());
        assert!(LoopDiagramElement::new(3, o.value().clone()).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let c = CyclicSeries::from_terms(2, 3, [(vec![0, 1, 0], q_frac(1, 3)), (vec![1], q_int(-2))]);
        let v = c.to_json();
        assert_eq!(v[0], json!({"degree": 1, "word": [2], "coeff": "-2"}));
        assert_eq!(CyclicSeries::from_json(&v, 2, 3).unwrap(), c);
    }

    fn homogeneous(rank: usize, cap: usize, d: usize) -> impl Strategy<Value = TensorSeries> {
        prop::collection::vec((prop::collection::vec(0..rank, d), -3i64..4), 1..5)
            .prop_map(move |t| TensorSeries::from_terms(rank, cap, t.into_iter().map(|(m, c)| (m, q_int(c)))))
    }

    fn word_strategy(rank: usize, len: usize) -> impl Strategy<Value = GroupWord> {
        prop::collection::vec((0..rank, any::<bool>()), 0..=len)
            .prop_map(|ls| GroupWord::from_letters(ls.into_iter().map(|(g, i)| Letter::new(g, i))))
    }

    proptest! {
        #[test]
        fn trace_property(s in homogeneous(3, 5, 2), t in homogeneous(3, 5, 3)) {
            prop_assert_eq!(project_cyclic(&(&s * &t)).unwrap(), project_cyclic(&(&t * &s)).unwrap());
        }

        #[test]
        fn rho_is_involution(s in homogeneous(3, 4, 3), t in homogeneous(3, 4, 4)) {
            let c = project_cyclic(&(&s + &t)).unwrap();
            prop_assert_eq!(rho(&rho(&c)), c.clone());
            prop_assert_eq!(p_plus(&c).add(&p_minus(&c)), c.clone());
            prop_assert!(p_minus(&p_plus(&c)).is_zero());
        }

        #[test]
        fn cyclic_log_sees_only_homology(w in word_strategy(2, 5), u in word_strategy(2, 3), v in word_strategy(2, 3)) {
            let th = Expansion::standard(2, 5);
            let lhs = project_cyclic(&th.word(&w.mul(&GroupWord::commutator(&u, &v))).log().unwrap()).unwrap();
            let rhs = project_cyclic(&th.word(&w).log().unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn action_ignores_representative(a in homogeneous(2, 4, 1), b in homogeneous(2, 4, 3), imgs in prop::collection::vec(word_strategy(2, 4), 2)) {
            let th = Expansion::standard(2, 4);
            let images: Vec<GroupWord> = imgs.iter().enumerate().map(|(i, w)| GroupWord::generator(i).mul(&GroupWord::commutator(w, &GroupWord::generator(1 - i)))).collect();
            let sigma = ExpansionAuto::from_words(&images, &th).unwrap();
            let ab = project_cyclic(&sigma.apply(&(&a * &b))).unwrap();
            let ba = project_cyclic(&sigma.apply(&(&b * &a))).unwrap();
            prop_assert_eq!(ab, ba);
        }
    }
}
