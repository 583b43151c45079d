//! Filtered automorphisms of the completed tensor algebra, the Johnson
//! filtration degree, τ_d, the intersection form and the trace Tr_d.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::cyclic::{project_cyclic, CyclicSeries};
use crate::error::{Error, Result};
use crate::k1::SeriesMatrix;
use crate::linalg::{rat_det, rat_inverse, RatMatrix};
use crate::rational::Q;
use crate::series::{alt_sign, DegreeBound, Expansion, TensorSeries};
use crate::word::GroupWord;

/// An algebra automorphism of `T̂` given by `x_i ↦ u_i − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionAuto {
    rank: usize,
    cap: usize,
    images: Vec<TensorSeries>,
}

impl ExpansionAuto {
    pub fn identity(rank: usize, cap: usize) -> Self {
        let images = (0..rank).map(|i| &TensorSeries::one(rank, cap) + &TensorSeries::x(rank, cap, i)).collect();
        ExpansionAuto { rank, cap, images }
    }

    /// Validates `ε(u_i) = 1` and an invertible degree-one part.
    pub fn new(images: Vec<TensorSeries>) -> Result<Self> {
        let first = images.first().ok_or_else(|| Error::PreconditionViolated("no images".into()))?;
        let (rank, cap) = (first.rank(), first.cap());
        if images.len() != rank {
            return Err(Error::PreconditionViolated(format!("{} images for rank {rank}", images.len())));
        }
        for u in &images {
            if u.rank() != rank || u.cap() != cap {
                return Err(Error::TruncationMismatch);
            }
            if !u.augmentation().is_one() {
                return Err(Error::BadAugmentation { expected: "1".into(), found: crate::format_q(&u.augmentation()) });
            }
        }
        let s = ExpansionAuto { rank, cap, images };
        if rat_det(&s.linear_part()).is_zero() {
            return Err(Error::DegreeOnePartSingular);
        }
        Ok(s)
    }

    /// `θ_*φ = θ∘φ∘θ⁻¹` for a free-group endomorphism given on generators.
    /// For the standard expansion the images are simply `θ(φ(γ_i))`.
    pub fn from_words(words: &[GroupWord], theta: &Expansion) -> Result<Self> {
        let (rank, cap) = (theta.rank(), theta.cap());
        if words.len() != rank {
            return Err(Error::PreconditionViolated(format!("{} words for rank {rank}", words.len())));
        }
        for w in words {
            w.check_rank(rank)?;
        }
        let targets: Vec<TensorSeries> = words.iter().map(|w| theta.word(w)).collect();
        if theta.is_standard() {
            return Self::new(targets);
        }
        // Solve s(x_i) + h_i(s(x)) = θ(φγ_i) − 1 with h_i = θ(γ_i) − 1 − x_i.
        let one = TensorSeries::one(rank, cap);
        let corrections: Vec<TensorSeries> =
            (0..rank).map(|i| &(theta.image(i) - &one) - &TensorSeries::x(rank, cap, i)).collect();
        let mut current = ExpansionAuto { rank, cap, images: targets.clone() };
        for _ in 0..cap {
            let images: Vec<TensorSeries> =
                (0..rank).map(|i| &targets[i] - &current.apply(&corrections[i])).collect();
            let next = ExpansionAuto { rank, cap, images };
            if next == current {
                break;
            }
            current = next;
        }
        Self::new(current.images)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn images(&self) -> &[TensorSeries] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &TensorSeries {
        &self.images[i]
    }

    pub fn truncate(&self, cap: usize) -> Self {
        ExpansionAuto { rank: self.rank, cap, images: self.images.iter().map(|u| u.truncate(cap)).collect() }
    }

    /// Column `i` holds the degree-one part of `u_i`.
    pub fn linear_part(&self) -> RatMatrix {
        (0..self.rank).map(|j| (0..self.rank).map(|i| self.images[i].coeff(&[j])).collect()).collect()
    }

    /// Substitutes `x_i ↦ u_i − 1`, recursing on the leading letter.
    pub fn apply(&self, s: &TensorSeries) -> TensorSeries {
        assert!(s.rank() == self.rank && s.cap() <= self.cap, "truncation mismatch");
        let sub = if s.cap() == self.cap { self.clone() } else { self.truncate(s.cap()) };
        let one = TensorSeries::one(sub.rank, sub.cap);
        let vs: Vec<TensorSeries> = sub.images.iter().map(|u| u - &one).collect();
        apply_rec(&vs, s)
    }

    /// `σ∘σ'`: images `σ(u'_i)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.rank != other.rank || self.cap != other.cap {
            return Err(Error::TruncationMismatch);
        }
        Ok(ExpansionAuto { rank: self.rank, cap: self.cap, images: other.images.iter().map(|u| self.apply(u)).collect() })
    }

    /// Inverse by Newton-style correction through the inverse linear part.
    pub fn invert(&self) -> Result<Self> {
        let (rank, cap) = (self.rank, self.cap);
        let lin = self.linear_part();
        let lin_inv = rat_inverse(&lin).ok_or(Error::DegreeOnePartSingular)?;
        let linear_is_id = lin == crate::linalg::rat_identity(rank);
        let lin_inv_auto = ExpansionAuto {
            rank,
            cap,
            images: (0..rank)
                .map(|i| {
                    let mut u = TensorSeries::one(rank, cap);
                    for (j, row) in lin_inv.iter().enumerate() {
                        u.add_monomial(&[j], row[i].clone());
                    }
                    u
                })
                .collect(),
        };
        let xs: Vec<TensorSeries> = (0..rank).map(|i| TensorSeries::x(rank, cap, i)).collect();
        let mut t: Vec<TensorSeries> = xs.iter().map(|x| lin_inv_auto.apply(x)).collect();
        let one = TensorSeries::one(rank, cap);
        for _ in 0..cap {
            let residual: Vec<TensorSeries> = (0..rank).map(|i| &xs[i] - &self.apply(&t[i])).collect();
            if residual.iter().all(|r| r.is_zero()) {
                break;
            }
            for i in 0..rank {
                let e = if linear_is_id { residual[i].clone() } else { lin_inv_auto.apply(&residual[i]) };
                t[i].add_assign_ref(&e);
            }
        }
        Ok(ExpansionAuto { rank, cap, images: t.iter().map(|v| &one + v).collect() })
    }

    /// The values `(log σ)(x_i) = Σ (−1)^{k−1}/k (σ − id)^k(x_i)` of the
    /// derivation `log σ`; requires a unipotent linear part.
    pub fn log_derivation(&self) -> Result<Vec<TensorSeries>> {
        if self.ia_degree() == DegreeBound::Finite(0) {
            return Err(Error::FiltrationTooShallow { needed: 1, found: 0 });
        }
        let (rank, cap) = (self.rank, self.cap);
        Ok((0..rank)
            .map(|i| {
                let mut acc = TensorSeries::zero(rank, cap);
                let mut t = TensorSeries::x(rank, cap, i);
                for k in 1..=cap {
                    t = &self.apply(&t) - &t;
                    if t.is_zero() {
                        break;
                    }
                    acc.add_scaled(&t, &(alt_sign(k + 1) * Q::new(1.into(), (k as i64).into())));
                }
                acc
            })
            .collect())
    }

    /// Largest `d ≤ D` with `u_i − (1 + x_i) ∈ Î^{d+1}` for all `i`.
    pub fn ia_degree(&self) -> DegreeBound {
        let id = Self::identity(self.rank, self.cap);
        let low = self.images.iter().zip(&id.images).filter_map(|(u, e)| (u - e).lowest_degree()).min();
        match low {
            None => DegreeBound::ExceedsCap,
            Some(k) => DegreeBound::Finite(k - 1),
        }
    }

    /// τ_d: the degree-`(d+1)` part of `u_i − (1 + x_i)`.
    pub fn tau(&self, d: usize) -> Result<HomDerivation> {
        if d == 0 || d + 1 > self.cap {
            return Err(Error::PreconditionViolated(format!("τ_{d} needs 1 ≤ d < cap = {}", self.cap)));
        }
        if let DegreeBound::Finite(k) = self.ia_degree() {
            if k < d {
                return Err(Error::FiltrationTooShallow { needed: d, found: k });
            }
        }
        Ok(HomDerivation { degree: d, values: self.images.iter().map(|u| u.homogeneous(d + 1)).collect() })
    }

    /// Mag(σ)_{ij} = −θ(γ_i)·∂_i(u_j⁻¹), where `∂_i` takes the left factor of
    /// `x_i`; this is `bar(∂φ(γ_j)/∂γ_i)` for `σ = θ∘φ`. Stripping a letter
    /// loses one degree, so the result has cap `D − 1`.
    pub fn magnus_matrix(&self) -> Result<SeriesMatrix> {
        if self.cap == 0 {
            return Err(Error::PreconditionViolated("Magnus matrix needs cap ≥ 1".into()));
        }
        let (rank, cap) = (self.rank, self.cap - 1);
        let invs: Vec<TensorSeries> = self.images.iter().map(|u| u.invert()).collect::<Result<_>>()?;
        let mut m = SeriesMatrix::zero(rank, rank, rank, cap);
        for i in 0..rank {
            let gi = &TensorSeries::one(rank, cap) + &TensorSeries::x(rank, cap, i);
            for (j, inv) in invs.iter().enumerate() {
                m.set(i, j, -&(&gi * &inv.strip_left(i).truncate(cap)));
            }
        }
        Ok(m)
    }

    /// `{"genus": g, "cap": D, "images": {"g1": <series>, ...}}`.
    pub fn to_json(&self) -> Value {
        let mut images = Map::new();
        for (i, u) in self.images.iter().enumerate() {
            images.insert(format!("g{}", i + 1), u.to_json());
        }
        json!({"genus": self.rank / 2, "cap": self.cap, "images": images})
    }

    /// Reads images given either as words (Magnus-expanded with the standard
    /// expansion) or as series objects. `cap` overrides the file's cap.
    pub fn from_json(v: &Value, cap: Option<usize>) -> Result<Self> {
        let (rank, cap, images) = parse_auto_json(v, cap)?;
        let theta = Expansion::standard(rank, cap);
        let mut out = Vec::with_capacity(rank);
        for img in images {
            out.push(match img {
                AutoImage::Word(w) => theta.word(&w),
                AutoImage::Series(s) => {
                    if s.cap() < cap {
                        return Err(Error::TruncationMismatch);
                    }
                    s.truncate(cap)
                }
            });
        }
        Self::new(out)
    }
}

fn apply_rec(vs: &[TensorSeries], s: &TensorSeries) -> TensorSeries {
    let (rank, cap) = (s.rank(), s.cap());
    let mut out = TensorSeries::constant(rank, cap, s.augmentation());
    for (i, v) in vs.iter().enumerate() {
        let tail = s.strip_left(i);
        if tail.is_zero() {
            continue;
        }
        out.add_assign_ref(&(v * &apply_rec(vs, &tail)));
    }
    out
}

/// One image of an automorphism file.
#[derive(Debug, Clone)]
pub enum AutoImage {
    Word(GroupWord),
    Series(TensorSeries),
}

/// Parses the automorphism schema into `(rank, cap, images)`.
pub fn parse_auto_json(v: &Value, cap: Option<usize>) -> Result<(usize, usize, Vec<AutoImage>)> {
    let bad = |m: &str| Error::Parse(format!("automorphism JSON: {m}"));
    let genus = v.get("genus").and_then(Value::as_u64).ok_or_else(|| bad("missing genus"))? as usize;
    if genus == 0 {
        return Err(bad("genus must be at least 1"));
    }
    let file_cap = v.get("cap").and_then(Value::as_u64).map(|c| c as usize);
    let cap = cap.or(file_cap).ok_or_else(|| bad("missing cap"))?;
    let rank = 2 * genus;
    let obj = v.get("images").and_then(Value::as_object).ok_or_else(|| bad("missing images"))?;
    let mut slots: BTreeMap<usize, AutoImage> = BTreeMap::new();
    for (k, img) in obj {
        let idx = k
            .strip_prefix('g')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1 && n <= rank)
            .ok_or_else(|| bad(&format!("unknown generator {k}")))?;
        let parsed = match img {
            Value::String(s) => {
                let w = GroupWord::parse(s)?;
                w.check_rank(rank)?;
                AutoImage::Word(w)
            }
            other => AutoImage::Series(TensorSeries::from_json(other, rank)?),
        };
        slots.insert(idx - 1, parsed);
    }
    let images = (0..rank)
        .map(|i| slots.remove(&i).unwrap_or_else(|| AutoImage::Word(GroupWord::generator(i))))
        .collect();
    Ok((rank, cap, images))
}

/// A derivation `H → H^{⊗(d+1)}` given by its values on the basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomDerivation {
    degree: usize,
    values: Vec<TensorSeries>,
}

impl HomDerivation {
    pub fn new(degree: usize, values: Vec<TensorSeries>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::PreconditionViolated("derivation degree must be at least 1".into()));
        }
        if values.iter().any(|w| !w.is_homogeneous_of(degree + 1)) {
            return Err(Error::NotHomogeneous);
        }
        Ok(HomDerivation { degree, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[TensorSeries] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|w| w.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree || self.values.len() != other.values.len() {
            return Err(Error::PreconditionViolated("derivations of different shape".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.checked_add(b)).collect::<Result<_>>()?;
        Ok(HomDerivation { degree: self.degree, values })
    }

    pub fn scale(&self, c: &Q) -> Self {
        HomDerivation { degree: self.degree, values: self.values.iter().map(|w| w.scale(c)).collect() }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (i, w) in self.values.iter().enumerate() {
            m.insert(format!("g{}", i + 1), w.to_json());
        }
        json!({"degree": self.degree, "values": m})
    }
}

/// The intersection form with `γ_i · γ_{i+g} = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    genus: usize,
}

impl SymplecticForm {
    pub fn new(genus: usize) -> Self {
        SymplecticForm { genus }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn pairing(&self, i: usize, j: usize) -> i64 {
        let g = self.genus;
        if i < g && j == i + g {
            1
        } else if j < g && i == j + g {
            -1
        } else {
            0
        }
    }

    /// `γ_i^♯` as `(index, coefficient)`.
    pub fn sharp(&self, i: usize) -> (usize, i64) {
        let g = self.genus;
        if i < g {
            (i + g, -1)
        } else {
            (i - g, 1)
        }
    }

    /// `γ_i^♯ · γ_j`.
    pub fn sharp_pairing(&self, i: usize, j: usize) -> i64 {
        let (k, c) = self.sharp(i);
        c * self.pairing(k, j)
    }
}

/// Dynkin criterion: `w` of degree `n` is Lie iff the left-normed bracketing
/// map sends it to `n·w`.
pub fn dynkin_is_lie(w: &TensorSeries) -> Result<bool> {
    let degrees: Vec<usize> = (0..=w.cap()).filter(|&k| !w.homogeneous(k).is_zero()).collect();
    let n = match degrees.as_slice() {
        [] => return Ok(true),
        [n] => *n,
        _ => return Err(Error::NotHomogeneous),
    };
    let (rank, cap) = (w.rank(), w.cap());
    let mut image = TensorSeries::zero(rank, cap);
    for (mono, c) in w.terms() {
        let mut b = TensorSeries::monomial(rank, cap, &mono[..1.min(mono.len())], c.clone());
        for &a in &mono[1..] {
            b = &b.mul_x_right(a) - &b.mul_x_left(a);
        }
        image.add_assign_ref(&b);
    }
    Ok(image == w.scale(&Q::from_integer((n as i64).into())))
}

/// `Tr_d(f) = Σ_i Σ coeff · (γ_i^♯ · m₁) · cyc(m₂ ⋯ m_{d+1})` over the
/// monomials of `f(γ_i)`.
pub fn es_trace(f: &HomDerivation) -> Result<CyclicSeries> {
    let rank = f.values.len();
    let form = SymplecticForm::new(rank / 2);
    let cap = f.values.first().map_or(f.degree, |w| w.cap());
    let mut acc = TensorSeries::zero(rank, cap);
    for (i, w) in f.values.iter().enumerate() {
        for j in 0..rank {
            let p = form.sharp_pairing(i, j);
            if p != 0 {
                acc.add_scaled(&w.strip_left(j), &Q::from_integer(p.into()));
            }
        }
    }
    Ok(project_cyclic(&acc)?.slice(f.degree))
}

/// `C(τ₁)` read as a vector in `H`.
pub fn contract_c1(f: &HomDerivation) -> Result<Vec<Q>> {
    if f.degree != 1 {
        return Err(Error::PreconditionViolated("contraction needs a degree-1 derivation".into()));
    }
    Ok(es_trace(f)?.h_vector())
}

/// The degree-`(d+1)` part of `log σ` as a derivation of degree `d`.
pub fn log_component(sigma: &ExpansionAuto, d: usize) -> Result<HomDerivation> {
    let values = sigma.log_derivation()?.iter().map(|v| v.homogeneous(d + 1)).collect();
    HomDerivation::new(d, values)
}

/// `γ₁^{h₁} ⋯ γ_n^{h_n}`.
pub fn homology_word(h: &[i64]) -> GroupWord {
    let mut w = GroupWord::identity();
    for (i, &e) in h.iter().enumerate() {
        w = w.mul(&GroupWord::generator(i).pow(e));
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_int;
    use crate::word::Letter;
    use proptest::prelude::*;

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s).unwrap()
    }

    fn comm(a: &str, b: &str) -> GroupWord {
        GroupWord::commutator(&w(a), &w(b))
    }

    fn x(rank: usize, cap: usize, i: usize) -> TensorSeries {
        TensorSeries::x(rank, cap, i)
    }

    fn sample(cap: usize) -> ExpansionAuto {
        let th = Expansion::standard(2, cap);
        ExpansionAuto::from_words(&[w("g1").mul(&comm("g1", "g2")), w("g2")], &th).unwrap()
    }

    #[test]
    fn ia_degree_examples() {
        assert_eq!(ExpansionAuto::identity(2, 4).ia_degree(), DegreeBound::ExceedsCap);
        assert_eq!(sample(4).ia_degree(), DegreeBound::Finite(1));
        let th = Expansion::standard(2, 4);
        let c = GroupWord::commutator(&comm("g1", "g2"), &w("g1"));
        let s = ExpansionAuto::from_words(&[w("g1").mul(&c), w("g2")], &th).unwrap();
        assert_eq!(s.ia_degree(), DegreeBound::Finite(2));
    }

    #[test]
    fn tau_examples() {
        let t = sample(3).tau(1).unwrap();
        let want = &TensorSeries::monomial(2, 3, &[0, 1], q_int(1)) - &TensorSeries::monomial(2, 3, &[1, 0], q_int(1));
        assert_eq!(t.values()[0], want);
        assert!(t.values()[1].is_zero());
        assert!(ExpansionAuto::identity(2, 4).tau(2).unwrap().is_zero());
        assert!(matches!(sample(4).tau(2), Err(Error::FiltrationTooShallow { needed: 2, found: 1 })));
    }

    #[test]
    fn tau_is_expansion_independent() {
        let cap = 4;
        let std = Expansion::standard(2, cap);
        let mut img0 = &TensorSeries::one(2, cap) + &x(2, cap, 0);
        img0.add_monomial(&[0, 1], q_int(3));
        img0.add_monomial(&[1, 1, 0], q_int(-2));
        let mut img1 = &TensorSeries::one(2, cap) + &x(2, cap, 1);
        img1.add_monomial(&[0, 0], crate::rational::q_frac(1, 2));
        let custom = Expansion::custom(vec![img0, img1]).unwrap();
        let words = [w("g1").mul(&comm("g1", "g2")), w("g2").mul(&comm("g2", "G1"))];
        let a = ExpansionAuto::from_words(&words, &std).unwrap();
        let b = ExpansionAuto::from_words(&words, &custom).unwrap();
        assert_eq!(a.tau(1).unwrap(), b.tau(1).unwrap());
        let c3 = [w("g1").mul(&GroupWord::commutator(&comm("g1", "g2"), &w("g2"))), w("g2")];
        let a = ExpansionAuto::from_words(&c3, &std).unwrap();
        let b = ExpansionAuto::from_words(&c3, &custom).unwrap();
        assert_eq!(a.tau(2).unwrap(), b.tau(2).unwrap());
    }

    #[test]
    fn custom_expansion_conjugation_is_multiplicative() {
        let cap = 4;
        let mut img0 = &TensorSeries::one(2, cap) + &x(2, cap, 0);
        img0.add_monomial(&[1, 0], q_int(1));
        let img1 = &TensorSeries::one(2, cap) + &x(2, cap, 1);
        let th = Expansion::custom(vec![img0, img1]).unwrap();
        let words = [w("g2 g1"), w("g1 g2 G1")];
        let s = ExpansionAuto::from_words(&words, &th).unwrap();
        for probe in ["g1", "g2 g1", "G2 g1 g1"] {
            let p = w(probe);
            assert_eq!(s.apply(&th.word(&p)), th.word(&p.substitute(&words)));
        }
    }

    #[test]
    fn dynkin_examples() {
        let xy = TensorSeries::monomial(2, 3, &[0, 1], q_int(1));
        let yx = TensorSeries::monomial(2, 3, &[1, 0], q_int(1));
        assert!(dynkin_is_lie(&(&xy - &yx)).unwrap());
        assert!(!dynkin_is_lie(&xy).unwrap());
        assert!(dynkin_is_lie(&x(2, 3, 0)).unwrap());
        assert_eq!(dynkin_is_lie(&(&x(2, 3, 0) + &xy)), Err(Error::NotHomogeneous));
    }

    #[test]
    fn es_trace_examples() {
        let xx = TensorSeries::monomial(2, 3, &[0, 0], q_int(1));
        let f = HomDerivation::new(1, vec![xx, TensorSeries::zero(2, 3)]).unwrap();
        assert_eq!(es_trace(&f).unwrap(), CyclicSeries::from_terms(2, 3, [(vec![0], q_int(1))]));
        assert_eq!(contract_c1(&f).unwrap(), vec![q_int(1), q_int(0)]);
        let br = &TensorSeries::monomial(2, 3, &[0, 1], q_int(1)) - &TensorSeries::monomial(2, 3, &[1, 0], q_int(1));
        let f = HomDerivation::new(1, vec![br, TensorSeries::zero(2, 3)]).unwrap();
        assert_eq!(es_trace(&f).unwrap(), CyclicSeries::from_terms(2, 3, [(vec![1], q_int(1))]));
        let z = HomDerivation::new(1, vec![TensorSeries::zero(2, 3); 2]).unwrap();
        assert!(es_trace(&z).unwrap().is_zero());
    }

    #[test]
    fn symplectic_tables() {
        let f = SymplecticForm::new(2);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(f.pairing(i, j), -f.pairing(j, i));
                assert_eq!(f.sharp_pairing(i, j), i64::from(i == j));
            }
        }
        assert_eq!(f.pairing(0, 2), 1);
    }

    #[test]
    fn invert_and_compose_examples() {
        let id = ExpansionAuto::identity(2, 4);
        assert_eq!(id.invert().unwrap(), id);
        let s = sample(4);
        let inv = s.invert().unwrap();
        assert_eq!(s.compose(&inv).unwrap(), id);
        assert_eq!(inv.compose(&s).unwrap(), id);
        // ψ(γ₁) = γ₁[ψ(γ₁), γ₂]⁻¹ iterated converges in the nilpotent quotients.
        let th = Expansion::standard(2, 4);
        let mut psi = [w("g1"), w("g2")];
        for _ in 0..6 {
            psi = [w("g1").mul(&comm("g1", "g2").inverse().substitute(&psi)), w("g2")];
        }
        let group_inv = ExpansionAuto::from_words(&psi, &th).unwrap();
        assert_eq!(group_inv, inv);
    }

    #[test]
    fn non_ia_invert_uses_linear_part() {
        let th = Expansion::standard(2, 4);
        let s = ExpansionAuto::from_words(&[w("g1 g2"), w("g2 g1 g2")], &th).unwrap();
        let inv = s.invert().unwrap();
        assert_eq!(s.compose(&inv).unwrap(), ExpansionAuto::identity(2, 4));
        let direct = ExpansionAuto::from_words(&[w("g1 g1 G2 g1 G1"), w("G1 g2")], &th);
        assert!(direct.is_ok());
    }

    #[test]
    fn magnus_matrix_of_word_automorphism_is_fox_matrix() {
        let th = Expansion::standard(2, 4);
        let words = [w("g1").mul(&comm("g1", "g2")), w("g2 g1 g2 G1")];
        let s = ExpansionAuto::from_words(&words, &Expansion::standard(2, 5)).unwrap();
        let m = s.magnus_matrix().unwrap();
        let fox = crate::word::fox_matrix(&words, &[0, 1]);
        for i in 0..2 {
            for j in 0..2 {
                // fox_matrix rows are generators and columns the words.
                assert_eq!(m.get(i, j), &th.ring(&fox[i][j]));
            }
        }
    }

    #[test]
    fn auto_json_round_trip() {
        let s = sample(3);
        let j = s.to_json();
        assert_eq!(ExpansionAuto::from_json(&j, None).unwrap(), s);
        let words = json!({"genus": 1, "cap": 3, "images": {"g1": "g1 g1 g2 G1 G2"}});
        assert_eq!(ExpansionAuto::from_json(&words, None).unwrap(), s);
    }

    fn torelli_word(rank: usize) -> impl Strategy<Value = Vec<GroupWord>> {
        proptest::collection::vec((0..rank, 0..rank, any::<bool>()), rank).prop_map(move |picks| {
            picks
                .into_iter()
                .enumerate()
                .map(|(i, (a, b, inv))| {
                    let ga = GroupWord::from_letters([Letter::new(a, inv)]);
                    let gb = GroupWord::generator(b);
                    GroupWord::generator(i).mul(&GroupWord::commutator(&ga, &gb))
                })
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn compose_matches_group_composition(a in torelli_word(2), b in torelli_word(2)) {
            let th = Expansion::standard(2, 4);
            let sa = ExpansionAuto::from_words(&a, &th).unwrap();
            let sb = ExpansionAuto::from_words(&b, &th).unwrap();
            let ab: Vec<GroupWord> = b.iter().map(|w| w.substitute(&a)).collect();
            prop_assert_eq!(sa.compose(&sb).unwrap(), ExpansionAuto::from_words(&ab, &th).unwrap());
        }

        #[test]
        fn compose_is_associative(a in torelli_word(2), b in torelli_word(2), c in torelli_word(2)) {
            let th = Expansion::standard(2, 3);
            let [sa, sb, sc] = [&a, &b, &c].map(|ws| ExpansionAuto::from_words(ws, &th).unwrap());
            prop_assert_eq!(
                sa.compose(&sb).unwrap().compose(&sc).unwrap(),
                sa.compose(&sb.compose(&sc).unwrap()).unwrap()
            );
        }

        #[test]
        fn tau_is_lie_and_additive(a in torelli_word(4), b in torelli_word(4)) {
            let th = Expansion::standard(4, 3);
            let sa = ExpansionAuto::from_words(&a, &th).unwrap();
            let sb = ExpansionAuto::from_words(&b, &th).unwrap();
            let ta = sa.tau(1).unwrap();
            for v in ta.values() {
                prop_assert!(dynkin_is_lie(v).unwrap());
            }
            let tab = sa.compose(&sb).unwrap().tau(1).unwrap();
            prop_assert_eq!(tab, ta.add(&sb.tau(1).unwrap()).unwrap());
        }

        #[test]
        fn es_trace_is_linear(a in torelli_word(4), b in torelli_word(4), c in -3i64..4) {
            let th = Expansion::standard(4, 3);
            let ta = ExpansionAuto::from_words(&a, &th).unwrap().tau(1).unwrap();
            let tb = ExpansionAuto::from_words(&b, &th).unwrap().tau(1).unwrap();
            let c = q_int(c);
            let lhs = es_trace(&ta.scale(&c).add(&tb).unwrap()).unwrap();
            prop_assert_eq!(lhs, es_trace(&ta).unwrap().scale(&c).add(&es_trace(&tb).unwrap()));
        }

        #[test]
        fn log_leading_term_is_tau(a in torelli_word(2)) {
            let th = Expansion::standard(2, 4);
            let s = ExpansionAuto::from_words(&a, &th).unwrap();
            prop_assert_eq!(log_component(&s, 1).unwrap(), s.tau(1).unwrap());
        }
    }
}
