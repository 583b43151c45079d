//! Homology cylinders as labeled balanced presentations.
//!
//! Generators are indexed with the reference basis `minus` first (so the
//! surface letter `i` is generator `i`), then `plus`, then `extra`. Labels
//! assign to each generator its image in the truncated tensor algebra, with
//! `label(minus[i]) = 1 + x_i`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::cyclic::{act_auto, p_plus, project_cyclic, CyclicSeries};
use crate::error::{Error, Result};
use crate::johnson::{contract_c1, homology_word, ExpansionAuto, HomDerivation};
use crate::k1::{abelianize_cyclic, abelianize_matrix, abelianize_series, comm_det, ldet, CommSeries, K1Value, SeriesMatrix};
use crate::linalg::{bareiss_solve, rat_identity, RatMatrix};
use crate::rational::{format_q, q_frac, Q};
use crate::series::{Expansion, TensorSeries};
use crate::word::{GroupWord, Letter};

/// A balanced presentation of `π₁` of a homology cylinder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPresentation {
    genus: usize,
    names: Vec<String>,
    extra_count: usize,
    relators: Vec<GroupWord>,
    labels: Option<Vec<TensorSeries>>,
}

fn check_name(name: &str) -> Result<()> {
    match name.chars().next() {
        Some(c) if c.is_lowercase() && !name.contains(char::is_whitespace) => Ok(()),
        _ => Err(Error::Parse(format!("generator name {name:?} must start with a lowercase letter"))),
    }
}

impl LabeledPresentation {
    /// Builds a presentation from generator names and relator words over the
    /// combined index space `minus ++ plus ++ extra`.
    pub fn new(
        genus: usize,
        minus: Vec<String>,
        plus: Vec<String>,
        extra: Vec<String>,
        relators: Vec<GroupWord>,
    ) -> Result<Self> {
        if genus == 0 {
            return Err(Error::PreconditionViolated("genus must be at least 1".into()));
        }
        if minus.len() != 2 * genus || plus.len() != 2 * genus {
            return Err(Error::PreconditionViolated(format!(
                "need {} minus and plus generators, got {} and {}",
                2 * genus,
                minus.len(),
                plus.len()
            )));
        }
        let extra_count = extra.len();
        let names: Vec<String> = minus.into_iter().chain(plus).chain(extra).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            check_name(n)?;
            if !seen.insert(n.as_str()) {
                return Err(Error::Parse(format!("duplicate generator {n:?}")));
            }
        }
        for r in &relators {
            r.check_rank(names.len())?;
        }
        let p = LabeledPresentation { genus, names, extra_count, relators, labels: None };
        if p.relators.len() != p.unknowns().len() {
            return Err(Error::Unbalanced { relators: p.relators.len(), unknowns: p.unknowns().len() });
        }
        Ok(p)
    }

    /// Same as [`new`](Self::new) with relators in the named word syntax.
    pub fn parse(genus: usize, minus: &[&str], plus: &[&str], extra: &[&str], relators: &[&str]) -> Result<Self> {
        let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let names: Vec<String> = owned(minus).into_iter().chain(owned(plus)).chain(owned(extra)).collect();
        let words = relators.iter().map(|r| parse_named(r, &names)).collect::<Result<_>>()?;
        Self::new(genus, owned(minus), owned(plus), owned(extra), words)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn rank(&self) -> usize {
        2 * self.genus
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn num_generators(&self) -> usize {
        self.names.len()
    }

    pub fn minus(&self) -> Vec<usize> {
        (0..self.rank()).collect()
    }

    pub fn plus(&self) -> Vec<usize> {
        (self.rank()..2 * self.rank()).collect()
    }

    pub fn extra(&self) -> Vec<usize> {
        (2 * self.rank()..2 * self.rank() + self.extra_count).collect()
    }

    /// The generators solved for: `plus` then `extra`.
    pub fn unknowns(&self) -> Vec<usize> {
        (self.rank()..self.names.len()).collect()
    }

    pub fn relators(&self) -> &[GroupWord] {
        &self.relators
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn labels(&self) -> Option<&[TensorSeries]> {
        self.labels.as_deref()
    }

    /// Attaches labels after checking the reference basis and every relator.
    pub fn with_labels(mut self, labels: Vec<TensorSeries>) -> Result<Self> {
        if labels.len() != self.names.len() {
            return Err(Error::PreconditionViolated("one label per generator is required".into()));
        }
        let cap = labels[0].cap();
        let theta = Expansion::standard(self.rank(), cap);
        for i in 0..self.rank() {
            if labels[i] != *theta.image(i) {
                return Err(Error::PreconditionViolated(format!("label of {} is not θ(γ{})", self.names[i], i + 1)));
            }
        }
        let inv = invert_all(&labels)?;
        for (k, r) in self.relators.iter().enumerate() {
            if !eval_word(r, &labels, &inv).is_one_series() {
                return Err(Error::InconsistentRelators(k));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn display_relator(&self, k: usize) -> String {
        self.relators[k].display_with(&self.names)
    }

    /// `{"genus", "minus", "plus", "extra", "relators"}` plus `"cap"` if given.
    pub fn to_json(&self, cap: Option<usize>) -> Value {
        let r = self.rank();
        let mut v = json!({
            "genus": self.genus,
            "minus": &self.names[..r],
            "plus": &self.names[r..2 * r],
            "extra": &self.names[2 * r..],
            "relators": (0..self.relators.len()).map(|k| self.display_relator(k)).collect::<Vec<_>>(),
        });
        if let Some(c) = cap {
            v["cap"] = json!(c);
        }
        v
    }

    /// Parses the presentation schema; returns the optional cap from the file.
    pub fn from_json(v: &Value) -> Result<(Self, Option<usize>)> {
        let bad = |m: &str| Error::Parse(format!("presentation JSON: {m}"));
        let genus = v.get("genus").and_then(Value::as_u64).ok_or_else(|| bad("missing genus"))? as usize;
        let strings = |key: &str, required: bool| -> Result<Vec<String>> {
            match v.get(key) {
                None if !required => Ok(Vec::new()),
                None => Err(bad(&format!("missing {key}"))),
                Some(a) => a
                    .as_array()
                    .ok_or_else(|| bad(&format!("{key} must be an array")))?
                    .iter()
                    .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad(&format!("{key} entries must be strings"))))
                    .collect(),
            }
        };
        let minus = strings("minus", true)?;
        let plus = strings("plus", true)?;
        let extra = strings("extra", false)?;
        let rels = strings("relators", true)?;
        let names: Vec<String> = minus.iter().chain(&plus).chain(&extra).cloned().collect();
        let words = rels.iter().map(|r| parse_named(r, &names)).collect::<Result<_>>()?;
        let cap = v.get("cap").and_then(Value::as_u64).map(|c| c as usize);
        Ok((Self::new(genus, minus, plus, extra, words)?, cap))
    }
}

fn parse_named(s: &str, names: &[String]) -> Result<GroupWord> {
    GroupWord::parse_with(s, |n| names.iter().position(|m| m == n))
}

trait OneCheck {
    fn is_one_series(&self) -> bool;
}

impl OneCheck for TensorSeries {
    fn is_one_series(&self) -> bool {
        *self == TensorSeries::one(self.rank(), self.cap())
    }
}

pub(crate) fn invert_all(labels: &[TensorSeries]) -> Result<Vec<TensorSeries>> {
    labels.iter().map(|l| l.invert()).collect()
}

pub(crate) fn eval_word(w: &GroupWord, labels: &[TensorSeries], inv: &[TensorSeries]) -> TensorSeries {
    let mut s = TensorSeries::one(labels[0].rank(), labels[0].cap());
    for l in w.letters() {
        s = &s * if l.inv { &inv[l.gen] } else { &labels[l.gen] };
    }
    s
}

/// `⟨m₁..m_{2g}, p₁..p_{2g} | p_i m_i⁻¹⟩`.
pub fn trivial(genus: usize) -> LabeledPresentation {
    mapping_cylinder(&(0..2 * genus).map(GroupWord::generator).collect::<Vec<_>>()).expect("identity is valid")
}

fn surface_names(genus: usize) -> (Vec<String>, Vec<String>) {
    let r = 2 * genus;
    ((1..=r).map(|i| format!("m{i}")).collect(), (1..=r).map(|i| format!("p{i}")).collect())
}

/// The mapping cylinder of `φ`, with relators `p_j · φ(γ_j)(m)⁻¹`.
pub fn mapping_cylinder(phi: &[GroupWord]) -> Result<LabeledPresentation> {
    if phi.is_empty() || phi.len() % 2 == 1 {
        return Err(Error::PreconditionViolated("an automorphism of a rank-2g free group is required".into()));
    }
    let genus = phi.len() / 2;
    let r = phi.len();
    for w in phi {
        w.check_rank(r)?;
    }
    let (minus, plus) = surface_names(genus);
    let relators = phi.iter().enumerate().map(|(j, w)| GroupWord::generator(r + j).mul(&w.inverse())).collect();
    LabeledPresentation::new(genus, minus, plus, Vec::new(), relators)
}

/// Whether `φ` acts as the identity on `H₁`.
pub fn is_torelli_words(phi: &[GroupWord]) -> bool {
    let r = phi.len();
    phi.iter().enumerate().all(|(j, w)| {
        let a = w.abelianize(r);
        (0..r).all(|i| a[i] == i64::from(i == j))
    })
}

/// Solves for the labels of every generator of `⟨x_0..x_{n−1} | relators⟩`
/// given that `reference[k]` maps to `θ(γ_{k+1}) = 1 + x_k`.
///
/// In degree one the exponent-sum matrix `E` (relators × unknowns) must be
/// unimodular. In degree `k ≥ 2` a correction `δ_u` of degree `k` changes the
/// degree-`k` part of each relator by `Σ_u E[r][u] δ_u`, so `δ = −E⁻¹ R`.
pub fn solve_system(n: usize, reference: &[usize], relators: &[GroupWord], cap: usize) -> Result<Vec<TensorSeries>> {
    if cap == 0 {
        return Err(Error::PreconditionViolated("cap must be at least 1".into()));
    }
    let r = reference.len();
    if r == 0 || reference.iter().any(|&g| g >= n) {
        return Err(Error::PreconditionViolated("reference generators out of range".into()));
    }
    let unknowns: Vec<usize> = (0..n).filter(|g| !reference.contains(g)).collect();
    if relators.len() != unknowns.len() {
        return Err(Error::Unbalanced { relators: relators.len(), unknowns: unknowns.len() });
    }
    let mut e = Vec::new();
    let mut f = Vec::new();
    for rel in relators {
        rel.check_rank(n)?;
        let a = rel.abelianize(n);
        e.push(unknowns.iter().map(|&u| BigInt::from(a[u])).collect::<Vec<_>>());
        f.push(reference.iter().map(|&g| BigInt::from(-a[g])).collect::<Vec<_>>());
    }
    let (det, homology) = bareiss_solve(&e, &f);
    if det.abs() != BigInt::one() {
        return Err(Error::NotAHomologyCylinder { det: det.to_string() });
    }
    let homology = homology.expect("unimodular");
    let id: Vec<Vec<BigInt>> = rat_identity(unknowns.len())
        .iter()
        .map(|row| row.iter().map(|q| q.to_integer()).collect())
        .collect();
    let einv = bareiss_solve(&e, &id).1.expect("unimodular");

    let theta = Expansion::standard(r, cap);
    let mut labels: Vec<TensorSeries> = vec![TensorSeries::one(r, cap); n];
    for (k, &g) in reference.iter().enumerate() {
        labels[g] = theta.image(k).clone();
    }
    for (ui, &u) in unknowns.iter().enumerate() {
        for (m, c) in homology[ui].iter().enumerate() {
            labels[u].add_monomial(&[m], c.clone());
        }
    }

    for k in 2..=cap {
        let trunc: Vec<TensorSeries> = labels.iter().map(|l| l.truncate(k)).collect();
        let inv = invert_all(&trunc)?;
        let residuals: Vec<TensorSeries> =
            relators.iter().map(|w| eval_word(w, &trunc, &inv).homogeneous(k).widen(cap)).collect();
        if residuals.iter().all(TensorSeries::is_zero) {
            continue;
        }
        for (ui, &u) in unknowns.iter().enumerate() {
            let mut delta = TensorSeries::zero(r, cap);
            for (ri, res) in residuals.iter().enumerate() {
                let c = &einv[ui][ri];
                if !c.is_zero() && !res.is_zero() {
                    delta.add_scaled(res, &-c);
                }
            }
            labels[u].add_assign_ref(&delta);
        }
    }
    let inv = invert_all(&labels)?;
    for (k, w) in relators.iter().enumerate() {
        if !eval_word(w, &labels, &inv).is_one_series() {
            return Err(Error::InconsistentRelators(k));
        }
    }
    Ok(labels)
}

/// Solves for the labels of all generators of `p`, degree by degree.
pub fn solve_labels(p: &LabeledPresentation, cap: usize) -> Result<Vec<TensorSeries>> {
    solve_system(p.num_generators(), &p.minus(), &p.relators, cap)
}

/// `p` with labels solved at `cap`.
pub fn solved(p: &LabeledPresentation, cap: usize) -> Result<LabeledPresentation> {
    let labels = solve_labels(p, cap)?;
    Ok(LabeledPresentation { labels: Some(labels), ..p.clone() })
}

fn labels_at(p: &LabeledPresentation, cap: usize) -> Result<Vec<TensorSeries>> {
    match &p.labels {
        Some(l) if l[0].cap() == cap => Ok(l.clone()),
        Some(l) if l[0].cap() > cap => Ok(l.iter().map(|s| s.truncate(cap)).collect()),
        _ => solve_labels(p, cap),
    }
}

/// `σ_M`: `images[i] = label(plus[i])`.
pub fn sigma_of(p: &LabeledPresentation, cap: usize) -> Result<ExpansionAuto> {
    let labels = labels_at(p, cap)?;
    ExpansionAuto::new(p.plus().iter().map(|&g| labels[g].clone()).collect())
}

/// Entry `(g, r)` is `bar(∂r/∂g)` evaluated under the labels, for every
/// generator `g`. For an occurrence of `g` after the prefix `u`, the term is
/// `label(u)⁻¹`, or `−label(g)·label(u)⁻¹` for an inverse letter.
pub fn fox_eval(p: &LabeledPresentation, labels: &[TensorSeries]) -> Result<SeriesMatrix> {
    let (rank, cap) = (labels[0].rank(), labels[0].cap());
    let inv = invert_all(labels)?;
    let n = p.num_generators();
    let m = p.relators.len();
    let mut out = SeriesMatrix::zero(n, m, rank, cap);
    let mut cols: Vec<Vec<TensorSeries>> = vec![vec![TensorSeries::zero(rank, cap); n]; m];
    for (j, w) in p.relators.iter().enumerate() {
        let mut prefix_inv = TensorSeries::one(rank, cap);
        for &Letter { gen, inv: is_inv } in w.letters() {
            if is_inv {
                prefix_inv = &labels[gen] * &prefix_inv;
                cols[j][gen].sub_assign_ref(&prefix_inv);
            } else {
                cols[j][gen].add_assign_ref(&prefix_inv);
                prefix_inv = &inv[gen] * &prefix_inv;
            }
        }
    }
    for (j, col) in cols.into_iter().enumerate() {
        for (g, v) in col.into_iter().enumerate() {
            out.set(g, j, v);
        }
    }
    Ok(out)
}

/// `A(P)`: the rows of [`fox_eval`] for the unknowns (`plus` then `extra`).
pub fn presentation_matrix(p: &LabeledPresentation, labels: &[TensorSeries]) -> Result<SeriesMatrix> {
    Ok(fox_eval(p, labels)?.row_block(p.rank(), p.num_generators()))
}

/// The normalized torsion together with the data used to normalize it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderInvariant {
    pub torsion: K1Value,
    pub sigma: ExpansionAuto,
    pub tau1: Option<HomDerivation>,
    /// `ℓdet` of `A(P)` after the sign fix, before the Euler shift.
    pub raw: K1Value,
    pub euler_shift: Vec<i64>,
    /// Set for non-Torelli input: the log is only meaningful modulo the
    /// cyclic logs of homology classes.
    pub defined_mod_h: bool,
}

impl CylinderInvariant {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "torsion": self.torsion.to_json(),
            "sigma": self.sigma.to_json(),
            "euler_shift": self.euler_shift,
            "defined_mod_h": self.defined_mod_h,
        });
        if let Some(t) = &self.tau1 {
            v["tau1"] = t.to_json();
        }
        v
    }
}

fn raw_ldet(p: &LabeledPresentation, labels: &[TensorSeries]) -> Result<K1Value> {
    let mut a = presentation_matrix(p, labels)?;
    if crate::linalg::rat_det(&a.eps()) == -Q::one() {
        a.swap_cols(0, 1);
    }
    ldet(&a)
}

/// `project(log θ(γ^h))`.
pub fn homology_log(h: &[i64], cap: usize) -> CyclicSeries {
    let theta = Expansion::standard(h.len(), cap);
    project_cyclic(&theta.word(&homology_word(h)).log().expect("group-like")).expect("zero constant term")
}

/// The normalized torsion `α̃(M)` at `cap`. Requires a Torelli cylinder.
pub fn torsion(p: &LabeledPresentation, cap: usize) -> Result<CylinderInvariant> {
    let inv = torsion_mod_h(p, cap)?;
    if inv.defined_mod_h {
        return Err(Error::NotTorelli);
    }
    Ok(inv)
}

/// Like [`torsion`], but non-Torelli input is accepted and returned unshifted
/// with `defined_mod_h` set.
pub fn torsion_mod_h(p: &LabeledPresentation, cap: usize) -> Result<CylinderInvariant> {
    let r = p.rank();
    let work = cap.max(2);
    let labels = labels_at(p, work)?;
    let sigma_work = ExpansionAuto::new(p.plus().iter().map(|&g| labels[g].clone()).collect())?;
    let low: Vec<TensorSeries> = labels.iter().map(|l| l.truncate(cap)).collect();
    let raw = raw_ldet(p, &low)?;
    let sigma = sigma_work.truncate(cap);
    if sigma_work.linear_part() != rat_identity(r) {
        return Ok(CylinderInvariant {
            torsion: K1Value { det_eps: Q::one(), log: raw.log.clone() },
            sigma,
            tau1: None,
            raw,
            euler_shift: vec![0; r],
            defined_mod_h: true,
        });
    }
    let tau1 = sigma_work.tau(1)?;
    let c1 = contract_c1(&tau1)?;
    let lam1 = raw.log.slice(1).h_vector();
    let mut shift = Vec::with_capacity(r);
    for i in 0..r {
        let h = &c1[i] * q_frac(-1, 2) - &lam1[i];
        if !h.is_integer() {
            return Err(Error::NonIntegralEulerShift(format_q(&h)));
        }
        shift.push(h.to_integer().to_i64().ok_or_else(|| Error::NonIntegralEulerShift(format_q(&h)))?);
    }
    let log = raw.log.add(&homology_log(&shift, cap));
    Ok(CylinderInvariant {
        torsion: K1Value { det_eps: Q::one(), log },
        sigma,
        tau1: Some(tau1),
        raw,
        euler_shift: shift,
        defined_mod_h: false,
    })
}

/// The degree-`d` slice of `α̃(M)`, which must vanish in degrees `1..d`.
pub fn alpha_d(p: &LabeledPresentation, d: usize, cap: usize) -> Result<CyclicSeries> {
    if d == 0 || cap < d {
        return Err(Error::PreconditionViolated(format!("need 1 ≤ d ≤ cap, got d = {d}, cap = {cap}")));
    }
    let t = torsion(p, cap)?;
    for k in 1..d {
        if !t.torsion.log.slice(k).is_zero() {
            return Err(Error::LowerDegreeNonzero(k));
        }
    }
    Ok(t.torsion.log.slice(d))
}

fn renamed(p: &LabeledPresentation, prefix: &str) -> Vec<String> {
    p.names.iter().map(|n| format!("{prefix}{n}")).collect()
}

/// The stacking `M ∘ N`: glue `plus(P)` to `minus(Q)`.
pub fn compose(p: &LabeledPresentation, q: &LabeledPresentation) -> Result<LabeledPresentation> {
    if p.genus != q.genus {
        return Err(Error::PreconditionViolated("composition needs equal genus".into()));
    }
    let r = p.rank();
    let pn = renamed(p, "u_");
    let qn = renamed(q, "v_");
    let minus = pn[..r].to_vec();
    let plus = qn[r..2 * r].to_vec();
    let extra: Vec<String> =
        pn[r..].iter().cloned().chain(qn[..r].iter().cloned()).chain(qn[2 * r..].iter().cloned()).collect();
    // New index of each old generator.
    let p_map: Vec<usize> = (0..pn.len()).map(|i| if i < r { i } else { 2 * r + (i - r) }).collect();
    let q_base = 2 * r + (pn.len() - r);
    let q_map: Vec<usize> = (0..qn.len())
        .map(|i| {
            if i < r {
                q_base + i
            } else if i < 2 * r {
                r + (i - r)
            } else {
                q_base + r + (i - 2 * r)
            }
        })
        .collect();
    let relabel = |w: &GroupWord, map: &[usize]| {
        GroupWord::from_letters(w.letters().iter().map(|l| Letter::new(map[l.gen], l.inv)))
    };
    let mut relators: Vec<GroupWord> = p.relators.iter().map(|w| relabel(w, &p_map)).collect();
    relators.extend(q.relators.iter().map(|w| relabel(w, &q_map)));
    for j in 0..r {
        relators.push(GroupWord::from_letters([Letter::new(p_map[r + j], false), Letter::new(q_map[j], true)]));
    }
    LabeledPresentation::new(p.genus, minus, plus, extra, relators)
}

/// The mirror `M̄`: the roles of `minus` and `plus` are exchanged.
pub fn mirror(p: &LabeledPresentation) -> LabeledPresentation {
    let r = p.rank();
    let map: Vec<usize> = (0..p.names.len()).map(|i| if i < r { i + r } else if i < 2 * r { i - r } else { i }).collect();
    let mut names = p.names.clone();
    for (i, n) in p.names.iter().enumerate() {
        names[map[i]] = n.clone();
    }
    let relators =
        p.relators.iter().map(|w| GroupWord::from_letters(w.letters().iter().map(|l| Letter::new(map[l.gen], l.inv)))).collect();
    LabeledPresentation { genus: p.genus, names, extra_count: p.extra_count, relators, labels: None }
}

/// `r(M) = −C · A(P)⁻¹ · [I; 0]`, with `C` the evaluated bar-Fox rows of the
/// reference basis.
pub fn magnus_rep(p: &LabeledPresentation, cap: usize) -> Result<SeriesMatrix> {
    let labels = labels_at(p, cap)?;
    let full = fox_eval(p, &labels)?;
    let r = p.rank();
    let n = p.num_generators();
    let c = full.row_block(0, r);
    let a = full.row_block(r, n);
    let m = a.rows();
    let mut sel: RatMatrix = vec![vec![Q::zero(); r]; m];
    for (i, row) in sel.iter_mut().enumerate().take(r) {
        row[i] = Q::one();
    }
    let x = a.solve(&SeriesMatrix::from_rational(&sel, r, cap))?;
    Ok(c.mul(&x)?.neg())
}

/// `−½ p₊ α̃_d(M ∘ M̄)`, the loop-part quantity reported alongside the torsion.
pub fn eigenspace_report(p: &LabeledPresentation, d: usize, cap: usize) -> Result<CyclicSeries> {
    let double = compose(p, &mirror(p))?;
    let a = torsion(&double, cap)?.torsion.log.slice(d);
    Ok(p_plus(&a).scale(&q_frac(-1, 2)))
}

/// Both sides of `α̃(M)⁻¹ · (σ_M)_* α̃(M̄) = ℓdet r(M)`, as logs.
pub fn torsion_magnus_sides(p: &LabeledPresentation, cap: usize) -> Result<(CyclicSeries, CyclicSeries)> {
    let t = torsion(p, cap)?;
    let tm = torsion(&mirror(p), cap)?;
    let lhs = t.torsion.log.neg().add(&act_auto(&t.sigma, &tm.torsion.log)?);
    let rhs = ldet(&magnus_rep(p, cap)?)?.log;
    Ok((lhs, rhs))
}

/// Both sides of `α̃(M∘N) = α̃(M) · (σ_M)_* α̃(N)`, as logs.
pub fn crossed_sides(p: &LabeledPresentation, q: &LabeledPresentation, cap: usize) -> Result<(CyclicSeries, CyclicSeries)> {
    let pq = torsion(&compose(p, q)?, cap)?;
    let tp = torsion(p, cap)?;
    let tq = torsion(q, cap)?;
    let rhs = tp.torsion.log.add(&act_auto(&tp.sigma, &tq.torsion.log)?);
    Ok((pq.torsion.log, rhs))
}

/// Both sides of the commutative comparison: `det ab(A(P)) · ab θ(γ^h)`
/// against `exp ab(α̃(M).log)`, with `h` the Euler shift.
pub fn commutative_sides(p: &LabeledPresentation, cap: usize) -> Result<(CommSeries, CommSeries)> {
    let t = torsion(p, cap)?;
    let labels = labels_at(p, cap)?;
    let mut a = presentation_matrix(p, &labels)?;
    if crate::linalg::rat_det(&a.eps()) == -Q::one() {
        a.swap_cols(0, 1);
    }
    let theta = Expansion::standard(p.rank(), cap);
    let shift = abelianize_series(&theta.word(&homology_word(&t.euler_shift)));
    let lhs = comm_det(&abelianize_matrix(&a))?.mul(&shift);
    let rhs = abelianize_cyclic(&t.torsion.log).exp()?;
    Ok((lhs, rhs))
}

/// Tietze move: a new extra generator `name` with defining relator `name · w⁻¹`.
pub fn add_redundant_generator(p: &LabeledPresentation, name: &str, w: &GroupWord) -> Result<LabeledPresentation> {
    let r = p.rank();
    let minus = p.names[..r].to_vec();
    let plus = p.names[r..2 * r].to_vec();
    let mut extra = p.names[2 * r..].to_vec();
    extra.push(name.to_string());
    let z = p.names.len();
    let mut relators = p.relators.clone();
    relators.push(GroupWord::generator(z).mul(&w.inverse()));
    LabeledPresentation::new(p.genus, minus, plus, extra, relators)
}

/// Tietze move: replace relator `k` by `w · r_k · w⁻¹`.
pub fn conjugate_relator(p: &LabeledPresentation, k: usize, w: &GroupWord) -> LabeledPresentation {
    let mut q = p.clone();
    q.relators[k] = w.mul(&p.relators[k]).mul(&w.inverse());
    q.labels = None;
    q
}

/// Reorders the extra generators by `perm` and the relators by `rel_perm`.
pub fn permute(p: &LabeledPresentation, perm: &[usize], rel_perm: &[usize]) -> LabeledPresentation {
    let base = 2 * p.rank();
    let mut map: Vec<usize> = (0..p.names.len()).collect();
    let mut names = p.names.clone();
    for (new, &old) in perm.iter().enumerate() {
        map[base + old] = base + new;
        names[base + new] = p.names[base + old].clone();
    }
    let relators = rel_perm
        .iter()
        .map(|&k| GroupWord::from_letters(p.relators[k].letters().iter().map(|l| Letter::new(map[l.gen], l.inv))))
        .collect();
    LabeledPresentation { names, relators, labels: None, ..p.clone() }
}

/// Labels keyed by generator name.
pub fn labels_by_name(p: &LabeledPresentation, labels: &[TensorSeries]) -> BTreeMap<String, TensorSeries> {
    p.names.iter().cloned().zip(labels.iter().cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::johnson::es_trace;

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s).unwrap()
    }

    fn sample_phi() -> Vec<GroupWord> {
        vec![w("g1").mul(&GroupWord::commutator(&w("g1"), &w("g2"))), w("g2")]
    }

    /// `γ₁ ↦ γ₁[γ₁,γ₂]²`: its trace is even, so the Euler shift is integral.
    fn even_phi() -> Vec<GroupWord> {
        vec![w("g1").mul(&GroupWord::commutator(&w("g1"), &w("g2")).pow(2)), w("g2")]
    }

    #[test]
    fn trivial_labels_and_invariants() {
        let p = trivial(2);
        let labels = solve_labels(&p, 3).unwrap();
        let th = Expansion::standard(4, 3);
        for i in 0..4 {
            assert_eq!(labels[4 + i], *th.image(i));
        }
        assert_eq!(sigma_of(&p, 3).unwrap(), ExpansionAuto::identity(4, 3));
        let t = torsion(&p, 4).unwrap();
        assert_eq!(t.torsion, K1Value::identity(4, 4));
        assert_eq!(magnus_rep(&p, 3).unwrap(), SeriesMatrix::identity(4, 4, 3));
        assert!(alpha_d(&p, 3, 3).unwrap().is_zero());
        let m = mirror(&p);
        assert_eq!(torsion(&m, 3).unwrap().torsion, K1Value::identity(4, 3));
        assert_eq!(sigma_of(&m, 3).unwrap(), ExpansionAuto::identity(4, 3));
        assert_eq!(mirror(&m), p);
    }

    #[test]
    fn extra_generator_label() {
        let p = LabeledPresentation::parse(1, &["m1", "m2"], &["p1", "p2"], &["z"], &["p1 M1", "p2 M2", "z M1"]).unwrap();
        let labels = solve_labels(&p, 3).unwrap();
        assert_eq!(labels[4], Expansion::standard(2, 3).image(0).clone());
    }

    #[test]
    fn mapping_cylinder_relators() {
        let p = mapping_cylinder(&sample_phi()).unwrap();
        assert_eq!(p.display_relator(0), "p1 m2 m1 M2 M1 M1");
        assert_eq!(p.display_relator(1), "p2 M2");
        let labels = solve_labels(&p, 4).unwrap();
        let a = presentation_matrix(&p, &labels).unwrap();
        assert_eq!(a, SeriesMatrix::identity(2, 2, 4));
        let th = Expansion::standard(2, 4);
        assert_eq!(sigma_of(&p, 4).unwrap(), ExpansionAuto::from_words(&sample_phi(), &th).unwrap());
    }

    #[test]
    fn mapping_cylinder_torsion_is_euler_shift() {
        let phi = even_phi();
        let p = mapping_cylinder(&phi).unwrap();
        let t = torsion(&p, 4).unwrap();
        assert!(t.raw.log.is_zero());
        let tr = es_trace(t.tau1.as_ref().unwrap()).unwrap();
        let h: Vec<i64> = tr.h_vector().iter().map(|c| (c * q_frac(-1, 2)).to_integer().to_i64().unwrap()).collect();
        assert_eq!(t.euler_shift, h);
        assert_eq!(h, vec![0, -1]);
        assert_eq!(t.torsion.log, homology_log(&h, 4));
        assert_eq!(t.torsion.log.slice(1), tr.scale(&q_frac(-1, 2)));
    }

    #[test]
    fn non_integral_shift_is_reported() {
        let p = mapping_cylinder(&sample_phi()).unwrap();
        assert_eq!(sigma_of(&p, 3).unwrap().ia_degree(), crate::DegreeBound::Finite(1));
        assert_eq!(torsion(&p, 3), Err(Error::NonIntegralEulerShift("-1/2".into())));
    }

    #[test]
    fn not_a_homology_cylinder() {
        let p = LabeledPresentation::parse(1, &["m1", "m2"], &["p1", "p2"], &[], &["p1 p1 M1", "p2 M2"]).unwrap();
        assert!(matches!(solve_labels(&p, 3), Err(Error::NotAHomologyCylinder { .. })));
        let q = LabeledPresentation::parse(1, &["m1", "m2"], &["p1", "p2"], &[], &["p1 M1"]);
        assert!(matches!(q, Err(Error::Unbalanced { relators: 1, unknowns: 2 })));
    }

    #[test]
    fn non_torelli_is_flagged() {
        let p = mapping_cylinder(&[w("g1 g2"), w("g2")]).unwrap();
        assert_eq!(torsion(&p, 3), Err(Error::NotTorelli));
        let t = torsion_mod_h(&p, 3).unwrap();
        assert!(t.defined_mod_h);
    }

    #[test]
    fn mirror_of_mapping_cylinder_inverts_sigma() {
        let p = mapping_cylinder(&sample_phi()).unwrap();
        let s = sigma_of(&p, 4).unwrap();
        assert_eq!(sigma_of(&mirror(&p), 4).unwrap(), s.invert().unwrap());
        assert_eq!(mirror(&mirror(&p)), p);
    }

    #[test]
    fn compose_sigma_and_crossed_law() {
        let p = mapping_cylinder(&even_phi()).unwrap();
        let q = mapping_cylinder(&[w("g1"), w("g2").mul(&GroupWord::commutator(&w("g2"), &w("G1")).pow(-2))]).unwrap();
        let pq = compose(&p, &q).unwrap();
        let s = sigma_of(&pq, 4).unwrap();
        assert_eq!(s, sigma_of(&p, 4).unwrap().compose(&sigma_of(&q, 4).unwrap()).unwrap());
        let (lhs, rhs) = crossed_sides(&p, &q, 4).unwrap();
        assert_eq!(lhs, rhs);
        let tt = compose(&trivial(1), &trivial(1)).unwrap();
        assert_eq!(torsion(&tt, 3).unwrap().torsion, K1Value::identity(2, 3));
    }

    #[test]
    fn solve_order_does_not_matter() {
        let p = LabeledPresentation::parse(
            1,
            &["m1", "m2"],
            &["p1", "p2"],
            &["a", "b"],
            &["a M1 M2", "b A m2", "p1 B m1 b A", "p2 M2"],
        )
        .unwrap();
        let q = permute(&p, &[1, 0], &[3, 1, 0, 2]);
        let lp = labels_by_name(&p, &solve_labels(&p, 4).unwrap());
        let lq = labels_by_name(&q, &solve_labels(&q, 4).unwrap());
        assert_eq!(lp, lq);
    }

    #[test]
    fn tietze_moves_preserve_torsion() {
        let p = mapping_cylinder(&even_phi()).unwrap();
        let base = torsion(&p, 4).unwrap().torsion;
        let q = add_redundant_generator(&p, "z", &GroupWord::from_signed(&[1, 3, -1])).unwrap();
        assert_eq!(torsion(&q, 4).unwrap().torsion, base);
        let c = conjugate_relator(&p, 0, &GroupWord::from_signed(&[2, 3, -1]));
        assert_ne!(torsion(&c, 4).unwrap().raw, torsion(&p, 4).unwrap().raw);
        assert_eq!(torsion(&c, 4).unwrap().torsion, base);
    }

    #[test]
    fn magnus_rep_matches_fox_route() {
        let phi = sample_phi();
        let p = mapping_cylinder(&phi).unwrap();
        let r = magnus_rep(&p, 4).unwrap();
        let s = ExpansionAuto::from_words(&phi, &Expansion::standard(2, 5)).unwrap();
        assert_eq!(r, s.magnus_matrix().unwrap());
        assert_eq!(r.eps(), rat_identity(2));
    }

    #[test]
    fn torsion_magnus_identity_on_mapping_cylinder() {
        let p = mapping_cylinder(&even_phi()).unwrap();
        let (lhs, rhs) = torsion_magnus_sides(&p, 4).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn json_round_trip() {
        let p = mapping_cylinder(&sample_phi()).unwrap();
        let v = p.to_json(Some(4));
        let (q, cap) = LabeledPresentation::from_json(&v).unwrap();
        assert_eq!(q, p);
        assert_eq!(cap, Some(4));
        assert_eq!(v["relators"][1], "p2 M2");
        let labels = solve_labels(&p, 3).unwrap();
        assert!(p.clone().with_labels(labels).is_ok());
        let bogus = vec![TensorSeries::one(2, 3); 4];
        assert!(p.with_labels(bogus).is_err());
    }
}
