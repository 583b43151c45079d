//! Matrices over the truncated tensor algebra, the log-determinant
//! `ℓdet(A) = (det ε(A), tr log(A ε(A)⁻¹))` with values in
//! `K₁ ≅ ℚ^× ⊕ ∏ H^{⊗k}/ℤ_k`, the alternating sums Δ_d, and the commutative
//! reduction used as an independent determinant oracle.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cyclic::{project_cyclic, CyclicSeries};
use crate::error::{Error, Result};
use crate::linalg::{rat_det, rat_inverse, RatMatrix};
use crate::rational::{format_q, parse_q, Q};
use crate::series::{alt_sign, TensorSeries};

/// A rectangular matrix of tensor series sharing one rank and cap.
#[derive(Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    rank: usize,
    cap: usize,
    entries: Vec<TensorSeries>,
}

impl fmt::Debug for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SeriesMatrix {}x{} (rank={}, cap={})", self.rows, self.cols, self.rank, self.cap)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(" | "))?;
        }
        Ok(())
    }
}

impl SeriesMatrix {
    pub fn zero(rows: usize, cols: usize, rank: usize, cap: usize) -> Self {
        SeriesMatrix { rows, cols, rank, cap, entries: vec![TensorSeries::zero(rank, cap); rows * cols] }
    }

    pub fn identity(n: usize, rank: usize, cap: usize) -> Self {
        let mut m = Self::zero(n, n, rank, cap);
        for i in 0..n {
            m.set(i, i, TensorSeries::one(rank, cap));
        }
        m
    }

    /// Builds from rows; all entries must share rank and cap.
    pub fn from_rows(rows: Vec<Vec<TensorSeries>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let first = rows.iter().flatten().next().ok_or_else(|| Error::PreconditionViolated("empty matrix".into()))?;
        let (rank, cap) = (first.rank(), first.cap());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::PreconditionViolated("ragged matrix".into()));
        }
        if rows.iter().flatten().any(|e| e.rank() != rank || e.cap() != cap) {
            return Err(Error::TruncationMismatch);
        }
        Ok(SeriesMatrix { rows: r, cols: c, rank, cap, entries: rows.into_iter().flatten().collect() })
    }

    /// Embeds a rational matrix as constant series.
    pub fn from_rational(m: &RatMatrix, rank: usize, cap: usize) -> Self {
        let rows = m.len();
        let cols = m.first().map_or(0, |r| r.len());
        let mut out = Self::zero(rows, cols, rank, cap);
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.set(i, j, TensorSeries::constant(rank, cap, v.clone()));
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn get(&self, i: usize, j: usize) -> &TensorSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TensorSeries) {
        assert!(v.rank() == self.rank && v.cap() == self.cap, "truncation mismatch");
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[TensorSeries] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&TensorSeries) -> TensorSeries + Sync + Send) -> Self {
        let entries: Vec<TensorSeries> = self.entries.par_iter().map(f).collect();
        SeriesMatrix { entries, ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        SeriesMatrix { rows: self.rows, cols: self.cols, rank: self.rank, cap: self.cap, entries: Vec::new() }
    }

    pub fn truncate(&self, cap: usize) -> Self {
        let entries = self.entries.iter().map(|e| e.truncate(cap)).collect();
        SeriesMatrix { cap, entries, ..self.clone_shape() }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows, self.rank, self.cap);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Rows `r0..r1`.
    pub fn row_block(&self, r0: usize, r1: usize) -> Self {
        let entries = self.entries[r0 * self.cols..r1 * self.cols].to_vec();
        SeriesMatrix { rows: r1 - r0, entries, ..self.clone_shape() }
    }

    /// Columns `c0..c1`.
    pub fn col_block(&self, c0: usize, c1: usize) -> Self {
        let mut m = Self::zero(self.rows, c1 - c0, self.rank, self.cap);
        for i in 0..self.rows {
            for j in c0..c1 {
                m.set(i, j - c0, self.get(i, j).clone());
            }
        }
        m
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank || self.cap != other.cap {
            return Err(Error::TruncationMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::PreconditionViolated("shape mismatch".into()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(SeriesMatrix { entries, ..self.clone_shape() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SeriesMatrix { entries: self.entries.iter().map(|e| -e).collect(), ..self.clone_shape() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        if self.cols != other.rows {
            return Err(Error::PreconditionViolated("shape mismatch".into()));
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let entries: Vec<TensorSeries> = (0..n * p)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / p, idx % p);
                let mut acc = TensorSeries::zero(self.rank, self.cap);
                for k in 0..m {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc.add_assign_ref(&(a * b));
                    }
                }
                acc
            })
            .collect();
        Ok(SeriesMatrix { rows: n, cols: p, rank: self.rank, cap: self.cap, entries })
    }

    /// `self · r` for a rational matrix `r`.
    pub fn mul_rational(&self, r: &RatMatrix) -> Self {
        let p = r.first().map_or(0, |row| row.len());
        let mut out = Self::zero(self.rows, p, self.rank, self.cap);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for (j, v) in r[k].iter().enumerate() {
                    if !v.is_zero() {
                        out.entries[i * p + j].add_scaled(a, v);
                    }
                }
            }
        }
        out
    }

    /// Entrywise augmentation.
    pub fn eps(&self) -> RatMatrix {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).augmentation()).collect()).collect()
    }

    pub fn trace(&self) -> TensorSeries {
        let mut t = TensorSeries::zero(self.rank, self.cap);
        for i in 0..self.rows.min(self.cols) {
            t.add_assign_ref(self.get(i, i));
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::PreconditionViolated("matrix is not square".into()));
        }
        Ok(())
    }

    /// `ε(A)⁻¹ · Σ_k (I − A ε(A)⁻¹)^k`, arranged as a right inverse.
    pub fn invert(&self) -> Result<Self> {
        self.require_square()?;
        let einv = rat_inverse(&self.eps()).ok_or(Error::SingularAugmentation)?;
        let n = self.rows;
        let id = Self::identity(n, self.rank, self.cap);
        // A⁻¹ = ε⁻¹ (I − N)⁻¹ with N = I − A ε⁻¹ ... written as (A ε⁻¹)⁻¹ = Σ Nᵏ.
        let b = self.mul_rational(&einv);
        let nil = id.sub(&b)?;
        let mut acc = id.clone();
        let mut power = id;
        for _ in 0..self.cap {
            power = power.mul(&nil)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power)?;
        }
        let left = Self::from_rational(&einv, self.rank, self.cap);
        left.mul(&acc)
    }

    /// Solves `A X = rhs` by the fixed-point iteration
    /// `X ← ε(A)⁻¹ (rhs − (A − ε(A)) X)`, exact after `cap + 1` rounds.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        self.require_square()?;
        self.check_same(rhs)?;
        let e = self.eps();
        let einv = rat_inverse(&e).ok_or(Error::SingularAugmentation)?;
        let einv_m = Self::from_rational(&einv, self.rank, self.cap);
        let higher = self.sub(&Self::from_rational(&e, self.rank, self.cap))?;
        let mut x = einv_m.mul(rhs)?;
        for _ in 0..self.cap {
            let next = einv_m.mul(&rhs.sub(&higher.mul(&x)?)?)?;
            if next == x {
                break;
            }
            x = next;
        }
        Ok(x)
    }
}

/// An element of `K₁ ≅ ℚ^× ⊕ ∏_{k≤D} H^{⊗k}/ℤ_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K1Value {
    pub det_eps: Q,
    pub log: CyclicSeries,
}

impl K1Value {
    pub fn identity(rank: usize, cap: usize) -> Self {
        K1Value { det_eps: Q::one(), log: CyclicSeries::zero(rank, cap) }
    }

    /// The group law `(q₁, λ₁)(q₂, λ₂) = (q₁q₂, λ₁ + λ₂)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(K1Value { det_eps: &self.det_eps * &other.det_eps, log: self.log.checked_add(&other.log)? })
    }

    pub fn inverse(&self) -> Self {
        K1Value { det_eps: self.det_eps.recip(), log: self.log.neg() }
    }

    /// `{"det_eps": "q", "log": [...]}`.
    pub fn to_json(&self) -> Value {
        json!({"det_eps": format_q(&self.det_eps), "log": self.log.to_json()})
    }

    pub fn from_json(v: &Value, rank: usize, cap: usize) -> Result<Self> {
        let d = v
            .get("det_eps")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("K1 JSON: missing det_eps".into()))?;
        let log = CyclicSeries::from_json(v.get("log").unwrap_or(&Value::Array(vec![])), rank, cap)?;
        Ok(K1Value { det_eps: parse_q(d)?, log })
    }
}

fn is_scalar(s: &TensorSeries) -> bool {
    s.num_terms() == 1 && !s.augmentation().is_zero()
}

/// Eliminates rows and columns through pivots that are nonzero constants.
/// Each step is a product of elementary operations and a scalar, so the
/// log part of ℓdet is unchanged.
pub(crate) fn reduce_scalar_pivots(a: &SeriesMatrix) -> SeriesMatrix {
    let n = a.rows;
    let mut m: Vec<Vec<TensorSeries>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j).clone()).collect()).collect();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    loop {
        let mut pivot = None;
        'search: for (pi, &r) in rows.iter().enumerate() {
            for (qi, &c) in cols.iter().enumerate() {
                if is_scalar(&m[r][c]) {
                    pivot = Some((pi, qi));
                    break 'search;
                }
            }
        }
        let Some((pi, qi)) = pivot else { break };
        let (p, q) = (rows.remove(pi), cols.remove(qi));
        let cinv = m[p][q].augmentation().recip();
        let right: Vec<(usize, TensorSeries)> =
            cols.iter().filter(|&&j| !m[p][j].is_zero()).map(|&j| (j, m[p][j].scale(&cinv))).collect();
        if right.is_empty() {
            continue;
        }
        let left: Vec<(usize, TensorSeries)> =
            rows.iter().filter(|&&i| !m[i][q].is_zero()).map(|&i| (i, m[i][q].clone())).collect();
        let updates: Vec<(usize, usize, TensorSeries)> = left
            .par_iter()
            .flat_map_iter(|(i, l)| right.iter().map(move |(j, r)| (*i, *j, l * r)))
            .collect();
        for (i, j, d) in updates {
            m[i][j].sub_assign_ref(&d);
        }
    }
    let k = rows.len();
    let mut out = SeriesMatrix::zero(k, k, a.rank, a.cap);
    for (ii, &i) in rows.iter().enumerate() {
        for (jj, &j) in cols.iter().enumerate() {
            out.set(ii, jj, m[i][j].clone());
        }
    }
    out
}

/// `project(tr log(A ε(A)⁻¹))`, with `log` summed on `X = A ε(A)⁻¹ − I` and
/// `tr(X^k)` taken as `⟨X^a, X^b⟩` with `a + b = k` to halve the powers needed.
fn trace_log(a: &SeriesMatrix) -> Result<CyclicSeries> {
    let (rank, cap, n) = (a.rank, a.cap, a.rows);
    if n == 0 {
        return Ok(CyclicSeries::zero(rank, cap));
    }
    let einv = rat_inverse(&a.eps()).ok_or(Error::SingularAugmentation)?;
    let x = a.mul_rational(&einv).sub(&SeriesMatrix::identity(n, rank, cap))?;
    let half = cap.div_ceil(2);
    let mut powers = vec![SeriesMatrix::identity(n, rank, cap), x.clone()];
    for k in 2..=half {
        if powers[k - 1].is_zero() {
            break;
        }
        let next = powers[k - 1].mul(&x)?;
        powers.push(next);
    }
    let mut total = TensorSeries::zero(rank, cap);
    for k in 1..=cap {
        let b = k.div_ceil(2);
        let a_ = k - b;
        if b >= powers.len() || powers[b].is_zero() {
            break;
        }
        let t = if a_ == 0 {
            powers[b].trace()
        } else {
            let (pa, pb) = (&powers[a_], &powers[b]);
            let parts: Vec<TensorSeries> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut acc = TensorSeries::zero(rank, cap);
                    for j in 0..n {
                        let (u, v) = (pa.get(i, j), pb.get(j, i));
                        if !u.is_zero() && !v.is_zero() {
                            acc.add_assign_ref(&(u * v));
                        }
                    }
                    acc
                })
                .collect();
            parts.iter().fold(TensorSeries::zero(rank, cap), |acc, p| &acc + p)
        };
        let c = alt_sign(k + 1) * Q::new(1.into(), (k as i64).into());
        total.add_scaled(&t, &c);
    }
    project_cyclic(&total)
}

/// `ℓdet(A) = (det ε(A), project(tr log(A ε(A)⁻¹)))`.
pub fn ldet(a: &SeriesMatrix) -> Result<K1Value> {
    a.require_square()?;
    let det = rat_det(&a.eps());
    if det.is_zero() {
        return Err(Error::SingularAugmentation);
    }
    let reduced = reduce_scalar_pivots(a);
    Ok(K1Value { det_eps: det, log: trace_log(&reduced)? })
}

/// The same value computed without the scalar-pivot reduction.
pub fn ldet_unreduced(a: &SeriesMatrix) -> Result<K1Value> {
    a.require_square()?;
    let det = rat_det(&a.eps());
    if det.is_zero() {
        return Err(Error::SingularAugmentation);
    }
    Ok(K1Value { det_eps: det, log: trace_log(a)? })
}

/// Degree-`n` slice of ℓdet when `A ε(A)⁻¹ ≡ I` modulo degree `n`; then the
/// log reduces to `tr(A ε(A)⁻¹ − I)` in that degree.
pub fn ldet_graded(a: &SeriesMatrix, n: usize) -> Result<CyclicSeries> {
    a.require_square()?;
    let einv = rat_inverse(&a.eps()).ok_or(Error::SingularAugmentation)?;
    let x = a.mul_rational(&einv).sub(&SeriesMatrix::identity(a.rows, a.rank, a.cap))?;
    if let Some(low) = x.entries.iter().filter_map(|e| e.lowest_degree()).min() {
        if low < n {
            return Err(Error::PreconditionViolated(format!(
                "A ε(A)⁻¹ − I has a nonzero term in degree {low} < {n}"
            )));
        }
    }
    Ok(project_cyclic(&x.trace())?.slice(n))
}

/// `Δ_d = Σ_{J ⊆ {1..d}} (−1)^{|J|} ℓdet(I + Σ_{j∈J} A_j).log`.
pub fn delta_alt(mats: &[SeriesMatrix]) -> Result<CyclicSeries> {
    let first = mats.first().ok_or_else(|| Error::PreconditionViolated("no matrices".into()))?;
    let (n, rank, cap) = (first.rows, first.rank, first.cap);
    for m in mats {
        m.require_square()?;
        if m.rows != n {
            return Err(Error::PreconditionViolated("matrices of different sizes".into()));
        }
        if m.rank != rank || m.cap != cap {
            return Err(Error::TruncationMismatch);
        }
        if m.entries.iter().any(|e| !e.augmentation().is_zero()) {
            return Err(Error::AugmentationNotZero);
        }
    }
    let d = mats.len();
    let terms: Vec<CyclicSeries> = (0u64..1 << d)
        .into_par_iter()
        .map(|mask| -> Result<CyclicSeries> {
            let mut m = SeriesMatrix::identity(n, rank, cap);
            for (j, a) in mats.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    m = m.add(a)?;
                }
            }
            Ok(ldet(&m)?.log.scale(&alt_sign(mask.count_ones() as usize)))
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().fold(CyclicSeries::zero(rank, cap), |acc, t| acc.add(t)))
}

/// A truncated commutative power series in `t₁,…,t_n` (total degree ≤ cap).
#[derive(Clone, PartialEq, Eq)]
pub struct CommSeries {
    nvars: usize,
    cap: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl fmt::Debug for CommSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let m: Vec<String> =
                    e.iter().enumerate().filter(|(_, &p)| p > 0).map(|(i, p)| format!("t{}^{}", i + 1, p)).collect();
                format!("{}*{}", format_q(c), if m.is_empty() { "1".into() } else { m.join("") })
            })
            .collect();
        write!(f, "CommSeries({})", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

impl CommSeries {
    pub fn zero(nvars: usize, cap: usize) -> Self {
        CommSeries { nvars, cap, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, cap: usize, c: Q) -> Self {
        let mut s = Self::zero(nvars, cap);
        s.add_term(vec![0; nvars], c);
        s
    }

    pub fn one(nvars: usize, cap: usize) -> Self {
        Self::constant(nvars, cap, Q::one())
    }

    pub fn var(nvars: usize, cap: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut s = Self::zero(nvars, cap);
        s.add_term(e, Q::one());
        s
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Q) {
        if exps.iter().sum::<u32>() as usize > self.cap || c.is_zero() {
            return;
        }
        let e = self.terms.entry(exps.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn coeff(&self, exps: &[u32]) -> Q {
        self.terms.get(exps).cloned().unwrap_or_else(Q::zero)
    }

    pub fn augmentation(&self) -> Q {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_constant(&self) -> bool {
        self.terms.len() == 1 && !self.augmentation().is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = self.clone();
        for (e, c) in &other.terms {
            s.add_term(e.clone(), c.clone());
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.cap);
        }
        CommSeries { terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(), ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut s = Self::zero(self.nvars, self.cap);
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &other.terms {
                if (da + eb.iter().sum::<u32>()) as usize > self.cap {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                s.add_term(e, ca * cb);
            }
        }
        s
    }

    pub fn invert(&self) -> Result<Self> {
        let e = self.augmentation();
        if e.is_zero() {
            return Err(Error::NotAUnit);
        }
        let einv = e.recip();
        let mut n = self.scale(&einv);
        n.terms.remove(&vec![0; self.nvars]);
        let neg = n.scale(&-Q::one());
        let mut acc = Self::one(self.nvars, self.cap);
        let mut p = acc.clone();
        for _ in 0..self.cap {
            p = p.mul(&neg);
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p);
        }
        Ok(acc.scale(&einv))
    }

    pub fn exp(&self) -> Result<Self> {
        if !self.augmentation().is_zero() {
            return Err(Error::BadAugmentation { expected: "0".into(), found: format_q(&self.augmentation()) });
        }
        let mut acc = Self::one(self.nvars, self.cap);
        let mut p = acc.clone();
        for k in 1..=self.cap as i64 {
            p = p.mul(self).scale(&Q::new(1.into(), k.into()));
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p);
        }
        Ok(acc)
    }
}

/// Sends each monomial to its exponent vector.
pub fn abelianize_series(s: &TensorSeries) -> CommSeries {
    let mut out = CommSeries::zero(s.rank(), s.cap());
    for (m, c) in s.terms() {
        let mut e = vec![0u32; s.rank()];
        for i in m {
            e[i] += 1;
        }
        out.add_term(e, c.clone());
    }
    out
}

pub fn abelianize_cyclic(c: &CyclicSeries) -> CommSeries {
    let mut out = CommSeries::zero(c.rank(), c.cap());
    for (w, v) in c.terms() {
        let mut e = vec![0u32; c.rank()];
        for &i in w.letters() {
            e[i] += 1;
        }
        out.add_term(e, v.clone());
    }
    out
}

pub fn abelianize_matrix(m: &SeriesMatrix) -> Vec<Vec<CommSeries>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| abelianize_series(m.get(i, j))).collect()).collect()
}

/// Determinant over the commutative local ring by elimination, pivoting on
/// constants first and otherwise on the first unit in the column.
pub fn comm_det(m: &[Vec<CommSeries>]) -> Result<CommSeries> {
    let n = m.len();
    let (nvars, cap) = match m.first().and_then(|r| r.first()) {
        Some(e) => (e.nvars, e.cap),
        None => return Err(Error::PreconditionViolated("empty matrix".into())),
    };
    let mut a: Vec<Vec<CommSeries>> = m.to_vec();
    let mut det = CommSeries::one(nvars, cap);
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut sign_flips = 0usize;
    while !rows.is_empty() {
        let mut pick = None;
        'outer: for want_const in [true, false] {
            for (qi, &c) in cols.iter().enumerate() {
                for (pi, &r) in rows.iter().enumerate() {
                    let e = &a[r][c];
                    if !e.augmentation().is_zero() && (!want_const || e.is_constant()) {
                        pick = Some((pi, qi));
                        break 'outer;
                    }
                }
            }
        }
        let Some((pi, qi)) = pick else { return Err(Error::SingularAugmentation) };
        sign_flips += pi + qi;
        let (p, q) = (rows.remove(pi), cols.remove(qi));
        let piv = a[p][q].clone();
        det = det.mul(&piv);
        let inv = piv.invert()?;
        for &i in &rows {
            if a[i][q].is_zero() {
                continue;
            }
            let f = a[i][q].mul(&inv);
            for &j in &cols {
                if !a[p][j].is_zero() {
                    a[i][j] = a[i][j].sub(&f.mul(&a[p][j]));
                }
            }
        }
    }
    Ok(if sign_flips % 2 == 1 { det.scale(&-Q::one()) } else { det })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q_frac, q_int};

    fn ts(rank: usize, cap: usize, terms: &[(&[usize], i64)]) -> TensorSeries {
        TensorSeries::from_terms(rank, cap, terms.iter().map(|(m, c)| (m.to_vec(), q_int(*c))))
    }

    fn mat(rows: Vec<Vec<TensorSeries>>) -> SeriesMatrix {
        SeriesMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn eps_and_invert_examples() {
        let (r, c) = (2, 3);
        let a = mat(vec![vec![ts(r, c, &[(&[], 1), (&[0], 1)]), ts(r, c, &[(&[1], 1)])], vec![ts(r, c, &[]), ts(r, c, &[(&[], 2)])]]);
        assert_eq!(a.eps(), vec![vec![q_int(1), q_int(0)], vec![q_int(0), q_int(2)]]);
        let n = mat(vec![vec![ts(r, c, &[(&[], 1)]), ts(r, c, &[(&[0], 1)])], vec![ts(r, c, &[]), ts(r, c, &[(&[], 1)])]]);
        let want = mat(vec![vec![ts(r, c, &[(&[], 1)]), ts(r, c, &[(&[0], -1)])], vec![ts(r, c, &[]), ts(r, c, &[(&[], 1)])]]);
        assert_eq!(n.invert().unwrap(), want);
        let d = mat(vec![vec![ts(r, c, &[(&[], 1), (&[0], 1)]), ts(r, c, &[])], vec![ts(r, c, &[]), ts(r, c, &[(&[], 1), (&[1], -1)])]]);
        let inv = d.invert().unwrap();
        assert_eq!(d.mul(&inv).unwrap(), SeriesMatrix::identity(2, r, c));
        assert_eq!(inv.get(1, 1), &ts(r, c, &[(&[], 1), (&[1], 1), (&[1, 1], 1), (&[1, 1, 1], 1)]));
        assert_eq!(inv.mul(&d).unwrap(), SeriesMatrix::identity(2, r, c));
        let sing = mat(vec![vec![ts(r, c, &[(&[0], 1)])]]);
        assert_eq!(sing.invert(), Err(Error::SingularAugmentation));
    }

    #[test]
    fn ldet_examples() {
        let a = mat(vec![vec![ts(1, 3, &[(&[], 2), (&[0], 2)])]]);
        let v = ldet(&a).unwrap();
        assert_eq!(v.det_eps, q_int(2));
        let want = CyclicSeries::from_terms(1, 3, [(vec![0], q_int(1)), (vec![0, 0], q_frac(-1, 2)), (vec![0, 0, 0], q_frac(1, 3))]);
        assert_eq!(v.log, want);

        // (A − I)² = diag(x₁x₂, x₂x₁) and odd powers are traceless.
        let b = mat(vec![vec![ts(2, 4, &[(&[], 1)]), ts(2, 4, &[(&[0], 1)])], vec![ts(2, 4, &[(&[1], 1)]), ts(2, 4, &[(&[], 1)])]]);
        let v = ldet(&b).unwrap();
        assert_eq!(v.det_eps, q_int(1));
        let want = CyclicSeries::from_terms(2, 4, [(vec![0, 1], q_int(-1)), (vec![0, 1, 0, 1], q_frac(-1, 2))]);
        assert_eq!(v.log, want);
        assert_eq!(ldet_unreduced(&b).unwrap(), v);
    }

    #[test]
    fn ldet_graded_examples() {
        let a = mat(vec![vec![ts(1, 3, &[(&[], 1), (&[0], 1)])]]);
        assert_eq!(ldet_graded(&a, 1).unwrap(), CyclicSeries::from_terms(1, 3, [(vec![0], q_int(1))]));
        let b = mat(vec![vec![ts(2, 3, &[(&[], 1), (&[0, 1], 1)]), ts(2, 3, &[])], vec![ts(2, 3, &[]), ts(2, 3, &[(&[], 1)])]]);
        assert_eq!(ldet_graded(&b, 2).unwrap(), CyclicSeries::from_terms(2, 3, [(vec![0, 1], q_int(1))]));
        let p = mat(vec![vec![ts(2, 3, &[(&[], 1), (&[0], 1)])]]).mul(&mat(vec![vec![ts(2, 3, &[(&[], 1), (&[1], 1)])]])).unwrap();
        assert!(matches!(ldet_graded(&p, 2), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn delta_alt_examples() {
        let a1 = mat(vec![vec![ts(2, 3, &[(&[0], 1)])]]);
        let a2 = mat(vec![vec![ts(2, 3, &[(&[1], 1)])]]);
        let d = delta_alt(&[a1.clone(), a2]).unwrap();
        assert!(d.slice(1).is_zero());
        assert_eq!(d.slice(2), CyclicSeries::from_terms(2, 3, [(vec![0, 1], q_int(-1))]));
        let single = delta_alt(&[a1.clone()]).unwrap();
        let direct = ldet(&SeriesMatrix::identity(1, 2, 3).add(&a1).unwrap()).unwrap().log.neg();
        assert_eq!(single, direct);
        let bad = mat(vec![vec![ts(2, 3, &[(&[], 1)])]]);
        assert_eq!(delta_alt(&[bad]), Err(Error::AugmentationNotZero));
    }

    #[test]
    fn commutative_examples() {
        let c = abelianize_series(&ts(2, 3, &[(&[0, 1], 1), (&[1, 0], -1)]));
        assert!(c.is_zero());
        let t = |i| CommSeries::var(2, 3, i);
        let one = CommSeries::one(2, 3);
        let z = CommSeries::zero(2, 3);
        let d = comm_det(&[vec![one.add(&t(0)), z.clone()], vec![z, one.add(&t(1))]]).unwrap();
        assert_eq!(d, one.add(&t(0)).mul(&one.add(&t(1))));

        let b = mat(vec![vec![ts(2, 4, &[(&[], 1)]), ts(2, 4, &[(&[0], 1)])], vec![ts(2, 4, &[(&[1], 1)]), ts(2, 4, &[(&[], 1)])]]);
        let lhs = abelianize_cyclic(&ldet(&b).unwrap().log).exp().unwrap();
        let one4 = CommSeries::one(2, 4);
        let want = one4.sub(&CommSeries::var(2, 4, 0).mul(&CommSeries::var(2, 4, 1)));
        assert_eq!(lhs, want);
        assert_eq!(comm_det(&abelianize_matrix(&b)).unwrap(), want);
    }

    #[test]
    fn k1_json_round_trip() {
        let v = K1Value { det_eps: q_int(-1), log: CyclicSeries::from_terms(2, 3, [(vec![0, 1], q_frac(1, 2))]) };
        let j = v.to_json();
        assert_eq!(j["det_eps"], "-1");
        assert_eq!(K1Value::from_json(&j, 2, 3).unwrap(), v);
        assert_eq!(K1Value::identity(2, 4).to_json().to_string(), r#"{"det_eps":"1","log":[]}"#);
    }
}
