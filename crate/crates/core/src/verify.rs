//! Property suites over seeded random instances.
//!
//! Every check draws trial `t` from [`trial_rng`]`(seed, t)`, runs the trials
//! in parallel and reports the lowest failing trial, so a report depends only
//! on the options.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::clasper::{
    one_loop_presentation, psi_leading, surgery_oracle, theta_presentation, OneLoopClasper,
};
use crate::cyclic::{necklace_count, necklaces, p_minus, p_plus, project_cyclic, rho, CyclicSeries, CyclicWord};
use crate::cylinder::{
    alpha_d, commutative_sides, crossed_sides, mapping_cylinder, solve_labels, torsion,
    torsion_magnus_sides, trivial, LabeledPresentation,
};
use crate::error::{Error, Result};
use crate::johnson::{es_trace, log_component, ExpansionAuto};
use crate::k1::{delta_alt, ldet, ldet_unreduced, SeriesMatrix};
use crate::rational::q_int;
use crate::sample::{self, trial_rng};
use crate::series::{DegreeBound, Expansion, TensorSeries};
use crate::word::{fox_derivative, GroupWord, RingElement};

/// Run options shared by all checks. `cap` and `genus` override the
/// per-check defaults when set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opts {
    pub seed: u64,
    pub trials: usize,
    pub cap: Option<usize>,
    pub genus: Option<usize>,
}

impl Default for Opts {
    fn default() -> Self {
        Opts { seed: 0, trials: 64, cap: None, genus: None }
    }
}

impl Opts {
    pub fn with_trials(&self, trials: usize) -> Self {
        Opts { trials, ..self.clone() }
    }
}

/// The outcome of one identity over all trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub counterexample: Option<String>,
    /// Per-degree tallies `(degree, zero, checked)`, for checks that report them.
    pub degree_counts: Vec<(usize, usize, usize)>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "suite": self.suite,
            "check": self.name,
            "status": if self.passed() { "PASS" } else { "FAIL" },
            "trials": self.trials,
            "failures": self.failures,
            "counterexample": self.counterexample,
        });
        if !self.degree_counts.is_empty() {
            v["residual_zero_counts"] = self
                .degree_counts
                .iter()
                .map(|&(degree, zero, checked)| json!({"degree": degree, "zero": zero, "checked": checked}))
                .collect();
        }
        v
    }

    /// `PASS suite/name (n trials)` or `FAIL …: first counterexample`.
    pub fn line(&self) -> String {
        match &self.counterexample {
            None if self.degree_counts.is_empty() => format!("PASS {}/{} ({} trials)", self.suite, self.name, self.trials),
            None => {
                let counts: Vec<String> =
                    self.degree_counts.iter().map(|(k, z, n)| format!("degree {k}: {z}/{n} zero")).collect();
                format!("PASS {}/{} ({} trials; {})", self.suite, self.name, self.trials, counts.join(", "))
            }
            Some(c) => format!(
                "FAIL {}/{} ({} of {} trials): {}",
                self.suite, self.name, self.failures, self.trials, c
            ),
        }
    }
}

type Outcome = Result<Option<String>>;

fn run(suite: &str, name: &str, opts: &Opts, f: impl Fn(&mut ChaCha8Rng, usize) -> Outcome + Sync) -> Check {
    let results: Vec<Option<String>> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(opts.seed, t as u64);
            match f(&mut rng, t) {
                Ok(None) => None,
                Ok(Some(s)) => Some(format!("trial {t}: {s}")),
                Err(e) => Some(format!("trial {t}: error: {e}")),
            }
        })
        .collect();
    let failures = results.iter().filter(|r| r.is_some()).count();
    Check {
        suite: suite.into(),
        name: name.into(),
        trials: opts.trials,
        failures,
        counterexample: results.into_iter().flatten().next(),
        degree_counts: Vec::new(),
    }
}

fn expect(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    Ok(if ok { None } else { Some(what()) })
}

/// Names accepted by [`run_suite`].
pub const SUITES: &[&str] =
    &["fox", "logexp", "necklace", "ldet", "altprod", "surgery-oracle", "magnus", "crossed", "abelian", "kloop"];

pub fn run_suite(name: &str, opts: &Opts) -> Result<Vec<Check>> {
    Ok(match name {
        "fox" => vec![fox_fundamental(opts), fox_product_rule(opts), bar_anti_involution(opts)],
        "logexp" => vec![exp_log_group_like(opts), log_exp(opts), cyclic_log_additive(opts)],
        "necklace" => vec![rotation_invariance(opts), necklace_enumeration(opts), involution_split(opts)],
        "ldet" => vec![ldet_multiplicative(opts), ldet_elementary(opts), ldet_reduction(opts)],
        "altprod" => vec![altprod_vanishing(opts)],
        "surgery-oracle" => vec![surgery_formula(opts), surgery_internal_labels(opts), one_loop_leading(opts)],
        "magnus" => vec![torsion_magnus_mapping(opts), torsion_magnus_surgered(opts), degree_d_trace(opts)],
        "crossed" => vec![crossed_law(opts)],
        "abelian" => vec![abelian_oracle(opts), abelian_mapping(opts), abelian_surgered(opts)],
        "kloop" => vec![theta_on_trivial(opts), theta_on_torelli(opts)],
        _ => return Err(Error::Parse(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    })
}

fn genus_or(opts: &Opts, rng: &mut impl Rng, max: usize) -> usize {
    opts.genus.unwrap_or_else(|| rng.gen_range(1..=max))
}

fn phi_text(phi: &[GroupWord]) -> String {
    phi.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

// ---- fox -------------------------------------------------------------------

/// `w − 1 = Σ_i (∂w/∂γ_i)(γ_i − 1)` for words of length ≤ 12, `g ≤ 3`.
pub fn fox_fundamental(opts: &Opts) -> Check {
    run("fox", "fundamental formula", opts, |rng, _| {
        let rank = 2 * genus_or(opts, rng, 3);
        let w = sample::word(rng, rank, 12);
        let lhs = RingElement::from_word(w.clone()).sub(&RingElement::one());
        let mut rhs = RingElement::zero();
        for i in 0..rank {
            let gi = RingElement::from_word(GroupWord::generator(i)).sub(&RingElement::one());
            rhs = rhs.add(&fox_derivative(&w, i).mul(&gi));
        }
        expect(lhs == rhs, || format!("w = {w}"))
    })
}

/// `∂(uv) = ∂u + u·∂v`.
pub fn fox_product_rule(opts: &Opts) -> Check {
    run("fox", "product rule", opts, |rng, _| {
        let rank = 2 * genus_or(opts, rng, 3);
        let u = sample::word(rng, rank, 8);
        let v = sample::word(rng, rank, 8);
        let ok = (0..rank).all(|i| {
            fox_derivative(&u.mul(&v), i)
                == fox_derivative(&u, i).add(&RingElement::from_word(u.clone()).mul(&fox_derivative(&v, i)))
        });
        expect(ok, || format!("u = {u}, v = {v}"))
    })
}

/// `bar(ab) = bar(b)·bar(a)` and `bar∘bar = id`.
pub fn bar_anti_involution(opts: &Opts) -> Check {
    run("fox", "bar is an anti-involution", opts, |rng, _| {
        let rank = 2 * genus_or(opts, rng, 3);
        let mut elt = || {
            let mut r = RingElement::zero();
            for _ in 0..3 {
                r.add_term(q_int(rng.gen_range(-3..=3)), sample::word(rng, rank, 5));
            }
            r
        };
        let (a, b) = (elt(), elt());
        let ok = a.mul(&b).bar() == b.bar().mul(&a.bar()) && a.bar().bar() == a;
        expect(ok, || format!("a = {a}, b = {b}"))
    })
}

// ---- logexp ----------------------------------------------------------------

fn cap_or(opts: &Opts, rng: &mut impl Rng, max: usize) -> usize {
    opts.cap.unwrap_or_else(|| rng.gen_range(1..=max))
}

/// `exp(log θ(w)) = θ(w)`.
pub fn exp_log_group_like(opts: &Opts) -> Check {
    run("logexp", "exp inverts log on group-like elements", opts, |rng, _| {
        let rank = 2 * genus_or(opts, rng, 2);
        let cap = cap_or(opts, rng, 5);
        let w = sample::word(rng, rank, 8);
        let s = Expansion::standard(rank, cap).word(&w);
        expect(s.log()?.exp()? == s, || format!("w = {w}, cap {cap}"))
    })
}

/// `log(exp s) = s` for `s` without constant term.
pub fn log_exp(opts: &Opts) -> Check {
    run("logexp", "log inverts exp on the augmentation ideal", opts, |rng, _| {
        let rank = 2 * genus_or(opts, rng, 2);
        let cap = cap_or(opts, rng, 5);
        let s = sample::series(rng, rank, cap, 1);
        expect(s.exp()?.log()? == s, || format!("s = {s}, cap {cap}"))
    })
}

/// `project(log θ(uv)) = project(log θ(u)) + project(log θ(v))`.
pub fn cyclic_log_additive(opts: &Opts) -> Check {
    run("logexp", "cyclic log is additive", opts, |rng, _| {
        let rank = 2 * genus_or(opts, rng, 2);
        let cap = cap_or(opts, rng, 5);
        let th = Expansion::standard(rank, cap);
        let u = sample::word(rng, rank, 6);
        let v = sample::word(rng, rank, 6);
        let cl = |w: &GroupWord| -> Result<CyclicSeries> { project_cyclic(&th.word(w).log()?) };
        expect(cl(&u.mul(&v))? == cl(&u)?.add(&cl(&v)?), || format!("u = {u}, v = {v}, cap {cap}"))
    })
}

// ---- necklace --------------------------------------------------------------

/// Every rotation of a word has the same canonical form.
pub fn rotation_invariance(opts: &Opts) -> Check {
    run("necklace", "canonical form is rotation invariant", opts, |rng, _| {
        let d = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=4);
        let w: Vec<usize> = (0..d).map(|_| rng.gen_range(0..n)).collect();
        let c = CyclicWord::new(&w);
        let ok = (0..d).all(|k| {
            let mut r = w.clone();
            r.rotate_left(k);
            CyclicWord::new(&r) == c
        });
        expect(ok, || format!("word {w:?}"))
    })
}

/// Enumerated necklaces match the closed count and a brute-force count.
pub fn necklace_enumeration(opts: &Opts) -> Check {
    run("necklace", "enumeration matches the necklace count", opts, |rng, _| {
        let d = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=3);
        let listed = necklaces(d, n);
        let mut brute = std::collections::BTreeSet::new();
        for k in 0..n.pow(d as u32) {
            let w: Vec<usize> = (0..d).map(|p| k / n.pow(p as u32) % n).collect();
            brute.insert(CyclicWord::new(&w));
        }
        let ok = listed.len() as u64 == necklace_count(d, n) && brute.len() == listed.len();
        expect(ok, || format!("d = {d}, n = {n}"))
    })
}

/// `𝔯² = id`, `p₊ + p₋ = id`, `𝔯 p₋ = −p₋`.
pub fn involution_split(opts: &Opts) -> Check {
    run("necklace", "involution and eigenprojections", opts, |rng, _| {
        let rank = rng.gen_range(1..=4);
        let cap = rng.gen_range(1..=5);
        let c = project_cyclic(&sample::series(rng, rank, cap, 1))?;
        let ok = rho(&rho(&c)) == c && p_plus(&c).add(&p_minus(&c)) == c && rho(&p_minus(&c)) == p_minus(&c).neg();
        expect(ok, || format!("c = {c}"))
    })
}

// ---- ldet ------------------------------------------------------------------

fn mat_case(opts: &Opts, rng: &mut impl Rng, min_n: usize) -> (usize, usize, usize) {
    let n = rng.gen_range(min_n..=3);
    let rank = 2 * genus_or(opts, rng, 1);
    let cap = cap_or(opts, rng, 4);
    (n, rank, cap)
}

/// `ℓdet(AB) = ℓdet(A)·ℓdet(B)`, `N ≤ 3`, `D ≤ 4`.
pub fn ldet_multiplicative(opts: &Opts) -> Check {
    run("ldet", "multiplicative", opts, |rng, _| {
        let (n, rank, cap) = mat_case(opts, rng, 1);
        let a = sample::invertible_matrix(rng, n, rank, cap);
        let b = sample::invertible_matrix(rng, n, rank, cap);
        let lhs = ldet(&a.mul(&b)?)?;
        let rhs = ldet(&a)?.compose(&ldet(&b)?)?;
        expect(lhs == rhs, || format!("N = {n}, D = {cap}"))
    })
}

/// `ℓdet(AE) = ℓdet(EA) = ℓdet(A)` for elementary `E = I + s·e_ij`.
pub fn ldet_elementary(opts: &Opts) -> Check {
    run("ldet", "elementary matrices act trivially", opts, |rng, _| {
        let (n, rank, cap) = mat_case(opts, rng, 2);
        let a = sample::invertible_matrix(rng, n, rank, cap);
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let mut e = SeriesMatrix::identity(n, rank, cap);
        let mut s = sample::series(rng, rank, cap, 1);
        s.add_monomial(&[], q_int(rng.gen_range(-2..=2)));
        e.set(i, j, s);
        let base = ldet(&a)?;
        let ok = ldet(&a.mul(&e)?)? == base && ldet(&e.mul(&a)?)? == base;
        expect(ok, || format!("N = {n}, D = {cap}, e_({i},{j})"))
    })
}

/// The scalar-pivot reduction does not change ℓdet.
pub fn ldet_reduction(opts: &Opts) -> Check {
    run("ldet", "reduction agrees with the direct series", opts, |rng, _| {
        let (n, rank, cap) = mat_case(opts, rng, 1);
        let a = sample::invertible_matrix(rng, n, rank, cap);
        expect(ldet(&a)? == ldet_unreduced(&a)?, || format!("N = {n}, D = {cap}"))
    })
}

// ---- altprod ---------------------------------------------------------------

/// `Δ_d` of `d` matrices over the augmentation ideal vanishes below degree
/// `d`; `d ≤ 4`, `N ≤ 3`, `D = d + 1`.
pub fn altprod_vanishing(opts: &Opts) -> Check {
    let zero_below = |rng: &mut ChaCha8Rng, t: usize| -> Result<(usize, Vec<bool>)> {
        let d = t % 4 + 1;
        let n = rng.gen_range(1..=3);
        let rank = 2 * genus_or(opts, rng, 1);
        let cap = opts.cap.unwrap_or(d + 1);
        let mats: Vec<SeriesMatrix> = (0..d).map(|_| sample::ideal_matrix(rng, n, rank, cap)).collect();
        let delta = delta_alt(&mats)?;
        Ok((n, (1..d.min(cap + 1)).map(|k| delta.slice(k).is_zero()).collect()))
    };
    let mut check = run("altprod", "alternating sum vanishes below degree d", opts, |rng, t| {
        let (n, zero) = zero_below(rng, t)?;
        let bad = zero.iter().position(|z| !z);
        expect(bad.is_none(), || format!("d = {}, N = {n}, nonzero residual in degree {}", t % 4 + 1, bad.unwrap_or(0) + 1))
    });
    let tallies: Vec<Vec<bool>> = (0..opts.trials)
        .into_par_iter()
        .map(|t| zero_below(&mut trial_rng(opts.seed, t as u64), t).map_or(Vec::new(), |r| r.1))
        .collect();
    let top = tallies.iter().map(Vec::len).max().unwrap_or(0);
    check.degree_counts = (0..top)
        .map(|k| {
            let checked = tallies.iter().filter(|z| z.len() > k).count();
            let zero = tallies.iter().filter(|z| z.get(k) == Some(&true)).count();
            (k + 1, zero, checked)
        })
        .collect();
    check
}

// ---- instances -------------------------------------------------------------

/// `d = t mod 3 + 1`, `g` alternating over `1, 2`, leaves of length ≤ 3 and
/// `D = d + 2`.
pub fn oracle_instance(opts: &Opts, rng: &mut impl Rng, t: usize) -> (OneLoopClasper, usize, usize) {
    let d = t % 3 + 1;
    let genus = opts.genus.unwrap_or(t / 3 % 2 + 1);
    let c = sample::clasper(rng, d, 2 * genus, 3);
    (c, genus, opts.cap.unwrap_or(d + 2))
}

/// Mapping cylinder of a random Torelli automorphism, `g ≤ 2`, `2 ≤ D ≤ 4`.
pub fn mapping_instance(opts: &Opts, rng: &mut impl Rng, t: usize) -> (LabeledPresentation, usize, String) {
    let genus = opts.genus.unwrap_or(t % 2 + 1);
    let phi = sample::torelli(rng, genus, 3);
    let cap = opts.cap.unwrap_or(2 + t / 2 % 3);
    let p = mapping_cylinder(&phi).expect("valid automorphism");
    (p, cap, format!("φ = [{}], D = {cap}", phi_text(&phi)))
}

/// 1-loop surgery of degree ≤ 3 on the trivial cylinder or on a random
/// Torelli mapping cylinder, `g ≤ 2`, `2 ≤ D ≤ 4`.
pub fn surgered_instance(opts: &Opts, rng: &mut impl Rng, t: usize) -> (LabeledPresentation, usize, String) {
    let genus = opts.genus.unwrap_or(t % 2 + 1);
    let d = rng.gen_range(1..=3);
    let c = sample::clasper(rng, d, 2 * genus, 3);
    let (base, label) = if t / 2 % 2 == 0 {
        (trivial(genus), "trivial".to_string())
    } else {
        let phi = sample::torelli(rng, genus, 2);
        (mapping_cylinder(&phi).expect("valid automorphism"), format!("φ = [{}]", phi_text(&phi)))
    };
    let cap = opts.cap.unwrap_or(2 + t / 4 % 3);
    let p = one_loop_presentation(&c, &base).expect("compiles");
    (p, cap, format!("clasper {}, base {label}, D = {cap}", c.to_json()))
}

// ---- surgery-oracle ---------------------------------------------------------

/// The closed factor equals the torsion difference of the compiled
/// presentation.
pub fn surgery_formula(opts: &Opts) -> Check {
    run("surgery-oracle", "closed factor equals compiled torsion difference", opts, |rng, t| {
        let (c, genus, cap) = oracle_instance(opts, rng, t);
        let (f, diff) = surgery_oracle(&c, &trivial(genus), cap)?;
        expect(f == diff, || format!("clasper {}, g = {genus}, D = {cap}", c.to_json()))
    })
}

/// The compiled presentation solves to trivial labels on every generator
/// except the leaf longitudes and the loop path.
pub fn surgery_internal_labels(opts: &Opts) -> Check {
    run("surgery-oracle", "internal edges have trivial labels", opts, |rng, t| {
        let (c, genus, cap) = oracle_instance(opts, rng, t);
        let p = one_loop_presentation(&c, &trivial(genus))?;
        let labels = solve_labels(&p, cap)?;
        let one = TensorSeries::one(2 * genus, cap);
        let th = Expansion::standard(2 * genus, cap);
        let mut ok = labels[p.index_of("l").expect("path")] == th.word(c.delta());
        for i in 1..=c.degree() {
            for j in 1..=3 {
                ok &= labels[p.index_of(&format!("a{i}_{j}")).expect("meridian")] == one;
                let b = &labels[p.index_of(&format!("b{i}_{j}")).expect("longitude")];
                ok &= if j == 1 { *b == th.word(&c.leaves()[i - 1]) } else { *b == one };
            }
        }
        expect(ok, || format!("clasper {}, D = {cap}", c.to_json()))
    })
}

/// `α̃_d(ψ(O(x₁..x_d))) = −x₁⋯x_d − (−1)^d x_d⋯x₁`, lower degrees zero,
/// computed from the compiled presentation with random leaf words and path.
pub fn one_loop_leading(opts: &Opts) -> Check {
    run("surgery-oracle", "1-loop leading term", opts, |rng, t| {
        let d = t % 4 + 1;
        let genus = opts.genus.unwrap_or(2);
        let rank = 2 * genus;
        let leaves: Vec<GroupWord> = (0..d).map(|_| sample::nonempty_word(rng, rank, 3)).collect();
        let delta = sample::word(rng, rank, 3);
        let c = OneLoopClasper::new(leaves.clone(), delta, vec![0; d])?;
        let p = one_loop_presentation(&c, &trivial(genus))?;
        let got = alpha_d(&p, d, d)?;
        let h: Vec<Vec<i64>> = leaves.iter().map(|w| w.abelianize(rank)).collect();
        let want = psi_leading(&h)?;
        expect(got == want, || format!("clasper {}: got {got}, want {want}", c.to_json()))
    })
}

// ---- magnus ----------------------------------------------------------------

/// `−α̃(M) + (σ_M)_* α̃(M̄) = ℓdet r(M)` on mapping cylinders.
pub fn torsion_magnus_mapping(opts: &Opts) -> Check {
    run("magnus", "torsion-Magnus identity on mapping cylinders", opts, |rng, t| {
        let (p, cap, what) = mapping_instance(opts, rng, t);
        let (lhs, rhs) = torsion_magnus_sides(&p, cap)?;
        expect(lhs == rhs, || what)
    })
}

/// The same identity on 1-loop surgered cylinders.
pub fn torsion_magnus_surgered(opts: &Opts) -> Check {
    run("magnus", "torsion-Magnus identity on surgered cylinders", opts, |rng, t| {
        let (p, cap, what) = surgered_instance(opts, rng, t);
        let (lhs, rhs) = torsion_magnus_sides(&p, cap)?;
        expect(lhs == rhs, || what)
    })
}

/// For `σ ≡ id` modulo degree `d + 1`: `Tr_d` of the degree-`(d+1)` part of
/// `log σ` equals the degree-`d` cyclic trace of `Mag(σ)`; `d ≤ 3`, `g ≤ 2`.
pub fn degree_d_trace(opts: &Opts) -> Check {
    run("magnus", "trace of log equals trace of Magnus matrix", opts, |rng, t| {
        let d = t % 3 + 1;
        let genus = opts.genus.unwrap_or(t / 3 % 2 + 1);
        let rank = 2 * genus;
        let phi = sample::deep_endomorphism(rng, genus, d);
        let cap = opts.cap.unwrap_or(d + 2).max(d + 2);
        let sigma = ExpansionAuto::from_words(&phi, &Expansion::standard(rank, cap))?;
        if let DegreeBound::Finite(k) = sigma.ia_degree() {
            if k < d {
                return Err(Error::FiltrationTooShallow { needed: d, found: k });
            }
        }
        let lhs = es_trace(&log_component(&sigma, d)?)?;
        let rhs = project_cyclic(&sigma.magnus_matrix()?.trace().homogeneous(d))?;
        let same = lhs.terms().collect::<Vec<_>>() == rhs.terms().collect::<Vec<_>>();
        expect(same, || format!("φ = [{}], d = {d}: {lhs} vs {rhs}", phi_text(&phi)))
    })
}

// ---- crossed ---------------------------------------------------------------

/// `α̃(M∘N) = α̃(M)·(σ_M)_* α̃(N)` with `M, N` drawn from the mapping-cylinder
/// and surgered families.
pub fn crossed_law(opts: &Opts) -> Check {
    run("crossed", "crossed homomorphism law", opts, |rng, t| {
        let genus = opts.genus.unwrap_or(t % 2 + 1);
        let local = Opts { genus: Some(genus), ..opts.clone() };
        let pick = |k: usize, rng: &mut ChaCha8Rng| {
            if k == 0 {
                mapping_instance(&local, rng, t)
            } else {
                surgered_instance(&local, rng, t)
            }
        };
        let (p, cap_p, wp) = pick(t / 2 % 2, rng);
        let (q, _, wq) = pick(t / 4 % 2, rng);
        let (lhs, rhs) = crossed_sides(&p, &q, cap_p)?;
        expect(lhs == rhs, || format!("M: {wp}; N: {wq}"))
    })
}

// ---- abelian ---------------------------------------------------------------

fn abelian_check(p: &LabeledPresentation, cap: usize, what: String) -> Outcome {
    let (lhs, rhs) = commutative_sides(p, cap)?;
    expect(lhs == rhs, || what)
}

/// Commutative reduction on the surgery-oracle instances (after surgery).
pub fn abelian_oracle(opts: &Opts) -> Check {
    run("abelian", "commutative reduction on surgery-oracle instances", opts, |rng, t| {
        let (c, genus, cap) = oracle_instance(opts, rng, t);
        let p = one_loop_presentation(&c, &trivial(genus))?;
        abelian_check(&p, cap, format!("clasper {}, g = {genus}, D = {cap}", c.to_json()))
    })
}

pub fn abelian_mapping(opts: &Opts) -> Check {
    run("abelian", "commutative reduction on mapping cylinders", opts, |rng, t| {
        let (p, cap, what) = mapping_instance(opts, rng, t);
        abelian_check(&p, cap, what)
    })
}

pub fn abelian_surgered(opts: &Opts) -> Check {
    run("abelian", "commutative reduction on surgered cylinders", opts, |rng, t| {
        let (p, cap, what) = surgered_instance(opts, rng, t);
        abelian_check(&p, cap, what)
    })
}

// ---- kloop -----------------------------------------------------------------

fn theta_case(opts: &Opts, rng: &mut ChaCha8Rng, base: &LabeledPresentation, what: String) -> Outcome {
    let rank = base.rank();
    let cap = opts.cap.unwrap_or(4);
    let d1 = sample::word(rng, rank, 3);
    let d2 = sample::word(rng, rank, 3);
    let after = torsion(&theta_presentation(&d1, &d2, base)?, cap)?;
    let before = torsion(base, cap)?;
    expect(after.torsion == before.torsion, || format!("{what}, paths {d1} / {d2}, D = {cap}"))
}

/// Theta surgery leaves the torsion of the trivial cylinder at `(1, 0)`.
pub fn theta_on_trivial(opts: &Opts) -> Check {
    run("kloop", "theta surgery on the trivial cylinder", opts, |rng, t| {
        let genus = opts.genus.unwrap_or(t % 2 + 1);
        theta_case(opts, rng, &trivial(genus), format!("g = {genus}"))
    })
}

/// Theta surgery leaves the torsion of a Torelli mapping cylinder unchanged.
pub fn theta_on_torelli(opts: &Opts) -> Check {
    run("kloop", "theta surgery on mapping cylinders", opts, |rng, t| {
        let genus = opts.genus.unwrap_or(t % 2 + 1);
        let phi = sample::torelli(rng, genus, 2);
        let base = mapping_cylinder(&phi)?;
        theta_case(opts, rng, &base, format!("φ = [{}]", phi_text(&phi)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_on_a_few_trials() {
        let opts = Opts { trials: 4, ..Opts::default() };
        for s in SUITES {
            for c in run_suite(s, &opts).unwrap() {
                assert!(c.passed(), "{}", c.line());
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let opts = Opts { seed: 7, trials: 6, ..Opts::default() };
        assert_eq!(run_suite("fox", &opts).unwrap(), run_suite("fox", &opts).unwrap());
        assert!(run_suite("nope", &opts).is_err());
    }
}
