//! Clasper surgery data and presentations.
//!
//! A 1-loop clasper of degree `d` is given algebraically by its leaf words
//! `γ₁..γ_d`, a loop path `δ` and twist bits `ε_i`. It can be evaluated in two
//! independent ways: by the closed factor [`surgery_factor`], or by compiling
//! it into a presentation with [`one_loop_presentation`] and running the
//! torsion pipeline.

use num_traits::One;
use serde_json::{json, Value};

use crate::cyclic::{project_cyclic, CyclicSeries};
use crate::cylinder::{eval_word, invert_all, solve_system, torsion, LabeledPresentation};
use crate::error::{Error, Result};
use crate::k1::K1Value;
use crate::rational::{q_int, Q};
use crate::series::{Expansion, TensorSeries};
use crate::word::{GroupWord, Letter, RingElement};

/// Algebraic data of a 1-loop graph clasper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneLoopClasper {
    leaves: Vec<GroupWord>,
    delta: GroupWord,
    twists: Vec<u8>,
}

impl OneLoopClasper {
    pub fn new(leaves: Vec<GroupWord>, delta: GroupWord, twists: Vec<u8>) -> Result<Self> {
        if leaves.is_empty() {
            return Err(Error::PreconditionViolated("a 1-loop clasper needs at least one leaf".into()));
        }
        if twists.len() != leaves.len() {
            return Err(Error::PreconditionViolated(format!(
                "{} twist bits for {} leaves",
                twists.len(),
                leaves.len()
            )));
        }
        if twists.iter().any(|&t| t > 1) {
            return Err(Error::PreconditionViolated("twist bits must be 0 or 1".into()));
        }
        Ok(OneLoopClasper { leaves, delta, twists })
    }

    /// Untwisted clasper with `δ = 1`.
    pub fn plain(leaves: Vec<GroupWord>) -> Self {
        let d = leaves.len();
        Self::new(leaves, GroupWord::identity(), vec![0; d]).expect("valid data")
    }

    pub fn degree(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaves(&self) -> &[GroupWord] {
        &self.leaves
    }

    pub fn delta(&self) -> &GroupWord {
        &self.delta
    }

    pub fn twists(&self) -> &[u8] {
        &self.twists
    }

    /// `ε = Σ ε_i mod 2`.
    pub fn twist_parity(&self) -> u8 {
        self.twists.iter().fold(0, |a, &t| a ^ t)
    }

    /// Smallest even rank containing every letter of the data.
    pub fn min_rank(&self) -> usize {
        let r = self.leaves.iter().chain([&self.delta]).map(GroupWord::rank_hint).max().unwrap_or(0);
        (r.max(1) + 1) / 2 * 2
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree(),
            "leaves": self.leaves.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "delta": self.delta.to_string(),
            "twists": self.twists,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("clasper JSON: {m}"));
        let leaves = v
            .get("leaves")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing leaves"))?
            .iter()
            .map(|s| s.as_str().ok_or_else(|| bad("leaves must be strings")).and_then(GroupWord::parse))
            .collect::<Result<Vec<_>>>()?;
        let delta = match v.get("delta") {
            None => GroupWord::identity(),
            Some(s) => GroupWord::parse(s.as_str().ok_or_else(|| bad("delta must be a string"))?)?,
        };
        let twists = match v.get("twists") {
            None => vec![0; leaves.len()],
            Some(t) => t
                .as_array()
                .ok_or_else(|| bad("twists must be an array"))?
                .iter()
                .map(|b| b.as_u64().filter(|&b| b <= 1).map(|b| b as u8).ok_or_else(|| bad("twists must be 0 or 1")))
                .collect::<Result<Vec<_>>>()?,
        };
        if let Some(d) = v.get("degree") {
            if d.as_u64() != Some(leaves.len() as u64) {
                return Err(bad("degree does not match the number of leaves"));
            }
        }
        Self::new(leaves, delta, twists)
    }
}

/// A rooted binary tree with leaves labeled by `H`-vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(Vec<i64>),
    Node(Box<TreeNode>, Box<TreeNode>),
}

impl TreeNode {
    pub fn leaf(h: Vec<i64>) -> Self {
        TreeNode::Leaf(h)
    }

    pub fn node(left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Node(Box::new(left), Box::new(right))
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Node(a, b) => a.num_leaves() + b.num_leaves(),
        }
    }

    fn ranks(&self, out: &mut Vec<usize>) {
        match self {
            TreeNode::Leaf(h) => out.push(h.len()),
            TreeNode::Node(a, b) => {
                a.ranks(out);
                b.ranks(out);
            }
        }
    }

    /// The same tree with the children of the root exchanged.
    pub fn swapped(&self) -> Self {
        match self {
            TreeNode::Leaf(_) => self.clone(),
            TreeNode::Node(a, b) => TreeNode::Node(b.clone(), a.clone()),
        }
    }
}

/// A tree clasper with `twists` half-twists along its edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeClasper {
    root: TreeNode,
    twists: usize,
    rank: usize,
}

impl TreeClasper {
    pub fn new(root: TreeNode, twists: usize) -> Result<Self> {
        if root.num_leaves() < 2 {
            return Err(Error::PreconditionViolated("a tree clasper needs at least two leaves".into()));
        }
        let mut ranks = Vec::new();
        root.ranks(&mut ranks);
        let rank = ranks[0];
        if rank == 0 || ranks.iter().any(|&r| r != rank) {
            return Err(Error::PreconditionViolated("leaf labels must be nonempty vectors of one length".into()));
        }
        Ok(TreeClasper { root, twists, rank })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn twists(&self) -> usize {
        self.twists
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.root.num_leaves()
    }
}

/// `Σ h_i x_i` as a degree-1 series.
pub fn h_series(h: &[i64], cap: usize) -> TensorSeries {
    TensorSeries::from_terms(h.len(), cap, h.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (vec![i], q_int(c))))
}

fn bracket_rec(n: &TreeNode, cap: usize) -> TensorSeries {
    match n {
        TreeNode::Leaf(h) => h_series(h, cap),
        TreeNode::Node(a, b) => {
            let x = bracket_rec(a, cap);
            let y = bracket_rec(b, cap);
            &(&x * &y) - &(&y * &x)
        }
    }
}

/// `(−1)^k` times the iterated bracket of the tree, homogeneous of degree
/// equal to the number of leaves.
pub fn tree_bracket(t: &TreeClasper) -> TensorSeries {
    let b = bracket_rec(&t.root, t.degree());
    if t.twists % 2 == 1 {
        -&b
    } else {
        b
    }
}

/// `x₁ ⊗ ⋯ ⊗ x_d` for `H`-vectors `x_i`.
pub fn h_tensor(vectors: &[Vec<i64>], rank: usize, cap: usize) -> TensorSeries {
    let mut s = TensorSeries::one(rank, cap);
    for v in vectors {
        s = &s * &h_series(v, cap);
    }
    s
}

/// `−x₁⊗⋯⊗x_d − (−1)^d x_d⊗⋯⊗x₁` projected to cyclic words, at cap `d`.
pub fn psi_leading(labels: &[Vec<i64>]) -> Result<CyclicSeries> {
    let d = labels.len();
    let rank = labels.first().map_or(0, Vec::len);
    if d == 0 || rank == 0 || labels.iter().any(|v| v.len() != rank) {
        return Err(Error::PreconditionViolated("need at least one label, all of one nonzero length".into()));
    }
    let fwd = h_tensor(labels, rank, d);
    let rev: Vec<Vec<i64>> = labels.iter().rev().cloned().collect();
    let bwd = h_tensor(&rev, rank, d);
    let sign = if d % 2 == 0 { q_int(-1) } else { q_int(1) };
    let mut s = -&fwd;
    s.add_scaled(&bwd, &sign);
    project_cyclic(&s)
}

/// The clasper whose surgery is the mirror image: leaves reversed and
/// inverted, `δ ↦ δ⁻¹`, twists reversed. A 1-loop graph has `b₁ = 1`, so the
/// diagram sign `(−1)^{b₁+1}` is `+1`.
pub fn clasper_mirror(c: &OneLoopClasper) -> OneLoopClasper {
    OneLoopClasper {
        leaves: c.leaves.iter().rev().map(GroupWord::inverse).collect(),
        delta: c.delta.inverse(),
        twists: c.twists.iter().rev().copied().collect(),
    }
}

/// The closed factor: `log = project(log F₁ + log F₂)` with
/// `F₁ = θ(δ) + s·(1−θγ_d)⋯(1−θγ₁)` and `F₂ = θ(δ)⁻¹ + s·(1−θγ₁⁻¹)⋯(1−θγ_d⁻¹)`,
/// `s = (−1)^{ε+1}`.
pub fn surgery_factor(c: &OneLoopClasper, rank: usize, cap: usize) -> Result<K1Value> {
    for w in c.leaves.iter().chain([&c.delta]) {
        w.check_rank(rank)?;
    }
    let theta = Expansion::standard(rank, cap);
    let one = TensorSeries::one(rank, cap);
    let s = if c.twist_parity() == 1 { Q::one() } else { -Q::one() };
    let mut p1 = one.clone();
    for g in c.leaves.iter().rev() {
        p1 = &p1 * &(&one - &theta.word(g));
    }
    let mut p2 = one.clone();
    for g in &c.leaves {
        p2 = &p2 * &(&one - &theta.word(&g.inverse()));
    }
    let mut f1 = theta.word(&c.delta);
    f1.add_scaled(&p1, &s);
    let mut f2 = theta.word(&c.delta.inverse());
    f2.add_scaled(&p2, &s);
    let log = f1.log()?.checked_add(&f2.log()?)?;
    Ok(K1Value { det_eps: Q::one(), log: project_cyclic(&log)? })
}

/// Generators and relators to be glued into a base presentation, with the
/// generators (`ports`) whose labels are fixed by the embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    names: Vec<String>,
    relators: Vec<GroupWord>,
    ports: Vec<usize>,
}

impl Fragment {
    fn build(names: Vec<String>, relators: &[String], ports: &[&str]) -> Self {
        let look = |n: &str| names.iter().position(|m| m == n);
        let relators = relators.iter().map(|r| GroupWord::parse_with(r, look).expect("template relator")).collect();
        let ports = ports.iter().map(|p| look(p).expect("template port")).collect();
        Fragment { names, relators, ports }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn relators(&self) -> &[GroupWord] {
        &self.relators
    }

    pub fn ports(&self) -> &[usize] {
        &self.ports
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn display_relator(&self, k: usize) -> String {
        self.relators[k].display_with(&self.names)
    }

    /// Labels of all generators when the ports are taken as the reference
    /// basis (port `k` ↦ `1 + x_k`). Needs `#relators = #generators − #ports`.
    pub fn solve(&self, cap: usize) -> Result<Vec<TensorSeries>> {
        solve_system(self.names.len(), &self.ports, &self.relators, cap)
    }

    /// Glues the fragment into `base`: its generators become extra
    /// generators, and port `k` gets the seed relator `port_k · w_k⁻¹` with
    /// `w_k` a word in the surface letters of `base`.
    pub fn embed(&self, base: &LabeledPresentation, seeds: &[GroupWord]) -> Result<LabeledPresentation> {
        if seeds.len() != self.ports.len() {
            return Err(Error::PreconditionViolated(format!(
                "{} seed words for {} ports",
                seeds.len(),
                self.ports.len()
            )));
        }
        let r = base.rank();
        for w in seeds {
            w.check_rank(r)?;
        }
        let names = base.names();
        let offset = names.len();
        let shift = |w: &GroupWord| GroupWord::from_letters(w.letters().iter().map(|l| Letter::new(l.gen + offset, l.inv)));
        let mut relators: Vec<GroupWord> = base.relators().to_vec();
        relators.extend(self.relators.iter().map(shift));
        for (&p, w) in self.ports.iter().zip(seeds) {
            relators.push(GroupWord::generator(p + offset).mul(&w.inverse()));
        }
        let extra: Vec<String> = names[2 * r..].iter().chain(&self.names).cloned().collect();
        LabeledPresentation::new(base.genus(), names[..r].to_vec(), names[r..2 * r].to_vec(), extra, relators)
    }
}

fn y_relators(a: impl Fn(usize) -> String, b: impl Fn(usize) -> String) -> Vec<String> {
    let up = |s: String| {
        let mut c = s.chars();
        let f = c.next().unwrap();
        f.to_uppercase().chain(c).collect::<String>()
    };
    (1..=3)
        .map(|i| {
            let j = i % 3 + 1;
            let k = j % 3 + 1;
            // α_i β_{i+2} α_{i+1} β_{i+1}⁻¹ α_{i+1}⁻¹ β_{i+2}⁻¹ β_{i+1}
            format!("{} {} {} {} {} {} {}", a(i), b(k), a(j), up(b(j)), up(a(j)), up(b(k)), b(j))
        })
        .collect()
}

/// The Y-graph handlebody: `α₁..α₃` (meridians), `β₁..β₃` (longitudes) and
/// the three relators `α_iβ_{i+2}α_{i+1}β_{i+1}⁻¹α_{i+1}⁻¹β_{i+2}⁻¹β_{i+1}`.
/// The ports are the longitudes.
pub fn y_presentation() -> Fragment {
    let names: Vec<String> = (1..=3).flat_map(|i| [format!("a{i}"), format!("b{i}")]).collect();
    let rels = y_relators(|i| format!("a{i}"), |i| format!("b{i}"));
    Fragment::build(names, &rels, &["b1", "b2", "b3"])
}

fn node_names(i: usize) -> Vec<String> {
    (1..=3).flat_map(|j| [format!("a{i}_{j}"), format!("b{i}_{j}")]).collect()
}

fn a(i: usize, j: usize) -> String {
    format!("a{i}_{j}")
}

fn b(i: usize, j: usize) -> String {
    format!("b{i}_{j}")
}

fn inv(s: &str) -> String {
    let mut c = s.chars();
    let f = c.next().unwrap();
    f.to_uppercase().chain(c).collect()
}

/// Relators `r_{i,4}, r_{i,5}` joining edge 2 of node `i` to edge 3 of node
/// `k`, through the path generator `path` when given.
fn join(i: usize, k: usize, twisted: bool, path: Option<&str>) -> [String; 2] {
    let (a2, b2, a3, b3) = (a(i, 2), b(i, 2), a(k, 3), b(k, 3));
    let conj = |x: String| match path {
        Some(l) => format!("{l} {x} {}", inv(l)),
        None => x,
    };
    if twisted {
        let t = format!("{} {a2} {b2}", inv(&b2));
        [
            format!("{t} {}", conj(inv(&b3))),
            format!("{t} {} {b2} {}", inv(&a2), conj(inv(&a3))),
        ]
    } else {
        [format!("{a2} {}", conj(b3)), format!("{b2} {}", conj(a3))]
    }
}

fn node_relators(i: usize) -> Vec<String> {
    y_relators(|j| a(i, j), |j| b(i, j))
}

/// The handlebody of a 1-loop clasper of degree `d`: nodes `i = 1..d`, each a
/// Y-piece with generators `α_{i,j}, β_{i,j}`, edge 2 of node `i` joined to
/// edge 3 of node `i+1`, and the last join routed through the loop-path
/// generator `l`. Ports: the leaf longitudes `β_{i,1}`, then `l`.
pub fn one_loop_fragment(twists: &[u8]) -> Fragment {
    let d = twists.len();
    let mut names: Vec<String> = (1..=d).flat_map(node_names).collect();
    names.push("l".into());
    let mut rels = Vec::new();
    for i in 1..=d {
        rels.extend(node_relators(i));
        let (k, path) = if i < d { (i + 1, None) } else { (1, Some("l")) };
        rels.extend(join(i, k, twists[i - 1] == 1, path));
    }
    let ports: Vec<String> = (1..=d).map(|i| b(i, 1)).chain(["l".to_string()]).collect();
    let ports: Vec<&str> = ports.iter().map(String::as_str).collect();
    Fragment::build(names, &rels, &ports)
}

/// Two Y-pieces joined along all three edge pairs: edge 2 of node 1 to edge 3
/// of node 2 directly, edge 2 of node 2 to edge 3 of node 1 through `l`, and
/// edge 1 of node 1 to edge 1 of node 2 through `k`. No leaves; the ports are
/// the two path generators.
pub fn theta_fragment() -> Fragment {
    let mut names: Vec<String> = (1..=2).flat_map(node_names).collect();
    names.extend(["l".to_string(), "k".to_string()]);
    let mut rels = node_relators(1);
    rels.extend(node_relators(2));
    rels.extend(join(1, 2, false, None));
    rels.extend(join(2, 1, false, Some("l")));
    rels.extend([format!("a1_1 k b2_1 K"), format!("b1_1 k a2_1 K")]);
    Fragment::build(names, &rels, &["l", "k"])
}

/// `base` after surgery along the 1-loop clasper `c`: the base relators, the
/// clasper handlebody relators, and seeds `β_{i,1} ↦ γ_i`, `l ↦ δ`.
pub fn one_loop_presentation(c: &OneLoopClasper, base: &LabeledPresentation) -> Result<LabeledPresentation> {
    let seeds: Vec<GroupWord> = c.leaves.iter().cloned().chain([c.delta.clone()]).collect();
    one_loop_fragment(&c.twists).embed(base, &seeds)
}

/// `base` after surgery along the theta clasper with loop paths `δ₁, δ₂`.
pub fn theta_presentation(delta1: &GroupWord, delta2: &GroupWord, base: &LabeledPresentation) -> Result<LabeledPresentation> {
    theta_fragment().embed(base, &[delta1.clone(), delta2.clone()])
}

/// The closed factor and the torsion difference computed from the compiled
/// presentation, both as logs at `cap`.
pub fn surgery_oracle(c: &OneLoopClasper, base: &LabeledPresentation, cap: usize) -> Result<(CyclicSeries, CyclicSeries)> {
    let formula = surgery_factor(c, base.rank(), cap)?;
    let before = torsion(base, cap)?;
    let after = torsion(&one_loop_presentation(c, base)?, cap)?;
    Ok((formula.log, after.torsion.log.sub(&before.torsion.log)))
}

/// Evaluates a group-ring element under generator labels.
pub fn eval_ring(r: &RingElement, labels: &[TensorSeries]) -> Result<TensorSeries> {
    let inv = invert_all(labels)?;
    let mut s = TensorSeries::zero(labels[0].rank(), labels[0].cap());
    for (w, c) in r.terms() {
        s.add_scaled(&eval_word(w, labels, &inv), c);
    }
    Ok(s)
}
