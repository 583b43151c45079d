//! Seeded random generators for the property suites.
//!
//! Every generator draws from a `ChaCha8Rng`, so a `(seed, trial)` pair
//! always reproduces the same instance.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clasper::OneLoopClasper;
use crate::k1::SeriesMatrix;
use crate::rational::q_int;
use crate::series::TensorSeries;
use crate::word::{GroupWord, Letter};

/// The generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A freely reduced word of length at most `max_len`, not necessarily
/// nonempty.
pub fn word(rng: &mut impl Rng, rank: usize, max_len: usize) -> GroupWord {
    let len = rng.gen_range(0..=max_len);
    GroupWord::from_letters((0..len).map(|_| Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5))))
}

/// A nonempty word of length at most `max_len`.
pub fn nonempty_word(rng: &mut impl Rng, rank: usize, max_len: usize) -> GroupWord {
    loop {
        let w = word(rng, rank, max_len.max(1));
        if !w.is_identity() {
            return w;
        }
    }
}

fn other(rng: &mut impl Rng, rank: usize, avoid: &[usize]) -> usize {
    loop {
        let j = rng.gen_range(0..rank);
        if !avoid.contains(&j) {
            return j;
        }
    }
}

/// One elementary Torelli automorphism whose contracted Johnson image is even:
/// `γ_i ↦ γ_i [γ_j, γ_k]^{±1}` with `j, k ≠ i` (rank ≥ 4), the squared partial
/// conjugation `γ_i ↦ γ_j^{±2} γ_i γ_j^{∓2}`, or conjugation of one generator
/// by a commutator.
pub fn elementary_torelli(rng: &mut impl Rng, rank: usize) -> Vec<GroupWord> {
    let mut images: Vec<GroupWord> = (0..rank).map(GroupWord::generator).collect();
    let i = rng.gen_range(0..rank);
    let g = GroupWord::generator;
    let kind = if rank >= 4 { rng.gen_range(0..3) } else { rng.gen_range(1..3) };
    images[i] = match kind {
        0 => {
            let j = other(rng, rank, &[i]);
            let k = other(rng, rank, &[i, j]);
            let e = if rng.gen_bool(0.5) { 1 } else { -1 };
            g(i).mul(&GroupWord::commutator(&g(j), &g(k)).pow(e))
        }
        1 => {
            let j = other(rng, rank, &[i]);
            let c = g(j).pow(if rng.gen_bool(0.5) { 2 } else { -2 });
            c.mul(&g(i)).mul(&c.inverse())
        }
        _ => {
            let a = nonempty_word(rng, rank, 2);
            let b = nonempty_word(rng, rank, 2);
            let c = GroupWord::commutator(&a, &b);
            c.mul(&g(i)).mul(&c.inverse())
        }
    };
    images
}

/// A product of `1..=max_steps` elementary Torelli automorphisms, as the
/// images of the generators.
pub fn torelli(rng: &mut impl Rng, genus: usize, max_steps: usize) -> Vec<GroupWord> {
    let rank = 2 * genus;
    let steps = rng.gen_range(1..=max_steps.max(1));
    let mut phi: Vec<GroupWord> = (0..rank).map(GroupWord::generator).collect();
    for _ in 0..steps {
        let e = elementary_torelli(rng, rank);
        phi = e.iter().map(|w| w.substitute(&phi)).collect();
    }
    phi
}

fn signed_generator(rng: &mut impl Rng, rank: usize) -> GroupWord {
    GroupWord::generator(rng.gen_range(0..rank)).pow(if rng.gen_bool(0.5) { 1 } else { -1 })
}

/// Generator images `γ_i ↦ γ_i c` for one random `i`, with `c` a nontrivial
/// left-normed commutator of weight `d + 1`. The induced map on the completed
/// group ring is the identity modulo degree `d + 1`.
pub fn deep_endomorphism(rng: &mut impl Rng, genus: usize, d: usize) -> Vec<GroupWord> {
    let rank = 2 * genus;
    let mut images: Vec<GroupWord> = (0..rank).map(GroupWord::generator).collect();
    let i = rng.gen_range(0..rank);
    let c = loop {
        let mut c = signed_generator(rng, rank);
        for _ in 0..d {
            c = GroupWord::commutator(&c, &signed_generator(rng, rank));
        }
        if !c.is_identity() {
            break c;
        }
    };
    images[i] = GroupWord::generator(i).mul(&c);
    images
}

/// A 1-loop clasper of degree `d` with random leaves, path and twists.
pub fn clasper(rng: &mut impl Rng, d: usize, rank: usize, max_len: usize) -> OneLoopClasper {
    let leaves = (0..d).map(|_| nonempty_word(rng, rank, max_len)).collect();
    let delta = word(rng, rank, max_len);
    let twists = (0..d).map(|_| rng.gen_range(0..=1u8)).collect();
    OneLoopClasper::new(leaves, delta, twists).expect("valid data")
}

/// A series with integer coefficients in `-2..=2`, a few terms per degree in
/// `low..=cap`.
pub fn series(rng: &mut impl Rng, rank: usize, cap: usize, low: usize) -> TensorSeries {
    let mut s = TensorSeries::zero(rank, cap);
    for deg in low..=cap {
        for _ in 0..rng.gen_range(0..=2) {
            let mono: Vec<usize> = (0..deg).map(|_| rng.gen_range(0..rank)).collect();
            s.add_monomial(&mono, q_int(rng.gen_range(-2..=2)));
        }
    }
    s
}

/// An `n × n` matrix whose augmentation is a random integer matrix with
/// nonzero determinant.
pub fn invertible_matrix(rng: &mut impl Rng, n: usize, rank: usize, cap: usize) -> SeriesMatrix {
    loop {
        let mut m = SeriesMatrix::zero(n, n, rank, cap);
        for i in 0..n {
            for j in 0..n {
                let mut e = series(rng, rank, cap, 1);
                let c = if i == j { rng.gen_range(1..=2) } else { rng.gen_range(-1..=1) };
                e.add_monomial(&[], q_int(c));
                m.set(i, j, e);
            }
        }
        if !crate::linalg::rat_det(&m.eps()).is_zero() {
            return m;
        }
    }
}

/// An `n × n` matrix with entries in the augmentation ideal.
pub fn ideal_matrix(rng: &mut impl Rng, n: usize, rank: usize, cap: usize) -> SeriesMatrix {
    let mut m = SeriesMatrix::zero(n, n, rank, cap);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, series(rng, rank, cap, 1));
        }
    }
    m
}
