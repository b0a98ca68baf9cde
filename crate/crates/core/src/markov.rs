//! The non-backtracking Markov chain on letters and its samplers.
//!
//! The chain moves from `a` to any `b ≠ ā` with probability `θ = 1/(g−1)`.
//! Its stationary length-`n` paths are exactly uniform on reduced words,
//! which is what the samplers below rely on.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::surface::{Letter, Surface};
use crate::words::{
    count_joinable, count_strings, necklace_of_letters, strings_with_first, JoinableWord, Necklace,
    Word,
};

/// Identifier of the random stream construction recorded in every report.
pub const RNG_ALGORITHM: &str = "chacha8/stream-per-chunk/v1";

/// Samples per independent random stream. Fixed so results do not depend on
/// the number of worker threads.
pub const CHUNK_SIZE: usize = 1024;

/// Transition kernel of the non-backtracking walk, over any scalar type.
#[derive(Clone, Debug)]
pub struct MarkovModel<T> {
    inverse: Vec<usize>,
    theta: T,
}

impl<T: Scalar> MarkovModel<T> {
    pub fn new(surface: &Surface) -> Self {
        let g = surface.g();
        MarkovModel {
            inverse: surface.letters().map(|x| surface.inv(x).index()).collect(),
            theta: T::ratio(1, g as i64 - 1),
        }
    }

    pub fn g(&self) -> usize {
        self.inverse.len()
    }

    /// `θ = 1/(g−1)`.
    pub fn theta(&self) -> &T {
        &self.theta
    }

    /// Stationary probability of each letter, `1/g`.
    pub fn stationary(&self) -> T {
        T::ratio(1, self.g() as i64)
    }

    pub fn transition(&self, a: usize, b: usize) -> T {
        if self.inverse[a] == b {
            T::zero()
        } else {
            self.theta.clone()
        }
    }

    pub fn matrix(&self) -> Vec<Vec<T>> {
        let g = self.g();
        (0..g).map(|a| (0..g).map(|b| self.transition(a, b)).collect()).collect()
    }

    /// `m`-step transition probability from the closed form for `(B − A)^m`.
    pub fn m_step(&self, a: usize, b: usize, m: u32) -> T {
        let g = T::from_int(self.g() as i64);
        let tm = self.theta.powi(m);
        if m % 2 == 1 {
            let base = (T::one() + tm.clone()) / g;
            if self.inverse[a] == b {
                base - tm
            } else {
                base
            }
        } else {
            let base = (T::one() - tm.clone()) / g;
            if a == b {
                base + tm
            } else {
                base
            }
        }
    }

    /// `P^m` by repeated multiplication.
    pub fn matrix_power(&self, m: u32) -> Vec<Vec<T>> {
        let g = self.g();
        let p = self.matrix();
        let mut acc: Vec<Vec<T>> = (0..g)
            .map(|i| (0..g).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        for _ in 0..m {
            let mut next = vec![vec![T::zero(); g]; g];
            for i in 0..g {
                for k in 0..g {
                    if acc[i][k].is_zero() {
                        continue;
                    }
                    for j in 0..g {
                        next[i][j] = next[i][j].clone() + acc[i][k].clone() * p[k][j].clone();
                    }
                }
            }
            acc = next;
        }
        acc
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        let p = self.matrix();
        let g = self.g();
        (0..g).all(|i| {
            let row = p[i].iter().cloned().fold(T::zero(), |a, b| a + b);
            let col = (0..g).map(|j| p[j][i].clone()).fold(T::zero(), |a, b| a + b);
            row.agrees_with(&T::one()) && col.agrees_with(&T::one())
        })
    }

    /// All entries of the two-step kernel are positive.
    pub fn is_aperiodic_irreducible(&self) -> bool {
        self.matrix_power(2).iter().flatten().all(|x| x.is_positive())
    }

    /// `max_{a,b} |p_m(a,b) − 1/g|`.
    pub fn max_deviation(&self, m: u32) -> T {
        let pi = self.stationary();
        let g = self.g();
        let mut best = T::zero();
        for a in 0..g {
            for b in 0..g {
                let d = (self.m_step(a, b, m) - pi.clone()).abs();
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// Rows `(m, max |p_m − 1/g|, θ^m)` for `m = 1..=m_max`.
    pub fn mixing_table(&self, m_max: u32) -> Vec<(u32, T, T)> {
        (1..=m_max).map(|m| (m, self.max_deviation(m), self.theta.powi(m))).collect()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    String,
    Joinable,
    NecklaceApprox,
    NecklaceExact,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "string" => Ok(SampleMode::String),
            "joinable" => Ok(SampleMode::Joinable),
            "necklace-approx" | "necklace_approx" => Ok(SampleMode::NecklaceApprox),
            "necklace-exact" | "necklace_exact" => Ok(SampleMode::NecklaceExact),
            other => Err(Error::InvalidArgument(format!("unknown sample mode `{other}`"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub mode: SampleMode,
}

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform reduced word of length `n` (stationary path of the chain).
pub fn sample_string_letters<R: Rng + ?Sized>(surface: &Surface, n: usize, rng: &mut R) -> Vec<Letter> {
    let g = surface.g();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let mut prev = Letter(rng.random_range(0..g) as u8);
    out.push(prev);
    for _ in 1..n {
        let bad = surface.inv(prev).index();
        let r = rng.random_range(0..g - 1);
        prev = Letter(if r < bad { r } else { r + 1 } as u8);
        out.push(prev);
    }
    out
}

pub fn sample_string<R: Rng + ?Sized>(surface: &Surface, n: usize, rng: &mut R) -> Result<Word> {
    if n == 0 {
        return Err(Error::TooShort { min: 1, len: 0 });
    }
    Word::new(surface, sample_string_letters(surface, n, rng))
}

/// Uniform joinable word by rejection; also returns the number of rejections.
pub fn sample_joinable_letters<R: Rng + ?Sized>(
    surface: &Surface,
    n: usize,
    rng: &mut R,
) -> (Vec<Letter>, u64) {
    let mut rejected = 0;
    loop {
        let w = sample_string_letters(surface, n, rng);
        if w[n - 1] != surface.inv(w[0]) {
            return (w, rejected);
        }
        rejected += 1;
    }
}

pub fn sample_joinable<R: Rng + ?Sized>(
    surface: &Surface,
    n: usize,
    rng: &mut R,
) -> Result<(JoinableWord, u64)> {
    if n < 2 {
        return Err(Error::TooShort { min: 2, len: n });
    }
    let (w, rej) = sample_joinable_letters(surface, n, rng);
    Ok((JoinableWord::from_trusted(w), rej))
}

/// Random necklace. In exact mode the projection of a uniform joinable word
/// is accepted with probability `period / n`, which makes the result
/// uniform on necklaces.
pub fn sample_necklace<R: Rng + ?Sized>(
    surface: &Surface,
    n: usize,
    exact: bool,
    rng: &mut R,
) -> Result<Necklace> {
    if n < 2 {
        return Err(Error::TooShort { min: 2, len: n });
    }
    loop {
        let (w, _) = sample_joinable_letters(surface, n, rng);
        let nk = necklace_of_letters(&w);
        if !exact || nk.period() == n || rng.random_range(0..n) < nk.period() {
            return Ok(nk);
        }
    }
}

/// One sampled item, rendered per mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sample {
    Word(Vec<Letter>),
    Necklace(Necklace),
}

impl Sample {
    pub fn letters(&self) -> &[Letter] {
        match self {
            Sample::Word(w) => w,
            Sample::Necklace(nk) => nk.canonical(),
        }
    }
}

/// Deterministic batch sampling: item `i` comes from stream `i / CHUNK_SIZE`,
/// so output is identical for any thread count.
pub fn sample_batch(surface: &Surface, n: usize, count: usize, cfg: SamplerConfig) -> Result<Vec<Sample>> {
    let min = if cfg.mode == SampleMode::String { 1 } else { 2 };
    if n < min {
        return Err(Error::TooShort { min, len: n });
    }
    let chunks = count.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<Sample>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(cfg.seed, c as u64);
            let len = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
            (0..len)
                .map(|_| match cfg.mode {
                    SampleMode::String => Sample::Word(sample_string_letters(surface, n, &mut rng)),
                    SampleMode::Joinable => Sample::Word(sample_joinable_letters(surface, n, &mut rng).0),
                    SampleMode::NecklaceApprox => Sample::Necklace(
                        sample_necklace(surface, n, false, &mut rng).expect("n >= 2"),
                    ),
                    SampleMode::NecklaceExact => Sample::Necklace(
                        sample_necklace(surface, n, true, &mut rng).expect("n >= 2"),
                    ),
                })
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Exact comparison of the length-`(n−m)` prefix laws of uniform joinable
/// and uniform reduced words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TvBound {
    pub n: usize,
    pub m: usize,
    pub exact_tv: BigRational,
    /// `2((1+gθ^m)/(1−gθ^m) − 1)`; `None` when `gθ^m ≥ 1` makes it vacuous.
    pub bound: Option<BigRational>,
}

impl TvBound {
    pub fn holds(&self) -> bool {
        self.bound.as_ref().is_none_or(|b| self.exact_tv <= *b)
    }
}

/// The prefix total-variation bound evaluated in exact arithmetic.
pub fn tv_bound_formula(g: usize, m: usize) -> Option<BigRational> {
    let gt = BigRational::from_int(g as i64) * BigRational::ratio(1, g as i64 - 1).powi(m as u32);
    if gt >= BigRational::from_int(1) {
        return None;
    }
    let one = BigRational::from_int(1);
    Some(BigRational::from_int(2) * ((one.clone() + gt.clone()) / (one.clone() - gt) - one))
}

pub fn tv_prefix_bound(surface: &Surface, n: usize, m: usize) -> Result<TvBound> {
    if m < 1 || m >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    let g = surface.g();
    let prefix_len = n - m;
    let key = |w: &[Letter]| -> u64 {
        w[..prefix_len].iter().fold(0u64, |acc, x| acc * g as u64 + x.0 as u64)
    };
    let tallies: Vec<HashMap<u64, (u64, u64)>> = surface
        .letters()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|first| {
            let mut t: HashMap<u64, (u64, u64)> = HashMap::new();
            for w in strings_with_first(surface, n, first) {
                let e = t.entry(key(&w)).or_default();
                e.0 += 1;
                if w[n - 1] != surface.inv(w[0]) {
                    e.1 += 1;
                }
            }
            t
        })
        .collect();
    let total_s: u64 = tallies.iter().flat_map(|t| t.values()).map(|v| v.0).sum();
    let total_j: u64 = tallies.iter().flat_map(|t| t.values()).map(|v| v.1).sum();
    debug_assert_eq!(BigInt::from(total_s), count_strings(surface, n)?.into());
    debug_assert_eq!(BigInt::from(total_j), count_joinable(surface, n)?.into());
    // ½ Σ |c_J/|J| − c_S/|S|| over a common denominator |S||J|.
    let mut numer = BigInt::zero();
    for t in &tallies {
        for &(cs, cj) in t.values() {
            let a = BigInt::from(cj) * BigInt::from(total_s);
            let b = BigInt::from(cs) * BigInt::from(total_j);
            numer += (a - b).abs();
        }
    }
    let exact_tv = BigRational::new(numer, BigInt::from(2u32) * BigInt::from(total_s) * BigInt::from(total_j));
    Ok(TvBound { n, m, exact_tv, bound: tv_bound_formula(g, m) })
}
