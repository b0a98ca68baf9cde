//! Reduced words, joinable words and necklaces over a surface alphabet.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::{Letter, Notation, Surface};

/// Exhaustive operations refuse inputs with `(g−1)^n` above this unless forced.
pub const DEFAULT_EXHAUSTIVE_LIMIT: f64 = 1e9;

pub fn is_reduced(surface: &Surface, letters: &[Letter]) -> bool {
    letters.windows(2).all(|w| w[1] != surface.inv(w[0]))
}

/// Reduced, and the last letter is not the inverse of the first.
pub fn is_joinable(surface: &Surface, letters: &[Letter]) -> bool {
    match (letters.first(), letters.last()) {
        (Some(&f), Some(&l)) => is_reduced(surface, letters) && l != surface.inv(f),
        _ => false,
    }
}

fn check_letters(surface: &Surface, letters: &[Letter]) -> Result<()> {
    if let Some(x) = letters.iter().find(|x| x.index() >= surface.g()) {
        return Err(Error::UnknownLetter(format!("#{}", x.0)));
    }
    if let Some(i) = letters.windows(2).position(|w| w[1] == surface.inv(w[0])) {
        return Err(Error::NotReduced(i, i + 1));
    }
    Ok(())
}

/// A reduced word (string).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(surface: &Surface, letters: Vec<Letter>) -> Result<Word> {
        if letters.is_empty() {
            return Err(Error::TooShort { min: 1, len: 0 });
        }
        check_letters(surface, &letters)?;
        Ok(Word(letters))
    }

    pub fn parse(surface: &Surface, text: &str, notation: Notation) -> Result<Word> {
        Word::new(surface, surface.parse_letters(text, notation)?)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }
}

/// A reduced word whose cyclic closure is reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct JoinableWord(Vec<Letter>);

impl JoinableWord {
    pub fn new(surface: &Surface, letters: Vec<Letter>) -> Result<JoinableWord> {
        if letters.is_empty() {
            return Err(Error::TooShort { min: 1, len: 0 });
        }
        check_letters(surface, &letters)?;
        if letters[letters.len() - 1] == surface.inv(letters[0]) {
            return Err(Error::NotJoinable);
        }
        Ok(JoinableWord(letters))
    }

    pub fn parse(surface: &Surface, text: &str, notation: Notation) -> Result<JoinableWord> {
        JoinableWord::new(surface, surface.parse_letters(text, notation)?)
    }

    pub(crate) fn from_trusted(letters: Vec<Letter>) -> JoinableWord {
        JoinableWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rotation by `i`: letter `l` of the result is letter `l + i` (mod n) of `self`.
    pub fn cyclic_shift(&self, i: usize) -> JoinableWord {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let n = v.len();
            v.rotate_left(i % n);
        }
        JoinableWord(v)
    }
}

impl From<JoinableWord> for Word {
    fn from(w: JoinableWord) -> Word {
        Word(w.0)
    }
}

/// Rotation class of a joinable word, stored by its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Necklace {
    canonical: Vec<Letter>,
    period: usize,
}

impl Necklace {
    pub fn canonical(&self) -> &[Letter] {
        &self.canonical
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    /// Smallest `d` with the word invariant under rotation by `d`; divides the length.
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn is_primitive(&self) -> bool {
        self.period == self.canonical.len()
    }

    /// The joinable word obtained by cutting the necklace open before position `at`.
    pub fn unhook(&self, at: usize) -> JoinableWord {
        JoinableWord(self.canonical.clone()).cyclic_shift(at)
    }

    /// All distinct rotations (the fiber of the necklace projection).
    pub fn rotations(&self) -> impl Iterator<Item = JoinableWord> + '_ {
        (0..self.period).map(|i| self.unhook(i))
    }

    pub fn display(&self, surface: &Surface, notation: Notation) -> String {
        surface.format_word(&self.canonical, notation)
    }
}

impl fmt::Display for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.canonical.iter().map(|l| l.0.to_string()).collect();
        write!(f, "({})", ids.join(" "))
    }
}

/// Index of the lexicographically least rotation (smallest such index).
pub fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    if n <= 1 {
        return 0;
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// Smallest rotation period of a cyclic sequence.
pub fn rotation_period(s: &[Letter]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n];
    for i in 1..n {
        let mut k = fail[i - 1];
        while k > 0 && s[i] != s[k] {
            k = fail[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let p = n - fail[n - 1];
    if n.is_multiple_of(p) {
        p
    } else {
        n
    }
}

pub fn necklace_of(w: &JoinableWord) -> Necklace {
    necklace_of_letters(w.letters())
}

pub(crate) fn necklace_of_letters(letters: &[Letter]) -> Necklace {
    let start = least_rotation(letters);
    let mut canonical = letters.to_vec();
    canonical.rotate_left(start);
    let period = rotation_period(&canonical);
    Necklace { canonical, period }
}

/// Whether `letters` is the least of its rotations.
pub fn is_canonical(letters: &[Letter]) -> bool {
    least_rotation(letters) == 0
}

/// Lazy depth-first enumeration of reduced words of a fixed length in
/// lexicographic order of letter ids.
#[derive(Clone, Debug)]
pub struct StringIter<'a> {
    surface: &'a Surface,
    current: Vec<Letter>,
    started: bool,
    done: bool,
    /// Position 0 is pinned to this letter when set.
    first: Option<Letter>,
}

impl<'a> StringIter<'a> {
    fn new(surface: &'a Surface, n: usize, first: Option<Letter>) -> Self {
        let mut it = StringIter {
            surface,
            current: Vec::with_capacity(n),
            started: false,
            done: n == 0,
            first,
        };
        if n > 0 {
            let f = first.unwrap_or(Letter(0));
            it.current.push(f);
            it.done = !it.fill_from(1, n);
        }
        it
    }

    fn smallest_after(&self, prev: Letter, lower: usize) -> Option<Letter> {
        let bad = self.surface.inv(prev);
        (lower..self.surface.g())
            .map(|i| Letter(i as u8))
            .find(|&x| x != bad)
    }

    /// Completes `current[..from]` to length `n` with the smallest letters.
    fn fill_from(&mut self, from: usize, n: usize) -> bool {
        self.current.truncate(from);
        while self.current.len() < n {
            let prev = *self.current.last().expect("nonempty");
            match self.smallest_after(prev, 0) {
                Some(x) => self.current.push(x),
                None => return false,
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        let n = self.current.len();
        let floor = if self.first.is_some() { 1 } else { 0 };
        let mut pos = n;
        while pos > floor {
            pos -= 1;
            let cur = self.current[pos];
            let next = if pos == 0 {
                ((cur.index() + 1) < self.surface.g()).then(|| Letter(cur.0 + 1))
            } else {
                self.smallest_after(self.current[pos - 1], cur.index() + 1)
            };
            if let Some(x) = next {
                self.current[pos] = x;
                if self.fill_from(pos + 1, n) {
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for StringIter<'_> {
    type Item = Vec<Letter>;

    fn next(&mut self) -> Option<Vec<Letter>> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        Some(self.current.clone())
    }
}

/// All reduced words of length `n`.
pub fn enumerate_strings(surface: &Surface, n: usize) -> impl Iterator<Item = Word> + '_ {
    StringIter::new(surface, n, None).map(Word)
}

/// Raw letter vectors of all reduced words of length `n` starting with `first`.
pub fn strings_with_first(surface: &Surface, n: usize, first: Letter) -> StringIter<'_> {
    StringIter::new(surface, n, Some(first))
}

pub fn enumerate_joinable(surface: &Surface, n: usize) -> impl Iterator<Item = JoinableWord> + '_ {
    StringIter::new(surface, n, None)
        .filter(move |w| w[w.len() - 1] != surface.inv(w[0]))
        .map(JoinableWord)
}

/// Every necklace of length `n` exactly once, via canonical-representative filtering.
pub fn enumerate_necklaces(surface: &Surface, n: usize) -> impl Iterator<Item = Necklace> + '_ {
    StringIter::new(surface, n, None)
        .filter(move |w| w[w.len() - 1] != surface.inv(w[0]) && is_canonical(w))
        .map(|w| {
            let period = rotation_period(&w);
            Necklace { canonical: w, period }
        })
}

/// Necklaces whose canonical word starts with `first`; these partition the
/// full set across the letters.
pub fn necklaces_with_first(
    surface: &Surface,
    n: usize,
    first: Letter,
) -> impl Iterator<Item = Necklace> + '_ {
    StringIter::new(surface, n, Some(first))
        .filter(move |w| w[w.len() - 1] != surface.inv(w[0]) && is_canonical(w))
        .map(|w| {
            let period = rotation_period(&w);
            Necklace { canonical: w, period }
        })
}

type BigMatrix = Vec<Vec<BigUint>>;

fn mat_mul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let n = a.len();
    let mut out = vec![vec![BigUint::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

/// `(B − A)^m`, where `B` is all ones and `A` the inverse permutation matrix.
pub fn nonbacktracking_power(surface: &Surface, m: usize) -> BigMatrix {
    let g = surface.g();
    let mut base: BigMatrix = (0..g)
        .map(|i| {
            (0..g)
                .map(|j| {
                    if surface.inv(Letter(i as u8)).index() == j {
                        BigUint::zero()
                    } else {
                        BigUint::one()
                    }
                })
                .collect()
        })
        .collect();
    let mut acc: BigMatrix = (0..g)
        .map(|i| (0..g).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect())
        .collect();
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(&base, &base);
        }
    }
    acc
}

/// `|S_n| = 1ᵀ (B − A)^{n−1} 1`.
pub fn count_strings(surface: &Surface, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::TooShort { min: 1, len: 0 });
    }
    let m = nonbacktracking_power(surface, n - 1);
    Ok(m.iter().flatten().sum())
}

/// `|J_n| = trace (B − A)^n`.
pub fn count_joinable(surface: &Surface, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::TooShort { min: 1, len: 0 });
    }
    let m = nonbacktracking_power(surface, n);
    Ok((0..m.len()).map(|i| m[i][i].clone()).sum())
}

/// Necklace counts obtained by walking the enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NecklaceCensus {
    pub total: u64,
    pub primitive: u64,
    /// Sum of periods over all necklaces; equals `|J_n|`.
    pub fiber_sum: u64,
}

pub fn necklace_census(surface: &Surface, n: usize) -> NecklaceCensus {
    let mut c = NecklaceCensus::default();
    for nk in enumerate_necklaces(surface, n) {
        c.total += 1;
        c.primitive += nk.is_primitive() as u64;
        c.fiber_sum += nk.period() as u64;
    }
    c
}

/// Refuses exhaustive runs larger than [`DEFAULT_EXHAUSTIVE_LIMIT`] unless `force`.
pub fn check_feasible(surface: &Surface, n: usize, force: bool) -> Result<()> {
    let size = ((surface.g() - 1) as f64).powi(n as i32);
    if size > DEFAULT_EXHAUSTIVE_LIMIT && !force {
        return Err(Error::Infeasible(format!(
            "(g-1)^n = {}^{} ≈ {:.3e}",
            surface.g() - 1,
            n,
            size
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn torus() -> Surface {
        Surface::preset("punctured_torus").unwrap()
    }

    fn parse(s: &Surface, w: &str) -> Vec<Letter> {
        s.parse_letters(w, Notation::Upper).unwrap()
    }

    #[test]
    fn reduced_and_joinable_predicates() {
        let s = Surface::preset("genus2_one_boundary").unwrap();
        let w = parse(&s, "a b A");
        assert!(is_reduced(&s, &w) && !is_joinable(&s, &w));
        let w = parse(&s, "a a");
        assert!(is_reduced(&s, &w) && is_joinable(&s, &w));
        let w = parse(&s, "a A");
        assert!(!is_reduced(&s, &w));
        assert_eq!(JoinableWord::new(&s, parse(&s, "a b A")), Err(Error::NotJoinable));
        assert_eq!(Word::new(&s, parse(&s, "b a A")), Err(Error::NotReduced(1, 2)));
    }

    #[test]
    fn shift_identities() {
        let s = Surface::preset("genus2_one_boundary").unwrap();
        let w = JoinableWord::parse(&s, "a b C a a c B a", Notation::Upper).unwrap();
        assert_eq!(w.cyclic_shift(0), w);
        assert_eq!(w.cyclic_shift(8), w);
        for i in 0..8 {
            assert!(is_joinable(&s, w.cyclic_shift(i).letters()));
        }
        assert_eq!(w.cyclic_shift(1).letters()[0], w.letters()[1]);
    }

    #[test]
    fn small_counts_on_torus() {
        let s = torus();
        assert_eq!(enumerate_strings(&s, 2).count(), 12);
        assert_eq!(enumerate_strings(&s, 3).count(), 36);
        assert_eq!(enumerate_joinable(&s, 2).count(), 12);
        assert_eq!(count_strings(&s, 1).unwrap(), BigUint::from(4u32));
        assert_eq!(count_strings(&s, 3).unwrap(), BigUint::from(36u32));
        assert_eq!(count_joinable(&s, 2).unwrap(), BigUint::from(12u32));
        // trace(B-A) is g, not |J_2|
        assert_eq!(count_joinable(&s, 1).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn enumeration_is_sorted_and_duplicate_free() {
        let s = torus();
        let all: Vec<_> = enumerate_strings(&s, 5).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|w| is_reduced(&s, w.letters())));
    }

    #[test]
    fn sharded_enumeration_partitions() {
        let s = Surface::preset("genus2_one_boundary").unwrap();
        let total: usize = s.letters().map(|x| strings_with_first(&s, 4, x).count()).sum();
        assert_eq!(total, 8 * 7 * 7 * 7);
        let nk: usize = s.letters().map(|x| necklaces_with_first(&s, 4, x).count()).sum();
        assert_eq!(nk, enumerate_necklaces(&s, 4).count());
    }

    #[test]
    fn necklace_periods() {
        let s = Surface::preset("genus2_one_boundary").unwrap();
        let w = JoinableWord::parse(&s, "a b C a a c B a", Notation::Upper).unwrap();
        let nk = necklace_of(&w);
        assert_eq!(nk.period(), 8);
        assert!(nk.is_primitive());
        let rots: std::collections::BTreeSet<_> = (0..8).map(|i| w.cyclic_shift(i)).collect();
        assert_eq!(rots.len(), 8);
        let from_unhook: std::collections::BTreeSet<_> = nk.rotations().collect();
        assert_eq!(rots, from_unhook);

        let abab = JoinableWord::parse(&s, "a b a b", Notation::Upper).unwrap();
        assert_eq!(necklace_of(&abab).period(), 2);
        let aaa = JoinableWord::parse(&s, "a a a", Notation::Upper).unwrap();
        assert_eq!(necklace_of(&aaa).period(), 1);
    }

    #[test]
    fn fiber_sum_equals_joinable_count() {
        let s = torus();
        for n in 2..=8 {
            let c = necklace_census(&s, n);
            assert_eq!(BigUint::from(c.fiber_sum), count_joinable(&s, n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn feasibility_guard() {
        let s = torus();
        assert!(check_feasible(&s, 12, false).is_ok());
        assert!(matches!(check_feasible(&s, 40, false), Err(Error::Infeasible(_))));
        assert!(check_feasible(&s, 40, true).is_ok());
    }

    fn arb_joinable() -> impl Strategy<Value = Vec<Letter>> {
        proptest::collection::vec(0u8..8, 1..14).prop_filter_map("joinable", |raw| {
            let s = Surface::preset("genus2_one_boundary").unwrap();
            let w: Vec<Letter> = raw.into_iter().map(Letter).collect();
            is_joinable(&s, &w).then_some(w)
        })
    }

    proptest! {
        #[test]
        fn necklace_is_rotation_invariant(w in arb_joinable(), r in 0usize..20) {
            let mut rotated = w.clone();
            let n = rotated.len();
            rotated.rotate_left(r % n);
            let a = necklace_of_letters(&w);
            let b = necklace_of_letters(&rotated);
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(n % a.period(), 0);
            // canonical form is minimal among rotations
            for i in 0..n {
                let mut v = w.clone();
                v.rotate_left(i);
                prop_assert!(a.canonical() <= &v[..]);
            }
        }
    }
}
