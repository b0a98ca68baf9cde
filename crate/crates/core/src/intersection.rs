//! Self-intersection numbers of primitive necklaces.
//!
//! `N(α)` is the number of unordered pairs of distinct rotations of an
//! unhooked representative, together with a length `k`, on which one of the
//! linking kernels `u_k` / `v_k` fires. Two evaluators are provided: a
//! definitional triple sum over `(i, j, k)` and a fast path that uses the
//! fact that, for a fixed ordered pair, at most one `k` can satisfy the
//! common-middle condition of each kernel.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::{Letter, Surface};
use crate::words::{is_reduced, rotation_period, Necklace};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    U,
    V,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::U => "u",
            KernelKind::V => "v",
        }
    }
}

/// One counted linking: kernel `kind` of length `k` fires on rotations `i < j`
/// (0-based offsets into the unhooked word).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub kind: KernelKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionResult {
    pub total: u64,
    /// Sorted by `(i, j, k, kind)`.
    pub witnesses: Vec<Witness>,
    /// Set when the input was not primitive and evaluation was forced.
    pub forced_nonprimitive: bool,
}

impl IntersectionResult {
    /// Number of witnesses of the given kind and length.
    pub fn count(&self, kind: KernelKind, k: usize) -> usize {
        self.witnesses.iter().filter(|w| w.kind == kind && w.k == k).count()
    }
}

fn check_prefixes(surface: &Surface, w: &[Letter], w2: &[Letter], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::KernelIndex(k));
    }
    if w.len() < k || w2.len() < k {
        return Err(Error::PrefixTooShort { k, left: w.len(), right: w2.len() });
    }
    for x in w[..k].iter().chain(&w2[..k]) {
        if x.index() >= surface.g() {
            return Err(Error::UnknownLetter(format!("#{}", x.0)));
        }
    }
    if !is_reduced(surface, &w[..k]) || !is_reduced(surface, &w2[..k]) {
        return Err(Error::InvalidArgument("kernel arguments must be reduced".into()));
    }
    Ok(())
}

/// The `u_k` kernel; reads only the first `k` letters of each argument.
pub fn u_k(surface: &Surface, w: &[Letter], w2: &[Letter], k: usize) -> Result<u8> {
    check_prefixes(surface, w, w2, k)?;
    Ok(u_k_unchecked(surface, w, w2, k))
}

pub(crate) fn u_k_unchecked(surface: &Surface, c: &[Letter], d: &[Letter], k: usize) -> u8 {
    if c[0] == d[0] || c[k - 1] == d[k - 1] || c[1..k - 1] != d[1..k - 1] {
        return 0;
    }
    let inv = |x| surface.inv(x);
    if k == 2 {
        let o = surface.cyclic_order(&[inv(c[0]), inv(d[0]), c[1], d[1]]);
        (o != 0) as u8
    } else {
        let head = [inv(c[0]), inv(d[0]), c[1]];
        let tail = [c[k - 1], d[k - 1], inv(c[k - 2])];
        debug_assert!(distinct3(&head) && distinct3(&tail), "degenerate u_k triple");
        (surface.cyclic_order(&head) == surface.cyclic_order(&tail)) as u8
    }
}

fn distinct3(t: &[Letter; 3]) -> bool {
    t[0] != t[1] && t[1] != t[2] && t[0] != t[2]
}

/// The `v_k` kernel: `u_k` against the reversed, inverted second argument;
/// identically zero for `k = 2`.
pub fn v_k(surface: &Surface, w: &[Letter], w2: &[Letter], k: usize) -> Result<u8> {
    check_prefixes(surface, w, w2, k)?;
    Ok(v_k_unchecked(surface, w, w2, k))
}

pub(crate) fn v_k_unchecked(surface: &Surface, c: &[Letter], d: &[Letter], k: usize) -> u8 {
    if k == 2 {
        return 0;
    }
    let reversed: Vec<Letter> = d[..k].iter().rev().map(|&x| surface.inv(x)).collect();
    u_k_unchecked(surface, &c[..k], &reversed, k)
}

/// `Σ_{k=2}^{n} (u_k + v_k)(w, w2)` for two words of equal length `n`.
pub fn pair_kernel(surface: &Surface, w: &[Letter], w2: &[Letter]) -> Result<u32> {
    if w.len() != w2.len() {
        return Err(Error::LengthMismatch(w.len(), w2.len()));
    }
    let n = w.len();
    if n < 2 {
        return Err(Error::TooShort { min: 2, len: n });
    }
    check_prefixes(surface, w, w2, n)?;
    Ok((2..=n)
        .map(|k| (u_k_unchecked(surface, w, w2, k) + v_k_unchecked(surface, w, w2, k)) as u32)
        .sum())
}

fn rotation(letters: &[Letter], i: usize) -> Vec<Letter> {
    let mut v = letters.to_vec();
    v.rotate_left(i % letters.len());
    v
}

fn validate_cyclic(surface: &Surface, letters: &[Letter], force_nonprimitive: bool) -> Result<bool> {
    let n = letters.len();
    if n < 2 {
        return Err(Error::TooShort { min: 2, len: n });
    }
    if let Some(x) = letters.iter().find(|x| x.index() >= surface.g()) {
        return Err(Error::UnknownLetter(format!("#{}", x.0)));
    }
    for i in 0..n {
        if letters[(i + 1) % n] == surface.inv(letters[i]) {
            return Err(if i + 1 == n { Error::NotJoinable } else { Error::NotReduced(i, i + 1) });
        }
    }
    let period = rotation_period(letters);
    if period < n && !force_nonprimitive {
        return Err(Error::NonPrimitive { period, len: n });
    }
    Ok(period < n)
}

/// Direct evaluation of the triple sum over `i < j` and `k = 2..=n`,
/// materializing every rotation.
pub fn self_intersection_definitional(
    surface: &Surface,
    letters: &[Letter],
    force_nonprimitive: bool,
) -> Result<IntersectionResult> {
    let forced = validate_cyclic(surface, letters, force_nonprimitive)?;
    let n = letters.len();
    let rotations: Vec<Vec<Letter>> = (0..n).map(|i| rotation(letters, i)).collect();
    let mut witnesses = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 2..=n {
                if u_k_unchecked(surface, &rotations[i], &rotations[j], k) == 1 {
                    witnesses.push(Witness { i, j, k, kind: KernelKind::U });
                }
                if v_k_unchecked(surface, &rotations[i], &rotations[j], k) == 1 {
                    witnesses.push(Witness { i, j, k, kind: KernelKind::V });
                }
            }
        }
    }
    witnesses.sort();
    Ok(IntersectionResult { total: witnesses.len() as u64, witnesses, forced_nonprimitive: forced })
}

/// Fast evaluator over a cyclic word, optionally capping kernel length at
/// `k_max` (values `>= n` mean no truncation). Calls `sink` for every witness.
fn scan<F: FnMut(Witness)>(surface: &Surface, a: &[Letter], k_max: usize, mut sink: F) {
    let n = a.len();
    let cap = k_max.min(n);
    if cap < 2 {
        return;
    }
    let mut ext = Vec::with_capacity(2 * n);
    ext.extend_from_slice(a);
    ext.extend_from_slice(a);
    let inv = |x: Letter| surface.inv(x);

    // u-kernels over unordered pairs r < s. The kernel length is pinned by
    // the first mismatch after position 1.
    for r in 0..n {
        for s in r + 1..n {
            if ext[r] == ext[s] {
                continue;
            }
            let mut len = 0;
            while len < cap - 2 && ext[r + 1 + len] == ext[s + 1 + len] {
                len += 1;
            }
            let k = len + 2;
            let (ck, dk) = (ext[r + k - 1], ext[s + k - 1]);
            if ck == dk {
                continue;
            }
            let fires = if k == 2 {
                surface.cyclic_order(&[inv(ext[r]), inv(ext[s]), ext[r + 1], ext[s + 1]]) != 0
            } else {
                surface.cyclic_order(&[inv(ext[r]), inv(ext[s]), ext[r + 1]])
                    == surface.cyclic_order(&[ck, dk, inv(ext[r + k - 2])])
            };
            if fires {
                sink(Witness { i: r, j: s, k, kind: KernelKind::U });
            }
        }
    }

    // v-kernels. For an ordered pair of rotations (r, s) and length k, the
    // reversed-inverted second argument reads inv(a) backwards from
    // q = s + k - 1, so iterate over (r, q) and recover (s, k).
    for r in 0..n {
        for q in 0..n {
            // ext index of position q - t for t in [0, n): q + n - t
            let e1 = inv(ext[q + n]);
            if ext[r] == e1 {
                continue;
            }
            let mut len = 0;
            while len < cap - 2 && ext[r + 1 + len] == inv(ext[q + n - 1 - len]) {
                len += 1;
            }
            let k = len + 2;
            if k < 3 {
                continue;
            }
            let ck = ext[r + k - 1];
            let ek = inv(ext[q + n + 1 - k]);
            if ck == ek {
                continue;
            }
            let s = (q + n + 1 - k) % n;
            if s <= r {
                continue;
            }
            let head = surface.cyclic_order(&[inv(ext[r]), inv(e1), ext[r + 1]]);
            let tail = surface.cyclic_order(&[ck, ek, inv(ext[r + k - 2])]);
            if head == tail {
                sink(Witness { i: r, j: s, k, kind: KernelKind::V });
            }
        }
    }
}

/// `N(α)` for a cyclic word given by any unhooked representative, with witnesses.
pub fn self_intersection_of_word(
    surface: &Surface,
    letters: &[Letter],
    force_nonprimitive: bool,
) -> Result<IntersectionResult> {
    let forced = validate_cyclic(surface, letters, force_nonprimitive)?;
    let mut witnesses = Vec::new();
    scan(surface, letters, usize::MAX, |w| witnesses.push(w));
    witnesses.sort();
    Ok(IntersectionResult { total: witnesses.len() as u64, witnesses, forced_nonprimitive: forced })
}

/// `N(α)` for a necklace, unhooked at its canonical position.
pub fn self_intersection(
    surface: &Surface,
    necklace: &Necklace,
    force_nonprimitive: bool,
) -> Result<IntersectionResult> {
    self_intersection_of_word(surface, necklace.canonical(), force_nonprimitive)
}

/// Count-only fast path for trusted joinable input (no validation, no witnesses).
pub fn count_self_intersections(surface: &Surface, letters: &[Letter]) -> u64 {
    count_self_intersections_truncated(surface, letters, usize::MAX)
}

/// As [`count_self_intersections`], ignoring kernels with `k > k_max`.
pub fn count_self_intersections_truncated(surface: &Surface, letters: &[Letter], k_max: usize) -> u64 {
    let mut total = 0u64;
    scan(surface, letters, k_max, |_| total += 1);
    total
}

/// Rotation pairs on which `Σ_k (u_k + v_k)` exceeds one.
pub fn pair_kernel_excess(surface: &Surface, letters: &[Letter]) -> Vec<(usize, usize, u32)> {
    let n = letters.len();
    let rotations: Vec<Vec<Letter>> = (0..n).map(|i| rotation(letters, i)).collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let h: u32 = (2..=n)
                .map(|k| {
                    (u_k_unchecked(surface, &rotations[i], &rotations[j], k)
                        + v_k_unchecked(surface, &rotations[i], &rotations[j], k))
                        as u32
                })
                .sum();
            if h > 1 {
                out.push((i, j, h));
            }
        }
    }
    out
}
