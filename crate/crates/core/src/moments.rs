//! Hoeffding projections of the linking kernels and the limit constants.
//!
//! Conditioned on one argument, the expected kernel value is a quadratic
//! function of two gaps of that argument. Under the stationary chain the
//! gaps are i.i.d. uniform on `{0, …, g−2}`, which reduces every mean and
//! variance to moments of a discrete uniform variable.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::surface::{Letter, Surface};
use crate::words::is_reduced;

/// `t(a, b) = a(g−2−b) + b(g−2−a)`.
pub fn t(a: i64, b: i64, g: i64) -> Result<i64> {
    let top = g - 2;
    for v in [a, b] {
        if !(0..=top).contains(&v) {
            return Err(Error::GapOutOfRange(v));
        }
    }
    Ok(t_unchecked(a, b, g))
}

#[inline]
pub(crate) fn t_unchecked(a: i64, b: i64, g: i64) -> i64 {
    a * (g - 2 - b) + b * (g - 2 - a)
}

/// Gaps `j_i = gap(x_i, x_{i+1})` of a reduced word (length `len − 1`).
pub fn gap_vector(surface: &Surface, prefix: &[Letter]) -> Result<Vec<usize>> {
    if !is_reduced(surface, prefix) {
        return Err(Error::InvalidArgument("gap vector of a non-reduced word".into()));
    }
    prefix.windows(2).map(|w| surface.gap(w[0], w[1])).collect()
}

/// Gaps of a cyclic word, including the wrap-around pair (length `len`).
pub fn cyclic_gap_vector(surface: &Surface, letters: &[Letter]) -> Result<Vec<usize>> {
    let n = letters.len();
    (0..n).map(|i| surface.gap(letters[i], letters[(i + 1) % n])).collect()
}

fn check_prefix(surface: &Surface, prefix: &[Letter], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::KernelIndex(k));
    }
    if prefix.len() < k {
        return Err(Error::PrefixTooShort { k, left: prefix.len(), right: prefix.len() });
    }
    if !is_reduced(surface, &prefix[..k]) {
        return Err(Error::InvalidArgument("prefix must be reduced".into()));
    }
    Ok(())
}

/// `U_k(x) = t(j_1, j_{k−1}) / (g (g−1)^{k−1})`.
pub fn hoeffding_u<T: Scalar>(surface: &Surface, prefix: &[Letter], k: usize) -> Result<T> {
    check_prefix(surface, prefix, k)?;
    let g = surface.g() as i64;
    let j1 = surface.gap_unchecked(prefix[0], prefix[1]) as i64;
    let jl = surface.gap_unchecked(prefix[k - 2], prefix[k - 1]) as i64;
    let num = T::from_int(t_unchecked(j1, jl, g));
    Ok(num / (T::from_int(g) * T::from_int(g - 1).powi(k as u32 - 1)))
}

/// `V_2 = 0`, `V_k = U_k` for `k ≥ 3`.
pub fn hoeffding_v<T: Scalar>(surface: &Surface, prefix: &[Letter], k: usize) -> Result<T> {
    let u = hoeffding_u::<T>(surface, prefix, k)?;
    Ok(if k == 2 { T::zero() } else { u })
}

/// `S_K = U_2 + Σ_{k=3}^{K} 2 U_k`.
pub fn s_k<T: Scalar>(surface: &Surface, prefix: &[Letter], big_k: usize) -> Result<T> {
    check_prefix(surface, prefix, big_k.max(2))?;
    let mut acc = hoeffding_u::<T>(surface, prefix, 2)?;
    for k in 3..=big_k {
        acc = acc + T::from_int(2) * hoeffding_u::<T>(surface, prefix, k)?;
    }
    Ok(acc)
}

/// Moments of a gap uniform on `{0, …, g−2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapMoments<T> {
    pub ej: T,
    pub ej2: T,
    pub ej3: T,
    pub ej4: T,
    /// `E[J J']` for two distinct gaps.
    pub ejj: T,
}

pub fn gap_moments<T: Scalar>(g: usize) -> GapMoments<T> {
    let g = g as i64;
    let f = T::from_int;
    GapMoments {
        ej: T::ratio(g - 2, 2),
        ej2: f((g - 2) * (2 * g - 3)) / f(6),
        ej3: f((g - 2) * (g - 2) * (g - 1)) / f(4),
        ej4: f((g - 2) * (2 * g - 3) * (3 * g * g - 9 * g + 5)) / f(30),
        ejj: f((g - 2) * (g - 2)) / f(4),
    }
}

/// `E u_2 = (g−2)(g−3) / (3g(g−1))`.
pub fn mean_u2<T: Scalar>(g: usize) -> T {
    let g = g as i64;
    T::ratio((g - 2) * (g - 3), 3 * g * (g - 1))
}

/// `E u_k = (g−2)² / (2g(g−1)^{k−1})` for `k ≥ 3`.
pub fn mean_uk<T: Scalar>(g: usize, k: usize) -> T {
    let g = g as i64;
    T::from_int((g - 2) * (g - 2)) / (T::from_int(2 * g) * T::from_int(g - 1).powi(k as u32 - 1))
}

/// `E S_∞ = (g−2) / (3(g−1))`.
pub fn mean_s_inf<T: Scalar>(g: usize) -> T {
    let g = g as i64;
    T::ratio(g - 2, 3 * (g - 1))
}

/// `E S_K` from the term-wise means.
pub fn mean_s_k<T: Scalar>(g: usize, big_k: usize) -> T {
    let mut acc = mean_u2::<T>(g);
    for k in 3..=big_k {
        acc = acc + T::from_int(2) * mean_uk::<T>(g, k);
    }
    acc
}

/// `Var U_2 = (g−2)(g−3)(g+1) / (45 g (g−1)²)`.
pub fn var_u2<T: Scalar>(g: usize) -> T {
    let g = g as i64;
    T::ratio((g - 2) * (g - 3) * (g + 1), 45 * g * (g - 1) * (g - 1))
}

/// `Var U_k = (g−2)² / (36 (g−1)^{2k−2})` for `k ≥ 3`.
pub fn var_uk<T: Scalar>(g: usize, k: usize) -> T {
    let g = g as i64;
    T::from_int((g - 2) * (g - 2)) / (T::from_int(36) * T::from_int(g - 1).powi(2 * k as u32 - 2))
}

/// `Σ_{k≥3} Var(2 U_k)` as a geometric series with ratio `(g−1)^{−2}`.
pub fn var_tail<T: Scalar>(g: usize) -> T {
    let first = T::from_int(4) * var_uk::<T>(g, 3);
    let ratio = T::one() / T::from_int(g as i64 - 1).powi(2);
    first / (T::one() - ratio)
}

/// `(g−2)(g²−2g+2) / (45 g (g−1)²)`.
pub fn sigma2_g_form<T: Scalar>(g: usize) -> T {
    let g = g as i64;
    T::ratio((g - 2) * (g * g - 2 * g + 2), 45 * g * (g - 1) * (g - 1))
}

/// `2χ(2χ²−2χ+1) / (45 (2χ−1)² (χ−1))`.
pub fn sigma2_chi_form<T: Scalar>(chi: i64) -> T {
    T::ratio(
        2 * chi * (2 * chi * chi - 2 * chi + 1),
        45 * (2 * chi - 1) * (2 * chi - 1) * (chi - 1),
    )
}

/// `χ / (3(2χ−1))`.
pub fn kappa_chi_form<T: Scalar>(chi: i64) -> T {
    T::ratio(chi, 3 * (2 * chi - 1))
}

/// Exact (or floating) limit constants for one surface.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport<T> {
    pub g: usize,
    pub chi: i64,
    pub kappa: T,
    /// `E S_∞ / 2`.
    pub kappa_from_mean: T,
    pub sigma2: T,
    pub sigma2_g_form: T,
    pub sigma2_chi_form: T,
    /// `Var U_2 + Σ Var(2U_k)` with the tail summed in closed form.
    pub sigma2_from_terms: T,
    /// Same sum truncated at `k = partial_k`.
    pub sigma2_partial: T,
    pub partial_k: usize,
    /// `(K, E S_K)` for `K = 2..=table_k`.
    pub s_k_means: Vec<(usize, T)>,
    /// `(k, Var of the k-th summand of S_∞)`.
    pub var_terms: Vec<(usize, T)>,
    pub gap_moments: GapMoments<T>,
}

impl<T: Scalar> MomentReport<T> {
    /// Every pair of routes to the same constant agrees.
    pub fn consistent(&self) -> bool {
        self.kappa.agrees_with(&self.kappa_from_mean)
            && self.sigma2_g_form.agrees_with(&self.sigma2_chi_form)
            && self.sigma2_g_form.agrees_with(&self.sigma2_from_terms)
    }
}

pub fn limit_constants<T: Scalar>(surface: &Surface, table_k: usize) -> MomentReport<T> {
    limit_constants_for_g(surface.g(), table_k)
}

pub fn limit_constants_for_g<T: Scalar>(g: usize, table_k: usize) -> MomentReport<T> {
    let chi = 1 - (g / 2) as i64;
    let table_k = table_k.max(2);
    let kappa = kappa_chi_form::<T>(chi);
    let kappa_from_mean = mean_s_inf::<T>(g) / T::from_int(2);
    let sigma2_g = sigma2_g_form::<T>(g);
    let sigma2_chi = sigma2_chi_form::<T>(chi);
    let from_terms = var_u2::<T>(g) + var_tail::<T>(g);
    let mut var_terms = vec![(2, var_u2::<T>(g))];
    for k in 3..=table_k {
        var_terms.push((k, T::from_int(4) * var_uk::<T>(g, k)));
    }
    let partial_k = 50;
    let mut partial = var_u2::<T>(g);
    for k in 3..=partial_k {
        partial = partial + T::from_int(4) * var_uk::<T>(g, k);
    }
    let s_k_means = (2..=table_k).map(|k| (k, mean_s_k::<T>(g, k))).collect();
    MomentReport {
        g,
        chi,
        kappa,
        kappa_from_mean,
        sigma2: sigma2_chi.clone(),
        sigma2_g_form: sigma2_g,
        sigma2_chi_form: sigma2_chi,
        sigma2_from_terms: from_terms,
        sigma2_partial: partial,
        partial_k,
        s_k_means,
        var_terms,
        gap_moments: gap_moments::<T>(g),
    }
}

/// One covariance `Cov(U_k(τ^i X), U_{k'}(τ^{i'} X))`.
#[derive(Clone, Debug, Serialize)]
pub struct CovEntry {
    pub i: usize,
    pub k: usize,
    pub i2: usize,
    pub k2: usize,
    #[serde(serialize_with = "crate::report::serialize_exact")]
    pub cov: BigRational,
}

/// A computed moment next to its closed form.
#[derive(Clone, Debug, Serialize)]
pub struct CaseCheck {
    pub label: &'static str,
    #[serde(serialize_with = "crate::report::serialize_exact")]
    pub computed: BigRational,
    #[serde(serialize_with = "crate::report::serialize_exact")]
    pub closed_form: BigRational,
}

impl CaseCheck {
    pub fn matches(&self) -> bool {
        self.computed == self.closed_form
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UncorrelatedReport {
    pub g: usize,
    pub n_max: usize,
    pub k_max: usize,
    pub entries: Vec<CovEntry>,
    pub cases: Vec<CaseCheck>,
    /// Off-diagonal entries that are not zero.
    pub nonzero_off_diagonal: usize,
    /// Diagonal entries disagreeing with the closed-form variance.
    pub diagonal_mismatches: usize,
}

impl UncorrelatedReport {
    pub fn passed(&self) -> bool {
        self.nonzero_off_diagonal == 0
            && self.diagonal_mismatches == 0
            && self.cases.iter().all(CaseCheck::matches)
    }
}

/// Exhaustive expectation of `f` over independent uniform gaps at the listed indices.
fn gap_expectation(g: usize, indices: &[usize], f: impl Fn(&dyn Fn(usize) -> i64) -> i64) -> BigRational {
    let mut distinct: Vec<usize> = indices.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let vals = (g - 1) as i64;
    let cells = vals.pow(distinct.len() as u32);
    let mut total: i128 = 0;
    let mut assign = vec![0i64; distinct.len()];
    for code in 0..cells {
        let mut c = code;
        for a in assign.iter_mut() {
            *a = c % vals;
            c /= vals;
        }
        let lookup = |idx: usize| {
            let p = distinct.binary_search(&idx).expect("index listed");
            assign[p]
        };
        total += f(&lookup) as i128;
    }
    BigRational::new(BigInt::from(total), BigInt::from(cells))
}

/// Covariances of the scaled projections `U_k(τ^i X)` for `i ≤ n_max`,
/// `2 ≤ k ≤ k_max`, computed by exhaustive expectation over the gaps they
/// depend on, plus the individual moment identities behind them.
pub fn verify_uncorrelated(g: usize, n_max: usize, k_max: usize) -> UncorrelatedReport {
    let gi = g as i64;
    // U_k(τ^i X) = t(J_{i+1}, J_{i+k−1}) / (g (g−1)^{k−1})
    let scale = |k: usize| -> BigRational {
        BigRational::from_int(1) / (BigRational::from_int(gi) * BigRational::from_int(gi - 1).powi(k as u32 - 1))
    };
    let terms: Vec<(usize, usize)> = (0..=n_max)
        .flat_map(|i| (2..=k_max).map(move |k| (i, k)))
        .collect();
    let mut entries = Vec::new();
    let mut nonzero_off = 0;
    let mut diag_bad = 0;
    for &(i, k) in &terms {
        for &(i2, k2) in &terms {
            let (a, b) = (i + 1, i + k - 1);
            let (c, d) = (i2 + 1, i2 + k2 - 1);
            let idx = [a, b, c, d];
            let exy = gap_expectation(g, &idx, |j| {
                t_unchecked(j(a), j(b), gi) * t_unchecked(j(c), j(d), gi)
            });
            let ex = gap_expectation(g, &[a, b], |j| t_unchecked(j(a), j(b), gi));
            let ey = gap_expectation(g, &[c, d], |j| t_unchecked(j(c), j(d), gi));
            let cov = (exy - ex * ey) * scale(k) * scale(k2);
            if (i, k) == (i2, k2) {
                let expected = if k == 2 { var_u2::<BigRational>(g) } else { var_uk::<BigRational>(g, k) };
                if cov != expected {
                    diag_bad += 1;
                }
            } else if cov != BigRational::from_int(0) {
                nonzero_off += 1;
            }
            entries.push(CovEntry { i, k, i2, k2, cov });
        }
    }

    let tt = move |x: i64, y: i64| t_unchecked(x, y, gi);
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let cases = vec![
        CaseCheck {
            label: "case0: E t(J1,J2) t(J3,J4) = E t(J1,J2) E t(J3,J4)",
            computed: gap_expectation(g, &[1, 2, 3, 4], |j| tt(j(1), j(2)) * tt(j(3), j(4))),
            closed_form: gap_expectation(g, &[1, 2], |j| tt(j(1), j(2)))
                * gap_expectation(g, &[3, 4], |j| tt(j(3), j(4))),
        },
        CaseCheck {
            label: "case1: E t(J1,J2) t(J1,J3) = (g-2)^4/4",
            computed: gap_expectation(g, &[1, 2, 3], |j| tt(j(1), j(2)) * tt(j(1), j(3))),
            closed_form: r((gi - 2).pow(4), 4),
        },
        CaseCheck {
            label: "case2: E t(J1,J1) t(J1,J2) = (g-2)^3 (g-3)/6",
            computed: gap_expectation(g, &[1, 2], |j| tt(j(1), j(1)) * tt(j(1), j(2))),
            closed_form: r((gi - 2).pow(3) * (gi - 3), 6),
        },
        CaseCheck {
            label: "case3: Var t(J1,J2) = g^2 (g-2)^2/36",
            computed: gap_expectation(g, &[1, 2], |j| tt(j(1), j(2)).pow(2))
                - gap_expectation(g, &[1, 2], |j| tt(j(1), j(2))).powi(2),
            closed_form: r(gi * gi * (gi - 2).pow(2), 36),
        },
        CaseCheck {
            label: "case4: Var t(J1,J1) = g(g-2)(g-3)(g+1)/45",
            computed: gap_expectation(g, &[1], |j| tt(j(1), j(1)).pow(2))
                - gap_expectation(g, &[1], |j| tt(j(1), j(1))).powi(2),
            closed_form: r(gi * (gi - 2) * (gi - 3) * (gi + 1), 45),
        },
    ];
    UncorrelatedReport {
        g,
        n_max,
        k_max,
        entries,
        cases,
        nonzero_off_diagonal: nonzero_off,
        diagonal_mismatches: diag_bad,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Notation;
    use num_rational::Rational64;

    #[test]
    fn t_examples() {
        assert_eq!(t(0, 0, 4).unwrap(), 0);
        assert_eq!(t(1, 1, 4).unwrap(), 2);
        assert_eq!(t(2, 0, 8).unwrap(), t(0, 2, 8).unwrap());
        assert!(matches!(t(3, 0, 4), Err(Error::GapOutOfRange(3))));
        assert!(t(-1, 0, 4).is_err());
    }

    #[test]
    fn gap_moments_at_four() {
        let m = gap_moments::<BigRational>(4);
        assert_eq!(m.ej, BigRational::from_int(1));
        assert_eq!(m.ej2, BigRational::ratio(5, 3));
        assert_eq!(m.ejj, m.ej.clone() * m.ej.clone());
    }

    #[test]
    fn gap_moments_match_direct_sums() {
        for g in [4usize, 6, 8, 10] {
            let m = gap_moments::<Rational64>(g);
            let n = (g - 1) as i64;
            let direct = |p: u32| Rational64::new((0..n).map(|j| j.pow(p)).sum::<i64>(), n);
            assert_eq!(m.ej, direct(1));
            assert_eq!(m.ej2, direct(2));
            assert_eq!(m.ej3, direct(3));
            assert_eq!(m.ej4, direct(4), "g = {g}");
        }
    }

    #[test]
    fn torus_constants() {
        let r = limit_constants_for_g::<BigRational>(4, 10);
        assert_eq!(r.kappa, BigRational::ratio(1, 9));
        assert_eq!(r.sigma2, BigRational::ratio(1, 81));
        assert!(r.consistent());
        assert_eq!(mean_u2::<BigRational>(4), BigRational::ratio(1, 18));
        assert_eq!(mean_s_inf::<BigRational>(4), BigRational::ratio(2, 9));
        let f = limit_constants_for_g::<f64>(4, 10);
        assert!(f.consistent());
        assert!((f.kappa - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn partial_sums_approach_tail() {
        for g in [4usize, 6, 8] {
            let r = limit_constants_for_g::<BigRational>(g, 4);
            assert!(r.sigma2_partial < r.sigma2_from_terms);
            let gap = r.sigma2_from_terms.clone() - r.sigma2_partial.clone();
            assert!(gap < BigRational::new(1.into(), BigInt::from(10).pow(40)));
        }
    }

    #[test]
    fn s_k_is_monotone_and_starts_at_u2() {
        let s = Surface::preset("genus2_one_boundary").unwrap();
        let w = s.parse_letters("a b C a a c B a", Notation::Upper).unwrap();
        let s2: BigRational = s_k(&s, &w, 2).unwrap();
        assert_eq!(s2, hoeffding_u::<BigRational>(&s, &w, 2).unwrap());
        let mut prev = s2;
        for k in 3..=8 {
            let cur: BigRational = s_k(&s, &w, k).unwrap();
            assert!(cur >= prev);
            prev = cur;
        }
        assert!(hoeffding_u::<BigRational>(&s, &w, 9).is_err());
        assert_eq!(hoeffding_v::<BigRational>(&s, &w, 2).unwrap(), BigRational::from_int(0));
    }

    #[test]
    fn zero_gap_gives_zero_projection() {
        let s = Surface::preset("punctured_torus").unwrap();
        // gap(a, B) = 0 on O = a b A B
        let w = s.parse_letters("a B", Notation::Upper).unwrap();
        assert_eq!(hoeffding_u::<BigRational>(&s, &w, 2).unwrap(), BigRational::from_int(0));
    }

    #[test]
    fn small_uncorrelated_ledger() {
        let r = verify_uncorrelated(6, 2, 4);
        assert!(r.passed(), "{:?}", r.cases);
    }
}
