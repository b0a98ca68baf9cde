//! Exhaustive and Monte Carlo distributions of self-intersection counts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::intersection::count_self_intersections_truncated;
use crate::markov::{sample_necklace, stream_rng, CHUNK_SIZE, RNG_ALGORITHM};
use crate::moments::limit_constants;
use crate::scalar::Scalar;
use crate::surface::Surface;
use crate::words::{check_feasible, necklaces_with_first};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramMode {
    Exhaustive,
    Montecarlo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub n: usize,
    pub surface: String,
    pub mode: HistogramMode,
    /// Exact `N` value → number of necklaces.
    pub bins: BTreeMap<u64, u64>,
    pub total: u64,
    pub seed: Option<u64>,
    /// Non-primitive necklaces left out of an exhaustive run.
    pub excluded_nonprimitive: u64,
}

impl Histogram {
    fn empty(surface: &Surface, n: usize, mode: HistogramMode, seed: Option<u64>) -> Self {
        Histogram {
            n,
            surface: surface.name().to_string(),
            mode,
            bins: BTreeMap::new(),
            total: 0,
            seed,
            excluded_nonprimitive: 0,
        }
    }

    fn add(&mut self, value: u64) {
        *self.bins.entry(value).or_default() += 1;
        self.total += 1;
    }

    fn merge(&mut self, other: Histogram) {
        for (v, c) in other.bins {
            *self.bins.entry(v).or_default() += c;
        }
        self.total += other.total;
        self.excluded_nonprimitive += other.excluded_nonprimitive;
    }

    /// Exact mean of the recorded values.
    pub fn exact_mean(&self) -> BigRational {
        let s: BigInt = self.bins.iter().map(|(&v, &c)| BigInt::from(v) * BigInt::from(c)).sum();
        BigRational::new(s, BigInt::from(self.total.max(1)))
    }

    /// Exact population variance of the recorded values.
    pub fn exact_variance(&self) -> BigRational {
        let total = BigInt::from(self.total.max(1));
        let s2: BigInt = self
            .bins
            .iter()
            .map(|(&v, &c)| BigInt::from(v) * BigInt::from(v) * BigInt::from(c))
            .sum();
        let mean = self.exact_mean();
        BigRational::new(s2, total) - mean.clone() * mean
    }

    /// `value,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for (v, c) in &self.bins {
            out.push_str(&format!("{v},{c}\n"));
        }
        out
    }
}

/// `N` over every primitive necklace of length `n`.
pub fn exhaustive_distribution(surface: &Surface, n: usize, force: bool) -> Result<Histogram> {
    if n < 2 {
        return Err(Error::TooShort { min: 2, len: n });
    }
    check_feasible(surface, n, force)?;
    let letters: Vec<_> = surface.letters().collect();
    let parts: Vec<Histogram> = letters
        .into_par_iter()
        .map(|first| {
            let mut h = Histogram::empty(surface, n, HistogramMode::Exhaustive, None);
            for nk in necklaces_with_first(surface, n, first) {
                if nk.is_primitive() {
                    h.add(count_self_intersections_truncated(surface, nk.canonical(), usize::MAX));
                } else {
                    h.excluded_nonprimitive += 1;
                }
            }
            h
        })
        .collect();
    let mut out = Histogram::empty(surface, n, HistogramMode::Exhaustive, None);
    for p in parts {
        out.merge(p);
    }
    Ok(out)
}

/// Standard normal CDF, `Φ(x) = erfc(−x/√2)/2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `values` and `Φ`.
pub fn ks_statistic(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("KS statistic of an empty sample".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Pearson χ² test of `counts` against equal expected counts.
#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareTest> {
    if counts.len() < 2 {
        return Err(Error::InvalidArgument("χ² test needs at least two cells".into()));
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = counts.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareTest { statistic, dof, p_value: 1.0 - dist.cdf(statistic) })
}

/// Acceptance thresholds for the Gaussian-limit check.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct CltThresholds {
    /// `|mean_z| ≤ mean_se · std_z / √M`.
    pub mean_se: f64,
    /// `|var_z − 1| ≤ var_rel`.
    pub var_rel: f64,
    pub ks: f64,
}

impl Default for CltThresholds {
    fn default() -> Self {
        CltThresholds { mean_se: 3.0, var_rel: 0.10, ks: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CltReport {
    pub surface: String,
    pub g: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub k_max: Option<usize>,
    pub kappa: String,
    pub sigma2: String,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub mean_over_n2: f64,
    pub var_over_n3: f64,
    pub mean_z: f64,
    pub var_z: f64,
    pub std_z: f64,
    pub ks_distance: f64,
    pub thresholds: CltThresholds,
    pub mean_ok: bool,
    pub var_ok: bool,
    pub ks_ok: bool,
    /// Fixed-width bins of the standardized values: lower edge → count.
    pub z_bin_width: f64,
    pub z_bins: Vec<(f64, u64)>,
}

impl CltReport {
    pub fn passed(&self) -> bool {
        self.mean_ok && self.var_ok && self.ks_ok
    }
}

/// Settings for a Monte Carlo run.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloConfig {
    pub seed: u64,
    /// Kernel length cap; `None` evaluates every `k ≤ n`.
    pub k_max: Option<usize>,
    pub thresholds: CltThresholds,
    pub z_bin_width: f64,
}

impl MonteCarloConfig {
    pub fn new(seed: u64) -> Self {
        MonteCarloConfig { seed, k_max: None, thresholds: CltThresholds::default(), z_bin_width: 0.25 }
    }
}

/// Self-intersection counts of `count` uniform primitive necklaces of length `n`.
///
/// Necklaces are drawn exactly uniformly; the rare non-primitive draws are
/// redrawn so every sample is in the domain of the counting formula.
pub fn sample_counts(surface: &Surface, n: usize, count: usize, seed: u64, k_max: Option<usize>) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::TooShort { min: 2, len: n });
    }
    let cap = k_max.unwrap_or(usize::MAX);
    let chunks = count.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
            let mut out = Vec::with_capacity(len);
            while out.len() < len {
                let nk = sample_necklace(surface, n, true, &mut rng).expect("n >= 2");
                if nk.is_primitive() {
                    out.push(count_self_intersections_truncated(surface, nk.canonical(), cap));
                }
            }
            out
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Sample mean and unbiased variance, accumulated in a fixed order.
fn mean_var(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

pub fn montecarlo_distribution(
    surface: &Surface,
    n: usize,
    samples: usize,
    cfg: &MonteCarloConfig,
) -> Result<(Histogram, CltReport)> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let counts = sample_counts(surface, n, samples, cfg.seed, cfg.k_max)?;
    let mut hist = Histogram::empty(surface, n, HistogramMode::Montecarlo, Some(cfg.seed));
    for &c in &counts {
        hist.add(c);
    }
    let consts = limit_constants::<BigRational>(surface, 2);
    let kappa = consts.kappa.to_f64_lossy();
    let sigma = consts.sigma2.to_f64_lossy().sqrt();
    let nf = n as f64;
    let center = kappa * nf * nf;
    let scale = sigma * nf.powf(1.5);
    let z: Vec<f64> = counts.iter().map(|&c| (c as f64 - center) / scale).collect();
    let raw: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (sample_mean, sample_variance) = mean_var(&raw);
    let (mean_z, var_z) = mean_var(&z);
    let std_z = var_z.sqrt();
    let ks_distance = ks_statistic(&z)?;

    let width = cfg.z_bin_width;
    let mut zb: BTreeMap<i64, u64> = BTreeMap::new();
    for &v in &z {
        *zb.entry((v / width).floor() as i64).or_default() += 1;
    }
    let z_bins = zb.into_iter().map(|(b, c)| (b as f64 * width, c)).collect();

    let th = cfg.thresholds;
    let report = CltReport {
        surface: surface.name().to_string(),
        g: surface.g(),
        n,
        samples,
        seed: cfg.seed,
        rng: RNG_ALGORITHM,
        k_max: cfg.k_max,
        kappa: consts.kappa.to_fraction_string(),
        sigma2: consts.sigma2.to_fraction_string(),
        sample_mean,
        sample_variance,
        mean_over_n2: sample_mean / (nf * nf),
        var_over_n3: sample_variance / (nf * nf * nf),
        mean_z,
        var_z,
        std_z,
        ks_distance,
        thresholds: th,
        mean_ok: mean_z.abs() <= th.mean_se * std_z / (samples as f64).sqrt(),
        var_ok: (var_z - 1.0).abs() <= th.var_rel,
        ks_ok: ks_distance <= th.ks,
        z_bin_width: width,
        z_bins,
    };
    Ok((hist, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendRow {
    pub n: usize,
    pub samples: usize,
    pub mean_over_n2: f64,
    pub mean_dev: f64,
    pub var_over_n3: f64,
    pub var_dev: f64,
    pub ks_distance: f64,
}

/// Convergence table over increasing `n`; run `i` uses seed `seed + i`.
pub fn trend_report(surface: &Surface, n_list: &[usize], samples: usize, seed: u64) -> Result<Vec<TrendRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n list must be strictly ascending".into()));
    }
    let consts = limit_constants::<BigRational>(surface, 2);
    let kappa = consts.kappa.to_f64_lossy();
    let sigma2 = consts.sigma2.to_f64_lossy();
    n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let cfg = MonteCarloConfig::new(seed.wrapping_add(i as u64));
            let (_, r) = montecarlo_distribution(surface, n, samples, &cfg)?;
            Ok(TrendRow {
                n,
                samples,
                mean_over_n2: r.mean_over_n2,
                mean_dev: (r.mean_over_n2 - kappa).abs(),
                var_over_n3: r.var_over_n3,
                var_dev: (r.var_over_n3 - sigma2).abs(),
                ks_distance: r.ks_distance,
            })
        })
        .collect()
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("n,samples,mean_over_n2,mean_dev,var_over_n3,var_dev,ks_distance\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.10},{:.10},{:.10},{:.10},{:.10}\n",
            r.n, r.samples, r.mean_over_n2, r.mean_dev, r.var_over_n3, r.var_dev, r.ks_distance
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn ks_point_mass_is_half() {
        assert!((ks_statistic(&[0.0; 10]).unwrap() - 0.5).abs() < 1e-12);
        assert!((ks_statistic(&[0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(ks_statistic(&[]).is_err());
    }

    #[test]
    fn ks_of_normal_sample_is_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = ks_statistic(&v).unwrap();
        assert!(d < 0.01, "{d}");
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-7);
        assert!((normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-7);
    }

    #[test]
    fn chi_square_flags_skew() {
        assert!(chi_square_uniform(&[100, 100, 100, 100]).unwrap().p_value > 0.99);
        assert!(chi_square_uniform(&[200, 100, 100, 100]).unwrap().p_value < 1e-3);
    }

    #[test]
    fn exhaustive_small() {
        let s = Surface::preset("punctured_torus").unwrap();
        let h = exhaustive_distribution(&s, 2, false).unwrap();
        assert!(h.total > 0);
        assert_eq!(h.bins.values().sum::<u64>(), h.total);
        assert!(exhaustive_distribution(&s, 30, false).is_err());
    }

    #[test]
    fn montecarlo_is_deterministic() {
        let s = Surface::preset("punctured_torus").unwrap();
        let cfg = MonteCarloConfig::new(5);
        let (h1, r1) = montecarlo_distribution(&s, 20, 2000, &cfg).unwrap();
        let (h2, r2) = montecarlo_distribution(&s, 20, 2000, &cfg).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        assert!(r1.sample_variance > 0.0);
    }
}
