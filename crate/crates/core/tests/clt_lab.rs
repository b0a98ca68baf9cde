use std::collections::HashMap;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use curvestat::clt::{
    chi_square_uniform, exhaustive_distribution, ks_statistic, montecarlo_distribution, sample_counts, trend_report,
    MonteCarloConfig,
};
use curvestat::words::enumerate_necklaces;
use curvestat::{count_self_intersections, Rational, Scalar, Surface};

fn torus() -> Surface {
    Surface::preset("punctured_torus").unwrap()
}

#[test]
fn exhaustive_totals_match_primitive_counts() {
    let s = torus();
    for n in 2..=9 {
        let h = exhaustive_distribution(&s, n, false).unwrap();
        let all = enumerate_necklaces(&s, n).count() as u64;
        let prim = enumerate_necklaces(&s, n).filter(|nk| nk.is_primitive()).count() as u64;
        assert_eq!(h.total, prim);
        assert_eq!(h.excluded_nonprimitive, all - prim);
        assert_eq!(h.bins.values().sum::<u64>(), h.total);
    }
}

#[test]
fn exhaustive_mean_is_inside_monte_carlo_interval() {
    let s = torus();
    let n = 10;
    let exact = exhaustive_distribution(&s, n, false).unwrap().exact_mean().to_f64_lossy();
    let counts = sample_counts(&s, n, 40_000, 3, None).unwrap();
    let m = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / m;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0);
    assert!((mean - exact).abs() < 4.0 * (var / m).sqrt(), "{mean} vs {exact}");
}

#[test]
fn exhaustive_and_sampled_histograms_agree() {
    let s = torus();
    let n = 7;
    let mut by_value: HashMap<u64, u64> = HashMap::new();
    let mut population: HashMap<u64, u64> = HashMap::new();
    for nk in enumerate_necklaces(&s, n).filter(|nk| nk.is_primitive()) {
        *population.entry(count_self_intersections(&s, nk.canonical())).or_default() += 1;
    }
    let samples = 1_000_000;
    for c in sample_counts(&s, n, samples, 17, None).unwrap() {
        *by_value.entry(c).or_default() += 1;
    }
    // Scale each cell by its population share and test the residuals.
    let total: u64 = population.values().sum();
    let mut stat = 0.0;
    for (v, &pop) in &population {
        let expected = samples as f64 * pop as f64 / total as f64;
        let seen = *by_value.get(v).unwrap_or(&0) as f64;
        stat += (seen - expected).powi(2) / expected;
    }
    assert!(by_value.keys().all(|v| population.contains_key(v)));
    let dof = population.len() as f64 - 1.0;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi2 {stat} >= {critical}");
}

#[test]
fn ks_of_normal_draws_is_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let values: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    assert!(ks_statistic(&values).unwrap() < 0.01);
    assert_eq!(ks_statistic(&[0.0; 10]).unwrap(), 0.5);
    assert_eq!(ks_statistic(&[0.0]).unwrap(), 0.5);
    assert!(ks_statistic(&[]).is_err());
}

#[test]
fn chi_square_detects_bias() {
    assert!(chi_square_uniform(&[1000, 1000, 1000, 1000]).unwrap().p_value > 0.99);
    assert!(chi_square_uniform(&[1200, 1000, 1000, 800]).unwrap().p_value < 1e-6);
}

#[test]
fn report_is_reproducible_across_thread_counts() {
    let s = torus();
    let cfg = MonteCarloConfig::new(42);
    let (h1, r1) = montecarlo_distribution(&s, 40, 3000, &cfg).unwrap();
    let (h2, r2) = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| montecarlo_distribution(&s, 40, 3000, &cfg).unwrap());
    assert_eq!(h1, h2);
    assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
}

#[test]
fn truncation_does_not_change_counts_at_small_n() {
    let s = torus();
    let full = sample_counts(&s, 12, 500, 8, None).unwrap();
    let capped = sample_counts(&s, 12, 500, 8, Some(12)).unwrap();
    assert_eq!(full, capped);
}

#[test]
fn trend_rows_have_positive_variance() {
    let s = torus();
    let rows = trend_report(&s, &[25, 50, 100], 1500, 5).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.var_over_n3 > 0.0));
    assert!(rows[2].mean_dev < rows[0].mean_dev);
    assert!(trend_report(&s, &[50, 25], 10, 0).is_err());
}

#[test]
fn histogram_mean_and_variance_are_exact() {
    let s = torus();
    let h = exhaustive_distribution(&s, 6, false).unwrap();
    let mean = h.exact_mean();
    let var = h.exact_variance();
    assert!(!var.is_zero());
    let values: Vec<Rational> = enumerate_necklaces(&s, 6)
        .filter(|nk| nk.is_primitive())
        .map(|nk| Rational::from_int(count_self_intersections(&s, nk.canonical()) as i64))
        .collect();
    let len = Rational::from_int(values.len() as i64);
    let m: Rational = values.iter().cloned().sum::<Rational>() / &len;
    assert_eq!(mean, m);
    let v: Rational = values.iter().map(|x| (x - &m) * (x - &m)).sum::<Rational>() / &len;
    assert_eq!(var, v);
    assert!(h.to_csv().starts_with("value,count\n"));
}
