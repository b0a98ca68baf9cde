use std::collections::HashMap;

use num_bigint::BigUint;
use proptest::prelude::*;

use curvestat::clt::chi_square_uniform;
use curvestat::markov::{sample_string_letters, stream_rng};
use curvestat::words::{
    check_feasible, count_joinable, count_strings, enumerate_joinable, enumerate_necklaces, enumerate_strings,
    is_joinable, least_rotation, necklace_census, rotation_period,
};
use curvestat::{Letter, Surface};

fn torus() -> Surface {
    Surface::preset("punctured_torus").unwrap()
}

#[test]
fn fiber_sum_equals_joinable_count() {
    for (s, n_max) in [(torus(), 9usize), (Surface::preset("genus2_one_boundary").unwrap(), 5)] {
        for n in 1..=n_max {
            let c = necklace_census(&s, n);
            assert_eq!(BigUint::from(c.fiber_sum), count_joinable(&s, n).unwrap());
        }
    }
}

#[test]
fn enumeration_is_sorted_and_unique() {
    let s = torus();
    let words: Vec<Vec<Letter>> = enumerate_strings(&s, 5).map(|w| w.into_letters()).collect();
    assert!(words.windows(2).all(|p| p[0] < p[1]));
    let joinable: Vec<_> = enumerate_joinable(&s, 5).collect();
    assert!(joinable.iter().all(|w| is_joinable(&s, w.letters())));
    let nks: Vec<_> = enumerate_necklaces(&s, 6).collect();
    assert!(nks.windows(2).all(|p| p[0].canonical() < p[1].canonical()));
}

#[test]
fn non_primitive_fraction_shrinks() {
    // Periodic words are at most Σ_{d | n, d < n} |J_d| ≤ n (g−1)^{n/2} · const.
    let s = torus();
    let mut prev = 1.0;
    for n in [4usize, 6, 8, 10, 12] {
        let c = necklace_census(&s, n);
        let frac = (c.total - c.primitive) as f64 / c.total as f64;
        let envelope = 4.0 * n as f64 * 3f64.powf(-(n as f64) / 2.0);
        assert!(frac <= envelope, "n = {n}: {frac} > {envelope}");
        assert!(frac < prev);
        prev = frac;
    }
}

#[test]
fn string_sampler_is_uniform_on_short_words() {
    let s = torus();
    let index: HashMap<Vec<Letter>, usize> = enumerate_strings(&s, 3)
        .enumerate()
        .map(|(i, w)| (w.into_letters(), i))
        .collect();
    assert_eq!(index.len(), 36);
    let mut rng = stream_rng(7, 0);
    let mut counts = vec![0u64; index.len()];
    for _ in 0..200_000 {
        counts[index[&sample_string_letters(&s, 3, &mut rng)]] += 1;
    }
    let t = chi_square_uniform(&counts).unwrap();
    assert!(t.p_value > 0.001, "{t:?}");
}

#[test]
fn infeasible_sizes_are_refused() {
    let s = torus();
    assert!(check_feasible(&s, 12, false).is_ok());
    assert!(check_feasible(&s, 40, false).is_err());
    assert!(check_feasible(&s, 40, true).is_ok());
    assert!(count_strings(&s, 40).is_ok());
}

fn joinable_word(g: u8) -> impl Strategy<Value = Vec<Letter>> {
    proptest::collection::vec(0u8..g, 2..16).prop_filter_map("joinable", move |raw| {
        let s = Surface::preset(if g == 4 { "punctured_torus" } else { "genus2_one_boundary" }).ok()?;
        let w: Vec<Letter> = raw.into_iter().map(Letter).collect();
        is_joinable(&s, &w).then_some(w)
    })
}

proptest! {
    #[test]
    fn canonical_form_is_least_rotation(w in joinable_word(8)) {
        let n = w.len();
        let best = (0..n).map(|i| { let mut r = w.clone(); r.rotate_left(i); r }).min().unwrap();
        let mut canon = w.clone();
        canon.rotate_left(least_rotation(&w));
        prop_assert_eq!(&canon, &best);
        let p = rotation_period(&w);
        prop_assert_eq!(n % p, 0);
        let mut shifted = w.clone();
        shifted.rotate_left(p % n);
        prop_assert_eq!(shifted, w);
    }
}
