use num_traits::{Signed, Zero};

use curvestat::moments::{
    gap_moments, hoeffding_u, kappa_chi_form, limit_constants_for_g, mean_s_inf, mean_u2, mean_uk, sigma2_chi_form,
    sigma2_g_form, var_tail, var_u2, var_uk, verify_uncorrelated,
};
use curvestat::words::enumerate_strings;
use curvestat::{Notation, Rational, Scalar, Surface};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn alternating(g: usize) -> Surface {
    let names: Vec<String> = (0..g / 2).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let reference: Vec<String> = names.iter().flat_map(|x| [x.clone(), x.to_uppercase()]).collect();
    Surface::from_names(&refs, &reference.join(" "), Notation::Upper).unwrap()
}

/// Moments of U_k straight from the definition, by enumerating every reduced prefix.
fn enumerated_moments(s: &Surface, k: usize) -> (Rational, Rational) {
    let mut sum = Rational::zero();
    let mut sq = Rational::zero();
    let mut count = 0i64;
    for w in enumerate_strings(s, k) {
        let u = hoeffding_u::<Rational>(s, w.letters(), k).unwrap();
        sq += &u * &u;
        sum += u;
        count += 1;
    }
    let mean = sum / Rational::from_int(count);
    let var = sq / Rational::from_int(count) - &mean * &mean;
    (mean, var)
}

#[test]
fn closed_forms_match_enumeration() {
    for g in [4usize, 6, 8, 10] {
        let s = alternating(g);
        let (m2, v2) = enumerated_moments(&s, 2);
        assert_eq!(m2, mean_u2::<Rational>(g), "g = {g}");
        assert_eq!(v2, var_u2::<Rational>(g), "g = {g}");
        for k in 3..=if g <= 6 { 5 } else { 4 } {
            let (mk, vk) = enumerated_moments(&s, k);
            assert_eq!(mk, mean_uk::<Rational>(g, k), "g = {g}, k = {k}");
            assert_eq!(vk, var_uk::<Rational>(g, k), "g = {g}, k = {k}");
        }
    }
}

#[test]
fn gap_moments_match_enumeration() {
    for g in [4usize, 6, 8, 10, 12] {
        let vals: Vec<i64> = (0..=g as i64 - 2).collect();
        let len = Rational::from_int(vals.len() as i64);
        let raw = |p: u32| vals.iter().map(|v| Rational::from_int(v.pow(p))).sum::<Rational>() / &len;
        let gm = gap_moments::<Rational>(g);
        assert_eq!(gm.ej, raw(1));
        assert_eq!(gm.ej2, raw(2));
        assert_eq!(gm.ej3, raw(3));
        assert_eq!(gm.ej4, raw(4));
        assert_eq!(gm.ejj, raw(1) * raw(1));
    }
}

#[test]
fn variance_series_sums_to_sigma2() {
    for g in [4usize, 6, 8, 10, 20] {
        let chi = 1 - g as i64 / 2;
        // Partial sums of the geometric tail approach the closed form from below.
        let mut partial = var_u2::<Rational>(g);
        for k in 3..=40 {
            partial += Rational::from_int(4) * var_uk::<Rational>(g, k);
        }
        let full = var_u2::<Rational>(g) + var_tail::<Rational>(g);
        assert!(partial < full);
        assert!((&full - &partial).abs() < q(1, 1_000_000_000_000));
        assert_eq!(full, sigma2_g_form::<Rational>(g));
        assert_eq!(full, sigma2_chi_form::<Rational>(chi));
        assert_eq!(kappa_chi_form::<Rational>(chi) * Rational::from_int(2), mean_s_inf::<Rational>(g));
    }
}

#[test]
fn sigma2_is_positive_for_every_negative_chi() {
    for chi in -40..=-1 {
        assert!(sigma2_chi_form::<Rational>(chi).is_positive(), "chi = {chi}");
        assert!(kappa_chi_form::<Rational>(chi).is_positive());
        assert!(sigma2_chi_form::<f64>(chi) > 0.0);
    }
}

#[test]
fn small_surfaces_have_published_constants() {
    let r = limit_constants_for_g::<Rational>(4, 50);
    assert_eq!(r.kappa, q(1, 9));
    assert_eq!(r.sigma2, q(1, 81));
    let r8 = limit_constants_for_g::<Rational>(8, 50);
    assert_eq!(r8.kappa, q(1, 7));
    assert!(r8.consistent());
    let f = limit_constants_for_g::<f64>(8, 50);
    assert!(f.consistent());
    assert!(f.kappa.agrees_with(&r8.kappa.to_f64_lossy()));
    assert!(f.sigma2.agrees_with(&r8.sigma2.to_f64_lossy()));
}

#[test]
fn uncorrelated_for_larger_alphabets() {
    for g in [6usize, 8] {
        let r = verify_uncorrelated(g, 4, 4);
        assert!(r.passed(), "g = {g}: {} off-diagonal", r.nonzero_off_diagonal);
        let first = q((g as i64 - 2).pow(4), 4);
        assert!(r.cases.iter().any(|c| c.closed_form == first && c.matches()));
    }
}
