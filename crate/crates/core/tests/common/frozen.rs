//! Hand-evaluated exponents, frozen.

use dampwave::analysis::{admissible_range, ell, exponent_catalog, p_crit, theta_gn};

/// (label, computed, expected)
pub fn table() -> Vec<(&'static str, f64, f64)> {
    let cat = |n, gamma, m, mu| exponent_catalog(n, gamma, m, mu);
    let v = |n, gamma, m, mu, name: &str| cat(n, gamma, m, mu).value(name).unwrap_or(f64::NAN);
    let only4 = admissible_range(4, 0.0, 1.0).and_then(|r| r.only).unwrap_or(f64::NAN);
    let r3 = admissible_range(3, 0.0, 1.0).unwrap();
    vec![
        ("p_crit(1, 0, 1)", p_crit(1, 0.0, 1.0), 3.0),
        ("p_crit(2, 0, 1)", p_crit(2, 0.0, 1.0), 2.0),
        ("p_crit(3, 1, 1)", p_crit(3, 1.0, 1.0), 2.0),
        ("p_crit(1, 0, 1.5)", p_crit(1, 0.0, 1.5), 4.0),
        ("ell(3, 3)", ell(3, 3.0), 1.5),
        ("ell(1, 2.5)", ell(1, 2.5), 4.0 / 3.0),
        ("theta(4, 2)", theta_gn(4.0, 2).unwrap(), 0.5),
        ("theta(6, 3)", theta_gn(6.0, 3).unwrap(), 1.0),
        ("theta(3, 1)", theta_gn(3.0, 1).unwrap(), 1.0 / 6.0),
        ("l2_data n=1 mu=4", v(1, 0.0, 1.0, Some(4.0), "l2_data"), 5.0),
        ("ell_data n=2 mu=3", v(2, 0.0, 1.0, Some(3.0), "ell_data"), 7.0 / 3.0),
        ("ell_data_low_gamma n=1 mu=2.5 gamma=-2", v(1, -2.0, 1.0, Some(2.5), "ell_data_low_gamma"), 1.5),
        ("l2_data_small_mu n=1 mu=1.5", v(1, 0.0, 1.0, Some(1.5), "l2_data_small_mu"), 19.0 / 3.0),
        ("mixed_n1 mu=2", v(1, 0.0, 1.0, Some(2.0), "mixed_n1"), 11.0 / 3.0),
        ("kappa_n1 mu=0.5", v(1, 0.0, 1.0, Some(0.5), "kappa_n1"), 9.0),
        ("nonexistence_small_mu n=1 mu=0.5", v(1, 0.0, 1.0, Some(0.5), "nonexistence_small_mu"), 5.0),
        ("nonexistence_small_mu_gamma n=2 gamma=1 mu=0.5", v(2, 1.0, 1.0, Some(0.5), "nonexistence_small_mu_gamma"), 3.0),
        ("lm_data_low_gamma n=2 gamma=-1", v(2, -1.0, 1.0, None, "lm_data_low_gamma"), 2.0),
        ("optimal_m n=3 gamma=0", v(3, 0.0, 1.0, None, "optimal_m"), (57f64.sqrt() - 3.0) / 4.0),
        ("energy bound n=3", cat(3, 0.0, 1.0, None).energy_bound.unwrap(), 3.0),
        ("admissible n=4 gamma=0 m=1: only p", only4, 2.0),
        ("admissible n=3 gamma=0 m=1: lower", r3.lower, 2.0),
    ]
}

/// Agreement to a few ulps, which is what "exact" means for these formulas.
pub fn matches(computed: f64, expected: f64) -> bool {
    (computed - expected).abs() <= 4.0 * f64::EPSILON * expected.abs()
}
