//! Closed-form critical exponents, admissible ranges and decay rates.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// existence for p strictly above the value
    Above,
    /// existence for p at or above the value
    AtLeast,
    /// nonexistence for p at or below the value
    AtMost,
    /// a derived quantity, not a bound on p
    Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub name: String,
    pub formula: String,
    pub bound: Bound,
    pub value: Option<f64>,
    pub condition: String,
    pub applicable: bool,
    /// why the formula does not apply, if it does not
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRange {
    pub lower: f64,
    pub lower_inclusive: bool,
    /// None means unbounded
    pub upper: Option<f64>,
    pub empty: bool,
    /// the single admissible exponent when the range degenerates to a point
    pub only: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRate {
    pub quantity: String,
    /// norm ≲ Λ(t)^{−exponent}
    pub exponent: f64,
    pub log: bool,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub n: usize,
    pub gamma: f64,
    pub m: f64,
    pub mu: Option<f64>,
    pub thresholds: Vec<Threshold>,
    /// 1 + 2/(n−2) for n ≥ 3
    pub energy_bound: Option<f64>,
    /// range of p in the L^m existence theorem, ignoring the condition on μ
    pub admissible: Option<PRange>,
    pub decay: Vec<DecayRate>,
}

/// 1 + m(2+γ)/n.
pub fn p_crit(n: usize, gamma: f64, m: f64) -> f64 {
    1.0 + m * (2.0 + gamma) / n as f64
}

/// ℓ(n, μ) = 2n/(n+μ−2).
pub fn ell(n: usize, mu: f64) -> f64 {
    2.0 * n as f64 / (n as f64 + mu - 2.0)
}

/// θ(q) = n(1/2 − 1/q), for q ∈ [2, 2n/(n−2)] (n ≥ 3) or q ≥ 2.
pub fn theta_gn(q: f64, n: usize) -> Result<f64> {
    check_finite("q", q)?;
    if n == 0 {
        return domain("dimension must be positive");
    }
    let upper = if n >= 3 { 2.0 * n as f64 / (n as f64 - 2.0) } else { f64::INFINITY };
    if !(2.0..=upper).contains(&q) {
        return domain(format!("q = {q} outside the admissible interval [2, {upper}] for n = {n}"));
    }
    Ok(n as f64 * (0.5 - 1.0 / q))
}

/// μ threshold 2 + n(2/m − 1) of the L^m theory.
pub fn mu_threshold(n: usize, m: f64) -> f64 {
    2.0 + n as f64 * (2.0 / m - 1.0)
}

/// Admissible p in the L^m existence theorem: p > 1 + m(2+γ)/n when
/// γ + 2 ≥ n(2−m)/m², otherwise p ≥ 2/m; capped by 1 + 2/(n−2) for n ≥ 3.
pub fn admissible_range(n: usize, gamma: f64, m: f64) -> Option<PRange> {
    let nf = n as f64;
    if !(1.0..2.0).contains(&m) || nf > 4.0 / (2.0 - m) {
        return None;
    }
    let (lower, lower_inclusive) =
        if gamma + 2.0 >= nf * (2.0 - m) / (m * m) { (p_crit(n, gamma, m), false) } else { (2.0 / m, true) };
    let upper = (n >= 3).then(|| 1.0 + 2.0 / (nf - 2.0));
    let (empty, only) = match upper {
        None => (false, None),
        Some(u) if u > lower => (false, None),
        Some(u) if u == lower && lower_inclusive => (false, Some(u)),
        Some(_) => (true, None),
    };
    Some(PRange { lower, lower_inclusive, upper, empty, only })
}

struct Builder {
    out: Vec<Threshold>,
}

impl Builder {
    fn add(&mut self, name: &str, formula: &str, bound: Bound, condition: &str, check: std::result::Result<f64, String>) {
        let (value, applicable, reason) = match check {
            Ok(v) => (Some(v), true, None),
            Err(r) => (None, false, Some(r)),
        };
        self.out.push(Threshold {
            name: name.into(),
            formula: formula.into(),
            bound,
            value,
            condition: condition.into(),
            applicable,
            reason,
        });
    }
}

fn need_mu(mu: Option<f64>) -> std::result::Result<f64, String> {
    mu.ok_or_else(|| "needs mu".to_string())
}

fn in_range(mu: f64, ok: bool, what: &str) -> std::result::Result<f64, String> {
    if ok {
        Ok(mu)
    } else {
        Err(format!("mu = {mu} outside {what}"))
    }
}

/// Every threshold for (n, γ, m, μ). Inapplicable formulas are listed with a
/// reason and no value.
pub fn exponent_catalog(n: usize, gamma: f64, m: f64, mu: Option<f64>) -> ExponentReport {
    let nf = n as f64;
    let g2 = 2.0 + gamma;
    let mut b = Builder { out: Vec::new() };

    b.add(
        "l2_data",
        "1 + 2(2+gamma)/n",
        Bound::Above,
        "mu >= 2, data small in H^1 x L^2",
        need_mu(mu).and_then(|mu| in_range(mu, mu >= 2.0, "[2, inf)")).map(|_| 1.0 + 2.0 * g2 / nf),
    );
    b.add(
        "fujita",
        "1 + (2+gamma)/n",
        Bound::Above,
        "n <= 4, mu >= n + 2, data small in D_1; p >= 2 also needed when gamma < n - 2",
        if n <= 4 { Ok(p_crit(n, gamma, 1.0)) } else { Err(format!("n = {n} > 4")) },
    );
    b.add(
        "lm_data",
        "1 + m(2+gamma)/n",
        Bound::Above,
        "m in [1,2), n <= 4/(2-m), mu >= 2 + n(2/m - 1); p >= 2/m instead when gamma + 2 < n(2-m)/m^2",
        if !(1.0..2.0).contains(&m) {
            Err(format!("m = {m} outside [1, 2)"))
        } else if nf > 4.0 / (2.0 - m) {
            Err(format!("n = {n} > 4/(2-m)"))
        } else {
            Ok(p_crit(n, gamma, m))
        },
    );
    b.add(
        "lm_data_low_gamma",
        "2/m",
        Bound::AtLeast,
        "replaces 1 + m(2+gamma)/n when gamma + 2 < n(2-m)/m^2",
        if (1.0..2.0).contains(&m) && g2 < nf * (2.0 - m) / (m * m) {
            Ok(2.0 / m)
        } else {
            Err("gamma + 2 >= n(2-m)/m^2".to_string())
        },
    );
    b.add(
        "ell",
        "2n/(n + mu - 2)",
        Bound::Value,
        "mu in (2, 2 + n)",
        need_mu(mu).and_then(|mu| in_range(mu, mu > 2.0 && mu < 2.0 + nf, "(2, 2+n)")).map(|mu| ell(n, mu)),
    );
    b.add(
        "ell_data",
        "1 + 2(2+gamma)/(n + mu - 2)",
        Bound::Above,
        "mu in (2, 2 + n), data small in D_ell; p >= 1 + (mu-2)/n instead when gamma < (mu-2)(n+mu-2)/(2n) - 2",
        need_mu(mu)
            .and_then(|mu| in_range(mu, mu > 2.0 && mu < 2.0 + nf, "(2, 2+n)"))
            .map(|mu| 1.0 + 2.0 * g2 / (nf + mu - 2.0)),
    );
    b.add(
        "ell_data_low_gamma",
        "1 + (mu-2)/n",
        Bound::AtLeast,
        "replaces 1 + 2(2+gamma)/(n+mu-2) when gamma < (mu-2)(n+mu-2)/(2n) - 2",
        need_mu(mu).and_then(|mu| in_range(mu, mu > 2.0 && mu < 2.0 + nf, "(2, 2+n)")).and_then(|mu| {
            if gamma < (mu - 2.0) * (nf + mu - 2.0) / (2.0 * nf) - 2.0 {
                Ok(1.0 + (mu - 2.0) / nf)
            } else {
                Err("gamma above the switching value".to_string())
            }
        }),
    );
    b.add(
        "l2_data_small_mu",
        "1 + 4(2+gamma)/(mu n)",
        Bound::Above,
        "mu in [1, 2), data small in H^1 x L^2",
        need_mu(mu).and_then(|mu| in_range(mu, (1.0..2.0).contains(&mu), "[1, 2)")).map(|mu| 1.0 + 4.0 * g2 / (mu * nf)),
    );
    let one_d = |mu: Option<f64>| if n == 1 { need_mu(mu) } else { Err(format!("needs n = 1, got {n}")) };
    b.add(
        "mixed_n1",
        "1 + 4(2+gamma)/(mu + 1)",
        Bound::Above,
        "n = 1, mu in [1, 3), p >= 2, data small in D_1",
        one_d(mu).and_then(|mu| in_range(mu, (1.0..3.0).contains(&mu), "[1, 3)")).map(|mu| 1.0 + 4.0 * g2 / (mu + 1.0)),
    );
    b.add(
        "kappa_n1",
        "1 + 2(2+gamma)/mu",
        Bound::Above,
        "n = 1, mu in (0, 1], p >= 4/(3-mu), data small in D_kappa with kappa = 2/(3-mu)",
        one_d(mu).and_then(|mu| in_range(mu, mu > 0.0 && mu <= 1.0, "(0, 1]")).map(|mu| 1.0 + 2.0 * g2 / mu),
    );
    b.add(
        "nonexistence_small_mu",
        "1 + 2/(n - (1 - mu))",
        Bound::AtMost,
        "mu in (0, 1), f = |u|^p, u_1 in L^1 with positive integral",
        need_mu(mu).and_then(|mu| in_range(mu, mu > 0.0 && mu < 1.0, "(0, 1)")).map(|mu| 1.0 + 2.0 / (nf - 1.0 + mu)),
    );
    b.add(
        "nonexistence_small_mu_gamma",
        "1 + (2+gamma)/(n - (1 - mu))",
        Bound::AtMost,
        "mu in (0, 1), f >= (1+t)^gamma |u|^p",
        need_mu(mu).and_then(|mu| in_range(mu, mu > 0.0 && mu < 1.0, "(0, 1)")).map(|mu| 1.0 + g2 / (nf - 1.0 + mu)),
    );
    b.add(
        "optimal_m",
        "largest root of ((2+gamma)/n) m^2 + m - 2 = 0",
        Bound::Value,
        "gamma in (-2, n - 2); the L^m theorem at this m gives the widest range of p",
        if gamma > -2.0 && gamma < nf - 2.0 {
            let a = g2 / nf;
            Ok((-1.0 + (1.0 + 8.0 * a).sqrt()) / (2.0 * a))
        } else {
            Err(format!("gamma = {gamma} outside (-2, n-2)"))
        },
    );

    let mut decay = Vec::new();
    if (1.0..=2.0).contains(&m) {
        let base = nf * (1.0 / m - 0.5);
        let mt = mu_threshold(n, m);
        decay.push(DecayRate {
            quantity: "L2".into(),
            exponent: base,
            log: false,
            condition: format!("mu >= {mt}"),
        });
        match mu {
            Some(mu) if mu > mt => decay.push(DecayRate {
                quantity: "energy".into(),
                exponent: base + 1.0,
                log: false,
                condition: format!("mu > {mt}"),
            }),
            Some(mu) if mu == mt => decay.push(DecayRate {
                quantity: "energy".into(),
                exponent: mu / 2.0,
                log: true,
                condition: format!("mu = {mt}"),
            }),
            Some(mu) => decay.push(DecayRate {
                quantity: "energy".into(),
                exponent: mu / 2.0,
                log: false,
                condition: format!("mu < {mt}: non-effective rate"),
            }),
            None => {}
        }
    }

    ExponentReport {
        n,
        gamma,
        m,
        mu,
        thresholds: b.out,
        energy_bound: (n >= 3).then(|| 1.0 + 2.0 / (nf - 2.0)),
        admissible: admissible_range(n, gamma, m),
        decay,
    }
}

impl ExponentReport {
    pub fn get(&self, name: &str) -> Option<&Threshold> {
        self.thresholds.iter().find(|t| t.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|t| t.value)
    }
}
