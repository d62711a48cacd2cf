//! Empirical certification of the zone-wise multiplier bounds.
//!
//! Each entry divides a multiplier quantity (a sup over ξ, or an L^q norm over
//! the low zones) by the rate it is expected to obey, samples the ratio over
//! (s, t) and judges whether it stays bounded as Λ(t) grows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{propagate, Orders, Span};
use crate::error::{domain, Result};
use crate::profiles::SpeedProfile;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSpec {
    /// space dimension, enters through q and the spherical measure
    pub n: u32,
    pub k_zone: f64,
    pub s_values: Vec<f64>,
    /// largest Λ(t) sampled
    pub lambda_t_max: f64,
    /// t and ξ grid density
    pub per_decade: usize,
    /// I1 sups run up to σ = Λ(s)ξ = sigma_max (and at least ξ = 10)
    pub sigma_max: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            n: 1,
            k_zone: super::DEFAULT_K,
            s_values: vec![0.0, 1.0, 4.0],
            lambda_t_max: 1e3,
            per_decade: 40,
            sigma_max: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSample {
    pub s: f64,
    pub t: f64,
    pub lambda_t: f64,
    pub ratio: f64,
    /// maximising frequency for sups, NaN for integrals
    pub argmax_xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub template: String,
    pub expect_bounded: bool,
    pub max_ratio: f64,
    pub argmax: RatioSample,
    pub median_last_decade: f64,
    pub max_last_decade: f64,
    /// largest per-s slope of log ratio against log Λ(t) over the last decade
    pub growth_slope: f64,
    pub bounded: bool,
    pub samples: Vec<RatioSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub mu: f64,
    pub m: f64,
    pub n: u32,
    /// exponent of the low-frequency norm, None when m = 2
    pub q: Option<f64>,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn entry(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Every entry judged as expected.
    pub fn consistent(&self) -> bool {
        self.entries.iter().all(|e| e.bounded == e.expect_bounded)
    }
}

/// λ(t)^{[speed_t]} λ(s)^{−[inv_speed_s]} Λ(t)^{a_t} Λ(s)^{a_s} log(1 + Λ(t)/Λ(s))^{[log]}
#[derive(Debug, Clone, Copy, PartialEq)]
struct Template {
    speed_t: bool,
    inv_speed_s: bool,
    a_t: f64,
    a_s: f64,
    log: bool,
}

impl Template {
    fn new(a_t: f64, a_s: f64) -> Self {
        Self { speed_t: false, inv_speed_s: false, a_t, a_s, log: false }
    }

    fn speed(mut self) -> Self {
        self.speed_t = true;
        self
    }

    fn inv(mut self) -> Self {
        self.inv_speed_s = true;
        self
    }

    fn log(mut self, on: bool) -> Self {
        self.log = on;
        self
    }

    fn eval(&self, sp: &Span) -> f64 {
        let mut v = sp.big_t.powf(self.a_t) * sp.big_s.powf(self.a_s);
        if self.speed_t {
            v *= sp.speed_t;
        }
        if self.inv_speed_s {
            v /= sp.speed_s;
        }
        if self.log {
            v *= (sp.big_t / sp.big_s).ln_1p();
        }
        v
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.speed_t {
            parts.push("λ(t)".to_string());
        }
        if self.inv_speed_s {
            parts.push("λ(s)^-1".to_string());
        }
        if self.a_t != 0.0 {
            parts.push(format!("Λ(t)^{}", fmt_exp(self.a_t)));
        }
        if self.a_s != 0.0 {
            parts.push(format!("Λ(s)^{}", fmt_exp(self.a_s)));
        }
        if self.log {
            parts.push("log(1+Λ(t)/Λ(s))".to_string());
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("·")
        }
    }
}

fn fmt_exp(a: f64) -> String {
    if a.fract() == 0.0 {
        format!("{}", a as i64)
    } else {
        format!("({a})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Quantity {
    U0,
    U1,
    E0,
    E1,
}

impl Quantity {
    fn eval(&self, v: &[f64; 4], xi: f64, speed_t: f64) -> f64 {
        match self {
            Quantity::U0 => v[0].abs(),
            Quantity::U1 => v[1].abs(),
            Quantity::E0 => (speed_t * xi * v[0]).hypot(v[2]),
            Quantity::E1 => (speed_t * xi * v[1]).hypot(v[3]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Part {
    /// sup over all ξ, optionally divided by ⟨ξ⟩
    SupAll { bracket: bool },
    /// sup over I1, optionally divided by ⟨ξ⟩
    SupHigh { bracket: bool },
    /// L^q norm over I2 ∪ I3
    LowNorm,
}

#[derive(Debug, Clone)]
struct EntryDef {
    name: &'static str,
    quantity: Quantity,
    part: Part,
    template: Template,
    expect_bounded: bool,
}

fn entry_defs(mu: f64, m: f64, n: u32) -> Vec<EntryDef> {
    use Part::*;
    use Quantity::*;
    let mut defs = Vec::new();
    let mut add = |name, quantity, part, template, expect_bounded| {
        defs.push(EntryDef { name, quantity, part, template, expect_bounded })
    };
    if m == 2.0 {
        add("u0", U0, SupAll { bracket: false }, Template::new(0.0, 0.0), mu >= 1.0);
        add("u1", U1, SupAll { bracket: false }, Template::new(0.0, 1.0).inv(), mu >= 1.0);
        let effective = Template::new(-1.0, 1.0).speed();
        if mu >= 2.0 {
            add("energy0", E0, SupAll { bracket: true }, effective, true);
            add("energy1", E1, SupAll { bracket: false }, effective.inv(), true);
        } else {
            let small = Template::new(-mu / 2.0, mu / 2.0).speed();
            add("energy0", E0, SupAll { bracket: true }, small, true);
            add("energy1", E1, SupAll { bracket: false }, small.inv(), true);
            add("energy0_vs_effective", E0, SupAll { bracket: true }, effective, false);
            add("energy1_vs_effective", E1, SupAll { bracket: false }, effective.inv(), false);
        }
        return defs;
    }
    let gamma = n as f64 * (1.0 / m - 0.5);
    let border_u = (mu - 2.0 * gamma).abs() < 1e-9;
    let (ut, us) = if border_u { (-mu / 2.0, mu / 2.0) } else { (-gamma, gamma) };
    let u_ok = mu >= 1.0 && mu >= 2.0 * gamma;
    add("u0_high", U0, SupHigh { bracket: false }, Template::new(ut, us).log(border_u), u_ok);
    add("u1_high", U1, SupHigh { bracket: false }, Template::new(ut, us + 1.0).inv().log(border_u), u_ok);
    add("u0_low", U0, LowNorm, Template::new(ut, 0.0).log(border_u), u_ok);
    add("u1_low", U1, LowNorm, Template::new(ut, 1.0).inv().log(border_u), u_ok);
    let crit = 2.0 + 2.0 * gamma;
    if mu >= crit - 1e-9 {
        let border_e = (mu - crit).abs() < 1e-9;
        let (et, es) = if border_e { (-mu / 2.0, mu / 2.0) } else { (-gamma - 1.0, gamma + 1.0) };
        let high = Template::new(et, es).speed().log(border_e);
        let low = Template::new(et, 0.0).speed().log(border_e);
        add("energy0_high", E0, SupHigh { bracket: true }, high, true);
        add("energy1_high", E1, SupHigh { bracket: false }, high.inv(), true);
        add("energy0_low", E0, LowNorm, low, true);
        add("energy1_low", E1, LowNorm, Template { a_s: 1.0, ..low }.inv(), true);
    }
    defs
}

/// Surface measure of the unit sphere in R^n.
pub(crate) fn sphere_area(n: u32) -> f64 {
    let pi = std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * pi,
        _ => 2.0 * pi / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

pub fn certify_zone_bounds(mu: f64, profile: &SpeedProfile, m: f64, spec: &SampleSpec) -> Result<BoundReport> {
    if !(1.0..=2.0).contains(&m) {
        return domain(format!("m must lie in [1, 2], got {m}"));
    }
    if !(spec.k_zone > 0.0 && spec.k_zone < 1.0) {
        return domain("zone constant K must lie in (0, 1)");
    }
    if spec.n == 0 || spec.per_decade == 0 || spec.s_values.is_empty() {
        return domain("sample spec needs n >= 1, per_decade >= 1 and at least one s");
    }
    let orders = Orders::new(mu)?;
    let defs = entry_defs(mu, m, spec.n);
    let q = if m == 2.0 { None } else { Some(1.0 / (1.0 / m - 0.5)) };

    let mut points = Vec::new();
    for &s in &spec.s_values {
        if !(s >= 0.0 && s.is_finite()) {
            return domain(format!("sample time s must be non-negative, got {s}"));
        }
        let big_s = profile.primitive(s);
        if big_s >= spec.lambda_t_max {
            return domain("lambda_t_max must exceed Λ(s) for every sampled s");
        }
        let count = ((spec.lambda_t_max / big_s).log10() * spec.per_decade as f64).ceil() as usize;
        for k in 0..=count {
            let target = big_s * (spec.lambda_t_max / big_s).powf(k as f64 / count as f64);
            let t = if k == 0 { s } else { profile.time_at_primitive(target)?.max(s) };
            points.push((s, t));
        }
    }

    let gl = GaussLegendre::new(16);
    let area = sphere_area(spec.n);
    let rows: Vec<Vec<RatioSample>> = points
        .par_iter()
        .map(|&(s, t)| {
            let span = Span::new(profile, s, t);
            let eval = |xi: f64| {
                let bs = orders.basis(span.big_s * xi);
                let bt = orders.basis(span.big_t * xi);
                propagate(&orders, &span, xi, &bs, &bt)
            };
            let k_high = spec.k_zone / span.big_s;
            let xi_top = f64::max(spec.sigma_max / span.big_s, 10.0);
            let xi_floor = 1e-3 * spec.k_zone / span.big_t;
            let period = 2.0 * std::f64::consts::PI / (span.big_t - span.big_s).max(1e-300);
            let all_grid = sup_grid(xi_floor, xi_top, spec.per_decade, period);
            let high_grid = sup_grid(k_high, xi_top, spec.per_decade, period);
            let all_vals: Vec<[f64; 4]> =
                if m == 2.0 { all_grid.iter().map(|&x| eval(x)).collect() } else { Vec::new() };
            let high_vals: Vec<[f64; 4]> =
                if m < 2.0 { high_grid.iter().map(|&x| eval(x)).collect() } else { Vec::new() };
            let low_nodes: Vec<(f64, f64)> =
                if m < 2.0 { low_panels(k_high, span.big_t, &gl) } else { Vec::new() };
            let low_vals: Vec<[f64; 4]> = low_nodes.iter().map(|&(x, _)| eval(x)).collect();

            defs.iter()
                .map(|d| {
                    let bound = d.template.eval(&span);
                    let sup = |grid: &[f64], vals: &[[f64; 4]], bracket: bool| {
                        let mut best = (0.0f64, f64::NAN);
                        for (x, v) in grid.iter().zip(vals) {
                            let mut val = d.quantity.eval(v, *x, span.speed_t);
                            if bracket {
                                val /= x.hypot(1.0);
                            }
                            if val > best.0 {
                                best = (val, *x);
                            }
                        }
                        best
                    };
                    let (value, argmax_xi) = match d.part {
                        Part::SupAll { bracket } => sup(&all_grid, &all_vals, bracket),
                        Part::SupHigh { bracket } => sup(&high_grid, &high_vals, bracket),
                        Part::LowNorm => {
                            let qq = q.unwrap_or(2.0);
                            let integral: f64 = low_nodes
                                .iter()
                                .zip(&low_vals)
                                .map(|(&(x, w), v)| {
                                    w * d.quantity.eval(v, x, span.speed_t).powf(qq) * x.powi(spec.n as i32 - 1)
                                })
                                .sum();
                            ((area * integral).powf(1.0 / qq), f64::NAN)
                        }
                    };
                    RatioSample { s, t, lambda_t: span.big_t, ratio: value / bound, argmax_xi }
                })
                .collect()
        })
        .collect();

    let mut entries = Vec::new();
    for (i, d) in defs.iter().enumerate() {
        let samples: Vec<RatioSample> = rows.iter().map(|r| r[i]).collect();
        entries.push(summarise(d, samples, spec));
    }
    Ok(BoundReport { mu, m, n: spec.n, q, entries })
}

/// A ratio growing like Λ(t)^{1/4} over the last decade has slope 0.25.
const GROWTH_SLOPE_MAX: f64 = 0.15;

fn summarise(d: &EntryDef, samples: Vec<RatioSample>, spec: &SampleSpec) -> BoundEntry {
    let argmax = *samples
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("at least one sample");
    let mut last: Vec<f64> = samples
        .iter()
        .filter(|r| r.lambda_t >= spec.lambda_t_max / 10.0 * (1.0 - 1e-12))
        .map(|r| r.ratio)
        .collect();
    last.sort_by(f64::total_cmp);
    let median_last_decade = if last.is_empty() { f64::NAN } else { last[last.len() / 2] };
    let max_last_decade = last.last().copied().unwrap_or(f64::NAN);

    let mut growth_slope = f64::NEG_INFINITY;
    for &s in &spec.s_values {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .filter(|r| r.s == s && r.lambda_t >= spec.lambda_t_max / 10.0 * (1.0 - 1e-12) && r.ratio > 0.0)
            .map(|r| (r.lambda_t.ln(), r.ratio.ln()))
            .collect();
        if pts.len() >= 3 {
            growth_slope = growth_slope.max(slope(&pts));
        }
    }
    let finite = samples.iter().all(|r| r.ratio.is_finite());
    let bounded = finite && max_last_decade <= 10.0 * median_last_decade && growth_slope <= GROWTH_SLOPE_MAX;
    BoundEntry {
        name: d.name.to_string(),
        template: d.template.describe(),
        expect_bounded: d.expect_bounded,
        max_ratio: argmax.ratio,
        argmax,
        median_last_decade,
        max_last_decade,
        growth_slope,
        bounded,
        samples,
    }
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Log grid with `per_decade` points per decade on [lo, hi]; where the
/// oscillation period is finer than the grid, each point gets seven
/// companions spread across one period so the sup sees every phase.
fn sup_grid(lo: f64, hi: f64, per_decade: usize, period: f64) -> Vec<f64> {
    if !(hi > lo && lo > 0.0) {
        return vec![lo.max(hi)];
    }
    let count = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(count * 8);
    for k in 0..=count {
        let x = lo * (hi / lo).powf(k as f64 / count as f64);
        out.push(x);
        let spacing = x * ((hi / lo).powf(1.0 / count as f64) - 1.0);
        if period < spacing {
            for j in 1..8 {
                let y = x + period * j as f64 / 8.0;
                if y <= hi {
                    out.push(y);
                }
            }
        }
    }
    out
}

/// Quadrature nodes on (0, hi]: geometric panels while Λ(t)ξ < π, then
/// panels of width π/Λ(t) that resolve the oscillation.
fn low_panels(hi: f64, big_t: f64, gl: &GaussLegendre) -> Vec<(f64, f64)> {
    let mut edges = vec![0.0];
    let osc = std::f64::consts::PI / big_t;
    let mut x = f64::min(1e-10 / big_t, hi);
    edges.push(x);
    while x < hi.min(osc) {
        x = (x * 10f64.powf(0.25)).min(hi.min(osc));
        edges.push(x);
    }
    while x < hi {
        x = (x + osc).min(hi);
        edges.push(x);
    }
    let mut nodes = Vec::with_capacity(edges.len() * gl.len());
    for w in edges.windows(2) {
        if w[1] > w[0] {
            nodes.extend(gl.mapped(w[0], w[1]));
        }
    }
    nodes
}
