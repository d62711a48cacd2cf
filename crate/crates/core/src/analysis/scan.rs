//! Parameter scans over (p, ε, μ, γ) classifying each cell as global decay,
//! blow-up or undecided. "global_decay" is an empirical label drawn from a
//! finite-time simulation, not a proof of global existence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponents::p_crit;
use super::fit::fit_decay;
use super::NormSeries;
use crate::config::{validate_value, RunConfig};
use crate::error::{Error, Result};
use crate::spectral::{simulate, Stepper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanAxes {
    pub p: Vec<f64>,
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub mu: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// a run configuration; the scanned keys are overwritten per cell and
    /// grid.L is re-derived from the domain-sizing rule
    pub base: serde_json::Value,
    pub axes: ScanAxes,
    /// data exponent used for the threshold marker
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_residual")]
    pub max_fit_residual: f64,
    /// classify only when the track decays at least this fast
    #[serde(default)]
    pub min_alpha: f64,
    #[serde(default)]
    pub label: Option<String>,
}

fn default_m() -> f64 {
    1.0
}

fn default_residual() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GlobalDecay,
    Blowup,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub p: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub gamma: f64,
    pub outcome: Outcome,
    pub t_star: Option<f64>,
    pub alpha: Option<f64>,
    pub at_threshold: bool,
    pub reason: Option<String>,
    pub run_id: Option<String>,
    #[serde(skip)]
    pub series: Option<NormSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub axes: ScanAxes,
    pub p_crit: Vec<f64>,
    pub cells: Vec<CellResult>,
    /// runs of increasing p where global decay was followed by another outcome
    pub monotonicity_flags: Vec<String>,
}

struct Cell {
    p: f64,
    epsilon: f64,
    mu: Option<f64>,
    gamma: Option<f64>,
}

fn cells(axes: &ScanAxes) -> Vec<Cell> {
    let opt = |v: &[f64]| if v.is_empty() { vec![None] } else { v.iter().map(|&x| Some(x)).collect() };
    let mut out = Vec::new();
    for mu in opt(&axes.mu) {
        for gamma in opt(&axes.gamma) {
            for &epsilon in &axes.epsilon {
                for &p in &axes.p {
                    out.push(Cell { p, epsilon, mu, gamma });
                }
            }
        }
    }
    out
}

fn cell_config(base: &serde_json::Value, c: &Cell) -> Result<RunConfig> {
    let mut v = base.clone();
    let obj = v.as_object_mut().ok_or_else(|| Error::Validation(vec!["scan base must be a JSON object".into()]))?;
    let entry = |obj: &mut serde_json::Map<String, serde_json::Value>, key: &str| {
        let e = obj.entry(key.to_string()).or_insert_with(|| serde_json::json!({}));
        if !e.is_object() {
            *e = serde_json::json!({});
        }
        e.as_object_mut().cloned().unwrap_or_default()
    };
    let mut nl = entry(obj, "nonlinearity");
    nl.insert("p".into(), c.p.into());
    if let Some(g) = c.gamma {
        nl.insert("gamma".into(), g.into());
    }
    obj.insert("nonlinearity".into(), nl.into());
    let mut data = entry(obj, "data");
    data.insert("amplitude".into(), c.epsilon.into());
    obj.insert("data".into(), data.into());
    if let Some(mu) = c.mu {
        obj.remove("nu");
        obj.insert("mu".into(), mu.into());
    }
    let mut grid = entry(obj, "grid");
    grid.remove("L");
    obj.insert("grid".into(), grid.into());
    Ok(validate_value(v)?.config)
}

fn run_cell(index: usize, c: &Cell, spec: &ScanConfig) -> CellResult {
    let mut res = CellResult {
        index,
        p: c.p,
        epsilon: c.epsilon,
        mu: c.mu.unwrap_or(f64::NAN),
        gamma: c.gamma.unwrap_or(f64::NAN),
        outcome: Outcome::Undecided,
        t_star: None,
        alpha: None,
        at_threshold: false,
        reason: None,
        run_id: None,
        series: None,
    };
    let config = match cell_config(&spec.base, c) {
        Ok(cfg) => cfg,
        Err(e) => {
            res.reason = Some(format!("invalid cell: {e}"));
            return res;
        }
    };
    res.mu = config.damping_mu().unwrap_or(f64::NAN);
    res.gamma = config.nonlinearity.gamma;
    res.at_threshold = (c.p - p_crit(config.grid.n, res.gamma, spec.m)).abs() <= 1e-12;
    res.run_id = config.run_id().ok();
    if let Ok(grid) = config.grid() {
        let need = Stepper::memory_estimate(&grid);
        if need > config.memory_cap_mb * 1e6 {
            res.reason = Some(format!("resource: estimated {:.0} MB over the {} MB cap", need / 1e6, config.memory_cap_mb));
            return res;
        }
    }
    let out = match simulate(&config) {
        Ok(o) => o,
        Err(e) => {
            res.reason = Some(match e {
                Error::Resource(m) => format!("resource: {m}"),
                e => format!("simulation failed: {e}"),
            });
            return res;
        }
    };
    if let Some(b) = &out.blowup {
        res.outcome = Outcome::Blowup;
        res.t_star = Some(b.t_star);
    } else {
        classify_decay(&out.series, spec, config.window, &mut res);
    }
    res.series = Some(out.series);
    res
}

fn classify_decay(series: &NormSeries, spec: &ScanConfig, window: f64, res: &mut CellResult) {
    let Some(l2) = series.track("L2") else {
        res.reason = Some("no L2 track".into());
        return;
    };
    if l2.iter().all(|&v| v == 0.0) {
        res.outcome = Outcome::GlobalDecay;
        res.reason = Some("zero solution".into());
        return;
    }
    match fit_decay(series, "L2", window) {
        Err(e) => res.reason = Some(format!("fit failed: {e}")),
        Ok(fit) => {
            res.alpha = Some(fit.alpha);
            // no growth across the last decade of Λ
            let last = *series.lambda_big.last().unwrap();
            let from = series.lambda_big.iter().position(|&l| l >= last / 10.0).unwrap_or(0);
            let growth = l2[from..].iter().copied().fold(0.0f64, f64::max) > l2[from] * (1.0 + 1e-6);
            if fit.alpha > spec.min_alpha && fit.residual <= spec.max_fit_residual && !growth {
                res.outcome = Outcome::GlobalDecay;
            } else {
                res.reason = Some(format!(
                    "alpha {:.4}, residual {:.2e}, growth in last decade: {growth}",
                    fit.alpha, fit.residual
                ));
            }
        }
    }
}

/// Run every cell; results come back in cell order whatever the scheduling.
pub fn run_scan(spec: &ScanConfig) -> Result<ScanResult> {
    if spec.axes.p.is_empty() || spec.axes.epsilon.is_empty() {
        return Err(Error::Validation(vec!["scan axes p and epsilon must be non-empty".into()]));
    }
    let list = cells(&spec.axes);
    let results: Vec<CellResult> = list.par_iter().enumerate().map(|(i, c)| run_cell(i, c, spec)).collect();
    let flags = monotonicity_flags(&results);
    let n = spec.base.pointer("/grid/n").and_then(|v| v.as_u64()).unwrap_or(1) as usize;
    let gammas: Vec<f64> = if spec.axes.gamma.is_empty() {
        vec![spec.base.pointer("/nonlinearity/gamma").and_then(|v| v.as_f64()).unwrap_or(0.0)]
    } else {
        spec.axes.gamma.clone()
    };
    Ok(ScanResult {
        axes: spec.axes.clone(),
        p_crit: gammas.iter().map(|&g| p_crit(n, g, spec.m)).collect(),
        cells: results,
        monotonicity_flags: flags,
    })
}

/// Along increasing p at fixed (ε, μ, γ): once two consecutive cells decay,
/// later ones should too. Violations are reported, not enforced.
fn monotonicity_flags(cells: &[CellResult]) -> Vec<String> {
    let mut groups: std::collections::BTreeMap<(u64, u64, u64), Vec<&CellResult>> = Default::default();
    for c in cells {
        groups.entry((c.epsilon.to_bits(), c.mu.to_bits(), c.gamma.to_bits())).or_default().push(c);
    }
    let mut flags = Vec::new();
    for group in groups.values_mut() {
        group.sort_by(|a, b| a.p.total_cmp(&b.p));
        let mut streak = 0;
        for c in group.iter() {
            if c.outcome == Outcome::GlobalDecay {
                streak += 1;
            } else if streak >= 2 {
                flags.push(format!(
                    "cell {} (p = {}, epsilon = {}) is {:?} after consecutive global_decay cells",
                    c.index, c.p, c.epsilon, c.outcome
                ));
            }
        }
    }
    flags
}

/// Scan over the open window between the nonexistence bound
/// 1 + (2+γ)/(n−(1−μ)) and the existence bound 1 + 2(2+γ)/μ in one
/// dimension with μ ∈ (0, 1). Nothing is claimed about this region. The
/// nonlinearity defaults to |u|^p, the form the nonexistence bound is for.
pub fn gap_preset(mu: f64, gamma: f64, mut base: serde_json::Value, cells_per_axis: usize) -> Result<ScanConfig> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Validation(vec![format!("the gap preset needs mu in (0, 1), got {mu}")]));
    }
    if base.pointer("/nonlinearity/form").is_none() {
        if let Some(obj) = base.as_object_mut() {
            let nl = obj.entry("nonlinearity").or_insert_with(|| serde_json::json!({}));
            if let Some(nl) = nl.as_object_mut() {
                nl.insert("form".into(), "absolute_power".into());
            }
        }
    }
    let lo = 1.0 + (2.0 + gamma) / mu;
    let hi = 1.0 + 2.0 * (2.0 + gamma) / mu;
    let k = cells_per_axis.max(2);
    let p = (0..k).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64).collect();
    let epsilon = (0..k).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / (k - 1) as f64)).collect();
    Ok(ScanConfig {
        base,
        axes: ScanAxes { p, epsilon, mu: vec![mu], gamma: vec![gamma] },
        m: 1.0,
        max_fit_residual: default_residual(),
        min_alpha: 0.0,
        label: Some("gap".into()),
    })
}
