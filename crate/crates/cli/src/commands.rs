use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use dampwave::analysis::scan::gap_preset;
use dampwave::analysis::{exponent_catalog, fit_decay, gn_verify, run_scan, GnSpec, NormSeries, ScanConfig, ScanResult};
use dampwave::config::{parse_profile, validate_config, ProfileSpec, RunConfig};
use dampwave::multipliers::{classify_zone, oracle_check, DEFAULT_K};
use dampwave::profiles::{ProfileKind, SpeedProfile};
use dampwave::specfun::selftest_table;
use dampwave::spectral::{simulate_observed, FieldState};
use log::{info, warn};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::{emit, invalid, num, opt_num, print_json, read_input, write_atomic};

fn load_run_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = read_input(path)?;
    let validated = validate_config(&text).with_context(|| format!("validating {}", path.display()))?;
    for w in &validated.warnings {
        warn!("{w}");
    }
    Ok(validated.config)
}

pub fn simulate(config: &Path, out: &Path, snapshots: Option<&Path>) -> anyhow::Result<()> {
    let cfg = load_run_config(config)?;
    let run_id = cfg.run_id()?;
    info!("run {run_id}");
    if let Some(dir) = snapshots {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let profile = cfg.speed_profile()?;
    let mut count = 0usize;
    let mut observer = |state: &FieldState| -> dampwave::Result<()> {
        if let Some(dir) = snapshots {
            write_snapshot(dir, count, state, &cfg, &profile, &run_id).map_err(|e| dampwave::Error::Parse(format!("{e:#}")))?;
        }
        count += 1;
        Ok(())
    };
    let outcome = simulate_observed(&cfg, &mut observer)?;
    write_atomic(out, outcome.series.to_csv().as_bytes())?;
    print_json(&json!({
        "run_id": run_id,
        "series": out.display().to_string(),
        "samples": outcome.series.len(),
        "blowup": outcome.blowup,
        "diagnostics": outcome.diagnostics,
    }))
}

fn write_snapshot(
    dir: &Path,
    index: usize,
    state: &FieldState,
    cfg: &RunConfig,
    profile: &SpeedProfile,
    run_id: &str,
) -> anyhow::Result<()> {
    let stem = format!("snap_{index:04}");
    let mut bytes = Vec::with_capacity(16 * state.u().len());
    for v in state.u().iter().chain(state.ut()) {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(&dir.join(format!("{stem}.bin")), &bytes)?;
    let sidecar = json!({
        "data": format!("{stem}.bin"),
        "run_id": run_id,
        "t": state.t,
        "Lambda_t": profile.primitive(state.t),
        "fields": ["u", "u_t"],
        "dtype": "f64",
        "endianness": "little",
        "layout": "fields stored one after the other; within a field axis 0 varies fastest",
        "grid": {"n": cfg.grid.n, "N": cfg.grid.points, "L": cfg.grid.half_width},
    });
    write_atomic(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?.as_bytes())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckConfig {
    mu: Vec<f64>,
    #[serde(default = "default_profiles")]
    profiles: Vec<Value>,
    s: Vec<f64>,
    t: Vec<f64>,
    xi: Vec<f64>,
    #[serde(default = "default_k")]
    k_zone: f64,
}

fn default_profiles() -> Vec<Value> {
    vec![json!({"kind": "constant"})]
}

fn default_k() -> f64 {
    DEFAULT_K
}

fn profile_label(spec: &ProfileSpec) -> String {
    match spec.kind {
        ProfileKind::Constant => "constant".into(),
        ProfileKind::Polynomial => format!("polynomial(q={})", spec.q.unwrap_or(f64::NAN)),
        ProfileKind::Exponential => format!("exponential(r={})", spec.r.unwrap_or(f64::NAN)),
        ProfileKind::Tabulated => format!("tabulated({} points)", spec.points.as_ref().map_or(0, Vec::len)),
    }
}

pub fn multiplier_check(config: &Path, out: &Path) -> anyhow::Result<()> {
    let check: CheckConfig = serde_json::from_str(&read_input(config)?).with_context(|| format!("parsing {}", config.display()))?;
    let profiles = check
        .profiles
        .iter()
        .map(|v| parse_profile(v.clone()).map(|(spec, p)| (profile_label(&spec), p)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut points = Vec::new();
    for &mu in &check.mu {
        for (label, profile) in &profiles {
            for &s in &check.s {
                for &t in check.t.iter().filter(|&&t| t >= s) {
                    for &xi in &check.xi {
                        points.push((mu, label, profile, s, t, xi));
                    }
                }
            }
        }
    }
    if points.is_empty() {
        return Err(invalid("no (mu, profile, s, t, xi) points with t >= s"));
    }
    let rows = points
        .par_iter()
        .map(|&(mu, label, profile, s, t, xi)| {
            let c = oracle_check(mu, profile, s, t, xi)?;
            let zone = classify_zone(check.k_zone, profile, s, t, xi);
            let mut line = format!("{},{label},{},{},{},{zone:?}", num(mu), num(s), num(t), num(xi));
            for v in c.values.iter().chain(&c.oracle) {
                let _ = write!(line, ",{}", num(*v));
            }
            let _ = writeln!(line, ",{}", num(c.rel_err));
            Ok((line, c.rel_err))
        })
        .collect::<dampwave::Result<Vec<_>>>()?;
    let mut csv = String::from(
        "mu,profile,s,t,xi,zone,phi0,phi1,dphi0,dphi1,oracle_phi0,oracle_phi1,oracle_dphi0,oracle_dphi1,rel_err\n",
    );
    let mut worst: f64 = 0.0;
    for (line, err) in &rows {
        csv.push_str(line);
        worst = worst.max(*err);
    }
    write_atomic(out, csv.as_bytes())?;
    print_json(&json!({"rows": rows.len(), "max_rel_err": worst, "table": out.display().to_string()}))
}

pub fn specfun_selftest(out: Option<&Path>) -> anyhow::Result<()> {
    let mut csv = String::from("nu,tau,J,Y,wronskian,wronskian_cond,ode,conjugacy\n");
    for r in selftest_table() {
        let cols = [r.nu, r.tau, r.j, r.y, r.wronskian, r.wronskian_cond, r.ode, r.conjugacy];
        let cells: Vec<String> = cols.iter().map(|&v| num(v)).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    match out {
        Some(path) => write_atomic(path, csv.as_bytes()),
        None => emit(&csv),
    }
}

pub fn load_series(path: &Path) -> anyhow::Result<NormSeries> {
    let series = NormSeries::from_csv(&read_input(path)?).with_context(|| format!("reading {}", path.display()))?;
    if series.is_empty() {
        return Err(invalid(format!("{} holds no samples", path.display())));
    }
    Ok(series)
}

pub fn decay(input: &Path, track: &str, window: f64) -> anyhow::Result<()> {
    let series = load_series(input)?;
    let fit = fit_decay(&series, track, window)?;
    print_json(&fit)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GapRequest {
    mu: f64,
    #[serde(default)]
    gamma: f64,
    #[serde(default = "default_cells")]
    cells_per_axis: usize,
}

fn default_cells() -> usize {
    4
}

/// A full scan configuration, or `{"base": ..., "gap_preset": {"mu": ..}}`.
fn load_scan_config(path: &Path) -> anyhow::Result<ScanConfig> {
    let mut value: Value = serde_json::from_str(&read_input(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let preset = value.as_object_mut().and_then(|o| o.remove("gap_preset"));
    match preset {
        None => Ok(serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?),
        Some(p) => {
            let req: GapRequest = serde_json::from_value(p).context("parsing gap_preset")?;
            let base = value.get("base").cloned().ok_or_else(|| invalid("gap_preset needs a `base` configuration"))?;
            Ok(gap_preset(req.mu, req.gamma, base, req.cells_per_axis)?)
        }
    }
}

pub fn scan(config: &Path, out: &Path) -> anyhow::Result<()> {
    let spec = load_scan_config(config)?;
    let result = run_scan(&spec)?;
    let cells_dir = out.join("cells");
    fs::create_dir_all(&cells_dir).with_context(|| format!("creating {}", cells_dir.display()))?;
    let mut files = Vec::new();
    for cell in &result.cells {
        if let Some(series) = &cell.series {
            let name = format!("cell_{:04}.csv", cell.index);
            write_atomic(&cells_dir.join(&name), series.to_csv().as_bytes())?;
            files.push(format!("cells/{name}"));
        }
    }
    write_atomic(&out.join("outcomes.csv"), outcomes_csv(&result).as_bytes())?;
    let manifest = json!({
        "label": spec.label,
        "config": spec,
        "p_crit": result.p_crit,
        "monotonicity_flags": result.monotonicity_flags,
        "outcomes": "outcomes.csv",
        "series": files,
        "cells": result.cells,
    });
    write_atomic(&out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    for flag in &result.monotonicity_flags {
        warn!("{flag}");
    }
    let count = |o| result.cells.iter().filter(|c| c.outcome == o).count();
    use dampwave::analysis::Outcome::*;
    print_json(&json!({
        "cells": result.cells.len(),
        "global_decay": count(GlobalDecay),
        "blowup": count(Blowup),
        "undecided": count(Undecided),
        "out": out.display().to_string(),
    }))
}

pub const OUTCOME_HEADER: &str = "index,p,epsilon,mu,gamma,outcome,t_star,alpha,at_threshold,run_id,reason";

fn outcomes_csv(result: &ScanResult) -> String {
    let mut csv = format!("{OUTCOME_HEADER}\n");
    for c in &result.cells {
        let outcome = serde_json::to_value(c.outcome).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        // reasons are free text, keep them inside one quoted cell
        let reason = c.reason.as_deref().unwrap_or("").replace('"', "'");
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{outcome},{},{},{},{},\"{reason}\"",
            c.index,
            num(c.p),
            num(c.epsilon),
            num(c.mu),
            num(c.gamma),
            opt_num(c.t_star),
            opt_num(c.alpha),
            c.at_threshold,
            c.run_id.as_deref().unwrap_or(""),
        );
    }
    csv
}

pub fn exponents(n: usize, gamma: f64, m: f64, mu: Option<f64>) -> anyhow::Result<()> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    print_json(&exponent_catalog(n, gamma, m, mu))
}

pub fn gn(n: usize, q: f64, samples: usize, seed: u64) -> anyhow::Result<()> {
    print_json(&gn_verify(&GnSpec::new(n, q, samples, seed))?)
}
