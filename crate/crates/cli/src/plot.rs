//! Whitespace-separated data files plus gnuplot scripts.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use dampwave::analysis::{exponent_catalog, p_crit, NormSeries};
use serde_json::Value;

use crate::commands::{load_series, OUTCOME_HEADER};
use crate::output::{invalid, num, read_input, write_atomic};
use crate::Style;

/// Parameters the reference exponents are taken at.
#[derive(Debug, Clone, Copy)]
pub struct Reference {
    pub n: usize,
    pub mu: Option<f64>,
    pub m: f64,
    pub gamma: f64,
}

pub fn plotdata(input: &Path, style: Style, out: &Path, reference: &Reference) -> anyhow::Result<()> {
    // everything is rendered in memory first so a bad input leaves no files
    let files = match style {
        Style::LoglogDecay => loglog_decay(&load_series(input)?, reference)?,
        Style::PhaseMap => phase_map(input, reference)?,
    };
    for (name, contents) in &files {
        write_atomic(&out.join(name), contents.as_bytes())?;
    }
    Ok(())
}

fn loglog_decay(series: &NormSeries, reference: &Reference) -> anyhow::Result<Vec<(String, String)>> {
    let tracks: Vec<_> = series.tracks.iter().filter(|t| t.name != "weighted_saturated").collect();
    if tracks.is_empty() {
        return Err(invalid("series has no norm tracks"));
    }
    let mut dat = String::from("# Lambda_t t");
    for t in &tracks {
        let _ = write!(dat, " {}", t.name);
    }
    dat.push('\n');
    for i in 0..series.len() {
        let _ = write!(dat, "{} {}", num(series.lambda_big[i]), num(series.times[i]));
        for t in &tracks {
            let _ = write!(dat, " {}", num(t.values[i]));
        }
        dat.push('\n');
    }

    let mut gp = String::from(
        "set terminal pngcairo size 900,600 noenhanced\nset output 'decay.png'\nset logscale xy\nset format y '%.0e'\n\
         set xlabel 'Lambda(t)'\nset ylabel 'norm'\nset key outside right\n",
    );
    let mut curves: Vec<String> = tracks
        .iter()
        .enumerate()
        .map(|(k, t)| format!("'decay.dat' using 1:{} with linespoints pt 7 ps 0.5 title '{}'", k + 3, t.name))
        .collect();
    let catalog = exponent_catalog(reference.n, reference.gamma, reference.m, reference.mu);
    for rate in &catalog.decay {
        let Some(values) = series.track(&rate.quantity) else { continue };
        // anchor the reference line at the last positive sample of its track
        let Some(i) = (0..series.len()).rev().find(|&i| values[i] > 0.0 && values[i].is_finite()) else { continue };
        let (x1, y1) = (num(series.lambda_big[i]), num(values[i]));
        let f = format!("ref_{}", rate.quantity.replace(|c: char| !c.is_ascii_alphanumeric(), "_"));
        let mut body = format!("{y1} * (x / {x1})**(-{})", num(rate.exponent));
        let mut title = format!("Lambda^-{}", rate.exponent);
        if rate.log {
            let _ = write!(body, " * log(exp(1) + x) / log(exp(1) + {x1})");
            title.push_str(" log(e+Lambda)");
        }
        let _ = writeln!(gp, "{f}(x) = {body}");
        curves.push(format!("{f}(x) with lines dashtype 2 title '{} ref {title}'", rate.quantity));
    }
    let _ = writeln!(gp, "plot {}", curves.join(", \\\n     "));
    Ok(vec![("decay.dat".into(), dat), ("decay.gp".into(), gp)])
}

struct PhaseRow {
    p: f64,
    epsilon: f64,
    mu: f64,
    gamma: f64,
    outcome: String,
}

fn outcome_code(outcome: &str) -> u8 {
    match outcome {
        "global_decay" => 0,
        "blowup" => 1,
        _ => 2,
    }
}

fn phase_map(input: &Path, reference: &Reference) -> anyhow::Result<Vec<(String, String)>> {
    let (csv_path, manifest) = if input.is_dir() {
        let m = input.join("manifest.json");
        (input.join("outcomes.csv"), m.exists().then_some(m))
    } else {
        (input.to_path_buf(), None)
    };
    let rows = parse_outcomes(&read_input(&csv_path)?).with_context(|| format!("reading {}", csv_path.display()))?;
    if rows.is_empty() {
        return Err(invalid(format!("{} holds no scan cells", csv_path.display())));
    }
    let mut thresholds: Vec<f64> = match manifest {
        Some(path) => {
            let v: Value = serde_json::from_str(&read_input(&path)?).with_context(|| format!("parsing {}", path.display()))?;
            v["p_crit"].as_array().map(|a| a.iter().filter_map(Value::as_f64).collect()).unwrap_or_default()
        }
        None => Vec::new(),
    };
    if thresholds.is_empty() {
        thresholds.push(p_crit(reference.n, reference.gamma, reference.m));
    }

    let mut dat = String::from("# p epsilon mu gamma code outcome   (code 0 global_decay, 1 blowup, 2 undecided)\n");
    for r in &rows {
        let _ = writeln!(dat, "{} {} {} {} {} {}", num(r.p), num(r.epsilon), num(r.mu), num(r.gamma), outcome_code(&r.outcome), r.outcome);
    }
    let mut gp = String::from(
        "set terminal pngcairo size 900,600 noenhanced\nset output 'phase.png'\nset xlabel 'p'\nset ylabel 'epsilon'\n\
         set cbrange [0:2]\nset palette defined (0 'forest-green', 1 'red', 2 'gray')\n\
         set cbtics ('global decay' 0, 'blow-up' 1, 'undecided' 2)\n",
    );
    if rows.iter().all(|r| r.epsilon > 0.0) {
        gp.push_str("set logscale y\n");
    }
    for pc in &thresholds {
        let _ = writeln!(gp, "set arrow from {0}, graph 0 to {0}, graph 1 nohead dashtype 2", num(*pc));
    }
    gp.push_str("plot 'phase.dat' using 1:2:5 with points pt 7 ps 2 palette notitle\n");
    Ok(vec![("phase.dat".into(), dat), ("phase.gp".into(), gp)])
}

fn parse_outcomes(text: &str) -> anyhow::Result<Vec<PhaseRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == OUTCOME_HEADER => {}
        _ => return Err(invalid(format!("outcomes file must start with the header `{OUTCOME_HEADER}`"))),
    }
    let columns = OUTCOME_HEADER.split(',').count();
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.splitn(columns, ',').collect();
            if cells.len() != columns {
                return Err(invalid(format!("row {} has {} cells, expected {columns}", i + 1, cells.len())));
            }
            let f = |k: usize| cells[k].trim().parse::<f64>().map_err(|_| invalid(format!("row {}: bad number `{}`", i + 1, cells[k])));
            Ok(PhaseRow { p: f(1)?, epsilon: f(2)?, mu: f(3)?, gamma: f(4)?, outcome: cells[5].trim().to_string() })
        })
        .collect()
}
