use serde::{Deserialize, Serialize};

use super::NormSeries;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    PurePower,
    PowerLog,
}

/// norm ≈ C·Λ^{−alpha} (pure_power) or C·Λ^{−alpha}·log(e+Λ)^{c_log} (power_log).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub track: String,
    pub alpha: f64,
    pub c_log: f64,
    pub model: DecayModel,
    /// RMS residual in log space of the selected model
    pub residual: f64,
    pub window: [f64; 2],
    pub samples: usize,
    pub alpha_pure: f64,
    pub residual_pure: f64,
    pub alpha_log: f64,
    pub residual_log: f64,
}

/// The log model must cut the residual by this factor to be selected.
pub const LOG_IMPROVEMENT: f64 = 0.9;
/// Below this pure-power residual no log factor is looked for.
pub const RESIDUAL_FLOOR: f64 = 1e-9;
/// Refitted on the later half of the window, the log coefficient must keep at
/// least this share of its value. Algebraic corrections such as 1 + c/Λ also
/// bend the log-log curve, but their apparent log coefficient fades as Λ grows.
pub const LOG_STABILITY: f64 = 0.75;
pub const MIN_SAMPLES: usize = 10;
pub const MIN_LAMBDA_RATIO: f64 = 10.0;

pub fn fit_decay(series: &NormSeries, track: &str, window_fraction: f64) -> Result<DecayFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return domain(format!("window fraction must lie in (0, 1], got {window_fraction}"));
    }
    let values = series.track(track).ok_or_else(|| Error::MissingTrack(track.to_string()))?;
    let len = values.len();
    let take = ((len as f64) * window_fraction).round() as usize;
    let start = len - take.min(len);
    if take < MIN_SAMPLES {
        return Err(Error::DegenerateFit(format!("{take} samples in the window, need at least {MIN_SAMPLES}")));
    }
    let (lam_lo, lam_hi) = (series.lambda_big[start], series.lambda_big[len - 1]);
    if lam_hi / lam_lo < MIN_LAMBDA_RATIO {
        return Err(Error::DegenerateFit(format!(
            "window spans Lambda in [{lam_lo}, {lam_hi}], a ratio below {MIN_LAMBDA_RATIO}"
        )));
    }
    if values[start..].iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateFit(format!("track `{track}` is identically zero in the window")));
    }
    if values[start..].iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateFit(format!("track `{track}` has non-positive or non-finite values in the window")));
    }
    let x: Vec<f64> = series.lambda_big[start..].iter().map(|l| l.ln()).collect();
    let g: Vec<f64> = series.lambda_big[start..].iter().map(|l| (std::f64::consts::E + l).ln().ln()).collect();
    let y: Vec<f64> = values[start..].iter().map(|v| v.ln()).collect();

    let pure = least_squares(&[&x], &y);
    let log = least_squares(&[&x, &g], &y);
    let (alpha_pure, alpha_log, c_log) = (-pure.coef[0], -log.coef[0], log.coef[1]);
    let half = x.len() / 2;
    let late = || least_squares(&[&x[half..], &g[half..]], &y[half..]).coef[1];
    let use_log = c_log > 0.0
        && pure.rms > RESIDUAL_FLOOR
        && log.rms < LOG_IMPROVEMENT * pure.rms
        && late() >= LOG_STABILITY * c_log;
    let (alpha, model, residual, c) = if use_log {
        (alpha_log, DecayModel::PowerLog, log.rms, c_log)
    } else {
        (alpha_pure, DecayModel::PurePower, pure.rms, 0.0)
    };
    Ok(DecayFit {
        track: track.to_string(),
        alpha,
        c_log: c,
        model,
        residual,
        window: [series.times[start], series.times[len - 1]],
        samples: take,
        alpha_pure,
        residual_pure: pure.rms,
        alpha_log,
        residual_log: log.rms,
    })
}

struct Lsq {
    coef: Vec<f64>,
    rms: f64,
}

/// y ≈ c₀ + Σ coef_k·cols_k, solved on centred columns via normal equations.
fn least_squares(cols: &[&[f64]], y: &[f64]) -> Lsq {
    let n = y.len() as f64;
    let k = cols.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let cm: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let ym = mean(y);
    let centred: Vec<Vec<f64>> = cols.iter().zip(&cm).map(|(c, m)| c.iter().map(|v| v - m).collect()).collect();
    let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = dot(&centred[i], &centred[j]);
        }
        a[i][k] = dot(&centred[i], &yc);
    }
    let coef = solve(a);
    let mut ss = 0.0;
    for (idx, &yv) in yc.iter().enumerate() {
        let fit: f64 = (0..k).map(|i| coef[i] * centred[i][idx]).sum();
        ss += (yv - fit).powi(2);
    }
    Lsq { coef, rms: (ss / n).sqrt() }
}

/// Gaussian elimination with partial pivoting on an augmented k×(k+1) matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let k = a.len();
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        if a[c][c] == 0.0 {
            continue;
        }
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for j in c..=k {
                a[r][j] -= f * a[c][j];
            }
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        if a[c][c] == 0.0 {
            continue;
        }
        let s: f64 = (c + 1..k).map(|j| a[c][j] * x[j]).sum();
        x[c] = (a[c][k] - s) / a[c][c];
    }
    x
}
