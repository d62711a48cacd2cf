//! Adaptive Bulirsch–Stoer integration (modified midpoint with polynomial
//! extrapolation) for smooth non-stiff systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct BsOptions {
    pub rtol: f64,
    pub atol: f64,
    /// initial step; 0 picks |t1 − t0|/16
    pub h_init: f64,
    pub max_steps: usize,
    /// measure every component against the largest one instead of itself
    pub state_norm: bool,
}

impl Default for BsOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, h_init: 0.0, max_steps: 5_000_000, state_norm: false }
    }
}

const SEQ: [usize; 9] = [2, 4, 6, 8, 10, 12, 14, 16, 18];

/// Integrate y′ = f(t, y) from t0 to t1 (t1 ≥ t0) and return y(t1).
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, opts: BsOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    if !(t1 > t0) {
        return Err(Error::Integration(format!("end time {t1} precedes start {t0}")));
    }
    let mut t = t0;
    let mut h = if opts.h_init > 0.0 { opts.h_init } else { (t1 - t0) / 16.0 };
    let mut prev_row: Vec<Vec<f64>> = Vec::with_capacity(SEQ.len());
    let mut cur_row: Vec<Vec<f64>> = Vec::with_capacity(SEQ.len());
    let mut dydx = vec![0.0; dim];
    let mut scratch = Scratch::new(dim);
    let mut steps = 0usize;

    while t < t1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration(format!("exceeded {} steps at t = {t}", opts.max_steps)));
        }
        let last = t + h >= t1;
        let hh = if last { t1 - t } else { h };
        f(t, &y, &mut dydx);

        let mut accepted = None;
        let mut err_last = f64::INFINITY;
        prev_row.clear();
        for k in 0..SEQ.len() {
            // T[k][0] from the midpoint rule, T[k][j] by Neville extrapolation in h².
            cur_row.clear();
            let mut base = vec![0.0; dim];
            midpoint(&mut f, &y, &dydx, t, hh, SEQ[k], &mut base, &mut scratch);
            cur_row.push(base);
            for j in 1..=k {
                let ratio = (SEQ[k] as f64 / SEQ[k - j] as f64).powi(2) - 1.0;
                let next: Vec<f64> = (0..dim)
                    .map(|i| cur_row[j - 1][i] + (cur_row[j - 1][i] - prev_row[j - 1][i]) / ratio)
                    .collect();
                cur_row.push(next);
            }
            if k >= 1 {
                let mut err: f64 = 0.0;
                let size = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let norm = if opts.state_norm { size(&y).max(size(&cur_row[k])) } else { 0.0 };
                for i in 0..dim {
                    let best = cur_row[k][i];
                    let own = if opts.state_norm { norm } else { y[i].abs().max(best.abs()) };
                    let scale = opts.atol + opts.rtol * own;
                    err = err.max((best - cur_row[k - 1][i]).abs() / scale);
                }
                err_last = err;
                if err <= 1.0 {
                    accepted = Some((k, err));
                    break;
                }
            }
            std::mem::swap(&mut prev_row, &mut cur_row);
        }
        match accepted {
            Some((k, err)) => {
                y.copy_from_slice(&cur_row[k]);
                t = if last { t1 } else { t + hh };
                let grow = if err == 0.0 { 4.0 } else { 0.9 * err.powf(-1.0 / (2 * k + 1) as f64) };
                let mut factor = grow.clamp(0.2, 4.0);
                if k >= 6 {
                    factor = factor.min(0.8);
                } else if k <= 3 {
                    factor = factor.max(1.5);
                }
                if !last {
                    h = hh * factor;
                }
            }
            None => {
                h = hh * if err_last.is_finite() { 0.25 } else { 0.1 };
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration(format!("step size underflow at t = {t}")));
                }
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
    }
    Ok(y)
}

struct Scratch {
    ym: Vec<f64>,
    yn: Vec<f64>,
    d: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Self { ym: vec![0.0; dim], yn: vec![0.0; dim], d: vec![0.0; dim] }
    }
}

#[allow(clippy::too_many_arguments)]
fn midpoint<F>(
    f: &mut F,
    y: &[f64],
    dydx: &[f64],
    t: f64,
    big_h: f64,
    nstep: usize,
    out: &mut [f64],
    s: &mut Scratch,
) where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let h = big_h / nstep as f64;
    let dim = y.len();
    for i in 0..dim {
        s.ym[i] = y[i];
        s.yn[i] = y[i] + h * dydx[i];
    }
    let mut x = t + h;
    f(x, &s.yn, &mut s.d);
    let h2 = 2.0 * h;
    for _ in 1..nstep {
        for i in 0..dim {
            let swap = s.ym[i] + h2 * s.d[i];
            s.ym[i] = s.yn[i];
            s.yn[i] = swap;
        }
        x += h;
        f(x, &s.yn, &mut s.d);
    }
    for i in 0..dim {
        out[i] = 0.5 * (s.ym[i] + s.yn[i] + h * s.d[i]);
    }
}
