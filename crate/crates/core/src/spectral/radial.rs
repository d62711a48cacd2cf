//! Norms of the linear solution from radial data spectra, by Parseval and
//! quadrature over |ξ|, without a spatial grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, domain, Error, Result};
use crate::multipliers::bounds::sphere_area;
use crate::multipliers::{propagate, Orders, Span};
use crate::profiles::SpeedProfile;
use crate::quadrature::GaussLegendre;

/// A radial Fourier transform v̂(|ξ|) with v̂(ξ) = ∫v(x)e^{−ix·ξ}dx.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialSpectrum {
    Zero,
    /// amplitude·exp(−width²|ξ|²/2)
    Gaussian { amplitude: f64, width: f64 },
}

impl RadialSpectrum {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Gaussian { amplitude, width } => amplitude * (-0.5 * (width * r).powi(2)).exp(),
        }
    }

    /// |ξ| beyond which |v̂|² is below 1e−36 of its peak.
    fn extent(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Gaussian { width, .. } => (2.0 * 1e18f64.ln()).sqrt() / width,
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Self::Zero => f64::INFINITY,
            Self::Gaussian { width, .. } => 1.0 / width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialData {
    pub n: usize,
    pub v0: RadialSpectrum,
    pub v1: RadialSpectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearNorms {
    pub t: f64,
    pub big_lambda: f64,
    pub l2: f64,
    pub energy: f64,
    pub nodes: usize,
}

const TOL: f64 = 1e-9;

/// ‖v(t)‖_{L²} and ‖(λ∇v, v_t)(t)‖_{L²} for the linear problem with data at
/// time 0.
pub fn linear_norm_radial(mu: f64, profile: &SpeedProfile, data: &RadialData, t: f64) -> Result<LinearNorms> {
    check_finite("t", t)?;
    if t < 0.0 {
        return domain(format!("t must be non-negative, got {t}"));
    }
    if !(1..=3).contains(&data.n) {
        return domain(format!("dimension must be 1, 2 or 3, got {}", data.n));
    }
    let orders = Orders::new(mu)?;
    let span = Span::new(profile, 0.0, t);
    let hi = data.v0.extent().max(data.v1.extent());
    let big_lambda = span.big_t;
    if hi == 0.0 {
        return Ok(LinearNorms { t, big_lambda, l2: 0.0, energy: 0.0, nodes: 0 });
    }
    let width_cap = 0.5 * data.v0.scale().min(data.v1.scale());
    let osc = std::f64::consts::PI / span.big_t;
    let mut edges = vec![0.0];
    let mut x = (1e-6 / span.big_t).min(hi);
    edges.push(x);
    while x < hi {
        x = (x * 1.33).min(x + osc.min(width_cap)).min(hi);
        edges.push(x);
    }
    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();

    let n = data.n;
    let lam = span.speed_t;
    let integrate = |gl: &GaussLegendre| -> (f64, f64) {
        panels
            .par_iter()
            .map(|&(a, b)| {
                let mut acc = (0.0, 0.0);
                for (r, w) in gl.mapped(a, b) {
                    let bs = orders.basis(span.big_s * r);
                    let bt = orders.basis(span.big_t * r);
                    let p = propagate(&orders, &span, r, &bs, &bt);
                    let (a0, a1) = (data.v0.eval(r), data.v1.eval(r));
                    let v = p[0] * a0 + p[1] * a1;
                    let dv = p[2] * a0 + p[3] * a1;
                    let jac = w * r.powi(n as i32 - 1);
                    acc.0 += jac * v * v;
                    acc.1 += jac * ((lam * r * v).powi(2) + dv * dv);
                }
                acc
            })
            .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1))
    };
    let fine = integrate(&GaussLegendre::new(16));
    let coarse = integrate(&GaussLegendre::new(12));
    for (f, c, name) in [(fine.0, coarse.0, "L2"), (fine.1, coarse.1, "energy")] {
        if (f - c).abs() > TOL * f.abs().max(1e-300) {
            return Err(Error::Quadrature(format!(
                "{name} integral at t = {t}: 16-point {f:e} vs 12-point {c:e} over {} panels",
                panels.len()
            )));
        }
    }
    let factor = sphere_area(n as u32) / (2.0 * std::f64::consts::PI).powi(n as i32);
    Ok(LinearNorms {
        t,
        big_lambda,
        l2: (factor * fine.0).sqrt(),
        energy: (factor * fine.1).sqrt(),
        nodes: panels.len() * 28,
    })
}
