//! Time-dependent propagation speeds λ(t), their primitives Λ(t) and the
//! scale-invariant damping coefficient b(t) = μλ/Λ − λ′/λ.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    Polynomial,
    Exponential,
    Tabulated,
}

/// A speed profile. Built-in kinds satisfy λ′/λ = αλ/Λ exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    shape: Shape,
    lambda0: f64,
    // difference between lambda0 and the closed-form default
    offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Constant,
    Polynomial { q: f64 },
    Exponential { r: f64 },
    Tabulated(Pchip),
}

impl SpeedProfile {
    pub fn constant() -> Self {
        Self { shape: Shape::Constant, lambda0: 1.0, offset: 0.0 }
    }

    /// λ(t) = (1+t)^{q−1}, Λ(t) = (1+t)^q/q.
    pub fn polynomial(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return domain(format!("polynomial exponent q must be positive, got {q}"));
        }
        Ok(Self { shape: Shape::Polynomial { q }, lambda0: 1.0 / q, offset: 0.0 })
    }

    /// λ(t) = e^{rt}, Λ(t) = e^{rt}/r.
    pub fn exponential(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return domain(format!("exponential rate r must be positive, got {r}"));
        }
        Ok(Self { shape: Shape::Exponential { r }, lambda0: 1.0 / r, offset: 0.0 })
    }

    /// Monotone cubic interpolant through `(t, λ)` samples. The first node must
    /// sit at t = 0; beyond the last node λ is held constant.
    pub fn tabulated(table: &[(f64, f64)], lambda0: f64) -> Result<Self> {
        let pchip = Pchip::new(table)?;
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return domain(format!("lambda0 must be positive, got {lambda0}"));
        }
        Ok(Self { shape: Shape::Tabulated(pchip), lambda0, offset: 0.0 })
    }

    /// Replace Λ(0). Only the additive constant in Λ changes.
    pub fn with_lambda0(mut self, lambda0: f64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return domain(format!("lambda0 must be positive, got {lambda0}"));
        }
        let default = match self.shape {
            Shape::Constant => 1.0,
            Shape::Polynomial { q } => 1.0 / q,
            Shape::Exponential { r } => 1.0 / r,
            Shape::Tabulated(_) => lambda0,
        };
        self.lambda0 = lambda0;
        self.offset = lambda0 - default;
        Ok(self)
    }

    pub fn kind(&self) -> ProfileKind {
        match self.shape {
            Shape::Constant => ProfileKind::Constant,
            Shape::Polynomial { .. } => ProfileKind::Polynomial,
            Shape::Exponential { .. } => ProfileKind::Exponential,
            Shape::Tabulated(_) => ProfileKind::Tabulated,
        }
    }

    pub fn q(&self) -> Option<f64> {
        match self.shape {
            Shape::Polynomial { q } => Some(q),
            _ => None,
        }
    }

    pub fn r(&self) -> Option<f64> {
        match self.shape {
            Shape::Exponential { r } => Some(r),
            _ => None,
        }
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn table(&self) -> Option<Vec<(f64, f64)>> {
        match &self.shape {
            Shape::Tabulated(p) => Some(p.t.iter().copied().zip(p.y.iter().copied()).collect()),
            _ => None,
        }
    }

    /// Exponent in λ = CΛ^α. Only defined for built-in kinds with the default λ₀.
    pub fn alpha(&self) -> Option<f64> {
        if self.offset != 0.0 {
            return None;
        }
        match self.shape {
            Shape::Constant => Some(0.0),
            Shape::Polynomial { q } => Some((q - 1.0) / q),
            Shape::Exponential { .. } => Some(1.0),
            Shape::Tabulated(_) => None,
        }
    }

    /// λ(t), unchecked.
    pub fn speed(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Constant => 1.0,
            Shape::Polynomial { q } => (1.0 + t).powf(q - 1.0),
            Shape::Exponential { r } => (r * t).exp(),
            Shape::Tabulated(p) => p.eval(t),
        }
    }

    /// Λ(t), unchecked.
    pub fn primitive(&self, t: f64) -> f64 {
        let base = match &self.shape {
            Shape::Constant => 1.0 + t,
            Shape::Polynomial { q } => (1.0 + t).powf(*q) / q,
            Shape::Exponential { r } => (r * t).exp() / r,
            Shape::Tabulated(p) => self.lambda0 + p.integral(t),
        };
        match self.shape {
            Shape::Tabulated(_) => base,
            _ => base + self.offset,
        }
    }

    /// λ′(t)/λ(t). Analytic for built-ins, central differences for tables.
    pub fn log_derivative(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Constant => 0.0,
            Shape::Polynomial { q } => (q - 1.0) / (1.0 + t),
            Shape::Exponential { r } => *r,
            Shape::Tabulated(p) => {
                let h = f64::max(1e-6, 1e-8 * t);
                (p.eval(t + h) - p.eval(t - h)) / (2.0 * h) / p.eval(t)
            }
        }
    }

    /// Inverse of Λ: the time at which Λ(t) = `big_lambda`.
    pub fn time_at_primitive(&self, big_lambda: f64) -> Result<f64> {
        check_finite("Lambda", big_lambda)?;
        if big_lambda < self.lambda0 {
            return domain(format!("Lambda = {big_lambda} is below Lambda(0) = {}", self.lambda0));
        }
        let t = match &self.shape {
            Shape::Constant => big_lambda - self.lambda0,
            Shape::Polynomial { q } => (q * (big_lambda - self.offset)).powf(1.0 / q) - 1.0,
            Shape::Exponential { r } => (r * (big_lambda - self.offset)).ln() / r,
            Shape::Tabulated(_) => {
                let mut hi = 1.0;
                while self.primitive(hi) < big_lambda {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return domain("Lambda inverse out of range");
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.primitive(mid) < big_lambda {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        };
        Ok(t.max(0.0))
    }
}

fn check_time(t: f64) -> Result<()> {
    check_finite("t", t)?;
    if t < 0.0 {
        return domain(format!("t must be non-negative, got {t}"));
    }
    Ok(())
}

pub fn lambda_at(profile: &SpeedProfile, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(profile.speed(t))
}

#[allow(non_snake_case)]
pub fn Lambda_at(profile: &SpeedProfile, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(profile.primitive(t))
}

/// Structural damping parameter μ, optionally recorded with the raw ν it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingSpec {
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl DampingSpec {
    pub fn from_mu(mu: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        Ok(Self { mu, nu: None })
    }

    /// Convert the raw coefficient of the damping term into μ.
    ///
    /// For the exponential family b(t) = ν exactly when μ = ν/r + 1.
    pub fn from_nu(profile: &SpeedProfile, nu: f64) -> Result<Self> {
        check_finite("nu", nu)?;
        let mu = match profile.shape {
            Shape::Constant => nu,
            Shape::Polynomial { q } => (nu - 1.0) / q + 1.0,
            Shape::Exponential { r } => nu / r + 1.0,
            Shape::Tabulated(_) => {
                return domain("nu is only defined for built-in profile kinds; give mu instead")
            }
        };
        Ok(Self { mu, nu: Some(nu) })
    }
}

/// b(t) = μλ/Λ − λ′/λ.
pub fn damping_at(profile: &SpeedProfile, spec: &DampingSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(damping(profile, spec.mu, t))
}

pub(crate) fn damping(profile: &SpeedProfile, mu: f64, t: f64) -> f64 {
    mu * profile.speed(t) / profile.primitive(t) - profile.log_derivative(t)
}

/// Whether λ′/λ + b ≥ 0 for all t ≥ 0.
pub fn dissipativity_check(profile: &SpeedProfile, spec: &DampingSpec) -> bool {
    match profile.shape {
        Shape::Tabulated(_) => {
            let mut ok = true;
            for k in 0..=240 {
                let t = if k == 0 { 0.0 } else { 10f64.powf(-6.0 + 12.0 * (k as f64) / 240.0) };
                let sum = profile.log_derivative(t) + damping(profile, spec.mu, t);
                let scale = profile.log_derivative(t).abs() + 1e-300;
                ok &= sum >= -1e-9 * scale;
            }
            ok && spec.mu >= 0.0
        }
        _ => spec.mu >= 0.0,
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes, plus its
/// exact running integral.
#[derive(Debug, Clone, PartialEq)]
struct Pchip {
    t: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Pchip {
    fn new(table: &[(f64, f64)]) -> Result<Self> {
        if table.len() < 2 {
            return domain("tabulated profile needs at least two (t, lambda) samples");
        }
        let t: Vec<f64> = table.iter().map(|p| p.0).collect();
        let y: Vec<f64> = table.iter().map(|p| p.1).collect();
        if t[0] != 0.0 {
            return domain("tabulated profile must start at t = 0");
        }
        for w in t.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return domain("tabulated times must be finite and strictly increasing");
            }
        }
        if y.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return domain("tabulated speeds must be finite and positive");
        }
        let n = t.len();
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        let mut cumulative = vec![0.0; n];
        for k in 0..n - 1 {
            // Simpson is exact on cubics.
            let mid = hermite(y[k], y[k + 1], d[k], d[k + 1], h[k], 0.5 * h[k]);
            cumulative[k + 1] = cumulative[k] + h[k] / 6.0 * (y[k] + 4.0 * mid + y[k + 1]);
        }
        Ok(Self { t, y, d, cumulative })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.t.len();
        match self.t.partition_point(|&tk| tk <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x >= self.t[n - 1] {
            return self.y[n - 1];
        }
        let k = self.segment(x);
        let h = self.t[k + 1] - self.t[k];
        hermite(self.y[k], self.y[k + 1], self.d[k], self.d[k + 1], h, x - self.t[k])
    }

    fn integral(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x >= self.t[n - 1] {
            return self.cumulative[n - 1] + (x - self.t[n - 1]) * self.y[n - 1];
        }
        let k = self.segment(x);
        let h = self.t[k + 1] - self.t[k];
        let s = x - self.t[k];
        let f = |z| hermite(self.y[k], self.y[k + 1], self.d[k], self.d[k + 1], h, z);
        self.cumulative[k] + s / 6.0 * (f(0.0) + 4.0 * f(0.5 * s) + f(s))
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let mut d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        d = 0.0;
    } else if del0 * del1 <= 0.0 && d.abs() > (3.0 * del0).abs() {
        d = 3.0 * del0;
    }
    d
}

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let u = s / h;
    let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
    let h10 = u * (1.0 - u) * (1.0 - u);
    let h01 = u * u * (3.0 - 2.0 * u);
    let h11 = u * u * (u - 1.0);
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}
