//! Exact Fourier multipliers of the linear problem
//! v_tt − λ(t)²Δv + b(t)v_t = 0 with data given at time s.
//!
//! With ρ = (1−μ)/2, σ = Λ(s)|ξ| and τ = Λ(t)|ξ|, every multiplier is a
//! prefactor times
//!
//!   Ψ_{k,r,δ} = (iπ/4)|ξ|^k [H⁻_r(σ)H⁺_{r+δ}(τ) − H⁺_r(σ)H⁻_{r+δ}(τ)]
//!             = −(π/2)|ξ|^k [J_r(σ)Y_{r+δ}(τ) − Y_r(σ)J_{r+δ}(τ)],
//!
//! which is real. When both orders are non-positive and δ is an integer the
//! determinant is evaluated at the mirrored orders −r, −r−δ, where J and Y do
//! not share their growth at the origin.

pub mod bounds;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_finite, domain, Result};
use crate::ode::{self, BsOptions};
use crate::profiles::{damping, SpeedProfile};
use crate::specfun::{self, jy_pair, jy_real, MAX_ORDER};

pub use bounds::{certify_zone_bounds, BoundEntry, BoundReport, RatioSample, SampleSpec};

pub const DEFAULT_K: f64 = 0.5;

pub fn rho_of(mu: f64) -> f64 {
    (1.0 - mu) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModePoint {
    pub s: f64,
    pub t: f64,
    pub xi: f64,
    pub sigma: f64,
    pub tau: f64,
}

impl ModePoint {
    pub fn new(profile: &SpeedProfile, s: f64, t: f64, xi: f64) -> Result<Self> {
        check_times(s, t)?;
        check_finite("xi", xi)?;
        if xi <= 0.0 {
            return domain(format!("xi must be positive, got {xi}"));
        }
        Ok(Self { s, t, xi, sigma: profile.primitive(s) * xi, tau: profile.primitive(t) * xi })
    }
}

fn check_times(s: f64, t: f64) -> Result<()> {
    check_finite("s", s)?;
    check_finite("t", t)?;
    if s < 0.0 || t < s {
        return domain(format!("need 0 <= s <= t, got s = {s}, t = {t}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierValues {
    pub phi0: Complex64,
    pub phi1: Complex64,
    pub dphi0: Complex64,
    pub dphi1: Complex64,
}

impl MultiplierValues {
    fn from_real(v: [f64; 4]) -> Self {
        let c = |x| Complex64::new(x, 0.0);
        Self { phi0: c(v[0]), phi1: c(v[1]), dphi0: c(v[2]), dphi1: c(v[3]) }
    }

    pub fn as_real(&self) -> [f64; 4] {
        [self.phi0.re, self.phi1.re, self.dphi0.re, self.dphi1.re]
    }
}

/// Ψ_{k,r,δ} at a mode point.
pub fn psi_det(k: f64, r: f64, delta: f64, point: &ModePoint) -> Result<Complex64> {
    check_finite("k", k)?;
    check_finite("r", r)?;
    check_finite("delta", delta)?;
    let r2 = r + delta;
    for order in [r, r2] {
        if order.abs() > MAX_ORDER {
            return Err(crate::Error::UnsupportedOrder(order));
        }
    }
    if !(point.sigma > 0.0 && point.tau >= point.sigma) {
        return domain("mode point needs 0 < sigma <= tau");
    }
    let mirrored = r <= 0.0 && r2 <= 0.0 && delta.fract() == 0.0;
    let (a, b, sign) = if mirrored {
        let sign = if (delta as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        (-r, -r2, sign)
    } else {
        (r, r2, 1.0)
    };
    let hs = specfun::hankel_pair(a, point.sigma)?;
    let ht = specfun::hankel_pair(b, point.tau)?;
    let det = hs.h_minus * ht.h_plus - hs.h_plus * ht.h_minus;
    Ok(Complex64::new(0.0, std::f64::consts::FRAC_PI_4) * point.xi.powf(k) * det * sign)
}

/// J and Y at the orders ρ−1 ("lo") and ρ ("hi") at one argument. In the
/// mirrored case the lo slot holds −J_{1−ρ}, −Y_{1−ρ}, which leaves every
/// lo/hi determinant unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Basis {
    pub j_lo: f64,
    pub y_lo: f64,
    pub j_hi: f64,
    pub y_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Orders {
    pub mu: f64,
    pub rho: f64,
}

impl Orders {
    pub fn new(mu: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        let rho = rho_of(mu);
        if (rho - 1.0).abs() > MAX_ORDER || rho.abs() > MAX_ORDER {
            return Err(crate::Error::UnsupportedOrder(if rho > 0.0 { rho } else { rho - 1.0 }));
        }
        Ok(Self { mu, rho })
    }

    pub fn basis(&self, x: f64) -> Basis {
        if self.rho <= 0.0 {
            let (a, b) = jy_pair(-self.rho, x);
            Basis { j_lo: -b.j, y_lo: -b.y, j_hi: a.j, y_hi: a.y }
        } else {
            let lo = jy_real(self.rho - 1.0, x);
            let hi = jy_real(self.rho, x);
            Basis { j_lo: lo.j, y_lo: lo.y, j_hi: hi.j, y_hi: hi.y }
        }
    }
}

/// Profile quantities at the two times of a propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Span {
    pub speed_s: f64,
    pub speed_t: f64,
    pub big_s: f64,
    pub big_t: f64,
}

impl Span {
    pub fn new(profile: &SpeedProfile, s: f64, t: f64) -> Self {
        Self {
            speed_s: profile.speed(s),
            speed_t: profile.speed(t),
            big_s: profile.primitive(s),
            big_t: profile.primitive(t),
        }
    }
}

/// Below this τ the ξ = 0 limit is exact to rounding.
const TINY_TAU: f64 = 1e-12;

/// [Φ₀, Φ₁, ∂ₜΦ₀, ∂ₜΦ₁] from bases evaluated at σ and τ.
pub(crate) fn propagate(orders: &Orders, span: &Span, xi: f64, bs: &Basis, bt: &Basis) -> [f64; 4] {
    if xi == 0.0 || span.big_t * xi < TINY_TAU {
        return zero_mode(orders.mu, span);
    }
    let det = |aj: f64, ay: f64, bj: f64, by: f64| aj * by - ay * bj;
    let pref = -std::f64::consts::FRAC_PI_2 * span.big_s * (span.big_t / span.big_s).powf(orders.rho);
    let d_lo_hi = det(bs.j_lo, bs.y_lo, bt.j_hi, bt.y_hi);
    let d_hi_hi = det(bs.j_hi, bs.y_hi, bt.j_hi, bt.y_hi);
    let d_lo_lo = det(bs.j_lo, bs.y_lo, bt.j_lo, bt.y_lo);
    let d_hi_lo = det(bs.j_hi, bs.y_hi, bt.j_lo, bt.y_lo);
    [
        pref * xi * d_lo_hi,
        -pref / span.speed_s * d_hi_hi,
        span.speed_t * pref * xi * xi * d_lo_lo,
        -span.speed_t / span.speed_s * pref * xi * d_hi_lo,
    ]
}

/// Solutions of v″ + b v′ = 0: v = const, and v′ ∝ λ Λ^{−μ}.
pub(crate) fn zero_mode(mu: f64, span: &Span) -> [f64; 4] {
    let l = (span.big_t / span.big_s).ln();
    let ratio_mu = (-mu * l).exp();
    let x = (1.0 - mu) * l;
    let e = if x.abs() < 1e-300 { 1.0 } else { x.exp_m1() / x };
    let phi1 = span.big_s / span.speed_s * l * e;
    [1.0, phi1, 0.0, span.speed_t / span.speed_s * ratio_mu]
}

/// Φ₀, Φ₁, ∂ₜΦ₀, ∂ₜΦ₁ at (t, s, ξ).
pub fn phi_values(mu: f64, profile: &SpeedProfile, s: f64, t: f64, xi: f64) -> Result<MultiplierValues> {
    check_times(s, t)?;
    check_finite("xi", xi)?;
    if xi < 0.0 {
        return domain(format!("xi must be non-negative, got {xi}"));
    }
    let orders = Orders::new(mu)?;
    let span = Span::new(profile, s, t);
    if xi == 0.0 || span.big_t * xi < TINY_TAU {
        return Ok(MultiplierValues::from_real(zero_mode(mu, &span)));
    }
    let bs = orders.basis(span.big_s * xi);
    let bt = orders.basis(span.big_t * xi);
    Ok(MultiplierValues::from_real(propagate(&orders, &span, xi, &bs, &bt)))
}

/// Integrate v̂″ + λ²ξ²v̂ + b v̂′ = 0 from (w0, w1) at time s to time t.
pub fn mode_ode_oracle(
    mu: f64,
    profile: &SpeedProfile,
    s: f64,
    t: f64,
    xi: f64,
    w0: Complex64,
    w1: Complex64,
) -> Result<(Complex64, Complex64)> {
    check_times(s, t)?;
    check_finite("xi", xi)?;
    check_finite("mu", mu)?;
    if xi < 0.0 {
        return domain(format!("xi must be non-negative, got {xi}"));
    }
    // v̂′ is carried as z = v̂′/κ with κ = √(1 + λ²ξ²), so both components
    // have comparable size and the error can be measured against the state norm
    let xi2 = xi * xi;
    let kappa = |tt: f64| (1.0 + profile.speed(tt).powi(2) * xi2).sqrt();
    let rhs = |tt: f64, y: &[f64], d: &mut [f64]| {
        let lam = profile.speed(tt);
        let b = damping(profile, mu, tt);
        let k2 = lam * lam * xi2;
        let k = (1.0 + k2).sqrt();
        let dk = profile.log_derivative(tt) * k2 / (1.0 + k2);
        for c in 0..2 {
            d[c] = k * y[2 + c];
            d[2 + c] = -k2 / k * y[c] - (b + dk) * y[2 + c];
        }
    };
    let lam_s = profile.speed(s);
    let (ks, kt) = (kappa(s), kappa(t));
    let opts = BsOptions {
        rtol: 1e-13,
        atol: 1e-300,
        // start below one oscillation period
        h_init: f64::min((t - s) / 16.0, 0.1 / (lam_s * xi).max(1e-3)).max(1e-12),
        state_norm: true,
        ..BsOptions::default()
    };
    let y = ode::integrate(rhs, s, &[w0.re, w0.im, w1.re / ks, w1.im / ks], t, opts)?;
    let (w0, w1) = (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]) * kt);
    Ok((w0, w1))
}

/// Multipliers next to the mode-ODE oracle at one (s, t, ξ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    /// Φ₀, Φ₁, ∂ₜΦ₀, ∂ₜΦ₁
    pub values: [f64; 4],
    pub oracle: [f64; 4],
    /// largest error over the oscillation envelope √(v² + (v′/λξ)²), so
    /// zeros of an oscillating multiplier do not inflate it
    pub rel_err: f64,
}

pub fn oracle_check(mu: f64, profile: &SpeedProfile, s: f64, t: f64, xi: f64) -> Result<OracleCheck> {
    let values = phi_values(mu, profile, s, t, xi)?.as_real();
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let (a, da) = mode_ode_oracle(mu, profile, s, t, xi, one, zero)?;
    let (b, db) = mode_ode_oracle(mu, profile, s, t, xi, zero, one)?;
    let oracle = [a.re, b.re, da.re, db.re];
    let freq = (profile.speed(t) * xi).max(1e-300);
    let mut rel_err: f64 = 0.0;
    for k in 0..2 {
        let env = (oracle[k].powi(2) + (oracle[k + 2] / freq).powi(2)).sqrt().max(1e-300);
        rel_err = rel_err.max((values[k] - oracle[k]).abs() / env);
        rel_err = rel_err.max((values[k + 2] - oracle[k + 2]).abs() / (env * freq));
    }
    Ok(OracleCheck { values, oracle, rel_err })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Zone {
    I1,
    I2,
    I3,
}

/// I1: |ξ| ≥ K/Λ(s); I3: |ξ| < K/Λ(t); I2 otherwise. Boundaries go to the
/// lower-indexed zone.
pub fn classify_zone(k: f64, profile: &SpeedProfile, s: f64, t: f64, xi: f64) -> Zone {
    if xi >= k / profile.primitive(s) {
        Zone::I1
    } else if xi >= k / profile.primitive(t) {
        Zone::I2
    } else {
        Zone::I3
    }
}
