//! Bessel functions J_ν, Y_ν of real order and positive argument, and the
//! Hankel pair H±_ν = J_ν ± iY_ν.
//!
//! Small arguments use Temme's series for Y and the power series for J
//! (x < 2). Moderate arguments use the CF1 ratio, downward recurrence and
//! Steed's CF2 normalisation (x ≥ 2). Large arguments use the Hankel asymptotic expansion. Negative
//! orders go through the reflection formulas with exact sin/cos of multiples
//! of π.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};

pub const MAX_ORDER: f64 = 10.0;

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-290;
const MAXIT: usize = 100_000;

/// Values and derivatives of J_ν and Y_ν at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselJY {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

/// H±_ν(τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelPair {
    pub h_plus: Complex64,
    pub h_minus: Complex64,
}

fn check_args(nu: f64, tau: f64) -> Result<()> {
    if !nu.is_finite() {
        return domain(format!("Bessel order must be finite, got {nu}"));
    }
    if nu.abs() > MAX_ORDER {
        return Err(Error::UnsupportedOrder(nu));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return domain(format!("Bessel argument must be positive and finite, got {tau}"));
    }
    Ok(())
}

pub fn bessel_jy(nu: f64, tau: f64) -> Result<BesselJY> {
    check_args(nu, tau)?;
    Ok(jy_real(nu, tau))
}

pub fn bessel_j(nu: f64, tau: f64) -> Result<f64> {
    bessel_jy(nu, tau).map(|v| v.j)
}

pub fn bessel_y(nu: f64, tau: f64) -> Result<f64> {
    bessel_jy(nu, tau).map(|v| v.y)
}

pub fn hankel_pair(nu: f64, tau: f64) -> Result<HankelPair> {
    let v = bessel_jy(nu, tau)?;
    let h_plus = Complex64::new(v.j, v.y);
    Ok(HankelPair { h_plus, h_minus: h_plus.conj() })
}

/// J, Y at any real order (no range checks).
pub(crate) fn jy_real(nu: f64, x: f64) -> BesselJY {
    if nu >= 0.0 {
        return jy_pair(nu, x).0;
    }
    let a = -nu;
    let v = jy_pair(a, x).0;
    let (s, c) = sin_cos_pi(a);
    BesselJY {
        j: c * v.j - s * v.y,
        y: s * v.j + c * v.y,
        jp: c * v.jp - s * v.yp,
        yp: s * v.jp + c * v.yp,
    }
}

/// (sin πa, cos πa), exact at multiples of 1/2.
pub(crate) fn sin_cos_pi(a: f64) -> (f64, f64) {
    let mut r = a - 2.0 * (a / 2.0).floor();
    let mut sign = 1.0;
    if r >= 1.0 {
        r -= 1.0;
        sign = -1.0;
    }
    // r in [0, 1)
    let (s, c) = if r == 0.0 {
        (0.0, 1.0)
    } else if r == 0.5 {
        (1.0, 0.0)
    } else if r < 0.25 {
        ((PI * r).sin(), (PI * r).cos())
    } else if r < 0.75 {
        let d = 0.5 - r;
        ((PI * d).cos(), (PI * d).sin())
    } else {
        let d = 1.0 - r;
        ((PI * d).sin(), -(PI * d).cos())
    };
    (sign * s, sign * c)
}

/// Values at orders ν and ν+1 for ν ≥ 0, x > 0.
pub(crate) fn jy_pair(nu: f64, x: f64) -> (BesselJY, BesselJY) {
    let (j0, y0, j1, y1) = if x >= asymptotic_threshold(nu + 1.0) {
        let (j0, y0) = hankel_asymptotic(nu, x);
        let (j1, y1) = hankel_asymptotic(nu + 1.0, x);
        (j0, y0, j1, y1)
    } else {
        temme_steed(nu + 1.0, x)
    };
    let xi = 1.0 / x;
    let lo = BesselJY { j: j0, y: y0, jp: nu * xi * j0 - j1, yp: nu * xi * y0 - y1 };
    let hi = BesselJY {
        j: j1,
        y: y1,
        jp: j0 - (nu + 1.0) * xi * j1,
        yp: y0 - (nu + 1.0) * xi * y1,
    };
    (lo, hi)
}

/// Argument above which the Hankel expansion reaches full double precision
/// for orders up to `order`.
pub(crate) fn asymptotic_threshold(order: f64) -> f64 {
    f64::max(20.0, order * order)
}

fn hankel_asymptotic(nu: f64, x: f64) -> (f64, f64) {
    let mu4 = 4.0 * nu * nu;
    let inv8x = 1.0 / (8.0 * x);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu4 - odd * odd) * inv8x / k as f64;
        let mag = term.abs();
        if k > 2 && mag > prev {
            break;
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            let sign = if ((k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        }
        if mag < 1e-17 * (p.abs() + q.abs()) {
            break;
        }
        prev = mag;
    }
    // χ = x − (ν/2 + 1/4)π
    let (sp, cp) = sin_cos_pi(0.5 * nu + 0.25);
    let (sx, cx) = x.sin_cos();
    let cchi = cx * cp + sx * sp;
    let schi = sx * cp - cx * sp;
    let amp = (FRAC_2_PI / x).sqrt();
    (amp * (p * cchi - q * schi), amp * (p * schi + q * cchi))
}

/// Taylor coefficients of 1/Γ(z) = Σ c_k z^k, k = 1..30.
const RGAMMA: [f64; 30] = [
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
    1.7144063219273374334e-20,
];

/// Temme's auxiliary functions for |x| ≤ 1/2:
/// gam1 = (1/Γ(1−x) − 1/Γ(1+x))/(2x), gam2 = (1/Γ(1−x) + 1/Γ(1+x))/2,
/// plus 1/Γ(1+x) and 1/Γ(1−x).
fn temme_gammas(x: f64) -> (f64, f64, f64, f64) {
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let x2 = x * x;
    // Horner from the top in powers of x².
    for k in (0..15).rev() {
        // c_{2k+2} x^{2k}, c_{2k+1} x^{2k}
        gam1 = gam1 * x2 + RGAMMA[2 * k + 1];
        gam2 = gam2 * x2 + RGAMMA[2 * k];
    }
    let gam1 = -gam1;
    let gampl = gam2 - x * gam1;
    let gammi = gam2 + x * gam1;
    (gam1, gam2, gampl, gammi)
}

/// Values at orders `top − 1` and `top` for top ≥ 1, x below the asymptotic
/// threshold. Returns (J_{top−1}, Y_{top−1}, J_top, Y_top).
fn temme_steed(top: f64, x: f64) -> (f64, f64, f64, f64) {
    if x < 2.0 {
        temme_small(top, x)
    } else {
        steed(top, x)
    }
}

/// x < 2: Y from Temme's series at |xmu| ≤ 1/2 and upward recurrence, J from
/// its power series.
fn temme_small(top: f64, x: f64) -> (f64, f64, f64, f64) {
    let nl = ((top + 0.5) as usize).max(1);
    let xmu = top - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let x2 = 0.5 * x;
    let pimu = PI * xmu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = xmu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
    let mut ff = FRAC_2_PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let e = e.exp();
    let mut p = e / (gampl * PI);
    let mut q = 1.0 / (e * PI * gammi);
    let pimu2 = 0.5 * pimu;
    let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
    let r = PI * pimu2 * fact3 * fact3;
    let mut c = 1.0;
    let d = -x2 * x2;
    let mut sum = ff + r * q;
    let mut sum1 = p;
    for i in 1..MAXIT {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - xmu2);
        c *= d / fi;
        p /= fi - xmu;
        q /= fi + xmu;
        let del = c * (ff + r * q);
        sum += del;
        let del1 = c * p - fi * del;
        sum1 += del1;
        if del.abs() < (1.0 + sum.abs()) * EPS {
            break;
        }
    }
    let mut ymu = -sum;
    let mut y1 = -sum1 * xi2;
    for i in 1..nl {
        let ytemp = (xmu + i as f64) * xi2 * y1 - ymu;
        ymu = y1;
        y1 = ytemp;
    }

    // 1/Γ(top) and 1/Γ(top + 1) from 1/Γ(1 + xmu).
    let mut rg_below = gampl;
    for i in 1..nl {
        rg_below /= xmu + i as f64;
    }
    let rg_top = rg_below / top;
    let j_below = j_series(top - 1.0, x, rg_below);
    let j_top = j_series(top, x, rg_top);
    (j_below, ymu, j_top, y1)
}

/// J_ν(x) = (x/2)^ν/Γ(ν+1) Σ (−x²/4)^k / (k! (ν+1)_k), for ν > −1, small x.
fn j_series(nu: f64, x: f64, rgamma_nu1: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let fk = k as f64;
        term *= z / (fk * (nu + fk));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (0.5 * x).powf(nu) * rgamma_nu1 * sum
}

/// x ≥ 2: CF1 and downward recurrence for J, Steed's CF2 for the
/// normalisation and Y, upward recurrence for Y.
fn steed(top: f64, x: f64) -> (f64, f64, f64, f64) {
    let nl = (((top - x + 1.5).max(0.0)) as usize).max(1);
    let xmu = top - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: f = J'_top / J_top.
    let mut isign = 1.0;
    let mut h = (top * xi).max(FPMIN);
    let mut b = xi2 * top;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            break;
        }
    }

    // Downward recurrence to order xmu, unnormalised.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl_top = rjl;
    let mut rjl_below = 0.0;
    let mut fact = top * xi;
    for l in (1..=nl).rev() {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if l == nl {
            rjl_below = rjl;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2: p + iq = (J' + iY')/(J + iY) at order xmu.
    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for i in 2..MAXIT {
        a += 2.0 * (i - 1) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            break;
        }
    }
    let gam = (p - f) / q;
    let mut rjmu = (w / ((p - f) * gam + q)).sqrt();
    if rjl < 0.0 {
        rjmu = -rjmu;
    }
    let mut rymu = rjmu * gam;
    let rymup = rymu * (p + q / gam);
    let mut ry1 = xmu * xi * rymu - rymup;

    let scale = rjmu / rjl;
    for i in 1..nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    (rjl_below * scale, rymu, rjl_top * scale, ry1)
}

/// One row of the identity self-test table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SelftestRow {
    pub nu: f64,
    pub tau: f64,
    pub j: f64,
    pub y: f64,
    /// |J Y′ − J′ Y − 2/(πτ)| / (2/(πτ))
    pub wronskian: f64,
    /// the same residual over |J Y′| + |J′ Y|, the scale of the cancellation
    pub wronskian_cond: f64,
    /// |τ²J″ + τJ′ + (τ² − ν²)J| / max(1, |J|), derivatives by recurrence
    pub ode: f64,
    /// |H⁻ − conj(H⁺)|
    pub conjugacy: f64,
}

/// Recurrence-based residual rows over a fixed (ν, τ) sample.
pub fn selftest_table() -> Vec<SelftestRow> {
    let orders = [-9.5, -3.7, -1.0, -0.5, 0.0, 0.3, 0.5, 1.0, 2.5, 4.0, 7.25, 10.0];
    let args = [1e-6, 1e-3, 0.1, 1.0, 2.0, 5.5, 20.0, 37.0, 150.0, 1e3, 1e4];
    let mut rows = Vec::new();
    for &nu in &orders {
        for &tau in &args {
            rows.push(selftest_row(nu, tau));
        }
    }
    rows
}

pub fn selftest_row(nu: f64, tau: f64) -> SelftestRow {
    let v = jy_real(nu, tau);
    let w = 2.0 / (PI * tau);
    let resid = ((v.j * v.yp - v.jp * v.y) - w).abs();
    let wronskian = resid / w;
    let wronskian_cond = resid / f64::max(w, (v.j * v.yp).abs() + (v.jp * v.y).abs());
    // J″ from differentiating C′ = C_{ν−1} − (ν/τ)C.
    let below = jy_real(nu - 1.0, tau);
    let jpp = below.jp - nu / tau * v.jp + nu / (tau * tau) * v.j;
    let ode = (tau * tau * jpp + tau * v.jp + (tau * tau - nu * nu) * v.j).abs()
        / f64::max(1.0, v.j.abs())
        / f64::max(1.0, tau * tau);
    let h = Complex64::new(v.j, v.y);
    let conjugacy = (h.conj() - Complex64::new(v.j, -v.y)).norm();
    SelftestRow { nu, tau, j: v.j, y: v.y, wronskian, wronskian_cond, ode, conjugacy }
}
