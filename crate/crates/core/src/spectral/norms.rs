use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FieldState, Grid, Transform, WeightedNormSpec};
use crate::profiles::SpeedProfile;

/// A weight at the box corner beyond this counts as saturated.
const WEIGHT_CAP: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    pub l2: f64,
    pub h1: f64,
    /// ln ‖u‖_{L²(ω)}, finite even when the value itself overflows
    pub log_l2: f64,
    /// corner weight ≥ 1e300 or a non-finite result
    pub saturated: bool,
    /// the integrand is not negligible at the box boundary, so the value
    /// depends on the box and may diverge on the whole space
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub big_lambda: f64,
    /// (m, ‖u‖_{L^m})
    pub lm: Vec<(f64, f64)>,
    pub l2: f64,
    pub h1_seminorm: f64,
    pub ut_l2: f64,
    /// ‖(λ∇u, u_t)‖_{L²}
    pub energy: f64,
    pub linf: f64,
    pub weighted: Option<WeightedNorms>,
}

pub(crate) fn lebesgue(grid: &Grid, u: &[f64], m: f64) -> f64 {
    let dv = grid.cell_volume();
    if m == 2.0 {
        return (u.iter().map(|v| v * v).sum::<f64>() * dv).sqrt();
    }
    if m == 1.0 {
        return u.iter().map(|v| v.abs()).sum::<f64>() * dv;
    }
    (u.iter().map(|v| v.abs().powf(m)).sum::<f64>() * dv).powf(1.0 / m)
}

/// ‖∇u‖_{L²} from the spectrum by Parseval.
pub(crate) fn gradient_l2(grid: &Grid, u_hat: &[Complex64]) -> f64 {
    let s: f64 = u_hat
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let k = grid.wavevector(i);
            (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * z.norm_sqr()
        })
        .sum();
    (s * grid.cell_volume() / grid.len() as f64).sqrt()
}

/// ln Σ exp(a_i) without overflow.
fn log_sum_exp(a: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = a.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + a.map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn norms(tr: &Transform, state: &FieldState, profile: &SpeedProfile, m_list: &[f64], weighted: &WeightedNormSpec) -> NormSample {
    let grid = tr.grid();
    let lam = profile.speed(state.t);
    let big = profile.primitive(state.t);
    let h1 = gradient_l2(grid, state.u_hat());
    let ut_l2 = lebesgue(grid, state.ut(), 2.0);
    let weighted = weighted.enabled.then(|| weighted_norms(tr, state, weighted.mu, big));
    NormSample {
        t: state.t,
        big_lambda: big,
        lm: m_list.iter().map(|&m| (m, lebesgue(grid, state.u(), m))).collect(),
        l2: lebesgue(grid, state.u(), 2.0),
        h1_seminorm: h1,
        ut_l2,
        energy: ((lam * h1).powi(2) + ut_l2 * ut_l2).sqrt(),
        linf: state.linf(),
        weighted,
    }
}

/// L²(ω) and H¹(ω) norms for ω = exp((μ/2)|x|²/Λ²), with ‖u‖²_{L²(ω)} = ∫u²ω².
fn weighted_norms(tr: &Transform, state: &FieldState, mu: f64, big: f64) -> WeightedNorms {
    let grid = tr.grid();
    let n = grid.dim();
    let psi: Vec<f64> = (0..grid.len()).map(|i| 0.5 * mu * grid.radius2(i) / (big * big)).collect();
    let ln_dv = grid.cell_volume().ln();

    let mut grads = Vec::with_capacity(n);
    for a in 0..n {
        let spec: Vec<Complex64> = state
            .u_hat()
            .iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::new(0.0, grid.wavevector(i)[a]))
            .collect();
        let mut g = vec![0.0; grid.len()];
        tr.inverse_real(&spec, &mut g);
        grads.push(g);
    }
    let grad2: Vec<f64> = (0..grid.len()).map(|i| grads.iter().map(|g| g[i] * g[i]).sum()).collect();
    let u = state.u();

    let terms_u = (0..grid.len()).map(|i| (u[i] * u[i]).ln() + 2.0 * psi[i]);
    let terms_g = (0..grid.len()).map(|i| grad2[i].ln() + 2.0 * psi[i]);
    let lu = log_sum_exp(terms_u) + ln_dv;
    let lg = log_sum_exp(terms_g) + ln_dv;
    let log_l2 = 0.5 * lu;
    let log_h1 = 0.5 * (lu.max(lg) + (-(lu - lg).abs()).exp().ln_1p());

    let corner = 0.5 * mu * n as f64 * grid.half_width().powi(2) / (big * big);
    let l2 = log_l2.exp();
    let h1 = log_h1.exp();
    let saturated = corner >= WEIGHT_CAP.ln() || !l2.is_finite() || !h1.is_finite();

    // share of the integrand carried by the outermost cells of each axis
    let np = grid.points();
    let edge = |i: usize| {
        let ii = grid.unflatten(i);
        (0..n).any(|a| ii[a] == 0 || ii[a] == np - 1)
    };
    let l_edge = log_sum_exp((0..grid.len()).filter(|&i| edge(i)).map(|i| (u[i] * u[i]).ln() + 2.0 * psi[i])) + ln_dv;
    let truncated = l_edge.is_finite() && l_edge - lu > (1e-8f64).ln();

    WeightedNorms { l2, h1, log_l2, saturated, truncated }
}

/// 𝒟_m norm of (u, v): (‖u‖²_{L^m} + ‖u‖²_{H¹} + ‖v‖²_{L^m} + ‖v‖²_{L²})^{1/2}.
pub fn data_norm(tr: &Transform, u: &[f64], v: &[f64], m: f64) -> f64 {
    let grid = tr.grid();
    let gu = gradient_l2(grid, &tr.forward_real(u));
    let sq = |x: f64| x * x;
    (sq(lebesgue(grid, u, m)) + sq(lebesgue(grid, u, 2.0)) + sq(gu) + sq(lebesgue(grid, v, m)) + sq(lebesgue(grid, v, 2.0)))
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightIdentity {
    /// max |μ(λ/Λ)ψ_t + |λ∇ψ|²| over the grid, relative to max |λ∇ψ|²
    pub residual: f64,
    pub max_psi_t: f64,
}

/// Check of μ(λ/Λ)ψ_t = −|λ∇ψ|² for ψ = (μ/2)|x|²/Λ(t)².
pub fn weight_identity_residual(profile: &SpeedProfile, mu: f64, grid: &Grid, t: f64) -> WeightIdentity {
    let lam = profile.speed(t);
    let big = profile.primitive(t);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut max_psi_t = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        let ii = grid.unflatten(i);
        let x: Vec<f64> = (0..grid.dim()).map(|a| grid.coord(ii[a])).collect();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let psi_t = -mu * r2 * lam / big.powi(3);
        let grad2: f64 = x.iter().map(|v| (lam * mu * v / (big * big)).powi(2)).sum();
        worst = worst.max((mu * lam / big * psi_t + grad2).abs());
        scale = scale.max(grad2);
        max_psi_t = max_psi_t.max(psi_t);
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    WeightIdentity { residual, max_psi_t }
}
