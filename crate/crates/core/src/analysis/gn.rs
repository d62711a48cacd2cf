//! Empirical Gagliardo–Nirenberg ratios
//! R = ‖u‖_{L^q} / (‖u‖_{L²}^{1−θ}‖∇u‖_{L²}^θ) on random smooth fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exponents::theta_gn;
use crate::error::{domain, Result};
use crate::spectral::{Grid, Transform};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnSpec {
    pub n: usize,
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
    pub modes: usize,
    pub c_cap: f64,
    /// how many fields also go through the refinement and dilation checks
    pub checked: usize,
}

impl GnSpec {
    pub fn new(n: usize, q: f64, samples: usize, seed: u64) -> Self {
        Self { n, q, samples, seed, modes: 4, c_cap: 100.0, checked: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnReport {
    pub n: usize,
    pub q: f64,
    pub theta: f64,
    pub samples: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub mean_ratio: f64,
    pub argmax: usize,
    /// largest relative change of R under u → 5u
    pub amplitude_deviation: f64,
    /// largest relative change of R when the grid is refined twofold
    pub refinement_deviation: f64,
    /// largest relative change of R under x → x/2
    pub dilation_deviation: f64,
    pub c_cap: f64,
    pub bounded: bool,
    pub stable: bool,
}

/// Deviations up to this size count as invariant.
pub const STABILITY_TOL: f64 = 1e-4;

/// R on a grid, or None for a zero field.
pub fn gn_ratio(tr: &Transform, u: &[f64], q: f64) -> Result<Option<f64>> {
    let grid = tr.grid();
    let theta = theta_gn(q, grid.dim())?;
    let dv = grid.cell_volume();
    let lq = (u.iter().map(|v| v.abs().powf(q)).sum::<f64>() * dv).powf(1.0 / q);
    let l2 = (u.iter().map(|v| v * v).sum::<f64>() * dv).sqrt();
    let hat = tr.forward_real(u);
    let g2: f64 = hat
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let k = grid.wavevector(i);
            (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * z.norm_sqr()
        })
        .sum::<f64>()
        * dv
        / grid.len() as f64;
    if l2 == 0.0 || g2 == 0.0 {
        return Ok(None);
    }
    Ok(Some(lq / (l2.powf(1.0 - theta) * g2.sqrt().powf(theta))))
}

struct Field {
    modes: Vec<([f64; 3], f64, f64)>,
}

impl Field {
    fn random(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Self {
        let modes = (0..count)
            .map(|_| {
                let mut k = [0.0; 3];
                for c in k.iter_mut().take(n) {
                    *c = rng.random_range(-2.0..2.0);
                }
                (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        Self { modes }
    }

    /// Gaussian envelope of width `scale` times the mode mix, at x/scale.
    fn sample(&self, grid: &Grid, scale: f64) -> Vec<f64> {
        let n = grid.dim();
        (0..grid.len())
            .map(|i| {
                let ii = grid.unflatten(i);
                let x: Vec<f64> = (0..n).map(|a| grid.coord(ii[a]) / scale).collect();
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mix: f64 = self
                    .modes
                    .iter()
                    .map(|(k, a, ph)| a * ((0..n).map(|d| k[d] * x[d]).sum::<f64>() + ph).cos())
                    .sum();
                (-0.5 * r2).exp() * mix
            })
            .collect()
    }
}

fn base_grid(n: usize, refine: usize) -> Result<Grid> {
    let (points, half) = match n {
        1 => (256, 12.0),
        2 => (128, 12.0),
        3 => (64, 10.0),
        _ => return domain(format!("dimension must be 1, 2 or 3, got {n}")),
    };
    Grid::new(n, points * refine, half)
}

pub fn gn_verify(spec: &GnSpec) -> Result<GnReport> {
    let theta = theta_gn(spec.q, spec.n)?;
    if spec.samples == 0 {
        return domain("need at least one sample");
    }
    let coarse = Transform::new(base_grid(spec.n, 1)?);
    let fine = Transform::new(base_grid(spec.n, 2)?);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs();

    let mut ratios = Vec::with_capacity(spec.samples);
    let (mut skipped, mut amp_dev, mut ref_dev, mut dil_dev) = (0, 0.0f64, 0.0f64, 0.0f64);
    let mut argmax = 0;
    for i in 0..spec.samples {
        let field = Field::random(&mut rng, spec.n, spec.modes.max(1));
        let u = field.sample(coarse.grid(), 1.0);
        let Some(r) = gn_ratio(&coarse, &u, spec.q)? else {
            skipped += 1;
            continue;
        };
        let scaled: Vec<f64> = u.iter().map(|v| 5.0 * v).collect();
        if let Some(r5) = gn_ratio(&coarse, &scaled, spec.q)? {
            amp_dev = amp_dev.max(rel(r, r5));
        }
        if i < spec.checked {
            if let Some(rf) = gn_ratio(&fine, &field.sample(fine.grid(), 1.0), spec.q)? {
                ref_dev = ref_dev.max(rel(r, rf));
            }
            if let Some(rd) = gn_ratio(&fine, &field.sample(fine.grid(), 2.0), spec.q)? {
                dil_dev = dil_dev.max(rel(r, rd));
            }
        }
        if ratios.iter().all(|&m| r > m) {
            argmax = i;
        }
        ratios.push(r);
    }
    if ratios.is_empty() {
        return domain("every sampled field was zero");
    }
    let max_ratio = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min_ratio = ratios.iter().copied().fold(f64::MAX, f64::min);
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(GnReport {
        n: spec.n,
        q: spec.q,
        theta,
        samples: ratios.len(),
        skipped,
        max_ratio,
        min_ratio,
        mean_ratio,
        argmax,
        amplitude_deviation: amp_dev,
        refinement_deviation: ref_dev,
        dilation_deviation: dil_dev,
        c_cap: spec.c_cap,
        bounded: max_ratio.is_finite() && max_ratio <= spec.c_cap,
        stable: amp_dev.max(ref_dev).max(dil_dev) <= STABILITY_TOL,
    })
}
