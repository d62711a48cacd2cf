//! Pseudospectral solver for u_tt − λ(t)²Δu + b(t)u_t = f(t, u) on a
//! periodic box, advancing each Fourier mode with the exact linear propagator
//! and the source with a midpoint Duhamel rule.

mod grid;
mod norms;
mod radial;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::NormSeries;
use crate::config::RunConfig;
use crate::error::{check_finite, domain, Error, Result};
use crate::multipliers::{propagate, Basis, Orders, Span};
use crate::profiles::SpeedProfile;

pub use grid::{Grid, Transform};
pub use norms::{data_norm, norms, weight_identity_residual, NormSample, WeightIdentity, WeightedNorms};
pub use radial::{linear_norm_radial, LinearNorms, RadialData, RadialSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearForm {
    /// |u|^{p−1}u
    SignedPower,
    /// |u|^p
    AbsolutePower,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// (1+t)^γ
    Plain,
    /// λ(t)²Λ(t)^γ
    Structural,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub form: NonlinearForm,
    pub p: f64,
    pub gamma: f64,
    pub scaling: Scaling,
}

impl NonlinearitySpec {
    pub fn zero() -> Self {
        Self { form: NonlinearForm::Zero, p: 3.0, gamma: 0.0, scaling: Scaling::Plain }
    }

    /// Hard errors and admissibility warnings for dimension n.
    pub fn check(&self, n: usize) -> (Vec<String>, Vec<String>) {
        let (mut errors, mut warnings) = (Vec::new(), Vec::new());
        if !(self.p.is_finite() && self.p > 1.0) {
            errors.push(format!("nonlinearity.p must exceed 1, got {}", self.p));
        }
        if !(self.gamma.is_finite() && self.gamma >= -2.0) {
            errors.push(format!("nonlinearity.gamma must be >= -2, got {}", self.gamma));
        }
        if n >= 3 && self.form != NonlinearForm::Zero {
            let bound = 1.0 + 2.0 / (n as f64 - 2.0);
            if self.p > bound {
                warnings.push(format!(
                    "p = {} exceeds the energy-admissible bound p <= 1 + 2/(n-2) = {bound} for n = {n}",
                    self.p
                ));
            }
        }
        (errors, warnings)
    }

    pub fn prefactor(&self, profile: &SpeedProfile, t: f64) -> f64 {
        match self.scaling {
            Scaling::Plain => (1.0 + t).powf(self.gamma),
            Scaling::Structural => profile.speed(t).powi(2) * profile.primitive(t).powf(self.gamma),
        }
    }

    pub fn power(&self, u: f64) -> f64 {
        match self.form {
            NonlinearForm::SignedPower => u.abs().powf(self.p - 1.0) * u,
            NonlinearForm::AbsolutePower => u.abs().powf(self.p),
            NonlinearForm::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub enabled: bool,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Gaussian,
    Bump,
    ModeMix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub kind: DataKind,
    pub amplitude: f64,
    pub width: f64,
    /// amplitude of u₁, which has the same shape as u₀ (with fresh phases
    /// for mode mixes)
    pub velocity: f64,
    /// number of random modes in a mode mix
    pub modes: usize,
}

/// Gaussian tails are treated as vanishing below this fraction of the peak.
const TAIL: f64 = 1e-12;

impl DataSpec {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self { kind: DataKind::Gaussian, amplitude, width, velocity: 0.0, modes: 8 }
    }

    /// Radius outside which the data are negligible (exactly zero for bumps).
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            DataKind::Bump => self.width,
            DataKind::Gaussian | DataKind::ModeMix => self.width * (-2.0 * TAIL.ln()).sqrt(),
        }
    }
}

/// u₀ and u₁ sampled on the grid.
pub fn make_initial_data(grid: &Grid, spec: &DataSpec, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_finite("amplitude", spec.amplitude)?;
    check_finite("velocity", spec.velocity)?;
    if !(spec.width > 0.0 && spec.width < grid.half_width() / 4.0) {
        return domain(format!("width {} must lie in (0, L/4) with L = {}", spec.width, grid.half_width()));
    }
    let w2 = spec.width * spec.width;
    let n = grid.dim();
    let shape = |r2: f64| match spec.kind {
        DataKind::Gaussian | DataKind::ModeMix => (-r2 / (2.0 * w2)).exp(),
        DataKind::Bump if r2 < w2 => (1.0 - 1.0 / (1.0 - r2 / w2)).exp(),
        DataKind::Bump => 0.0,
    };
    let mut u0: Vec<f64> = (0..grid.len()).map(|i| spec.amplitude * shape(grid.radius2(i))).collect();
    let mut u1: Vec<f64> = (0..grid.len()).map(|i| spec.velocity * shape(grid.radius2(i))).collect();
    if spec.kind == DataKind::ModeMix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for field in [&mut u0, &mut u1] {
            let modes: Vec<([f64; 3], f64, f64)> = (0..spec.modes.max(1))
                .map(|_| {
                    let mut k = [0.0; 3];
                    for c in k.iter_mut().take(n) {
                        *c = rng.random_range(-2.0..2.0) / spec.width;
                    }
                    (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            let norm = 1.0 / modes.len() as f64;
            for (i, v) in field.iter_mut().enumerate() {
                let ii = grid.unflatten(i);
                let mix: f64 = modes
                    .iter()
                    .map(|(k, a, ph)| {
                        let phase: f64 = (0..n).map(|d| k[d] * grid.coord(ii[d])).sum();
                        a * (phase + ph).cos()
                    })
                    .sum();
                *v *= mix * norm;
            }
        }
    }
    Ok((u0, u1))
}

/// Solution fields at one time, in physical and spectral form.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub t: f64,
    u: Vec<f64>,
    ut: Vec<f64>,
    u_hat: Vec<Complex64>,
    ut_hat: Vec<Complex64>,
    imag_residue: f64,
}

impl FieldState {
    pub fn new(transform: &Transform, t: f64, u: Vec<f64>, ut: Vec<f64>) -> Result<Self> {
        let len = transform.grid().len();
        if u.len() != len || ut.len() != len {
            return domain(format!("fields must have {len} points"));
        }
        let u_hat = transform.forward_real(&u);
        let ut_hat = transform.forward_real(&ut);
        Ok(Self { t, u, ut, u_hat, ut_hat, imag_residue: 0.0 })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn ut(&self) -> &[f64] {
        &self.ut
    }

    pub fn u_hat(&self) -> &[Complex64] {
        &self.u_hat
    }

    pub fn ut_hat(&self) -> &[Complex64] {
        &self.ut_hat
    }

    /// Largest imaginary part seen when returning to physical space.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    pub fn linf(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.ut).all(|v| v.is_finite())
    }

    fn sync(&mut self, transform: &Transform) {
        let a = transform.inverse_real(&self.u_hat, &mut self.u);
        let b = transform.inverse_real(&self.ut_hat, &mut self.ut);
        let scale = self.u.iter().chain(&self.ut).fold(0.0f64, |m, v| m.max(v.abs()));
        self.imag_residue = a.max(b) / scale.max(f64::MIN_POSITIVE);
    }
}

/// Per-shell propagators for the grid, with the Bessel bases of the most
/// recent step end cached.
pub struct Stepper {
    transform: Transform,
    profile: SpeedProfile,
    orders: Orders,
    nonlin: NonlinearitySpec,
    shell_of: Vec<u32>,
    shell_xi: Vec<f64>,
    dealias: Vec<bool>,
    cache: Option<(f64, Arc<Vec<Basis>>)>,
}

fn check_step(dt: f64) -> Result<()> {
    if dt >= 0.0 && dt.is_finite() {
        Ok(())
    } else {
        domain(format!("dt must be non-negative and finite, got {dt}"))
    }
}

type Source<'a> = dyn Fn(f64, &[f64], &mut [f64]) + Sync + 'a;

impl Stepper {
    pub fn new(grid: Grid, profile: SpeedProfile, mu: f64, nonlin: NonlinearitySpec) -> Result<Self> {
        let orders = Orders::new(mu)?;
        let transform = Transform::new(grid);
        let mut keys: Vec<u64> = (0..grid.len()).map(|i| grid.shell_key(i)).collect();
        let shell_keys = {
            let mut k = keys.clone();
            k.sort_unstable();
            k.dedup();
            k
        };
        let shell_xi = shell_keys.iter().map(|&k| std::f64::consts::PI * (k as f64).sqrt() / grid.half_width()).collect();
        let shell_of = keys
            .iter_mut()
            .map(|k| shell_keys.binary_search(k).expect("key present") as u32)
            .collect();
        let dealias = (0..grid.len()).map(|i| grid.is_aliased(i)).collect();
        Ok(Self { transform, profile, orders, nonlin, shell_of, shell_xi, dealias, cache: None })
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn grid(&self) -> &Grid {
        self.transform.grid()
    }

    pub fn profile(&self) -> &SpeedProfile {
        &self.profile
    }

    pub fn shells(&self) -> usize {
        self.shell_xi.len()
    }

    fn bases(&mut self, t: f64) -> Arc<Vec<Basis>> {
        if let Some((tc, b)) = &self.cache {
            if *tc == t {
                return b.clone();
            }
        }
        let big = self.profile.primitive(t);
        let orders = self.orders;
        let b: Vec<Basis> = self
            .shell_xi
            .par_iter()
            .map(|&xi| if xi == 0.0 { Basis::default() } else { orders.basis(big * xi) })
            .collect();
        Arc::new(b)
    }

    fn table(&self, s: f64, t: f64, bs: &[Basis], bt: &[Basis]) -> Vec<[f64; 4]> {
        let span = Span::new(&self.profile, s, t);
        let orders = self.orders;
        self.shell_xi
            .par_iter()
            .enumerate()
            .map(|(k, &xi)| propagate(&orders, &span, xi, &bs[k], &bt[k]))
            .collect()
    }

    /// Exact linear propagation of every mode over dt.
    pub fn linear_step(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        check_step(dt)?;
        self.linear_to(state, state.t + dt)
    }

    fn linear_to(&mut self, state: &mut FieldState, t: f64) -> Result<()> {
        let s = state.t;
        if t == s {
            return Ok(());
        }
        let bs = self.bases(s);
        let bt = self.bases(t);
        let full = self.table(s, t, &bs, &bt);
        self.apply(state, &full);
        state.t = t;
        state.sync(&self.transform);
        self.cache = Some((t, bt));
        Ok(())
    }

    /// One step of the semilinear problem with the configured nonlinearity.
    pub fn duhamel_step(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        check_step(dt)?;
        self.duhamel_to(state, state.t + dt)
    }

    fn duhamel_to(&mut self, state: &mut FieldState, t: f64) -> Result<()> {
        if self.nonlin.form == NonlinearForm::Zero {
            return self.linear_to(state, t);
        }
        let nl = self.nonlin;
        let profile = self.profile.clone();
        let src = move |t: f64, u: &[f64], out: &mut [f64]| {
            let c = nl.prefactor(&profile, t);
            for (o, &v) in out.iter_mut().zip(u) {
                *o = c * nl.power(v);
            }
        };
        self.source_to(state, t, &src)
    }

    /// One step with the source f(t, u) given by `source(t, u, out)`: the
    /// linear predictor at the half step feeds a midpoint rule weighted by
    /// Φ₁(t+dt, t+dt/2).
    pub fn source_step(&mut self, state: &mut FieldState, dt: f64, source: &Source<'_>) -> Result<()> {
        check_step(dt)?;
        self.source_to(state, state.t + dt, source)
    }

    fn source_to(&mut self, state: &mut FieldState, t: f64, source: &Source<'_>) -> Result<()> {
        let s = state.t;
        if t == s {
            return Ok(());
        }
        let (dt, m) = (t - s, 0.5 * (s + t));
        let bs = self.bases(s);
        let bm = self.bases(m);
        let bt = self.bases(t);
        let full = self.table(s, t, &bs, &bt);
        let half = self.table(s, m, &bs, &bm);
        let late = self.table(m, t, &bm, &bt);

        let mut pred: Vec<Complex64> = state
            .u_hat
            .iter()
            .zip(&state.ut_hat)
            .zip(&self.shell_of)
            .map(|((a, b), &k)| {
                let v = &half[k as usize];
                a * v[0] + b * v[1]
            })
            .collect();
        self.transform.inverse(&mut pred);
        let u_mid: Vec<f64> = pred.iter().map(|z| z.re).collect();
        let mut f = vec![0.0; u_mid.len()];
        source(m, &u_mid, &mut f);
        let mut f_hat = self.transform.forward_real(&f);
        for (z, &alias) in f_hat.iter_mut().zip(&self.dealias) {
            if alias {
                *z = Complex64::default();
            }
        }

        self.apply(state, &full);
        for ((i, z), &k) in f_hat.iter().enumerate().zip(&self.shell_of) {
            let w = &late[k as usize];
            state.u_hat[i] += dt * w[1] * z;
            state.ut_hat[i] += dt * w[3] * z;
        }
        state.t = t;
        state.sync(&self.transform);
        self.cache = Some((t, bt));
        Ok(())
    }

    fn apply(&self, state: &mut FieldState, table: &[[f64; 4]]) {
        for ((a, b), &k) in state.u_hat.iter_mut().zip(state.ut_hat.iter_mut()).zip(&self.shell_of) {
            let v = &table[k as usize];
            let (u0, u1) = (*a, *b);
            *a = u0 * v[0] + u1 * v[1];
            *b = u0 * v[2] + u1 * v[3];
        }
    }

    /// Rough working-set size in bytes: two real and two complex fields,
    /// three transform buffers and the per-point index arrays.
    pub fn memory_estimate(grid: &Grid) -> f64 {
        grid.len() as f64 * (2.0 * 8.0 + 5.0 * 16.0 + 5.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRecord {
    /// end of the step where the criterion first fired
    pub t_star: f64,
    pub linf: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    /// largest |u| outside the light cone over the initial peak
    pub max_cone_leak: f64,
    pub max_imag_residue: f64,
    pub initial_peak: f64,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub series: NormSeries,
    pub final_state: Option<FieldState>,
    pub blowup: Option<BlowupRecord>,
    pub diagnostics: Diagnostics,
}

/// Output times log-spaced in Λ, `per_decade` per decade, from 0 to t_final.
pub fn output_times(profile: &SpeedProfile, t_final: f64, per_decade: usize) -> Result<Vec<f64>> {
    let (l0, l1) = (profile.primitive(0.0), profile.primitive(t_final));
    let mut times = vec![0.0];
    let step = 10f64.powf(1.0 / per_decade.max(1) as f64);
    let mut big = l0 * step;
    while big < l1 * (1.0 - 1e-12) {
        let t = profile.time_at_primitive(big)?;
        if t > *times.last().unwrap() {
            times.push(t);
        }
        big *= step;
    }
    if t_final > 0.0 {
        times.push(t_final);
    }
    Ok(times)
}

/// Run a validated configuration to its final time or to blow-up.
pub fn simulate(config: &RunConfig) -> Result<SimOutcome> {
    simulate_observed(config, &mut |_| Ok(()))
}

/// As `simulate`, calling `observer` with the state at every output time.
pub fn simulate_observed(
    config: &RunConfig,
    observer: &mut dyn FnMut(&FieldState) -> Result<()>,
) -> Result<SimOutcome> {
    let grid = config.grid()?;
    let cap = config.memory_cap_mb * 1e6;
    let need = Stepper::memory_estimate(&grid);
    if need > cap {
        return Err(Error::Resource(format!("estimated {:.0} MB exceeds the cap of {} MB", need / 1e6, config.memory_cap_mb)));
    }
    let profile = config.speed_profile()?;
    let mu = config.damping_mu()?;
    let mut stepper = Stepper::new(grid, profile.clone(), mu, config.nonlinearity)?;
    let (u0, u1) = make_initial_data(&grid, &config.data, config.seed)?;
    let mut state = FieldState::new(stepper.transform(), 0.0, u0, u1)?;

    let times = output_times(&profile, config.t_final, config.output.per_decade)?;
    let weighted = config.weighted();
    let mut series = NormSeries::for_run(&config.output.m, weighted.enabled, config.run_id()?);
    let mut diag = Diagnostics { initial_peak: state.linf(), ..Diagnostics::default() };
    let peak = diag.initial_peak;
    let r0 = config.data.support_radius();
    let big0 = profile.primitive(0.0);
    let mesh = grid.mesh();

    let rec = Recorder { grid, profile: &profile, m: &config.output.m, weighted, peak, r0, big0 };
    rec.record(stepper.transform(), &state, &mut diag, false, &mut series);
    observer(&state)?;
    let mut blowup = None;
    'outer: for &target in &times[1..] {
        while state.t < target {
            let lam = profile.speed(state.t);
            let mut dt = config.dt_max.min(0.25 * mesh / lam);
            if config.nonlinearity.form != NonlinearForm::Zero {
                // resolve the growth time of the local ODE u″ = c|u|^{p−1}u
                let nl = &config.nonlinearity;
                let rate = nl.prefactor(&profile, state.t) * nl.p * state.linf().powf(nl.p - 1.0);
                if rate > 0.0 {
                    dt = dt.min(0.1 / rate.sqrt());
                }
            }
            let end = if state.t + dt >= target * (1.0 - 1e-14) { target } else { state.t + dt };
            stepper.duhamel_to(&mut state, end)?;
            diag.steps += 1;
            let linf = state.linf();
            let reason = if !state.is_finite() || !linf.is_finite() {
                Some("non-finite value")
            } else if peak > 0.0 && linf > config.blowup_threshold * peak {
                Some("amplitude threshold")
            } else {
                None
            };
            if let Some(reason) = reason {
                blowup = Some(BlowupRecord { t_star: state.t, linf, reason: reason.to_string() });
                rec.record(stepper.transform(), &state, &mut diag, true, &mut series);
                break 'outer;
            }
        }
        rec.record(stepper.transform(), &state, &mut diag, false, &mut series);
        observer(&state)?;
    }
    let final_state = if blowup.is_none() { Some(state) } else { None };
    Ok(SimOutcome { series, final_state, blowup, diagnostics: diag })
}

struct Recorder<'a> {
    grid: Grid,
    profile: &'a SpeedProfile,
    m: &'a [f64],
    weighted: WeightedNormSpec,
    peak: f64,
    r0: f64,
    big0: f64,
}

impl Recorder<'_> {
    fn record(&self, tr: &Transform, state: &FieldState, diag: &mut Diagnostics, flag: bool, series: &mut NormSeries) {
        let sample = norms(tr, state, self.profile, self.m, &self.weighted);
        let cone = self.r0 + self.profile.primitive(state.t) - self.big0;
        let leak = (0..self.grid.len())
            .filter(|&i| self.grid.radius2(i) > cone * cone)
            .fold(0.0f64, |m, i| m.max(state.u()[i].abs()));
        if self.peak > 0.0 {
            diag.max_cone_leak = diag.max_cone_leak.max(leak / self.peak);
        }
        diag.max_imag_residue = diag.max_imag_residue.max(state.imag_residue());
        series.push(&sample, flag);
    }
}
