//! Run configuration: lenient JSON in, validated and fully defaulted
//! `RunConfig` out. The canonical JSON form of a `RunConfig` hashes to its
//! run id and parses back to itself.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::multipliers::rho_of;
use crate::profiles::{DampingSpec, ProfileKind, SpeedProfile};
use crate::spectral::{DataKind, DataSpec, Grid, NonlinearForm, NonlinearitySpec, Scaling, WeightedNormSpec};
use crate::specfun::MAX_ORDER;

pub const DEFAULT_DT_MAX: f64 = 0.05;
pub const DEFAULT_PER_DECADE: usize = 20;
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;
pub const DEFAULT_WINDOW: f64 = 0.5;
pub const DEFAULT_MEMORY_CAP_MB: f64 = 4096.0;
/// Extra room beyond the light cone in the domain-sizing rule.
pub const DOMAIN_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    pub lambda0: f64,
}

impl ProfileSpec {
    fn build_default(&self) -> Result<SpeedProfile> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Validation(vec![format!("profile.{name} is required")]));
        match self.kind {
            ProfileKind::Constant => Ok(SpeedProfile::constant()),
            ProfileKind::Polynomial => SpeedProfile::polynomial(need(self.q, "q")?),
            ProfileKind::Exponential => SpeedProfile::exponential(need(self.r, "r")?),
            ProfileKind::Tabulated => {
                let pts = self.points.as_ref().ok_or_else(|| Error::Validation(vec!["profile.points is required".into()]))?;
                let table: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
                SpeedProfile::tabulated(&table, self.lambda0)
            }
        }
    }

    pub fn build(&self) -> Result<SpeedProfile> {
        let p = self.build_default()?;
        if p.lambda0() == self.lambda0 {
            Ok(p)
        } else {
            p.with_lambda0(self.lambda0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub per_decade: usize,
    pub m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    pub grid: GridSpec,
    pub nonlinearity: NonlinearitySpec,
    pub data: DataSpec,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt_max: f64,
    pub output: OutputSpec,
    pub weighted: WeightedNormSpec,
    pub blowup_threshold: f64,
    pub k_zone: f64,
    pub window: f64,
    pub memory_cap_mb: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn speed_profile(&self) -> Result<SpeedProfile> {
        self.profile.build()
    }

    pub fn damping_mu(&self) -> Result<f64> {
        match (self.mu, self.nu) {
            (Some(mu), None) => Ok(mu),
            (None, Some(nu)) => Ok(DampingSpec::from_nu(&self.speed_profile()?, nu)?.mu),
            _ => Err(Error::Validation(vec!["exactly one of mu and nu must be set".into()])),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.points, self.grid.half_width)
    }

    pub fn weighted(&self) -> WeightedNormSpec {
        self.weighted
    }

    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn run_id(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }
}

/// Smallest admissible half-width: R₀ + Λ(T) − λ₀ + margin.
pub fn min_half_width(profile: &SpeedProfile, data: &DataSpec, t_final: f64) -> f64 {
    data.support_radius() + profile.primitive(t_final) - profile.primitive(0.0) + DOMAIN_MARGIN
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    kind: Option<ProfileKind>,
    q: Option<f64>,
    r: Option<f64>,
    points: Option<Vec<[f64; 2]>>,
    lambda0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    #[serde(rename = "N")]
    points: Option<usize>,
    #[serde(rename = "L")]
    half_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNonlinearity {
    form: Option<NonlinearForm>,
    p: Option<f64>,
    gamma: Option<f64>,
    scaling: Option<Scaling>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    kind: Option<DataKind>,
    amplitude: Option<f64>,
    width: Option<f64>,
    velocity: Option<f64>,
    modes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    per_decade: Option<usize>,
    m: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeighted {
    enabled: Option<bool>,
    mu: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    profile: Option<RawProfile>,
    mu: Option<f64>,
    nu: Option<f64>,
    grid: Option<RawGrid>,
    nonlinearity: Option<RawNonlinearity>,
    data: Option<RawData>,
    #[serde(rename = "T")]
    t_final: Option<f64>,
    dt_max: Option<f64>,
    output: Option<RawOutput>,
    weighted: Option<RawWeighted>,
    blowup_threshold: Option<f64>,
    k_zone: Option<f64>,
    window: Option<f64>,
    memory_cap_mb: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Validated {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

/// A profile object as it appears under `profile` in a run configuration.
pub fn parse_profile(value: serde_json::Value) -> Result<(ProfileSpec, SpeedProfile)> {
    let p: RawProfile = serde_json::from_value(value).map_err(|e| Error::Validation(vec![format!("profile: {e}")]))?;
    let kind = p.kind.ok_or_else(|| Error::Validation(vec!["missing required key `profile.kind`".into()]))?;
    let mut spec = ProfileSpec { kind, q: p.q, r: p.r, points: p.points, lambda0: p.lambda0.unwrap_or(1.0) };
    spec.lambda0 = p.lambda0.unwrap_or(spec.build_default()?.lambda0());
    let profile = spec.build()?;
    Ok((spec, profile))
}

pub fn validate_config(text: &str) -> Result<Validated> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Validation(vec![format!("not valid JSON: {e}")]))?;
    validate_value(value)
}

pub fn validate_value(value: serde_json::Value) -> Result<Validated> {
    let raw: RawConfig = serde_json::from_value(value).map_err(|e| Error::Validation(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let profile_spec = match raw.profile {
        None => {
            errors.push("missing required key `profile`".to_string());
            None
        }
        Some(p) => match p.kind {
            None => {
                errors.push("missing required key `profile.kind`".to_string());
                None
            }
            Some(kind) => {
                // tabulated profiles default to Λ(0) = 1
                let mut spec = ProfileSpec { kind, q: p.q, r: p.r, points: p.points, lambda0: p.lambda0.unwrap_or(1.0) };
                match spec.build_default() {
                    Ok(prof) => {
                        spec.lambda0 = p.lambda0.unwrap_or(prof.lambda0());
                        Some(spec)
                    }
                    Err(Error::Validation(v)) => {
                        errors.extend(v);
                        None
                    }
                    Err(e) => {
                        errors.push(format!("profile: {e}"));
                        None
                    }
                }
            }
        },
    };
    let profile = profile_spec.as_ref().and_then(|s| match s.build() {
        Ok(p) => Some(p),
        Err(e) => {
            errors.push(format!("profile: {e}"));
            None
        }
    });

    let mu = match (raw.mu, raw.nu) {
        (Some(_), Some(_)) => {
            errors.push("mu and nu are mutually exclusive".to_string());
            None
        }
        (None, None) => {
            errors.push("missing required key `mu` (or `nu`)".to_string());
            None
        }
        (Some(mu), None) => Some(mu),
        (None, Some(nu)) => profile.as_ref().and_then(|p| match DampingSpec::from_nu(p, nu) {
            Ok(d) => Some(d.mu),
            Err(e) => {
                errors.push(format!("nu: {e}"));
                None
            }
        }),
    };
    if let Some(mu) = mu {
        let rho = rho_of(mu);
        if !mu.is_finite() {
            errors.push(format!("mu must be finite, got {mu}"));
        } else if rho.abs() > MAX_ORDER || (rho - 1.0).abs() > MAX_ORDER {
            errors.push(format!("mu = {mu} needs Bessel orders beyond ±{MAX_ORDER}"));
        } else if mu < 2.0 {
            warnings.push(format!("mu = {mu} < 2: outside the range of the global existence theorems with data in L^m"));
        }
    }

    let t_final = raw.t_final.unwrap_or_else(|| {
        errors.push("missing required key `T`".to_string());
        f64::NAN
    });
    if raw.t_final.is_some() && !(t_final.is_finite() && t_final > 0.0) {
        errors.push(format!("T must be positive, got {t_final}"));
    }

    let rd = raw.data.unwrap_or_default();
    let data = DataSpec {
        kind: rd.kind.unwrap_or(DataKind::Gaussian),
        amplitude: rd.amplitude.unwrap_or(0.01),
        width: rd.width.unwrap_or(1.0),
        velocity: rd.velocity.unwrap_or(0.0),
        modes: rd.modes.unwrap_or(8),
    };
    if !data.amplitude.is_finite() || !data.velocity.is_finite() {
        errors.push("data amplitudes must be finite".to_string());
    }
    if !(data.width.is_finite() && data.width > 0.0) {
        errors.push(format!("data.width must be positive, got {}", data.width));
    }

    let rg = raw.grid.unwrap_or_default();
    let n = rg.n.unwrap_or_else(|| {
        errors.push("missing required key `grid.n`".to_string());
        1
    });
    let points = rg.points.unwrap_or_else(|| {
        errors.push("missing required key `grid.N`".to_string());
        16
    });
    let mut half_width = rg.half_width.unwrap_or(f64::NAN);
    if let Some(prof) = &profile {
        if t_final.is_finite() && t_final > 0.0 && data.width > 0.0 {
            let need = min_half_width(prof, &data, t_final);
            if half_width.is_nan() {
                half_width = need;
            } else if half_width < need {
                errors.push(format!(
                    "grid.L = {half_width} is below the domain-sizing rule R0 + Lambda(T) - lambda0 + {DOMAIN_MARGIN} = {need}"
                ));
            }
        }
    }
    if let Err(e) = Grid::new(n, points, if half_width.is_nan() { 1.0 } else { half_width }) {
        errors.push(format!("grid: {e}"));
    }
    if half_width.is_finite() && data.width >= half_width / 4.0 {
        errors.push(format!("data.width = {} must be below L/4 = {}", data.width, half_width / 4.0));
    }
    if half_width.is_finite() && points > 0 {
        let cutoff = std::f64::consts::PI / (2.0 * half_width / points as f64) * 2.0 / 3.0;
        // the Gaussian envelope's spectrum falls below 1e-12 of its peak at 7.43/w
        let content = 7.43 / data.width + data_band(&data);
        if cutoff < content {
            warnings.push(format!("data spectrum reaches |k| ~ {content:.3}, beyond the dealiased cutoff {cutoff:.3}"));
        }
    }

    let rn = raw.nonlinearity.unwrap_or_default();
    let nonlinearity = NonlinearitySpec {
        form: rn.form.unwrap_or(NonlinearForm::Zero),
        p: rn.p.unwrap_or(3.0),
        gamma: rn.gamma.unwrap_or(0.0),
        scaling: rn.scaling.unwrap_or(Scaling::Plain),
    };
    let (e, w) = nonlinearity.check(n);
    errors.extend(e);
    warnings.extend(w);

    let dt_max = raw.dt_max.unwrap_or(DEFAULT_DT_MAX);
    if !(dt_max.is_finite() && dt_max > 0.0) {
        errors.push(format!("dt_max must be positive, got {dt_max}"));
    }
    let ro = raw.output.unwrap_or_default();
    let output = OutputSpec { per_decade: ro.per_decade.unwrap_or(DEFAULT_PER_DECADE), m: ro.m.unwrap_or_else(|| vec![1.0]) };
    if output.per_decade == 0 {
        errors.push("output.per_decade must be at least 1".to_string());
    }
    for &m in &output.m {
        if !(m.is_finite() && m >= 1.0) {
            errors.push(format!("output.m entries must be >= 1, got {m}"));
        }
    }
    let rw = raw.weighted.unwrap_or_default();
    let weighted = WeightedNormSpec { enabled: rw.enabled.unwrap_or(false), mu: rw.mu.or(mu).unwrap_or(0.0) };
    let blowup_threshold = raw.blowup_threshold.unwrap_or(DEFAULT_BLOWUP_THRESHOLD);
    if !(blowup_threshold > 1.0) {
        errors.push(format!("blowup_threshold must exceed 1, got {blowup_threshold}"));
    }
    let k_zone = raw.k_zone.unwrap_or(crate::multipliers::DEFAULT_K);
    if !(k_zone > 0.0 && k_zone < 1.0) {
        errors.push(format!("k_zone must lie in (0, 1), got {k_zone}"));
    }
    let window = raw.window.unwrap_or(DEFAULT_WINDOW);
    if !(window > 0.0 && window < 1.0) {
        errors.push(format!("window must lie in (0, 1), got {window}"));
    }
    let memory_cap_mb = raw.memory_cap_mb.unwrap_or(DEFAULT_MEMORY_CAP_MB);
    if !(memory_cap_mb > 0.0) {
        errors.push(format!("memory_cap_mb must be positive, got {memory_cap_mb}"));
    }

    if !errors.is_empty() {
        return Err(Error::Validation(errors));
    }
    let config = RunConfig {
        profile: profile_spec.expect("checked"),
        mu: raw.mu,
        nu: raw.nu,
        grid: GridSpec { n, points, half_width },
        nonlinearity,
        data,
        t_final,
        dt_max,
        output,
        weighted,
        blowup_threshold,
        k_zone,
        window,
        memory_cap_mb,
        seed: raw.seed.unwrap_or(0),
    };
    Ok(Validated { config, warnings })
}

/// Extra bandwidth of mode-mix data on top of the envelope.
fn data_band(data: &DataSpec) -> f64 {
    match data.kind {
        DataKind::ModeMix => 2.0 * (data.modes.max(1) as f64).sqrt().max(1.0) / data.width,
        _ => 0.0,
    }
}
