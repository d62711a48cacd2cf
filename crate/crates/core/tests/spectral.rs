use dampwave::config::validate_config;
use dampwave::multipliers::phi_values;
use dampwave::profiles::SpeedProfile;
use dampwave::spectral::{
    make_initial_data, norms, simulate, weight_identity_residual, DataKind, DataSpec, FieldState, Grid, NonlinearForm,
    NonlinearitySpec, Scaling, Stepper, Transform, WeightedNormSpec,
};
use num_complex::Complex64;

mod common;

const PI: f64 = std::f64::consts::PI;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn cubic() -> NonlinearitySpec {
    NonlinearitySpec { form: NonlinearForm::SignedPower, p: 3.0, gamma: 0.0, scaling: Scaling::Plain }
}

fn gaussian(grid: &Grid, eps: f64, w: f64) -> Vec<f64> {
    (0..grid.len()).map(|i| eps * (-grid.radius2(i) / (2.0 * w * w)).exp()).collect()
}

#[test]
fn gaussian_data_norms() {
    let grid = Grid::new(1, 256, 16.0).unwrap();
    let (u0, u1) = make_initial_data(&grid, &DataSpec::gaussian(0.1, 1.0), 0).unwrap();
    assert!(u1.iter().all(|&v| v == 0.0));
    let tr = Transform::new(grid);
    let state = FieldState::new(&tr, 0.0, u0, u1).unwrap();
    let s = norms(&tr, &state, &SpeedProfile::constant(), &[1.0], &WeightedNormSpec { enabled: false, mu: 0.0 });
    assert!((s.lm[0].1 - 0.1 * (2.0 * PI).sqrt()).abs() < 1e-6);
    assert!((s.l2 - 0.1 * PI.sqrt().sqrt()).abs() < 1e-6);
}

#[test]
fn initial_data_edge_cases() {
    let grid = Grid::new(2, 32, 8.0).unwrap();
    let (u0, u1) = make_initial_data(&grid, &DataSpec::gaussian(0.0, 1.0), 3).unwrap();
    assert!(u0.iter().chain(&u1).all(|&v| v == 0.0));
    assert!(make_initial_data(&grid, &DataSpec::gaussian(1.0, 2.0), 3).is_err());

    let mix = DataSpec { kind: DataKind::ModeMix, amplitude: 0.5, width: 1.0, velocity: 0.2, modes: 4 };
    let a = make_initial_data(&grid, &mix, 11).unwrap();
    let b = make_initial_data(&grid, &mix, 11).unwrap();
    let c = make_initial_data(&grid, &mix, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}

#[test]
fn parseval_round_trip() {
    let grid = Grid::new(2, 32, 5.0).unwrap();
    let tr = Transform::new(grid);
    let u: Vec<f64> = (0..grid.len()).map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.5).collect();
    let spec = tr.forward_real(&u);
    let mut back = vec![0.0; u.len()];
    let imag = tr.inverse_real(&spec, &mut back);
    assert!(max_diff(&u, &back) < 1e-12);
    assert!(imag < 1e-12);
    let e_phys: f64 = u.iter().map(|v| v * v).sum();
    let e_spec: f64 = spec.iter().map(Complex64::norm_sqr).sum::<f64>() / grid.len() as f64;
    assert!((e_phys - e_spec).abs() < 1e-12 * e_phys);
}

#[test]
fn gradient_of_a_single_mode() {
    let grid = Grid::new(1, 64, PI).unwrap();
    let tr = Transform::new(grid);
    let k = 5.0;
    let u: Vec<f64> = (0..64).map(|i| 0.3 * (k * grid.coord(i)).sin()).collect();
    let state = FieldState::new(&tr, 0.0, u, vec![0.0; 64]).unwrap();
    let s = norms(&tr, &state, &SpeedProfile::constant(), &[2.0], &WeightedNormSpec { enabled: false, mu: 0.0 });
    assert!((s.h1_seminorm - k * s.l2).abs() < 1e-12 * s.h1_seminorm);
}

#[test]
fn free_wave_single_mode() {
    // μ = 2, λ ≡ 1: (1+t)u solves the free wave equation
    let grid = Grid::new(1, 64, PI).unwrap();
    let xi = 3.0;
    let mut st = Stepper::new(grid, SpeedProfile::constant(), 2.0, NonlinearitySpec::zero()).unwrap();
    let mode: Vec<f64> = (0..64).map(|i| (xi * grid.coord(i)).cos()).collect();
    let mut state = FieldState::new(st.transform(), 0.0, vec![0.0; 64], mode.clone()).unwrap();
    for _ in 0..40 {
        st.linear_step(&mut state, 0.1).unwrap();
    }
    let t = state.t;
    let expect: Vec<f64> = mode.iter().map(|m| (t * xi).sin() / (xi * (1.0 + t)) * m).collect();
    assert!(max_diff(state.u(), &expect) < 1e-8);
}

#[test]
fn free_wave_dalembert() {
    // u₁ = −u₀ makes ∂ₜ((1+t)u) vanish at t = 0
    let grid = Grid::new(1, 512, 40.0).unwrap();
    let u0 = gaussian(&grid, 1.0, 1.0);
    let u1: Vec<f64> = u0.iter().map(|v| -v).collect();
    let mut st = Stepper::new(grid, SpeedProfile::constant(), 2.0, NonlinearitySpec::zero()).unwrap();
    let mut state = FieldState::new(st.transform(), 0.0, u0, u1).unwrap();
    let t = 15.0;
    st.linear_step(&mut state, t).unwrap();
    let w: Vec<f64> = state.u().iter().map(|v| (1.0 + t) * v).collect();
    let reference: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.coord(i);
            0.5 * ((-(x - t).powi(2) / 2.0).exp() + (-(x + t).powi(2) / 2.0).exp())
        })
        .collect();
    assert!(max_diff(&w, &reference) < 1e-7);
}

#[test]
fn zero_step_and_semigroup() {
    let grid = Grid::new(2, 32, 8.0).unwrap();
    let profile = SpeedProfile::polynomial(0.5).unwrap();
    let mut st = Stepper::new(grid, profile, 3.0, NonlinearitySpec::zero()).unwrap();
    let u0 = gaussian(&grid, 1.0, 1.0);
    let start = FieldState::new(st.transform(), 0.5, u0.clone(), u0).unwrap();

    let mut same = start.clone();
    st.linear_step(&mut same, 0.0).unwrap();
    assert_eq!(same.u(), start.u());

    let mut two = start.clone();
    st.linear_step(&mut two, 0.7).unwrap();
    st.linear_step(&mut two, 0.7).unwrap();
    let mut one = start.clone();
    st.linear_step(&mut one, 1.4).unwrap();
    let scale = one.linf();
    assert!(max_diff(one.u(), two.u()) < 1e-9 * scale);
    assert!(max_diff(one.ut(), two.ut()) < 1e-9 * scale);
    assert!(st.linear_step(&mut one, -0.1).is_err());
}

#[test]
fn zero_nonlinearity_is_linear() {
    let grid = Grid::new(1, 128, 10.0).unwrap();
    let profile = SpeedProfile::constant();
    let mut a = Stepper::new(grid, profile.clone(), 3.0, NonlinearitySpec::zero()).unwrap();
    let mut b = Stepper::new(grid, profile, 3.0, NonlinearitySpec::zero()).unwrap();
    let u0 = gaussian(&grid, 1.0, 1.0);
    let mut sa = FieldState::new(a.transform(), 0.0, u0.clone(), vec![0.0; 128]).unwrap();
    let mut sb = sa.clone();
    a.duhamel_step(&mut sa, 0.3).unwrap();
    b.linear_step(&mut sb, 0.3).unwrap();
    assert!(max_diff(sa.u(), sb.u()) < 1e-15);
}

fn run_cubic(dt: f64, steps: usize) -> Vec<f64> {
    let grid = Grid::new(1, 128, 10.0).unwrap();
    let mut st = Stepper::new(grid, SpeedProfile::constant(), 3.0, cubic()).unwrap();
    let u0 = gaussian(&grid, 0.8, 1.0);
    let mut s = FieldState::new(st.transform(), 0.0, u0, vec![0.0; 128]).unwrap();
    for _ in 0..steps {
        st.duhamel_step(&mut s, dt).unwrap();
    }
    s.u().to_vec()
}

#[test]
fn duhamel_is_second_order() {
    let a = run_cubic(0.1, 10);
    let b = run_cubic(0.05, 20);
    let c = run_cubic(0.025, 40);
    let ratio = max_diff(&a, &b) / max_diff(&b, &c);
    assert!((3.4..4.6).contains(&ratio), "self-convergence ratio {ratio}");
}

#[test]
fn cubic_increment_scales_with_amplitude_cubed() {
    let grid = Grid::new(1, 128, 10.0).unwrap();
    let increment = |c: f64| {
        let u0 = gaussian(&grid, 0.1 * c, 1.0);
        let mut lin = Stepper::new(grid, SpeedProfile::constant(), 3.0, NonlinearitySpec::zero()).unwrap();
        let mut non = Stepper::new(grid, SpeedProfile::constant(), 3.0, cubic()).unwrap();
        let mut a = FieldState::new(lin.transform(), 0.0, u0.clone(), vec![0.0; 128]).unwrap();
        let mut b = a.clone();
        lin.linear_step(&mut a, 1e-3).unwrap();
        non.duhamel_step(&mut b, 1e-3).unwrap();
        let d: Vec<f64> = a.ut().iter().zip(b.ut()).map(|(x, y)| y - x).collect();
        d.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let ratio = increment(2.0) / increment(1.0);
    assert!((ratio / 8.0 - 1.0).abs() < 1e-3, "ratio {ratio}");
}

#[test]
fn explicit_source_matches_direct_quadrature() {
    // one step with g(t, x) = cos t · G(x) against ∫ Φ₁(t, s) ĝ(s) ds, per mode
    let grid = Grid::new(1, 64, 8.0).unwrap();
    let profile = SpeedProfile::polynomial(1.0).unwrap();
    let mu = 2.5;
    let shape = gaussian(&grid, 1.0, 1.0);
    let source = |t: f64, _u: &[f64], out: &mut [f64]| {
        for (o, g) in out.iter_mut().zip(&shape) {
            *o = t.cos() * g;
        }
    };
    let tr = Transform::new(grid);
    let g_hat = tr.forward_real(&shape);
    let (t0, k_test) = (0.4, 3);
    let xi = PI * k_test as f64 / grid.half_width();
    let exact = {
        // composite Simpson, fine enough to be exact at this precision
        let m = 2000;
        let t1 = t0 + 0.2;
        let h = (t1 - t0) / m as f64;
        (0..=m)
            .map(|j| {
                let s = t0 + j as f64 * h;
                let w = if j == 0 || j == m { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                w * s.cos() * phi_values(mu, &profile, s, t1, xi).unwrap().phi1.re
            })
            .sum::<f64>()
            * h
            / 3.0
    };
    let err = |dt: f64| {
        let mut st = Stepper::new(grid, profile.clone(), mu, NonlinearitySpec::zero()).unwrap();
        let mut s = FieldState::new(st.transform(), t0, vec![0.0; 64], vec![0.0; 64]).unwrap();
        let steps = (0.2 / dt).round() as usize;
        for _ in 0..steps {
            st.source_step(&mut s, dt, &source).unwrap();
        }
        let got = s.u_hat()[k_test] / g_hat[k_test];
        (got.re - exact).abs()
    };
    let (e1, e2) = (err(0.2), err(0.1));
    assert!(e1 < 5e-2 * exact.abs(), "{e1} vs {exact}");
    assert!(e1 / e2 > 3.4, "errors {e1} {e2}");
}

fn config(extra: &str) -> dampwave::config::RunConfig {
    let text = format!(r#"{{"profile": {{"kind": "constant"}}, "grid": {{"n": 1, "N": 256}}, {extra}}}"#);
    validate_config(&text).unwrap().config
}

#[test]
fn zero_data_stays_zero() {
    let cfg = config(r#""mu": 3, "T": 5, "data": {"amplitude": 0}, "nonlinearity": {"form": "signed_power", "p": 3}"#);
    let out = simulate(&cfg).unwrap();
    assert!(out.blowup.is_none());
    for name in ["L1", "L2", "H1_seminorm", "energy", "Linf"] {
        assert!(out.series.track(name).unwrap().iter().all(|&v| v == 0.0), "{name}");
    }
}

#[test]
fn energy_is_non_increasing_at_constant_speed() {
    let cfg = config(r#""mu": 1.5, "T": 30, "data": {"amplitude": 1, "velocity": 0.5}"#);
    let out = simulate(&cfg).unwrap();
    let e = out.series.track("energy").unwrap();
    assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
    assert!(e.last().unwrap() < &(0.5 * e[0]));
    assert!(out.diagnostics.max_imag_residue <= 1e-10);
}

#[test]
fn light_cone_is_respected() {
    let cfg = config(r#""mu": 3, "T": 10, "grid": {"n": 1, "N": 2048}, "data": {"kind": "bump", "amplitude": 1, "width": 3}"#);
    let out = simulate(&cfg).unwrap();
    assert!(out.diagnostics.max_cone_leak <= 1e-8, "leak {}", out.diagnostics.max_cone_leak);
}

#[test]
fn weighted_gaussian_closed_form() {
    // μ = 2, Λ = 1, w = 1/2: ∫ε²e^{−4x²}e^{2x²} dx = ε²√(π/2)
    let grid = Grid::new(1, 256, 6.0).unwrap();
    let tr = Transform::new(grid);
    let eps = 0.3;
    let narrow = gaussian(&grid, eps, 0.5);
    let state = FieldState::new(&tr, 0.0, narrow, vec![0.0; 256]).unwrap();
    let spec = WeightedNormSpec { enabled: true, mu: 2.0 };
    let w = norms(&tr, &state, &SpeedProfile::constant(), &[], &spec).weighted.unwrap();
    assert!((w.l2 * w.l2 - eps * eps * (PI / 2.0).sqrt()).abs() < 1e-10);
    assert!(!w.saturated && !w.truncated);
    assert!(w.h1 > w.l2);

    // w = 1: divergent on the line, finite on the box and flagged
    let wide = FieldState::new(&tr, 0.0, gaussian(&grid, eps, 1.0), vec![0.0; 256]).unwrap();
    let w = norms(&tr, &wide, &SpeedProfile::constant(), &[], &spec).weighted.unwrap();
    assert!(w.truncated);

    let big = Grid::new(1, 256, 30.0).unwrap();
    let tb = Transform::new(big);
    let s = FieldState::new(&tb, 0.0, gaussian(&big, eps, 0.5), vec![0.0; 256]).unwrap();
    let w = norms(&tb, &s, &SpeedProfile::constant(), &[], &spec).weighted.unwrap();
    assert!(w.saturated);
}

#[test]
fn weight_identity() {
    let grid = Grid::new(2, 16, 5.0).unwrap();
    let profiles = [
        SpeedProfile::constant(),
        SpeedProfile::polynomial(1.5).unwrap(),
        SpeedProfile::exponential(0.3).unwrap(),
    ];
    for p in &profiles {
        let r = weight_identity_residual(p, 3.0, &grid, 2.0);
        assert!(r.residual <= 1e-12);
        assert!(r.max_psi_t <= 0.0);
        let z = weight_identity_residual(p, 0.0, &grid, 2.0);
        assert_eq!(z.residual, 0.0);
    }
    let tab = SpeedProfile::tabulated(&[(0.0, 1.0), (1.0, 1.5), (3.0, 2.0), (6.0, 4.0)], 1.0).unwrap();
    let r = weight_identity_residual(&tab, 3.0, &grid, 2.0);
    assert!(r.residual <= 1e-6 && r.max_psi_t <= 0.0);
}

#[test]
fn properties() {
    common::check("parseval", 32);
    common::check("realness", 16);
    common::check("energy_monotone", 16);
    common::check("finite_propagation", 4);
    common::check("free_wave", 8);
    common::check("duhamel_consistency", 16);
}
