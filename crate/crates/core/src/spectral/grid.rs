//! Periodic grids on [−L, L)ⁿ and their discrete Fourier transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    points: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(n: usize, points: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return domain(format!("dimension must be 1, 2 or 3, got {n}"));
        }
        if points < 16 || !points.is_power_of_two() {
            return domain(format!("points per axis must be a power of two >= 16, got {points}"));
        }
        check_finite("L", half_width)?;
        if half_width <= 0.0 {
            return domain(format!("L must be positive, got {half_width}"));
        }
        Ok(Self { n, points, half_width })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mesh(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.mesh().powi(self.n as i32)
    }

    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.mesh()
    }

    /// Largest wavenumber kept by the 2/3 rule.
    pub fn cutoff(&self) -> f64 {
        self.nyquist() * 2.0 / 3.0
    }

    /// Axis indices of a flat index; axis 0 varies fastest.
    pub fn unflatten(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in out.iter_mut().take(self.n) {
            *a = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.mesh()
    }

    /// Squared distance to the origin of a flat index.
    pub fn radius2(&self, idx: usize) -> f64 {
        let ii = self.unflatten(idx);
        (0..self.n).map(|a| self.coord(ii[a]).powi(2)).sum()
    }

    /// Signed frequency index in [−N/2, N/2).
    pub fn freq_index(&self, i: usize) -> i64 {
        let h = self.points / 2;
        if i < h {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    pub fn wavenumber(&self, j: i64) -> f64 {
        std::f64::consts::PI * j as f64 / self.half_width
    }

    /// Integer |j|² of a flat spectral index.
    pub fn shell_key(&self, idx: usize) -> u64 {
        let ii = self.unflatten(idx);
        (0..self.n).map(|a| self.freq_index(ii[a]).pow(2) as u64).sum()
    }

    /// True when some axis frequency exceeds the 2/3 cutoff.
    pub fn is_aliased(&self, idx: usize) -> bool {
        let ii = self.unflatten(idx);
        let lim = self.points as i64 / 3;
        (0..self.n).any(|a| self.freq_index(ii[a]).abs() > lim)
    }

    /// Frequency vector (k₀, k₁, k₂) of a flat spectral index.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let ii = self.unflatten(idx);
        let mut k = [0.0; 3];
        for a in 0..self.n {
            k[a] = self.wavenumber(self.freq_index(ii[a]));
        }
        k
    }
}

/// Unnormalised forward transform and normalised inverse, one axis at a time.
#[derive(Clone)]
pub struct Transform {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        Self { grid, forward, inverse }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut out);
        out
    }

    /// Inverse transform, returning the real part and the largest imaginary
    /// residue.
    pub fn inverse_real(&self, spectrum: &[Complex64], out: &mut [f64]) -> f64 {
        let mut buf = spectrum.to_vec();
        self.inverse(&mut buf);
        let mut residue: f64 = 0.0;
        for (o, z) in out.iter_mut().zip(&buf) {
            *o = z.re;
            residue = residue.max(z.im.abs());
        }
        residue
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let np = self.grid.points;
        assert_eq!(data.len(), self.grid.len());
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // axis 0 is contiguous
        plan.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex64::default(); np];
        for axis in 1..self.grid.n {
            let stride = np.pow(axis as u32);
            let block = stride * np;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for (i, z) in line.iter_mut().enumerate() {
                        *z = data[base + off + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, z) in line.iter().enumerate() {
                        data[base + off + i * stride] = *z;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_checks() {
        assert!(Grid::new(4, 32, 1.0).is_err());
        assert!(Grid::new(1, 24, 1.0).is_err());
        assert!(Grid::new(1, 8, 1.0).is_err());
        assert!(Grid::new(2, 32, 0.0).is_err());
        let g = Grid::new(2, 32, 4.0).unwrap();
        assert_eq!(g.len(), 1024);
        assert_eq!(g.mesh(), 0.25);
        assert!(g.cutoff() < g.nyquist());
        assert_eq!(g.freq_index(31), -1);
        assert_eq!(g.shell_key(33), 2);
    }

    #[test]
    fn derivative_of_a_mode() {
        let g = Grid::new(1, 64, std::f64::consts::PI).unwrap();
        let tr = Transform::new(g);
        let u: Vec<f64> = (0..64).map(|i| (3.0 * g.coord(i)).sin()).collect();
        let mut hat = tr.forward_real(&u);
        for (i, z) in hat.iter_mut().enumerate() {
            *z *= Complex64::new(0.0, g.wavevector(i)[0]);
        }
        let mut du = vec![0.0; 64];
        tr.inverse_real(&hat, &mut du);
        for i in 0..64 {
            assert!((du[i] - 3.0 * (3.0 * g.coord(i)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_3d() {
        let g = Grid::new(3, 16, 2.0).unwrap();
        let tr = Transform::new(g);
        let u: Vec<f64> = (0..g.len()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let hat = tr.forward_real(&u);
        let mut back = vec![0.0; g.len()];
        let residue = tr.inverse_real(&hat, &mut back);
        assert!(residue < 1e-13);
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
