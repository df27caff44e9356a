// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Linearized Fokker-Planck description of quadrature fluctuations around a
//! classical steady state, its stationary Gaussian covariance and Gaussian
//! Wigner marginals on grids.
//!
//! Coordinates are quadrature-major: `[Re a, (Re b), Re c, Im a, (Im b), Im c]`.
//! The drift convention is `dx = -A x dt + noise`, so a stable point has all
//! eigenvalues of `A` in the right half plane.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ParampError, Result};
use crate::model::{AmplifierModel, Topology};
use crate::semiclassical::{CoupledModes, ModeDrives, SteadyState};

const REALNESS_TOL: f64 = 1e-9;

/// Pump photon number at the oscillation threshold:
/// ka^2 / (16 g2^2) or ka kb / (4 g3^2).
pub fn np_threshold_photons(model: &AmplifierModel) -> f64 {
    let g = model.coupling;
    match model.topology {
        Topology::Degenerate => model.signal.kappa.powi(2) / (16.0 * g * g),
        Topology::NonDegenerate => model.signal.kappa * model.idler_mode().kappa / (4.0 * g * g),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationState {
    pub drift: DMatrix<f64>,
    pub diffusion: DVector<f64>,
    pub covariance: Option<DMatrix<f64>>,
}

impl FluctuationState {
    pub fn dim(&self) -> usize {
        self.diffusion.len()
    }

    /// Residual of `A S + S A^T - 2 diag(d)` for the stored covariance.
    pub fn lyapunov_residual(&self) -> Option<f64> {
        self.covariance.as_ref().map(|s| lyapunov_residual(&self.drift, &self.diffusion, s))
    }
}

fn diffusion_for(kappas: &[f64]) -> DVector<f64> {
    let n = kappas.len();
    DVector::from_fn(2 * n, |i, _| kappas[i % n] / 8.0)
}

/// Drift and diffusion from the factorized quadrature equations. The steady
/// amplitudes must be real up to rounding.
pub fn assemble_fokker_planck(model: &AmplifierModel, steady: &SteadyState) -> Result<FluctuationState> {
    let z = &steady.amplitudes;
    let scale = z.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let residue = z.iter().map(|x| x.im.abs()).fold(0.0, f64::max) / scale;
    if residue > REALNESS_TOL {
        return Err(ParampError::PhaseConventionUnavailable { residue });
    }
    let s = np_threshold_photons(model).sqrt();
    let ka = model.signal.kappa;
    let kc = model.pump.kappa;
    let kappas: Vec<f64> = model.mode_list().iter().map(|m| m.kappa).collect();
    let n = kappas.len();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    match model.topology {
        Topology::Degenerate => {
            let (a0, c0) = (z[0].re / s, z[1].re / s);
            for j in 0..2 {
                let sign = if j == 0 { -1.0 } else { 1.0 };
                let (iz, iu) = (j * n, j * n + 1);
                a[(iz, iz)] = 0.5 * ka * (1.0 - sign * c0);
                a[(iz, iu)] = 0.5 * ka * a0;
                a[(iu, iz)] = -0.5 * ka * a0;
                a[(iu, iu)] = 0.5 * kc;
            }
        }
        Topology::NonDegenerate => {
            let kb = model.idler_mode().kappa;
            let k = 0.5 * (ka * kb).sqrt();
            let (a0, b0, c0) = (z[0].re / s, z[1].re / s, z[2].re / s);
            for j in 0..2 {
                let sign = if j == 0 { -1.0 } else { 1.0 };
                let (iz, iw, iu) = (j * n, j * n + 1, j * n + 2);
                a[(iz, iz)] = 0.5 * ka;
                a[(iz, iw)] = -sign * k * c0;
                a[(iz, iu)] = k * b0;
                a[(iw, iz)] = -sign * k * c0;
                a[(iw, iw)] = 0.5 * kb;
                a[(iw, iu)] = k * a0;
                a[(iu, iz)] = -k * b0;
                a[(iu, iw)] = -k * a0;
                a[(iu, iu)] = 0.5 * kc;
            }
        }
    }
    Ok(FluctuationState { drift: a, diffusion: diffusion_for(&kappas), covariance: None })
}

/// Drift and diffusion from the Jacobian of the full classical equations at
/// an arbitrary (possibly complex) steady state.
pub fn linearize(model: &AmplifierModel, amplitudes: &[Complex64]) -> FluctuationState {
    let sys = CoupledModes::new(model, ModeDrives { signal: Complex64::new(0.0, 0.0), pump: Complex64::new(0.0, 0.0) });
    FluctuationState { drift: -sys.jacobian(amplitudes), diffusion: diffusion_for(&sys.kappas), covariance: None }
}

fn lyapunov_residual(a: &DMatrix<f64>, d: &DVector<f64>, s: &DMatrix<f64>) -> f64 {
    let mut r = a * s + s * a.transpose();
    for i in 0..d.len() {
        r[(i, i)] -= 2.0 * d[i];
    }
    let scale = d.iter().map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    r.abs().max() / (2.0 * scale)
}

/// Solves `A S + S A^T = 2 diag(d)` through the vectorized linear system.
pub fn lyapunov_covariance(a: &DMatrix<f64>, d: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = d.len();
    let eye = DMatrix::<f64>::identity(n, n);
    let big = eye.kronecker(a) + a.kronecker(&eye);
    let mut rhs = DVector::zeros(n * n);
    for i in 0..n {
        rhs[i * n + i] = 2.0 * d[i];
    }
    let x = big.lu().solve(&rhs).ok_or(ParampError::MarginallyStable { max_real: 0.0 })?;
    let s = DMatrix::from_column_slice(n, n, x.as_slice());
    let s = 0.5 * (&s + s.transpose());
    let res = lyapunov_residual(a, d, &s);
    if !(res < 1e-10) {
        return Err(ParampError::NonConvergence { iterations: 1, residual: res, history: vec![res] });
    }
    Ok(s)
}

/// Stationary covariance of a stable linearized state.
pub fn steady_covariance(fluc: &FluctuationState) -> Result<DMatrix<f64>> {
    let scale = fluc.drift.diagonal().iter().map(|x| x.abs()).fold(0.0, f64::max);
    let min_real = fluc.drift.complex_eigenvalues().iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
    if min_real <= 1e-12 * scale {
        return Err(ParampError::MarginallyStable { max_real: -min_real });
    }
    lyapunov_covariance(&fluc.drift, &fluc.diffusion)
}

impl FluctuationState {
    pub fn with_covariance(mut self) -> Result<Self> {
        self.covariance = Some(steady_covariance(&self)?);
        Ok(self)
    }
}

/// Uniform grid of cell centers on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl Grid2D {
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, nx: n, y_min: -half_width, y_max: half_width, ny: n }
    }

    pub fn centered(cx: f64, cy: f64, half_width: f64, n: usize) -> Self {
        Self {
            x_min: cx - half_width,
            x_max: cx + half_width,
            nx: n,
            y_min: cy - half_width,
            y_max: cy + half_width,
            ny: n,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (j as f64 + 0.5) * self.dy()
    }

    fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(ParampError::InvalidParameter(format!("degenerate grid {self:?}")));
        }
        Ok(())
    }
}

/// Scalar field sampled on a [`Grid2D`]; `values[(j, i)]` sits at `(x(i), y(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: DMatrix<f64>,
    pub x_label: String,
    pub y_label: String,
}

impl Field2D {
    /// Sum of the values times the cell area.
    pub fn mass(&self) -> f64 {
        self.values.sum() * self.grid.dx() * self.grid.dy()
    }

    /// Whitespace matrix with `# axis` header lines; one row per y value.
    pub fn write_matrix<W: Write>(&self, mut w: W, title: &str) -> std::io::Result<()> {
        let g = &self.grid;
        writeln!(w, "# field {title}")?;
        writeln!(w, "# axis x {} min {:e} max {:e} bins {}", self.x_label, g.x_min, g.x_max, g.nx)?;
        writeln!(w, "# axis y {} min {:e} max {:e} bins {}", self.y_label, g.y_min, g.y_max, g.ny)?;
        for j in 0..g.ny {
            let row: Vec<String> = (0..g.nx).map(|i| format!("{:.9e}", self.values[(j, i)])).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Gaussian density of the 2D marginal over coordinates `coords` on `grid`,
/// renormalized so that its discrete integral is one.
pub fn gaussian_wigner_grid(
    covariance: &DMatrix<f64>,
    means: &DVector<f64>,
    coords: (usize, usize),
    grid: &Grid2D,
) -> Result<Field2D> {
    grid.validate()?;
    let (p, q) = coords;
    let n = covariance.nrows();
    if p >= n || q >= n || p == q || means.len() != n {
        return Err(ParampError::InvalidParameter(format!("bad coordinate pair {coords:?}")));
    }
    let (sxx, syy, sxy) = (covariance[(p, p)], covariance[(q, q)], covariance[(p, q)]);
    let det = sxx * syy - sxy * sxy;
    if !(sxx > 0.0 && det > 0.0) {
        return Err(ParampError::InvalidParameter("marginal covariance is not positive definite".into()));
    }
    let (mx, my) = (means[p], means[q]);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
    let rows: Vec<Vec<f64>> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let y = grid.y(j) - my;
            (0..grid.nx)
                .map(|i| {
                    let x = grid.x(i) - mx;
                    let e = (syy * x * x - 2.0 * sxy * x * y + sxx * y * y) / det;
                    norm * (-0.5 * e).exp()
                })
                .collect()
        })
        .collect();
    let values = DMatrix::from_fn(grid.ny, grid.nx, |j, i| rows[j][i]);
    let mut field = Field2D { grid: *grid, values, x_label: format!("q{p}"), y_label: format!("q{q}") };
    let mass = field.mass();
    if mass < 0.999 {
        return Err(ParampError::GridTooNarrow { mass });
    }
    field.values /= mass;
    Ok(field)
}

/// Normally ordered output flux of the signal port from symmetric moments of
/// the intracavity field: ka(<|a|^2>_W - 1/2) - 2 sqrt(ka) Re(a_in* <a>) + |a_in|^2.
pub fn normally_ordered_output_flux(kappa: f64, mean: Complex64, var_re: f64, var_im: f64, a_in: Complex64) -> f64 {
    let second_moment = mean.norm_sqr() + var_re + var_im;
    kappa * (second_moment - 0.5) - 2.0 * kappa.sqrt() * (a_in.conj() * mean).re + a_in.norm_sqr()
}
