// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated-Wigner Monte Carlo: Langevin trajectories for the drift and
//! diffusion part of the Wigner evolution, and ensemble statistics.
//!
//! Each mode obeys `dz = f(z) dt + sqrt(kappa/4) (dW1 + i dW2)` with the
//! classical right-hand side `f` of [`crate::semiclassical::CoupledModes`].
//! Trajectory `k` is seeded from stream `k` of a ChaCha8 generator keyed by
//! the master seed, so results do not depend on scheduling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::SmallRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{ParampError, Result};
use crate::fluctuations::{normally_ordered_output_flux, Field2D, Grid2D};
use crate::model::{AmplifierModel, DriveConditions, Topology};
use crate::semiclassical::{CoupledModes, ModeDrives};

const BLOWUP: f64 = 1e6;
const MIN_SAMPLES: usize = 100;
const BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    EulerMaruyama,
    /// Stochastic Heun (predictor-corrector with the same increments).
    Heun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    /// Integration time in seconds.
    pub t_final: f64,
    /// Step in seconds; `None` selects 0.005 / kappa_c.
    pub dt: Option<f64>,
    pub burn_in: f64,
    /// Number of equally spaced sample times in `[burn_in, t_final]`.
    pub n_samples: usize,
    pub master_seed: u64,
    pub integrator: Integrator,
    /// Center of the initial vacuum Gaussian; zero amplitudes when `None`.
    pub initial_mean: Option<Vec<Complex64>>,
}

impl EnsembleConfig {
    pub fn new(n_traj: usize, t_final: f64, burn_in: f64, master_seed: u64) -> Self {
        Self {
            n_traj,
            t_final,
            dt: None,
            burn_in,
            n_samples: 1,
            master_seed,
            integrator: Integrator::EulerMaruyama,
            initial_mean: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub n_traj: usize,
    pub n_modes: usize,
    pub t_final: f64,
    pub dt: f64,
    pub burn_in: f64,
    pub sample_times: Vec<f64>,
    /// Amplitudes laid out as `[trajectory][sample time][mode]`.
    pub samples: Vec<Complex64>,
    pub master_seed: u64,
    pub kappas: Vec<f64>,
    pub drives: ModeDrives,
}

impl TrajectoryEnsemble {
    pub fn n_times(&self) -> usize {
        self.sample_times.len()
    }

    pub fn n_points(&self) -> usize {
        self.n_traj * self.n_times()
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    /// Quadrature-major coordinate vector of one sample.
    fn coords(&self, point: usize) -> impl Iterator<Item = f64> + '_ {
        let z = &self.samples[point * self.n_modes..(point + 1) * self.n_modes];
        z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im))
    }

    fn coord(&self, point: usize, k: usize) -> f64 {
        let n = self.n_modes;
        let z = self.samples[point * n + k % n];
        if k < n {
            z.re
        } else {
            z.im
        }
    }

    /// Sample index ranges of contiguous trajectory batches.
    fn batches(&self) -> Vec<std::ops::Range<usize>> {
        let b = BATCHES.min(self.n_traj);
        let t = self.n_times();
        (0..b).map(|i| (i * self.n_traj / b) * t..((i + 1) * self.n_traj / b) * t).collect()
    }

    fn check_size(&self) -> Result<()> {
        if self.n_points() < MIN_SAMPLES || self.n_traj < 2 {
            return Err(ParampError::InsufficientSamples { available: self.n_points(), required: MIN_SAMPLES });
        }
        Ok(())
    }
}

/// Largest rate in the problem: linewidths and the parametric rates
/// (largest off-diagonal Jacobian entry, 2g|amplitude|) at the stiff-pump and
/// linear-response amplitudes.
fn rate_scale(sys: &CoupledModes) -> f64 {
    let kmax = sys.kappas.iter().cloned().fold(0.0, f64::max);
    let kc = *sys.kappas.last().unwrap();
    let c = 2.0 * sys.drives.last().unwrap().norm() / kc;
    let a = 2.0 * sys.drives[0].norm() / sys.kappas[0];
    kmax.max(2.0 * sys.coupling * c).max(2.0 * sys.coupling * a)
}

/// Largest step accepted by the stability guard, 0.01 / (largest rate).
pub fn max_time_step(model: &AmplifierModel, drives: ModeDrives) -> f64 {
    0.01 / rate_scale(&CoupledModes::new(model, drives))
}

/// Generator of trajectory `index`: a Xoshiro256++ state drawn from stream
/// `index` of a ChaCha8 generator keyed by the master seed.
fn trajectory_rng(master_seed: u64, index: usize) -> SmallRng {
    let mut key = ChaCha8Rng::seed_from_u64(master_seed);
    key.set_stream(index as u64);
    let mut seed = <SmallRng as SeedableRng>::Seed::default();
    key.fill_bytes(seed.as_mut());
    SmallRng::from_seed(seed)
}

fn normal_pair(rng: &mut SmallRng, scale: f64) -> Complex64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * x, scale * y)
}

struct TrajectoryFailure {
    index: usize,
    time: f64,
    amplitude: f64,
}

/// Trajectories advanced together by one task, stored lane-wise so the
/// drift vectorizes across trajectories.
const LANES: usize = 8;

type Lanes = [f64; LANES];

#[derive(Clone, Copy)]
struct Block<const N: usize> {
    re: [Lanes; N],
    im: [Lanes; N],
}

impl<const N: usize> Block<N> {
    fn zero() -> Self {
        Self { re: [[0.0; LANES]; N], im: [[0.0; LANES]; N] }
    }

    fn get(&self, lane: usize, m: usize) -> Complex64 {
        Complex64::new(self.re[m][lane], self.im[m][lane])
    }
}

/// Drift of a fixed number of modes, specialized so the inner loop has no
/// dynamic dispatch or allocation.
trait Drift<const N: usize>: Sync {
    fn eval(&self, z: &Block<N>, out: &mut Block<N>);
}

struct DegenerateDrift {
    half_k: [f64; 2],
    g: f64,
    f: [Complex64; 2],
}

impl Drift<2> for DegenerateDrift {
    #[inline(always)]
    fn eval(&self, z: &Block<2>, out: &mut Block<2>) {
        let [ka, kc] = self.half_k;
        let (g, g2) = (self.g, 2.0 * self.g);
        let [fa, fc] = self.f;
        for l in 0..LANES {
            let (ar, ai, cr, ci) = (z.re[0][l], z.im[0][l], z.re[1][l], z.im[1][l]);
            out.re[0][l] = -ka * ar - g2 * (ar * cr + ai * ci) + fa.re;
            out.im[0][l] = -ka * ai - g2 * (ar * ci - ai * cr) + fa.im;
            out.re[1][l] = -kc * cr + g * (ar * ar - ai * ai) + fc.re;
            out.im[1][l] = -kc * ci + g2 * ar * ai + fc.im;
        }
    }
}

struct NonDegenerateDrift {
    half_k: [f64; 3],
    g: f64,
    f: [Complex64; 3],
}

impl Drift<3> for NonDegenerateDrift {
    #[inline(always)]
    fn eval(&self, z: &Block<3>, out: &mut Block<3>) {
        let [ka, kb, kc] = self.half_k;
        let g = self.g;
        let [fa, fb, fc] = self.f;
        for l in 0..LANES {
            let (ar, ai) = (z.re[0][l], z.im[0][l]);
            let (br, bi) = (z.re[1][l], z.im[1][l]);
            let (cr, ci) = (z.re[2][l], z.im[2][l]);
            out.re[0][l] = -ka * ar - g * (br * cr + bi * ci) + fa.re;
            out.im[0][l] = -ka * ai - g * (br * ci - bi * cr) + fa.im;
            out.re[1][l] = -kb * br - g * (ar * cr + ai * ci) + fb.re;
            out.im[1][l] = -kb * bi - g * (ar * ci - ai * cr) + fb.im;
            out.re[2][l] = -kc * cr + g * (ar * br - ai * bi) + fc.re;
            out.im[2][l] = -kc * ci + g * (ar * bi + ai * br) + fc.im;
        }
    }
}

struct StepPlan<'a> {
    config: &'a EnsembleConfig,
    kappas: &'a [f64],
    dt: f64,
    n_steps: usize,
    sample_steps: &'a [usize],
}

fn run_block<const N: usize, const HEUN: bool, D: Drift<N>>(
    drift: &D,
    plan: &StepPlan,
    first_index: usize,
) -> Vec<std::result::Result<Vec<Complex64>, TrajectoryFailure>> {
    let dt = plan.dt;
    let lanes = LANES.min(plan.config.n_traj - first_index);
    let mut noise = [0.0; N];
    for m in 0..N {
        noise[m] = (plan.kappas[m] / 4.0 * dt).sqrt();
    }
    let mut rngs: Vec<SmallRng> =
        (0..lanes).map(|l| trajectory_rng(plan.config.master_seed, first_index + l)).collect();
    let mut z = Block::<N>::zero();
    for (l, rng) in rngs.iter_mut().enumerate() {
        for m in 0..N {
            let mean = plan.config.initial_mean.as_ref().map_or(Complex64::new(0.0, 0.0), |v| v[m]);
            let x = mean + normal_pair(rng, 0.5);
            z.re[m][l] = x.re;
            z.im[m][l] = x.im;
        }
    }
    let mut out: Vec<Vec<Complex64>> = (0..lanes).map(|_| Vec::with_capacity(plan.sample_steps.len() * N)).collect();
    let mut failure = None;
    let mut next = 0;
    let mut dw = Block::<N>::zero();
    let mut f0 = Block::<N>::zero();
    let mut f1 = Block::<N>::zero();
    let mut pred = Block::<N>::zero();
    for step in 0..=plan.n_steps {
        while next < plan.sample_steps.len() && plan.sample_steps[next] == step {
            for (l, o) in out.iter_mut().enumerate() {
                o.extend((0..N).map(|m| z.get(l, m)));
            }
            next += 1;
        }
        if step == plan.n_steps {
            break;
        }
        for (l, rng) in rngs.iter_mut().enumerate() {
            for m in 0..N {
                let x = normal_pair(rng, noise[m]);
                dw.re[m][l] = x.re;
                dw.im[m][l] = x.im;
            }
        }
        drift.eval(&z, &mut f0);
        if HEUN {
            for m in 0..N {
                for l in 0..LANES {
                    pred.re[m][l] = z.re[m][l] + f0.re[m][l] * dt + dw.re[m][l];
                    pred.im[m][l] = z.im[m][l] + f0.im[m][l] * dt + dw.im[m][l];
                }
            }
            drift.eval(&pred, &mut f1);
            let h = 0.5 * dt;
            for m in 0..N {
                for l in 0..LANES {
                    z.re[m][l] += (f0.re[m][l] + f1.re[m][l]) * h + dw.re[m][l];
                    z.im[m][l] += (f0.im[m][l] + f1.im[m][l]) * h + dw.im[m][l];
                }
            }
        } else {
            for m in 0..N {
                for l in 0..LANES {
                    z.re[m][l] += f0.re[m][l] * dt + dw.re[m][l];
                    z.im[m][l] += f0.im[m][l] * dt + dw.im[m][l];
                }
            }
        }
        for l in 0..lanes {
            let worst = (0..N).map(|m| z.get(l, m).norm_sqr()).fold(0.0, f64::max);
            if !(worst <= BLOWUP * BLOWUP) {
                failure = Some(TrajectoryFailure {
                    index: first_index + l,
                    time: (step + 1) as f64 * dt,
                    amplitude: worst.sqrt(),
                });
                break;
            }
        }
        if failure.is_some() {
            break;
        }
    }
    match failure {
        Some(f) => vec![Err(f)],
        None => out.into_iter().map(Ok).collect(),
    }
}

fn run_all<const N: usize, D: Drift<N>>(
    drift: &D,
    plan: &StepPlan,
) -> Vec<std::result::Result<Vec<Complex64>, TrajectoryFailure>> {
    let heun = plan.config.integrator == Integrator::Heun;
    let firsts: Vec<usize> = (0..plan.config.n_traj).step_by(LANES).collect();
    let blocks: Vec<_> = firsts
        .into_par_iter()
        .map(|first| {
            if heun {
                run_block::<N, true, D>(drift, plan, first)
            } else {
                run_block::<N, false, D>(drift, plan, first)
            }
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

pub fn simulate(
    model: &AmplifierModel,
    drive: &DriveConditions,
    config: &EnsembleConfig,
) -> Result<TrajectoryEnsemble> {
    drive.validate()?;
    if !drive.is_resonant(model) {
        return Err(ParampError::InvalidParameter(
            "Wigner sampling is implemented in the frame of a resonant pump".into(),
        ));
    }
    simulate_with_drives(model, ModeDrives::from_drive(model, drive), config)
}

pub fn simulate_with_drives(
    model: &AmplifierModel,
    drives: ModeDrives,
    config: &EnsembleConfig,
) -> Result<TrajectoryEnsemble> {
    model.validate()?;
    if model.thermal_occupation != 0.0 {
        return Err(ParampError::InvalidParameter("Wigner sampling assumes zero-temperature baths".into()));
    }
    let sys = CoupledModes::new(model, drives);
    let n = sys.n_modes();
    if config.n_traj == 0 || config.n_samples == 0 {
        return Err(ParampError::InvalidParameter("need at least one trajectory and one sample".into()));
    }
    if !(config.t_final > 0.0 && config.burn_in >= 0.0 && config.burn_in <= config.t_final) {
        return Err(ParampError::InvalidParameter(format!(
            "need 0 <= burn_in <= t_final, got {} and {}",
            config.burn_in, config.t_final
        )));
    }
    if let Some(m) = &config.initial_mean {
        if m.len() != n {
            return Err(ParampError::InvalidParameter(format!("initial mean needs {n} amplitudes")));
        }
    }
    let kc = *sys.kappas.last().unwrap();
    let dt = config.dt.unwrap_or(0.005 / kc);
    let limit = 0.01 / rate_scale(&sys);
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(ParampError::InvalidParameter(format!(
            "time step {dt:e} s exceeds the stability guard {limit:e} s"
        )));
    }
    let n_steps = (config.t_final / dt).round() as usize;
    let first = (config.burn_in / dt).round() as usize;
    let sample_steps: Vec<usize> = if config.n_samples == 1 {
        vec![n_steps]
    } else {
        (0..config.n_samples).map(|k| first + (k * (n_steps - first)) / (config.n_samples - 1)).collect()
    };
    let plan = StepPlan { config, kappas: &sys.kappas, dt, n_steps, sample_steps: &sample_steps };
    let k = &sys.kappas;
    let results = match model.topology {
        Topology::Degenerate => run_all(
            &DegenerateDrift { half_k: [0.5 * k[0], 0.5 * k[1]], g: sys.coupling, f: [sys.drives[0], sys.drives[1]] },
            &plan,
        ),
        Topology::NonDegenerate => run_all(
            &NonDegenerateDrift {
                half_k: [0.5 * k[0], 0.5 * k[1], 0.5 * k[2]],
                g: sys.coupling,
                f: [sys.drives[0], sys.drives[1], sys.drives[2]],
            },
            &plan,
        ),
    };
    let mut samples = Vec::with_capacity(config.n_traj * sample_steps.len() * n);
    for r in results {
        match r {
            Ok(v) => samples.extend(v),
            Err(f) => {
                return Err(ParampError::StepInstability { trajectory: f.index, time: f.time, amplitude: f.amplitude })
            }
        }
    }
    Ok(TrajectoryEnsemble {
        n_traj: config.n_traj,
        n_modes: n,
        t_final: n_steps as f64 * dt,
        dt,
        burn_in: first as f64 * dt,
        sample_times: sample_steps.iter().map(|&s| s as f64 * dt).collect(),
        samples,
        master_seed: config.master_seed,
        kappas: sys.kappas.clone(),
        drives,
    })
}

/// A Monte Carlo estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
}

impl Estimate {
    /// Deviation from `reference` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.standard_error
    }
}

fn batch_error(values: &[f64]) -> f64 {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Evaluates a statistic on the whole ensemble and on each trajectory batch.
fn batched<F>(ens: &TrajectoryEnsemble, stat: F) -> Result<Estimate>
where
    F: Fn(std::ops::Range<usize>) -> f64,
{
    ens.check_size()?;
    let per_batch: Vec<f64> = ens.batches().into_iter().map(&stat).collect();
    Ok(Estimate { value: stat(0..ens.n_points()), standard_error: batch_error(&per_batch) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub standard_error: DMatrix<f64>,
    pub samples: usize,
}

impl CovarianceEstimate {
    /// Largest |sample - reference| / SE over all entries.
    pub fn max_z_score(&self, reference: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.covariance.nrows() {
            for j in 0..self.covariance.ncols() {
                let z = (self.covariance[(i, j)] - reference[(i, j)]).abs() / self.standard_error[(i, j)];
                worst = worst.max(z);
            }
        }
        worst
    }
}

fn covariance_over(ens: &TrajectoryEnsemble, range: std::ops::Range<usize>) -> (DVector<f64>, DMatrix<f64>) {
    let d = ens.dim();
    let count = range.len() as f64;
    let mut mean = DVector::zeros(d);
    for p in range.clone() {
        for (k, x) in ens.coords(p).enumerate() {
            mean[k] += x;
        }
    }
    mean /= count;
    let mut cov = DMatrix::zeros(d, d);
    let mut x = DVector::zeros(d);
    for p in range {
        for (k, v) in ens.coords(p).enumerate() {
            x[k] = v - mean[k];
        }
        cov.ger(1.0, &x, &x, 1.0);
    }
    cov /= count - 1.0;
    (mean, cov)
}

/// Unbiased sample covariance over trajectories and sample times in
/// quadrature-major coordinates.
pub fn sample_covariance(ens: &TrajectoryEnsemble) -> Result<CovarianceEstimate> {
    ens.check_size()?;
    let (mean, covariance) = covariance_over(ens, 0..ens.n_points());
    let batches: Vec<DMatrix<f64>> = ens.batches().into_iter().map(|r| covariance_over(ens, r).1).collect();
    let d = ens.dim();
    let standard_error = DMatrix::from_fn(d, d, |i, j| {
        let v: Vec<f64> = batches.iter().map(|c| c[(i, j)]).collect();
        batch_error(&v)
    });
    Ok(CovarianceEstimate { mean, covariance, standard_error, samples: ens.n_points() })
}

/// Normally ordered signal output flux (photons/s).
pub fn output_flux_estimate(ens: &TrajectoryEnsemble) -> Result<Estimate> {
    let ka = ens.kappas[0];
    let a_in = ens.drives.signal / ka.sqrt();
    let n = ens.n_modes;
    batched(ens, |r| {
        let count = r.len() as f64;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        for p in r {
            let z = ens.samples[p * n];
            mean += z;
            second += z.norm_sqr();
        }
        mean /= count;
        second /= count;
        // Split the second moment so that the helper's |mean|^2 + variances adds back up.
        let var = second - mean.norm_sqr();
        normally_ordered_output_flux(ka, mean, 0.5 * var, 0.5 * var, a_in)
    })
}

/// Mean of one quadrature coordinate.
pub fn coordinate_mean(ens: &TrajectoryEnsemble, coord: usize) -> Result<Estimate> {
    check_coord(ens, coord)?;
    batched(ens, |r| {
        let count = r.len() as f64;
        r.map(|p| ens.coord(p, coord)).sum::<f64>() / count
    })
}

/// Excess kurtosis of one quadrature coordinate.
pub fn excess_kurtosis(ens: &TrajectoryEnsemble, coord: usize) -> Result<Estimate> {
    check_coord(ens, coord)?;
    batched(ens, |r| {
        let count = r.len() as f64;
        let mean = r.clone().map(|p| ens.coord(p, coord)).sum::<f64>() / count;
        let (mut m2, mut m4) = (0.0, 0.0);
        for p in r {
            let x = ens.coord(p, coord) - mean;
            m2 += x * x;
            m4 += x.powi(4);
        }
        m2 /= count;
        m4 /= count;
        m4 / (m2 * m2) - 3.0
    })
}

/// Circular variance 1 - |<e^{i arg z}>| of the phase of one mode.
pub fn phase_variance(ens: &TrajectoryEnsemble, mode: usize) -> Result<Estimate> {
    if mode >= ens.n_modes {
        return Err(ParampError::InvalidParameter(format!("no mode {mode}")));
    }
    let n = ens.n_modes;
    batched(ens, |r| {
        let count = r.len() as f64;
        let s: Complex64 = r
            .map(|p| {
                let z = ens.samples[p * n + mode];
                if z.norm() > 0.0 {
                    z / z.norm()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .sum();
        1.0 - (s / count).norm()
    })
}

fn check_coord(ens: &TrajectoryEnsemble, coord: usize) -> Result<()> {
    if coord >= ens.dim() {
        return Err(ParampError::InvalidParameter(format!("no coordinate {coord}")));
    }
    Ok(())
}

/// Normalized 2D histogram (probability density) of a coordinate pair.
/// Samples outside the grid are dropped; the returned field carries the
/// captured fraction as its mass.
pub fn histogram2d(ens: &TrajectoryEnsemble, coords: (usize, usize), grid: &Grid2D) -> Result<Field2D> {
    check_coord(ens, coords.0)?;
    check_coord(ens, coords.1)?;
    ens.check_size()?;
    let mut counts = DMatrix::<f64>::zeros(grid.ny, grid.nx);
    for p in 0..ens.n_points() {
        let x = (ens.coord(p, coords.0) - grid.x_min) / grid.dx();
        let y = (ens.coord(p, coords.1) - grid.y_min) / grid.dy();
        if x >= 0.0 && y >= 0.0 && (x as usize) < grid.nx && (y as usize) < grid.ny {
            counts[(y as usize, x as usize)] += 1.0;
        }
    }
    let norm = ens.n_points() as f64 * grid.dx() * grid.dy();
    Ok(Field2D {
        grid: *grid,
        values: counts / norm,
        x_label: format!("q{}", coords.0),
        y_label: format!("q{}", coords.1),
    })
}
