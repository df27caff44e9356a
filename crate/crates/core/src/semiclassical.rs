// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Classical steady states of the coupled signal/idler/pump equations,
//! their linear stability, and the parametric-oscillation threshold.
//!
//! Amplitudes live in the frame rotating at the mode frequencies, with the
//! pump resonant. Drives enter as rates F = sqrt(kappa) <in>, so for the
//! non-degenerate amplifier
//!
//! ```text
//! da/dt = -ka/2 a - g3 b* c + Fa
//! db/dt = -kb/2 b - g3 a* c
//! dc/dt = -kc/2 c + g3 a b + Fc
//! ```
//!
//! and for the degenerate one `da/dt = -ka/2 a - 2 g2 a* c + Fa`,
//! `dc/dt = -kc/2 c + g2 a^2 + Fc`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ParampError, Result};
use crate::fluctuations::{lyapunov_covariance, np_threshold_photons};
use crate::model::{AmplifierModel, DriveConditions, Topology};

const DEDUP_RTOL: f64 = 1e-8;
const DEGENERATE_DEDUP_RTOL: f64 = 1e-4;
const SINGULAR_RATIO: f64 = 1e-6;
const STALL_RTOL: f64 = 1e-9;
const LEVELS: [usize; 3] = [32, 128, 512];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Signal, optional idler and pump amplitudes (sqrt(photons)).
    pub amplitudes: Vec<Complex64>,
    pub stability: Stability,
    pub jacobian_eigenvalues: Vec<Complex64>,
    /// Residual norm relative to the size of the individual terms.
    pub residual: f64,
    /// True when the state is one representative of a continuous family
    /// related by the idler-phase symmetry (non-degenerate, no signal).
    pub phase_degenerate: bool,
}

impl SteadyState {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

/// Complex drive rates sqrt(kappa) <in> on the signal and pump ports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDrives {
    pub signal: Complex64,
    pub pump: Complex64,
}

impl ModeDrives {
    /// Rates produced by the incident tones. The signal defines the phase
    /// reference; the pump enters as sqrt(kc) |c_in| e^{-i theta_c}.
    pub fn from_drive(model: &AmplifierModel, drive: &DriveConditions) -> Self {
        Self {
            signal: Complex64::from(model.signal.kappa.sqrt() * drive.signal_flux.sqrt()),
            pump: model.pump.kappa.sqrt() * drive.pump_flux_amplitude * Complex64::from_polar(1.0, -drive.pump_phase),
        }
    }
}

/// Pump phase for which the steady amplitudes are real with the signal in
/// the amplified quadrature.
pub fn phase_locking_pump_phase(model: &AmplifierModel) -> f64 {
    match model.topology {
        Topology::Degenerate => PI,
        Topology::NonDegenerate => 0.0,
    }
}

/// Resonant drive with the phase-locking pump phase.
pub fn phase_locked_drive(model: &AmplifierModel, pump_flux: f64, signal_flux: f64) -> DriveConditions {
    let mut d = DriveConditions::resonant(model, pump_flux.sqrt(), signal_flux);
    d.pump_phase = phase_locking_pump_phase(model);
    d
}

/// Right-hand side of the classical equations for one model and drive.
#[derive(Debug, Clone)]
pub struct CoupledModes {
    pub topology: Topology,
    pub kappas: Vec<f64>,
    pub coupling: f64,
    pub drives: Vec<Complex64>,
}

impl CoupledModes {
    pub fn new(model: &AmplifierModel, drives: ModeDrives) -> Self {
        let kappas: Vec<f64> = model.mode_list().iter().map(|m| m.kappa).collect();
        let mut d = vec![Complex64::new(0.0, 0.0); kappas.len()];
        d[0] = drives.signal;
        *d.last_mut().unwrap() = drives.pump;
        Self { topology: model.topology, kappas, coupling: model.coupling, drives: d }
    }

    pub fn n_modes(&self) -> usize {
        self.kappas.len()
    }

    pub fn rhs(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); z.len()];
        self.rhs_into(z, &mut out);
        out
    }

    pub fn rhs_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        let g = self.coupling;
        let k = &self.kappas;
        match self.topology {
            Topology::NonDegenerate => {
                let (a, b, c) = (z[0], z[1], z[2]);
                out[0] = -0.5 * k[0] * a - g * b.conj() * c + self.drives[0];
                out[1] = -0.5 * k[1] * b - g * a.conj() * c + self.drives[1];
                out[2] = -0.5 * k[2] * c + g * a * b + self.drives[2];
            }
            Topology::Degenerate => {
                let (a, c) = (z[0], z[1]);
                out[0] = -0.5 * k[0] * a - 2.0 * g * a.conj() * c + self.drives[0];
                out[1] = -0.5 * k[1] * c + g * a * a + self.drives[1];
            }
        }
    }

    /// Sum of term magnitudes per equation, used to make residuals relative.
    fn term_scale(&self, z: &[Complex64]) -> f64 {
        let g = self.coupling;
        let k = &self.kappas;
        let mut s = 0.0;
        match self.topology {
            Topology::NonDegenerate => {
                let (a, b, c) = (z[0].norm(), z[1].norm(), z[2].norm());
                s += 0.5 * k[0] * a + g * b * c + self.drives[0].norm();
                s += 0.5 * k[1] * b + g * a * c + self.drives[1].norm();
                s += 0.5 * k[2] * c + g * a * b + self.drives[2].norm();
            }
            Topology::Degenerate => {
                let (a, c) = (z[0].norm(), z[1].norm());
                s += 0.5 * k[0] * a + 2.0 * g * a * c + self.drives[0].norm();
                s += 0.5 * k[1] * c + g * a * a + self.drives[1].norm();
            }
        }
        s
    }

    pub fn relative_residual(&self, z: &[Complex64]) -> f64 {
        let r: f64 = self.rhs(z).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let s = self.term_scale(z);
        if s == 0.0 {
            r
        } else {
            r / s
        }
    }

    /// Wirtinger derivatives (df/dz, df/dz*) of the right-hand side.
    fn wirtinger(&self, z: &[Complex64]) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let n = self.n_modes();
        let g = self.coupling;
        let k = &self.kappas;
        let zero = Complex64::new(0.0, 0.0);
        let mut dz = DMatrix::from_element(n, n, zero);
        let mut dzc = DMatrix::from_element(n, n, zero);
        match self.topology {
            Topology::NonDegenerate => {
                let (a, b, c) = (z[0], z[1], z[2]);
                dz[(0, 0)] = Complex64::from(-0.5 * k[0]);
                dzc[(0, 1)] = -g * c;
                dz[(0, 2)] = -g * b.conj();
                dz[(1, 1)] = Complex64::from(-0.5 * k[1]);
                dzc[(1, 0)] = -g * c;
                dz[(1, 2)] = -g * a.conj();
                dz[(2, 2)] = Complex64::from(-0.5 * k[2]);
                dz[(2, 0)] = g * b;
                dz[(2, 1)] = g * a;
            }
            Topology::Degenerate => {
                let (a, c) = (z[0], z[1]);
                dz[(0, 0)] = Complex64::from(-0.5 * k[0]);
                dzc[(0, 0)] = -2.0 * g * c;
                dz[(0, 1)] = -2.0 * g * a.conj();
                dz[(1, 1)] = Complex64::from(-0.5 * k[1]);
                dz[(1, 0)] = 2.0 * g * a;
            }
        }
        (dz, dzc)
    }

    /// Real Jacobian in quadrature-major coordinates
    /// `[Re z_0, .., Re z_{n-1}, Im z_0, .., Im z_{n-1}]`.
    pub fn jacobian(&self, z: &[Complex64]) -> DMatrix<f64> {
        let n = self.n_modes();
        let (dz, dzc) = self.wirtinger(z);
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        let i = Complex64::new(0.0, 1.0);
        for r in 0..n {
            for c in 0..n {
                let dx = dz[(r, c)] + dzc[(r, c)];
                let dy = i * (dz[(r, c)] - dzc[(r, c)]);
                j[(r, c)] = dx.re;
                j[(r, n + c)] = dy.re;
                j[(n + r, c)] = dx.im;
                j[(n + r, n + c)] = dy.im;
            }
        }
        j
    }

    fn rate_scale(&self) -> f64 {
        self.kappas.iter().cloned().fold(0.0, f64::max)
    }
}

pub(crate) fn to_real(z: &[Complex64]) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(2 * n, |i, _| if i < n { z[i].re } else { z[i - n].im })
}

pub(crate) fn from_real(x: &DVector<f64>) -> Vec<Complex64> {
    let n = x.len() / 2;
    (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect()
}

fn classify(eigs: &[Complex64], scale: f64) -> Stability {
    let max_re = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * scale;
    if max_re < -tol {
        Stability::Stable
    } else if max_re <= tol {
        Stability::Marginal
    } else {
        Stability::Unstable
    }
}

fn eigenvalues(j: &DMatrix<f64>) -> Vec<Complex64> {
    j.complex_eigenvalues().iter().cloned().collect()
}

/// Damped Newton on a real system, with backtracking on the residual norm.
fn newton<F, J>(f: F, jac: J, mut x: DVector<f64>, tol: f64) -> Option<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut fx = f(&x);
    let mut norm = fx.norm();
    for _ in 0..200 {
        if !norm.is_finite() {
            return None;
        }
        let step = jac(&x).lu().solve(&(-&fx))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &x + t * &step;
            let ft = f(&trial);
            let nt = ft.norm();
            if nt.is_finite() && nt < (1.0 - 1e-4 * t) * norm {
                x = trial;
                fx = ft;
                norm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if step.norm() <= tol * (1.0 + x.norm()) {
            return Some(x);
        }
        if !accepted {
            // Stalled on rounding: a genuine root has a negligible Newton step.
            return (step.norm() <= STALL_RTOL * (1.0 + x.norm())).then_some(x);
        }
    }
    None
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 6] = [2, 3, 5, 7, 11, 13];

/// Typical amplitude of each mode: the threshold pump scale, enlarged by the
/// oscillation amplitude expected above threshold and by the stiff response.
fn amplitude_scales(model: &AmplifierModel, sys: &CoupledModes) -> Vec<f64> {
    let n_thr = np_threshold_photons(model);
    let kc = model.pump.kappa;
    let c_stiff = 2.0 * sys.drives.last().unwrap().norm() / kc;
    let pump_ratio = c_stiff / n_thr.sqrt();
    let osc = (2.0 * kc / model.signal.kappa * (pump_ratio - 1.0).max(0.0)).sqrt();
    let lin = 2.0 * sys.drives[0].norm() / model.signal.kappa / n_thr.sqrt();
    let signal_scale = n_thr.sqrt() * (1.0 + osc + lin.cbrt().max(lin.min(1.0)));
    let mut s: Vec<f64> = vec![signal_scale; sys.n_modes()];
    *s.last_mut().unwrap() = n_thr.sqrt().max(c_stiff) * 1.5;
    s
}

fn dedup_push(roots: &mut Vec<Vec<Complex64>>, z: Vec<Complex64>, rtol: f64) -> bool {
    let norm: f64 = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for r in roots.iter() {
        let d: f64 = r.iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        if d <= rtol * (1.0 + norm) {
            return false;
        }
    }
    roots.push(z);
    true
}

/// Rotates a non-degenerate zero-signal state so that the signal amplitude is
/// real and non-negative.
fn fix_gauge(z: &mut [Complex64]) {
    if z[0].norm() > 0.0 {
        let ph = Complex64::from_polar(1.0, -z[0].arg());
        z[0] *= ph;
        z[1] *= ph.conj();
        z[0].im = 0.0;
    }
}

/// Dedup tolerance for a root: roots at which the Jacobian is numerically
/// singular (bifurcation points) are only located to a few digits.
fn root_tolerance(j: &DMatrix<f64>) -> f64 {
    let sv = j.singular_values();
    let max = sv.max();
    if max > 0.0 && sv.min() < SINGULAR_RATIO * max {
        DEGENERATE_DEDUP_RTOL
    } else {
        DEDUP_RTOL
    }
}

/// Runs the multi-start search with increasing lattice sizes until one level
/// finds nothing new.
fn multistart<S, P>(dims: usize, scales: &[f64], solve: S, post: P) -> Result<Vec<Vec<Complex64>>>
where
    S: Fn(DVector<f64>) -> Option<(Vec<Complex64>, f64)> + Sync,
    P: Fn(&mut Vec<Complex64>) + Sync,
{
    let mut roots: Vec<Vec<Complex64>> = Vec::new();
    let mut offset = 1;
    for (level, &n) in LEVELS.iter().enumerate() {
        let found: Vec<(Vec<Complex64>, f64)> = (offset..offset + n)
            .into_par_iter()
            .filter_map(|k| {
                let x0 =
                    DVector::from_fn(dims, |d, _| scales[d % scales.len()] * 3.0 * (2.0 * halton(k, PRIMES[d]) - 1.0));
                let (mut z, tol) = solve(x0)?;
                post(&mut z);
                Some((z, tol))
            })
            .collect();
        offset += n;
        let mut new = 0;
        for (z, tol) in found {
            if dedup_push(&mut roots, z, tol) {
                new += 1;
            }
        }
        if level > 0 && new == 0 {
            return Ok(roots);
        }
        if level == 0 && roots.is_empty() {
            continue;
        }
    }
    Err(ParampError::SolverExhausted)
}

fn build_state(sys: &CoupledModes, z: Vec<Complex64>, phase_degenerate: bool) -> SteadyState {
    let eigs = eigenvalues(&sys.jacobian(&z));
    SteadyState {
        residual: sys.relative_residual(&z),
        stability: classify(&eigs, sys.rate_scale()),
        jacobian_eigenvalues: eigs,
        amplitudes: z,
        phase_degenerate,
    }
}

/// All steady states for a resonantly pumped amplifier.
pub fn steady_states(model: &AmplifierModel, drive: &DriveConditions) -> Result<Vec<SteadyState>> {
    drive.validate()?;
    if !drive.is_resonant(model) {
        return Err(ParampError::InvalidParameter(
            "steady states are only defined for resonant pumping in the rotating frame".into(),
        ));
    }
    steady_states_for(model, ModeDrives::from_drive(model, drive))
}

pub fn steady_states_for(model: &AmplifierModel, drives: ModeDrives) -> Result<Vec<SteadyState>> {
    let sys = CoupledModes::new(model, drives);
    let n = sys.n_modes();
    let scales = amplitude_scales(model, &sys);
    let gauge = model.topology == Topology::NonDegenerate && drives.signal.norm() == 0.0;
    let f = |x: &DVector<f64>| to_real(&sys.rhs(&from_real(x)));
    let jac = |x: &DVector<f64>| sys.jacobian(&from_real(x));
    let roots = multistart(
        2 * n,
        &scales,
        |x0| {
            let x = newton(f, jac, x0, 1e-15)?;
            let z = from_real(&x);
            (sys.relative_residual(&z) < 1e-11).then(|| {
                let tol = root_tolerance(&sys.jacobian(&z));
                (z, tol)
            })
        },
        |z| {
            if gauge {
                fix_gauge(z);
            }
        },
    )?;
    let mut states: Vec<SteadyState> = roots
        .into_iter()
        .map(|z| {
            let degenerate_family = gauge && z[0].norm() > 1e-9 * scales[0];
            build_state(&sys, z, degenerate_family)
        })
        .collect();
    sort_states(&mut states);
    Ok(states)
}

fn sort_states(states: &mut [SteadyState]) {
    states.sort_by(|a, b| {
        let ka = (a.amplitudes[0].norm(), a.amplitudes[0].re);
        let kb = (b.amplitudes[0].norm(), b.amplitudes[0].re);
        ka.partial_cmp(&kb).unwrap()
    });
}

/// Steady states restricted to real amplitudes for real drives, with stability
/// judged inside that phase-locked subspace.
///
/// For real drives and real amplitudes the Jacobian splits into a block for
/// the real parts and a block for the imaginary parts; only the former is
/// used for the classification here.
pub fn phase_locked_states(model: &AmplifierModel, signal_drive: f64, pump_drive: f64) -> Result<Vec<SteadyState>> {
    let drives = ModeDrives { signal: Complex64::from(signal_drive), pump: Complex64::from(pump_drive) };
    let sys = CoupledModes::new(model, drives);
    let n = sys.n_modes();
    let scales = amplitude_scales(model, &sys);
    let lift = |x: &DVector<f64>| -> Vec<Complex64> { x.iter().map(|&v| Complex64::from(v)).collect() };
    let f = |x: &DVector<f64>| DVector::from_iterator(n, sys.rhs(&lift(x)).iter().map(|c| c.re));
    let jac = |x: &DVector<f64>| sys.jacobian(&lift(x)).view((0, 0), (n, n)).into_owned();
    let roots = multistart(
        n,
        &scales,
        |x0| {
            let x = newton(f, jac, x0, 1e-15)?;
            let z = lift(&x);
            (sys.relative_residual(&z) < 1e-11).then(|| (z, root_tolerance(&jac(&x))))
        },
        |_| {},
    )?;
    let mut states: Vec<SteadyState> = roots
        .into_iter()
        .map(|z| {
            let real_block = sys.jacobian(&z).view((0, 0), (n, n)).into_owned();
            let eigs = eigenvalues(&real_block);
            SteadyState {
                residual: sys.relative_residual(&z),
                stability: classify(&eigs, sys.rate_scale()),
                jacobian_eigenvalues: eigs,
                amplitudes: z,
                phase_degenerate: false,
            }
        })
        .collect();
    sort_states(&mut states);
    Ok(states)
}

/// Result of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdOutcome {
    /// Pump flux |c_in|^2 (photons/s) at which a second stable state appears.
    Found(f64),
    /// No multiplicity up to the pump cap.
    NoThreshold,
}

impl ThresholdOutcome {
    pub fn pump_flux(&self) -> Option<f64> {
        match self {
            ThresholdOutcome::Found(p) => Some(*p),
            ThresholdOutcome::NoThreshold => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    /// Pump cap in dB above the zero-signal threshold.
    pub cap_db: f64,
    /// Coarse pump grid spacing in dB.
    pub grid_step_db: f64,
    /// Start of the scan relative to the zero-signal threshold, in dB.
    pub start_db: f64,
    pub relative_tolerance: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self { cap_db: 40.0, grid_step_db: 0.5, start_db: -3.0, relative_tolerance: 1e-4 }
    }
}

fn stable_count(model: &AmplifierModel, signal_drive: f64, pump_flux: f64) -> Result<Option<usize>> {
    let pump_drive = pump_sign(model) * model.pump.kappa.sqrt() * pump_flux.sqrt();
    let states = phase_locked_states(model, signal_drive, pump_drive)?;
    if states.iter().any(|s| s.stability == Stability::Marginal) {
        return Ok(None);
    }
    Ok(Some(states.iter().filter(|s| s.is_stable()).count()))
}

fn pump_sign(model: &AmplifierModel) -> f64 {
    phase_locking_pump_phase(model).cos()
}

/// Counts stable phase-locked states, nudging the probe off marginal points.
fn robust_count(model: &AmplifierModel, signal_drive: f64, pump_flux: f64) -> Result<usize> {
    for k in 0..8 {
        let nudge = 1.0 + 1e-6 * (k as f64) * if k % 2 == 0 { 1.0 } else { -1.0 };
        match stable_count(model, signal_drive, pump_flux * nudge) {
            Ok(Some(c)) => return Ok(c),
            Ok(None) | Err(ParampError::SolverExhausted) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ParampError::Inconclusive(format!(
        "marginal or unresolved steady states persist around pump flux {pump_flux:e}"
    )))
}

/// Smallest pump flux |c_in|^2 giving more than one stable steady state, for
/// a coherent signal of `signal_flux` photons/s.
pub fn oscillation_threshold(
    model: &AmplifierModel,
    signal_flux: f64,
    config: &ThresholdConfig,
) -> Result<ThresholdOutcome> {
    threshold_bracket(model, signal_flux, config).map(|b| match b {
        Some((_, hi)) => ThresholdOutcome::Found(hi),
        None => ThresholdOutcome::NoThreshold,
    })
}

/// Returns the final bisection bracket (single-state pump, multi-state pump).
fn threshold_bracket(model: &AmplifierModel, signal_flux: f64, config: &ThresholdConfig) -> Result<Option<(f64, f64)>> {
    if !(signal_flux >= 0.0) {
        return Err(ParampError::InvalidParameter("signal flux must be non-negative".into()));
    }
    let p0 = model.zero_signal_threshold_flux();
    let signal_drive = model.signal.kappa.sqrt() * signal_flux.sqrt();
    let wrap = |e: ParampError| match e {
        ParampError::SolverExhausted => ParampError::Inconclusive("steady-state search did not settle".into()),
        other => other,
    };
    let first = p0 * 10f64.powf(config.start_db / 10.0);
    if robust_count(model, signal_drive, first).map_err(wrap)? > 1 {
        return Err(ParampError::Inconclusive(format!("already multistable at the scan start {first:e}")));
    }
    let steps = ((config.cap_db - config.start_db) / config.grid_step_db).ceil() as usize;
    let mut lo = first;
    for k in 1..=steps {
        let db = (config.start_db + k as f64 * config.grid_step_db).min(config.cap_db);
        let p = p0 * 10f64.powf(db / 10.0);
        if robust_count(model, signal_drive, p).map_err(wrap)? > 1 {
            let mut hi = p;
            while hi / lo - 1.0 > config.relative_tolerance {
                let mid = (lo * hi).sqrt();
                if robust_count(model, signal_drive, mid).map_err(wrap)? > 1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some((lo, hi)));
        }
        lo = p;
    }
    Ok(None)
}

/// Thresholds for a list of signal fluxes, evaluated in parallel.
pub fn threshold_curve(
    model: &AmplifierModel,
    signal_fluxes: &[f64],
    config: &ThresholdConfig,
) -> Vec<Result<ThresholdOutcome>> {
    signal_fluxes.par_iter().map(|&p| oscillation_threshold(model, p, config)).collect()
}

/// Output flux on the signal port at the largest pump that still gives a
/// unique stable state: the coherent part |-a_in + sqrt(ka) a|^2 plus the
/// normally ordered noise of the linearized fluctuations.
pub fn max_output_before_oscillation(
    model: &AmplifierModel,
    signal_flux: f64,
    config: &ThresholdConfig,
) -> Result<f64> {
    let (below, _) = threshold_bracket(model, signal_flux, config)?
        .ok_or_else(|| ParampError::Inconclusive("no oscillation threshold below the pump cap".into()))?;
    let signal_drive = model.signal.kappa.sqrt() * signal_flux.sqrt();
    let pump_drive = pump_sign(model) * model.pump.kappa.sqrt() * below.sqrt();
    let states = phase_locked_states(model, signal_drive, pump_drive)?;
    let state = states
        .iter()
        .find(|s| s.is_stable())
        .ok_or_else(|| ParampError::Inconclusive("no stable state below threshold".into()))?;
    output_flux_at(model, signal_drive, &state.amplitudes, pump_drive)
}

/// Coherent plus fluctuation output flux at a given stable steady state.
pub fn output_flux_at(
    model: &AmplifierModel,
    signal_drive: f64,
    amplitudes: &[Complex64],
    pump_drive: f64,
) -> Result<f64> {
    let ka = model.signal.kappa;
    let a_in = signal_drive / ka.sqrt();
    let coherent = (-a_in + ka.sqrt() * amplitudes[0]).norm_sqr();
    let sys = CoupledModes::new(
        model,
        ModeDrives { signal: Complex64::from(signal_drive), pump: Complex64::from(pump_drive) },
    );
    let n = sys.n_modes();
    let drift = -sys.jacobian(amplitudes);
    let diffusion = DVector::from_fn(2 * n, |i, _| sys.kappas[i % n] / 8.0);
    let cov = lyapunov_covariance(&drift, &diffusion)?;
    let noise = ka * (cov[(0, 0)] + cov[(n, n)] - 0.5);
    Ok(coherent + noise)
}

/// Scaled variables used in the phase-space analysis: amplitudes divided by
/// sqrt(n_thr) and drives lambda = F / sqrt(n_thr).
pub fn to_scaled(model: &AmplifierModel, z: &[Complex64]) -> Vec<Complex64> {
    let s = np_threshold_photons(model).sqrt();
    z.iter().map(|x| x / s).collect()
}

/// Scaled equations: for the degenerate amplifier
/// `da/dt = -ka/2 a - ka/2 a* c + la`, `dc/dt = -kc/2 c + ka/4 a^2 + lc`;
/// for the non-degenerate one the couplings become sqrt(ka kb)/2.
pub fn scaled_rhs(model: &AmplifierModel, z: &[Complex64], lambda_a: Complex64, lambda_c: Complex64) -> Vec<Complex64> {
    let ka = model.signal.kappa;
    let kc = model.pump.kappa;
    match model.topology {
        Topology::Degenerate => {
            let (a, c) = (z[0], z[1]);
            vec![-0.5 * ka * a - 0.5 * ka * a.conj() * c + lambda_a, -0.5 * kc * c + 0.25 * ka * a * a + lambda_c]
        }
        Topology::NonDegenerate => {
            let kb = model.idler_mode().kappa;
            let x = 0.5 * (ka * kb).sqrt();
            let (a, b, c) = (z[0], z[1], z[2]);
            vec![
                -0.5 * ka * a - x * b.conj() * c + lambda_a,
                -0.5 * kb * b - x * a.conj() * c,
                -0.5 * kc * c + x * a * b + lambda_c,
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModeParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rk4(sys: &CoupledModes, mut z: Vec<Complex64>, dt: f64, steps: usize) -> Vec<Complex64> {
        let add = |z: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
            z.iter().zip(k).map(|(a, b)| a + h * b).collect()
        };
        for _ in 0..steps {
            let k1 = sys.rhs(&z);
            let k2 = sys.rhs(&add(&z, &k1, dt / 2.0));
            let k3 = sys.rhs(&add(&z, &k2, dt / 2.0));
            let k4 = sys.rhs(&add(&z, &k3, dt));
            for i in 0..z.len() {
                z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        z
    }

    fn small_model(topology: Topology, kc_ratio: f64) -> AmplifierModel {
        // Scaled units: kappa_a = 2, n_thr = 16.
        let a = ModeParams::new(2000.0, 2.0).unwrap();
        let c = ModeParams::new(4000.0, 2.0 * kc_ratio).unwrap();
        match topology {
            Topology::Degenerate => AmplifierModel::degenerate(a, c, 2.0 / 16.0).unwrap(),
            Topology::NonDegenerate => {
                let b = ModeParams::new(1500.0, 2.0).unwrap();
                AmplifierModel::non_degenerate(a, b, ModeParams::new(3500.0, 2.0 * kc_ratio).unwrap(), 2.0 / 8.0)
                    .unwrap()
            }
        }
    }

    #[test]
    fn trivial_state_without_drive() {
        for m in [AmplifierModel::reference_degenerate(), AmplifierModel::reference_non_degenerate()] {
            let d = DriveConditions::resonant(&m, 0.0, 0.0);
            let s = steady_states(&m, &d).unwrap();
            assert_eq!(s.len(), 1);
            assert!(s[0].amplitudes.iter().all(|z| z.norm() == 0.0));
            assert!(s[0].is_stable());
        }
    }

    #[test]
    fn degenerate_below_threshold_unique() {
        let m = AmplifierModel::reference_degenerate();
        let d = phase_locked_drive(&m, 0.5 * m.zero_signal_threshold_flux(), 0.0);
        let s = steady_states(&m, &d).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].is_stable());
        assert!(s[0].amplitudes[0].norm() < 1e-6);
    }

    #[test]
    fn degenerate_above_threshold_pair() {
        let m = small_model(Topology::Degenerate, 6.0);
        let d = phase_locked_drive(&m, 2.0 * m.zero_signal_threshold_flux(), 0.0);
        let s = steady_states(&m, &d).unwrap();
        let trivial: Vec<_> = s.iter().filter(|x| x.amplitudes[0].norm() < 1e-9).collect();
        assert_eq!(trivial.len(), 1);
        assert_eq!(trivial[0].stability, Stability::Unstable);
        let osc: Vec<_> = s.iter().filter(|x| x.amplitudes[0].norm() > 1e-6 && x.is_stable()).collect();
        assert_eq!(osc.len(), 2);
        assert!((osc[0].amplitudes[0] + osc[1].amplitudes[0]).norm() < 1e-9 * osc[0].amplitudes[0].norm());
        assert!((osc[0].amplitudes[1] - osc[1].amplitudes[1]).norm() < 1e-9 * osc[0].amplitudes[1].norm());
    }

    #[test]
    fn non_degenerate_above_threshold_family() {
        let m = small_model(Topology::NonDegenerate, 6.0);
        let d = phase_locked_drive(&m, 1.2 * m.zero_signal_threshold_flux(), 0.0);
        let s = steady_states(&m, &d).unwrap();
        let trivial = s.iter().find(|x| x.amplitudes[0].norm() < 1e-9).unwrap();
        assert_eq!(trivial.stability, Stability::Unstable);
        let osc: Vec<_> = s.iter().filter(|x| x.amplitudes[0].norm() > 1e-6).collect();
        assert_eq!(osc.len(), 1);
        assert!(osc[0].phase_degenerate);
        assert_eq!(osc[0].stability, Stability::Marginal);
        // Time integration from a random start lands on the same |a|.
        let sys = CoupledModes::new(&m, ModeDrives::from_drive(&m, &d));
        let z = rk4(
            &sys,
            vec![Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.4), Complex64::new(0.0, 0.0)],
            0.005,
            40_000,
        );
        assert!((z[0].norm() - osc[0].amplitudes[0].norm()).abs() < 1e-6 * osc[0].amplitudes[0].norm());
    }

    #[test]
    fn residuals_small_and_stability_matches_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..24 {
            let topo = if trial % 2 == 0 { Topology::Degenerate } else { Topology::NonDegenerate };
            let m = small_model(topo, rng.gen_range(3.0..8.0));
            let pump = rng.gen_range(0.2..3.0) * m.zero_signal_threshold_flux();
            let signal = rng.gen_range(0.0..4.0);
            let mut d = phase_locked_drive(&m, pump, signal);
            d.pump_phase += rng.gen_range(-0.5..0.5);
            let states = steady_states(&m, &d).unwrap();
            let sys = CoupledModes::new(&m, ModeDrives::from_drive(&m, &d));
            for s in &states {
                assert!(s.residual < 1e-10, "residual {}", s.residual);
                if s.stability == Stability::Marginal {
                    continue;
                }
                let z0: Vec<Complex64> = s
                    .amplitudes
                    .iter()
                    .map(|z| z + Complex64::new(rng.gen_range(-1e-4..1e-4), rng.gen_range(-1e-4..1e-4)))
                    .collect();
                let z = rk4(&sys, z0, 0.01, 20_000);
                let dist: f64 = z.iter().zip(&s.amplitudes).map(|(a, b)| (a - b).norm()).sum();
                if s.is_stable() {
                    assert!(dist < 1e-6, "trial {trial}: stable state drifted by {dist}");
                } else {
                    assert!(dist > 1e-3, "trial {trial}: unstable state stayed put");
                }
            }
        }
    }

    #[test]
    fn scaled_equations_map_exactly() {
        for m in [AmplifierModel::reference_degenerate(), AmplifierModel::reference_non_degenerate()] {
            let d = phase_locked_drive(&m, 1.7 * m.zero_signal_threshold_flux(), 3e9);
            let drives = ModeDrives::from_drive(&m, &d);
            let sys = CoupledModes::new(&m, drives);
            let s = np_threshold_photons(&m).sqrt();
            let z = vec![Complex64::new(120.0, -40.0); sys.n_modes()];
            let full = sys.rhs(&z);
            let scaled = scaled_rhs(&m, &to_scaled(&m, &z), drives.signal / s, drives.pump / s);
            for (f, g) in full.iter().zip(&scaled) {
                assert!((f / s - g).norm() < 1e-12 * (f / s).norm().max(1.0));
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for m in [small_model(Topology::Degenerate, 5.0), small_model(Topology::NonDegenerate, 5.0)] {
            let sys =
                CoupledModes::new(&m, ModeDrives { signal: Complex64::new(0.4, 0.1), pump: Complex64::new(-3.0, 1.0) });
            let z: Vec<Complex64> =
                (0..sys.n_modes()).map(|i| Complex64::new(0.3 + i as f64, -0.7 * i as f64)).collect();
            let x = to_real(&z);
            let j = sys.jacobian(&z);
            let h = 1e-6;
            for c in 0..x.len() {
                let mut xp = x.clone();
                xp[c] += h;
                let mut xm = x.clone();
                xm[c] -= h;
                let fp = to_real(&sys.rhs(&from_real(&xp)));
                let fm = to_real(&sys.rhs(&from_real(&xm)));
                for r in 0..x.len() {
                    assert!(((fp[r] - fm[r]) / (2.0 * h) - j[(r, c)]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn zero_signal_threshold_matches_analytic() {
        for m in [small_model(Topology::Degenerate, 6.0), small_model(Topology::NonDegenerate, 6.0)] {
            let t = oscillation_threshold(&m, 0.0, &ThresholdConfig::default()).unwrap();
            let p = t.pump_flux().unwrap();
            assert!((p / m.zero_signal_threshold_flux() - 1.0).abs() < 1e-3, "{p}");
        }
    }

    #[test]
    fn threshold_rises_with_signal() {
        let m = small_model(Topology::Degenerate, 6.0);
        let cfg = ThresholdConfig::default();
        let mut last = 0.0;
        for p in [0.0, 0.01, 0.1, 1.0] {
            let t = oscillation_threshold(&m, p, &cfg).unwrap().pump_flux().unwrap();
            assert!(t >= last);
            last = t;
        }
    }
}
