// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Mean-field pump depletion: the self-consistent reduced coupling, gain and
//! output power against incident signal power, and 1 dB compression points.

use crate::error::{ParampError, Result};
use crate::model::{
    dbm_to_flux, flux_to_dbm, ideal_gain, linear_to_db, reduced_coupling, AmplifierModel, DriveConditions, Topology,
};

/// A solved point on the depleted gain curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepletedOperatingPoint {
    pub rho: f64,
    pub rho0: f64,
    pub gain: f64,
    pub p_out_total: f64,
    pub p_in_coh: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl DepletedOperatingPoint {
    pub fn gain_db(&self) -> f64 {
        linear_to_db(self.gain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Under-relaxation factor of the fixed-point map.
    pub relaxation: f64,
    /// Absolute tolerance on |rho - RHS(rho)|.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { relaxation: 0.3, tolerance: 1e-12, max_iterations: 100_000 }
    }
}

/// Right-hand side of the self-consistency relation,
/// rho0 |1 - rho0 s rho/(1-rho^2)^2 - v rho/(1-rho^2)|.
#[derive(Debug, Clone, Copy)]
struct Relation {
    rho0: f64,
    /// P_in / P_c.
    s: f64,
    /// g / (2 sqrt(kappa_c) |c_in|).
    v: f64,
}

impl Relation {
    fn inner(&self, rho: f64) -> f64 {
        let q = 1.0 - rho * rho;
        1.0 - self.rho0 * self.s * rho / (q * q) - self.v * rho / q
    }

    fn rhs(&self, rho: f64) -> f64 {
        self.rho0 * self.inner(rho).abs()
    }

    fn residual(&self, rho: f64) -> f64 {
        rho - self.rhs(rho)
    }

    fn residual_derivative(&self, rho: f64) -> f64 {
        let r2 = rho * rho;
        let q = 1.0 - r2;
        let d_inner = -self.rho0 * self.s * (1.0 + 3.0 * r2) / (q * q * q) - self.v * (1.0 + r2) / (q * q);
        1.0 - self.rho0 * self.inner(rho).signum() * d_inner
    }
}

fn relation(model: &AmplifierModel, drive: &DriveConditions) -> Result<Relation> {
    drive.validate()?;
    let rho0 = reduced_coupling(model, drive);
    if rho0 >= 1.0 {
        return Err(ParampError::AboveThreshold { rho0 });
    }
    let pc = drive.pump_flux();
    let (s, v) = if pc > 0.0 {
        (drive.signal_flux / pc, model.coupling / (2.0 * model.pump.kappa.sqrt() * drive.pump_flux_amplitude))
    } else {
        (0.0, 0.0)
    };
    Ok(Relation { rho0, s, v })
}

fn point(
    model: &AmplifierModel,
    drive: &DriveConditions,
    rel: &Relation,
    rho: f64,
    iterations: usize,
    tol: f64,
) -> DepletedOperatingPoint {
    let residual = rel.residual(rho).abs();
    let gain = ideal_gain(rho).unwrap_or(f64::INFINITY);
    DepletedOperatingPoint {
        rho,
        rho0: rel.rho0,
        gain,
        p_out_total: output_power_for(model.topology, model.signal.kappa, rho, drive.signal_flux),
        p_in_coh: drive.signal_flux,
        converged: residual < tol,
        iterations,
        residual,
    }
}

/// Solves the depletion relation for either topology, warm-starting from
/// `warm_start` (the undepleted value when `None`).
pub fn solve_rho(
    model: &AmplifierModel,
    drive: &DriveConditions,
    config: &SolverConfig,
    warm_start: Option<f64>,
) -> Result<DepletedOperatingPoint> {
    let rel = relation(model, drive)?;
    if rel.rho0 == 0.0 {
        return Ok(point(model, drive, &rel, 0.0, 0, config.tolerance));
    }
    if !(config.relaxation > 0.0 && config.relaxation <= 1.0) {
        return Err(ParampError::InvalidParameter(format!(
            "relaxation factor must lie in (0, 1], got {}",
            config.relaxation
        )));
    }
    let start = warm_start.unwrap_or(rel.rho0).clamp(0.0, rel.rho0);

    let mut rho = start;
    let mut history = Vec::new();
    let mut used = 0;
    for k in 0..config.max_iterations {
        used = k + 1;
        let f = rel.residual(rho);
        if k % 1000 == 0 {
            history.push(f.abs());
        }
        if f.abs() < config.tolerance {
            if rel.inner(rho) >= 0.0 {
                return Ok(point(model, drive, &rel, rho, k, config.tolerance));
            }
            break;
        }
        let next = rho - config.relaxation * f;
        if !(0.0..1.0).contains(&next) || !next.is_finite() {
            break;
        }
        rho = next;
    }

    match bracketed_newton(&rel, start, config.tolerance) {
        Some((r, iters)) => Ok(point(model, drive, &rel, r, used + iters, config.tolerance)),
        None => Err(ParampError::NonConvergence { iterations: used, residual: rel.residual(rho).abs(), history }),
    }
}

/// Safeguarded Newton on F(rho) = rho - RHS(rho).
///
/// The bracketed expression decreases monotonically in rho, and where it is
/// positive F is strictly increasing with F(0) < 0. The branch connected to
/// the undepleted limit therefore is the unique root below the first zero of
/// the bracket, which gives a guaranteed enclosure.
fn bracketed_newton(rel: &Relation, guess: f64, tol: f64) -> Option<(f64, usize)> {
    let mut lo = 0.0;
    let mut hi = rel.rho0;
    if rel.inner(hi) < 0.0 {
        let (mut a, mut b) = (0.0, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if rel.inner(m) >= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        hi = a;
    }
    if rel.residual(hi) < 0.0 {
        return None;
    }
    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for it in 1..=500 {
        let f = rel.residual(x);
        if f.abs() < tol {
            return Some((x, it));
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let df = rel.residual_derivative(x);
        let newton = x - f / df;
        x = if df.is_finite() && df != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-16 {
            return Some((x, it));
        }
    }
    None
}

pub fn solve_rho_ndpa(model: &AmplifierModel, drive: &DriveConditions) -> Result<DepletedOperatingPoint> {
    if model.topology != Topology::NonDegenerate {
        return Err(ParampError::InvalidParameter("expected a non-degenerate model".into()));
    }
    solve_rho(model, drive, &SolverConfig::default(), None)
}

pub fn solve_rho_dpa(model: &AmplifierModel, drive: &DriveConditions) -> Result<DepletedOperatingPoint> {
    if model.topology != Topology::Degenerate {
        return Err(ParampError::InvalidParameter("expected a degenerate model".into()));
    }
    solve_rho(model, drive, &SolverConfig::default(), None)
}

/// Amplified vacuum noise reaching the signal output, (kappa_a/sqrt(G))(G-1)(1+rho^2)/8.
pub fn vacuum_output_floor(kappa_a: f64, rho: f64) -> f64 {
    let gain = match ideal_gain(rho) {
        Ok(g) => g,
        Err(_) => return f64::INFINITY,
    };
    kappa_a / gain.sqrt() * (gain - 1.0) * (1.0 + rho * rho) / 8.0
}

fn output_power_for(topology: Topology, kappa_a: f64, rho: f64, p_in: f64) -> f64 {
    let gain = ideal_gain(rho).unwrap_or(f64::INFINITY);
    let coherent = match topology {
        Topology::NonDegenerate => gain * p_in,
        Topology::Degenerate => (2.0 * gain - 1.0) * p_in,
    };
    coherent + vacuum_output_floor(kappa_a, rho)
}

/// Total output flux on the signal port at a solved operating point.
pub fn output_power(model: &AmplifierModel, point: &DepletedOperatingPoint) -> f64 {
    output_power_for(model.topology, model.signal.kappa, point.rho, point.p_in_coh)
}

/// Solves along increasing signal fluxes, warm-starting each point from the
/// previous one so the branch connected to the undepleted limit is followed.
///
/// Points that fail are returned as errors in place; the sweep continues from
/// the last good solution.
pub fn gain_sweep(
    model: &AmplifierModel,
    drive_template: &DriveConditions,
    signal_fluxes: &[f64],
    config: &SolverConfig,
) -> Vec<Result<DepletedOperatingPoint>> {
    let mut warm = None;
    let mut out = Vec::with_capacity(signal_fluxes.len());
    for &p in signal_fluxes {
        let drive = DriveConditions { signal_flux: p, ..*drive_template };
        let r = solve_rho(model, &drive, config, warm);
        if let Ok(pt) = &r {
            warm = Some(pt.rho);
        }
        out.push(r);
    }
    out
}

/// Logarithmic grid of incident signal powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepWindow {
    pub p_min_dbm: f64,
    pub p_max_dbm: f64,
    pub points_per_decade: usize,
}

impl SweepWindow {
    /// Window wide enough to contain the 1 dB points of 5 to 60 dB amplifiers
    /// with the reference device parameters.
    pub fn compression_default() -> Self {
        Self { p_min_dbm: -190.0, p_max_dbm: -30.0, points_per_decade: 20 }
    }

    pub fn dbm_grid(&self) -> Vec<f64> {
        let n = (((self.p_max_dbm - self.p_min_dbm) / 10.0) * self.points_per_decade as f64).round() as usize;
        (0..=n).map(|k| self.p_min_dbm + (self.p_max_dbm - self.p_min_dbm) * k as f64 / n.max(1) as f64).collect()
    }
}

/// Gain against which a compression point is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressionReference {
    /// Self-consistent gain at vanishing signal, which already includes the
    /// depletion by amplified vacuum noise.
    SmallSignal,
    /// Stiff-pump gain G0 of the undepleted coupling.
    Undepleted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionPoint {
    pub p_in: f64,
    pub p_in_dbm: f64,
    pub gain: f64,
    pub reference_gain: f64,
}

/// Finds the incident signal flux at which the gain has dropped by
/// `target_drop_db` below the reference gain.
///
/// A zero drop returns the lowest power of the window.
pub fn compression_point(
    model: &AmplifierModel,
    drive_template: &DriveConditions,
    target_drop_db: f64,
    reference: CompressionReference,
    window: &SweepWindow,
    config: &SolverConfig,
) -> Result<CompressionPoint> {
    if !(target_drop_db >= 0.0) {
        return Err(ParampError::InvalidParameter(format!(
            "compression target must be non-negative, got {target_drop_db}"
        )));
    }
    let carrier = drive_template.signal_frequency;
    let small = solve_rho(model, &DriveConditions { signal_flux: 0.0, ..*drive_template }, config, None)?;
    let reference_gain = match reference {
        CompressionReference::SmallSignal => small.gain,
        CompressionReference::Undepleted => ideal_gain(small.rho0)?,
    };
    let target = reference_gain * 10f64.powf(-0.1 * target_drop_db);
    let grid = window.dbm_grid();

    let solve_at = |dbm: f64, warm: Option<f64>| {
        solve_rho(model, &DriveConditions { signal_flux: dbm_to_flux(dbm, carrier), ..*drive_template }, config, warm)
    };

    let first = solve_at(grid[0], Some(small.rho))?;
    if target_drop_db == 0.0 || first.gain <= target {
        return Ok(CompressionPoint { p_in: first.p_in_coh, p_in_dbm: grid[0], gain: first.gain, reference_gain });
    }
    let mut prev = (grid[0], first);
    for &dbm in &grid[1..] {
        let pt = solve_at(dbm, Some(prev.1.rho))?;
        if pt.gain <= target {
            let (mut lo, mut lo_pt) = prev;
            let mut hi = dbm;
            let mut hi_pt = pt;
            // Bisect in log power until the bracket is below 1e-6 relative in flux.
            while 10f64.powf((hi - lo) / 10.0) - 1.0 > 1e-6 {
                let mid = 0.5 * (lo + hi);
                let m = solve_at(mid, Some(lo_pt.rho))?;
                if m.gain <= target {
                    hi = mid;
                    hi_pt = m;
                } else {
                    lo = mid;
                    lo_pt = m;
                }
            }
            return Ok(CompressionPoint {
                p_in: hi_pt.p_in_coh,
                p_in_dbm: flux_to_dbm(hi_pt.p_in_coh, carrier),
                gain: hi_pt.gain,
                reference_gain,
            });
        }
        prev = (dbm, pt);
    }
    Err(ParampError::NotCompressed)
}

/// Least-squares slope and intercept of gain (dB) against input power (dBm)
/// through a set of compression points.
pub fn compression_line(points: &[CompressionPoint]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(ParampError::InsufficientSamples { available: points.len(), required: 2 });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.p_in_dbm).collect();
    let ys: Vec<f64> = points.iter().map(|p| linear_to_db(p.gain)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{db_to_linear, half_photon_flux, pump_amplitude_for_rho, rho_for_gain};
    use approx::assert_relative_eq;

    fn drive_for_gain(model: &AmplifierModel, gain_db: f64) -> DriveConditions {
        let rho0 = rho_for_gain(db_to_linear(gain_db)).unwrap();
        DriveConditions::resonant(model, pump_amplitude_for_rho(model, rho0), 0.0)
    }

    #[test]
    fn no_depletion_without_signal_or_vacuum_term() {
        let rel = Relation { rho0: 0.8, s: 0.0, v: 0.0 };
        assert_eq!(rel.residual(0.8), 0.0);
        let m = AmplifierModel::reference_non_degenerate();
        let d = drive_for_gain(&m, 20.0);
        let p = solve_rho_ndpa(&m, &d).unwrap();
        // The vacuum term is tiny for these parameters but present.
        assert!(p.rho < p.rho0 && p.rho0 - p.rho < 1e-4);
        assert!(p.converged);
        assert_relative_eq!(p.gain, ideal_gain(p.rho).unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn solution_satisfies_relation_literally() {
        let m = AmplifierModel::reference_non_degenerate();
        let mut d = drive_for_gain(&m, 25.0);
        d.signal_flux = dbm_to_flux(-100.0, m.signal.omega);
        let p = solve_rho_ndpa(&m, &d).unwrap();
        let rho0 = p.rho0;
        let pc = d.pump_flux();
        let v = m.coupling / (2.0 * m.pump.kappa.sqrt() * d.pump_flux_amplitude);
        let q = 1.0 - p.rho * p.rho;
        let rhs = rho0 * (1.0 - rho0 * p.rho / (q * q) * d.signal_flux / pc - v * p.rho / q).abs();
        assert!((p.rho - rhs).abs() < 1e-12);
        assert!(p.rho <= p.rho0);
    }

    #[test]
    fn solver_configurations_agree() {
        let m = AmplifierModel::reference_degenerate();
        let mut d = drive_for_gain(&m, 30.0);
        for dbm in [-150.0, -120.0, -100.0, -80.0] {
            d.signal_flux = dbm_to_flux(dbm, m.signal.omega);
            let a = solve_rho(&m, &d, &SolverConfig::default(), None).unwrap();
            let cfg = SolverConfig { relaxation: 0.7, ..Default::default() };
            let b = solve_rho(&m, &d, &cfg, Some(0.5 * a.rho0)).unwrap();
            assert!((a.rho - b.rho).abs() < 1e-10, "{dbm}: {} vs {}", a.rho, b.rho);
        }
    }

    #[test]
    fn gain_monotone_and_output_increasing() {
        for m in [AmplifierModel::reference_non_degenerate(), AmplifierModel::reference_degenerate()] {
            let d = drive_for_gain(&m, 20.0);
            let grid: Vec<f64> = (0..=140).map(|k| dbm_to_flux(-160.0 + 0.5 * k as f64, m.signal.omega)).collect();
            let pts: Vec<_> =
                gain_sweep(&m, &d, &grid, &SolverConfig::default()).into_iter().map(|r| r.unwrap()).collect();
            for w in pts.windows(2) {
                assert!(w[1].gain <= w[0].gain * (1.0 + 1e-12));
                assert!(w[1].p_out_total > w[0].p_out_total);
            }
            let last = pts.last().unwrap();
            let g0 = ideal_gain(last.rho0).unwrap();
            let coherent_gain = match m.topology {
                Topology::NonDegenerate => g0,
                Topology::Degenerate => 2.0 * g0 - 1.0,
            };
            assert!(last.p_out_total / last.p_in_coh < coherent_gain);
        }
    }

    #[test]
    fn pump_off_output_is_input() {
        for m in [AmplifierModel::reference_non_degenerate(), AmplifierModel::reference_degenerate()] {
            let d = DriveConditions::resonant(&m, 0.0, 1e9);
            let p = solve_rho(&m, &d, &SolverConfig::default(), None).unwrap();
            assert_eq!(p.gain, 1.0);
            assert_eq!(output_power(&m, &p), 1e9);
        }
    }

    #[test]
    fn vacuum_floor_twenty_db() {
        let m = AmplifierModel::reference_non_degenerate();
        let rho = (9.0f64 / 11.0).sqrt();
        let expect = m.signal.kappa / 10.0 * 99.0 * (1.0 + 9.0 / 11.0) / 8.0;
        assert_relative_eq!(vacuum_output_floor(m.signal.kappa, rho), expect, max_relative = 1e-12);
        // Floor equals kappa rho^2 / (2 (1 - rho^2)).
        assert_relative_eq!(expect, m.signal.kappa * rho * rho / (2.0 * (1.0 - rho * rho)), max_relative = 1e-12);
        // The floor sits tens of dB above the half-photon reference line.
        assert!(expect > 10.0 * half_photon_flux(&m.signal));
    }

    #[test]
    fn degenerate_signal_term_scales_with_pump_power() {
        let m = AmplifierModel::reference_degenerate();
        let d = drive_for_gain(&m, 20.0);
        let r1 = relation(&m, &DriveConditions { signal_flux: 1e9, ..d }).unwrap();
        // Same rho0 with doubled pump power needs half the coupling.
        let mut m2 = m.clone();
        m2.coupling /= 2f64.sqrt();
        let d2 = DriveConditions { pump_flux_amplitude: d.pump_flux_amplitude * 2f64.sqrt(), signal_flux: 1e9, ..d };
        let r2 = relation(&m2, &d2).unwrap();
        assert_relative_eq!(r1.rho0, r2.rho0, max_relative = 1e-12);
        assert_relative_eq!(r2.s, r1.s / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn compression_ordering_and_zero_target() {
        let m = AmplifierModel::reference_non_degenerate();
        let w = SweepWindow::compression_default();
        let cfg = SolverConfig::default();
        let mut last = f64::INFINITY;
        for g in [5.0, 15.0, 25.0] {
            let d = drive_for_gain(&m, g);
            let c = compression_point(&m, &d, 1.0, CompressionReference::SmallSignal, &w, &cfg).unwrap();
            assert!(c.p_in < last);
            assert_relative_eq!(linear_to_db(c.reference_gain / c.gain), 1.0, epsilon = 1e-4);
            last = c.p_in;
        }
        let d = drive_for_gain(&m, 10.0);
        let c = compression_point(&m, &d, 0.0, CompressionReference::SmallSignal, &w, &cfg).unwrap();
        assert_eq!(c.p_in_dbm, w.p_min_dbm);
        let narrow = SweepWindow { p_min_dbm: -190.0, p_max_dbm: -180.0, points_per_decade: 10 };
        assert!(matches!(
            compression_point(&m, &d, 1.0, CompressionReference::SmallSignal, &narrow, &cfg),
            Err(ParampError::NotCompressed)
        ));
    }

    #[test]
    fn above_threshold_rejected() {
        let m = AmplifierModel::reference_non_degenerate();
        let d = DriveConditions::resonant(&m, pump_amplitude_for_rho(&m, 1.0), 0.0);
        assert!(matches!(solve_rho_ndpa(&m, &d), Err(ParampError::AboveThreshold { .. })));
        assert!(solve_rho_dpa(&m, &d).is_err());
    }
}
