// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! One function per CLI task. Each writes its tables into the output
//! directory and returns how many points failed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{CircuitKind, ExperimentConfig, PumpSetting};
use super::output::{num, OutputDir};
use crate::circuits::{
    double_pump_effective, duffing_effective, jrm_effective, squid_effective, DoublePumpParams, DuffingDrive,
    JunctionParams, SquidParams,
};
use crate::depletion::{compression_line, compression_point, gain_sweep, output_power, CompressionPoint};
use crate::error::{ParampError, Result};
use crate::fluctuations::{assemble_fokker_planck, gaussian_wigner_grid, np_threshold_photons, Grid2D};
use crate::model::{
    db_to_linear, dbm_to_flux, flux_to_dbm, half_photon_flux, ideal_gain, linear_to_db, pump_amplitude_for_rho,
    reduced_coupling, rho_for_gain, AmplifierModel, DriveConditions, Topology,
};
use crate::scattering::{dpa_scattering, ndpa_scattering, EffectivePump};
use crate::semiclassical::{
    max_output_before_oscillation, phase_locked_drive, steady_states, threshold_curve, ThresholdOutcome,
};
use crate::wigner_mc::{
    coordinate_mean, excess_kurtosis, histogram2d, max_time_step, output_flux_estimate, sample_covariance, simulate,
    EnsembleConfig,
};

pub type Results = BTreeMap<String, f64>;

/// Points attempted and points that failed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub total: usize,
    pub failed: usize,
}

impl Tally {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        if !ok {
            self.failed += 1;
        }
    }
}

const OK: &str = "ok";

fn status<T>(r: &Result<T>) -> String {
    match r {
        Ok(_) => OK.to_string(),
        Err(e) => e.to_string(),
    }
}

fn hz(rad: f64) -> f64 {
    rad / (2.0 * PI)
}

/// Resonant drive for one pump setting and its (G0 dB, pump dBm) labels.
fn pump_drive(model: &AmplifierModel, setting: PumpSetting, phase: f64) -> Result<(DriveConditions, f64, f64)> {
    let carrier = model.resonant_pump_frequency();
    let amplitude = match setting {
        PumpSetting::GainDb(g) => pump_amplitude_for_rho(model, rho_for_gain(db_to_linear(g))?),
        PumpSetting::PowerDbm(p) => dbm_to_flux(p, carrier).sqrt(),
    };
    let drive = DriveConditions { pump_phase: phase, ..DriveConditions::resonant(model, amplitude, 0.0) };
    let gain_db = match setting {
        PumpSetting::GainDb(g) => g,
        PumpSetting::PowerDbm(_) => ideal_gain(reduced_coupling(model, &drive)).map_or(f64::NAN, linear_to_db),
    };
    let power_dbm = if amplitude > 0.0 { flux_to_dbm(drive.pump_flux(), carrier) } else { f64::NEG_INFINITY };
    Ok((drive, gain_db, power_dbm))
}

fn setting_labels(setting: PumpSetting) -> (f64, f64) {
    match setting {
        PumpSetting::GainDb(g) => (g, f64::NAN),
        PumpSetting::PowerDbm(p) => (f64::NAN, p),
    }
}

pub fn scatter(cfg: &ExperimentConfig, model: &AmplifierModel, out: &mut OutputDir, _: &mut Results) -> Result<Tally> {
    let t = &cfg.task.scatter;
    let phase = cfg.drive.pump_phase_deg.to_radians();
    let degenerate = model.topology == Topology::Degenerate;
    let mut header =
        vec!["pump_gain_db", "pump_power_dbm", "detuning_hz", "r_ss_db", "s_si_db", "arg_r_ss_rad", "abs_det"];
    if degenerate {
        header.extend(["g_parallel_db", "g_perpendicular_db"]);
    }
    header.push("status");
    let mut rows = Vec::new();
    let mut tally = Tally::default();
    for setting in cfg.pump_settings() {
        let (drive, g0, p) = match pump_drive(model, setting, phase) {
            Ok(x) => x,
            Err(e) => {
                let (g0, p) = setting_labels(setting);
                let mut row = vec![num(g0), num(p)];
                row.resize(header.len() - 1, num(f64::NAN));
                row.push(e.to_string());
                rows.push(row);
                tally.add(false);
                continue;
            }
        };
        let pump = EffectivePump::stiff(model, &drive);
        for k in 0..t.points {
            let detuning = t.detuning_span_hz * (k as f64 / (t.points - 1) as f64 - 0.5);
            let omega_s = model.signal.omega + 2.0 * PI * detuning;
            let mut row = vec![num(g0), num(p), num(detuning)];
            let r = if degenerate {
                dpa_scattering(model, &pump, omega_s).map(|s| {
                    let (gp, gq) = s.quadrature_gains();
                    (s.block, Some((gp, gq)))
                })
            } else {
                ndpa_scattering(model, &pump, omega_s).map(|b| (b, None))
            };
            match &r {
                Ok((b, quad)) => {
                    row.push(num(linear_to_db(b.r_ss().norm_sqr())));
                    row.push(num(linear_to_db(b.s_si().norm_sqr())));
                    row.push(num(b.r_ss().arg()));
                    row.push(num(b.determinant().norm()));
                    if let Some((gp, gq)) = quad {
                        row.push(num(linear_to_db(*gp)));
                        row.push(num(linear_to_db(*gq)));
                    }
                }
                Err(_) => row.resize(header.len() - 1, num(f64::NAN)),
            }
            row.push(status(&r));
            tally.add(r.is_ok());
            rows.push(row);
        }
    }
    out.write_csv("scatter.csv", &header, &rows)?;
    Ok(tally)
}

struct Curve {
    g0_db: f64,
    pump_dbm: f64,
    rows: Vec<Vec<String>>,
    tally: Tally,
}

/// Gain or output-power curves over the signal window, one per pump setting.
fn sweep_curves(
    cfg: &ExperimentConfig,
    model: &AmplifierModel,
    settings: &[PumpSetting],
    with_output: bool,
) -> Vec<Curve> {
    let grid = cfg.signal_window().dbm_grid();
    let carrier = model.signal.omega;
    let fluxes: Vec<f64> = grid.iter().map(|&d| dbm_to_flux(d, carrier)).collect();
    let solver = cfg.solver();
    let phase = cfg.drive.pump_phase_deg.to_radians();
    let width = if with_output { 9 } else { 7 };
    settings
        .par_iter()
        .map(|&setting| {
            let mut tally = Tally::default();
            let (drive, g0, p) = match pump_drive(model, setting, phase) {
                Ok(x) => x,
                Err(e) => {
                    let (g0, p) = setting_labels(setting);
                    let mut row = vec![num(g0), num(p)];
                    row.resize(width - 1, num(f64::NAN));
                    row.push(e.to_string());
                    tally.add(false);
                    return Curve { g0_db: g0, pump_dbm: p, rows: vec![row], tally };
                }
            };
            let points = gain_sweep(model, &drive, &fluxes, &solver);
            let rows = grid
                .iter()
                .zip(&points)
                .map(|(&dbm, r)| {
                    let mut row = vec![num(g0), num(p), num(dbm)];
                    match r {
                        Ok(pt) => {
                            if with_output {
                                let flux = output_power(model, pt);
                                row.push(num(flux_to_dbm(flux, carrier)));
                                row.push(num(flux));
                            }
                            row.push(num(pt.gain_db()));
                            row.push(num(pt.rho));
                            row.push(pt.converged.to_string());
                        }
                        Err(_) => {
                            row.resize(width - 2, num(f64::NAN));
                            row.push("false".into());
                        }
                    }
                    row.push(status(r));
                    tally.add(r.as_ref().is_ok_and(|pt| pt.converged));
                    row
                })
                .collect();
            Curve { g0_db: g0, pump_dbm: p, rows, tally }
        })
        .collect()
}

pub fn gain_sweep_task(
    cfg: &ExperimentConfig,
    model: &AmplifierModel,
    out: &mut OutputDir,
    results: &mut Results,
) -> Result<Tally> {
    let settings = cfg.pump_settings();
    let curves = sweep_curves(cfg, model, &settings, false);
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for c in &curves {
        tally.total += c.tally.total;
        tally.failed += c.tally.failed;
        rows.extend(c.rows.iter().cloned());
    }
    out.write_csv(
        "gain_sweep.csv",
        &["pump_gain_db", "pump_power_dbm", "p_in_dbm", "gain_db", "rho", "converged", "status"],
        &rows,
    )?;

    let phase = cfg.drive.pump_phase_deg.to_radians();
    let window = cfg.compression_window();
    let solver = cfg.solver();
    let reference = cfg.compression_reference();
    let drop = cfg.task.gain_sweep.compression_db;
    let points: Vec<Result<CompressionPoint>> = settings
        .par_iter()
        .map(|&s| {
            let (drive, _, _) = pump_drive(model, s, phase)?;
            compression_point(model, &drive, drop, reference, &window, &solver)
        })
        .collect();
    let mut rows = Vec::new();
    let mut good = Vec::new();
    for (c, r) in curves.iter().zip(&points) {
        let mut row = vec![num(c.g0_db), num(c.pump_dbm)];
        match r {
            Ok(pt) => {
                row.extend([num(pt.p_in_dbm), num(linear_to_db(pt.gain)), num(linear_to_db(pt.reference_gain))]);
                good.push(*pt);
            }
            Err(_) => row.extend([num(f64::NAN), num(f64::NAN), num(f64::NAN)]),
        }
        row.push(status(r));
        tally.add(r.is_ok());
        rows.push(row);
    }
    out.write_csv(
        "compression_points.csv",
        &["pump_gain_db", "pump_power_dbm", "p_compression_dbm", "gain_db", "reference_gain_db", "status"],
        &rows,
    )?;
    let fit = compression_line(&good);
    let (slope, intercept) = fit.as_ref().map_or((f64::NAN, f64::NAN), |&(s, i)| (s, i));
    out.write_csv(
        "compression_fit.csv",
        &["slope_db_per_db", "intercept_db", "points", "status"],
        &[vec![num(slope), num(intercept), good.len().to_string(), status(&fit)]],
    )?;
    results.insert("compression_slope_db_per_db".into(), slope);
    Ok(tally)
}

pub fn pout_sweep(
    cfg: &ExperimentConfig,
    model: &AmplifierModel,
    out: &mut OutputDir,
    results: &mut Results,
) -> Result<Tally> {
    let mut settings = cfg.pump_settings();
    if cfg.task.pout_sweep.include_pump_off {
        settings.insert(0, PumpSetting::GainDb(0.0));
    }
    let curves = sweep_curves(cfg, model, &settings, true);
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for c in curves {
        tally.total += c.tally.total;
        tally.failed += c.tally.failed;
        rows.extend(c.rows);
    }
    out.write_csv(
        "pout_sweep.csv",
        &[
            "pump_gain_db",
            "pump_power_dbm",
            "p_in_dbm",
            "p_out_dbm",
            "p_out_photons_per_s",
            "gain_db",
            "rho",
            "converged",
            "status",
        ],
        &rows,
    )?;
    results.insert("half_photon_dbm".into(), flux_to_dbm(half_photon_flux(&model.signal), model.signal.omega));
    Ok(tally)
}

pub fn threshold_sweep(
    cfg: &ExperimentConfig,
    model: &AmplifierModel,
    out: &mut OutputDir,
    results: &mut Results,
) -> Result<Tally> {
    let t = &cfg.task.threshold_sweep;
    let window = crate::depletion::SweepWindow {
        p_min_dbm: t.signal_min_dbm,
        p_max_dbm: t.signal_max_dbm,
        points_per_decade: t.points_per_decade,
    };
    let grid = window.dbm_grid();
    let fluxes: Vec<f64> = grid.iter().map(|&d| dbm_to_flux(d, model.signal.omega)).collect();
    let thr = cfg.threshold();
    let outcomes = threshold_curve(model, &fluxes, &thr);
    let max_out: Vec<Option<Result<f64>>> = fluxes
        .par_iter()
        .zip(&outcomes)
        .map(|(&p, o)| match o {
            Ok(ThresholdOutcome::Found(_)) if t.max_output => Some(max_output_before_oscillation(model, p, &thr)),
            _ => None,
        })
        .collect();
    let zero = model.zero_signal_threshold_flux();
    let pump_carrier = model.resonant_pump_frequency();
    results.insert("zero_signal_threshold_dbm".into(), flux_to_dbm(zero, pump_carrier));
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for ((dbm, o), m) in grid.iter().zip(&outcomes).zip(&max_out) {
        let mut row = vec![num(*dbm)];
        let mut ok = o.is_ok();
        match o {
            Ok(ThresholdOutcome::Found(f)) => {
                row.push(num(flux_to_dbm(*f, pump_carrier)));
                row.push(num(linear_to_db(f / zero)));
            }
            _ => row.extend([num(f64::NAN), num(f64::NAN)]),
        }
        match m {
            Some(Ok(flux)) => row.push(num(flux_to_dbm(*flux, model.signal.omega))),
            Some(Err(_)) => {
                ok = false;
                row.push(num(f64::NAN));
            }
            None => row.push(num(f64::NAN)),
        }
        row.push(match (o, m) {
            (Err(e), _) => e.to_string(),
            (Ok(ThresholdOutcome::NoThreshold), _) => "no-threshold".into(),
            (_, Some(Err(e))) => e.to_string(),
            _ => OK.into(),
        });
        tally.add(ok);
        rows.push(row);
    }
    out.write_csv(
        "threshold_sweep.csv",
        &["p_in_dbm", "threshold_pump_dbm", "threshold_over_zero_signal_db", "max_p_out_dbm", "status"],
        &rows,
    )?;
    Ok(tally)
}

fn coordinate_names(model: &AmplifierModel) -> Vec<String> {
    let modes: &[&str] = match model.topology {
        Topology::Degenerate => &["a", "c"],
        Topology::NonDegenerate => &["a", "b", "c"],
    };
    ["re", "im"].iter().flat_map(|q| modes.iter().map(move |m| format!("{q}_{m}"))).collect()
}

pub fn wigner(
    cfg: &ExperimentConfig,
    model: &AmplifierModel,
    out: &mut OutputDir,
    results: &mut Results,
) -> Result<Tally> {
    let t = &cfg.task.wigner;
    let n = model.mode_list().len();
    let names = coordinate_names(model);
    let signal_flux = dbm_to_flux(cfg.drive.signal_power_dbm, model.signal.omega);
    let zero = model.zero_signal_threshold_flux();
    results.insert("quadrature_scale_sqrt_photons".into(), np_threshold_photons(model).sqrt());
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for (i, &pf) in t.pump_fractions.iter().enumerate() {
        let drive = phase_locked_drive(model, pf * zero, signal_flux);
        let states = match steady_states(model, &drive) {
            Ok(s) => s,
            Err(e) => {
                rows.push(wigner_row(pf, None, None, "", &e.to_string()));
                tally.add(false);
                continue;
            }
        };
        let stable: Vec<_> = states.iter().filter(|s| s.is_stable()).collect();
        if stable.is_empty() {
            rows.push(wigner_row(pf, None, None, "", "no stable steady state"));
            tally.add(false);
        }
        for (j, s) in stable.into_iter().enumerate() {
            let r = assemble_fokker_planck(model, s).and_then(|f| f.with_covariance()).and_then(|f| {
                let cov = f.covariance.expect("covariance was just computed");
                let means = DVector::from_fn(2 * n, |k, _| {
                    let z = s.amplitudes[k % n];
                    if k < n {
                        z.re
                    } else {
                        z.im
                    }
                });
                let sd = cov[(0, 0)].max(cov[(n, n)]).sqrt();
                let grid = Grid2D::centered(means[0], means[n], t.half_width_sd * sd, t.bins);
                let mut field = gaussian_wigner_grid(&cov, &means, (0, n), &grid)?;
                field.x_label = format!("{}_sqrt_photons", names[0]);
                field.y_label = format!("{}_sqrt_photons", names[n]);
                Ok((cov, field))
            });
            match r {
                Ok((cov, field)) => {
                    let file = format!("wigner_{i}_{j}.dat");
                    out.write_field(&file, &field, &format!("wigner pump_fraction={} state={}", num(pf), j))?;
                    rows.push(wigner_row(
                        pf,
                        Some(j),
                        Some((s.amplitudes[0], cov[(0, 0)], cov[(n, n)], cov[(0, n)])),
                        &file,
                        OK,
                    ));
                    tally.add(true);
                }
                Err(e) => {
                    rows.push(wigner_row(pf, Some(j), None, "", &e.to_string()));
                    tally.add(false);
                }
            }
        }
    }
    out.write_csv(
        "wigner_points.csv",
        &[
            "pump_fraction",
            "state",
            "re_a_sqrt_photons",
            "im_a_sqrt_photons",
            "var_re_a_photons",
            "var_im_a_photons",
            "cov_re_im_a_photons",
            "matrix_file",
            "status",
        ],
        &rows,
    )?;
    Ok(tally)
}

fn wigner_row(
    pf: f64,
    state: Option<usize>,
    v: Option<(Complex64, f64, f64, f64)>,
    file: &str,
    status: &str,
) -> Vec<String> {
    let (a, vx, vy, cxy) = v.unwrap_or((Complex64::new(f64::NAN, f64::NAN), f64::NAN, f64::NAN, f64::NAN));
    vec![
        num(pf),
        state.map_or(String::new(), |s| s.to_string()),
        num(a.re),
        num(a.im),
        num(vx),
        num(vy),
        num(cxy),
        file.to_string(),
        status.to_string(),
    ]
}

pub fn mc(cfg: &ExperimentConfig, model: &AmplifierModel, out: &mut OutputDir, results: &mut Results) -> Result<Tally> {
    let t = &cfg.task.mc;
    let n = model.mode_list().len();
    let names = coordinate_names(model);
    let signal_flux = dbm_to_flux(cfg.drive.signal_power_dbm, model.signal.omega);
    let drive = phase_locked_drive(model, t.pump_fraction * model.zero_signal_threshold_flux(), signal_flux);
    let states = steady_states(model, &drive)?;
    let stable: Vec<_> = states.iter().filter(|s| s.is_stable()).collect();
    // A Lyapunov reference exists only for a unique stable state.
    let reference = match stable.as_slice() {
        [s] => Some((
            (*s).clone(),
            assemble_fokker_planck(model, s)?.with_covariance()?.covariance.expect("covariance was just computed"),
        )),
        _ => None,
    };
    let t_final = t.duration_kappa_a / model.signal.kappa;
    let mut ens_cfg = EnsembleConfig::new(t.trajectories, t_final, t.burn_in_fraction * t_final, cfg.numerics.seed);
    ens_cfg.n_samples = t.samples_per_trajectory;
    ens_cfg.integrator = t.integrator;
    ens_cfg.initial_mean = reference.as_ref().map(|(s, _)| s.amplitudes.clone());
    let drives = crate::semiclassical::ModeDrives::from_drive(model, &drive);
    ens_cfg.dt = Some(match t.dt_kappa_c {
        Some(x) => x / model.pump.kappa,
        None => max_time_step(model, drives),
    });
    let ens = simulate(model, &drive, &ens_cfg)?;
    let cov = sample_covariance(&ens)?;
    let lyap = |i: usize, j: usize| reference.as_ref().map_or(f64::NAN, |(_, c)| c[(i, j)]);
    let classical = |k: usize| {
        reference.as_ref().map_or(f64::NAN, |(s, _)| {
            let z = s.amplitudes[k % n];
            if k < n {
                z.re
            } else {
                z.im
            }
        })
    };
    let mut rows = Vec::new();
    for k in 0..2 * n {
        let m = coordinate_mean(&ens, k)?;
        rows.push(vec![
            format!("mean_{}", names[k]),
            "sqrt_photons".into(),
            num(m.value),
            num(m.standard_error),
            num(classical(k)),
        ]);
    }
    for i in 0..2 * n {
        for j in i..2 * n {
            rows.push(vec![
                format!("cov_{}_{}", names[i], names[j]),
                "photons".into(),
                num(cov.covariance[(i, j)]),
                num(cov.standard_error[(i, j)]),
                num(lyap(i, j)),
            ]);
        }
    }
    for k in 0..2 * n {
        let e = excess_kurtosis(&ens, k)?;
        rows.push(vec![
            format!("excess_kurtosis_{}", names[k]),
            "dimensionless".into(),
            num(e.value),
            num(e.standard_error),
            num(0.0),
        ]);
    }
    let flux = output_flux_estimate(&ens)?;
    rows.push(vec![
        "signal_output_flux".into(),
        "photons_per_s".into(),
        num(flux.value),
        num(flux.standard_error),
        num(f64::NAN),
    ]);
    out.write_csv(
        "mc_moments.csv",
        &["quantity", "unit", "mc_value", "mc_standard_error", "lyapunov_or_classical"],
        &rows,
    )?;

    let sd = cov.covariance[(0, 0)].max(cov.covariance[(n, n)]).sqrt();
    let grid = Grid2D::centered(cov.mean[0], cov.mean[n], t.histogram_half_width_sd * sd, t.histogram_bins);
    let mut hist = histogram2d(&ens, (0, n), &grid)?;
    hist.x_label = format!("{}_sqrt_photons", names[0]);
    hist.y_label = format!("{}_sqrt_photons", names[n]);
    out.write_field("mc_histogram.dat", &hist, "truncated-wigner histogram")?;
    results.insert("mc_dt_s".into(), ens.dt);
    results.insert("mc_stable_states".into(), stable.len() as f64);
    if let Some((_, c)) = &reference {
        results.insert("mc_max_z_vs_lyapunov".into(), cov.max_z_score(c));
    }
    Ok(Tally { total: 1, failed: 0 })
}

pub fn circuit_params(
    cfg: &ExperimentConfig,
    model: &AmplifierModel,
    out: &mut OutputDir,
    _: &mut Results,
) -> Result<Tally> {
    let c = &cfg.task.circuit;
    let want = |k: CircuitKind| c.kind == CircuitKind::All || c.kind == k;
    let mut tally = Tally::default();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |circuit: &str, q: &str, v: f64, unit: &str| {
        rows.push(vec![circuit.into(), q.into(), num(v), unit.into(), OK.into()]);
    };
    let mut errors: Vec<Vec<String>> = Vec::new();

    if want(CircuitKind::Duffing) {
        let d = &c.duffing;
        let mut sweep = Vec::new();
        match JunctionParams::from_inductance(d.l_j_henry, d.c_sigma_farad) {
            Ok(j) => {
                push("duffing", "kerr_hz", hz(j.kerr()), "Hz");
                push("duffing", "omega_tilde_hz", hz(j.omega_tilde()), "Hz");
                push("duffing", "phi_zpf", j.phi_zpf(), "rad");
                push("duffing", "e_j_joule", j.e_j, "J");
                let omega = j.omega_tilde() + 2.0 * PI * d.drive_detuning_hz;
                for &p in &d.drive_powers_dbm {
                    let drive = DuffingDrive {
                        alpha_in: Complex64::new(dbm_to_flux(p, omega).sqrt(), 0.0),
                        omega,
                        kappa: 2.0 * PI * d.linewidth_hz,
                    };
                    let r = duffing_effective(&j, &drive);
                    let mut row = vec![num(p)];
                    match &r {
                        Ok(op) => row.extend([
                            num(op.alpha.norm_sqr()),
                            num(hz(op.omega_eff)),
                            num(hz(op.g_aa)),
                            num(op.theta),
                            num(hz(op.pump_frequency)),
                        ]),
                        Err(_) => row.extend(std::iter::repeat_n(num(f64::NAN), 5)),
                    }
                    row.push(status(&r));
                    tally.add(r.is_ok());
                    sweep.push(row);
                }
            }
            Err(e) => {
                errors.push(vec!["duffing".into(), String::new(), num(f64::NAN), String::new(), e.to_string()]);
                tally.add(false);
            }
        }
        out.write_csv(
            "duffing_sweep.csv",
            &["p_drive_dbm", "photons", "omega_eff_hz", "g_aa_hz", "theta_rad", "pump_frequency_hz", "status"],
            &sweep,
        )?;
    }
    if want(CircuitKind::Squid) {
        let s = &c.squid;
        let r = squid_effective(&SquidParams {
            l_j: s.l_j_henry,
            c_sigma: s.c_sigma_farad,
            flux_bias: s.flux_bias,
            modulation_depth: s.modulation_depth,
            pump_frequency: 2.0 * PI * s.pump_frequency_hz.unwrap_or(f64::NAN),
        });
        match &r {
            Ok(p) => {
                push("squid", "l_squid_henry", p.l_squid, "H");
                push("squid", "omega0_hz", hz(p.omega0), "Hz");
                push("squid", "mu_r", p.mu_r, "dimensionless");
                push("squid", "g_aa_hz", hz(p.g_aa), "Hz");
                push("squid", "pump_frequency_hz", hz(p.pump_frequency), "Hz");
            }
            Err(e) => errors.push(vec!["squid".into(), String::new(), num(f64::NAN), String::new(), e.to_string()]),
        }
        tally.add(r.is_ok());
    }
    if want(CircuitKind::DoublePump) {
        let d = &c.double_pump;
        let r = double_pump_effective(&DoublePumpParams {
            e_j: d.e_j_joule,
            phi_a: d.phi_a,
            phi_c: d.phi_c,
            phi_q: d.phi_q,
            eps_p: 2.0 * PI * d.pump_strength_hz,
            eps_c: 2.0 * PI * d.drive_strength_hz,
            omega_a: 2.0 * PI * d.omega_a_hz,
            omega_c: 2.0 * PI * d.omega_c_hz,
            kappa_c: 2.0 * PI * d.kappa_c_hz,
        });
        match &r {
            Ok(p) => {
                push("double-pump", "chi_aa_hz", hz(p.chi_aa), "Hz");
                push("double-pump", "chi_cc_hz", hz(p.chi_cc), "Hz");
                push("double-pump", "chi_ac_hz", hz(p.chi_ac), "Hz");
                push("double-pump", "abs_xi_p", p.xi_p.norm(), "sqrt_photons");
                push("double-pump", "abs_g2_hz", hz(p.g2.norm()), "Hz");
                push("double-pump", "arg_g2", p.g2.arg(), "rad");
                push("double-pump", "omega_p_hz", hz(p.omega_p), "Hz");
                push("double-pump", "omega_d_hz", hz(p.omega_d), "Hz");
            }
            Err(e) => {
                errors.push(vec!["double-pump".into(), String::new(), num(f64::NAN), String::new(), e.to_string()])
            }
        }
        tally.add(r.is_ok());
    }
    // The ring modulator needs a non-degenerate `[model]`; `all` skips it otherwise.
    if c.kind == CircuitKind::Jrm || (c.kind == CircuitKind::All && model.topology == Topology::NonDegenerate) {
        let j = &c.jrm;
        let omega = model.pump.omega + 2.0 * PI * j.pump_detuning_hz;
        let ain = Complex64::new(dbm_to_flux(j.pump_power_dbm, omega).sqrt(), 0.0);
        let r = jrm_effective(model, ain, omega);
        match &r {
            Ok(p) => {
                push("jrm", "g_ab_hz", hz(p.g_ab), "Hz");
                push("jrm", "theta", p.theta, "rad");
                push("jrm", "pump_frequency_hz", hz(p.pump_frequency), "Hz");
                push("jrm", "g_ab_input_convention_hz", hz(p.g_ab_input_convention), "Hz");
            }
            Err(e) => errors.push(vec!["jrm".into(), String::new(), num(f64::NAN), String::new(), e.to_string()]),
        }
        tally.add(r.is_ok());
    }
    rows.extend(errors);
    out.write_csv("circuit_params.csv", &["circuit", "quantity", "value", "unit", "status"], &rows)?;
    Ok(tally)
}

/// Fails with [`ParampError::PartialFailure`] when any point failed.
pub fn check(t: Tally) -> Result<()> {
    if t.failed > 0 {
        return Err(ParampError::PartialFailure { failed: t.failed, total: t.total });
    }
    Ok(())
}
