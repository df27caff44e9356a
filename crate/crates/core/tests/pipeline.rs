// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Cross-module consistency: the stiff-pump, depletion, classical and
//! fluctuation layers agree where their domains overlap.

use approx::assert_relative_eq;
use num_complex::Complex64;

use paramp::circuits::{jrm_effective, reduced_coupling_for_rate};
use paramp::depletion::{solve_rho, SolverConfig};
use paramp::fluctuations::{assemble_fokker_planck, np_threshold_photons};
use paramp::model::{
    db_to_linear, linear_to_db, pump_amplitude_for_rho, reduced_coupling, rho_for_gain, AmplifierModel,
    DriveConditions, ModeParams, Topology,
};
use paramp::scattering::{dpa_scattering, ndpa_scattering, EffectivePump};
use paramp::semiclassical::{phase_locked_drive, steady_states};

fn drive_for_gain(model: &AmplifierModel, gain_db: f64) -> DriveConditions {
    let rho = rho_for_gain(db_to_linear(gain_db)).unwrap();
    DriveConditions::resonant(model, pump_amplitude_for_rho(model, rho), 0.0)
}

#[test]
fn depleted_gain_tends_to_stiff_pump_gain() {
    for m in [AmplifierModel::reference_non_degenerate(), AmplifierModel::reference_degenerate()] {
        let d = drive_for_gain(&m, 20.0);
        let pt = solve_rho(&m, &DriveConditions { signal_flux: 1.0, ..d }, &SolverConfig::default(), None).unwrap();
        let pump = EffectivePump::stiff(&m, &d);
        let stiff = match m.topology {
            Topology::NonDegenerate => ndpa_scattering(&m, &pump, m.signal.omega).unwrap().signal_gain(),
            Topology::Degenerate => dpa_scattering(&m, &pump, m.signal.omega).unwrap().block.signal_gain(),
        };
        assert_relative_eq!(linear_to_db(stiff), 20.0, epsilon = 1e-9);
        // Only the vacuum depletion term separates the two.
        assert!((pt.gain_db() - 20.0).abs() < 0.05, "{}", pt.gain_db());
    }
}

#[test]
fn classical_amplitude_matches_linear_gain_far_below_threshold() {
    let a = ModeParams::new(2000.0, 1.0).unwrap();
    let m = AmplifierModel::non_degenerate(
        a,
        ModeParams::new(1500.0, 1.0).unwrap(),
        ModeParams::new(3500.0, 3.0).unwrap(),
        2e-3,
    )
    .unwrap();
    let pf = 0.5;
    let drive = phase_locked_drive(&m, pf * m.zero_signal_threshold_flux(), 1e-6);
    let states = steady_states(&m, &drive).unwrap();
    let s = states.iter().find(|s| s.is_stable()).unwrap();
    // Weak signal: reflected amplitude -a_in + sqrt(ka) a scales with sqrt(G0).
    let rho = reduced_coupling(&m, &drive);
    let a_in = drive.signal_flux.sqrt();
    let out = (-a_in + m.signal.kappa.sqrt() * s.amplitudes[0]).norm();
    assert_relative_eq!(out / a_in, (1.0 + rho * rho) / (1.0 - rho * rho), max_relative = 1e-6);
    assert_relative_eq!(rho, pf.sqrt(), max_relative = 1e-12);
}

#[test]
fn fluctuations_scale_with_threshold_photons() {
    let a = ModeParams::new(2000.0, 1.0).unwrap();
    let m = AmplifierModel::degenerate(a, ModeParams::new(4000.0, 3.0).unwrap(), 1e-3).unwrap();
    assert_relative_eq!(np_threshold_photons(&m), 62500.0, max_relative = 1e-12);
    let drive = phase_locked_drive(&m, 0.5 * m.zero_signal_threshold_flux(), 0.0);
    let s = &steady_states(&m, &drive).unwrap()[0];
    let f = assemble_fokker_planck(&m, s).unwrap().with_covariance().unwrap();
    let cov = f.covariance.clone().unwrap();
    // Squeezed and amplified quadratures of the signal straddle vacuum.
    let (re, im) = (cov[(0, 0)], cov[(2, 2)]);
    assert!(re.min(im) < 0.25 && re.max(im) > 0.25);
    assert!(f.lyapunov_residual().unwrap() < 1e-10);
}

#[test]
fn ring_modulator_feeds_the_amplifier_model() {
    let tau = 2.0 * std::f64::consts::PI;
    let m = AmplifierModel::non_degenerate(
        ModeParams::from_hz(7e9, 100e6).unwrap(),
        ModeParams::from_hz(10e9, 100e6).unwrap(),
        ModeParams::from_hz(17e9, 600e6).unwrap(),
        tau * 0.1e6,
    )
    .unwrap();
    let ain = 3e4;
    let jrm = jrm_effective(&m, Complex64::new(ain, 0.0), m.pump.omega).unwrap();
    let drive = DriveConditions::resonant(&m, ain, 0.0);
    let rho = reduced_coupling_for_rate(m.topology, jrm.g_ab_input_convention, m.signal.kappa, m.idler_mode().kappa);
    assert_relative_eq!(rho, reduced_coupling(&m, &drive), max_relative = 1e-12);
}
