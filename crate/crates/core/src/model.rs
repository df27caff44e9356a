// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Domain types, unit conventions, bare susceptibilities and reduced couplings.
//!
//! All frequencies and rates are angular (rad/s). Powers are photon fluxes
//! (photons/s) and only become dBm at the I/O boundary.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ParampError, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Superconducting flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = PI * HBAR / ELEMENTARY_CHARGE;

const RESONANCE_RTOL: f64 = 1e-9;

/// Degenerate (single-mode) or non-degenerate (signal and idler) amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Degenerate,
    NonDegenerate,
}

/// Resonance frequency and energy decay rate of one cavity mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub omega: f64,
    pub kappa: f64,
}

impl ModeParams {
    pub fn new(omega: f64, kappa: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ParampError::InvalidParameter(format!("mode frequency must be positive, got {omega}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(ParampError::InvalidParameter(format!("mode decay rate must be positive, got {kappa}")));
        }
        if omega / kappa <= 10.0 {
            warn!("omega/kappa = {:.3} is small; rotating-wave results are unreliable", omega / kappa);
        }
        Ok(Self { omega, kappa })
    }

    /// Builds a mode from linear frequencies in Hz.
    pub fn from_hz(f_hz: f64, kappa_hz: f64) -> Result<Self> {
        Self::new(2.0 * PI * f_hz, 2.0 * PI * kappa_hz)
    }
}

/// Mode structure and nonlinear coupling of an amplifier.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifierModel {
    pub topology: Topology,
    pub signal: ModeParams,
    pub idler: Option<ModeParams>,
    pub pump: ModeParams,
    /// g2 for the degenerate amplifier, g3 for the non-degenerate one (rad/s).
    pub coupling: f64,
    /// Bose occupation of the input lines. Carried for completeness; every
    /// solver in this crate assumes zero.
    pub thermal_occupation: f64,
}

impl AmplifierModel {
    pub fn degenerate(signal: ModeParams, pump: ModeParams, g2: f64) -> Result<Self> {
        let m =
            Self { topology: Topology::Degenerate, signal, idler: None, pump, coupling: g2, thermal_occupation: 0.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn non_degenerate(signal: ModeParams, idler: ModeParams, pump: ModeParams, g3: f64) -> Result<Self> {
        let m = Self {
            topology: Topology::NonDegenerate,
            signal,
            idler: Some(idler),
            pump,
            coupling: g3,
            thermal_occupation: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    /// Non-degenerate reference device: 10/7/17 GHz modes, 100/100/600 MHz
    /// linewidths, g3/2pi = 0.1 MHz.
    pub fn reference_non_degenerate() -> Self {
        Self::non_degenerate(
            ModeParams::from_hz(10e9, 100e6).unwrap(),
            ModeParams::from_hz(7e9, 100e6).unwrap(),
            ModeParams::from_hz(17e9, 600e6).unwrap(),
            2.0 * PI * 0.1e6,
        )
        .unwrap()
    }

    /// Degenerate reference device: 10/20 GHz modes, 100/600 MHz linewidths,
    /// g2/2pi = 0.1 MHz.
    pub fn reference_degenerate() -> Self {
        Self::degenerate(
            ModeParams::from_hz(10e9, 100e6).unwrap(),
            ModeParams::from_hz(20e9, 600e6).unwrap(),
            2.0 * PI * 0.1e6,
        )
        .unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(ParampError::InvalidParameter(format!(
                "nonlinear coupling must be positive, got {}",
                self.coupling
            )));
        }
        match (self.topology, self.idler.is_some()) {
            (Topology::NonDegenerate, false) => {
                return Err(ParampError::InvalidParameter("non-degenerate amplifier needs an idler mode".into()))
            }
            (Topology::Degenerate, true) => {
                return Err(ParampError::InvalidParameter("degenerate amplifier has no separate idler mode".into()))
            }
            _ => {}
        }
        if self.pump.kappa < self.signal.kappa {
            return Err(ParampError::InvalidParameter(format!(
                "pump linewidth {} must not be below the signal linewidth {}",
                self.pump.kappa, self.signal.kappa
            )));
        }
        if self.pump.kappa < 3.0 * self.signal.kappa {
            warn!(
                "kappa_c/kappa_a = {:.2}; adiabatic pump elimination is marginal",
                self.pump.kappa / self.signal.kappa
            );
        }
        let min_kappa = self.mode_list().iter().map(|m| m.kappa).fold(f64::INFINITY, f64::min);
        if self.coupling > min_kappa / 10.0 {
            warn!("coupling {} is not small compared with the linewidths", self.coupling);
        }
        if !(self.thermal_occupation >= 0.0) {
            return Err(ParampError::InvalidParameter("negative thermal occupation".into()));
        }
        Ok(())
    }

    /// Signal, optional idler and pump, in that order.
    pub fn mode_list(&self) -> Vec<ModeParams> {
        let mut v = vec![self.signal];
        if let Some(b) = self.idler {
            v.push(b);
        }
        v.push(self.pump);
        v
    }

    /// Idler mode, which is the signal mode itself for the degenerate amplifier.
    pub fn idler_mode(&self) -> ModeParams {
        self.idler.unwrap_or(self.signal)
    }

    /// Pump frequency at which the three-wave (or four-photon) process is resonant.
    pub fn resonant_pump_frequency(&self) -> f64 {
        match self.topology {
            Topology::NonDegenerate => self.signal.omega + self.idler_mode().omega,
            Topology::Degenerate => 2.0 * self.signal.omega,
        }
    }

    /// Input pump flux |c_in|^2 at which the undepleted reduced coupling is one.
    pub fn zero_signal_threshold_flux(&self) -> f64 {
        let g = self.coupling;
        let (ka, kc) = (self.signal.kappa, self.pump.kappa);
        match self.topology {
            Topology::NonDegenerate => ka * self.idler_mode().kappa * kc / (16.0 * g * g),
            Topology::Degenerate => ka * ka * kc / (64.0 * g * g),
        }
    }
}

/// Coherent pump and signal tones incident on the amplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConditions {
    /// |<c_in>| in (photons/s)^(1/2).
    pub pump_flux_amplitude: f64,
    pub pump_phase: f64,
    pub pump_frequency: f64,
    /// Coherent signal flux in photons/s.
    pub signal_flux: f64,
    pub signal_frequency: f64,
}

impl DriveConditions {
    /// Resonantly pumped drive with the signal at the signal-mode centre.
    pub fn resonant(model: &AmplifierModel, pump_flux_amplitude: f64, signal_flux: f64) -> Self {
        Self {
            pump_flux_amplitude,
            pump_phase: 0.0,
            pump_frequency: model.resonant_pump_frequency(),
            signal_flux,
            signal_frequency: model.signal.omega,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pump_flux_amplitude >= 0.0 && self.pump_flux_amplitude.is_finite()) {
            return Err(ParampError::InvalidParameter(format!(
                "pump amplitude must be non-negative, got {}",
                self.pump_flux_amplitude
            )));
        }
        if !(self.signal_flux >= 0.0 && self.signal_flux.is_finite()) {
            return Err(ParampError::InvalidParameter(format!(
                "signal flux must be non-negative, got {}",
                self.signal_flux
            )));
        }
        if !(self.pump_frequency > 0.0 && self.signal_frequency > 0.0) {
            return Err(ParampError::InvalidParameter("drive frequencies must be positive".into()));
        }
        Ok(())
    }

    /// Incident pump flux |c_in|^2.
    pub fn pump_flux(&self) -> f64 {
        self.pump_flux_amplitude * self.pump_flux_amplitude
    }

    pub fn is_resonant(&self, model: &AmplifierModel) -> bool {
        let target = model.resonant_pump_frequency();
        (self.pump_frequency - target).abs() <= RESONANCE_RTOL * target
    }
}

/// Bare single-mode susceptibility chi(omega) = 1 / (1 - 2i(omega - omega_m)/kappa_m).
pub fn susceptibility(mode: &ModeParams, omega: f64) -> Complex64 {
    inverse_susceptibility(mode, omega).inv()
}

pub fn inverse_susceptibility(mode: &ModeParams, omega: f64) -> Complex64 {
    Complex64::new(1.0, -2.0 * (omega - mode.omega) / mode.kappa)
}

/// Reduced coupling 2g / sqrt(kappa_1 kappa_2) for an effective parametric rate g.
pub fn rho_from_coupling(g_eff: f64, kappa_1: f64, kappa_2: f64) -> f64 {
    2.0 * g_eff / (kappa_1 * kappa_2).sqrt()
}

/// Effective parametric rate produced by a stiff pump, g_ab = 2 g3 |c_in| / sqrt(kappa_c)
/// (or g_aa with g2 in the degenerate case).
pub fn effective_coupling(model: &AmplifierModel, drive: &DriveConditions) -> f64 {
    2.0 * model.coupling * drive.pump_flux_amplitude / model.pump.kappa.sqrt()
}

/// Undepleted reduced coupling rho0 for the given pump.
///
/// Non-degenerate: 4 g3 |c_in| / sqrt(kappa_a kappa_b kappa_c).
/// Degenerate: 8 g2 |c_in| / (kappa_a sqrt(kappa_c)), i.e. 4 g_aa / kappa_a.
pub fn reduced_coupling(model: &AmplifierModel, drive: &DriveConditions) -> f64 {
    reduced_coupling_for_amplitude(model, drive.pump_flux_amplitude)
}

pub fn reduced_coupling_for_amplitude(model: &AmplifierModel, pump_flux_amplitude: f64) -> f64 {
    let g = model.coupling;
    let (ka, kc) = (model.signal.kappa, model.pump.kappa);
    match model.topology {
        Topology::NonDegenerate => 4.0 * g * pump_flux_amplitude / (ka * model.idler_mode().kappa * kc).sqrt(),
        Topology::Degenerate => 8.0 * g * pump_flux_amplitude / (ka * kc.sqrt()),
    }
}

/// Pump amplitude |c_in| that produces the undepleted reduced coupling `rho0`.
pub fn pump_amplitude_for_rho(model: &AmplifierModel, rho0: f64) -> f64 {
    rho0 / reduced_coupling_for_amplitude(model, 1.0)
}

/// Zero-detuning power gain of the stiff-pump amplifier, ((1 + rho^2)/(1 - rho^2))^2.
pub fn ideal_gain(rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(ParampError::StabilityViolation { rho });
    }
    let r2 = rho * rho;
    let amp = (1.0 + r2) / (1.0 - r2);
    Ok(amp * amp)
}

/// Inverse of [`ideal_gain`]: rho^2 = (sqrt(G) - 1)/(sqrt(G) + 1).
pub fn rho_for_gain(gain: f64) -> Result<f64> {
    if !(gain >= 1.0 && gain.is_finite()) {
        return Err(ParampError::InvalidParameter(format!("gain must be >= 1, got {gain}")));
    }
    let s = gain.sqrt();
    Ok(((s - 1.0) / (s + 1.0)).sqrt())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Converts a photon flux at the given carrier into dBm.
///
/// Zero flux maps to `f64::NEG_INFINITY`.
pub fn flux_to_dbm(flux: f64, carrier: f64) -> f64 {
    if flux == 0.0 {
        return f64::NEG_INFINITY;
    }
    10.0 * (HBAR * carrier * flux / 1e-3).log10()
}

pub fn dbm_to_flux(dbm: f64, carrier: f64) -> f64 {
    if dbm == f64::NEG_INFINITY {
        return 0.0;
    }
    1e-3 * 10f64.powf(dbm / 10.0) / (HBAR * carrier)
}

/// Flux of half a photon per amplifier linewidth, kappa_a / (4 pi).
pub fn half_photon_flux(mode: &ModeParams) -> f64 {
    0.5 * mode.kappa / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn susceptibility_on_resonance_and_half_width() {
        let m = ModeParams::from_hz(10e9, 100e6).unwrap();
        assert_eq!(susceptibility(&m, m.omega), Complex64::new(1.0, 0.0));
        let chi = susceptibility(&m, m.omega + m.kappa / 2.0);
        assert_relative_eq!(chi.re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(chi.im, 0.5, epsilon = 1e-12);
        assert_relative_eq!(chi.norm_sqr(), 0.5, epsilon = 1e-12);
        assert!(susceptibility(&m, m.omega + 1e6 * m.kappa).norm() < 1e-5);
    }

    #[test]
    fn threshold_pump_for_non_degenerate_reference() {
        let m = AmplifierModel::reference_non_degenerate();
        let (ka, kb, kc, g) = (m.signal.kappa, m.idler_mode().kappa, m.pump.kappa, m.coupling);
        let amp = pump_amplitude_for_rho(&m, 1.0);
        assert_relative_eq!(amp * amp, ka * kb * kc / (16.0 * g * g), max_relative = 1e-12);
        assert_relative_eq!(amp * amp, m.zero_signal_threshold_flux(), max_relative = 1e-12);
        let d = DriveConditions::resonant(&m, amp, 0.0);
        assert_relative_eq!(reduced_coupling(&m, &d), 1.0, max_relative = 1e-12);
        let d2 = DriveConditions::resonant(&m, 2.0 * amp, 0.0);
        assert_relative_eq!(reduced_coupling(&m, &d2), 2.0, max_relative = 1e-12);
        assert_eq!(reduced_coupling(&m, &DriveConditions::resonant(&m, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn degenerate_rho_is_four_g_eff_over_kappa() {
        let m = AmplifierModel::reference_degenerate();
        let d = DriveConditions::resonant(&m, 3.0e7, 0.0);
        let g_eff = effective_coupling(&m, &d);
        assert_relative_eq!(reduced_coupling(&m, &d), 4.0 * g_eff / m.signal.kappa, max_relative = 1e-13);
        assert_relative_eq!(
            pump_amplitude_for_rho(&m, 1.0).powi(2),
            m.zero_signal_threshold_flux(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gain_anchor_twenty_db() {
        assert_relative_eq!(ideal_gain((9.0f64 / 11.0).sqrt()).unwrap(), 100.0, max_relative = 1e-12);
        assert_relative_eq!(rho_for_gain(100.0).unwrap().powi(2), 9.0 / 11.0, max_relative = 1e-12);
        assert_eq!(ideal_gain(0.0).unwrap(), 1.0);
        assert!(matches!(ideal_gain(1.0), Err(ParampError::StabilityViolation { .. })));
    }

    #[test]
    fn dbm_conversions() {
        let w = 2.0 * PI * 10e9;
        let flux = 1e-3 / (HBAR * w);
        assert_relative_eq!(flux_to_dbm(flux, w), 0.0, epsilon = 1e-12);
        // hbar * 2pi * 10 GHz = 6.6261e-24 J, so 1 mW is 1.509e20 photons/s and
        // 1.509e11 photons/s sits 90 dB lower.
        assert_relative_eq!(flux_to_dbm(1.509e11, w), -90.0, epsilon = 1e-3);
        assert_eq!(flux_to_dbm(0.0, w), f64::NEG_INFINITY);
        assert_eq!(dbm_to_flux(f64::NEG_INFINITY, w), 0.0);
    }

    #[test]
    fn model_validation() {
        let a = ModeParams::from_hz(10e9, 100e6).unwrap();
        let c = ModeParams::from_hz(20e9, 600e6).unwrap();
        assert!(AmplifierModel::degenerate(a, c, 0.0).is_err());
        assert!(AmplifierModel::degenerate(a, a, 1.0).is_ok());
        assert!(AmplifierModel::degenerate(c, a, 1.0).is_err());
        let mut m = AmplifierModel::reference_degenerate();
        m.idler = Some(a);
        assert!(m.validate().is_err());
        assert!(ModeParams::new(-1.0, 1.0).is_err());
        assert!(ModeParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn resonance_flag() {
        let m = AmplifierModel::reference_non_degenerate();
        let mut d = DriveConditions::resonant(&m, 1.0, 0.0);
        assert!(d.is_resonant(&m));
        d.pump_frequency *= 1.0 + 1e-6;
        assert!(!d.is_resonant(&m));
    }

    proptest::proptest! {
        #[test]
        fn dbm_round_trip(log_flux in -5.0f64..25.0, f_ghz in 1.0f64..30.0) {
            let flux = 10f64.powf(log_flux);
            let w = 2.0 * PI * f_ghz * 1e9;
            let back = dbm_to_flux(flux_to_dbm(flux, w), w);
            proptest::prop_assert!(((back - flux) / flux).abs() < 1e-12);
        }

        #[test]
        fn susceptibility_bounded(x in -1e3f64..1e3) {
            let m = ModeParams::new(1e3, 1.0).unwrap();
            proptest::prop_assert!(susceptibility(&m, m.omega + x).norm() <= 1.0);
        }

        #[test]
        fn gain_increasing(r1 in 0.0f64..0.999, r2 in 0.0f64..0.999) {
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            proptest::prop_assume!(hi - lo > 1e-9);
            proptest::prop_assert!(ideal_gain(hi).unwrap() > ideal_gain(lo).unwrap());
            proptest::prop_assert!(ideal_gain(lo).unwrap() >= 1.0);
        }
    }
}
