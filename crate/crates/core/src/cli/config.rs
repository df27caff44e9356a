// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration file.
//!
//! Frequencies, linewidths and couplings are given in Hz (cycles per second)
//! and converted to rad/s when the model is built. Unknown keys are rejected.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::depletion::{CompressionReference, SolverConfig, SweepWindow};
use crate::error::{ParampError, Result};
use crate::model::{AmplifierModel, ModeParams, Topology};
use crate::semiclassical::ThresholdConfig;
use crate::wigner_mc::Integrator;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub drive: DriveSection,
    pub task: TaskSection,
    pub numerics: NumericsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub topology: Topology,
    pub signal_frequency_hz: f64,
    pub signal_linewidth_hz: f64,
    /// Required for the non-degenerate amplifier, forbidden otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idler_frequency_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idler_linewidth_hz: Option<f64>,
    /// Defaults to the sum (non-degenerate) or twice (degenerate) the
    /// signal frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_frequency_hz: Option<f64>,
    pub pump_linewidth_hz: f64,
    /// g3 or g2.
    pub coupling_hz: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            topology: Topology::NonDegenerate,
            signal_frequency_hz: 10e9,
            signal_linewidth_hz: 100e6,
            idler_frequency_hz: None,
            idler_linewidth_hz: None,
            pump_frequency_hz: None,
            pump_linewidth_hz: 600e6,
            coupling_hz: 0.1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    /// Pump settings as undepleted gains G0. Exclusive with `pump_powers_dbm`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_gains_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_powers_dbm: Option<Vec<f64>>,
    pub pump_phase_deg: f64,
    /// Fixed signal power for scatter, wigner and mc.
    pub signal_power_dbm: f64,
    pub signal_sweep_min_dbm: f64,
    pub signal_sweep_max_dbm: f64,
    pub signal_sweep_points_per_decade: usize,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            pump_gains_db: None,
            pump_powers_dbm: None,
            pump_phase_deg: 0.0,
            signal_power_dbm: -130.0,
            signal_sweep_min_dbm: -160.0,
            signal_sweep_max_dbm: -60.0,
            signal_sweep_points_per_decade: 20,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    /// When present, must name the task given on the command line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub scatter: ScatterTask,
    pub gain_sweep: GainSweepTask,
    pub pout_sweep: PoutSweepTask,
    pub threshold_sweep: ThresholdTask,
    pub wigner: WignerTask,
    pub mc: McTask,
    pub circuit: CircuitTask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterTask {
    /// Full width of the signal detuning sweep around the signal mode.
    pub detuning_span_hz: f64,
    pub points: usize,
}

impl Default for ScatterTask {
    fn default() -> Self {
        Self { detuning_span_hz: 400e6, points: 401 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompressionReferenceName {
    SmallSignal,
    Undepleted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainSweepTask {
    pub compression_db: f64,
    pub compression_reference: CompressionReferenceName,
    /// Search window of the compression points.
    pub compression_min_dbm: f64,
    pub compression_max_dbm: f64,
    pub compression_points_per_decade: usize,
}

impl Default for GainSweepTask {
    fn default() -> Self {
        let w = SweepWindow::compression_default();
        Self {
            compression_db: 1.0,
            compression_reference: CompressionReferenceName::SmallSignal,
            compression_min_dbm: w.p_min_dbm,
            compression_max_dbm: w.p_max_dbm,
            compression_points_per_decade: w.points_per_decade,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoutSweepTask {
    /// Adds the pump-off (unity gain) curve.
    pub include_pump_off: bool,
}

impl Default for PoutSweepTask {
    fn default() -> Self {
        Self { include_pump_off: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdTask {
    pub signal_min_dbm: f64,
    pub signal_max_dbm: f64,
    pub points_per_decade: usize,
    /// Also evaluate the output just below threshold.
    pub max_output: bool,
}

impl Default for ThresholdTask {
    fn default() -> Self {
        Self { signal_min_dbm: -140.0, signal_max_dbm: 20.0, points_per_decade: 1, max_output: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerTask {
    /// Pump flux in units of the zero-signal threshold flux.
    pub pump_fractions: Vec<f64>,
    /// Grid half width in standard deviations of the wider quadrature.
    pub half_width_sd: f64,
    pub bins: usize,
}

impl Default for WignerTask {
    fn default() -> Self {
        Self { pump_fractions: vec![0.5, 0.9, 1.5], half_width_sd: 6.0, bins: 81 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McTask {
    pub pump_fraction: f64,
    pub trajectories: usize,
    /// Integration time in units of 1/kappa_a.
    pub duration_kappa_a: f64,
    /// Fraction of the run discarded before sampling.
    pub burn_in_fraction: f64,
    pub samples_per_trajectory: usize,
    pub integrator: Integrator,
    /// Step in units of 1/kappa_c; the stability guard's maximum when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_kappa_c: Option<f64>,
    pub histogram_bins: usize,
    pub histogram_half_width_sd: f64,
}

impl Default for McTask {
    fn default() -> Self {
        Self {
            pump_fraction: 0.5,
            trajectories: 10_000,
            duration_kappa_a: 20.0,
            burn_in_fraction: 0.5,
            samples_per_trajectory: 5,
            integrator: Integrator::Heun,
            dt_kappa_c: None,
            histogram_bins: 61,
            histogram_half_width_sd: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitKind {
    All,
    Duffing,
    Squid,
    DoublePump,
    Jrm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitTask {
    pub kind: CircuitKind,
    pub duffing: DuffingSection,
    pub squid: SquidSection,
    pub double_pump: DoublePumpSection,
    pub jrm: JrmSection,
}

impl Default for CircuitTask {
    fn default() -> Self {
        Self {
            kind: CircuitKind::All,
            duffing: DuffingSection::default(),
            squid: SquidSection::default(),
            double_pump: DoublePumpSection::default(),
            jrm: JrmSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuffingSection {
    pub l_j_henry: f64,
    pub c_sigma_farad: f64,
    pub linewidth_hz: f64,
    /// Drive frequency minus the Kerr-shifted mode frequency.
    pub drive_detuning_hz: f64,
    pub drive_powers_dbm: Vec<f64>,
}

impl Default for DuffingSection {
    fn default() -> Self {
        Self {
            l_j_henry: 1e-9,
            c_sigma_farad: 1e-12,
            linewidth_hz: 50e6,
            drive_detuning_hz: 10e6,
            drive_powers_dbm: vec![-150.0, -140.0, -130.0, -120.0, -110.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SquidSection {
    pub l_j_henry: f64,
    pub c_sigma_farad: f64,
    /// Static flux in units of the flux quantum.
    pub flux_bias: f64,
    pub modulation_depth: f64,
    /// Twice the biased resonance when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_frequency_hz: Option<f64>,
}

impl Default for SquidSection {
    fn default() -> Self {
        Self { l_j_henry: 1e-9, c_sigma_farad: 1e-12, flux_bias: 0.25, modulation_depth: 0.01, pump_frequency_hz: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoublePumpSection {
    pub e_j_joule: f64,
    pub phi_a: f64,
    pub phi_c: f64,
    pub phi_q: f64,
    pub pump_strength_hz: f64,
    pub drive_strength_hz: f64,
    pub omega_a_hz: f64,
    pub omega_c_hz: f64,
    pub kappa_c_hz: f64,
}

impl Default for DoublePumpSection {
    fn default() -> Self {
        Self {
            e_j_joule: 2e-23,
            phi_a: 0.1,
            phi_c: 0.08,
            phi_q: 0.3,
            pump_strength_hz: 200e6,
            drive_strength_hz: 1e6,
            omega_a_hz: 8e9,
            omega_c_hz: 4.5e9,
            kappa_c_hz: 20e6,
        }
    }
}

/// Pump of the ring modulator; the mode structure and g3 come from `[model]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JrmSection {
    pub pump_power_dbm: f64,
    pub pump_detuning_hz: f64,
}

impl Default for JrmSection {
    fn default() -> Self {
        Self { pump_power_dbm: -60.0, pump_detuning_hz: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    pub seed: u64,
    pub fixed_point_relaxation: f64,
    pub fixed_point_tolerance: f64,
    pub fixed_point_max_iterations: usize,
    pub threshold_cap_db: f64,
    pub threshold_grid_step_db: f64,
    pub threshold_start_db: f64,
    pub threshold_relative_tolerance: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        let t = ThresholdConfig::default();
        Self {
            seed: 1,
            fixed_point_relaxation: s.relaxation,
            fixed_point_tolerance: s.tolerance,
            fixed_point_max_iterations: s.max_iterations,
            threshold_cap_db: t.cap_db,
            threshold_grid_step_db: t.grid_step_db,
            threshold_start_db: t.start_db,
            threshold_relative_tolerance: t.relative_tolerance,
        }
    }
}

/// Pump setting of one curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpSetting {
    GainDb(f64),
    PowerDbm(f64),
}

/// Line of `key = ...` inside `[section]` of the raw text, 1-based.
fn locate(raw: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in raw.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Validation failure pinned to the line of the offending key when present.
fn invalid(raw: &str, section: &str, key: &str, msg: impl std::fmt::Display) -> ParampError {
    match locate(raw, section, key) {
        Some(line) => ParampError::Config(format!("line {line}: [{section}] {key}: {msg}")),
        None => ParampError::Config(format!("[{section}] {key}: {msg}")),
    }
}

fn require_positive(raw: &str, section: &str, key: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(raw, section, key, format!("must be positive, got {x}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and validates a configuration, filling topology-dependent
    /// defaults so that the result serializes with every value explicit.
    pub fn parse(raw: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(raw).map_err(|e| ParampError::Config(e.to_string()))?;
        cfg.resolve(raw)?;
        Ok(cfg)
    }

    fn resolve(&mut self, raw: &str) -> Result<()> {
        let m = &mut self.model;
        match m.topology {
            Topology::NonDegenerate => {
                m.idler_frequency_hz.get_or_insert(7e9);
                m.idler_linewidth_hz.get_or_insert(100e6);
                let sum = m.signal_frequency_hz + m.idler_frequency_hz.unwrap();
                m.pump_frequency_hz.get_or_insert(sum);
            }
            Topology::Degenerate => {
                for (key, value) in
                    [("idler_frequency_hz", m.idler_frequency_hz), ("idler_linewidth_hz", m.idler_linewidth_hz)]
                {
                    if value.is_some() {
                        return Err(invalid(raw, "model", key, "not used by a degenerate amplifier"));
                    }
                }
                m.pump_frequency_hz.get_or_insert(2.0 * m.signal_frequency_hz);
            }
        }
        let d = &mut self.drive;
        if d.pump_gains_db.is_some() && d.pump_powers_dbm.is_some() {
            return Err(invalid(raw, "drive", "pump_powers_dbm", "give either pump_gains_db or pump_powers_dbm"));
        }
        if d.pump_powers_dbm.is_none() {
            d.pump_gains_db.get_or_insert_with(|| vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        }
        if self.task.circuit.squid.pump_frequency_hz.is_none() {
            let s = &self.task.circuit.squid;
            let l = s.l_j_henry / (PI * s.flux_bias).cos().abs();
            let f0 = 1.0 / (2.0 * PI * (l * s.c_sigma_farad).sqrt());
            if f0.is_finite() {
                self.task.circuit.squid.pump_frequency_hz = Some(2.0 * f0);
            }
        }
        self.validate(raw)
    }

    fn validate(&self, raw: &str) -> Result<()> {
        let m = &self.model;
        for (key, x) in [
            ("signal_frequency_hz", m.signal_frequency_hz),
            ("signal_linewidth_hz", m.signal_linewidth_hz),
            ("pump_linewidth_hz", m.pump_linewidth_hz),
            ("coupling_hz", m.coupling_hz),
            ("pump_frequency_hz", m.pump_frequency_hz.unwrap_or(f64::NAN)),
            ("idler_frequency_hz", m.idler_frequency_hz.unwrap_or(1.0)),
            ("idler_linewidth_hz", m.idler_linewidth_hz.unwrap_or(1.0)),
        ] {
            require_positive(raw, "model", key, x)?;
        }
        let d = &self.drive;
        if d.signal_sweep_points_per_decade == 0 {
            return Err(invalid(raw, "drive", "signal_sweep_points_per_decade", "must be at least 1"));
        }
        if !(d.signal_sweep_min_dbm < d.signal_sweep_max_dbm) {
            return Err(invalid(raw, "drive", "signal_sweep_max_dbm", "must exceed signal_sweep_min_dbm"));
        }
        if let Some(g) = &d.pump_gains_db {
            if g.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return Err(invalid(raw, "drive", "pump_gains_db", "gains must be finite and >= 0 dB"));
            }
        }
        let t = &self.task;
        if t.scatter.points < 2 {
            return Err(invalid(raw, "task.scatter", "points", "need at least 2"));
        }
        require_positive(raw, "task.scatter", "detuning_span_hz", t.scatter.detuning_span_hz)?;
        if !(t.gain_sweep.compression_db > 0.0) {
            return Err(invalid(raw, "task.gain_sweep", "compression_db", "must be positive"));
        }
        if t.threshold_sweep.points_per_decade == 0
            || !(t.threshold_sweep.signal_min_dbm < t.threshold_sweep.signal_max_dbm)
        {
            return Err(invalid(raw, "task.threshold_sweep", "signal_max_dbm", "need a non-empty window"));
        }
        if t.wigner.bins < 2 {
            return Err(invalid(raw, "task.wigner", "bins", "need at least 2"));
        }
        if t.wigner.pump_fractions.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(invalid(raw, "task.wigner", "pump_fractions", "must be finite and >= 0"));
        }
        require_positive(raw, "task.wigner", "half_width_sd", t.wigner.half_width_sd)?;
        let mc = &t.mc;
        if mc.trajectories < 2 {
            return Err(invalid(raw, "task.mc", "trajectories", "need at least 2"));
        }
        require_positive(raw, "task.mc", "duration_kappa_a", mc.duration_kappa_a)?;
        if !(0.0..1.0).contains(&mc.burn_in_fraction) {
            return Err(invalid(raw, "task.mc", "burn_in_fraction", "must lie in [0, 1)"));
        }
        if mc.samples_per_trajectory == 0 || mc.histogram_bins < 2 {
            return Err(invalid(
                raw,
                "task.mc",
                "samples_per_trajectory",
                "samples and histogram bins must be positive",
            ));
        }
        if let Some(dt) = mc.dt_kappa_c {
            require_positive(raw, "task.mc", "dt_kappa_c", dt)?;
        }
        if !(mc.pump_fraction >= 0.0 && mc.pump_fraction.is_finite()) {
            return Err(invalid(raw, "task.mc", "pump_fraction", "must be finite and >= 0"));
        }
        let n = &self.numerics;
        if !(n.fixed_point_relaxation > 0.0 && n.fixed_point_relaxation <= 1.0) {
            return Err(invalid(raw, "numerics", "fixed_point_relaxation", "must lie in (0, 1]"));
        }
        require_positive(raw, "numerics", "fixed_point_tolerance", n.fixed_point_tolerance)?;
        require_positive(raw, "numerics", "threshold_grid_step_db", n.threshold_grid_step_db)?;
        require_positive(raw, "numerics", "threshold_relative_tolerance", n.threshold_relative_tolerance)?;
        if !(n.threshold_cap_db > n.threshold_start_db) {
            return Err(invalid(raw, "numerics", "threshold_cap_db", "must exceed threshold_start_db"));
        }
        self.amplifier_model().map_err(|e| ParampError::Config(format!("[model]: {e}")))?;
        Ok(())
    }

    /// Canonical text form with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn amplifier_model(&self) -> Result<AmplifierModel> {
        let m = &self.model;
        let tau = 2.0 * PI;
        let signal = ModeParams::from_hz(m.signal_frequency_hz, m.signal_linewidth_hz)?;
        let pump = ModeParams::from_hz(m.pump_frequency_hz.unwrap_or(f64::NAN), m.pump_linewidth_hz)?;
        match m.topology {
            Topology::NonDegenerate => {
                let idler = ModeParams::from_hz(
                    m.idler_frequency_hz.unwrap_or(f64::NAN),
                    m.idler_linewidth_hz.unwrap_or(f64::NAN),
                )?;
                AmplifierModel::non_degenerate(signal, idler, pump, tau * m.coupling_hz)
            }
            Topology::Degenerate => AmplifierModel::degenerate(signal, pump, tau * m.coupling_hz),
        }
    }

    pub fn pump_settings(&self) -> Vec<PumpSetting> {
        match (&self.drive.pump_gains_db, &self.drive.pump_powers_dbm) {
            (_, Some(p)) => p.iter().map(|&x| PumpSetting::PowerDbm(x)).collect(),
            (Some(g), None) => g.iter().map(|&x| PumpSetting::GainDb(x)).collect(),
            (None, None) => Vec::new(),
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            relaxation: self.numerics.fixed_point_relaxation,
            tolerance: self.numerics.fixed_point_tolerance,
            max_iterations: self.numerics.fixed_point_max_iterations,
        }
    }

    pub fn threshold(&self) -> ThresholdConfig {
        ThresholdConfig {
            cap_db: self.numerics.threshold_cap_db,
            grid_step_db: self.numerics.threshold_grid_step_db,
            start_db: self.numerics.threshold_start_db,
            relative_tolerance: self.numerics.threshold_relative_tolerance,
        }
    }

    pub fn signal_window(&self) -> SweepWindow {
        SweepWindow {
            p_min_dbm: self.drive.signal_sweep_min_dbm,
            p_max_dbm: self.drive.signal_sweep_max_dbm,
            points_per_decade: self.drive.signal_sweep_points_per_decade,
        }
    }

    pub fn compression_window(&self) -> SweepWindow {
        let g = &self.task.gain_sweep;
        SweepWindow {
            p_min_dbm: g.compression_min_dbm,
            p_max_dbm: g.compression_max_dbm,
            points_per_decade: g.compression_points_per_decade,
        }
    }

    pub fn compression_reference(&self) -> CompressionReference {
        match self.task.gain_sweep.compression_reference {
            CompressionReferenceName::SmallSignal => CompressionReference::SmallSignal,
            CompressionReferenceName::Undepleted => CompressionReference::Undepleted,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::parse("").unwrap();
        let text = cfg.to_toml();
        let again = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_toml());
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.model.pump_frequency_hz, Some(17e9));
    }

    #[test]
    fn unknown_key_has_line_number() {
        let raw = "[model]\ntopology = \"degenerate\"\nsignal_frequency_hz = 1e10\nbogus = 3\n";
        let e = ExperimentConfig::parse(raw).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 4"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn semantic_error_has_line_number() {
        let raw = "[model]\n\nsignal_linewidth_hz = -5\n";
        let msg = ExperimentConfig::parse(raw).unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("signal_linewidth_hz"), "{msg}");
        let raw = "[model]\ntopology = \"degenerate\"\nidler_frequency_hz = 7e9\n";
        let msg = ExperimentConfig::parse(raw).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn hz_become_rad_per_second() {
        let cfg = ExperimentConfig::parse("[model]\ntopology = \"degenerate\"\n").unwrap();
        let m = cfg.amplifier_model().unwrap();
        assert_eq!(m.signal.omega, 2.0 * PI * 10e9);
        assert_eq!(m.pump.omega, 2.0 * PI * 20e9);
        assert_eq!(m.coupling, 2.0 * PI * 0.1e6);
    }

    #[test]
    fn exclusive_pump_settings() {
        let raw = "[drive]\npump_gains_db = [10.0]\npump_powers_dbm = [-80.0]\n";
        assert!(ExperimentConfig::parse(raw).is_err());
        let cfg = ExperimentConfig::parse("[drive]\npump_powers_dbm = [-80.0]\n").unwrap();
        assert_eq!(cfg.pump_settings(), vec![PumpSetting::PowerDbm(-80.0)]);
    }
}
