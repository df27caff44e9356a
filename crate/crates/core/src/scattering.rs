// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Stiff-pump linear scattering of the parametric amplifier.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{ParampError, Result};
use crate::model::{effective_coupling, inverse_susceptibility, AmplifierModel, DriveConditions, Topology};

const TUNING_RTOL: f64 = 1e-9;

/// Ordering of the rows and columns of a [`ScatteringBlock`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `[a(+w_S), a(-w_S), b(+w_I), b(-w_I)]`
    FrequencyQuartet,
    /// `[a_par, a_perp]` quadratures of the degenerate amplifier, padded to 4x4.
    QuadraturePair,
}

/// Classical parametric modulation seen by the signal and idler modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePump {
    /// g_ab or g_aa (rad/s).
    pub coupling: f64,
    /// Modulation frequency Omega_ab or Omega_aa (rad/s).
    pub frequency: f64,
    pub phase: f64,
}

impl EffectivePump {
    /// Pump seen by the amplifier when the pump mode is stiff.
    pub fn stiff(model: &AmplifierModel, drive: &DriveConditions) -> Self {
        Self { coupling: effective_coupling(model, drive), frequency: drive.pump_frequency, phase: drive.pump_phase }
    }

    /// Reduced coupling: 2 g_ab / sqrt(kappa_a kappa_b) or 4 g_aa / kappa_a.
    pub fn rho(&self, model: &AmplifierModel) -> f64 {
        match model.topology {
            Topology::NonDegenerate => 2.0 * self.coupling / (model.signal.kappa * model.idler_mode().kappa).sqrt(),
            Topology::Degenerate => 4.0 * self.coupling / model.signal.kappa,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringBlock {
    pub entries: Matrix4<Complex64>,
    pub signal_frequency: f64,
    pub idler_frequency: f64,
    pub basis: Basis,
}

impl ScatteringBlock {
    pub fn r_ss(&self) -> Complex64 {
        self.entries[(0, 0)]
    }
    pub fn s_si(&self) -> Complex64 {
        self.entries[(0, 3)]
    }
    pub fn s_is(&self) -> Complex64 {
        self.entries[(3, 0)]
    }
    pub fn r_ii(&self) -> Complex64 {
        self.entries[(3, 3)]
    }

    pub fn determinant(&self) -> Complex64 {
        self.entries.determinant()
    }

    /// Power gain |r_SS|^2 of the signal reflection.
    pub fn signal_gain(&self) -> f64 {
        self.r_ss().norm_sqr()
    }

    /// Largest deviation from the required conjugation pairing between the
    /// positive- and negative-frequency rows.
    pub fn conjugation_defect(&self) -> f64 {
        let e = &self.entries;
        let pairs = [((0, 0), (1, 1)), ((0, 3), (1, 2)), ((3, 0), (2, 1)), ((3, 3), (2, 2))];
        let mut worst: f64 = 0.0;
        for ((i, j), (k, l)) in pairs {
            worst = worst.max((e[(i, j)] - e[(k, l)].conj()).norm());
        }
        for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)] {
            worst = worst.max(e[(i, j)].norm());
        }
        worst
    }
}

/// Scattering of the degenerate amplifier together with the quantities that
/// enter its closed-form entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateScattering {
    pub block: ScatteringBlock,
    pub rho: f64,
    /// chi_a^{-1}(w_S).
    pub inverse_chi: Complex64,
    pub m1: Complex64,
    pub m2: Complex64,
    pub d: Complex64,
}

impl DegenerateScattering {
    /// Power gains (G_par, G_perp) of the amplified and squeezed quadratures.
    pub fn quadrature_gains(&self) -> (f64, f64) {
        let base = self.inverse_chi.norm_sqr() + self.rho * self.rho;
        let lambda_par = (base + 2.0 * self.rho) / self.d;
        let lambda_perp = (base - 2.0 * self.rho) / self.d;
        (lambda_par.norm_sqr(), lambda_perp.norm_sqr())
    }

    /// 2x2 block acting on `[a(+w_S), a(-w_I)]`.
    pub fn sub_block(&self) -> [[Complex64; 2]; 2] {
        let e = &self.block.entries;
        [[e[(0, 0)], e[(0, 3)]], [e[(3, 0)], e[(3, 3)]]]
    }

    /// Block in the quadrature basis: diag(Lambda_par, Lambda_perp) on the
    /// first two entries, identity on the padding.
    pub fn quadrature_block(&self) -> ScatteringBlock {
        let base = self.inverse_chi.norm_sqr() + self.rho * self.rho;
        let mut m = Matrix4::identity();
        m[(0, 0)] = (base + 2.0 * self.rho) / self.d;
        m[(1, 1)] = (base - 2.0 * self.rho) / self.d;
        ScatteringBlock {
            entries: m,
            signal_frequency: self.block.signal_frequency,
            idler_frequency: self.block.idler_frequency,
            basis: Basis::QuadraturePair,
        }
    }
}

fn quartet(
    r_ss: Complex64,
    s_si: Complex64,
    s_is: Complex64,
    r_ii: Complex64,
    omega_s: f64,
    omega_i: f64,
) -> ScatteringBlock {
    let z = Complex64::new(0.0, 0.0);
    #[rustfmt::skip]
    let entries = Matrix4::new(
        r_ss, z, z, s_si,
        z, r_ss.conj(), s_si.conj(), z,
        z, s_is.conj(), r_ii.conj(), z,
        s_is, z, z, r_ii,
    );
    ScatteringBlock { entries, signal_frequency: omega_s, idler_frequency: omega_i, basis: Basis::FrequencyQuartet }
}

/// Full 4x4 scattering matrix of the non-degenerate amplifier at signal
/// frequency `omega_s`; the idler sits at `pump.frequency - omega_s`.
pub fn ndpa_scattering(model: &AmplifierModel, pump: &EffectivePump, omega_s: f64) -> Result<ScatteringBlock> {
    if model.topology != Topology::NonDegenerate {
        return Err(ParampError::InvalidParameter("ndpa_scattering needs a non-degenerate model".into()));
    }
    let omega_i = pump.frequency - omega_s;
    if omega_i <= 0.0 {
        return Err(ParampError::NegativeIdler { idler: omega_i });
    }
    let rho = pump.rho(model);
    if !(0.0..1.0).contains(&rho) {
        return Err(ParampError::StabilityViolation { rho });
    }
    let a = inverse_susceptibility(&model.signal, omega_s);
    let b = inverse_susceptibility(&model.idler_mode(), omega_i);
    Ok(frequency_quartet(a, b, rho, pump.phase, omega_s, omega_i))
}

fn frequency_quartet(a: Complex64, b: Complex64, rho: f64, theta: f64, omega_s: f64, omega_i: f64) -> ScatteringBlock {
    let r2 = rho * rho;
    let d = a * b.conj() - r2;
    let r_ss = (a.conj() * b.conj() + r2) / d;
    let r_ii = (a * b + r2) / d;
    let s_si = -2.0 * rho * Complex64::from_polar(1.0, -theta) / d;
    let s_is = -2.0 * rho * Complex64::from_polar(1.0, theta) / d;
    quartet(r_ss, s_si, s_is, r_ii, omega_s, omega_i)
}

/// Scattering of the degenerate amplifier with the pump tuned to 2 w_a.
pub fn dpa_scattering(model: &AmplifierModel, pump: &EffectivePump, omega_s: f64) -> Result<DegenerateScattering> {
    if model.topology != Topology::Degenerate {
        return Err(ParampError::InvalidParameter("dpa_scattering needs a degenerate model".into()));
    }
    let expected = 2.0 * model.signal.omega;
    if (pump.frequency - expected).abs() > TUNING_RTOL * expected {
        return Err(ParampError::UnsupportedDetuning { pump: pump.frequency, expected });
    }
    let omega_i = pump.frequency - omega_s;
    if omega_i <= 0.0 {
        return Err(ParampError::NegativeIdler { idler: omega_i });
    }
    let rho = pump.rho(model);
    if !(0.0..1.0).contains(&rho) {
        return Err(ParampError::StabilityViolation { rho });
    }
    let a = inverse_susceptibility(&model.signal, omega_s);
    let m1 = Complex64::from(a.norm_sqr() + rho * rho);
    let m2 = -2.0 * rho * Complex64::from_polar(1.0, -pump.phase);
    let d = a * a - rho * rho;
    let block =
        quartet(m1 / d, m2 / d, -2.0 * rho * Complex64::from_polar(1.0, pump.phase) / d, m1 / d, omega_s, omega_i);
    Ok(DegenerateScattering { block, rho, inverse_chi: a, m1, m2, d })
}

/// Quantum-limited phase-preserving amplifier of power gain `gain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePreservingAmplifier {
    pub gain: f64,
}

impl PhasePreservingAmplifier {
    pub fn new(gain: f64) -> Result<Self> {
        if !(gain >= 1.0 && gain.is_finite()) {
            return Err(ParampError::InvalidParameter(format!("gain must be >= 1, got {gain}")));
        }
        Ok(Self { gain })
    }

    /// Output amplitude sqrt(G) a_in + sqrt(G - 1) b_in^dagger.
    pub fn output(&self, a_in: Complex64, b_in_conj: Complex64) -> Complex64 {
        self.gain.sqrt() * a_in + (self.gain - 1.0).sqrt() * b_in_conj
    }

    /// Added noise referred to the input, in quanta: (1 - 1/G)/2.
    pub fn added_noise_quanta(&self) -> f64 {
        0.5 * (1.0 - 1.0 / self.gain)
    }
}
