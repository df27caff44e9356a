// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Effective amplifier parameters of four circuit implementations: the
//! pumped Josephson (Duffing) oscillator, the flux-pumped DC-SQUID, the
//! double-pumped two-cavity circuit and the three-wave-mixing ring modulator.
//!
//! Energies are in joules, inductances in henries, capacitances in farads.
//! Everything returned is an angular rate (rad/s) or dimensionless.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::error::{ParampError, Result};
use crate::model::{AmplifierModel, Topology, ELEMENTARY_CHARGE, HBAR};

const PHI_ZPF_WARN: f64 = 0.3;
const PHI_ZPF_MAX: f64 = 0.5;
const MODULATION_WARN: f64 = 0.2;
const MIN_FLUX_COS: f64 = 0.05;
const MATCHING_TOL: f64 = 1e-13;
const MATCHING_MAX_ITER: usize = 100;

/// Josephson inductance for a given Josephson energy, E_J = (hbar / 2e)^2 / L_J.
pub fn josephson_inductance(e_j: f64) -> f64 {
    (HBAR / (2.0 * ELEMENTARY_CHARGE)).powi(2) / e_j
}

fn check_phi_zpf(name: &str, phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(ParampError::InvalidParameter(format!("{name} must be positive, got {phi}")));
    }
    if phi >= PHI_ZPF_MAX {
        return Err(ParampError::InvalidParameter(format!(
            "{name} = {phi} is outside the small-phase expansion (< {PHI_ZPF_MAX})"
        )));
    }
    if phi > PHI_ZPF_WARN {
        warn!("{name} = {phi:.3}: higher orders of the junction potential may matter");
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(ParampError::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// A single Josephson junction shunted by a capacitance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    pub e_j: f64,
    pub c_sigma: f64,
}

impl JunctionParams {
    pub fn new(e_j: f64, c_sigma: f64) -> Result<Self> {
        let j = Self { e_j, c_sigma };
        j.validate()?;
        Ok(j)
    }

    pub fn from_inductance(l_j: f64, c_sigma: f64) -> Result<Self> {
        check_positive("L_J", l_j)?;
        Self::new(josephson_inductance(l_j), c_sigma)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("E_J", self.e_j)?;
        check_positive("C_sigma", self.c_sigma)?;
        check_phi_zpf("phi_zpf", self.phi_zpf())
    }

    pub fn l_j(&self) -> f64 {
        josephson_inductance(self.e_j)
    }

    /// Zero-point phase fluctuation (2e^2/hbar)^{1/2} (L_J/C_sigma)^{1/4}.
    pub fn phi_zpf(&self) -> f64 {
        (2.0 * ELEMENTARY_CHARGE.powi(2) / HBAR).sqrt() * (self.l_j() / self.c_sigma).powf(0.25)
    }

    /// Kerr constant K = -e^2 / (2 hbar C_sigma), always negative.
    pub fn kerr(&self) -> f64 {
        -ELEMENTARY_CHARGE.powi(2) / (2.0 * HBAR * self.c_sigma)
    }

    /// Small-amplitude frequency including the Kerr shift, 1/sqrt(L_J C_sigma) + K.
    pub fn omega_tilde(&self) -> f64 {
        1.0 / (self.l_j() * self.c_sigma).sqrt() + self.kerr()
    }
}

/// Strong tone incident on the Duffing oscillator's single port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuffingDrive {
    /// Incident amplitude (sqrt(photons/s)).
    pub alpha_in: Complex64,
    /// Drive frequency Omega.
    pub omega: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuffingOperatingPoint {
    /// Intracavity drive amplitude alpha (sqrt(photons)).
    pub alpha: Complex64,
    pub kerr: f64,
    pub omega_tilde: f64,
    /// Pulled mode frequency omega_tilde + 2 K |alpha|^2.
    pub omega_eff: f64,
    /// |K alpha*^2 / 2|.
    pub g_aa: f64,
    pub theta: f64,
    /// Omega_aa = 2 Omega.
    pub pump_frequency: f64,
}

/// Real roots of n [(delta - K n)^2 + kappa^2/4] = kappa |alpha_in|^2.
///
/// All roots lie in (0, 4 |alpha_in|^2 / kappa]. Returned in increasing order.
pub fn duffing_photon_numbers(kerr: f64, delta: f64, kappa: f64, drive_flux: f64) -> Vec<f64> {
    if drive_flux == 0.0 {
        return vec![0.0];
    }
    let f = |n: f64| n * ((delta - kerr * n).powi(2) + 0.25 * kappa * kappa) - kappa * drive_flux;
    let upper = 4.0 * drive_flux / kappa;
    // f'(n) = 3K^2 n^2 - 4 delta K n + delta^2 + kappa^2/4
    let disc = delta * delta - 0.75 * kappa * kappa;
    let mut knots = vec![0.0];
    if disc > 0.0 && kerr != 0.0 {
        let s = 2.0 * kerr.abs() * disc.sqrt();
        for n in [(4.0 * delta * kerr - s) / (6.0 * kerr * kerr), (4.0 * delta * kerr + s) / (6.0 * kerr * kerr)] {
            if n > 0.0 && n < upper {
                knots.push(n);
            }
        }
    }
    knots.push(upper);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if fhi == 0.0 {
            roots.push(hi);
            continue;
        }
        if flo.signum() == fhi.signum() || flo == 0.0 {
            continue;
        }
        let rising = fhi > flo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (f(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    roots
}

/// Self-consistent operating point of the pumped Duffing oscillator and the
/// parametric-pump parameters of its linearized fluctuations.
///
/// Outside the bistable region the cubic has a single root, which is the
/// branch reached continuously from zero drive. Inside it the three branches
/// are reported and none is chosen.
pub fn duffing_effective(junction: &JunctionParams, drive: &DuffingDrive) -> Result<DuffingOperatingPoint> {
    junction.validate()?;
    check_positive("kappa", drive.kappa)?;
    check_positive("Omega", drive.omega)?;
    let k = junction.kerr();
    let w = junction.omega_tilde();
    if !(k.abs() < drive.kappa && drive.kappa < w) {
        warn!("Duffing hierarchy omega >> kappa >> |K| is violated (|K| = {:e}, kappa = {:e})", k.abs(), drive.kappa);
    }
    let delta = drive.omega - w;
    let roots = duffing_photon_numbers(k, delta, drive.kappa, drive.alpha_in.norm_sqr());
    if roots.len() > 1 {
        return Err(ParampError::BistableDrive { photon_numbers: roots });
    }
    let n = roots[0];
    let alpha = Complex64::i() * drive.kappa.sqrt() * drive.alpha_in / Complex64::new(delta - k * n, 0.5 * drive.kappa);
    let pump = k * alpha.conj() * alpha.conj() / 2.0;
    Ok(DuffingOperatingPoint {
        alpha,
        kerr: k,
        omega_tilde: w,
        omega_eff: w + 2.0 * k * n,
        g_aa: pump.norm(),
        theta: if n > 0.0 { pump.arg() } else { 0.0 },
        pump_frequency: 2.0 * drive.omega,
    })
}

/// DC-SQUID whose flux is modulated around its bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidParams {
    /// Inductance of the junction pair at zero flux (H).
    pub l_j: f64,
    pub c_sigma: f64,
    /// Static flux Phi_ext / Phi_0.
    pub flux_bias: f64,
    /// Relative flux modulation depth epsilon.
    pub modulation_depth: f64,
    /// Modulation frequency Omega (rad/s).
    pub pump_frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidOperatingPoint {
    pub l_squid: f64,
    pub omega0: f64,
    /// Relative frequency modulation pi epsilon / 4.
    pub mu_r: f64,
    pub g_aa: f64,
    pub pump_frequency: f64,
}

/// Parametric drive of the flux-pumped SQUID oscillator,
/// g_aa = mu_r omega0 / 4 with mu_r = pi epsilon / 4 (quarter-flux bias).
pub fn squid_effective(squid: &SquidParams) -> Result<SquidOperatingPoint> {
    check_positive("L_J", squid.l_j)?;
    check_positive("C_sigma", squid.c_sigma)?;
    check_positive("Omega", squid.pump_frequency)?;
    let eps = squid.modulation_depth;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(ParampError::InvalidParameter(format!("modulation depth must be >= 0, got {eps}")));
    }
    if eps > MODULATION_WARN {
        warn!("modulation depth {eps} is not small; the first-order expansion is inaccurate");
    }
    if (squid.flux_bias - 0.25).abs() > 1e-9 {
        warn!("mu_r = pi eps / 4 assumes a quarter flux quantum bias, got {}", squid.flux_bias);
    }
    let cos = (PI * squid.flux_bias).cos().abs();
    if cos < MIN_FLUX_COS {
        return Err(ParampError::FluxNearHalfQuantum { cos_value: cos });
    }
    let l_squid = squid.l_j / cos;
    let omega0 = 1.0 / (squid.c_sigma * l_squid).sqrt();
    let mu_r = PI * eps / 4.0;
    Ok(SquidOperatingPoint { l_squid, omega0, mu_r, g_aa: mu_r * omega0 / 4.0, pump_frequency: squid.pump_frequency })
}

/// Two cavities (a, c) sharing a junction, with a stiff pump and a weak
/// drive on c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublePumpParams {
    pub e_j: f64,
    pub phi_a: f64,
    pub phi_c: f64,
    pub phi_q: f64,
    /// Pump and drive strengths (rad/s).
    pub eps_p: f64,
    pub eps_c: f64,
    pub omega_a: f64,
    pub omega_c: f64,
    pub kappa_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublePumpPoint {
    pub chi_aa: f64,
    pub chi_cc: f64,
    pub chi_ac: f64,
    /// Pump displacement of mode c.
    pub xi_p: Complex64,
    /// Complex two-photon coupling chi_ac xi_p* / 2.
    pub g2: Complex64,
    pub omega_p: f64,
    pub omega_d: f64,
    pub iterations: usize,
}

impl DoublePumpParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("E_J", self.e_j)?;
        check_phi_zpf("phi_a", self.phi_a)?;
        check_phi_zpf("phi_c", self.phi_c)?;
        check_phi_zpf("phi_q", self.phi_q)?;
        check_positive("omega_a", self.omega_a)?;
        check_positive("omega_c", self.omega_c)?;
        check_positive("kappa_c", self.kappa_c)?;
        if !(self.eps_p.is_finite() && self.eps_c.is_finite()) {
            return Err(ParampError::InvalidParameter("drive strengths must be finite".into()));
        }
        Ok(())
    }

    pub fn chi_aa(&self) -> f64 {
        self.e_j * self.phi_a.powi(4) / (2.0 * HBAR)
    }

    pub fn chi_cc(&self) -> f64 {
        self.e_j * self.phi_c.powi(4) / (2.0 * HBAR)
    }

    pub fn chi_ac(&self) -> f64 {
        self.e_j * self.phi_a.powi(2) * self.phi_c.powi(2) / HBAR
    }

    /// xi_p = -i eps_p / [kappa_c/2 + i (omega_c - omega_p)].
    pub fn xi_p(&self, omega_p: f64) -> Complex64 {
        -Complex64::i() * self.eps_p / Complex64::new(0.5 * self.kappa_c, self.omega_c - omega_p)
    }

    /// Rotating-frame detunings (omega_tilde_a, omega_tilde_c) for given pump
    /// and drive frequencies.
    pub fn detunings(&self, omega_p: f64, omega_d: f64) -> [f64; 2] {
        let x2 = self.xi_p(omega_p).norm_sqr();
        [
            self.omega_a - 0.5 * (omega_d + omega_p) - self.chi_aa() - self.chi_ac() * x2,
            self.omega_c - omega_d - self.chi_cc() - self.chi_cc() * x2,
        ]
    }
}

/// Pump and drive frequencies that put both modes on resonance in their
/// rotating frames, and the resulting two-photon coupling.
pub fn double_pump_effective(params: &DoublePumpParams) -> Result<DoublePumpPoint> {
    params.validate()?;
    let (chi_ac, chi_cc) = (params.chi_ac(), params.chi_cc());
    let k2 = 0.25 * params.kappa_c * params.kappa_c;
    let e2 = params.eps_p * params.eps_p;
    let scale = params.omega_a.max(params.omega_c);
    let mut wd = params.omega_c;
    let mut wp = 2.0 * params.omega_a - params.omega_c;
    for it in 0..MATCHING_MAX_ITER {
        let [fa, fc] = params.detunings(wp, wd);
        if fa.abs().max(fc.abs()) <= MATCHING_TOL * scale {
            let xi_p = params.xi_p(wp);
            return Ok(DoublePumpPoint {
                chi_aa: params.chi_aa(),
                chi_cc,
                chi_ac,
                xi_p,
                g2: chi_ac * xi_p.conj() / 2.0,
                omega_p: wp,
                omega_d: wd,
                iterations: it,
            });
        }
        let u = params.omega_c - wp;
        let dx2 = 2.0 * e2 * u / (k2 + u * u).powi(2);
        // d/d(omega_p), d/d(omega_d) of both detunings
        let (a11, a12) = (-0.5 - chi_ac * dx2, -0.5);
        let (a21, a22) = (-chi_cc * dx2, -1.0);
        let det = a11 * a22 - a12 * a21;
        if !(det.abs() > 0.0 && det.is_finite()) {
            break;
        }
        wp -= (a22 * fa - a12 * fc) / det;
        wd -= (a11 * fc - a21 * fa) / det;
        if !(wp.is_finite() && wd.is_finite()) {
            break;
        }
    }
    Err(ParampError::NoMatching(format!(
        "Newton iteration from the Kerr-free guess did not converge (omega_p = {wp:e}, omega_d = {wd:e})"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JrmPumpCoupling {
    /// g3 |sqrt(kappa_c) alpha_in / (-i (Omega - omega_c) + kappa_c)|.
    pub g_ab: f64,
    pub theta: f64,
    /// Omega_ab = Omega.
    pub pump_frequency: f64,
    /// The same pump in the input-flux convention of the stiff-pump model,
    /// 2 g3 |alpha_in| / sqrt(kappa_c), independent of detuning.
    pub g_ab_input_convention: f64,
}

/// Parametric coupling produced by a stiff pump of amplitude `alpha_in`
/// (sqrt(photons/s)) at frequency `omega` on the c port of a ring-modulator
/// amplifier. The model's coupling is g3.
pub fn jrm_effective(model: &AmplifierModel, alpha_in: Complex64, omega: f64) -> Result<JrmPumpCoupling> {
    model.validate()?;
    if model.topology != Topology::NonDegenerate {
        return Err(ParampError::InvalidParameter("the ring modulator is a non-degenerate amplifier".into()));
    }
    check_positive("Omega", omega)?;
    let (a, b, c) = (model.signal, model.idler_mode(), model.pump);
    let g3 = model.coupling;
    let ordered = c.omega > b.omega
        && b.omega > a.omega
        && a.omega > c.kappa
        && c.kappa > a.kappa.max(b.kappa)
        && a.kappa.min(b.kappa) > g3;
    if !ordered {
        warn!("frequency hierarchy omega_c >> omega_b > omega_a > kappa_c >> kappa_a, kappa_b >> g3 is violated");
    }
    let z = c.kappa.sqrt() * alpha_in / Complex64::new(c.kappa, -(omega - c.omega));
    Ok(JrmPumpCoupling {
        g_ab: g3 * z.norm(),
        theta: if z.norm() > 0.0 { -z.arg() } else { 0.0 },
        pump_frequency: omega,
        g_ab_input_convention: 2.0 * g3 * alpha_in.norm() / c.kappa.sqrt(),
    })
}

/// Reduced coupling seen by the amplifier for an effective parametric rate:
/// 4 g_aa / kappa_a (degenerate) or 2 g_ab / sqrt(kappa_a kappa_b).
pub fn reduced_coupling_for_rate(topology: Topology, g_eff: f64, kappa_a: f64, kappa_b: f64) -> f64 {
    match topology {
        Topology::Degenerate => 4.0 * g_eff / kappa_a,
        Topology::NonDegenerate => 2.0 * g_eff / (kappa_a * kappa_b).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ideal_gain, ModeParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn junction() -> JunctionParams {
        // L_J = 1 nH, C = 1 pF: omega ~ 2 pi 5 GHz, phi_zpf ~ 0.2
        JunctionParams::from_inductance(1e-9, 1e-12).unwrap()
    }

    #[test]
    fn junction_constants() {
        let j = junction();
        assert_relative_eq!(j.l_j(), 1e-9, max_relative = 1e-12);
        assert!(j.kerr() < 0.0);
        assert!(j.phi_zpf() > 0.1 && j.phi_zpf() < 0.3);
        assert_relative_eq!(j.omega_tilde(), 1.0 / (1e-21f64).sqrt() + j.kerr(), max_relative = 1e-15);
        assert!(JunctionParams::from_inductance(1e-6, 1e-15).is_err());
    }

    #[test]
    fn duffing_undriven() {
        let j = junction();
        let p = duffing_effective(
            &j,
            &DuffingDrive { alpha_in: Complex64::new(0.0, 0.0), omega: j.omega_tilde(), kappa: 1e8 },
        )
        .unwrap();
        assert_eq!(p.alpha, Complex64::new(0.0, 0.0));
        assert_eq!(p.g_aa, 0.0);
        assert_eq!(p.omega_eff, j.omega_tilde());
        assert_eq!(p.pump_frequency, 2.0 * j.omega_tilde());
    }

    #[test]
    fn duffing_weak_drive_is_lorentzian() {
        let j = junction();
        let kappa = 2e8;
        let omega = j.omega_tilde() + 0.3 * kappa;
        let ain = Complex64::new(1.0, 0.0);
        let p = duffing_effective(&j, &DuffingDrive { alpha_in: ain, omega, kappa }).unwrap();
        let lorentz = kappa * ain.norm_sqr() / ((0.3 * kappa).powi(2) + 0.25 * kappa * kappa);
        assert_relative_eq!(p.alpha.norm_sqr(), lorentz, max_relative = 1e-6);
        assert_relative_eq!(p.g_aa, j.kerr().abs() * lorentz / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn duffing_pulls_frequency_down() {
        let j = junction();
        let kappa = 2e8;
        let mut last = j.omega_tilde();
        // Drive on the blue side is never bistable for K < 0.
        for k in 1..20 {
            let ain = Complex64::new(1e3 * k as f64, 0.0);
            let p = duffing_effective(&j, &DuffingDrive { alpha_in: ain, omega: j.omega_tilde() + 0.2 * kappa, kappa })
                .unwrap();
            assert!(p.omega_eff < last);
            last = p.omega_eff;
        }
    }

    #[test]
    fn duffing_bistable_reports_all_branches() {
        let j = junction();
        let kappa = 2e8;
        let delta = -3.0 * kappa;
        // Mid-range of the S curve: pick a drive between the two turning points.
        let k = j.kerr();
        let f = |n: f64| n * ((delta - k * n).powi(2) + 0.25 * kappa * kappa) / kappa;
        let n_turn = (4.0 * delta * k - 2.0 * k.abs() * (delta * delta - 0.75 * kappa * kappa).sqrt()) / (6.0 * k * k);
        let flux = 0.5 * (f(n_turn) + f(delta / k));
        let err = duffing_effective(
            &j,
            &DuffingDrive { alpha_in: Complex64::new(flux.sqrt(), 0.0), omega: j.omega_tilde() + delta, kappa },
        )
        .unwrap_err();
        match err {
            ParampError::BistableDrive { photon_numbers } => {
                assert_eq!(photon_numbers.len(), 3);
                for n in photon_numbers {
                    assert_relative_eq!(f(n), flux, max_relative = 1e-9);
                }
            }
            e => panic!("{e:?}"),
        }
    }

    proptest! {
        #[test]
        fn duffing_roots_solve_cubic(delta in -5.0f64..5.0, flux in 1e-3f64..1e3, kerr in -1e-2f64..-1e-6) {
            let kappa = 1.0;
            let roots = duffing_photon_numbers(kerr, delta, kappa, flux);
            prop_assert!(roots.len() == 1 || roots.len() == 3);
            for n in roots {
                let lhs = n * ((delta - kerr * n).powi(2) + 0.25);
                prop_assert!((lhs - flux).abs() <= 1e-9 * flux);
            }
        }

        #[test]
        fn duffing_branch_continuous(delta in -0.8f64..2.0) {
            // |delta| < sqrt(3)/2 kappa or blue detuning: single-valued branch.
            let kappa = 1.0;
            let kerr = -1e-3;
            let mut last = 0.0;
            for k in 1..200 {
                let flux = 0.05 * k as f64;
                let n = duffing_photon_numbers(kerr, delta, kappa, flux);
                prop_assert_eq!(n.len(), 1);
                prop_assert!(n[0] > last && n[0] - last < 0.5);
                last = n[0];
            }
        }
    }

    #[test]
    fn squid_quarter_flux() {
        let s =
            SquidParams { l_j: 1e-9, c_sigma: 1e-12, flux_bias: 0.25, modulation_depth: 0.05, pump_frequency: 6e10 };
        let p = squid_effective(&s).unwrap();
        assert_relative_eq!(p.l_squid, 2f64.sqrt() * 1e-9, max_relative = 1e-14);
        assert_eq!(p.mu_r, PI * 0.05 / 4.0);
        assert_eq!(p.g_aa, p.mu_r * p.omega0 / 4.0);
        assert_relative_eq!(p.g_aa / p.omega0, PI * 0.05 / 16.0, max_relative = 1e-15);
        assert_eq!(p.pump_frequency, 6e10);
        let off = squid_effective(&SquidParams { modulation_depth: 0.0, ..s }).unwrap();
        assert_eq!(off.g_aa, 0.0);
        assert!(matches!(
            squid_effective(&SquidParams { flux_bias: 0.49, ..s }),
            Err(ParampError::FluxNearHalfQuantum { .. })
        ));
    }

    fn double_pump(phi: f64, eps_p: f64) -> DoublePumpParams {
        DoublePumpParams {
            e_j: 2e-23,
            phi_a: phi,
            phi_c: 0.8 * phi,
            phi_q: 0.3,
            eps_p,
            eps_c: 1e6,
            omega_a: 2.0 * PI * 8e9,
            omega_c: 2.0 * PI * 4.5e9,
            kappa_c: 2.0 * PI * 20e6,
        }
    }

    #[test]
    fn double_pump_kerr_free_limit() {
        let p = double_pump(1e-6, 2.0 * PI * 50e6);
        let r = double_pump_effective(&p).unwrap();
        assert!((r.omega_d - p.omega_c).abs() <= 1e-9 * p.omega_c);
        assert!((r.omega_p + r.omega_d - 2.0 * p.omega_a).abs() <= 1e-9 * p.omega_a);
    }

    #[test]
    fn double_pump_matches_with_kerr() {
        let p = double_pump(0.1, 2.0 * PI * 200e6);
        let r = double_pump_effective(&p).unwrap();
        let [da, dc] = p.detunings(r.omega_p, r.omega_d);
        assert!(da.abs() < 1e-12 * p.omega_a && dc.abs() < 1e-12 * p.omega_a);
        let u = p.omega_c - r.omega_p;
        let expected = r.chi_ac * p.eps_p / (2.0 * (0.25 * p.kappa_c.powi(2) + u * u).sqrt());
        assert_relative_eq!(r.g2.norm(), expected, max_relative = 1e-12);
        assert!(r.chi_aa > 0.0 && r.chi_ac > 0.0);

        let still = double_pump_effective(&double_pump(0.1, 0.0)).unwrap();
        assert_eq!(still.g2, Complex64::new(0.0, 0.0));
        assert_relative_eq!(still.omega_d, p.omega_c - still.chi_cc, max_relative = 1e-14);
        assert_relative_eq!(still.omega_p + still.omega_d, 2.0 * (p.omega_a - still.chi_aa), max_relative = 1e-14);
    }

    fn jrm_model() -> AmplifierModel {
        let tau = 2.0 * PI;
        AmplifierModel::non_degenerate(
            ModeParams::new(tau * 5e9, tau * 2e6).unwrap(),
            ModeParams::new(tau * 7e9, tau * 2e6).unwrap(),
            ModeParams::new(tau * 1.2e10, tau * 1e8).unwrap(),
            tau * 1e4,
        )
        .unwrap()
    }

    #[test]
    fn jrm_on_resonance_and_detuned() {
        let m = jrm_model();
        let ain = Complex64::new(3e4, 0.0);
        let kc = m.pump.kappa;
        let on = jrm_effective(&m, ain, m.pump.omega).unwrap();
        assert_relative_eq!(on.g_ab, m.coupling * ain.norm() / kc.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(on.g_ab_input_convention, 2.0 * on.g_ab, max_relative = 1e-14);
        assert_eq!(on.pump_frequency, m.pump.omega);
        let off = jrm_effective(&m, ain, m.pump.omega + kc).unwrap();
        assert_relative_eq!(off.g_ab, on.g_ab / 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(off.theta, -PI / 4.0, max_relative = 1e-12);
        assert_eq!(jrm_effective(&m, Complex64::new(0.0, 0.0), m.pump.omega).unwrap().g_ab, 0.0);
    }

    #[test]
    fn pipeline_to_gain() {
        // SQUID pump into a 100 MHz wide mode, then the ideal gain.
        let s = SquidParams {
            l_j: 1e-9,
            c_sigma: 1e-12,
            flux_bias: 0.25,
            modulation_depth: 2e-3,
            pump_frequency: 2.0 * 5.9e10,
        };
        let p = squid_effective(&s).unwrap();
        let kappa = p.omega0 / 100.0;
        let rho = reduced_coupling_for_rate(Topology::Degenerate, p.g_aa, kappa, kappa);
        let g = ideal_gain(rho).unwrap();
        assert!(g > 1.0 && g.is_finite());
        assert_relative_eq!(rho, 100.0 * PI * 2e-3 / 4.0, max_relative = 1e-12);

        let m = jrm_model();
        let c = jrm_effective(&m, Complex64::new(1e5, 0.0), m.pump.omega).unwrap();
        let rho = reduced_coupling_for_rate(
            Topology::NonDegenerate,
            c.g_ab_input_convention,
            m.signal.kappa,
            m.idler_mode().kappa,
        );
        let drive = crate::model::DriveConditions::resonant(&m, 1e5, 0.0);
        assert_relative_eq!(rho, crate::model::reduced_coupling(&m, &drive), max_relative = 1e-12);
        assert!(ideal_gain(rho).unwrap() >= 1.0);
    }
}
