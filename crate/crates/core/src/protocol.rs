//! Lossless Kerr / force / inverse-Kerr pipeline and its closed forms.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{self, coherent_state, kerr_unitary, standard_truncation, FockVector, PositionEigenbasis};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Kerr phase `λt` that turns a coherent state into a cat.
pub const CAT_PHASE: f64 = PI / 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub alpha0: Complex64,
    pub delta: f64,
    pub apply_offset: bool,
    /// Overrides the standard truncation rule when set.
    pub truncation: Option<usize>,
}

impl ProtocolParams {
    pub fn new(alpha0: Complex64, delta: f64, apply_offset: bool) -> Result<Self> {
        let p = Self { alpha0, delta, apply_offset, truncation: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_truncation(mut self, dim: usize) -> Self {
        self.truncation = Some(dim);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha0.re.is_finite() || !self.alpha0.im.is_finite() || !self.delta.is_finite() {
            return Err(invalid("protocol", "non-finite amplitude or kick"));
        }
        if self.apply_offset && self.alpha0.re == 0.0 {
            return Err(invalid("apply_offset", "offset π/(8α) needs Re[α₀] ≠ 0"));
        }
        if let Some(n) = self.truncation {
            if n < 2 {
                return Err(invalid("truncation", format!("need N >= 2, got {n}")));
            }
        }
        Ok(())
    }

    /// `α ≡ Re[α₀]`.
    pub fn alpha(&self) -> f64 {
        self.alpha0.re
    }

    /// Offset kick `π/(8α)` when enabled.
    pub fn offset(&self) -> f64 {
        if self.apply_offset {
            PI / (8.0 * self.alpha())
        } else {
            0.0
        }
    }

    pub fn effective_delta(&self) -> f64 {
        self.delta + self.offset()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
            .unwrap_or_else(|| standard_truncation(self.alpha0.norm() + self.effective_delta().abs()))
    }
}

/// A force `F` acting for `Δt` on an oscillator of mass `m` and angular frequency `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalForce {
    pub force: f64,
    pub duration: f64,
    pub mass: f64,
    pub omega_m: f64,
}

impl PhysicalForce {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("duration", self.duration), ("mass", self.mass), ("omega_m", self.omega_m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !self.force.is_finite() {
            return Err(invalid("force", "must be finite"));
        }
        Ok(())
    }

    /// Zero-point momentum scale `√(ħmω/2)`.
    fn momentum_scale(&self) -> f64 {
        (HBAR * self.mass * self.omega_m / 2.0).sqrt()
    }
}

/// `δ = FΔt / √(2mωħ)`.
pub fn force_to_delta(pf: &PhysicalForce) -> Result<f64> {
    pf.validate()?;
    Ok(pf.force * pf.duration / (2.0 * pf.mass * pf.omega_m * HBAR).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotErrors {
    pub classical: f64,
    pub quantum: f64,
}

/// Single-shot fractional errors `ε_c = √(ħmω/2)/(FΔt)` and `ε_q = ε_c/(2α)`.
pub fn shot_errors(pf: &PhysicalForce, alpha: f64) -> Result<ShotErrors> {
    pf.validate()?;
    if pf.force == 0.0 {
        return Err(invalid("force", "single-shot error is undefined for zero force"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let classical = pf.momentum_scale() / (pf.force * pf.duration).abs();
    Ok(ShotErrors { classical, quantum: classical / (2.0 * alpha) })
}

/// `[|α₀⟩ + i|−α₀⟩]/√2`, normalized on the truncated space.
pub fn cat_state(alpha0: Complex64, dim: usize) -> Result<FockVector> {
    let plus = coherent_state(alpha0, dim)?;
    let minus = coherent_state(-alpha0, dim)?;
    plus.add(&minus.scale(Complex64::i())).normalized()
}

/// `U_{π/2}† V(δ_eff) U_{π/2} |α₀⟩`.
pub fn run_ideal(p: &ProtocolParams) -> Result<FockVector> {
    p.validate()?;
    let dim = p.truncation();
    let kerr = kerr_unitary(CAT_PHASE, dim);
    let psi = kerr.apply(&coherent_state(p.alpha0, dim)?);
    let basis = PositionEigenbasis::new(dim)?;
    let kicked = basis.kick(p.effective_delta(), &psi);
    kicked.check_tail(fock::DEFAULT_TAIL_TOLERANCE)?;
    kerr.adjoint().apply(&kicked).normalized()
}

/// `⟨X⟩ = e^{−2δ²}{α cos(4αδ) − δ[sin(4αδ) − e^{−2α²}]}`.
pub fn mean_x_ideal(alpha: f64, delta: f64) -> f64 {
    let phase = 4.0 * alpha * delta;
    (-2.0 * delta * delta).exp()
        * (alpha * phase.cos() - delta * (phase.sin() - (-2.0 * alpha * alpha).exp()))
}

/// `⟨X⟩ ≈ α(4αδ) − δ` about the offset point, with `e^{−2α²}` neglected.
pub fn mean_x_linearized(alpha: f64, delta: f64) -> f64 {
    if (4.0 * alpha * delta).abs() > 0.3 {
        warn!("linearized ⟨X⟩ used outside 4αδ ≪ 1 (4αδ = {:.3})", 4.0 * alpha * delta);
    }
    4.0 * alpha * alpha * delta - delta
}

/// Coin-estimation signal `S = m/M − 1/2` with `σ_S = 1/√(4M)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinSignal {
    pub m_counts: u64,
    pub shots: u64,
    pub s: f64,
    pub sigma_s: f64,
}

pub fn coin_signal(m_counts: u64, shots: u64) -> Result<CoinSignal> {
    if shots == 0 || m_counts > shots {
        return Err(Error::InvalidCounts { m_counts, shots });
    }
    Ok(CoinSignal {
        m_counts,
        shots,
        s: m_counts as f64 / shots as f64 - 0.5,
        sigma_s: 1.0 / (4.0 * shots as f64).sqrt(),
    })
}

/// Predicted coin signal `2α[1 − 1/(2α)²]δ`.
pub fn coin_signal_ideal(alpha: f64, delta: f64) -> f64 {
    2.0 * alpha * (1.0 - 1.0 / (4.0 * alpha * alpha)) * delta
}

/// Relative phase imprinted by the kick on the two cat branches.
///
/// Decomposes `V(δ) U_{π/2}|α₀⟩` exactly onto `|±α₀ − iδ⟩` (solving the 2×2
/// Gram system, so branch overlap does not bias the result) and returns
/// `arg(c₋ / (i c₊))`, which equals `2δ Re[α₀]`.
pub fn superposition_phase(alpha0: Complex64, delta: f64, dim: usize) -> Result<f64> {
    let shift = Complex64::new(0.0, -delta);
    let psi = PositionEigenbasis::new(dim)?.kick(delta, &kerr_unitary(CAT_PHASE, dim).apply(&coherent_state(alpha0, dim)?));
    let plus = coherent_state(alpha0 + shift, dim)?;
    let minus = coherent_state(-alpha0 + shift, dim)?;
    let gram = Matrix2::new(
        plus.inner(&plus),
        plus.inner(&minus),
        minus.inner(&plus),
        minus.inner(&minus),
    );
    let rhs = Vector2::new(plus.inner(&psi), minus.inner(&psi));
    let coeffs = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| invalid("alpha0", "branches are linearly dependent"))?;
    Ok((coeffs[1] / (Complex64::i() * coeffs[0])).arg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::quadrature_distribution;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pf(force: f64) -> PhysicalForce {
        PhysicalForce { force, duration: 1e-6, mass: 1e-15, omega_m: 2.0 * PI * 1e7 }
    }

    #[test]
    fn delta_basics() {
        assert_eq!(force_to_delta(&pf(0.0)).unwrap(), 0.0);
        let one = force_to_delta(&pf(1e-18)).unwrap();
        let two = force_to_delta(&pf(2e-18)).unwrap();
        assert_eq!(two, 2.0 * one);
        assert!(force_to_delta(&PhysicalForce { mass: 0.0, ..pf(1.0) }).is_err());
        assert!(force_to_delta(&PhysicalForce { duration: -1.0, ..pf(1.0) }).is_err());
    }

    #[test]
    fn delta_reference_value() {
        // independent coding: δ² = F²Δt²/(2mωħ), evaluated in log space
        let (f, dt, m, w) = (1e-18f64, 1e-6f64, 1e-15f64, 2.0 * PI * 1e7);
        let log_delta = 0.5 * (2.0 * f.ln() + 2.0 * dt.ln() - (2.0f64).ln() - m.ln() - w.ln() - HBAR.ln());
        let got = force_to_delta(&pf(1e-18)).unwrap();
        assert!((got - log_delta.exp()).abs() < 1e-12 * got);
        assert!((got - 2.746_989_425_3e-4).abs() < 1e-14, "{got}");
    }

    #[test]
    fn shot_error_laws() {
        let e = shot_errors(&pf(1e-18), 0.5).unwrap();
        assert_eq!(e.quantum, e.classical);
        let e = shot_errors(&pf(1e-18), 5.0).unwrap();
        assert!((e.quantum / e.classical - 0.1).abs() < 1e-15);
        let p = pf(1.0);
        let unit = PhysicalForce { force: p.momentum_scale() / p.duration, ..p };
        assert!((shot_errors(&unit, 1.0).unwrap().classical - 1.0).abs() < 1e-12);
        assert!(shot_errors(&pf(0.0), 1.0).is_err());
    }

    #[test]
    fn vacuum_cat() {
        let cat = cat_state(c(0.0), 16).unwrap();
        assert!(cat.fidelity(&FockVector::vacuum(16)) > 1.0 - 1e-15);
    }

    #[test]
    fn cat_from_kerr() {
        let n = 48;
        let cat = cat_state(c(2.0), n).unwrap();
        let kerr = kerr_unitary(CAT_PHASE, n).apply(&coherent_state(c(2.0), n).unwrap());
        assert!(cat.fidelity(&kerr) > 1.0 - 1e-10);
    }

    #[test]
    fn cat_norm_with_overlap() {
        // direct sum: ‖|α⟩ + i|−α⟩‖² = 2 + 2 Re(i⟨α|−α⟩) = 2 since ⟨α|−α⟩ = e^{−2|α|²} is real
        let n = standard_truncation(3.0);
        let plus = coherent_state(c(3.0), n).unwrap();
        let minus = coherent_state(c(-3.0), n).unwrap();
        let overlap = plus.inner(&minus);
        assert!((overlap.re - (-18.0f64).exp()).abs() < 1e-12);
        let raw = 2.0 + 2.0 * (Complex64::i() * overlap).re;
        assert!((raw - 2.0).abs() < 1e-10);
        assert!((cat_state(c(3.0), n).unwrap().norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ideal_without_kick_returns_alpha() {
        let p = ProtocolParams::new(c(2.0), 0.0, false).unwrap();
        assert!((run_ideal(&p).unwrap().mean_x() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn ideal_matches_closed_form() {
        let p = ProtocolParams::new(c(2.0), 0.05, false).unwrap();
        assert!((run_ideal(&p).unwrap().mean_x() - mean_x_ideal(2.0, 0.05)).abs() < 1e-6);
        let p = ProtocolParams::new(c(2.0), 0.0, true).unwrap();
        assert!((run_ideal(&p).unwrap().mean_x() - mean_x_ideal(2.0, PI / 16.0)).abs() < 1e-6);
    }

    #[test]
    fn closed_form_substitutions() {
        assert_eq!(mean_x_ideal(1.7, 0.0), 1.7);
        assert!((mean_x_ideal(0.0, 0.1) - 0.1 * (-0.02f64).exp()).abs() < 1e-15);
        assert_eq!(mean_x_linearized(2.0, 0.0), 0.0);
        assert!((mean_x_linearized(2.0, 0.01) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn linearization_about_offset() {
        // expand the exact form about δ₀ = π/(8α); the offset point sits on
        // the falling side of cos, so the linear response is −(4α²δ − δ) plus
        // terms of order (4αδ)²
        let (alpha, d) = (2.0, 0.01);
        let d0 = PI / (8.0 * alpha);
        let response = mean_x_ideal(alpha, d0 + d) - mean_x_ideal(alpha, d0);
        assert!((response.abs() - mean_x_linearized(alpha, d)).abs() < 6e-3);
    }

    #[test]
    fn coin_signal_arithmetic() {
        assert_eq!(coin_signal(50, 100).unwrap().s, 0.0);
        assert!((coin_signal(60, 100).unwrap().s - 0.1).abs() < 1e-15);
        assert!((coin_signal(0, 100).unwrap().sigma_s - 0.05).abs() < 1e-15);
        assert!(coin_signal(101, 100).is_err());
        assert!(coin_signal(0, 0).is_err());
    }

    #[test]
    fn phase_law() {
        for alpha in [1.0, 2.0] {
            for delta in [0.02, 0.08] {
                let got = superposition_phase(c(alpha), delta, standard_truncation(alpha + delta)).unwrap();
                assert!((got - 2.0 * delta * alpha).abs() < 1e-6, "α={alpha} δ={delta}: {got}");
            }
        }
    }

    #[test]
    fn cat_homodyne_is_balanced() {
        let q = quadrature_distribution(&cat_state(c(2.0), 48).unwrap(), fock::DEFAULT_GRID_SIZE).unwrap();
        assert!((q.prob_x_positive - 0.5).abs() < 1e-6);
    }

    #[test]
    fn offset_needs_real_amplitude() {
        assert!(ProtocolParams::new(Complex64::new(0.0, 1.0), 0.0, true).is_err());
    }
}
