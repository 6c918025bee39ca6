//! Linear quantum trajectories of the lossy protocol.
//!
//! Between photon emissions the cavity evolves under the non-unitary
//! `W(t) = U_{λt} e^{−κt a†a/2}`; an emission at `t′` inserts `a`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::channel::{beam_splitter, TwoModeState};
use super::{LossBudget, LossParams};
use crate::error::{invalid, Result};
use crate::fock::{
    coherent_state, kerr_diagonal, ladder_ops, parity, quadrature_distribution, FockOperator, FockVector,
    PositionEigenbasis, QuadratureResult, DEFAULT_TAIL_TOLERANCE,
};
use crate::protocol::CAT_PHASE;

/// `U_θ e^{−d·a†a/2}` with explicit damping `d = κt`.
pub fn lossy_kerr(theta: f64, damping: f64, dim: usize) -> FockOperator {
    kerr_diagonal(theta, damping, dim)
}

/// `W` for Kerr phase `θ = λt`, damping `κt = κθ/λ` taken from `lp`.
pub fn lossy_kerr_propagator(theta: f64, lp: &LossParams, dim: usize) -> FockOperator {
    let rates = lp.rates();
    lossy_kerr(theta, rates.kappa * theta.abs() / rates.lambda_kerr, dim)
}

/// A normalized branch state and its unnormalized weight.
#[derive(Clone, Debug)]
pub struct EmissionTrajectory {
    pub state: FockVector,
    /// Probability density of the branch (per unit time for
    /// [`single_emission_state`], per unit stage fraction for
    /// [`LossyPipeline::emission_state`]).
    pub weight: f64,
}

fn branch(psi: FockVector, density_scale: f64) -> Result<EmissionTrajectory> {
    let weight = density_scale * psi.norm_sqr();
    Ok(EmissionTrajectory { state: psi.normalized()?, weight })
}

/// `W(t − t′) a W(t′)|α₀⟩` over a Kerr evolution of total phase `theta_total`.
pub fn single_emission_state(
    t_emit: f64,
    theta_total: f64,
    alpha0: Complex64,
    lp: &LossParams,
    dim: usize,
) -> Result<EmissionTrajectory> {
    let rates = lp.rates();
    let total = theta_total / rates.lambda_kerr;
    if !(0.0..=total).contains(&t_emit) {
        return Err(invalid("t_emit", format!("must lie in [0, {total}], got {t_emit}")));
    }
    let psi = coherent_state(alpha0, dim)?;
    let lad = ladder_ops(dim)?;
    let before = lossy_kerr(rates.lambda_kerr * t_emit, rates.kappa * t_emit, dim);
    let rest = total - t_emit;
    let after = lossy_kerr(rates.lambda_kerr * rest, rates.kappa * rest, dim);
    let out = after.apply(&lad.a.apply(&before.apply(&psi)));
    branch(out, rates.kappa)
}

/// Kick that puts the no-emission coin at its steepest, balanced point.
///
/// After the transfer the cat has amplitude `β = ξηα`; the kick phase `2βδ`
/// adds to the overlap phase `2η²βδ` of the contracted readout branches,
/// so the quarter period sits at `π/(4β(1 + η²))`, i.e. `π/(8α)` when lossless.
pub fn balanced_offset(alpha: f64, budget: &LossBudget) -> f64 {
    let eta = budget.eta();
    PI / (4.0 * budget.xi * eta * alpha * (1.0 + eta * eta))
}

/// Where a single photon emission happens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmissionStage {
    /// During the cat-forming Kerr stage, before the transfer.
    Preparation,
    /// During the inverse Kerr stage, after the kick.
    Readout,
}

/// Full lossy protocol in Fock space: `W`, swap round trip (parity and
/// beam splitter with an auxiliary vacuum), kick, inverse `W`.
#[derive(Clone, Debug)]
pub struct LossyPipeline {
    alpha0: Complex64,
    budget: LossBudget,
    dim: usize,
    offset: f64,
    basis: PositionEigenbasis,
    splitter: DMatrix<f64>,
    readout: FockOperator,
    /// No-emission, aux-projected state right after the transfer.
    transferred: FockVector,
    grid_size: usize,
}

impl LossyPipeline {
    pub fn new(alpha0: Complex64, budget: LossBudget, apply_offset: bool, dim: usize) -> Result<Self> {
        let alpha = alpha0.re;
        if apply_offset && alpha == 0.0 {
            return Err(invalid("apply_offset", "offset needs Re[α₀] ≠ 0"));
        }
        let offset = if apply_offset { balanced_offset(alpha, &budget) } else { 0.0 };
        let splitter = beam_splitter(budget.xi, dim)?;
        let basis = PositionEigenbasis::new(dim)?;
        let prepared = Self::prepare(alpha0, &budget, dim)?;
        let readout = lossy_kerr(-CAT_PHASE, budget.kappa_tau, dim);
        let mut me = Self {
            alpha0,
            budget,
            dim,
            offset,
            basis,
            splitter,
            readout,
            transferred: prepared.clone(),
            grid_size: crate::fock::DEFAULT_GRID_SIZE,
        };
        me.transferred = me.transfer(&prepared)?.project_aux_vacuum();
        Ok(me)
    }

    pub fn with_grid_size(mut self, grid_size: usize) -> Self {
        self.grid_size = grid_size;
        self
    }

    fn prepare(alpha0: Complex64, budget: &LossBudget, dim: usize) -> Result<FockVector> {
        let psi = coherent_state(alpha0, dim)?;
        Ok(lossy_kerr(CAT_PHASE, budget.kappa_tau, dim).apply(&psi))
    }

    fn transfer(&self, psi: &FockVector) -> Result<TwoModeState> {
        let flipped = parity(self.dim).apply(psi);
        Ok(TwoModeState::product(&flipped, &FockVector::vacuum(self.dim))?.apply_real(&self.splitter))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn budget(&self) -> &LossBudget {
        &self.budget
    }

    pub fn alpha0(&self) -> Complex64 {
        self.alpha0
    }

    /// Offset kick from [`balanced_offset`] (zero when disabled).
    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn kicked(&self, psi: &FockVector, delta_prime: f64) -> FockVector {
        self.basis.kick(delta_prime + self.offset, psi)
    }

    /// Unnormalized final state with no emission anywhere.
    pub fn no_emission_unnormalized(&self, delta_prime: f64) -> FockVector {
        self.readout.apply(&self.kicked(&self.transferred, delta_prime))
    }

    pub fn no_emission_state(&self, delta_prime: f64) -> Result<FockVector> {
        let out = self.no_emission_unnormalized(delta_prime);
        out.check_tail(DEFAULT_TAIL_TOLERANCE * out.norm_sqr())?;
        out.normalized()
    }

    /// `⟨X⟩` of the no-emission trajectory.
    pub fn no_emission_mean_x(&self, delta_prime: f64) -> Result<f64> {
        Ok(self.no_emission_state(delta_prime)?.mean_x())
    }

    pub fn no_emission_quadrature(&self, delta_prime: f64) -> Result<QuadratureResult> {
        quadrature_distribution(&self.no_emission_state(delta_prime)?, self.grid_size)
    }

    /// `Prob(X > 0)` of the no-emission trajectory.
    pub fn outcome_probability(&self, delta_prime: f64) -> Result<f64> {
        Ok(self.no_emission_quadrature(delta_prime)?.prob_x_positive)
    }

    /// `⟨X⟩` with the auxiliary mode traced out instead of projected.
    pub fn unconditional_mean_x(&self, delta_prime: f64) -> Result<f64> {
        let prepared = Self::prepare(self.alpha0, &self.budget, self.dim)?;
        let kick = self.basis.kick_operator(delta_prime + self.offset);
        let out = self.transfer(&prepared)?.apply_system(&kick).apply_system(&self.readout);
        Ok(out.system_mean_annihilation().re)
    }

    /// Single emission at `fraction ∈ [0, 1]` of the given Kerr stage.
    ///
    /// The weight is a density in `fraction`, so its integral over `[0, 1]`
    /// is the emission probability of that stage.
    pub fn emission_state(&self, delta_prime: f64, stage: EmissionStage, fraction: f64) -> Result<EmissionTrajectory> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(invalid("fraction", format!("must lie in [0, 1], got {fraction}")));
        }
        let kt = self.budget.kappa_tau;
        let lad = ladder_ops(self.dim)?;
        let (first, rest) = (fraction, 1.0 - fraction);
        let out = match stage {
            EmissionStage::Preparation => {
                let psi = coherent_state(self.alpha0, self.dim)?;
                let psi = lossy_kerr(CAT_PHASE * first, kt * first, self.dim).apply(&psi);
                let psi = lossy_kerr(CAT_PHASE * rest, kt * rest, self.dim).apply(&lad.a.apply(&psi));
                let psi = self.transfer(&psi)?.project_aux_vacuum();
                self.readout.apply(&self.kicked(&psi, delta_prime))
            }
            EmissionStage::Readout => {
                let psi = self.kicked(&self.transferred, delta_prime);
                let psi = lossy_kerr(-CAT_PHASE * first, kt * first, self.dim).apply(&psi);
                lossy_kerr(-CAT_PHASE * rest, kt * rest, self.dim).apply(&lad.a.apply(&psi))
            }
        };
        branch(out, kt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{mean_x_lossy, LossRates};
    use crate::quadrature::integrate;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rates(kappa: f64, lambda: f64) -> LossRates {
        LossRates { kappa, gamma: 0.0, g: 1e9, omega_m: 1e7, lambda_kerr: lambda, temp: 0.0 }
    }

    #[test]
    fn propagator_damping_from_rates() {
        let lp = LossParams::new(rates(2.0, 40.0)).unwrap();
        let w = lossy_kerr_propagator(PI / 2.0, &lp, 6);
        let expect = (-0.5 * 2.0 * (PI / 80.0) * 3.0).exp();
        assert!((w.matrix()[(3, 3)].norm() - expect).abs() < 1e-15);
        assert!(w.max_singular_value() <= 1.0 + 1e-15);
    }

    #[test]
    fn lossless_pipeline_flips_ideal_state() {
        let n = 30;
        let pipe = LossyPipeline::new(c(1.5), LossBudget::lossless(), false, n).unwrap();
        for d in [0.0, 0.02, 0.05] {
            // the round trip flips the cat: the ideal pipeline started from −α
            let ideal = crate::protocol::mean_x_ideal(-1.5, d);
            assert!((pipe.no_emission_mean_x(d).unwrap() - ideal).abs() < 1e-8, "{d}");
        }
    }

    #[test]
    fn projected_matches_closed_form() {
        for (xi, kt) in [(1.0, 0.05), (0.95, 0.0), (0.9, 0.05)] {
            let b = LossBudget::new(xi, kt).unwrap();
            let pipe = LossyPipeline::new(c(1.5), b, false, 24).unwrap();
            for d in [0.0, 0.02, 0.05] {
                let got = pipe.no_emission_mean_x(d).unwrap();
                let want = mean_x_lossy(1.5, d, &b);
                assert!((got - want).abs() < 2e-2, "ξ={xi} κτ={kt} δ′={d}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn unconditional_is_decohered() {
        let b = LossBudget::new(0.9, 0.0).unwrap();
        let pipe = LossyPipeline::new(c(1.5), b, false, 24).unwrap();
        let proj = pipe.no_emission_mean_x(0.0).unwrap();
        let unc = pipe.unconditional_mean_x(0.0).unwrap();
        assert!((proj + 1.35).abs() < 1e-6);
        assert!(unc.abs() < 0.8 * proj.abs());
        let none = LossyPipeline::new(c(1.5), LossBudget::lossless(), false, 24).unwrap();
        assert!((none.unconditional_mean_x(0.03).unwrap() - none.no_emission_mean_x(0.03).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn peaks_contract() {
        let b = LossBudget::new(0.9, 0.05).unwrap();
        let alpha = 1.5;
        let peak = b.peak(alpha);
        let plain = LossyPipeline::new(c(alpha), b, false, 24).unwrap();
        let (neg, _) = plain.no_emission_quadrature(0.0).unwrap().peak_positions();
        assert!((-neg / peak - 1.0).abs() < 0.02, "{neg} vs {peak}");
        // the offset kick moves both lobes together; their separation stays 2ξη²α
        let pipe = LossyPipeline::new(c(alpha), b, true, 24).unwrap();
        let (neg, pos) = pipe.no_emission_quadrature(0.0).unwrap().peak_positions();
        let half = 0.5 * (pos - neg);
        assert!((half / peak - 1.0).abs() < 0.02, "{half} vs {peak}");
    }

    #[test]
    fn offset_balances_coin() {
        for (xi, kt) in [(1.0, 0.0), (0.9, 0.1)] {
            let b = LossBudget::new(xi, kt).unwrap();
            let pipe = LossyPipeline::new(c(2.0), b, true, 32).unwrap();
            let p = pipe.outcome_probability(0.0).unwrap();
            assert!((p - 0.5).abs() < 5e-3, "ξ={xi} κτ={kt}: {p}");
        }
        assert!((balanced_offset(2.0, &LossBudget::lossless()) - PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn single_emission_completeness() {
        // photon counting over one stage of duration t is binomial with p = 1 − e^{−κt}
        let (alpha, dim) = (1.5, 24);
        let lp = LossParams::new(rates(1.0, 40.0)).unwrap();
        let theta = PI / 2.0;
        let t = theta / lp.rates().lambda_kerr;
        let p = 1.0 - (-t).exp();
        let psi = coherent_state(c(alpha), dim).unwrap();
        let (mut p0, mut p1) = (0.0, 0.0);
        for (n, amp) in psi.amplitudes().iter().enumerate() {
            let w = amp.norm_sqr();
            p0 += w * (1.0 - p).powi(n as i32);
            p1 += w * n as f64 * p * (1.0 - p).powi(n as i32 - 1);
        }
        let no_emit = lossy_kerr_propagator(theta, &lp, dim).apply(&psi).norm_sqr();
        let single = integrate(
            |s| single_emission_state(s, theta, c(alpha), &lp, dim).unwrap().weight,
            0.0,
            t,
            8,
            1e-12,
        )
        .unwrap();
        assert!((no_emit - p0).abs() < 1e-12);
        assert!((single - p1).abs() < 1e-9, "{single} vs {p1}");
        assert!(lp.kappa_tau() * alpha * alpha <= 0.1);
        assert!((no_emit + single - 1.0).abs() < 0.01);
    }

    #[test]
    fn emission_time_bounds() {
        let lp = LossParams::new(rates(1.0, 30.0)).unwrap();
        assert!(single_emission_state(-1e-3, PI / 2.0, c(1.0), &lp, 20).is_err());
        let pipe = LossyPipeline::new(c(1.0), LossBudget::new(0.95, 0.05).unwrap(), true, 20).unwrap();
        assert!(pipe.emission_state(0.0, EmissionStage::Readout, 1.5).is_err());
    }
}
