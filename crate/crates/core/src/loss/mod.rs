//! Lossy and thermal model of the transfer through the mechanical mode.
//!
//! Rates are angular (rad/s) throughout. The dimensionless bookkeeping used
//! by the Fock-space pipelines lives in [`LossBudget`]:
//!
//! * `ξ = e^{−ΓT}` survives the swap into the mechanics and back,
//! * `η = e^{−κτ/2}` survives one Kerr stage of duration `τ = π/(2λ)`.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::protocol::HBAR;
use crate::quadrature::integrate;

pub mod channel;
pub mod trajectory;

pub use channel::{beam_splitter, loss_channel, TwoModeOperator, TwoModeState, MAX_MODE_DIM};
pub use trajectory::{
    balanced_offset, lossy_kerr, lossy_kerr_propagator, single_emission_state, EmissionStage, EmissionTrajectory, LossyPipeline,
};

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Physical inputs, all rates in rad/s and temperature in kelvin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRates {
    pub kappa: f64,
    pub gamma: f64,
    pub g: f64,
    pub omega_m: f64,
    pub lambda_kerr: f64,
    pub temp: f64,
}

impl LossRates {
    /// Reference rates of a current electromechanical device, with the
    /// temperature chosen to give a thermal occupation of 50 at 10 MHz.
    pub fn reference() -> Self {
        let two_pi = 2.0 * PI;
        let omega_m = two_pi * 10e6;
        Self {
            kappa: two_pi * 100e3,
            gamma: two_pi * 10.0,
            g: two_pi * 500e3,
            omega_m,
            lambda_kerr: two_pi * 7e6,
            temp: temperature_for_occupation(omega_m, 50.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapParameters {
    /// `ν = √(g² − (κ+γ)²/16)`.
    pub nu: f64,
    /// `T = π/ν`.
    pub t_swap: f64,
    /// `Γ = (κ+γ)/4`.
    pub decay: f64,
    /// `ξ = e^{−ΓT}`.
    pub xi: f64,
}

pub fn swap_parameters(kappa: f64, gamma: f64, g: f64) -> Result<SwapParameters> {
    if !(kappa >= 0.0 && gamma >= 0.0) {
        return Err(invalid("kappa/gamma", "loss rates must be non-negative"));
    }
    let decay = (kappa + gamma) / 4.0;
    if !(g > decay) {
        return Err(Error::OverdampedTransfer { g, threshold: decay });
    }
    let nu = (g * g - decay * decay).sqrt();
    let t_swap = PI / nu;
    Ok(SwapParameters { nu, t_swap, decay, xi: (-decay * t_swap).exp() })
}

/// Bose–Einstein occupation `1/(e^{ħω/kT} − 1)`.
pub fn thermal_occupation(omega_m: f64, temp: f64) -> f64 {
    if temp <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega_m / (BOLTZMANN * temp)).exp_m1()
}

/// Temperature at which [`thermal_occupation`] equals `n_bar`.
pub fn temperature_for_occupation(omega_m: f64, n_bar: f64) -> f64 {
    if n_bar <= 0.0 {
        return 0.0;
    }
    HBAR * omega_m / (BOLTZMANN * (1.0 / n_bar).ln_1p())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParams {
    rates: LossRates,
    swap: SwapParameters,
    tau_kerr: f64,
    n_bar: f64,
}

impl LossParams {
    pub fn new(rates: LossRates) -> Result<Self> {
        for (name, v) in [
            ("kappa", rates.kappa),
            ("gamma", rates.gamma),
            ("g", rates.g),
            ("omega_m", rates.omega_m),
            ("lambda_kerr", rates.lambda_kerr),
            ("temp", rates.temp),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        if rates.omega_m == 0.0 {
            return Err(invalid("omega_m", "mechanical frequency must be positive"));
        }
        if rates.lambda_kerr == 0.0 {
            return Err(invalid("lambda_kerr", "Kerr rate must be positive"));
        }
        let swap = swap_parameters(rates.kappa, rates.gamma, rates.g)?;
        Ok(Self {
            rates,
            swap,
            tau_kerr: PI / (2.0 * rates.lambda_kerr),
            n_bar: thermal_occupation(rates.omega_m, rates.temp),
        })
    }

    pub fn rates(&self) -> &LossRates {
        &self.rates
    }

    pub fn swap(&self) -> &SwapParameters {
        &self.swap
    }

    pub fn nu(&self) -> f64 {
        self.swap.nu
    }

    pub fn t_swap(&self) -> f64 {
        self.swap.t_swap
    }

    /// `Γ = (κ+γ)/4`.
    pub fn decay(&self) -> f64 {
        self.swap.decay
    }

    pub fn xi(&self) -> f64 {
        self.swap.xi
    }

    /// Duration of one Kerr stage, `π/(2λ)`.
    pub fn tau_kerr(&self) -> f64 {
        self.tau_kerr
    }

    /// `κτ` for one Kerr stage.
    pub fn kappa_tau(&self) -> f64 {
        self.rates.kappa * self.tau_kerr
    }

    pub fn eta(&self) -> f64 {
        self.budget().eta()
    }

    pub fn n_bar(&self) -> f64 {
        self.n_bar
    }

    pub fn budget(&self) -> LossBudget {
        LossBudget { xi: self.swap.xi, kappa_tau: self.kappa_tau() }
    }
}

/// Dimensionless loss factors consumed by the Fock-space pipelines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBudget {
    pub xi: f64,
    pub kappa_tau: f64,
}

impl LossBudget {
    pub fn new(xi: f64, kappa_tau: f64) -> Result<Self> {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(invalid("xi", format!("must lie in (0, 1], got {xi}")));
        }
        if !(kappa_tau >= 0.0 && kappa_tau.is_finite()) {
            return Err(invalid("kappa_tau", format!("must be non-negative, got {kappa_tau}")));
        }
        Ok(Self { xi, kappa_tau })
    }

    pub fn lossless() -> Self {
        Self { xi: 1.0, kappa_tau: 0.0 }
    }

    /// `η = e^{−κτ/2}`.
    pub fn eta(&self) -> f64 {
        (-0.5 * self.kappa_tau).exp()
    }

    /// Homodyne peak position `ξη²α`.
    pub fn peak(&self, alpha: f64) -> f64 {
        self.xi * self.eta().powi(2) * alpha
    }

    /// `P ≈ 2κτα²` over the two Kerr stages.
    pub fn emission_probability(&self, alpha: f64) -> f64 {
        2.0 * self.kappa_tau * alpha * alpha
    }
}

/// Mean and variance of the dimensionless kick `δ′`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KickStats {
    pub mean: f64,
    pub variance: f64,
}

impl KickStats {
    pub fn deterministic(mean: f64) -> Self {
        Self { mean, variance: 0.0 }
    }
}

fn oscillation_panels(lp: &LossParams) -> usize {
    let cycles = (lp.rates.omega_m.max(lp.nu()) * lp.t_swap() / (2.0 * PI)).ceil() as usize;
    (8 * cycles).max(64)
}

/// `∫₀^T sin²(νs) cos²(ωs) ds`.
pub fn envelope_power(lp: &LossParams) -> Result<f64> {
    let (nu, omega, t) = (lp.nu(), lp.rates.omega_m, lp.t_swap());
    integrate(
        |s| ((nu * s).sin() * (omega * s).cos()).powi(2),
        0.0,
        t,
        oscillation_panels(lp),
        1e-12 * t,
    )
}

/// Kick statistics for a scaled force `f(s)` (1/s) acting during the swap.
///
/// The mean is `∫₀^T sin(νs) cos(ωs) f(s) ds`. The thermal part is white
/// noise of strength `γ(2n̄+1)` filtered by the same envelope.
pub fn momentum_kick_stats<F>(force: F, lp: &LossParams) -> Result<KickStats>
where
    F: Fn(f64) -> f64,
{
    let (nu, omega, t) = (lp.nu(), lp.rates.omega_m, lp.t_swap());
    let mean = integrate(
        |s| (nu * s).sin() * (omega * s).cos() * force(s),
        0.0,
        t,
        oscillation_panels(lp),
        1e-13,
    )?;
    let variance = lp.rates.gamma * (2.0 * lp.n_bar + 1.0) * envelope_power(lp)?;
    Ok(KickStats { mean, variance })
}

/// Low-loss mean quadrature of the no-emission trajectory,
/// `ηe^{−ηδ′²}[−ξηα cos(4η²αδ′) + δ′ sin(4η²αδ′)]`.
///
/// At `ξ = η = 1` this is exactly minus the lossless closed form (the swap
/// round trip flips the amplitude), with the `e^{−2α²}` part dropped.
pub fn mean_x_lossy(alpha: f64, delta_prime: f64, budget: &LossBudget) -> f64 {
    check_low_loss(budget);
    let eta = budget.eta();
    let phase = 4.0 * eta * eta * alpha * delta_prime;
    eta * (-eta * delta_prime * delta_prime).exp()
        * (-budget.xi * eta * alpha * phase.cos() + delta_prime * phase.sin())
}

/// Linearized response at the 90° offset, `−ξη²α(4η²αδ′) − ηδ′`.
pub fn mean_x_lossy_linearized(alpha: f64, delta_prime: f64, budget: &LossBudget) -> f64 {
    check_low_loss(budget);
    let eta = budget.eta();
    -budget.xi * eta * eta * alpha * (4.0 * eta * eta * alpha * delta_prime) - eta * delta_prime
}

fn check_low_loss(budget: &LossBudget) {
    if budget.kappa_tau > 0.3 {
        warn!("low-loss formulas used at κτ = {:.3}", budget.kappa_tau);
    }
}

/// `P = πκα²/λ`.
pub fn emission_probability(alpha: f64, lp: &LossParams) -> f64 {
    let p = PI * lp.rates.kappa * alpha * alpha / lp.rates.lambda_kerr;
    if p > 0.5 {
        warn!("emission probability {p:.3} is outside the single-emission regime");
    }
    p
}

/// `S = 2α′[1 + ηe^{ΓT}/(2α′)²](1 − P)δ′` with `α′ = η²α`.
pub fn full_signal(alpha: f64, delta_prime: f64, budget: &LossBudget, p_emission: f64) -> f64 {
    check_low_loss(budget);
    let eta = budget.eta();
    let alpha_p = eta * eta * alpha;
    2.0 * alpha_p * (1.0 + eta / budget.xi / (4.0 * alpha_p * alpha_p)) * (1.0 - p_emission) * delta_prime
}
