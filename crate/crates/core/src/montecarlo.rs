//! Shot-level simulation: kick sampling, coin outcomes, aggregation, sweeps.
//!
//! Every shot draws from its own ChaCha stream selected by the shot index,
//! so results do not depend on how rayon schedules the work.

use std::fmt;
use std::str::FromStr;

use log::warn;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::fock::{
    coherent_state, kerr_unitary, quadrature_distribution, standard_truncation, FockOperator, FockVector,
    PositionEigenbasis, DEFAULT_GRID_SIZE, DEFAULT_TAIL_TOLERANCE,
};
use crate::loss::{
    balanced_offset, emission_probability, mean_x_lossy, mean_x_lossy_linearized, momentum_kick_stats, KickStats, LossBudget,
    LossParams, LossRates, LossyPipeline, MAX_MODE_DIM,
};
use crate::protocol::{coin_signal, mean_x_ideal, mean_x_linearized, ProtocolParams, CAT_PHASE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Analytic,
    BruteForce,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "brute-force" => Ok(Self::BruteForce),
            other => Err(invalid("engine", format!("expected analytic or brute-force, got `{other}`"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::BruteForce => "brute-force",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceShape {
    /// `cos(ωt + φ)` at the mechanical frequency.
    ResonantCosine,
    Constant,
    /// Uniform samples over the swap window, linearly interpolated.
    Samples(Vec<f64>),
}

/// Scaled force `f(t)` in 1/s applied during the swap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceSpec {
    pub amplitude: f64,
    pub phase: f64,
    pub shape: ForceShape,
}

impl ForceSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(invalid("force", "amplitude and phase must be finite"));
        }
        if let ForceShape::Samples(s) = &self.shape {
            if s.len() < 2 || s.iter().any(|v| !v.is_finite()) {
                return Err(invalid("force", "custom samples need at least two finite values"));
            }
        }
        Ok(())
    }

    pub fn value(&self, t: f64, omega_m: f64, window: f64) -> f64 {
        let a = self.amplitude;
        match &self.shape {
            ForceShape::ResonantCosine => a * (omega_m * t + self.phase).cos(),
            ForceShape::Constant => a,
            ForceShape::Samples(s) => {
                let pos = (t / window).clamp(0.0, 1.0) * (s.len() - 1) as f64;
                let k = (pos.floor() as usize).min(s.len() - 2);
                let frac = pos - k as f64;
                a * (s[k] * (1.0 - frac) + s[k + 1] * frac)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: ProtocolParams,
    /// `None` runs the lossless protocol with the kick `protocol.delta`.
    pub loss: Option<LossParams>,
    pub force: Option<ForceSpec>,
    pub shots: u64,
    pub seed: u64,
    pub engine: Engine,
    pub grid_size: usize,
}

impl ExperimentConfig {
    pub fn ideal(protocol: ProtocolParams, shots: u64, seed: u64) -> Self {
        Self { protocol, loss: None, force: None, shots, seed, engine: Engine::Analytic, grid_size: DEFAULT_GRID_SIZE }
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        if self.shots == 0 {
            return Err(invalid("shots", "need at least one shot"));
        }
        if let Some(f) = &self.force {
            f.validate()?;
            if self.loss.is_none() {
                return Err(invalid("force", "a force needs the transfer model; add a loss section"));
            }
        }
        if self.protocol.alpha() <= 0.0 {
            return Err(invalid("alpha0", "coin estimation needs Re[α₀] > 0"));
        }
        Ok(())
    }

    /// Statistics of the kick seen by the cat: `δ` plus the filtered force
    /// and thermal noise when the transfer is modelled.
    pub fn kick_stats(&self) -> Result<KickStats> {
        let base = self.protocol.delta;
        let Some(lp) = &self.loss else {
            return Ok(KickStats::deterministic(base));
        };
        let omega = lp.rates().omega_m;
        let window = lp.t_swap();
        let stats = match &self.force {
            Some(f) => momentum_kick_stats(|t| f.value(t, omega, window), lp)?,
            None => momentum_kick_stats(|_| 0.0, lp)?,
        };
        Ok(KickStats { mean: stats.mean + base, variance: stats.variance })
    }

    pub fn emission_probability(&self) -> f64 {
        self.loss.as_ref().map_or(0.0, |lp| emission_probability(self.protocol.alpha(), lp))
    }

    /// Hex SHA-256 of the canonical JSON form of every parameter.
    pub fn params_digest(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            protocol: &'a ProtocolParams,
            loss: Option<&'a LossRates>,
            force: &'a Option<ForceSpec>,
            shots: u64,
            seed: u64,
            engine: Engine,
            grid_size: usize,
        }
        let view = View {
            protocol: &self.protocol,
            loss: self.loss.as_ref().map(|lp| lp.rates()),
            force: &self.force,
            shots: self.shots,
            seed: self.seed,
            engine: self.engine,
            grid_size: self.grid_size,
        };
        let json = serde_json::to_vec(&view).expect("parameters serialize");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Per-shot generator: stream `index` of the master seed.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for sweep cell `cell`, independent of the shot streams.
pub fn derive_seed(seed: u64, cell: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(cell);
    rng.random()
}

/// Gaussian `δ′` draw; returns the mean exactly when the variance is zero.
pub fn sample_kick<R: Rng + ?Sized>(rng: &mut R, stats: &KickStats) -> f64 {
    if stats.variance <= 0.0 {
        return stats.mean;
    }
    Normal::new(stats.mean, stats.variance.sqrt()).expect("finite variance").sample(rng)
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !(-0.05..=1.05).contains(&p) || p.is_nan() {
        return Err(Error::ModelBreakdown { p });
    }
    if !(0.0..=1.0).contains(&p) {
        warn!("outcome probability {p:.4} clamped to [0, 1]");
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Prepared map `δ′ → Prob(X > 0)`.
#[derive(Clone, Debug)]
pub enum OutcomeModel {
    Analytic {
        alpha: f64,
        offset: bool,
        budget: Option<LossBudget>,
    },
    IdealBruteForce {
        basis: PositionEigenbasis,
        cat: FockVector,
        readout: FockOperator,
        offset: f64,
        grid_size: usize,
    },
    LossyBruteForce(Box<LossyPipeline>),
}

impl OutcomeModel {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let p = &config.protocol;
        let alpha = p.alpha();
        match (config.engine, &config.loss) {
            (Engine::Analytic, loss) => {
                Ok(Self::Analytic { alpha, offset: p.apply_offset, budget: loss.as_ref().map(|lp| lp.budget()) })
            }
            (Engine::BruteForce, None) => {
                let dim = p.truncation();
                let kerr = kerr_unitary(CAT_PHASE, dim);
                let cat = kerr.apply(&coherent_state(p.alpha0, dim)?);
                Ok(Self::IdealBruteForce {
                    basis: PositionEigenbasis::new(dim)?,
                    cat,
                    readout: kerr.adjoint(),
                    offset: p.offset(),
                    grid_size: config.grid_size,
                })
            }
            (Engine::BruteForce, Some(lp)) => {
                let budget = lp.budget();
                let dim = p.truncation.unwrap_or_else(|| {
                    let reach = p.alpha0.norm() + balanced_offset(alpha, &budget);
                    standard_truncation(reach).min(MAX_MODE_DIM)
                });
                let pipe = LossyPipeline::new(p.alpha0, budget, p.apply_offset, dim)?.with_grid_size(config.grid_size);
                Ok(Self::LossyBruteForce(Box::new(pipe)))
            }
        }
    }

    /// Unclamped two-peak estimate for the analytic engine.
    fn analytic_raw(alpha: f64, offset: bool, budget: Option<&LossBudget>, delta: f64) -> f64 {
        match (budget, offset) {
            (None, true) => 0.5 - mean_x_linearized(alpha, delta) / (2.0 * alpha),
            (None, false) => 0.5 + mean_x_ideal(alpha, delta) / (2.0 * alpha),
            (Some(b), true) => 0.5 - mean_x_lossy_linearized(alpha, delta, b) / (2.0 * b.peak(alpha)),
            (Some(b), false) => 0.5 + mean_x_lossy(alpha, delta, b) / (2.0 * b.peak(alpha)),
        }
    }

    pub fn probability(&self, delta: f64) -> Result<f64> {
        match self {
            Self::Analytic { alpha, offset, budget } => {
                clamp_probability(Self::analytic_raw(*alpha, *offset, budget.as_ref(), delta))
            }
            Self::IdealBruteForce { basis, cat, readout, offset, grid_size } => {
                let kicked = basis.kick(delta + offset, cat);
                kicked.check_tail(DEFAULT_TAIL_TOLERANCE)?;
                let out = readout.apply(&kicked).normalized()?;
                clamp_probability(quadrature_distribution(&out, *grid_size)?.prob_x_positive)
            }
            Self::LossyBruteForce(pipe) => clamp_probability(pipe.outcome_probability(delta)?),
        }
    }
}

/// `Prob(X > 0)` for a given kick under the configured engine.
pub fn outcome_probability(delta_prime: f64, config: &ExperimentConfig) -> Result<f64> {
    OutcomeModel::new(config)?.probability(delta_prime)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalEstimate {
    pub m_counts: u64,
    pub shots: u64,
    pub s: f64,
    pub sigma_s: f64,
    pub seed: u64,
    pub params_digest: String,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<SignalEstimate> {
    config.validate()?;
    let model = OutcomeModel::new(config)?;
    let stats = config.kick_stats()?;
    let p_emit = config.emission_probability();
    let fixed = if stats.variance <= 0.0 { Some(model.probability(stats.mean)?) } else { None };
    let seed = config.seed;
    let m_counts = (0..config.shots)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = shot_rng(seed, i);
            let delta = sample_kick(&mut rng, &stats);
            let emitted = rng.random::<f64>() < p_emit;
            let coin: f64 = rng.random();
            let p1 = if emitted {
                0.5
            } else {
                match fixed {
                    Some(p) => p,
                    None => model.probability(delta)?,
                }
            };
            Ok(u64::from(coin < p1))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let coin = coin_signal(m_counts, config.shots)?;
    Ok(SignalEstimate {
        m_counts,
        shots: config.shots,
        s: coin.s,
        sigma_s: coin.sigma_s,
        seed,
        params_digest: config.params_digest(),
    })
}

/// Expected `S` under the analytic model at the mean kick.
pub fn analytic_signal(config: &ExperimentConfig) -> Result<f64> {
    config.validate()?;
    let stats = config.kick_stats()?;
    let p = &config.protocol;
    let budget = config.loss.as_ref().map(|lp| lp.budget());
    let raw = OutcomeModel::analytic_raw(p.alpha(), p.apply_offset, budget.as_ref(), stats.mean);
    Ok((1.0 - config.emission_probability()) * (raw - 0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    Delta,
    Kappa,
    Gamma,
    Temp,
    Shots,
    LambdaKerr,
    G,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 8] = [
        Self::Alpha,
        Self::Delta,
        Self::Kappa,
        Self::Gamma,
        Self::Temp,
        Self::Shots,
        Self::LambdaKerr,
        Self::G,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::Delta => "delta",
            Self::Kappa => "kappa",
            Self::Gamma => "gamma",
            Self::Temp => "temp",
            Self::Shots => "shots",
            Self::LambdaKerr => "lambda_kerr",
            Self::G => "g",
        }
    }

    /// Copy of `base` with this parameter set to `value` (rates in rad/s).
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        if !value.is_finite() {
            return Err(invalid("value", format!("sweep value must be finite, got {value}")));
        }
        let mut cfg = base.clone();
        let rate = |field: fn(&mut LossRates) -> &mut f64| -> Result<Option<LossParams>> {
            let lp = base
                .loss
                .as_ref()
                .ok_or_else(|| Error::InvalidAxis(format!("{} needs a loss section", self.name())))?;
            let mut rates = *lp.rates();
            *field(&mut rates) = value;
            Ok(Some(LossParams::new(rates)?))
        };
        match self {
            Self::Alpha => cfg.protocol.alpha0 = Complex64::new(value, base.protocol.alpha0.im),
            Self::Delta => cfg.protocol.delta = value,
            Self::Shots => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(invalid("shots", format!("must be a positive integer, got {value}")));
                }
                cfg.shots = value as u64;
            }
            Self::Kappa => cfg.loss = rate(|r| &mut r.kappa)?,
            Self::Gamma => cfg.loss = rate(|r| &mut r.gamma)?,
            Self::Temp => cfg.loss = rate(|r| &mut r.temp)?,
            Self::LambdaKerr => cfg.loss = rate(|r| &mut r.lambda_kerr)?,
            Self::G => cfg.loss = rate(|r| &mut r.g)?,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| Error::InvalidAxis(s.to_string()))
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub estimate: SignalEstimate,
    pub analytic_s: f64,
    pub p_emission: f64,
}

/// One experiment per value; cell `k` runs with `derive_seed(base.seed, k)`.
pub fn sweep(axis: SweepAxis, values: &[f64], base: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(invalid("values", "sweep needs at least one value"));
    }
    let cells = values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut cfg = axis.apply(base, v)?;
            cfg.seed = derive_seed(base.seed, k as u64);
            Ok((v, cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    cells
        .into_par_iter()
        .map(|(value, cfg)| {
            Ok(SweepRow {
                value,
                estimate: run_experiment(&cfg)?,
                analytic_s: analytic_signal(&cfg)?,
                p_emission: cfg.emission_probability(),
            })
        })
        .collect()
}
