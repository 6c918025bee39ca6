//! Subcommand bodies. Each returns a table and whether every check passed.

use std::f64::consts::PI;

use kerrcat::fock::{coherent_state, kerr_unitary, standard_truncation};
use kerrcat::loss::{emission_probability, mean_x_lossy, LossyPipeline, MAX_MODE_DIM};
use kerrcat::montecarlo::{analytic_signal, run_experiment, sweep, OutcomeModel};
use kerrcat::protocol::{cat_state, mean_x_ideal, run_ideal, superposition_phase, CAT_PHASE};
use kerrcat::{Complex64, Engine, ExperimentConfig, LossParams, LossRates, ProtocolParams, SweepAxis};

use crate::scenario::ScenarioFile;
use crate::table::{Cell, ResultTable};
use crate::CliError;

/// Flag values that override the scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub engine: Option<Engine>,
    pub tolerance: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &ScenarioFile) -> ScenarioFile {
        let mut s = scenario.clone();
        if let Some(seed) = self.seed {
            s.run.seed = seed;
        }
        if let Some(shots) = self.shots {
            s.run.shots = shots;
        }
        if let Some(engine) = self.engine {
            s.run.engine = engine;
        }
        s
    }
}

pub struct Outcome {
    pub table: ResultTable,
    pub passed: bool,
}

const EQ3_DELTAS: [f64; 4] = [0.0, 0.01, 0.05, 0.1];
const PHASE_DELTAS: [f64; 3] = [0.01, 0.05, 0.1];
const LOSSY_DELTAS: [f64; 3] = [0.0, 0.02, 0.05];
const LOSSY_MODE_DIM: usize = 24;

struct Checks {
    table: ResultTable,
    override_tol: Option<f64>,
    passed: bool,
}

impl Checks {
    fn new(override_tol: Option<f64>) -> Self {
        Self {
            table: ResultTable::new(["check", "analytic", "numeric", "abs_diff", "tolerance", "pass"]),
            override_tol,
            passed: true,
        }
    }

    fn row(&mut self, name: String, analytic: f64, numeric: f64, tol: f64) {
        let tol = self.override_tol.unwrap_or(tol);
        let diff = (analytic - numeric).abs();
        let ok = diff <= tol;
        self.passed &= ok;
        self.table.push(vec![name.into(), analytic.into(), numeric.into(), diff.into(), tol.into(), ok.into()]);
    }
}

/// Analytic-vs-Fock-space suites for the scenario's amplitude and losses.
pub fn validate(scenario: &ScenarioFile, overrides: &Overrides) -> Result<Outcome, CliError> {
    let scenario = overrides.apply(scenario);
    let cfg = scenario.to_config()?;
    let alpha = cfg.protocol.alpha();
    let alpha0 = Complex64::new(alpha, 0.0);
    let mut checks = Checks::new(overrides.tolerance);

    for delta in EQ3_DELTAS {
        let p = ProtocolParams::new(alpha0, delta, false)?;
        checks.row(format!("ideal_mean_x_delta_{delta}"), mean_x_ideal(alpha, delta), run_ideal(&p)?.mean_x(), 1e-6);
    }

    let dim = standard_truncation(alpha);
    let kerr_cat = kerr_unitary(CAT_PHASE, dim).apply(&coherent_state(alpha0, dim)?);
    checks.row("cat_fidelity".into(), 1.0, cat_state(alpha0, dim)?.fidelity(&kerr_cat), 1e-8);

    for delta in PHASE_DELTAS {
        let got = superposition_phase(alpha0, delta, standard_truncation(alpha + delta))?;
        checks.row(format!("phase_law_delta_{delta}"), 2.0 * delta * alpha, got, 1e-6);
    }

    let analytic_cfg = ExperimentConfig { engine: Engine::Analytic, ..cfg.clone() };
    let brute_cfg = ExperimentConfig { engine: Engine::BruteForce, ..cfg.clone() };
    let kick = cfg.kick_stats()?.mean;
    checks.row(
        format!("coin_engines_delta_{kick}"),
        OutcomeModel::new(&analytic_cfg)?.probability(kick)?,
        OutcomeModel::new(&brute_cfg)?.probability(kick)?,
        1e-2,
    );

    if let Some(lp) = &cfg.loss {
        let budget = lp.budget();
        let dim = standard_truncation(alpha).min(LOSSY_MODE_DIM).min(MAX_MODE_DIM);
        let pipe = LossyPipeline::new(alpha0, budget, false, dim)?;
        for d in LOSSY_DELTAS {
            checks.row(
                format!("lossy_mean_x_delta_{d}"),
                mean_x_lossy(alpha, d, &budget),
                pipe.no_emission_mean_x(d)?,
                2e-2,
            );
        }
        checks.row(
            "emission_probability".into(),
            emission_probability(alpha, lp),
            budget.emission_probability(alpha),
            1e-12,
        );
    }

    Ok(Outcome { passed: checks.passed, table: checks.table })
}

/// Axis values are read in scenario units: Hz for rates, K for `temp`.
pub fn axis_value_internal(axis: SweepAxis, value: f64) -> f64 {
    match axis {
        SweepAxis::Kappa | SweepAxis::Gamma | SweepAxis::G | SweepAxis::LambdaKerr => 2.0 * PI * value,
        _ => value,
    }
}

pub const SWEEP_COLUMNS: [&str; 8] =
    ["axis_value", "m_counts", "M", "S", "sigma_S", "S_analytic", "P_emission", "seed"];

pub fn sweep_table(
    scenario: &ScenarioFile,
    axis: SweepAxis,
    values: &[f64],
    overrides: &Overrides,
) -> Result<Outcome, CliError> {
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    let cfg = overrides.apply(scenario).to_config()?;
    let internal: Vec<f64> = values.iter().map(|&v| axis_value_internal(axis, v)).collect();
    let rows = sweep(axis, &internal, &cfg)?;
    let mut table = ResultTable::new(SWEEP_COLUMNS);
    for (shown, row) in values.iter().zip(rows) {
        let e = row.estimate;
        table.push(vec![
            Cell::Float(*shown),
            e.m_counts.into(),
            e.shots.into(),
            e.s.into(),
            e.sigma_s.into(),
            row.analytic_s.into(),
            row.p_emission.into(),
            e.seed.into(),
        ]);
    }
    Ok(Outcome { table, passed: true })
}

pub fn shots_table(scenario: &ScenarioFile, overrides: &Overrides) -> Result<Outcome, CliError> {
    let cfg = overrides.apply(scenario).to_config()?;
    let e = run_experiment(&cfg)?;
    let mut table =
        ResultTable::new(["m_counts", "M", "S", "sigma_S", "S_analytic", "P_emission", "seed", "params_digest"]);
    table.push(vec![
        e.m_counts.into(),
        e.shots.into(),
        e.s.into(),
        e.sigma_s.into(),
        analytic_signal(&cfg)?.into(),
        cfg.emission_probability().into(),
        e.seed.into(),
        e.params_digest.into(),
    ]);
    Ok(Outcome { table, passed: true })
}

/// Reference device parameters and the quantities derived from them.
pub fn params_table() -> Result<Outcome, CliError> {
    let rates = LossRates::reference();
    let lp = LossParams::new(rates)?;
    let hz = |w: f64| w / (2.0 * PI);
    let mut table = ResultTable::new(["quantity", "value", "unit"]);
    let mut add = |name: &str, value: f64, unit: &str| table.push(vec![name.into(), value.into(), unit.into()]);
    add("omega_m_over_2pi", hz(rates.omega_m), "Hz");
    add("gamma_over_2pi", hz(rates.gamma), "Hz");
    add("kappa_over_2pi", hz(rates.kappa), "Hz");
    add("g_over_2pi", hz(rates.g), "Hz");
    add("lambda_kerr_over_2pi", hz(rates.lambda_kerr), "Hz");
    add("n_bar", lp.n_bar(), "1");
    add("temp", rates.temp, "K");
    add("nu", lp.nu(), "rad/s");
    add("t_swap", lp.t_swap(), "s");
    add("decay_rate", lp.decay(), "1/s");
    add("decay_times_t_swap", lp.decay() * lp.t_swap(), "1");
    add("gamma_times_t_swap", rates.gamma * lp.t_swap(), "1");
    add("kappa_times_t_swap", rates.kappa * lp.t_swap(), "1");
    add("tau_kerr", lp.tau_kerr(), "s");
    add("gamma_times_tau_kerr", rates.gamma * lp.tau_kerr(), "1");
    add("kappa_times_tau_kerr", lp.kappa_tau(), "1");
    add("eta", lp.eta(), "1");
    add("xi", lp.xi(), "1");
    add("p_emission_alpha_1.5", emission_probability(1.5, &lp), "1");
    Ok(Outcome { table, passed: true })
}
