//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use kerrcat::fock::{coherent_state, kerr_unitary, quadrature_distribution, standard_truncation};
use kerrcat::loss::{
    emission_probability, mean_x_lossy, momentum_kick_stats, EmissionStage, LossBudget, LossyPipeline,
};
use kerrcat::montecarlo::{derive_seed, run_experiment, shot_rng, sweep};
use kerrcat::protocol::{cat_state, mean_x_ideal, run_ideal, superposition_phase, CAT_PHASE};
use kerrcat::{Complex64, ExperimentConfig, LossParams, LossRates, ProtocolParams, SweepAxis};
use kerrcat_cli::commands::params_table;
use kerrcat_cli::table::{Cell, ResultTable};
use rand::Rng;

type Check = Result<(bool, String), String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ideal_config(alpha: f64, delta: f64, shots: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::ideal(ProtocolParams::new(c(alpha), delta, true).unwrap(), shots, seed)
}

/// Weighted least-squares slope and its standard error.
fn fit_slope(x: &[f64], y: &[f64], sigma: &[f64]) -> (f64, f64) {
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(x, w)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(&w).map(|((x, y), w)| w * (x - xm) * (y - ym)).sum();
    (sxy / sxx, (1.0 / sxx).sqrt())
}

fn row_value(table: &ResultTable, name: &str) -> f64 {
    let row = table
        .rows()
        .iter()
        .find(|r| r[0] == Cell::Text(name.into()))
        .unwrap_or_else(|| panic!("params row {name}"));
    match row[1] {
        Cell::Float(v) => v,
        ref other => panic!("{name}: {other:?}"),
    }
}

fn ideal_mean_x_equivalence() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        for delta in [0.0, 0.01, 0.05, 0.1] {
            let p = ProtocolParams::new(c(alpha), delta, false).map_err(|e| e.to_string())?;
            let got = run_ideal(&p).map_err(|e| e.to_string())?.mean_x();
            worst = worst.max((got - mean_x_ideal(alpha, delta)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst < 1e-6 && secs < 10.0, format!("max |diff| = {worst:.2e} (< 1e-6), {secs:.2} s (< 10 s)")))
}

fn cat_fidelity() -> Check {
    let mut worst: f64 = 1.0;
    for alpha in [1.0, 2.0, 3.0] {
        let dim = standard_truncation(alpha);
        let evolved = kerr_unitary(CAT_PHASE, dim).apply(&coherent_state(c(alpha), dim).map_err(|e| e.to_string())?);
        worst = worst.min(cat_state(c(alpha), dim).map_err(|e| e.to_string())?.fidelity(&evolved));
    }
    Ok((worst > 1.0 - 1e-8, format!("min fidelity = 1 - {:.2e}", 1.0 - worst)))
}

fn phase_law() -> Check {
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        for delta in [0.0, 0.01, 0.05, 0.1] {
            let got = superposition_phase(c(alpha), delta, standard_truncation(alpha + delta))
                .map_err(|e| e.to_string())?;
            worst = worst.max((got - 2.0 * delta * alpha).abs());
        }
    }
    Ok((worst < 1e-6, format!("max |phase - 2 delta alpha| = {worst:.2e} (< 1e-6)")))
}

fn signal_slope() -> Check {
    let start = Instant::now();
    let deltas = [-0.01, -0.005, 0.0, 0.005, 0.01];
    let (mut s, mut sig) = (Vec::new(), Vec::new());
    for (k, &d) in deltas.iter().enumerate() {
        let est = run_experiment(&ideal_config(2.0, d, 100_000, derive_seed(4, k as u64))).map_err(|e| e.to_string())?;
        s.push(est.s);
        sig.push(est.sigma_s);
    }
    let (slope, se) = fit_slope(&deltas, &s, &sig);
    let secs = start.elapsed().as_secs_f64();
    let expect = 2.0 * 2.0 * (1.0 - 1.0 / 16.0);
    let ok = (slope.abs() - expect).abs() < 3.0 * se && secs < 60.0;
    Ok((ok, format!("|slope| = {:.4} +- {se:.4} vs {expect} (3 sigma), sign {}, {secs:.2} s", slope.abs(), slope.signum())))
}

fn enhancement_sweep() -> Check {
    let delta = 0.05;
    let alphas: Vec<f64> = (0..9).map(|k| 1.0 + 0.25 * k as f64).collect();
    let base = ideal_config(2.0, delta, 1_000_000, 5);
    let rows = sweep(SweepAxis::Alpha, &alphas, &base).map_err(|e| e.to_string())?;
    let y: Vec<f64> = rows.iter().map(|r| r.estimate.s.abs() / delta).collect();
    let sig: Vec<f64> = rows.iter().map(|r| r.estimate.sigma_s / delta).collect();
    let (slope, se) = fit_slope(&alphas, &y, &sig);
    let model: Vec<f64> = alphas.iter().map(|a| 2.0 * a - 0.5 / a).collect();
    let (model_slope, _) = fit_slope(&alphas, &model, &sig);
    Ok((
        (slope - 2.0).abs() <= 0.2,
        format!("slope of |S|/delta on alpha = {slope:.4} +- {se:.4} (2 +- 0.2; noiseless model {model_slope:.4})"),
    ))
}

fn emission_probability_reference() -> Check {
    let lp = LossParams::new(LossRates::reference()).map_err(|e| e.to_string())?;
    let ratio = lp.rates().lambda_kerr / lp.rates().kappa;
    let direct = emission_probability(1.5, &lp);
    let table = params_table().map_err(|e| e.to_string())?.table;
    let row = row_value(&table, "p_emission_alpha_1.5");
    let ok = (direct - 0.101).abs() <= 1e-3 && row == direct;
    Ok((ok, format!("lambda/kappa = {ratio}, P = {direct:.5} (0.101 +- 0.001), params row = {row:.5}")))
}

fn lossy_oracle() -> Check {
    let start = Instant::now();
    let mut worst: (f64, String) = (0.0, String::new());
    for alpha in [1.0, 1.5] {
        let dim = standard_truncation(alpha).min(24);
        for xi in [0.9, 0.95, 1.0] {
            for kt in [0.0, 0.0224, 0.05] {
                let budget = LossBudget::new(xi, kt).map_err(|e| e.to_string())?;
                let pipe = LossyPipeline::new(c(alpha), budget, false, dim).map_err(|e| e.to_string())?;
                for d in [-0.05, 0.0, 0.02, 0.05] {
                    let diff = (pipe.no_emission_mean_x(d).map_err(|e| e.to_string())? - mean_x_lossy(alpha, d, &budget)).abs();
                    if diff > worst.0 {
                        worst = (diff, format!("alpha={alpha} xi={xi} kt={kt} d'={d}"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst.0 < 2e-2 && secs < 120.0,
        format!("max |diff| = {:.3e} at {} (< 2e-2), N <= 24, {secs:.2} s (< 120 s)", worst.0, worst.1),
    ))
}

/// Force signal carried by single-emission trajectories. Each trajectory
/// picks a stage with probability proportional to its emission weight and a
/// uniform emission time, then yields one coin at `+d` and one at `-d`.
fn emission_dephasing() -> Check {
    let alpha = 1.5;
    let d = 0.05;
    let trajectories = 10_000u64;
    let budget = LossParams::new(LossRates::reference()).map_err(|e| e.to_string())?.budget();
    let pipe = LossyPipeline::new(c(alpha), budget, true, 24).map_err(|e| e.to_string())?;
    let grid = 2001;
    let p1 = |state: &kerrcat::FockVector| -> Result<f64, String> {
        Ok(quadrature_distribution(state, grid).map_err(|e| e.to_string())?.prob_x_positive)
    };

    let stage_weight = |stage| -> Result<f64, String> {
        let n = 64;
        let mut w = 0.0;
        for k in 0..n {
            w += pipe.emission_state(0.0, stage, (k as f64 + 0.5) / n as f64).map_err(|e| e.to_string())?.weight;
        }
        Ok(w / n as f64)
    };
    let (w_prep, w_read) = (stage_weight(EmissionStage::Preparation)?, stage_weight(EmissionStage::Readout)?);
    let prep_share = w_prep / (w_prep + w_read);

    let (mut plus, mut minus, mut raw) = (0u64, 0u64, 0.0);
    for i in 0..trajectories {
        let mut rng = shot_rng(808, i);
        let stage = if rng.random::<f64>() < prep_share { EmissionStage::Preparation } else { EmissionStage::Readout };
        let fraction: f64 = rng.random();
        let pp = p1(&pipe.emission_state(d, stage, fraction).map_err(|e| e.to_string())?.state)?;
        let pm = p1(&pipe.emission_state(-d, stage, fraction).map_err(|e| e.to_string())?.state)?;
        plus += u64::from(rng.random::<f64>() < pp);
        minus += u64::from(rng.random::<f64>() < pm);
        raw += 0.5 * (pp + pm) - 0.5;
    }
    let n = trajectories as f64;
    let signal = 0.5 * (plus as f64 - minus as f64) / n;
    let sigma = (1.0 / (8.0 * n)).sqrt();
    let clean = 0.5 * (pipe.outcome_probability(d).map_err(|e| e.to_string())? - pipe.outcome_probability(-d).map_err(|e| e.to_string())?);
    Ok((
        signal.abs() < 3.0 * sigma,
        format!(
            "force signal with one emission = {signal:.4} (3 sigma = {:.4}); without emission {clean:.4}; \
             force-independent bias {:.4}; preparation share {prep_share:.3}",
            3.0 * sigma,
            raw / n
        ),
    ))
}

fn statistical_contract() -> Check {
    let reps = 200u64;
    let shots = 10_000;
    let mut s = Vec::new();
    for k in 0..reps {
        s.push(run_experiment(&ideal_config(2.0, 0.0, shots, derive_seed(9, k))).map_err(|e| e.to_string())?.s);
    }
    let mean = s.iter().sum::<f64>() / reps as f64;
    let sd = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    let expect = 1.0 / (4.0 * shots as f64).sqrt();
    Ok(((sd / expect - 1.0).abs() <= 0.1, format!("std of S = {sd:.5} vs {expect} (10%)")))
}

fn parameter_table() -> Check {
    let table = params_table().map_err(|e| e.to_string())?.table;
    let gt = row_value(&table, "gamma_times_t_swap");
    let decay_t = row_value(&table, "decay_times_t_swap");
    let order = gt.log10().round();
    let ok = order == -4.0 && (0.1..=0.3).contains(&decay_t);
    Ok((ok, format!("gamma*T_swap = {gt:.3e} (order 1e-4), Gamma*T_swap = {decay_t:.4} (in [0.1, 0.3])")))
}

fn constant_force_filter() -> Check {
    let reference = LossRates::reference();
    let periods = 10.0;
    let nu = reference.omega_m / (2.0 * periods);
    let g = (nu * nu + (reference.kappa + reference.gamma).powi(2) / 16.0).sqrt();
    let lp = LossParams::new(LossRates { g, ..reference }).map_err(|e| e.to_string())?;
    let spanned = lp.t_swap() * lp.rates().omega_m / (2.0 * PI);
    let omega = lp.rates().omega_m;
    let resonant = momentum_kick_stats(|s| (omega * s).cos(), &lp).map_err(|e| e.to_string())?.mean;
    let constant = momentum_kick_stats(|_| 1.0, &lp).map_err(|e| e.to_string())?.mean;
    let ratio = (constant / resonant).abs();
    Ok((ratio < 0.01, format!("T_swap spans {spanned:.6} periods, |constant/resonant| = {ratio:.3e} (< 1e-2)")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("ideal mean quadrature", ideal_mean_x_equivalence),
        ("cat construction", cat_fidelity),
        ("phase law", phase_law),
        ("signal slope", signal_slope),
        ("quantum enhancement sweep", enhancement_sweep),
        ("emission probability", emission_probability_reference),
        ("lossy oracle", lossy_oracle),
        ("single-emission dephasing", emission_dephasing),
        ("statistical contract", statistical_contract),
        ("parameter table", parameter_table),
        ("constant-force filter", constant_force_filter),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("acceptance {:>2} {:<4} {name}: {detail}", k + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
