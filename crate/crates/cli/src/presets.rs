//! Parameter grids and table builders for the figure and table presets.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;

use aoi_core::baseline::{average_aoi_bernoulli, optimal_transmit_probability};
use aoi_core::closed_form::{average_aoi_series, collision_probability, OptimalPolicy};
use aoi_core::cmdp::{lambda_bisection, BisectionOptions, TruncatedModel};
use aoi_core::sim::{simulate, Horizon, SimConfig};
use aoi_core::{Policy, PuRates, SystemParams};

use crate::report::{Cell, CsvReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentPreset {
    /// RVI policies at both multipliers bracketing eta_s in {0.0005, 0.001};
    /// alpha = 0.02, beta = 0.4, phi_s = 0.2, ages up to 200.
    Fig3,
    /// Threshold policies gamma = 1..100, analysis against simulation;
    /// alpha = 0.02, beta = 0.4, phi_s = 0.2.
    Fig4,
    /// Optimal AoI against p_I in 0.50..0.95 (step 0.05) with alpha = 0.01,
    /// phi_s = 0.2, eta_p in {0.01, 0.05, 0.1}.
    Fig5,
    /// Age-optimal and throughput-optimal AoI on 21 log-spaced eta_s in
    /// [1e-4, 1e-2], alpha = 0.02, beta = 0.4, phi_s in {0.2, 0.3}.
    Fig6,
    /// As fig5 with eta_s in {0.0005, 0.001, 0.002}.
    Fig7,
    /// Optimal AoI on 25 log-spaced alpha in [0.001, 0.3] with p_I = 0.75,
    /// phi_s = 0.2, eta_p in {0.01, 0.05}.
    Fig8,
    /// Optimal AoI for alpha in {0.002, 0.01}, eta_p in {0.01, 0.05},
    /// phi_s in {0.2, 0.3}, p_I = 0.75.
    Table1,
}

impl ExperimentPreset {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentPreset::Fig3 => "fig3",
            ExperimentPreset::Fig4 => "fig4",
            ExperimentPreset::Fig5 => "fig5",
            ExperimentPreset::Fig6 => "fig6",
            ExperimentPreset::Fig7 => "fig7",
            ExperimentPreset::Fig8 => "fig8",
            ExperimentPreset::Table1 => "table1",
        }
    }
}

/// Settings for presets that simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSettings {
    pub slots: u64,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            slots: 1_000_000,
            seed: 1,
        }
    }
}

pub fn build(preset: ExperimentPreset, sim: SimSettings) -> Result<CsvReport> {
    match preset {
        ExperimentPreset::Fig3 => fig3(),
        ExperimentPreset::Fig4 => fig4(sim),
        ExperimentPreset::Fig5 => idle_sweep(Budget::Pu, &[0.01, 0.05, 0.1]),
        ExperimentPreset::Fig6 => fig6(),
        ExperimentPreset::Fig7 => idle_sweep(Budget::Siot, &[0.0005, 0.001, 0.002]),
        ExperimentPreset::Fig8 => fig8(),
        ExperimentPreset::Table1 => table1(),
    }
}

/// Builds the preset and writes `<out_dir>/<name>.csv`.
pub fn run(preset: ExperimentPreset, out_dir: &Path, sim: SimSettings) -> Result<PathBuf> {
    let report = build(preset, sim).with_context(|| format!("running preset {}", preset.name()))?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join(format!("{}.csv", preset.name()));
    report.write_to(&path)?;
    Ok(path)
}

fn params(alpha: f64, beta: f64, phi: f64, eta_s: f64) -> Result<SystemParams> {
    Ok(SystemParams::new(PuRates::new(alpha, beta)?, phi, eta_s)?)
}

/// `n` points spaced evenly in log scale from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn fig3() -> Result<CsvReport> {
    let mut report = CsvReport::new(&[
        "eta_s[collisions/slot]",
        "branch",
        "lambda",
        "gamma",
        "delta[slots]",
        "transmit_idle",
        "transmit_busy",
    ]);
    let solutions = [0.0005, 0.001]
        .par_iter()
        .map(|&eta| {
            let p = params(0.02, 0.4, 0.2, eta)?;
            let model = TruncatedModel::new(p, 200)?;
            Ok((eta, lambda_bisection(&model, eta, &BisectionOptions::default())?))
        })
        .collect::<Result<Vec<_>>>()?;
    for (eta, sol) in solutions {
        let branches = [
            ("upper_lambda", &sol.policy_high, sol.thresholds.1),
            ("lower_lambda", &sol.policy_low, sol.thresholds.0),
        ];
        for (branch, policy, gamma) in branches {
            for (k, &t) in policy.transmit_idle.iter().enumerate() {
                report.push(vec![
                    eta.into(),
                    branch.into(),
                    policy.lambda.into(),
                    gamma.into(),
                    (k as u64 + 1).into(),
                    t.into(),
                    false.into(),
                ])?;
            }
        }
    }
    Ok(report)
}

fn fig4(sim: SimSettings) -> Result<CsvReport> {
    let mut report = CsvReport::new(&[
        "gamma[slots]",
        "avg_aoi_analysis[slots]",
        "avg_aoi_sim[slots]",
        "avg_aoi_sim_se[slots]",
        "psi_s_analysis[collisions/slot]",
        "psi_s_sim[collisions/slot]",
        "psi_s_sim_se[collisions/slot]",
    ]);
    // The budget does not enter a fixed-threshold run.
    let p = params(0.02, 0.4, 0.2, 0.001)?;
    let rows = (1..=100u32)
        .into_par_iter()
        .map(|gamma| {
            let cfg = SimConfig::new(p, Policy::threshold(gamma)?, Horizon::Slots(sim.slots), sim.seed);
            let r = simulate(&cfg)?;
            Ok(vec![
                gamma.into(),
                average_aoi_series(gamma, &p)?.into(),
                r.avg_aoi.into(),
                r.avg_aoi_se.into(),
                collision_probability(gamma, &p).into(),
                r.psi_s_hat.into(),
                r.psi_s_se.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    for row in rows {
        report.push(row)?;
    }
    Ok(report)
}

#[derive(Clone, Copy)]
enum Budget {
    Pu,
    Siot,
}

const OPTIMUM_COLUMNS: [&str; 4] = ["gamma1[slots]", "gamma2[slots]", "mu", "avg_aoi[slots]"];

fn optimum_cells(p: &SystemParams) -> Result<Vec<Cell>> {
    let opt = OptimalPolicy::solve(p)?;
    Ok(vec![opt.gamma1.into(), opt.gamma2.into(), opt.mu.into(), opt.avg_aoi.into()])
}

fn idle_sweep(budget: Budget, budgets: &[f64]) -> Result<CsvReport> {
    let mut header = vec!["p_idle", "alpha[1/slot]", "beta[1/slot]", "eta_p[collisions/cycle]", "eta_s[collisions/slot]"];
    header.extend(OPTIMUM_COLUMNS);
    let mut report = CsvReport::new(&header);
    let alpha = 0.01;
    let mut points = Vec::new();
    for &b in budgets {
        for k in 0..10 {
            points.push((b, 0.5 + 0.05 * f64::from(k)));
        }
    }
    let rows = points
        .par_iter()
        .map(|&(b, p_idle)| {
            let rates = PuRates::with_idle_probability(alpha, p_idle)?;
            let p = match budget {
                Budget::Pu => SystemParams::with_pu_budget(rates, 0.2, b)?,
                Budget::Siot => SystemParams::new(rates, 0.2, b)?,
            };
            let mut row: Vec<Cell> = vec![
                p_idle.into(),
                alpha.into(),
                p.beta().into(),
                p.eta_p().into(),
                p.eta_s().into(),
            ];
            row.extend(optimum_cells(&p)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    for row in rows {
        report.push(row)?;
    }
    Ok(report)
}

fn fig6() -> Result<CsvReport> {
    let mut report = CsvReport::new(&[
        "eta_s[collisions/slot]",
        "age_opt_phi0.2[slots]",
        "age_opt_phi0.3[slots]",
        "throughput_opt_phi0.2[slots]",
        "throughput_opt_phi0.3[slots]",
        "p0_phi0.2",
    ]);
    let rows = log_grid(1e-4, 1e-2, 21)
        .par_iter()
        .map(|&eta| {
            let low = params(0.02, 0.4, 0.2, eta)?;
            let high = params(0.02, 0.4, 0.3, eta)?;
            let p0 = optimal_transmit_probability(&low).p0;
            Ok(vec![
                eta.into(),
                OptimalPolicy::solve(&low)?.avg_aoi.into(),
                OptimalPolicy::solve(&high)?.avg_aoi.into(),
                average_aoi_bernoulli(&low, p0)?.into(),
                average_aoi_bernoulli(&high, optimal_transmit_probability(&high).p0)?.into(),
                p0.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    for row in rows {
        report.push(row)?;
    }
    Ok(report)
}

fn fig8() -> Result<CsvReport> {
    let mut header = vec!["eta_p[collisions/cycle]", "alpha[1/slot]", "beta[1/slot]", "eta_s[collisions/slot]"];
    header.extend(OPTIMUM_COLUMNS);
    let mut report = CsvReport::new(&header);
    let mut points = Vec::new();
    for eta_p in [0.01, 0.05] {
        for alpha in log_grid(0.001, 0.3, 25) {
            points.push((eta_p, alpha));
        }
    }
    let rows = points
        .par_iter()
        .map(|&(eta_p, alpha)| {
            let p = SystemParams::with_pu_budget(PuRates::with_idle_probability(alpha, 0.75)?, 0.2, eta_p)?;
            let mut row: Vec<Cell> = vec![eta_p.into(), alpha.into(), p.beta().into(), p.eta_s().into()];
            row.extend(optimum_cells(&p)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    for row in rows {
        report.push(row)?;
    }
    Ok(report)
}

/// The eight `(channel, alpha, eta_p, phi_s)` cells of the table.
pub fn table1_cells() -> Vec<(u32, f64, f64, f64)> {
    let mut cells = Vec::new();
    for phi in [0.2, 0.3] {
        for (channel, (alpha, eta_p)) in [(0.002, 0.01), (0.01, 0.01), (0.002, 0.05), (0.01, 0.05)]
            .into_iter()
            .enumerate()
        {
            cells.push((channel as u32 + 1, alpha, eta_p, phi));
        }
    }
    cells
}

fn table1() -> Result<CsvReport> {
    let mut header = vec![
        "channel",
        "alpha[1/slot]",
        "beta[1/slot]",
        "eta_p[collisions/cycle]",
        "phi_s",
        "eta_s[collisions/slot]",
    ];
    header.extend(OPTIMUM_COLUMNS);
    let mut report = CsvReport::new(&header);
    for (channel, alpha, eta_p, phi) in table1_cells() {
        let p = SystemParams::with_pu_budget(PuRates::with_idle_probability(alpha, 0.75)?, phi, eta_p)?;
        let mut row: Vec<Cell> = vec![
            channel.into(),
            alpha.into(),
            p.beta().into(),
            eta_p.into(),
            phi.into(),
            p.eta_s().into(),
        ];
        row.extend(optimum_cells(&p)?);
        report.push(row)?;
    }
    Ok(report)
}
