//! Subcommand bodies. Each returns the text printed on stdout so that output
//! is assembled in one place and stays byte-stable.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};

use aoi_core::closed_form::OptimalPolicy;
use aoi_core::cmdp::{lambda_bisection, BisectionOptions, TruncatedModel};
use aoi_core::sim::{replicate, replicate_serial, Horizon, SimConfig};
use aoi_core::{Occupancy, Policy, PuRates, SystemParams};

use crate::report::{format_number as num, Cell, CsvReport};

/// Collision budget from one of the two perspectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetArg {
    Siot(f64),
    Pu(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveArgs {
    pub alpha: f64,
    pub beta: f64,
    pub phi_s: f64,
    pub budget: BudgetArg,
    pub verify: bool,
    pub delta_max: u32,
}

/// Agreement required between the solver and the closed form on `mu`.
pub const VERIFY_MU_TOL: f64 = 1e-6;

pub fn solve(args: &SolveArgs, out: Option<&Path>) -> Result<String> {
    let rates = PuRates::new(args.alpha, args.beta)?;
    let p = match args.budget {
        BudgetArg::Siot(eta) => SystemParams::new(rates, args.phi_s, eta)?,
        BudgetArg::Pu(eta) => SystemParams::with_pu_budget(rates, args.phi_s, eta)?,
    };
    let opt = OptimalPolicy::solve(&p)?;
    let psi_p = opt.psi_s * rates.mean_cycle_length();

    let mut text = String::new();
    let mut line = |k: &str, v: String| writeln!(text, "{k} = {v}").expect("writing to a String");
    line("gamma1", opt.gamma1.to_string());
    line("gamma2", opt.gamma2.to_string());
    line("mu", num(opt.mu));
    line("avg_aoi", num(opt.avg_aoi));
    line("psi_s", num(opt.psi_s));
    line("psi_p", num(psi_p));
    line("eta_s", num(p.eta_s()));
    line("eta_p", num(p.eta_p()));
    line("binding", opt.binding.to_string());

    let mut header = vec![
        "alpha[1/slot]",
        "beta[1/slot]",
        "phi_s",
        "eta_s[collisions/slot]",
        "eta_p[collisions/cycle]",
        "gamma1[slots]",
        "gamma2[slots]",
        "mu",
        "avg_aoi[slots]",
        "psi_s[collisions/slot]",
        "psi_p[collisions/cycle]",
    ];
    let mut row: Vec<Cell> = vec![
        args.alpha.into(),
        args.beta.into(),
        args.phi_s.into(),
        p.eta_s().into(),
        p.eta_p().into(),
        opt.gamma1.into(),
        opt.gamma2.into(),
        opt.mu.into(),
        opt.avg_aoi.into(),
        opt.psi_s.into(),
        psi_p.into(),
    ];

    if args.verify {
        let model = TruncatedModel::new(p, args.delta_max)?;
        let sol = lambda_bisection(&model, p.eta_s(), &BisectionOptions::default())?;
        line("rvi_gamma1", sol.thresholds.0.to_string());
        line("rvi_gamma2", sol.thresholds.1.to_string());
        line("rvi_mu", num(sol.mu));
        line("rvi_avg_aoi", num(sol.achieved_aoi));
        line("lambda_low", num(sol.lambda_low));
        line("lambda_high", num(sol.lambda_high));
        let agree = sol.thresholds == (opt.gamma1, opt.gamma2) && (sol.mu - opt.mu).abs() < VERIFY_MU_TOL;
        line("agreement", if agree { "ok".into() } else { "mismatch".into() });
        header.extend(["rvi_gamma1[slots]", "rvi_gamma2[slots]", "rvi_mu", "agreement"]);
        row.extend([
            sol.thresholds.0.into(),
            sol.thresholds.1.into(),
            sol.mu.into(),
            agree.into(),
        ]);
        if !agree {
            write_csv(out, "solve", &header, row)?;
            bail!(
                "solver and closed form disagree: ({}, {}, {}) vs ({}, {}, {})",
                sol.thresholds.0,
                sol.thresholds.1,
                sol.mu,
                opt.gamma1,
                opt.gamma2,
                opt.mu
            );
        }
    }
    write_csv(out, "solve", &header, row)?;
    Ok(text)
}

fn write_csv(out: Option<&Path>, name: &str, header: &[&str], row: Vec<Cell>) -> Result<()> {
    if let Some(dir) = out {
        let mut report = CsvReport::new(header);
        report.push(row)?;
        std::fs::create_dir_all(dir)?;
        report.write_to(&dir.join(format!("{name}.csv")))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub alpha: f64,
    pub beta: f64,
    pub phi_s: f64,
    pub policy: Policy,
    pub horizon: Horizon,
    pub seed: u64,
    pub reps: u64,
    pub serial: bool,
    pub initial: Occupancy,
}

pub fn simulate(args: &SimulateArgs, out: Option<&Path>) -> Result<String> {
    // The simulator never reads the budget; any admissible value will do.
    let p = SystemParams::new(PuRates::new(args.alpha, args.beta)?, args.phi_s, 0.5)?;
    let cfg = SimConfig {
        params: p,
        policy: args.policy.clone(),
        horizon: args.horizon,
        seed: args.seed,
        initial_occupancy: args.initial,
    };
    let rep = if args.serial {
        replicate_serial(&cfg, args.reps)?
    } else {
        replicate(&cfg, args.reps)?
    };
    let slots: u64 = rep.runs.iter().map(|r| r.slots).sum();
    let cycles: u64 = rep.runs.iter().map(|r| r.cycles).sum();
    let successes: u64 = rep.runs.iter().map(|r| r.success_count).sum();
    let transmits: u64 = rep.runs.iter().map(|r| r.transmit_count).sum();
    let collisions: u64 = rep.runs.iter().map(|r| r.collision_count).sum();
    let (aoi_se, psi_se) = if args.reps == 1 {
        (rep.runs[0].avg_aoi_se, rep.runs[0].psi_s_se)
    } else {
        (rep.avg_aoi.se, rep.psi_s_hat.se)
    };

    let mut text = String::new();
    let mut line = |k: &str, v: String| writeln!(text, "{k} = {v}").expect("writing to a String");
    line("policy", args.policy.to_string());
    line("seed", args.seed.to_string());
    line("replications", args.reps.to_string());
    line("avg_aoi", num(rep.avg_aoi.mean));
    line("avg_aoi_se", num(aoi_se));
    line("psi_s_hat", num(rep.psi_s_hat.mean));
    line("psi_s_se", num(psi_se));
    line("psi_p_hat", num(rep.psi_p_hat.mean));
    line("throughput", num(rep.throughput.mean));
    line("slots", slots.to_string());
    line("cycles", cycles.to_string());
    line("success_count", successes.to_string());
    line("transmit_count", transmits.to_string());
    line("collision_count", collisions.to_string());
    line("aoi_divergence_flag", rep.any_divergent.to_string());

    if let Some(dir) = out {
        let mut report = CsvReport::new(&[
            "replication",
            "seed",
            "avg_aoi[slots]",
            "avg_aoi_se[slots]",
            "psi_s_hat[collisions/slot]",
            "psi_s_se[collisions/slot]",
            "psi_p_hat[collisions/cycle]",
            "throughput[updates/slot]",
            "slots",
            "cycles",
            "success_count",
            "transmit_count",
            "collision_count",
            "aoi_divergence_flag",
        ]);
        for (i, r) in rep.runs.iter().enumerate() {
            report.push(vec![
                (i as u64).into(),
                aoi_core::sim::replication_seed(args.seed, i as u64).into(),
                r.avg_aoi.into(),
                r.avg_aoi_se.into(),
                r.psi_s_hat.into(),
                r.psi_s_se.into(),
                r.psi_p_hat.into(),
                r.throughput().into(),
                r.slots.into(),
                r.cycles.into(),
                r.success_count.into(),
                r.transmit_count.into(),
                r.collision_count.into(),
                r.aoi_divergence_flag.into(),
            ])?;
        }
        std::fs::create_dir_all(dir)?;
        report.write_to(&dir.join("simulate.csv"))?;
    }
    Ok(text)
}
