use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cogbeam::harness::{
    apply_config, csv_string_labeled, db_to_linear, default_presets, linear_to_db, parse_sweep,
    run_campaign, write_csv_labeled, Campaign, Scenario,
};

mod verify;

#[derive(Parser)]
#[command(name = "cogbeam", version, about = "Robust cognitive-radio beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write a CSV table.
    Run(RunArgs),
    /// Print the default simulation parameters.
    Presets,
    /// Run reduced oracle checks and report pass/fail.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// single_user_vs_I, single_user_vs_e, multiuser_fair, multiuser_optimal,
    /// fairness_trace or case2_sweep.
    #[arg(long)]
    scenario: String,
    /// start:stop:step, inclusive. Power sweeps (I_limit, I′) are in dB,
    /// the error sweep is the radius e, the fairness trace counts slots.
    #[arg(long, allow_hyphen_values = true)]
    sweep: Option<String>,
    /// Channel realizations x error realizations per channel.
    #[arg(long, default_value = "100x100")]
    trials: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Flat key = value parameter file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Round cap for the full-band alternating optimization.
    #[arg(long, default_value_t = 20)]
    rounds: usize,
}

fn parse_trials(arg: &str) -> Result<(usize, usize)> {
    let (outer, inner) = arg
        .split_once(['x', 'X'])
        .with_context(|| format!("trials '{arg}' is not <outer>x<inner>"))?;
    let outer = outer.trim().parse().with_context(|| format!("bad outer trial count in '{arg}'"))?;
    let inner = inner.trim().parse().with_context(|| format!("bad inner trial count in '{arg}'"))?;
    Ok((outer, inner))
}

fn build_campaign(args: &RunArgs) -> Result<Campaign> {
    let scenario: Scenario = args.scenario.parse()?;
    let mut campaign = Campaign::preset(scenario);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        apply_config(&mut campaign, &text, path)?;
    }
    if let Some(arg) = &args.sweep {
        let values = parse_sweep(arg)?;
        campaign.sweep = if scenario.sweeps_power() {
            values.into_iter().map(db_to_linear).collect()
        } else {
            values
        };
    }
    let (outer, inner) = parse_trials(&args.trials)?;
    campaign.trials_outer = outer;
    campaign.trials_inner = inner;
    campaign.seed = args.seed;
    campaign.case2_rounds = args.rounds;
    campaign.validate()?;
    Ok(campaign)
}

fn run(args: RunArgs) -> Result<()> {
    let campaign = build_campaign(&args)?;
    log::info!(
        "{} over {} sweep values, {}x{} trials, seed {}",
        campaign.scenario,
        campaign.sweep.len(),
        campaign.trials_outer,
        campaign.trials_inner,
        campaign.seed
    );
    let rows = run_campaign(&campaign)?;
    for row in &rows {
        if row.failures > 0 {
            log::warn!("sweep value {}: {} failed trials", row.sweep_value, row.failures);
        }
    }
    let labels = campaign.per_user_columns();
    match &args.out {
        Some(path) => write_csv_labeled(&rows, &labels, path)?,
        None => print!("{}", csv_string_labeled(&rows, &labels)),
    }
    Ok(())
}

fn presets() {
    let p = default_presets();
    println!("nt           = {}", p.cfg.nt);
    println!("nr           = {}", p.cfg.nr);
    println!("n_sec        = {}", p.cfg.n_sec);
    println!("p_su_db      = {}", linear_to_db(p.cfg.p_su));
    println!("p_pu_db      = {}", linear_to_db(p.cfg.p_pu));
    println!("noise_db     = {}", linear_to_db(p.cfg.noise_power));
    println!("i_limit_db   = {}", linear_to_db(p.cfg.i_limit));
    println!("e            = {}", p.uncertainty.e);
    println!("sigma        = {}", p.uncertainty.sigma);
    println!("sigma_prime  = {}", p.uncertainty.sigma_prime);
    println!("i_prime_db   = {}", linear_to_db(p.i_prime));
    println!("trials       = {}x{}", p.trials_outer, p.trials_inner);
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Presets => {
            presets();
            Ok(())
        }
        Command::Verify { seed } => verify::run_all(seed).and_then(|ok| {
            if ok {
                Ok(())
            } else {
                bail!("one or more oracle checks failed")
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
