use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cr_feedback_ec::chain::{build_chain, steady_state, success_rate_from, write_dump};
use cr_feedback_ec::ec::effective_capacity_of;
use cr_feedback_ec::experiment::{
    describe, linspace, list_presets, run_experiment, Experiment, SensingMode, SimSettings, SweepVariable,
};
use cr_feedback_ec::params::{load_config, SchemeKind, SystemParams};
use cr_feedback_ec::specfun::{sensing_probs, SensingProbs};
use cr_feedback_ec::Error;

#[derive(Parser)]
#[command(name = "crfb", version, about = "Cognitive-radio effective capacity with primary feedback access")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the figure presets.
    List,
    /// Describe one preset and its parameter deltas.
    Describe { preset: String },
    /// Run a preset or a custom sweep and write CSV, summary and plot files.
    Run(RunArgs),
    /// Evaluate a single operating point.
    Eval(EvalArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Figure preset (fig2, fig3, fig4, fig5).
    #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
    preset: Option<String>,
    /// Custom sweep `VAR=START:STOP:COUNT`, VAR one of p0, eps, theta, lambda.
    #[arg(long)]
    sweep: Option<String>,
    /// Base configuration (TOML); Table-1 defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Skip the protocol simulation columns.
    #[arg(long)]
    no_sim: bool,
    #[arg(long, default_value_t = 1_000)]
    slots: u64,
    #[arg(long, default_value_t = 100)]
    trajectories: u64,
    /// Schemes for custom sweeps.
    #[arg(long, value_delimiter = ',', default_value = "dpl,tpl")]
    scheme: Vec<SchemeKind>,
    /// Sensing modes for custom sweeps.
    #[arg(long, value_delimiter = ',', default_value = "model")]
    sensing: Vec<SensingMode>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "tpl")]
    scheme: SchemeKind,
    /// Use P_f = 0, P_d = 1 instead of the energy detector.
    #[arg(long)]
    perfect_sensing: bool,
    /// Write R, pi and beta as CSV.
    #[arg(long)]
    dump_chain: Option<PathBuf>,
}

fn parse_sweep(text: &str) -> Result<(SweepVariable, Vec<f64>), String> {
    let (var, range) = text.split_once('=').ok_or("expected VAR=START:STOP:COUNT")?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err("expected VAR=START:STOP:COUNT".into());
    };
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let count: usize = count.parse().map_err(|e| format!("`{count}`: {e}"))?;
    Ok((var.parse()?, linspace(num(start)?, num(stop)?, count)))
}

fn load(config: Option<&PathBuf>) -> cr_feedback_ec::Result<SystemParams> {
    config.map_or_else(|| Ok(SystemParams::table1()), load_config)
}

fn run(args: RunArgs) -> Result<(), Box<dyn std::error::Error>> {
    let mut exp = match (&args.preset, &args.sweep) {
        (Some(name), _) => Experiment::preset(name, args.config.clone())?,
        (None, Some(sweep)) => {
            let (var, grid) = parse_sweep(sweep)?;
            Experiment {
                name: format!("sweep_{}", var.column()),
                description: format!("custom sweep over {}", var.column()),
                config: args.config.clone(),
                sweep: var,
                grid,
                schemes: args.scheme.clone(),
                sensing: args.sensing.clone(),
                feedback_miss_prob: None,
                tie_low_rate: false,
                plot_metric: cr_feedback_ec::experiment::Metric::EffectiveCapacity,
                simulation: None,
            }
        }
        (None, None) => unreachable!("clap requires --preset or --sweep"),
    };
    exp.simulation = (!args.no_sim).then_some(SimSettings {
        slots: args.slots,
        trajectories: args.trajectories,
        seed: args.seed,
    });
    let out = run_experiment(&exp, &args.out_dir)?;
    println!("wrote {}", out.csv_path.display());
    println!("wrote {}", out.summary_path.display());
    match out.plot_path {
        Some(p) => println!("wrote {}", p.display()),
        None => eprintln!("warning: no plot backend; CSV only"),
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Box<dyn std::error::Error>> {
    let params = load(args.config.as_ref())?.validate()?;
    let sensing = if args.perfect_sensing {
        SensingProbs::PERFECT
    } else {
        sensing_probs(&params)?
    };
    let chain = build_chain(&params, args.scheme, &sensing);
    let steady = steady_state(&chain)?;
    let ec = effective_capacity_of(&chain, params.qos_exponent)?;
    println!("scheme: {}", args.scheme);
    println!("P_f = {:.12e}, P_d = {:.12e}", sensing.p_false_alarm, sensing.p_detection);
    println!("spectral radius = {:.15}", ec.spectral_radius);
    println!("EC = {:.9} bits/slot = {:.6} bits/s (theta = {})", ec.ec_bits_per_slot, ec.ec_bits_per_sec, ec.theta);
    match success_rate_from(&params, &chain, &steady) {
        Ok(s) => println!("PU success rate = {s:.12}"),
        Err(Error::Degenerate(msg)) => println!("PU success rate: undefined ({msg})"),
        Err(e) => return Err(e.into()),
    }
    if let Some(path) = args.dump_chain {
        let file = std::fs::File::create(&path)?;
        write_dump(&chain, &steady, file)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for name in list_presets() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Describe { preset } => describe(&preset).map(|t| println!("{t}")).map_err(Into::into),
        Command::Run(args) => run(args),
        Command::Eval(args) => eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
