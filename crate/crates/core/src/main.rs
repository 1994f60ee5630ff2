use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use staircase::config::{self, Mode, OutputFormat, Overrides, RunConfig, SEED_ENV};
use staircase::selftest::{self, SelftestOptions};
use staircase::sim::{self, CurvePoint};
use staircase::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_SELFTEST: u8 = 3;
const EXIT_IO: u8 = 1;

const PRESETS: &str = "\
Presets:
  example1   nu=8, t=2 (n=256, a=128, R=0.867), W=8, ell=7, T=1, t_eff_last=1.
             The reference configuration for n=256, t=2 component codes.

Precedence (lowest first): defaults, --preset, --config file, flags.
STAIRCASE_SEED is used when neither the file nor --seed sets a seed.
Exit codes: 0 success, 2 configuration error, 3 self-test failure.";

#[derive(Parser)]
#[command(name = "staircase", version, about = "Staircase code window-decoding simulator", after_help = PRESETS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print component and staircase code parameters.
    CodeInfo(CodeArgs),
    /// Simulate one decoder at one channel point.
    Simulate(RunArgs),
    /// Simulate several decoders over a list of channel points.
    Sweep(RunArgs),
    /// Run the built-in oracle and scenario checks.
    Selftest {
        #[arg(long, hide = true)]
        corrupt_generator: bool,
    },
}

/// Code parameter flags. Every flag has a config-file key of the same
/// name with `-` replaced by `_`.
#[derive(Args, Default)]
struct CodeArgs {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Named parameter preset (example1).
    #[arg(long)]
    preset: Option<String>,
    /// Field degree; component length n = 2^nu.
    #[arg(long)]
    nu: Option<String>,
    /// Component error-correcting capability.
    #[arg(long)]
    t: Option<String>,
    /// Expected block size a = n/2; rejected if inconsistent.
    #[arg(long = "a-check", value_name = "A")]
    a_check: Option<String>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file (default stdout).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Window size in blocks.
    #[arg(long = "W", value_name = "W")]
    w: Option<String>,
    /// Iterations per window position.
    #[arg(long)]
    ell: Option<String>,
    /// Conflict threshold of the anchor decoder, or inf.
    #[arg(long = "T", value_name = "T")]
    threshold: Option<String>,
    /// Anchor-decoder capability at the newest position (default max(1, t-1)).
    #[arg(long)]
    t_eff_last: Option<String>,
    /// Decoder for simulate: conventional, genie or anchor.
    #[arg(long)]
    decoder: Option<String>,
    /// Comma-separated decoders for sweep (default all three).
    #[arg(long)]
    decoders: Option<String>,
    /// BSC crossover probability.
    #[arg(long, conflicts_with = "eb_n0_db")]
    p: Option<String>,
    /// Eb/N0 in dB (hard-decision BPSK over AWGN).
    #[arg(long)]
    eb_n0_db: Option<String>,
    /// Comma-separated channel points for sweep; a dB suffix marks Eb/N0.
    #[arg(long)]
    p_list: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    /// Stop once this many post-FEC bit errors are counted.
    #[arg(long)]
    min_bit_errors: Option<String>,
    /// Stop after this many measured blocks.
    #[arg(long)]
    max_blocks: Option<String>,
    /// Worker threads (0 = all available cores).
    #[arg(long)]
    threads: Option<String>,
}

fn code_overrides(a: &CodeArgs) -> Result<Overrides, Error> {
    let mut o = Overrides::default();
    let pairs = [
        ("preset", &a.preset),
        ("nu", &a.nu),
        ("t", &a.t),
        ("a", &a.a_check),
        ("format", &a.format),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            o.set(k, v)?;
        }
    }
    o.out = a.out.clone();
    Ok(o)
}

fn run_overrides(a: &RunArgs) -> Result<Overrides, Error> {
    let mut o = code_overrides(&a.code)?;
    let pairs = [
        ("W", &a.w),
        ("ell", &a.ell),
        ("T", &a.threshold),
        ("t_eff_last", &a.t_eff_last),
        ("decoder", &a.decoder),
        ("decoders", &a.decoders),
        ("p", &a.p),
        ("eb_n0_db", &a.eb_n0_db),
        ("p_list", &a.p_list),
        ("seed", &a.seed),
        ("min_bit_errors", &a.min_bit_errors),
        ("max_blocks", &a.max_blocks),
        ("threads", &a.threads),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            o.set(k, v)?;
        }
    }
    Ok(o)
}

fn load(code: &CodeArgs, flags: &Overrides, mode: Mode) -> Result<RunConfig, Error> {
    let file = match &code.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            Some(config::parse_config(&text)?)
        }
        None => None,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    config::resolve(file.as_ref(), flags, env_seed.as_deref(), mode)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Error> {
    match &cfg.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn code_info(cfg: &RunConfig) -> String {
    let code = &cfg.params.code;
    let fields: Vec<(&str, String)> = vec![
        ("nu", code.field().nu().to_string()),
        ("t", code.t().to_string()),
        ("n", code.n().to_string()),
        ("k", code.k().to_string()),
        ("a", (code.n() / 2).to_string()),
        ("R", format!("{:.4}", code.staircase_rate())),
        ("d_min", code.d_min_guaranteed().to_string()),
        ("bch_parity_bits", code.bch_parity_len().to_string()),
        (
            "primitive_poly",
            format!("{:#x}", code.field().primitive_poly()),
        ),
    ];
    match cfg.format {
        OutputFormat::Csv => fields.iter().map(|(k, v)| format!("{k} = {v}\n")).collect(),
        OutputFormat::Json => {
            let map: serde_json::Map<String, serde_json::Value> = fields
                .iter()
                .map(|(k, v)| {
                    let val = v
                        .parse::<u64>()
                        .map(serde_json::Value::from)
                        .or_else(|_| v.parse::<f64>().map(serde_json::Value::from))
                        .unwrap_or_else(|_| serde_json::Value::from(v.clone()));
                    (k.to_string(), val)
                })
                .collect();
            serde_json::to_string_pretty(&map).expect("map serializes") + "\n"
        }
    }
}

fn simulate(cfg: &RunConfig) -> Result<String, Error> {
    let rows: Vec<CurvePoint> = sim::sweep(
        &cfg.params,
        &cfg.points,
        &cfg.decoders,
        cfg.seed,
        &cfg.stop,
        &cfg.sim_options(),
    )?;
    Ok(match cfg.format {
        OutputFormat::Csv => sim::to_csv(&rows),
        OutputFormat::Json => sim::to_json(&rows),
    })
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::CodeInfo(args) => {
            let cfg = load(&args, &code_overrides(&args)?, Mode::Code)?;
            emit(&cfg, &code_info(&cfg))?;
        }
        Command::Simulate(args) => {
            let cfg = load(&args.code, &run_overrides(&args)?, Mode::Single)?;
            emit(&cfg, &simulate(&cfg)?)?;
        }
        Command::Sweep(args) => {
            let cfg = load(&args.code, &run_overrides(&args)?, Mode::Sweep)?;
            emit(&cfg, &simulate(&cfg)?)?;
        }
        Command::Selftest { corrupt_generator } => {
            let results = selftest::run(SelftestOptions { corrupt_generator });
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!(
                "{} of {} suites passed",
                results.len() - failed,
                results.len()
            );
            if failed > 0 {
                return Ok(EXIT_SELFTEST);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_CONFIG,
            })
        }
    }
}
