use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hedgehog::commands::{self, Harness, Outcome};
use hedgehog::error::{EXIT_FAIL, EXIT_PASS};
use hedgehog::{Error, ExperimentConfig};

const AFTER_HELP: &str = "\
Lists (--radii, --ks, --n-range, --convergents) are either comma separated
values or start:step:count, e.g. 0.1:-0.01:8 is 0.10, 0.09, ..., 0.03.

Values are taken from flags first, then from --config (JSON, same keys as
the sidecar 'config' object), then from per-command defaults.

Germs: quad, quad-squared, rotation, power, reduced, parabolic,
parabolic-cubic, mobius, file (with --germ-file).

Exit codes: 0 pass, 1 failed verification or runtime error, 2 usage,
3 unmet precondition.";

#[derive(Parser, Debug)]
#[command(name = "hedgehog", version, about = "Germ normal forms, orbit harnesses and escape-field compacta", after_help = AFTER_HELP)]
struct Cli {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the compact of 0 for a germ on a disk
    Render(Flags),
    /// Run a verification harness: iterate-count, shadowing, boundary-distance or probe
    Verify {
        harness: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Reduce a germ to λz + O(z^N)
    NormalForm(Flags),
    /// Formal commutator of two germs
    Commutator(Flags),
    /// Render the compact of a parabolic germ with petal statistics
    Flower(Flags),
    /// Track backward images of a disk near a parabolic point
    Track(Flags),
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re, im] => Ok([
            re.parse().map_err(|e| format!("{e}"))?,
            im.parse().map_err(|e| format!("{e}"))?,
        ]),
        _ => Err("expected re,im".into()),
    }
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long)]
    germ: Option<String>,
    #[arg(long)]
    germ_file: Option<PathBuf>,
    /// Truncation order of the germ
    #[arg(long)]
    order: Option<usize>,
    /// Reduction order, or the exponent of the power family
    #[arg(long = "N", short = 'N')]
    n: Option<usize>,
    /// Continued fraction of α, e.g. "[0;1,1,1]" or "0;1,2,3"
    #[arg(long)]
    alpha_cf: Option<String>,
    /// Liouville α, e.g. depth=4,growth=exp
    #[arg(long)]
    alpha_liouville: Option<String>,
    /// 53 (f64), 106 (double-double) or up to 1024 (multiprecision)
    #[arg(long = "precision")]
    precision_bits: Option<u32>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long = "res")]
    resolution: Option<usize>,
    #[arg(long)]
    max_iter: Option<u32>,
    /// newton or series
    #[arg(long)]
    inverse: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    ks: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    k_max: Option<u64>,
    #[arg(long)]
    slope_tolerance: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    n_range: Option<String>,
    /// re,im
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    z0: Option<[f64; 2]>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    vertices: Option<usize>,
    /// Sidecar JSON of a rendered compact
    #[arg(long)]
    compact: Option<PathBuf>,
    #[arg(long)]
    convergents: Option<String>,
    /// re,im
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    zn_start: Option<[f64; 2]>,
    #[arg(long)]
    zn_ratio: Option<f64>,
    #[arg(long)]
    zn_count: Option<usize>,
    #[arg(long)]
    ball_constant: Option<f64>,
    #[arg(long)]
    k0: Option<usize>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an iteration-count heatmap
    #[arg(long)]
    heatmap: bool,
}

impl From<Flags> for ExperimentConfig {
    fn from(a: Flags) -> Self {
        ExperimentConfig {
            germ: a.germ,
            germ_file: a.germ_file,
            order: a.order,
            n: a.n,
            alpha_cf: a.alpha_cf,
            alpha_liouville: a.alpha_liouville,
            precision_bits: a.precision_bits,
            radius: a.radius,
            margin: a.margin,
            resolution: a.resolution,
            max_iter: a.max_iter,
            inverse: a.inverse,
            d: a.d,
            radii: a.radii,
            ks: a.ks,
            samples: a.samples,
            k_max: a.k_max,
            slope_tolerance: a.slope_tolerance,
            tol: a.tol,
            n_range: a.n_range,
            z0: a.z0,
            rho: a.rho,
            steps: a.steps,
            vertices: a.vertices,
            compact: a.compact,
            convergents: a.convergents,
            zn_start: a.zn_start,
            zn_ratio: a.zn_ratio,
            zn_count: a.zn_count,
            ball_constant: a.ball_constant,
            k0: a.k0,
            f: a.f,
            g: a.g,
            out: a.out,
            heatmap: a.heatmap.then_some(true),
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let file = cli.config.as_deref();
    let merged = |flags: Flags, defaults: ExperimentConfig| ExperimentConfig::layered(flags.into(), file, &defaults);
    let outcome = match cli.command {
        Command::Render(flags) => commands::render(&merged(flags, commands::render_defaults())?)?,
        Command::Flower(flags) => commands::flower(&merged(flags, commands::flower_defaults())?)?,
        Command::Track(flags) => commands::track(&merged(flags, commands::track_defaults())?)?,
        Command::NormalForm(flags) => commands::normal_form(&merged(flags, commands::normal_form_defaults())?)?,
        Command::Commutator(flags) => commands::commutator(&merged(flags, commands::commutator_defaults())?)?,
        Command::Verify { harness, flags } => {
            let harness: Harness = harness.parse()?;
            let cfg = merged(flags, harness.defaults())?;
            commands::verify(harness, &cfg).with_context(|| format!("verify {}", harness.name()))?
        }
    };
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if outcome.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(EXIT_FAIL, Error::exit_code);
            ExitCode::from(code)
        }
    }
}
