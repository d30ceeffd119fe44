use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deblur_cli::commands::{
    cmd_ablate, cmd_blur, cmd_deblur, cmd_eval, parse_mode, validate_ksize,
};
use deblur_cli::config_args;
use deblur_core::SolverConfig;

const USAGE_EXIT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "deblur",
    version,
    about = "Blind image deblurring: blur synthesis, restoration, metrics, ablation"
)]
struct Cli {
    /// Print the effective solver configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Blur an image with a kernel and add seeded Gaussian noise.
    Blur {
        /// Input image (8-bit grayscale or colour PNG/PGM).
        input: Option<PathBuf>,
        /// Builtin kernel name (delta|box3|gauss5|motion9) or kernel file.
        #[arg(long)]
        kernel: Option<String>,
        /// Noise standard deviation on the [0,1] intensity scale.
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        /// RNG seed; required whenever sigma > 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Output image path (.png or .pgm); the kernel text file lands
        /// alongside it.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Jointly estimate the sharp image and the blur kernel.
    Deblur {
        input: Option<PathBuf>,
        /// Kernel support to estimate (odd, >= 3).
        #[arg(long)]
        ksize: Option<usize>,
        /// Solver overrides, repeatable: --config gamma=2 --config N=5.
        #[arg(long = "config", value_name = "KEY=VALUE")]
        config: Vec<String>,
        /// Run single-scale instead of coarse-to-fine.
        #[arg(long)]
        no_pyramid: bool,
        /// Regularizer arm: first | hybrid | adaptive.
        #[arg(long, default_value = "adaptive")]
        mode: String,
        /// Restored image path; the estimated kernel lands alongside it.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-outer-iteration trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print PSNR and SSIM of a restored image against a reference.
    Eval {
        restored: Option<PathBuf>,
        reference: Option<PathBuf>,
        /// Append a CSV row here as well.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the three-arm ablation study over a corpus directory.
    Ablate {
        /// Directory of ground-truth grayscale images (PNG/PGM).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Comma-separated kernel names or files to blur with.
        #[arg(long)]
        kernels: Option<String>,
        /// Report CSV path.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// RNG seed for the synthetic degradations.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn usage(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(USAGE_EXIT)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    // Assemble the effective configuration first so --print-config works on
    // every subcommand, with overrides applied where they exist.
    let mut cfg = SolverConfig::default();
    if let Some(Command::Deblur { config, .. }) = &cli.command {
        if let Err(err) = config_args::apply_overrides(&mut cfg, config) {
            return Ok(usage(&format!("{err:#}")));
        }
    }
    if cli.print_config {
        print!("{}", config_args::render(&cfg));
        return Ok(ExitCode::SUCCESS);
    }

    let Some(command) = cli.command else {
        return Ok(usage("a subcommand is required; see --help"));
    };

    match command {
        Command::Blur {
            input,
            kernel,
            sigma,
            seed,
            output,
        } => {
            let (Some(input), Some(kernel), Some(output)) = (input, kernel, output) else {
                return Ok(usage("blur requires <INPUT>, --kernel, and --output"));
            };
            if sigma > 0.0 && seed.is_none() {
                return Ok(usage("--seed is required when sigma > 0"));
            }
            let spec = deblur_cli::commands::BlurSpec {
                kernel,
                sigma,
                seed,
            };
            cmd_blur(&input, &spec, &output)?;
        }
        Command::Deblur {
            input,
            ksize,
            config: _,
            no_pyramid,
            mode,
            output,
            trace,
        } => {
            let (Some(input), Some(ksize), Some(output), Some(trace)) =
                (input, ksize, output, trace)
            else {
                return Ok(usage(
                    "deblur requires <INPUT>, --ksize, --output, and --trace",
                ));
            };
            if let Err(err) = validate_ksize(ksize) {
                return Ok(usage(&format!("{err:#}")));
            }
            let mode = match parse_mode(&mode) {
                Ok(m) => m,
                Err(err) => return Ok(usage(&format!("{err:#}"))),
            };
            cmd_deblur(&input, ksize, &cfg, mode, !no_pyramid, &output, &trace)?;
        }
        Command::Eval {
            restored,
            reference,
            csv,
        } => {
            let (Some(restored), Some(reference)) = (restored, reference) else {
                return Ok(usage("eval requires <RESTORED> and <REFERENCE>"));
            };
            cmd_eval(&restored, &reference, csv.as_deref())?;
        }
        Command::Ablate {
            corpus,
            kernels,
            output,
            seed,
        } => {
            let (Some(corpus), Some(kernels), Some(output), Some(seed)) =
                (corpus, kernels, output, seed)
            else {
                return Ok(usage(
                    "ablate requires --corpus, --kernels, --output, and --seed",
                ));
            };
            cmd_ablate(&corpus, &kernels, seed, &cfg, &output)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
