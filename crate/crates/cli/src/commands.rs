//! Implementations behind the four subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use deblur_core::metrics::{psnr, ssim};
use deblur_core::pipeline::{blind_deblur_traced, PipelineOptions, RegularizerMode, TraceRecord};
use deblur_core::spectral::circ_conv;
use deblur_core::synth::add_gaussian_noise;
use deblur_core::SolverConfig;

use crate::ablate::run_ablation;
use crate::io::{read_luminance, write_gray};
use crate::kernels;

/// Where the kernel text file lands for a given image output path.
pub fn kernel_path_for(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("output");
    output.with_file_name(format!("{stem}.kernel.txt"))
}

/// Parameters of one synthetic degradation.
#[derive(Debug, Clone)]
pub struct BlurSpec {
    /// Builtin kernel name or kernel file path.
    pub kernel: String,
    /// Noise standard deviation on the `[0, 1]` scale.
    pub sigma: f64,
    /// RNG seed; required whenever `sigma > 0`.
    pub seed: Option<u64>,
}

pub fn cmd_blur(input: &Path, spec: &BlurSpec, output: &Path) -> Result<()> {
    ensure!(spec.sigma >= 0.0, "sigma must be non-negative");
    let img = read_luminance(input)?;
    let kernel = kernels::resolve(&spec.kernel)?;
    let blurred = circ_conv(&img, &kernel)?;
    let noisy = if spec.sigma > 0.0 {
        let seed = spec.seed.context("--seed is required when sigma > 0")?;
        add_gaussian_noise(&blurred, spec.sigma, seed)
    } else {
        blurred
    };
    write_gray(output, &noisy.clamped01())?;
    kernels::write_kernel_file(&kernel_path_for(output), &kernel)?;
    Ok(())
}

pub fn parse_mode(mode: &str) -> Result<RegularizerMode> {
    match mode {
        "first" => Ok(RegularizerMode::FirstOnly),
        "hybrid" => Ok(RegularizerMode::FixedHybrid),
        "adaptive" => Ok(RegularizerMode::AdaptiveHybrid),
        other => bail!("unknown mode {other:?}; expected first|hybrid|adaptive"),
    }
}

pub const TRACE_HEADER: &str =
    "level,outer,entropy,omega,gamma,f_iterations,h_iterations,surrogate";

fn render_trace_line(rec: &TraceRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        rec.level,
        rec.outer,
        rec.entropy,
        rec.omega,
        rec.gamma,
        rec.f_iterations,
        rec.h_iterations,
        rec.surrogate
    )
}

/// Runs the blind pipeline, streaming the trace to CSV so a divergence still
/// leaves the partial trace on disk. Returns the solver error, if any, after
/// the trace file is closed.
pub fn cmd_deblur(
    input: &Path,
    ksize: usize,
    cfg: &SolverConfig,
    mode: RegularizerMode,
    use_pyramid: bool,
    output: &Path,
    trace_path: &Path,
) -> Result<()> {
    let g = read_luminance(input)?;
    let mut trace_file = fs::File::create(trace_path)
        .with_context(|| format!("creating trace {}", trace_path.display()))?;
    writeln!(trace_file, "{TRACE_HEADER}")?;
    let opts = PipelineOptions { mode, use_pyramid };
    let run = blind_deblur_traced(&g, ksize, cfg, opts, |rec| {
        let _ = trace_file.write_all(render_trace_line(rec).as_bytes());
        let _ = trace_file.flush();
    });
    drop(trace_file);
    let (f, h) = run?;
    write_gray(output, &f)?;
    kernels::write_kernel_file(&kernel_path_for(output), &h)?;
    Ok(())
}

/// Prints PSNR and SSIM (four decimals) and optionally appends a CSV row.
pub fn cmd_eval(restored: &Path, reference: &Path, csv: Option<&Path>) -> Result<()> {
    let a = read_luminance(restored)?;
    let b = read_luminance(reference)?;
    let p = psnr(&a, &b)?;
    let s = ssim(&a, &b)?;
    println!("PSNR {p:.4}");
    println!("SSIM {s:.4}");
    if let Some(path) = csv {
        let mut line = String::new();
        if !path.exists() {
            line.push_str("restored,reference,psnr,ssim\n");
        }
        line.push_str(&format!(
            "{},{},{p:.4},{s:.4}\n",
            restored.display(),
            reference.display()
        ));
        fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .with_context(|| format!("appending to {}", path.display()))?;
    }
    Ok(())
}

/// Loads a corpus directory (PNG/PGM, sorted by file name), runs the three
/// ablation arms per image×kernel, and writes the report CSV.
pub fn cmd_ablate(
    corpus_dir: &Path,
    kernel_list: &str,
    seed: u64,
    cfg: &SolverConfig,
    output: &Path,
) -> Result<()> {
    let mut names: Vec<PathBuf> = fs::read_dir(corpus_dir)
        .with_context(|| format!("reading corpus {}", corpus_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("png") | Some("pgm")
            )
        })
        .collect();
    names.sort();
    let mut corpus = Vec::with_capacity(names.len());
    for path in names {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("image")
            .to_string();
        corpus.push((id, read_luminance(&path)?));
    }
    let mut kernels_resolved = Vec::new();
    for spec in kernel_list.split(',').filter(|s| !s.is_empty()) {
        kernels_resolved.push((spec.to_string(), kernels::resolve(spec)?));
    }
    let report = run_ablation(&corpus, &kernels_resolved, seed, cfg)?;
    fs::write(output, report.to_csv())
        .with_context(|| format!("writing report {}", output.display()))?;
    let agg = report.aggregate();
    println!(
        "mean SSIM: blurred {:.4} | first {:.4} | fixed {:.4} | adaptive {:.4}",
        agg.ssim_blurred, agg.arms[0].ssim, agg.arms[1].ssim, agg.arms[2].ssim
    );
    Ok(())
}

/// Sanity check shared by commands that take a kernel support argument.
pub fn validate_ksize(ksize: usize) -> Result<()> {
    ensure!(
        ksize >= 3 && ksize % 2 == 1,
        "kernel size must be an odd integer >= 3, got {ksize}"
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_path_sits_alongside_output() {
        let p = kernel_path_for(Path::new("/tmp/out/restored.png"));
        assert_eq!(p, Path::new("/tmp/out/restored.kernel.txt"));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(parse_mode("first").unwrap(), RegularizerMode::FirstOnly);
        assert_eq!(parse_mode("hybrid").unwrap(), RegularizerMode::FixedHybrid);
        assert_eq!(
            parse_mode("adaptive").unwrap(),
            RegularizerMode::AdaptiveHybrid
        );
        assert!(parse_mode("other").is_err());
    }

    #[test]
    fn ksize_validation() {
        assert!(validate_ksize(4).is_err());
        assert!(validate_ksize(1).is_err());
        assert!(validate_ksize(9).is_ok());
    }

    #[test]
    fn unknown_kernel_name_fails() {
        let dir = std::env::temp_dir().join(format!("blur-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let img = dir.join("in.png");
        crate::io::write_gray(&img, &deblur_core::Image::filled(16, 16, 0.5)).unwrap();
        let spec = BlurSpec {
            kernel: "nosuchkernel".into(),
            sigma: 0.0,
            seed: None,
        };
        let err = cmd_blur(&img, &spec, &dir.join("out.png"));
        assert!(err.is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
