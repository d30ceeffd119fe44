//! Builtin test kernels and the plain-text kernel file format.
//!
//! Format: the first whitespace-separated token is the support size `k`, the
//! next `k*k` tokens are the row-major weights (decimal or scientific
//! notation). The parser re-projects onto the non-negative unit-sum set, so
//! hand-edited files come out valid.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use deblur_core::Kernel;

/// Names accepted by `--kernel` besides file paths.
pub const BUILTIN_NAMES: [&str; 4] = ["delta", "box3", "gauss5", "motion9"];

/// A builtin kernel by name:
/// - `delta`: 1×1 identity;
/// - `box3`: 3×3 uniform;
/// - `gauss5`: 5×5 sampled Gaussian with sigma 1, normalized;
/// - `motion9`: 9-pixel horizontal line in a 9×9 support.
pub fn builtin(name: &str) -> Option<Kernel> {
    match name {
        "delta" => Some(Kernel::new(1, vec![1.0]).expect("static kernel")),
        "box3" => Some(Kernel::uniform(3).expect("static kernel")),
        "gauss5" => {
            let sigma = 1.0f64;
            let mut data = Vec::with_capacity(25);
            for y in 0..5 {
                for x in 0..5 {
                    let dy = y as f64 - 2.0;
                    let dx = x as f64 - 2.0;
                    data.push((-(dy * dy + dx * dx) / (2.0 * sigma * sigma)).exp());
                }
            }
            Some(
                Kernel::new(5, data)
                    .expect("static kernel")
                    .project()
                    .expect("positive mass"),
            )
        }
        "motion9" => {
            let mut data = vec![0.0; 81];
            for x in 0..9 {
                data[4 * 9 + x] = 1.0 / 9.0;
            }
            Some(Kernel::new(9, data).expect("static kernel"))
        }
        _ => None,
    }
}

/// Resolves `--kernel` arguments: builtin name first, then file path.
pub fn resolve(spec: &str) -> Result<Kernel> {
    if let Some(k) = builtin(spec) {
        return Ok(k);
    }
    read_kernel_file(Path::new(spec))
}

pub fn read_kernel_file(path: &Path) -> Result<Kernel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading kernel {}", path.display()))?;
    let mut tokens = text.split_whitespace();
    let size: usize = tokens
        .next()
        .context("empty kernel file")?
        .parse()
        .context("kernel size must be an integer")?;
    let mut data = Vec::with_capacity(size * size);
    for _ in 0..size * size {
        let tok = tokens
            .next()
            .with_context(|| format!("kernel file needs {} values", size * size))?;
        data.push(tok.parse::<f64>().context("bad kernel value")?);
    }
    if tokens.next().is_some() {
        bail!("trailing data in kernel file");
    }
    Kernel::new(size, data)?.project().map_err(Into::into)
}

/// Writes the text format; values use Rust's shortest round-trip notation.
pub fn write_kernel_file(path: &Path, kernel: &Kernel) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{}", kernel.size()).expect("string write");
    for row in 0..kernel.size() {
        let line: Vec<String> = (0..kernel.size())
            .map(|col| format!("{}", kernel.get(row, col)))
            .collect();
        writeln!(out, "{}", line.join(" ")).expect("string write");
    }
    std::fs::write(path, out).with_context(|| format!("writing kernel {}", path.display()))
}

/// Support used when estimating this kernel blindly: one pixel of slack on
/// each side of the true support.
pub fn estimation_support(kernel: &Kernel) -> usize {
    kernel.size() + 2
}
