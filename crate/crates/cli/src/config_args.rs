//! `--config key=value` overrides for the solver configuration.

use anyhow::{bail, Context, Result};
use deblur_core::SolverConfig;

/// Applies `key=value` overrides in order, then validates the result.
/// `N` is accepted as an alias for `max_inner`.
pub fn apply_overrides(cfg: &mut SolverConfig, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .with_context(|| format!("expected key=value, got {item:?}"))?;
        match key {
            "gamma" => cfg.gamma = parse(value, key)?,
            "alpha_f" => cfg.alpha_f = parse(value, key)?,
            "alpha_h" => cfg.alpha_h = parse(value, key)?,
            "beta_f" => cfg.beta_f = parse(value, key)?,
            "beta_h" => cfg.beta_h = parse(value, key)?,
            "p" => cfg.p = parse(value, key)?,
            "tol" => cfg.tol = parse(value, key)?,
            "N" | "max_inner" => cfg.max_inner = parse_usize(value, key)?,
            "gamma_growth" => cfg.gamma_growth = parse(value, key)?,
            "pyramid_scale" => cfg.pyramid_scale = parse(value, key)?,
            "min_kernel" => cfg.min_kernel = parse_usize(value, key)?,
            "outer_iters" => cfg.outer_iters = parse_usize(value, key)?,
            other => bail!("unknown config key {other:?}"),
        }
    }
    cfg.validate()?;
    Ok(())
}

/// One `key=value` line per parameter, in a fixed order.
pub fn render(cfg: &SolverConfig) -> String {
    format!(
        "gamma={}\nalpha_f={}\nalpha_h={}\nbeta_f={}\nbeta_h={}\np={}\nN={}\ntol={}\n\
gamma_growth={}\npyramid_scale={}\nmin_kernel={}\nouter_iters={}\n",
        cfg.gamma,
        cfg.alpha_f,
        cfg.alpha_h,
        cfg.beta_f,
        cfg.beta_h,
        cfg.p,
        cfg.max_inner,
        cfg.tol,
        cfg.gamma_growth,
        cfg.pyramid_scale,
        cfg.min_kernel,
        cfg.outer_iters,
    )
}

fn parse(value: &str, key: &str) -> Result<f64> {
    value
        .parse()
        .with_context(|| format!("config key {key} expects a number, got {value:?}"))
}

fn parse_usize(value: &str, key: &str) -> Result<usize> {
    value
        .parse()
        .with_context(|| format!("config key {key} expects an integer, got {value:?}"))
}
