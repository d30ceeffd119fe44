//! Command-line harness around the deblurring library: blur synthesis,
//! blind restoration, metric evaluation, and ablation reports.

pub mod ablate;
pub mod commands;
pub mod config_args;
pub mod io;
pub mod kernels;
pub mod report;
