//! The ablation run report.
//!
//! One CSV row per image×kernel×arm, where the arms are the blurred baseline
//! and the three regularizer variants (the four columns of the study), plus
//! one aggregate row per arm carrying the column means. The timing column is
//! last so determinism checks can strip it.

/// Metrics of one restoration arm against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmMetrics {
    pub psnr: f64,
    pub ssim: f64,
    /// Correlation between the estimated and true kernels.
    pub kernel_corr: f64,
}

/// One image×kernel cell of the ablation study.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image_id: String,
    pub kernel_id: String,
    pub psnr_blurred: f64,
    pub ssim_blurred: f64,
    /// first-only, fixed-hybrid, adaptive-hybrid, in that order.
    pub arms: [ArmMetrics; 3],
    pub wall_ms: u128,
}

/// Column means over all cells (wall time excluded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub psnr_blurred: f64,
    pub ssim_blurred: f64,
    pub arms: [ArmMetrics; 3],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str =
    "image,kernel,arm,psnr_blurred,ssim_blurred,psnr_restored,ssim_restored,kernel_corr,wall_ms";

pub const ARM_NAMES: [&str; 4] = ["blurred", "first", "fixed", "adaptive"];

impl RunReport {
    /// Arithmetic means of every metric column.
    pub fn aggregate(&self) -> Aggregate {
        let n = self.rows.len().max(1) as f64;
        let mut agg = Aggregate {
            psnr_blurred: 0.0,
            ssim_blurred: 0.0,
            arms: [ArmMetrics {
                psnr: 0.0,
                ssim: 0.0,
                kernel_corr: 0.0,
            }; 3],
        };
        for row in &self.rows {
            agg.psnr_blurred += row.psnr_blurred;
            agg.ssim_blurred += row.ssim_blurred;
            for (a, r) in agg.arms.iter_mut().zip(row.arms.iter()) {
                a.psnr += r.psnr;
                a.ssim += r.ssim;
                a.kernel_corr += r.kernel_corr;
            }
        }
        agg.psnr_blurred /= n;
        agg.ssim_blurred /= n;
        for a in &mut agg.arms {
            a.psnr /= n;
            a.ssim /= n;
            a.kernel_corr /= n;
        }
        agg
    }

    /// Renders the CSV: four rows per cell, then four aggregate rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&cell_lines(
                &row.image_id,
                &row.kernel_id,
                row.psnr_blurred,
                row.ssim_blurred,
                &row.arms,
                &row.wall_ms.to_string(),
            ));
        }
        let agg = self.aggregate();
        out.push_str(&cell_lines(
            "mean",
            "all",
            agg.psnr_blurred,
            agg.ssim_blurred,
            &agg.arms,
            "-",
        ));
        out
    }
}

fn cell_lines(
    image: &str,
    kernel: &str,
    psnr_blurred: f64,
    ssim_blurred: f64,
    arms: &[ArmMetrics; 3],
    wall: &str,
) -> String {
    let mut out = format!(
        "{image},{kernel},blurred,{psnr_blurred:.4},{ssim_blurred:.4},{psnr_blurred:.4},{ssim_blurred:.4},,{wall}\n"
    );
    for (name, arm) in ARM_NAMES[1..].iter().zip(arms.iter()) {
        out.push_str(&format!(
            "{image},{kernel},{name},{psnr_blurred:.4},{ssim_blurred:.4},{:.4},{:.4},{:.4},{wall}\n",
            arm.psnr, arm.ssim, arm.kernel_corr
        ));
    }
    out
}
