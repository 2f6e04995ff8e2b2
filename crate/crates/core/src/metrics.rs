//! Delivery, detection and energy metrics.

use serde::{Deserialize, Serialize};

use crate::detection::ConfusionMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no runs to aggregate")]
    EmptyInput,
    #[error("run {0} sent no packets")]
    NothingSent(usize),
}

/// A percentage, or `None` when its denominator is zero. Serialized as a
/// number or `null`.
pub type Rate = Option<f64>;

fn pct(num: u64, den: u64) -> Rate {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// Mean of per-run delivery ratios, in percent. `per_run` holds
/// (delivered, sent) pairs.
pub fn compute_pdr(per_run: &[(u64, u64)]) -> Result<f64, MetricsError> {
    if per_run.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sum = 0.0;
    for (i, (x, y)) in per_run.iter().enumerate() {
        if *y == 0 {
            return Err(MetricsError::NothingSent(i));
        }
        sum += *x as f64 / *y as f64;
    }
    Ok(100.0 * sum / per_run.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub dr: Rate,
    pub fp_rate: Rate,
    pub fn_rate: Rate,
}

pub fn compute_rates(c: &ConfusionMatrix) -> Rates {
    let dr = pct(c.tp, c.tp + c.fn_);
    Rates {
        dr,
        fp_rate: pct(c.fp, c.fp + c.tn),
        fn_rate: dr.map(|d| 100.0 - d),
    }
}

/// Mean remaining-over-initial energy, in percent.
pub fn compute_re(fractions: &[f64]) -> f64 {
    if fractions.is_empty() {
        return 100.0;
    }
    100.0 * fractions.iter().sum::<f64>() / fractions.len() as f64
}

/// Outcome of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub n_uavs: usize,
    pub malicious: usize,
    pub sent: u64,
    pub delivered: u64,
    pub confusion: ConfusionMatrix,
    pub re: f64,
    pub comment_requests: u64,
    pub warnings: u64,
    pub agent_handshakes: u64,
    pub agents_lost: u64,
    pub deaths: u64,
    /// Routes installed through or to a node the installer had quarantined.
    pub route_violations: u64,
    pub events: u64,
}

impl RunMetrics {
    pub fn pdr(&self) -> Option<f64> {
        pct(self.delivered, self.sent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub runs: usize,
    pub pdr: Rate,
    pub dr: Rate,
    pub fp_rate: Rate,
    pub fn_rate: Rate,
    pub re: f64,
    pub confusion: ConfusionMatrix,
    pub sent_total: u64,
    pub received_total: u64,
    pub comment_requests: u64,
    pub route_violations: u64,
}

/// Aggregates runs: PDR as the mean of per-run ratios (runs that sent
/// nothing are skipped), rates from the summed confusion matrix, RE as the
/// mean of per-run values.
pub fn aggregate(runs: &[RunMetrics]) -> Result<MetricsReport, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let pairs: Vec<(u64, u64)> = runs.iter().filter(|r| r.sent > 0).map(|r| (r.delivered, r.sent)).collect();
    let pdr = compute_pdr(&pairs).ok();
    let mut confusion = ConfusionMatrix::default();
    for r in runs {
        confusion.add(&r.confusion);
    }
    let rates = compute_rates(&confusion);
    Ok(MetricsReport {
        runs: runs.len(),
        pdr,
        dr: rates.dr,
        fp_rate: rates.fp_rate,
        fn_rate: rates.fn_rate,
        re: runs.iter().map(|r| r.re).sum::<f64>() / runs.len() as f64,
        confusion,
        sent_total: runs.iter().map(|r| r.sent).sum(),
        received_total: runs.iter().map(|r| r.delivered).sum(),
        comment_requests: runs.iter().map(|r| r.comment_requests).sum(),
        route_violations: runs.iter().map(|r| r.route_violations).sum(),
    })
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
