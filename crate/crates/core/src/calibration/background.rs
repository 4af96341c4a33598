//! Per-pixel background level from the late, signal-free end of a histogram.

/// Share of trailing bins treated as background.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;

fn tail(hist: &[f64], fraction: f64) -> &[f64] {
    let n = ((hist.len() as f64 * fraction).floor() as usize).clamp(1, hist.len().max(1));
    &hist[hist.len().saturating_sub(n)..]
}

/// Median of the last `fraction` of bins (at least one bin).
pub fn tail_median(hist: &[f64], fraction: f64) -> f64 {
    if hist.is_empty() {
        return 0.0;
    }
    let mut t = tail(hist, fraction).to_vec();
    t.sort_by(f64::total_cmp);
    let n = t.len();
    if n % 2 == 1 {
        t[n / 2]
    } else {
        0.5 * (t[n / 2 - 1] + t[n / 2])
    }
}

pub fn tail_mean(hist: &[f64], fraction: f64) -> f64 {
    if hist.is_empty() {
        return 0.0;
    }
    let t = tail(hist, fraction);
    t.iter().sum::<f64>() / t.len() as f64
}
