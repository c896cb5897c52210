//! Quantitative summaries of a price series: deviation from fundamentals,
//! bubble peak and drawdown, oscillation magnitude, and post-shock
//! convergence. All functions are pure.

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("window is empty")]
    EmptyWindow,
    #[error("window {start}..{end} out of bounds for series of length {len}")]
    WindowOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("series is empty")]
    EmptySeries,
}

/// Knobs for the summary statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsConfig {
    /// First price index of the deviation window (runs to the end).
    pub deviation_start: usize,
    /// Trailing window for the oscillation standard deviation.
    pub oscillation_window: usize,
    /// Drawdown at or above this fraction counts as a crash.
    pub crash_drawdown: f64,
    /// Relative tolerance for post-shock convergence.
    pub convergence_tolerance: f64,
    /// Rounds the series must stay within tolerance to count as converged.
    pub convergence_sustain: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            deviation_start: 100,
            oscillation_window: 500,
            crash_drawdown: 0.20,
            convergence_tolerance: 0.05,
            convergence_sustain: 50,
        }
    }
}

/// Mean of `|price - fundamental| / fundamental` over `window`, against the
/// time-varying fundamental schedule.
pub fn mean_abs_rel_deviation(
    series: &[f64],
    fundamental: &[f64],
    window: Range<usize>,
) -> Result<f64, MetricsError> {
    if window.is_empty() {
        return Err(MetricsError::EmptyWindow);
    }
    let len = series.len().min(fundamental.len());
    if window.end > len {
        return Err(MetricsError::WindowOutOfBounds {
            start: window.start,
            end: window.end,
            len,
        });
    }
    let count = window.len();
    let sum: f64 = window
        .map(|i| (series[i] - fundamental[i]).abs() / fundamental[i])
        .sum();
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakDrawdown {
    /// Index of the global maximum (earliest on ties).
    pub peak_index: usize,
    pub peak_price: f64,
    /// Largest relative fall from the peak over the rest of the series.
    pub max_drawdown: f64,
}

/// Global maximum of the series and the deepest relative trough after it.
pub fn peak_and_drawdown(series: &[f64]) -> Result<PeakDrawdown, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let mut peak_index = 0;
    for (i, &value) in series.iter().enumerate() {
        if value > series[peak_index] {
            peak_index = i;
        }
    }
    let peak_price = series[peak_index];
    let mut max_drawdown: f64 = 0.0;
    for &value in &series[peak_index..] {
        max_drawdown = max_drawdown.max((peak_price - value) / peak_price);
    }
    Ok(PeakDrawdown {
        peak_index,
        peak_price,
        max_drawdown,
    })
}

/// Population standard deviation over the trailing `window` values.
pub fn oscillation_magnitude(series: &[f64], window: usize) -> Result<f64, MetricsError> {
    if window == 0 {
        return Err(MetricsError::EmptyWindow);
    }
    if window > series.len() {
        return Err(MetricsError::WindowOutOfBounds {
            start: series.len() - series.len().min(window),
            end: series.len(),
            len: series.len(),
        });
    }
    let tail = &series[series.len() - window..];
    let mean = tail.iter().sum::<f64>() / window as f64;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / window as f64;
    Ok(var.sqrt())
}

/// First index `t >= shock_round` such that the series stays within
/// `tolerance` (relative) of `new_fundamental` for `sustain` consecutive
/// indices. `None` when that never happens (a sustain window must fit
/// entirely inside the series).
pub fn convergence_time(
    series: &[f64],
    shock_round: usize,
    new_fundamental: f64,
    tolerance: f64,
    sustain: usize,
) -> Option<usize> {
    let sustain = sustain.max(1);
    if shock_round >= series.len() {
        return None;
    }
    let within =
        |price: f64| (price - new_fundamental).abs() / new_fundamental <= tolerance;
    let mut run_start = None;
    for (i, &price) in series.iter().enumerate().skip(shock_round) {
        if within(price) {
            let start = *run_start.get_or_insert(i);
            if i + 1 - start >= sustain {
                return Some(start);
            }
        } else {
            run_start = None;
        }
    }
    None
}

/// All per-series statistics gathered into one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesStats {
    pub mean_abs_rel_dev: f64,
    pub peak_round: usize,
    pub peak_price: f64,
    pub max_drawdown: f64,
    pub osc_std: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_round: Option<usize>,
}

/// Compute the full stats record for one run.
///
/// Windows are clamped to short series so the convenience call is total;
/// convergence is measured against the first shock, if any.
pub fn series_stats(
    series: &[f64],
    fundamental: &[f64],
    first_shock: Option<(usize, f64)>,
    config: &MetricsConfig,
) -> Result<SeriesStats, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::EmptySeries);
    }
    let dev_start = config.deviation_start.min(series.len() - 1);
    let mean_abs_rel_dev = mean_abs_rel_deviation(series, fundamental, dev_start..series.len())?;
    let peak = peak_and_drawdown(series)?;
    let osc_std = oscillation_magnitude(series, config.oscillation_window.min(series.len()))?;
    let convergence_round = first_shock.and_then(|(round, value)| {
        convergence_time(
            series,
            round,
            value,
            config.convergence_tolerance,
            config.convergence_sustain,
        )
    });
    Ok(SeriesStats {
        mean_abs_rel_dev,
        peak_round: peak.peak_index,
        peak_price: peak.peak_price,
        max_drawdown: peak.max_drawdown,
        osc_std,
        convergence_round,
    })
}
