//! Exports: per-round CSV series, the trade ledger, and the JSON summary.
//!
//! Builders return `String`s so the same bytes can be written to disk or
//! compared in tests; identical inputs always produce identical bytes.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::metrics::{series_stats, MetricsConfig, SeriesStats};
use crate::sim::{ScenarioConfig, SimulationResult};

/// Per-round series: one row per auction round.
pub fn series_csv(result: &SimulationResult) -> String {
    let mut out = String::from(
        "round,avg_price,n_trades,buy_offers,sell_offers,idles,exuberant,comfort,panic\n",
    );
    for report in &result.reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            report.round,
            report.avg_price,
            report.trades.len(),
            report.buy_offers,
            report.sell_offers,
            report.idles,
            report.regime_counts.exuberant,
            report.regime_counts.comfort,
            report.regime_counts.panic,
        ));
    }
    out
}

/// Full trade ledger of a run.
pub fn trades_csv(result: &SimulationResult) -> String {
    let mut out = String::from("round,buyer,seller,price,aggressor\n");
    for trade in result.trades() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            trade.round,
            trade.buyer,
            trade.seller,
            trade.price,
            trade.aggressor.as_str(),
        ));
    }
    out
}

/// Write `contents` to `path`; a partially written file is removed on error.
pub fn write_text_file(path: &Path, contents: &str) -> io::Result<()> {
    if let Err(err) = fs::write(path, contents) {
        let _ = fs::remove_file(path);
        return Err(err);
    }
    Ok(())
}

/// One run's record inside a summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
    pub stats: SeriesStats,
    pub crash: bool,
    pub final_price: f64,
    pub total_trades: usize,
}

/// Aggregates over a set of runs.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateStats {
    pub runs: usize,
    pub mean_abs_rel_dev_mean: f64,
    pub mean_abs_rel_dev_median: f64,
    pub peak_price_mean: f64,
    pub max_drawdown_mean: f64,
    pub osc_std_mean: f64,
    pub crash_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_round_mean: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepGroup {
    pub value: f64,
    pub seeds: Vec<u64>,
    pub aggregate: AggregateStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSection {
    pub param: String,
    pub groups: Vec<SweepGroup>,
}

/// The structured summary emitted next to the CSV series.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    /// The base configuration (per-run seeds are listed separately).
    pub config: ScenarioConfig,
    pub metrics_config: MetricsConfig,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunRecord>,
    pub aggregate: AggregateStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("metrics are never NaN"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Build one run record, measuring statistics against the run's own shock
/// schedule.
pub fn run_record(
    result: &SimulationResult,
    metrics: &MetricsConfig,
    sweep_value: Option<f64>,
) -> RunRecord {
    let fundamental = result.config.fundamental_schedule(result.prices.len());
    let first_shock = result
        .config
        .shocks
        .first()
        .map(|s| (s.round as usize, s.new_fundamental));
    let stats = series_stats(&result.prices, &fundamental, first_shock, metrics)
        .expect("a finished run always has a non-empty price series");
    RunRecord {
        seed: result.config.seed,
        sweep_value,
        stats,
        crash: stats.max_drawdown >= metrics.crash_drawdown,
        final_price: result.final_price(),
        total_trades: result.trade_count(),
    }
}

fn aggregate(records: &[RunRecord], with_convergence: bool) -> AggregateStats {
    assert!(!records.is_empty(), "aggregate needs at least one run");
    let n = records.len() as f64;
    let mut devs: Vec<f64> = records.iter().map(|r| r.stats.mean_abs_rel_dev).collect();
    let converged: Vec<usize> = records
        .iter()
        .filter_map(|r| r.stats.convergence_round)
        .collect();
    AggregateStats {
        runs: records.len(),
        mean_abs_rel_dev_mean: devs.iter().sum::<f64>() / n,
        mean_abs_rel_dev_median: median(&mut devs),
        peak_price_mean: records.iter().map(|r| r.stats.peak_price).sum::<f64>() / n,
        max_drawdown_mean: records.iter().map(|r| r.stats.max_drawdown).sum::<f64>() / n,
        osc_std_mean: records.iter().map(|r| r.stats.osc_std).sum::<f64>() / n,
        crash_fraction: records.iter().filter(|r| r.crash).count() as f64 / n,
        converged_fraction: with_convergence.then(|| converged.len() as f64 / n),
        convergence_round_mean: (with_convergence && !converged.is_empty())
            .then(|| converged.iter().sum::<usize>() as f64 / converged.len() as f64),
    }
}

/// Summary for a plain run or seed batch over one configuration.
pub fn build_summary(
    base: &ScenarioConfig,
    results: &[SimulationResult],
    metrics: &MetricsConfig,
) -> Summary {
    assert!(!results.is_empty(), "summary needs at least one run");
    let records: Vec<RunRecord> = results.iter().map(|r| run_record(r, metrics, None)).collect();
    let with_convergence = !base.shocks.is_empty();
    let aggregate = aggregate(&records, with_convergence);
    Summary {
        config: base.clone(),
        metrics_config: *metrics,
        seeds: results.iter().map(|r| r.config.seed).collect(),
        runs: records,
        aggregate,
        sweep: None,
    }
}

/// Summary for a parameter sweep: `groups` pairs each swept value with its
/// runs, in sweep order.
pub fn build_sweep_summary(
    base: &ScenarioConfig,
    param: &str,
    groups: &[(f64, Vec<SimulationResult>)],
    metrics: &MetricsConfig,
) -> Summary {
    assert!(!groups.is_empty(), "sweep needs at least one value");
    let with_convergence = !base.shocks.is_empty();
    let mut runs = Vec::new();
    let mut sweep_groups = Vec::new();
    for (value, results) in groups {
        let records: Vec<RunRecord> = results
            .iter()
            .map(|r| run_record(r, metrics, Some(*value)))
            .collect();
        sweep_groups.push(SweepGroup {
            value: *value,
            seeds: results.iter().map(|r| r.config.seed).collect(),
            aggregate: aggregate(&records, with_convergence),
        });
        runs.extend(records);
    }
    let overall = aggregate(&runs, with_convergence);
    let seeds = groups
        .first()
        .map(|(_, results)| results.iter().map(|r| r.config.seed).collect())
        .unwrap_or_default();
    Summary {
        config: base.clone(),
        metrics_config: *metrics,
        seeds,
        runs,
        aggregate: overall,
        sweep: Some(SweepSection {
            param: param.to_string(),
            groups: sweep_groups,
        }),
    }
}

/// Pretty JSON plus a trailing newline.
pub fn summary_json(summary: &Summary) -> String {
    let mut text =
        serde_json::to_string_pretty(summary).expect("summary types serialize infallibly");
    text.push('\n');
    text
}
