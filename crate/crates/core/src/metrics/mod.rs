//! Lifetime and throughput metrics derived from simulation traces, plus
//! seed-sweep aggregation.

mod export;

use serde::{Deserialize, Serialize};

use crate::engine::SimulationResult;
use crate::protocols::ProtocolKind;

pub use export::{
    read_report_csv, read_trace_csv, write_plot_series, write_report_csv, write_trace_csv,
    PlotSeries, ReportRow, TraceRow, REPORT_HEADER, TRACE_HEADER,
};

/// A round index that may be right-censored at `max_rounds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Censored {
    pub round: u64,
    pub censored: bool,
}

impl Censored {
    pub fn observed(round: u64) -> Self {
        Censored {
            round,
            censored: false,
        }
    }

    pub fn at_horizon(max_rounds: u64) -> Self {
        Censored {
            round: max_rounds,
            censored: true,
        }
    }
}

/// Round of the first node death (FND).
pub fn stability_period(res: &SimulationResult) -> Censored {
    res.rounds
        .iter()
        .find(|t| !t.deaths.is_empty())
        .map_or(Censored::at_horizon(res.config.max_rounds), |t| {
            Censored::observed(t.round)
        })
}

/// Round of the last node death (LND).
pub fn network_lifetime(res: &SimulationResult) -> Censored {
    match res.rounds.last() {
        Some(t) if t.alive == 0 => Censored::observed(t.round),
        _ => Censored::at_horizon(res.config.max_rounds),
    }
}

/// `lnd - fnd`, in rounds.
pub fn unstable_period(res: &SimulationResult) -> u64 {
    network_lifetime(res).round - stability_period(res).round
}

pub fn cumulative_throughput(res: &SimulationResult) -> Vec<u64> {
    res.rounds
        .iter()
        .scan(0u64, |acc, t| {
            *acc += t.packets_to_bs;
            Some(*acc)
        })
        .collect()
}

pub fn chs_per_round(res: &SimulationResult) -> Vec<usize> {
    res.rounds.iter().map(|t| t.ch_ids.len()).collect()
}

pub fn nodes_per_quadrant(res: &SimulationResult) -> Vec<[usize; 4]> {
    res.rounds.iter().map(|t| t.alive_per_quadrant).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub fnd: Censored,
    pub lnd: Censored,
    pub unstable: u64,
    pub total_packets_bs: u64,
}

impl RunSummary {
    pub fn from_result(res: &SimulationResult) -> Self {
        RunSummary {
            protocol: res.config.protocol,
            seed: res.config.seed,
            fnd: stability_period(res),
            lnd: network_lifetime(res),
            unstable: unstable_period(res),
            total_packets_bs: res.total_packets_bs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub median: f64,
}

impl Spread {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        Some(Spread {
            mean: v.iter().sum::<f64>() / n as f64,
            median,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolAggregate {
    pub protocol: ProtocolKind,
    pub runs: usize,
    pub censored_runs: usize,
    pub fnd: Spread,
    pub lnd: Spread,
    pub unstable: Spread,
    pub total_packets_bs: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub fingerprint: String,
    pub seeds: Vec<u64>,
    /// One row per (protocol, seed), protocols in request order, seeds ascending.
    pub runs: Vec<RunSummary>,
    pub aggregates: Vec<ProtocolAggregate>,
}

impl ComparisonReport {
    pub fn new(
        fingerprint: impl Into<String>,
        protocols: &[ProtocolKind],
        seeds: &[u64],
        mut runs: Vec<RunSummary>,
    ) -> Self {
        let rank = |p: ProtocolKind| protocols.iter().position(|&q| q == p).unwrap_or(usize::MAX);
        runs.sort_by_key(|r| (rank(r.protocol), r.seed));
        let aggregates = protocols
            .iter()
            .filter_map(|&p| {
                let rows: Vec<&RunSummary> = runs.iter().filter(|r| r.protocol == p).collect();
                let spread = |f: &dyn Fn(&RunSummary) -> f64| Spread::of(rows.iter().map(|r| f(r)));
                Some(ProtocolAggregate {
                    protocol: p,
                    runs: rows.len(),
                    censored_runs: rows
                        .iter()
                        .filter(|r| r.fnd.censored || r.lnd.censored)
                        .count(),
                    fnd: spread(&|r| r.fnd.round as f64)?,
                    lnd: spread(&|r| r.lnd.round as f64)?,
                    unstable: spread(&|r| r.unstable as f64)?,
                    total_packets_bs: spread(&|r| r.total_packets_bs as f64)?,
                })
            })
            .collect();
        ComparisonReport {
            fingerprint: fingerprint.into(),
            seeds: seeds.to_vec(),
            runs,
            aggregates,
        }
    }

    pub fn aggregate(&self, p: ProtocolKind) -> Option<&ProtocolAggregate> {
        self.aggregates.iter().find(|a| a.protocol == p)
    }

    /// Median stability period, lifetime and throughput per protocol.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:<10}{:>10}{:>10}{:>10}{:>12}\n",
            "protocol", "S.P", "N.L.T", "unstable", "T.P"
        );
        for a in &self.aggregates {
            out.push_str(&format!(
                "{:<10}{:>10}{:>10}{:>10}{:>12}\n",
                a.protocol.name(),
                a.fnd.median,
                a.lnd.median,
                a.unstable.median,
                a.total_packets_bs.median
            ));
        }
        out
    }
}
