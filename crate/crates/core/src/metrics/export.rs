use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ComparisonReport, RunSummary};
use crate::engine::RoundTrace;
use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 11] = [
    "round",
    "alive",
    "n_chs",
    "packets_to_bs",
    "packets_to_chs",
    "energy_remaining_j",
    "alive_q1",
    "alive_q2",
    "alive_q3",
    "alive_q4",
    "deaths",
];

pub const REPORT_HEADER: [&str; 8] = [
    "protocol",
    "seed",
    "fnd",
    "fnd_censored",
    "lnd",
    "lnd_censored",
    "unstable",
    "total_packets_bs",
];

/// One trace CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: u64,
    pub alive: usize,
    pub n_chs: usize,
    pub packets_to_bs: u64,
    pub packets_to_chs: u64,
    pub energy_remaining_j: f64,
    pub alive_q1: usize,
    pub alive_q2: usize,
    pub alive_q3: usize,
    pub alive_q4: usize,
    /// Semicolon-joined ids of nodes that died this round.
    pub deaths: String,
}

impl From<&RoundTrace> for TraceRow {
    fn from(t: &RoundTrace) -> Self {
        let [q1, q2, q3, q4] = t.alive_per_quadrant;
        TraceRow {
            round: t.round,
            alive: t.alive,
            n_chs: t.ch_ids.len(),
            packets_to_bs: t.packets_to_bs,
            packets_to_chs: t.packets_to_chs,
            energy_remaining_j: t.energy_remaining,
            alive_q1: q1,
            alive_q2: q2,
            alive_q3: q3,
            alive_q4: q4,
            deaths: t
                .deaths
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

impl TraceRow {
    pub fn death_ids(&self) -> Vec<usize> {
        self.deaths
            .split(';')
            .filter(|s| !s.is_empty())
            .filter_map(|s| s.parse().ok())
            .collect()
    }
}

/// One report CSV row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub protocol: String,
    pub seed: u64,
    pub fnd: u64,
    pub fnd_censored: bool,
    pub lnd: u64,
    pub lnd_censored: bool,
    pub unstable: u64,
    pub total_packets_bs: u64,
}

impl From<&RunSummary> for ReportRow {
    fn from(r: &RunSummary) -> Self {
        ReportRow {
            protocol: r.protocol.name().to_string(),
            seed: r.seed,
            fnd: r.fnd.round,
            fnd_censored: r.fnd.censored,
            lnd: r.lnd.round,
            lnd_censored: r.lnd.censored,
            unstable: r.unstable,
            total_packets_bs: r.total_packets_bs,
        }
    }
}

fn write_rows<T: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(path, e)))
        .collect()
}

pub fn write_trace_csv(path: impl AsRef<Path>, rounds: &[RoundTrace]) -> Result<()> {
    write_rows(
        path.as_ref(),
        &TRACE_HEADER,
        rounds.iter().map(TraceRow::from),
    )
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    read_rows(path.as_ref())
}

pub fn write_report_csv(path: impl AsRef<Path>, report: &ComparisonReport) -> Result<()> {
    write_rows(
        path.as_ref(),
        &REPORT_HEADER,
        report.runs.iter().map(ReportRow::from),
    )
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    read_rows(path.as_ref())
}

/// A two-column `x y` series for an external plotting tool.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(String, f64)>,
}

impl PlotSeries {
    pub fn numeric(
        title: &str,
        x_label: &str,
        y_label: &str,
        points: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        PlotSeries {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points: points
                .into_iter()
                .map(|(x, y)| (x.to_string(), y))
                .collect(),
        }
    }
}

/// Writes `# `-prefixed metadata lines followed by whitespace-separated `x y` rows.
pub fn write_plot_series(
    path: impl AsRef<Path>,
    series: &PlotSeries,
    fingerprint: &str,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "# {}", series.title).map_err(io)?;
    writeln!(w, "# manifest {fingerprint}").map_err(io)?;
    writeln!(w, "# {} {}", series.x_label, series.y_label).map_err(io)?;
    for (x, y) in &series.points {
        writeln!(w, "{x} {y}").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_simulation, SimulationConfig};
    use crate::metrics::{Censored, ComparisonReport, RunSummary};
    use crate::protocols::ProtocolKind;
    use proptest::prelude::*;

    fn sample_trace(round: u64, energy: f64, deaths: Vec<usize>) -> RoundTrace {
        RoundTrace {
            round,
            alive: 7,
            ch_ids: vec![1, 4],
            packets_to_bs: 3,
            packets_to_chs: 5,
            energy_remaining: energy,
            alive_per_quadrant: [1, 2, 3, 1],
            deaths,
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace_csv(&path, &[]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{}\n", TRACE_HEADER.join(",")));
        assert!(read_trace_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn trace_row_count_is_rounds_plus_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rounds: Vec<_> = (0..2900)
            .map(|r| sample_trace(r, 1.0 / (r + 1) as f64, vec![]))
            .collect();
        write_trace_csv(&path, &rounds).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap().lines().count(),
            2901
        );
    }

    #[test]
    fn simulated_trace_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let res = run_simulation(&SimulationConfig {
            max_rounds: 400,
            seed: 5,
            ..SimulationConfig::default()
        })
        .unwrap();
        write_trace_csv(&path, &res.rounds).unwrap();
        let back = read_trace_csv(&path).unwrap();
        let expected: Vec<TraceRow> = res.rounds.iter().map(TraceRow::from).collect();
        assert_eq!(back, expected);
        for (row, t) in back.iter().zip(&res.rounds) {
            assert_eq!(row.death_ids(), t.deaths);
        }
    }

    #[test]
    fn report_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let runs = vec![
            RunSummary {
                protocol: ProtocolKind::QLeach,
                seed: 3,
                fnd: Censored::observed(10),
                lnd: Censored::at_horizon(50),
                unstable: 40,
                total_packets_bs: 99,
            },
            RunSummary {
                protocol: ProtocolKind::Leach,
                seed: 3,
                fnd: Censored::observed(5),
                lnd: Censored::observed(20),
                unstable: 15,
                total_packets_bs: 12,
            },
        ];
        let report = ComparisonReport::new(
            "x",
            &[ProtocolKind::QLeach, ProtocolKind::Leach],
            &[3],
            runs,
        );
        write_report_csv(&path, &report).unwrap();
        let back = read_report_csv(&path).unwrap();
        assert_eq!(
            back,
            report.runs.iter().map(ReportRow::from).collect::<Vec<_>>()
        );
        assert!(std::fs::read_to_string(&path)
            .unwrap()
            .starts_with(&REPORT_HEADER.join(",")));
    }

    #[test]
    fn unwritable_path_reports_path() {
        let err = write_trace_csv("/nonexistent-dir/x/t.csv", &[]).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x/t.csv"));
        assert!(!err.is_config());
    }

    #[test]
    fn plot_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.dat");
        let s = PlotSeries::numeric("alive", "round", "alive", [(0.0, 100.0), (1.0, 99.0)]);
        write_plot_series(&path, &s, "abc").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "# alive\n# manifest abc\n# round alive\n0 100\n1 99\n"
        );
    }

    proptest! {
        #[test]
        fn energy_survives_csv(energies in proptest::collection::vec(0.0f64..1e3, 1..40),
                               deaths in proptest::collection::vec(0usize..1000, 0..5)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("t.csv");
            let rounds: Vec<_> = energies.iter().enumerate()
                .map(|(i, &e)| sample_trace(i as u64, e, deaths.clone()))
                .collect();
            write_trace_csv(&path, &rounds).unwrap();
            let back = read_trace_csv(&path).unwrap();
            for (row, t) in back.iter().zip(&rounds) {
                let rel = (row.energy_remaining_j - t.energy_remaining).abs() / t.energy_remaining.abs().max(f64::MIN_POSITIVE);
                prop_assert!(rel <= 1e-12);
                prop_assert_eq!(row.death_ids(), t.deaths.clone());
                prop_assert_eq!(row.round, t.round);
            }
        }
    }
}
