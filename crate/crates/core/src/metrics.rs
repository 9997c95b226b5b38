//! Reported metrics and result serialization.
//!
//! CSV holds one row per `(round, member)` and is the diff-friendly regression
//! format. JSON-lines holds one full [`RoundRecord`] per line and round-trips
//! losslessly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::ScenarioId;
use crate::error::{Error, Result};
use crate::game::ChAction;
use crate::sim::{equilibrium_round, Designation, RoundRecord, SimResult};

pub const CSV_HEADER: [&str; 10] = [
    "rd",
    "cm_id",
    "ch_action",
    "cm_action",
    "forwarded",
    "rl",
    "xi_joules",
    "utility",
    "norm_utility",
    "energy_j",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::Jsonl),
            other => Err(Error::Usage(format!("unknown format {other:?}, expected csv or jsonl"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub scenario: ScenarioId,
    /// Per-round DT divided by the per-round optimum, in [0, 1].
    pub dt_series: Vec<f64>,
    /// Mean normalized utility of each member over its post-forgiveness rounds, in percent.
    pub per_cm_norm_utils: Vec<f64>,
    /// Acknowledged packets delivered, keyed by scenario name.
    pub pkt_counts: BTreeMap<String, u64>,
    pub lost_power_joules: f64,
    pub equilibrium_round: Option<u32>,
    /// Members on the hardware-failure list at the end of the run.
    pub hwl: Vec<u32>,
    pub wall_clock_seconds: f64,
}

impl MetricsBundle {
    pub fn from_result(result: &SimResult, wall_clock_seconds: f64) -> Result<Self> {
        Self::from_records(result.scenario, &result.rounds, wall_clock_seconds)
    }

    /// Derive every metric from the round log alone.
    pub fn from_records(scenario: ScenarioId, rounds: &[RoundRecord], wall_clock_seconds: f64) -> Result<Self> {
        let raw: Vec<f64> = rounds.iter().map(|r| r.dt_round).collect();
        let optimum: Vec<f64> = rounds.iter().map(|r| r.dt_optimum).collect();
        let dt_series = normalize_dt(&raw, &optimum)?;

        let n = rounds.first().map_or(0, |r| r.cms.len());
        let per_cm_norm_utils = (0..n)
            .map(|k| {
                let post: Vec<f64> = rounds
                    .iter()
                    .filter(|r| r.cms[k].post_equilibrium)
                    .map(|r| r.cms[k].norm_utility)
                    .collect();
                if post.is_empty() {
                    f64::NAN
                } else {
                    100.0 * post.iter().sum::<f64>() / post.len() as f64
                }
            })
            .collect();

        let mut pkt_counts = BTreeMap::new();
        pkt_counts.insert(scenario.as_str().to_string(), acknowledged_packets(rounds));

        let hwl: BTreeSet<u32> = rounds
            .last()
            .map(|r| {
                r.cms
                    .iter()
                    .filter(|c| c.designation == Designation::Hwl)
                    .map(|c| c.cm_id)
                    .collect()
            })
            .unwrap_or_default();

        Ok(Self {
            scenario,
            dt_series,
            per_cm_norm_utils,
            pkt_counts,
            lost_power_joules: rounds.iter().flat_map(|r| &r.cms).map(|c| c.wasted_j).sum(),
            equilibrium_round: equilibrium_round(rounds, &hwl),
            hwl: hwl.into_iter().collect(),
            wall_clock_seconds,
        })
    }
}

/// Packets delivered in windows the cluster head acknowledged with a beacon,
/// counting at most one window per member per round.
pub fn acknowledged_packets(rounds: &[RoundRecord]) -> u64 {
    rounds
        .iter()
        .flat_map(|r| r.cms.iter().map(move |c| (r.tp, c)))
        .filter(|(_, c)| c.ch_action == ChAction::Beacon)
        .map(|(tp, c)| u64::from(c.forwarded.min(tp)))
        .sum()
}

/// Element-wise `raw / optimum`, clamped to [0, 1].
pub fn normalize_dt(raw: &[f64], optimum: &[f64]) -> Result<Vec<f64>> {
    if raw.len() != optimum.len() {
        return Err(Error::Usage(format!(
            "series lengths differ: {} vs {}",
            raw.len(),
            optimum.len()
        )));
    }
    raw.iter()
        .zip(optimum)
        .map(|(&r, &o)| {
            if !(o > 0.0) {
                Err(Error::Domain(format!("optimum DT {o} is not positive")))
            } else {
                Ok((r / o).clamp(0.0, 1.0))
            }
        })
        .collect()
}

/// Extra energy wasted by `result` relative to `reference` on retransmissions,
/// denied sleep and undelivered or duplicated packets.
pub fn lost_power(result: &SimResult, reference: &SimResult) -> Result<f64> {
    if result.config != reference.config {
        return Err(Error::Usage(
            "lost power compares runs of the same configuration and seed".into(),
        ));
    }
    Ok(result.total_wasted_j() - reference.total_wasted_j())
}

/// `<scenario>_<env>_<doi-label>_<seed>.<ext>`
pub fn result_file_name(result: &SimResult, format: Format) -> String {
    let c = &result.config;
    format!(
        "{}_{}_{}_{}.{}",
        result.scenario,
        c.env.to_ascii_uppercase(),
        c.doi_label(),
        c.seed,
        format.extension()
    )
}

pub fn export(result: &SimResult, format: Format, path: &Path) -> Result<()> {
    write_atomically(path, |w| match format {
        Format::Csv => write_csv(&result.rounds, w),
        Format::Jsonl => write_jsonl(&result.rounds, w),
    })
}

pub fn write_bundle_json(bundle: &MetricsBundle, path: &Path) -> Result<()> {
    write_atomically(path, |w| {
        serde_json::to_writer_pretty(&mut *w, bundle).map_err(|e| e.to_string())?;
        w.write_all(b"\n").map_err(|e| e.to_string())
    })
}

pub fn read_bundle_json(path: &Path) -> Result<MetricsBundle> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn import_jsonl(path: &Path) -> Result<Vec<RoundRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RoundRecord = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", lineno + 1),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub(crate) fn write_atomically<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::result::Result<(), String>,
{
    let tmp = tmp_path(path);
    let file = File::create(&tmp).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let outcome = body(&mut w).and_then(|_| w.flush().map_err(|e| e.to_string()));
    drop(w);
    if let Err(message) = outcome {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::Format {
            path: path.to_path_buf(),
            message,
        });
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".part");
    path.with_file_name(name)
}

fn write_csv<W: Write>(rounds: &[RoundRecord], w: W) -> std::result::Result<(), String> {
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    csv.write_record(CSV_HEADER).map_err(|e| e.to_string())?;
    for r in rounds {
        for c in &r.cms {
            csv.write_record([
                r.rd.to_string(),
                c.cm_id.to_string(),
                c.ch_action.to_string(),
                c.cm_action.to_string(),
                c.forwarded.to_string(),
                c.rl.to_string(),
                c.xi_joules.to_string(),
                c.utility.to_string(),
                format!("{:.4}", 100.0 * c.norm_utility),
                c.energy_j.to_string(),
            ])
            .map_err(|e| e.to_string())?;
        }
    }
    csv.flush().map_err(|e| e.to_string())
}

fn write_jsonl<W: Write>(rounds: &[RoundRecord], mut w: W) -> std::result::Result<(), String> {
    for r in rounds {
        serde_json::to_writer(&mut w, r).map_err(|e| e.to_string())?;
        w.write_all(b"\n").map_err(|e| e.to_string())?;
    }
    Ok(())
}
