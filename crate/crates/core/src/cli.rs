//! Command-line front end: `run`, `compare` and `sweep`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::baselines::{self, ScenarioId};
use crate::config::{MaliciousSpec, ShadowingMode, SimConfig};
use crate::error::{Error, Result};
use crate::metrics::{self, Format, MetricsBundle};
use crate::radio::Environment;
use crate::sim::SimResult;

#[derive(Debug, Parser)]
#[command(
    name = "wsn-game",
    version,
    about = "Punish-and-forgive defense simulator for clustered sensor networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and export its round log.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "repeated")]
        scenario: String,
    },
    /// Run every scenario on the same seed and join the results.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the repeated game (or `--scenario`) across one parameter axis.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        axis: SweepAxis,
        /// Values for the `n-cms` axis.
        #[arg(long, value_delimiter = ',', default_value = "10,15,20")]
        n_values: Vec<u32>,
        #[arg(long, default_value = "repeated")]
        scenario: String,
        #[arg(long)]
        jobs: Option<usize>,
        /// Skip points whose output already exists.
        #[arg(long)]
        resume: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    Env,
    Doi,
    NCms,
    Isotropy,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "SIM_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long)]
    pub doi_index: Option<u8>,
    #[arg(long, conflicts_with = "non_isotropic")]
    pub isotropic: bool,
    #[arg(long)]
    pub non_isotropic: bool,
    /// Attacker count (`2`) or id list (`3,7`).
    #[arg(long)]
    pub malicious: Option<String>,
    #[arg(long)]
    pub hw_fault_fraction: Option<f64>,
    #[arg(long)]
    pub shadowing: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value = "csv")]
    pub format: String,
}

impl CommonArgs {
    /// Load the config file (if any), apply flag overrides and validate.
    pub fn resolve(&self) -> Result<(SimConfig, Format)> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(env) = &self.env {
            cfg.env = env.clone();
        }
        if let Some(i) = self.doi_index {
            cfg.doi_index = Some(i);
            cfg.doi_value = None;
        }
        if self.isotropic {
            cfg.isotropic = true;
        }
        if self.non_isotropic {
            cfg.isotropic = false;
        }
        if let Some(m) = &self.malicious {
            cfg.malicious = m.parse::<MaliciousSpec>()?;
        }
        if let Some(f) = self.hw_fault_fraction {
            cfg.hw_fault_fraction = f;
        }
        if let Some(s) = &self.shadowing {
            cfg.shadowing = match s.to_ascii_lowercase().as_str() {
                "sampled" => ShadowingMode::Sampled,
                "fixed" => ShadowingMode::Fixed,
                other => return Err(Error::config("shadowing", format!("sampled or fixed, got {other:?}"))),
            };
        }
        cfg.validate()?;
        let format = self.format.parse::<Format>()?;
        Ok((cfg, format))
    }
}

/// Parse arguments, dispatch, and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Run { common, scenario } => cmd_run(&common, &scenario).map(|s| print!("{s}")),
        Command::Compare { common } => cmd_compare(&common).map(|s| print!("{s}")),
        Command::Sweep {
            common,
            axis,
            n_values,
            scenario,
            jobs,
            resume,
        } => cmd_sweep(&common, axis, &n_values, &scenario, jobs, resume).map(|s| print!("{s}")),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn create_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn fmt_hwl(hwl: &[u32]) -> String {
    let ids: Vec<String> = hwl.iter().map(u32::to_string).collect();
    format!("[{}]", ids.join(", "))
}

/// Export the round log and metrics of one result into `dir`. Returns the log path.
fn write_result(result: &SimResult, bundle: &MetricsBundle, format: Format, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(metrics::result_file_name(result, format));
    metrics::export(result, format, &path)?;
    let mut metrics_path = path.clone();
    metrics_path.set_extension("metrics.json");
    metrics::write_bundle_json(bundle, &metrics_path)?;
    Ok(path)
}

fn timed_run(scenario: ScenarioId, cfg: &SimConfig) -> Result<(SimResult, MetricsBundle)> {
    let start = Instant::now();
    let result = baselines::run(scenario, cfg)?;
    let bundle = MetricsBundle::from_result(&result, start.elapsed().as_secs_f64())?;
    Ok((result, bundle))
}

pub fn cmd_run(args: &CommonArgs, scenario: &str) -> Result<String> {
    let (cfg, format) = args.resolve()?;
    let scenario = scenario.parse::<ScenarioId>()?;
    let (result, bundle) = timed_run(scenario, &cfg)?;
    create_out_dir(&args.out)?;
    let path = write_result(&result, &bundle, format, &args.out)?;

    let mut s = String::new();
    let eq = result.equilibrium_round.map_or("none".to_string(), |r| r.to_string());
    let _ = writeln!(s, "scenario: {scenario}");
    let _ = writeln!(s, "equilibrium round: {eq}");
    let _ = writeln!(s, "DT: {:.6}", result.dt()?);
    let _ = writeln!(
        s,
        "final normalized DT: {:.6}",
        bundle.dt_series.last().copied().unwrap_or(0.0)
    );
    let _ = writeln!(s, "HWL: {}", fmt_hwl(&result.hwl));
    let _ = writeln!(s, "wrote {}", path.display());
    Ok(s)
}

pub fn cmd_compare(args: &CommonArgs) -> Result<String> {
    let (cfg, format) = args.resolve()?;
    let runs = ScenarioId::ALL
        .par_iter()
        .map(|&id| timed_run(id, &cfg))
        .collect::<Result<Vec<_>>>()?;
    create_out_dir(&args.out)?;
    for (result, bundle) in &runs {
        write_result(result, bundle, format, &args.out)?;
    }

    let repeated = &runs[0].0;
    let mut table = String::from("scenario,dt,final_norm_dt,packets,lost_power_joules,lost_power_vs_repeated_joules\n");
    for (result, bundle) in &runs {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{}",
            result.scenario,
            result.dt()?,
            bundle.dt_series.last().copied().unwrap_or(0.0),
            bundle.pkt_counts.values().sum::<u64>(),
            bundle.lost_power_joules,
            metrics::lost_power(result, repeated)?,
        );
    }
    let compare_path = args.out.join("compare.csv");
    metrics::write_atomically(&compare_path, |w| {
        std::io::Write::write_all(w, table.as_bytes()).map_err(|e| e.to_string())
    })?;

    let mut series = String::from("rd");
    for (result, _) in &runs {
        let _ = write!(series, ",{}", result.scenario);
    }
    series.push('\n');
    for k in 0..cfg.n_rounds() as usize {
        let _ = write!(series, "{}", k + 1);
        for (_, bundle) in &runs {
            let _ = write!(series, ",{}", bundle.dt_series[k]);
        }
        series.push('\n');
    }
    let series_path = args.out.join("compare_dt.csv");
    metrics::write_atomically(&series_path, |w| {
        std::io::Write::write_all(w, series.as_bytes()).map_err(|e| e.to_string())
    })?;

    Ok(table)
}

/// Configurations of a sweep, each with a short point label.
pub fn sweep_points(base: &SimConfig, axis: SweepAxis, n_values: &[u32]) -> Vec<(String, SimConfig)> {
    match axis {
        SweepAxis::Env => Environment::ALL
            .iter()
            .map(|e| {
                let cfg = SimConfig {
                    env: e.as_str().to_string(),
                    ..base.clone()
                };
                (format!("env_{e}"), cfg)
            })
            .collect(),
        SweepAxis::Doi => (1..=6u8)
            .map(|i| {
                let cfg = SimConfig {
                    doi_index: Some(i),
                    doi_value: None,
                    isotropic: false,
                    ..base.clone()
                };
                (format!("doi_{i}"), cfg)
            })
            .collect(),
        SweepAxis::NCms => n_values
            .iter()
            .map(|&n| {
                let cfg = SimConfig {
                    n_cms: n,
                    c_factor: base.c_factor.max(f64::from(n) + 1.0),
                    ..base.clone()
                };
                (format!("n_{n}"), cfg)
            })
            .collect(),
        SweepAxis::Isotropy => [true, false]
            .into_iter()
            .map(|iso| {
                let cfg = SimConfig {
                    isotropic: iso,
                    ..base.clone()
                };
                (if iso { "isotropic" } else { "non_isotropic" }.to_string(), cfg)
            })
            .collect(),
    }
}

pub fn cmd_sweep(
    args: &CommonArgs,
    axis: SweepAxis,
    n_values: &[u32],
    scenario: &str,
    jobs: Option<usize>,
    resume: bool,
) -> Result<String> {
    let (base, format) = args.resolve()?;
    let scenario = scenario.parse::<ScenarioId>()?;
    let points = sweep_points(&base, axis, n_values);
    for (label, cfg) in &points {
        cfg.validate()
            .map_err(|e| Error::Usage(format!("sweep point {label}: {e}")))?;
    }
    if jobs == Some(0) {
        return Err(Error::Usage("--jobs must be at least 1".into()));
    }
    create_out_dir(&args.out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Usage(e.to_string()))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|(label, cfg)| sweep_point(label, cfg, scenario, format, &args.out, resume))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut summary = String::from(
        "point,env,doi,isotropic,n_cms,mean_norm_dt,final_norm_dt,mean_norm_utility_pct,lost_power_joules,hwl\n",
    );
    for row in rows {
        summary.push_str(&row);
        summary.push('\n');
    }
    let path = args.out.join("summary.csv");
    metrics::write_atomically(&path, |w| {
        std::io::Write::write_all(w, summary.as_bytes()).map_err(|e| e.to_string())
    })?;
    Ok(summary)
}

fn sweep_point(
    label: &str,
    cfg: &SimConfig,
    scenario: ScenarioId,
    format: Format,
    out: &Path,
    resume: bool,
) -> Result<String> {
    let dir = out.join(label);
    let metrics_path = dir.join("metrics.json");
    let bundle = if resume && metrics_path.exists() {
        metrics::read_bundle_json(&metrics_path)?
    } else {
        let (result, bundle) = timed_run(scenario, cfg)?;
        create_out_dir(&dir)?;
        let path = dir.join(metrics::result_file_name(&result, format));
        metrics::export(&result, format, &path)?;
        // Written last: its presence marks the point complete.
        metrics::write_bundle_json(&bundle, &metrics_path)?;
        bundle
    };
    let utils: Vec<f64> = bundle
        .per_cm_norm_utils
        .iter()
        .copied()
        .filter(|u| u.is_finite())
        .collect();
    let mean_util = if utils.is_empty() {
        f64::NAN
    } else {
        utils.iter().sum::<f64>() / utils.len() as f64
    };
    let mean_norm_dt = bundle.dt_series.iter().sum::<f64>() / bundle.dt_series.len().max(1) as f64;
    let hwl: Vec<String> = bundle.hwl.iter().map(u32::to_string).collect();
    Ok(format!(
        "{label},{},{},{},{},{},{},{},{},\"{}\"",
        cfg.env.to_ascii_uppercase(),
        cfg.doi(),
        cfg.isotropic,
        cfg.n_cms,
        mean_norm_dt,
        bundle.dt_series.last().copied().unwrap_or(0.0),
        mean_util,
        bundle.lost_power_joules,
        hwl.join(" "),
    ))
}
