use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sauav_core::config::ScenarioConfig;
use sauav_core::metrics::aggregate;
use sauav_core::sim::run_scenario;
use sauav_core::sweep::{runs_csv, sweep, sweep_csv, sweep_dat, Axis};
use sauav_core::trace::{read_ndjson, to_ndjson};
use sauav_core::verify::verify;

#[derive(Parser)]
#[command(name = "sauav", version, about = "UAV network trust and intrusion detection simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write the NDJSON event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Repeat a scenario over several values of one axis.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: Axis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        repeats: u32,
        /// Directory for sweep.csv, sweep.dat and runs.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a trace's metrics and audit its handshakes and routes.
    Verify {
        trace: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Radio range in metres.
    #[arg(long)]
    range: Option<f64>,
    #[arg(long)]
    defense: Option<OnOff>,
    /// Print a single JSON document instead of text.
    #[arg(long)]
    json: bool,
}

impl Common {
    fn load(&self, path: &Path) -> Result<ScenarioConfig, String> {
        let mut cfg = ScenarioConfig::load(path).map_err(|e| e.to_string())?;
        if let Some(s) = self.seed {
            cfg.scenario.seed = s;
        }
        if let Some(r) = self.range {
            cfg.radio.range_m = r;
        }
        if let Some(d) = self.defense {
            cfg.scenario.defense = matches!(d, OnOff::On);
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn fmt_rate(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}%"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

enum Failure {
    Config(String),
    Other(String),
}

fn other(e: impl ToString) -> Failure {
    Failure::Other(e.to_string())
}

fn dispatch(cmd: Cmd) -> Result<ExitCode, Failure> {
    match cmd {
        Cmd::Run { config, common, trace } => {
            let cfg = common.load(&config).map_err(Failure::Config)?;
            let out = run_scenario(&cfg, trace.is_some()).map_err(other)?;
            if let Some(p) = trace {
                fs::write(&p, to_ndjson(&out.trace)).map_err(other)?;
            }
            let report = aggregate(std::slice::from_ref(&out.metrics)).map_err(other)?;
            if common.json {
                let doc = serde_json::json!({ "run": out.metrics, "report": report });
                println!("{}", serde_json::to_string_pretty(&doc).map_err(other)?);
            } else {
                let m = &out.metrics;
                println!("seed {}  uavs {}  malicious {}  defense {}", m.seed, m.n_uavs, m.malicious, cfg.scenario.defense);
                println!("pdr {}  ({} / {})", fmt_rate(report.pdr), m.delivered, m.sent);
                println!("dr {}  fp {}  fn {}", fmt_rate(report.dr), fmt_rate(report.fp_rate), fmt_rate(report.fn_rate));
                println!("re {:.2}%", m.re);
                println!(
                    "comment requests {}  warnings {}  handshakes {}  route violations {}",
                    m.comment_requests, m.warnings, m.agent_handshakes, m.route_violations
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep {
            config,
            common,
            axis,
            values,
            repeats,
            out,
        } => {
            let cfg = common.load(&config).map_err(Failure::Config)?;
            if repeats == 0 {
                return Err(Failure::Config("--repeats must be at least 1".into()));
            }
            for v in &values {
                axis.apply(&cfg, *v).validate().map_err(|e| Failure::Config(e.to_string()))?;
            }
            let table = sweep(&cfg, axis, &values, repeats).map_err(other)?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(other)?;
                let runs: Vec<_> = table.rows.iter().flat_map(|r| r.runs.iter().cloned()).collect();
                fs::write(dir.join("sweep.csv"), sweep_csv(&table)).map_err(other)?;
                fs::write(dir.join("sweep.dat"), sweep_dat(&table)).map_err(other)?;
                fs::write(dir.join("runs.csv"), runs_csv(&runs)).map_err(other)?;
            }
            if common.json {
                println!("{}", serde_json::to_string_pretty(&table).map_err(other)?);
            } else {
                print!("{}", sweep_csv(&table));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { trace, json } => {
            let f = fs::File::open(&trace).map_err(|e| Failure::Other(format!("{}: {e}", trace.display())))?;
            let records = read_ndjson(BufReader::new(f)).map_err(other)?;
            let report = verify(&records);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(other)?);
            } else {
                let r = &report.recomputed;
                println!("records {}", report.records);
                println!("pdr {}  dr {}  fp {}  fn {}  re {}", fmt_rate(r.pdr), fmt_rate(r.dr), fmt_rate(r.fp_rate), fmt_rate(r.fn_rate), fmt_rate(r.re));
                println!("handshakes checked {}  issues {}", report.handshakes_checked, report.handshake_issues.len());
                println!("route violations {}  clock regressions {}", report.route_violations.len(), report.clock_regressions);
                for m in &report.mismatches {
                    println!("mismatch: {m}");
                }
                println!("{}", if report.ok { "OK" } else { "FAILED" });
            }
            Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
