//! Batch runner for Liouville blow-up experiments.

mod config;
mod jobs;
mod output;
mod svg;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use jobs::{JobReport, Verdict};
use output::{ManifestJob, RunManifest};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const DEFAULT_OUT: &str = "liouville-out";

/// A finished job and the files it wrote.
type WrittenJob = (ManifestJob, Vec<output::FileEntry>);

#[derive(Parser)]
#[command(name = "liouville", version, about = "Run blow-up solution experiments from a TOML config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every job of a config and write CSV, JSON, SVG and a manifest.
    Run {
        config: PathBuf,
        /// Number of jobs run concurrently.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
        /// Output directory; overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarise a finished run directory.
    Report { dir: PathBuf },
    /// Print an annotated config covering every experiment kind.
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, jobs, out } => run(&config, jobs as usize, out),
        Command::Report { dir } => match report(&dir) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Schema => {
            print!("{}", config::SCHEMA);
            ExitCode::SUCCESS
        }
    }
}

fn run(path: &Path, workers: usize, out: Option<PathBuf>) -> ExitCode {
    let loaded = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .and_then(|text| ExperimentConfig::parse(&text).map(|cfg| (text, cfg)));
    let (text, cfg) = match loaded {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    match execute(&cfg, &text, &dir, workers) {
        Ok(manifest) => {
            for j in &manifest.jobs {
                let tag = if j.binding { "" } else { " (advisory)" };
                println!("{:<24} {:<18} {}{tag}", j.name, j.kind, j.verdict.as_str());
            }
            println!("outputs in {}", dir.display());
            if manifest.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn execute(cfg: &ExperimentConfig, text: &str, dir: &Path, workers: usize) -> Result<RunManifest> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let start = Instant::now();
    let mut files = vec![output::write_atomic(dir, output::CONFIG_COPY, text.as_bytes())?];
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<WrittenJob>>>> = Mutex::new((0..cfg.jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.min(cfg.jobs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = cfg.jobs.get(i) else { break };
                let t = Instant::now();
                let out = jobs::run_job(job, cfg.seed.wrapping_add(i as u64));
                let written: Result<Vec<_>> = out.files.iter().map(|(name, bytes)| output::write_atomic(dir, name, bytes)).collect();
                let entry = written.map(|w| {
                    let mj = ManifestJob {
                        name: job.name.clone(),
                        kind: out.report.kind.clone(),
                        binding: out.report.binding,
                        verdict: out.report.verdict,
                        wall_seconds: t.elapsed().as_secs_f64(),
                        files: w.iter().map(|f| f.path.clone()).collect(),
                    };
                    (mj, w)
                });
                slots.lock().unwrap()[i] = Some(entry);
            });
        }
    });
    let mut manifest_jobs = Vec::new();
    let mut first_error = None;
    for slot in slots.into_inner().unwrap() {
        match slot.expect("every job ran") {
            Ok((mj, w)) => {
                manifest_jobs.push(mj);
                files.extend(w);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let pass = first_error.is_none() && manifest_jobs.iter().all(|j| !j.binding || j.verdict == Verdict::Pass);
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: output::sha256_hex(text.as_bytes()),
        seed: cfg.seed,
        pass,
        jobs: manifest_jobs,
        files,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_atomic(dir, output::MANIFEST, &serde_json::to_vec_pretty(&manifest)?)?;
    match first_error {
        Some(e) => Err(e.context("writing job outputs (partial manifest written)")),
        None => Ok(manifest),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn report(dir: &Path) -> Result<()> {
    let manifest = output::read_manifest(dir)?;
    println!("{:<24} {:<18} {:>10} {:>12}  verdict", "job", "kind", "slope", "constant");
    for j in &manifest.jobs {
        let path = dir.join(format!("{}.json", j.name));
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let r: JobReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let verdict = r.verdict.as_str();
        let tag = if r.binding { "" } else { " (advisory)" };
        println!("{:<24} {:<18} {:>10} {:>12}  {verdict}{tag}", r.name, r.kind, fmt_opt(r.slope), fmt_opt(r.constant));
        if let Some(e) = &r.error {
            println!("    error: {e}");
        }
    }
    println!("overall: {}", if manifest.pass { "pass" } else { "fail" });
    Ok(())
}
