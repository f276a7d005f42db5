use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use serde_json::{json, Value};

use msqw::dataset::{load_any, write_raw_binary, write_text};
use msqw::evolver::{write_trace_csv, Walker};
use msqw::exact::{p_inf_nested_with, DegeneracyMode, P_INF_CAP};
use msqw::hardware::{default_alpha, hardware_time, HardwareSchedule};
use msqw::harness::{
    curate_hard, fit_scaling, read_records, summarize, sweep, write_records, Mode, SweepConfig,
};
use msqw::ising::{brute_force_spectrum_with, sk_generate, IsingProblem, DEFAULT_QUBIT_CAP};
use msqw::schedule::build_schedule;
use msqw::stats::{estimate_spread, SpreadMethod, StatsSummary};
use msqw::{Error, Result};

#[derive(Parser)]
#[command(
    name = "msqw",
    version,
    about = "Multi-stage quantum walk simulator for Ising problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV and JSON files
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Monte-Carlo time samples per point
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Comma-separated stage counts
    #[arg(long, global = true)]
    stages: Option<String>,
    /// erf-heuristic, normal-fit, gumbel or exact
    #[arg(long, global = true)]
    spread_method: Option<SpreadMethod>,
    /// short-time-mc or infinite-time
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Qubit cap for 2^n allocations
    #[arg(long, global = true)]
    cap: Option<usize>,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
    fn samples(&self) -> usize {
        self.samples.unwrap_or(100)
    }
    fn stages(&self) -> Result<Vec<usize>> {
        let mut cfg = SweepConfig::default();
        cfg.set("stages", self.stages.as_deref().unwrap_or("1"))?;
        Ok(cfg.stages)
    }
    fn spread_method(&self) -> SpreadMethod {
        self.spread_method.unwrap_or_default()
    }
    fn mode(&self) -> Mode {
        self.mode.unwrap_or_default()
    }
    fn cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_QUBIT_CAP)
    }
}

/// Problem files, or generated SK instances when no files are given.
#[derive(Args, Clone)]
struct Inputs {
    /// Problem files (.json text or .bin/.dat raw matrices)
    files: Vec<PathBuf>,
    /// Qubits for generated instances
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Number of generated instances
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Scale couplings by sqrt(2)
    #[arg(long)]
    scale_sqrt2: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate SK instances
    Gen {
        #[command(flatten)]
        inputs: Inputs,
        /// Write raw binary matrices instead of JSON
        #[arg(long)]
        binary: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force spectra
    Solve {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form spectral statistics and spread estimates
    Stats {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
    },
    /// Heuristic walk schedules
    Schedule {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        common: Common,
    },
    /// Run walks and report success probabilities
    Run {
        #[command(flatten)]
        inputs: Inputs,
        /// Override every hopping rate
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Parameter sweep over (n, m)
    Sweep {
        /// Flat key = value config file
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        hard_gap: Option<f64>,
        #[arg(long)]
        scale_sqrt2: Option<bool>,
        #[arg(long)]
        workers: Option<usize>,
        /// Skip points already present in the output CSV
        #[arg(long)]
        resume: bool,
        /// Append a wall_time column (output no longer reproducible)
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Log-linear scaling fits from a sweep CSV
    Fit {
        csv: PathBuf,
        /// Bootstrap resamples per point
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Graph-energy trace against its quadratic prediction
    Trace {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// End time; defaults to the single-stage driver time
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Infinite-time averaged success probability
    Pinf {
        #[command(flatten)]
        inputs: Inputs,
        /// Dephase degenerate eigenspaces
        #[arg(long)]
        grouped: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Curate small-gap instances
    Curate {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 0.05)]
        gap: f64,
        #[arg(long)]
        scale_sqrt2: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Convert schedules to annealer wall-clock time
    HardwareTime {
        #[command(flatten)]
        inputs: Inputs,
        /// Annealing table with columns s, A, B (GHz)
        #[arg(long)]
        table: PathBuf,
        /// Problem rescale factor; defaults to 2 sqrt(ln n)
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

/// Per-invocation bookkeeping: CSV rows, JSON summary and failures.
struct Report {
    name: &'static str,
    dir: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    summary: serde_json::Map<String, Value>,
    errors: Vec<Value>,
}

impl Report {
    fn new(name: &'static str, dir: &Path, header: &[&str]) -> Self {
        Self {
            name,
            dir: dir.to_path_buf(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: serde_json::Map::new(),
            errors: Vec::new(),
        }
    }

    fn row(&mut self, values: Vec<String>) {
        self.rows.push(values);
    }

    fn fail(&mut self, item: &str, e: &Error) {
        error!("{item}: {e}");
        self.errors
            .push(json!({ "item": item, "error": e.to_string() }));
    }

    fn set(&mut self, key: &str, value: impl serde::Serialize) {
        self.summary.insert(
            key.into(),
            serde_json::to_value(value).expect("serializable"),
        );
    }

    fn finish(mut self, write_csv: bool) -> Result<ExitCode> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        if write_csv {
            let path = self.dir.join(format!("{}.csv", self.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            info!("wrote {}", path.display());
        }
        self.summary.insert("command".into(), json!(self.name));
        self.summary.insert("rows".into(), json!(self.rows.len()));
        self.summary
            .insert("errors".into(), Value::Array(self.errors.clone()));
        let path = self.dir.join(format!("{}.json", self.name));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &Value::Object(self.summary))?;
        info!("wrote {}", path.display());
        Ok(if self.errors.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        })
    }
}

fn load_inputs(inputs: &Inputs, common: &Common, report: &mut Report) -> Vec<IsingProblem> {
    if inputs.files.is_empty() {
        return match sk_generate(inputs.n, common.seed(), inputs.count, inputs.scale_sqrt2) {
            Ok(v) => v,
            Err(e) => {
                report.fail("generate", &e);
                Vec::new()
            }
        };
    }
    let mut out = Vec::new();
    for f in &inputs.files {
        match load_any(f, inputs.scale_sqrt2) {
            Ok(p) => out.push(p),
            Err(e) => report.fail(&f.display().to_string(), &e),
        }
    }
    out
}

fn fmt_indices(idx: &[usize]) -> String {
    idx.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_gen(inputs: Inputs, binary: bool, common: Common) -> Result<ExitCode> {
    let mut report = Report::new("gen", &common.out, &["label", "n", "path"]);
    let dir = common.out.join("problems");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for p in load_inputs(&inputs, &common, &mut report) {
        let path = dir.join(format!(
            "{}.{}",
            p.label(),
            if binary { "bin" } else { "json" }
        ));
        let written = if binary {
            write_raw_binary(&p, &path)
        } else {
            write_text(&p, &path)
        };
        match written {
            Ok(()) => report.row(vec![
                p.label().into(),
                p.n().to_string(),
                path.display().to_string(),
            ]),
            Err(e) => report.fail(p.label(), &e),
        }
    }
    report.set("seed", common.seed());
    report.set("scale_sqrt2", inputs.scale_sqrt2);
    report.finish(true)
}

fn cmd_solve(inputs: Inputs, common: Common) -> Result<ExitCode> {
    let mut report = Report::new(
        "solve",
        &common.out,
        &[
            "label",
            "n",
            "e_min",
            "e_max",
            "min_gap",
            "ground_count",
            "ground_indices",
        ],
    );
    for p in load_inputs(&inputs, &common, &mut report) {
        match brute_force_spectrum_with(&p, common.cap(), false) {
            Ok(s) => report.row(vec![
                p.label().into(),
                p.n().to_string(),
                s.e_min.to_string(),
                s.e_max.to_string(),
                s.min_gap.to_string(),
                s.ground_indices.len().to_string(),
                fmt_indices(&s.ground_indices),
            ]),
            Err(e) => report.fail(p.label(), &e),
        }
    }
    report.finish(true)
}

fn cmd_stats(inputs: Inputs, common: Common) -> Result<ExitCode> {
    let methods = [
        SpreadMethod::ErfHeuristic,
        SpreadMethod::NormalFit,
        SpreadMethod::Gumbel,
    ];
    let mut header = vec!["label", "n", "m2", "m3", "m4", "m5", "delta_sq", "kurtosis"];
    header.extend(methods.iter().map(|m| m.as_str()));
    let mut report = Report::new("stats", &common.out, &header);
    for p in load_inputs(&inputs, &common, &mut report) {
        let s = StatsSummary::compute(&p);
        let mut row = vec![
            p.label().into(),
            p.n().to_string(),
            s.m2.to_string(),
            s.m3.to_string(),
            s.m4.to_string(),
            s.m5.to_string(),
            s.delta_sq.to_string(),
            s.kurtosis().to_string(),
        ];
        for &m in &methods {
            match estimate_spread(&p, m) {
                Ok(e) => row.push(e.value.to_string()),
                Err(e) => {
                    report.fail(p.label(), &e);
                    row.push(String::new());
                }
            }
        }
        report.row(row);
    }
    report.finish(true)
}

fn cmd_schedule(inputs: Inputs, common: Common) -> Result<ExitCode> {
    let mut report = Report::new(
        "schedule",
        &common.out,
        &["label", "m", "k", "gamma", "time", "delta_e"],
    );
    let stages = common.stages()?;
    let mut schedules = Vec::new();
    for p in load_inputs(&inputs, &common, &mut report) {
        for &m in &stages {
            match build_schedule(&p, m, common.spread_method()) {
                Ok(s) => {
                    let gammas = s.gammas();
                    for (k, st) in s.stages.iter().enumerate() {
                        let de = msqw::schedule::delta_e(&gammas, s.n, k + 1)?;
                        report.row(vec![
                            p.label().into(),
                            m.to_string(),
                            (k + 1).to_string(),
                            st.gamma.to_string(),
                            st.time.to_string(),
                            de.to_string(),
                        ]);
                    }
                    schedules.push(json!({ "label": p.label(), "schedule": s }));
                }
                Err(e) => report.fail(p.label(), &e),
            }
        }
    }
    report.set("schedules", schedules);
    report.finish(true)
}

fn cmd_run(inputs: Inputs, gamma: Option<f64>, common: Common) -> Result<ExitCode> {
    let mut report = Report::new(
        "run",
        &common.out,
        &[
            "label",
            "n",
            "m",
            "mode",
            "success_prob",
            "stderr",
            "samples",
            "max_norm_drift",
        ],
    );
    let stages = common.stages()?;
    for p in load_inputs(&inputs, &common, &mut report) {
        let walker = match common.mode() {
            Mode::ShortTimeMc => match Walker::with_cap(&p, common.cap()) {
                Ok(w) => Some(w),
                Err(e) => {
                    report.fail(p.label(), &e);
                    continue;
                }
            },
            Mode::InfiniteTime => None,
        };
        for &m in &stages {
            let result = build_schedule(&p, m, common.spread_method()).and_then(|mut s| {
                if let Some(g) = gamma {
                    s = s.with_gamma(g);
                }
                match &walker {
                    Some(w) => {
                        let r = w.mc_short_time_average(&s, common.samples(), common.seed())?;
                        Ok((r.success_prob, r.stderr, r.samples, r.max_norm_drift))
                    }
                    None => {
                        let cap = common.cap().min(P_INF_CAP);
                        let r = p_inf_nested_with(&p, &s.gammas(), DegeneracyMode::Ungrouped, cap)?;
                        Ok((r.value, 0.0, 0, 0.0))
                    }
                }
            });
            match result {
                Ok((prob, se, k, drift)) => report.row(vec![
                    p.label().into(),
                    p.n().to_string(),
                    m.to_string(),
                    common.mode().to_string(),
                    prob.to_string(),
                    se.to_string(),
                    k.to_string(),
                    drift.to_string(),
                ]),
                Err(e) => report.fail(&format!("{} m={m}", p.label()), &e),
            }
        }
    }
    report.set("seed", common.seed());
    report.set("spread_method", common.spread_method());
    report.finish(true)
}

fn cmd_sweep(
    config: Option<PathBuf>,
    overrides: Vec<(&str, Option<String>)>,
    resume: bool,
    timing: bool,
    common: Common,
) -> Result<ExitCode> {
    let mut cfg = SweepConfig::default();
    if let Some(path) = &config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_text(&text)?;
    }
    let common_overrides = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("samples", common.samples.map(|v| v.to_string())),
        ("stages", common.stages.clone()),
        ("spread-method", common.spread_method.map(|v| v.to_string())),
        ("mode", common.mode.map(|v| v.to_string())),
        ("cap", common.cap.map(|v| v.to_string())),
    ];
    for (key, value) in overrides.into_iter().chain(common_overrides) {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    let path = common.out.join("sweep.csv");
    let existing = if resume && path.exists() {
        read_records(File::open(&path).map_err(|e| Error::io(&path, e))?)?
    } else {
        Vec::new()
    };
    let mut report = Report::new("sweep", &common.out, &[]);
    report.set("config", &cfg);
    match sweep(&cfg, &existing) {
        Ok(records) => {
            fs::create_dir_all(&common.out).map_err(|e| Error::io(&common.out, e))?;
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_records(&records, BufWriter::new(file), timing)?;
            info!("wrote {} records to {}", records.len(), path.display());
            report.set("records", records.len());
            report.set("resumed_from", existing.len());
            report.set("points", summarize(&records, 1000, cfg.seed)?);
            if let Ok(fits) = fit_scaling(&records) {
                report.set("fits", fits);
            }
        }
        Err(e) => report.fail("sweep", &e),
    }
    report.finish(false)
}

fn cmd_fit(csv_path: PathBuf, resamples: usize, common: Common) -> Result<ExitCode> {
    let records = read_records(File::open(&csv_path).map_err(|e| Error::io(&csv_path, e))?)?;
    let mut report = Report::new(
        "fit",
        &common.out,
        &["m", "a", "b", "a_stderr", "b_stderr", "r2", "points"],
    );
    let points = summarize(&records, resamples, common.seed())?;
    match fit_scaling(&records) {
        Ok(fits) => {
            for f in &fits {
                report.row(vec![
                    f.m.to_string(),
                    f.a.to_string(),
                    f.b.to_string(),
                    f.a_stderr.to_string(),
                    f.b_stderr.to_string(),
                    f.r2.to_string(),
                    f.points.to_string(),
                ]);
            }
            report.set("fits", fits);
        }
        Err(e) => report.fail("fit", &e),
    }
    report.set("points", points);
    report.finish(true)
}

fn cmd_trace(
    inputs: Inputs,
    gamma: f64,
    t_max: Option<f64>,
    steps: usize,
    common: Common,
) -> Result<ExitCode> {
    let mut report = Report::new("trace", &common.out, &[]);
    fs::create_dir_all(&common.out).map_err(|e| Error::io(&common.out, e))?;
    let mut files = Vec::new();
    for p in load_inputs(&inputs, &common, &mut report) {
        let result = (|| -> Result<PathBuf> {
            let walker = Walker::with_cap(&p, common.cap())?;
            let t_max = match t_max {
                Some(t) => t,
                None => build_schedule(&p, 1, common.spread_method())?.stages[0].time,
            };
            let trace = walker.graph_energy_trace(gamma, t_max, steps)?;
            let path = common.out.join(format!("trace-{}.csv", p.label()));
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_trace_csv(&trace, BufWriter::new(file))?;
            Ok(path)
        })();
        match result {
            Ok(path) => files.push(path.display().to_string()),
            Err(e) => report.fail(p.label(), &e),
        }
    }
    report.set("gamma", gamma);
    report.set("files", files);
    report.finish(false)
}

fn cmd_pinf(inputs: Inputs, grouped: bool, common: Common) -> Result<ExitCode> {
    let mut report = Report::new(
        "pinf",
        &common.out,
        &["label", "n", "m", "p_inf", "degenerate_stages", "grouped"],
    );
    let mode = if grouped {
        DegeneracyMode::Grouped
    } else {
        DegeneracyMode::Ungrouped
    };
    let stages = common.stages()?;
    for p in load_inputs(&inputs, &common, &mut report) {
        for &m in &stages {
            let result = build_schedule(&p, m, common.spread_method()).and_then(|s| {
                p_inf_nested_with(&p, &s.gammas(), mode, common.cap().min(P_INF_CAP))
            });
            match result {
                Ok(r) => report.row(vec![
                    p.label().into(),
                    p.n().to_string(),
                    m.to_string(),
                    r.value.to_string(),
                    fmt_indices(&r.degenerate_stages),
                    r.grouped.to_string(),
                ]),
                Err(e) => report.fail(&format!("{} m={m}", p.label()), &e),
            }
        }
    }
    report.finish(true)
}

fn cmd_curate(
    n: usize,
    count: usize,
    gap: f64,
    scale_sqrt2: bool,
    common: Common,
) -> Result<ExitCode> {
    let mut report = Report::new("curate", &common.out, &["label", "n", "min_gap", "path"]);
    match curate_hard(n, count, gap, common.seed(), scale_sqrt2) {
        Ok(c) => {
            let dir = common.out.join("problems");
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            for (p, g) in c.problems.iter().zip(&c.gaps) {
                let path = dir.join(format!("{}.json", p.label()));
                write_text(p, &path)?;
                report.row(vec![
                    p.label().into(),
                    n.to_string(),
                    g.to_string(),
                    path.display().to_string(),
                ]);
            }
            report.set("attempts", c.attempts);
            report.set("acceptance_rate", c.acceptance_rate);
        }
        Err(e) => report.fail("curate", &e),
    }
    report.set("gap_threshold", gap);
    report.finish(true)
}

fn cmd_hardware(
    inputs: Inputs,
    table: PathBuf,
    alpha: Option<f64>,
    common: Common,
) -> Result<ExitCode> {
    let hw = HardwareSchedule::read(&table)?;
    let mut report = Report::new(
        "hardware-time",
        &common.out,
        &["label", "m", "k", "s", "a_ghz", "ns", "total_ns", "alpha"],
    );
    let stages = common.stages()?;
    for p in load_inputs(&inputs, &common, &mut report) {
        let alpha = alpha.unwrap_or_else(|| default_alpha(p.n()));
        for &m in &stages {
            let result = build_schedule(&p, m, common.spread_method())
                .and_then(|s| hardware_time(&s, &hw, alpha));
            match result {
                Ok(t) => {
                    for (k, st) in t.stages.iter().enumerate() {
                        report.row(vec![
                            p.label().into(),
                            m.to_string(),
                            (k + 1).to_string(),
                            st.s.to_string(),
                            st.a_ghz.to_string(),
                            st.ns.to_string(),
                            t.total_ns.to_string(),
                            t.alpha.to_string(),
                        ]);
                    }
                }
                Err(e) => report.fail(&format!("{} m={m}", p.label()), &e),
            }
        }
    }
    report.finish(true)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen {
            inputs,
            binary,
            common,
        } => cmd_gen(inputs, binary, common),
        Command::Solve { inputs, common } => cmd_solve(inputs, common),
        Command::Stats { inputs, common } => cmd_stats(inputs, common),
        Command::Schedule { inputs, common } => cmd_schedule(inputs, common),
        Command::Run {
            inputs,
            gamma,
            common,
        } => cmd_run(inputs, gamma, common),
        Command::Sweep {
            config,
            n_min,
            n_max,
            instances,
            gamma,
            hard_gap,
            scale_sqrt2,
            workers,
            resume,
            timing,
            common,
        } => {
            let overrides = vec![
                ("n-min", n_min.map(|v| v.to_string())),
                ("n-max", n_max.map(|v| v.to_string())),
                ("instances", instances.map(|v| v.to_string())),
                ("gamma", gamma.map(|v| v.to_string())),
                ("hard-gap", hard_gap.map(|v| v.to_string())),
                ("scale-sqrt2", scale_sqrt2.map(|v| v.to_string())),
                ("workers", workers.map(|v| v.to_string())),
            ];
            cmd_sweep(config, overrides, resume, timing, common)
        }
        Command::Fit {
            csv,
            resamples,
            common,
        } => cmd_fit(csv, resamples, common),
        Command::Trace {
            inputs,
            gamma,
            t_max,
            steps,
            common,
        } => cmd_trace(inputs, gamma, t_max, steps, common),
        Command::Pinf {
            inputs,
            grouped,
            common,
        } => cmd_pinf(inputs, grouped, common),
        Command::Curate {
            n,
            count,
            gap,
            scale_sqrt2,
            common,
        } => cmd_curate(n, count, gap, scale_sqrt2, common),
        Command::HardwareTime {
            inputs,
            table,
            alpha,
            common,
        } => cmd_hardware(inputs, table, alpha, common),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}
