//! Batch experiment driver behind the `npolar` binary.
//!
//! Parameters come from, in increasing precedence: built-in defaults, a
//! `key=value` config file, trailing `key=value` arguments, and the named
//! flags. Every key is parsed and checked before any computation starts.
//! Output files are written to a temporary sibling and renamed into place,
//! so a failed run never leaves a partial artifact behind.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rand::Rng;
use thiserror::Error;

use crate::channels::{RngStream, GENERATOR};
use crate::construction::{bec_reliability, mc_reliability, select_info_set, select_secure_subset, ChannelSpec};
use crate::gf2::{vec_mat_mul, BitVector};
use crate::index_set::IndexSet;
use crate::polar::{generator_matrix, polar_transform, CodeParams};
use crate::relay::{
    build_relay_scheme, build_relay_scheme_for_budget, build_relay_scheme_for_target, simulate_relay,
    RelayChannelSpec,
};
use crate::wiretap::{
    equivocation_bruteforce, equivocation_rank, parity_checks, run_wiretap_experiment, write_sweep_csv,
    NestedCodeSpec, WiretapConfig,
};

/// Version of the CSV layouts written by this driver.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Command {
    /// Bit-channel reliability profile.
    Construct,
    /// Eve's equivocation rate over a range of erasure probabilities.
    WiretapSweep,
    /// Block-Markov relay simulation.
    RelaySim,
    /// The N = 1024, R = 0.25, e_m = 0.25, e_w = 0.5 sweep with a plot script.
    Fig1,
    /// Oracle-equivalence checks on small codes.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::WiretapSweep => "wiretap-sweep",
            Command::RelaySim => "relay-sim",
            Command::Fig1 => "fig1",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "npolar", version, about = "Nested polar code experiments on erasure channels")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// File of `key=value` lines; `#` starts a comment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<String>,
    /// Parameter overrides such as `n=12` or `e_w=0.4`.
    #[arg(value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidKey { key: String, reason: String },
    #[error("unknown key `{key}` for command {command}")]
    UnknownKey { key: String, command: &'static str },
    #[error("{source_name}: line {line}: expected key=value")]
    Syntax { source_name: String, line: usize },
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Run(String),
    #[error("selftest failed: {0}")]
    SelftestFailed(String),
}

fn invalid(key: &str, reason: impl ToString) -> CliError {
    CliError::InvalidKey { key: key.to_string(), reason: reason.to_string() }
}

fn run_error(e: impl ToString) -> CliError {
    CliError::Run(e.to_string())
}

/// How the relay sets are sized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelayDesign {
    Margin(f64),
    /// Per-stage union-bound budget.
    Budget(f64),
    /// End-to-end union-bound target, split over all stage decodings.
    Target(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Construct { n: u32, channel: ChannelSpec, trials: u64, seed: u64 },
    WiretapSweep { config: WiretapConfig, sweep: Vec<f64> },
    Fig1 { config: WiretapConfig, sweep: Vec<f64> },
    RelaySim { spec: RelayChannelSpec, n: u32, blocks: usize, design: RelayDesign, trials: u64, seed: u64 },
    Selftest,
}

/// A fully validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub experiment: Experiment,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Every parameter value in effect, defaults included.
    pub settings: BTreeMap<String, String>,
}

/// Parses `key=value` lines, skipping blanks and `#` comments.
pub fn parse_config_text(text: &str, source_name: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Syntax { source_name: source_name.to_string(), line: idx + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Syntax { source_name: source_name.to_string(), line: idx + 1 });
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok(pairs)
}

fn allowed_keys(command: Command) -> &'static [&'static str] {
    match command {
        Command::Construct => &["n", "channel", "eps", "p", "trials", "seed", "out", "threads"],
        Command::WiretapSweep => &[
            "n", "rate", "e_m", "e_w", "sweep_start", "sweep_stop", "sweep_step", "trials", "seed", "out", "threads",
        ],
        Command::Fig1 => &["trials", "seed", "out", "threads"],
        Command::RelaySim => &[
            "n", "blocks", "e_sr", "e_sd", "e_deg", "e_rd", "margin", "budget", "target", "trials", "seed", "out",
            "threads",
        ],
        Command::Selftest => &["threads"],
    }
}

/// Typed access to the merged raw values; records what was used.
struct Params {
    raw: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl Params {
    fn has(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    fn get<T>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T: std::str::FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        let value = match self.raw.get(key) {
            Some(s) => s.parse::<T>().map_err(|e| invalid(key, format!("`{s}`: {e}")))?,
            None => default,
        };
        self.used.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    fn prob(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let p = self.get(key, default)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(key, format!("{p} outside [0, 1]")));
        }
        Ok(p)
    }

    fn positive_u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        let v = self.get(key, default)?;
        if v == 0 {
            return Err(invalid(key, "must be positive"));
        }
        Ok(v)
    }

    fn log_len(&mut self, default: u32) -> Result<u32, CliError> {
        let n = self.get("n", default)?;
        CodeParams::new(n).map_err(|e| invalid("n", e))?;
        Ok(n)
    }
}

/// Evenly spaced points from `start` to `stop` inclusive.
pub fn sweep_points(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("sweep_step", "must be positive"));
    }
    if stop.is_nan() || stop < start {
        return Err(invalid("sweep_stop", "must be at least sweep_start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // rounding keeps the printed grid free of accumulated float noise
    Ok((0..count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

fn validate_wiretap(config: &WiretapConfig, sweep: &[f64]) -> Result<(), CliError> {
    config.validate().map_err(|e| match e {
        crate::wiretap::WiretapError::InvalidConfig { key, reason } => invalid(key, reason),
        other => run_error(other),
    })?;
    if let Some(&e) = sweep.iter().find(|&&e| !(0.0..=1.0).contains(&e)) {
        return Err(invalid("sweep_start", format!("sweep point {e} outside [0, 1]")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let mut raw = BTreeMap::new();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
            raw.extend(parse_config_text(&text, &path.display().to_string())?);
        }
        for o in &args.overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| invalid(o, "expected key=value"))?;
            raw.insert(k.trim().to_string(), v.trim().to_string());
        }
        let flags = [("seed", &args.seed), ("trials", &args.trials), ("threads", &args.threads)];
        for (k, v) in flags {
            if let Some(v) = v {
                raw.insert(k.to_string(), v.clone());
            }
        }
        if let Some(out) = &args.out {
            raw.insert("out".to_string(), out.display().to_string());
        }
        Self::from_pairs(args.command, raw)
    }

    pub fn from_pairs(command: Command, raw: BTreeMap<String, String>) -> Result<Self, CliError> {
        let allowed = allowed_keys(command);
        if let Some(key) = raw.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::UnknownKey { key: key.clone(), command: command.name() });
        }
        let out = raw.get("out").map(PathBuf::from);
        let threads = match raw.get("threads") {
            Some(s) => match s.parse::<usize>() {
                Ok(t) if t > 0 => Some(t),
                _ => return Err(invalid("threads", format!("`{s}` is not a positive integer"))),
            },
            None => None,
        };
        let mut p = Params { raw, used: BTreeMap::new() };

        let experiment = match command {
            Command::Construct => {
                let n = p.log_len(10)?;
                let kind: String = p.get("channel", "bec".to_string())?;
                let channel = match kind.as_str() {
                    "bec" => {
                        if p.has("p") {
                            return Err(invalid("p", "only used with channel=bsc"));
                        }
                        ChannelSpec::Bec(p.prob("eps", 0.5)?)
                    }
                    "bsc" => {
                        if p.has("eps") {
                            return Err(invalid("eps", "only used with channel=bec"));
                        }
                        let q = p.get("p", 0.11)?;
                        ChannelSpec::bsc(q).map_err(|e| invalid("p", e))?
                    }
                    other => return Err(invalid("channel", format!("`{other}`: expected bec or bsc"))),
                };
                let (trials, seed) = match channel {
                    ChannelSpec::Bsc(_) => (p.positive_u64("trials", 10_000)?, p.get("seed", 1u64)?),
                    ChannelSpec::Bec(_) => (0, 0),
                };
                Experiment::Construct { n, channel, trials, seed }
            }
            Command::WiretapSweep | Command::Fig1 => {
                let trials = p.positive_u64("trials", 1000)?;
                let seed = p.get("seed", 7u64)?;
                let (config, sweep) = if command == Command::Fig1 {
                    (WiretapConfig::fig1(trials, seed), sweep_points(0.26, 0.50, 0.02)?)
                } else {
                    let config = WiretapConfig {
                        n: p.log_len(10)?,
                        rate: p.get("rate", 0.25)?,
                        e_m: p.get("e_m", 0.25)?,
                        e_w: p.get("e_w", 0.5)?,
                        trials,
                        seed,
                    };
                    let sweep = sweep_points(
                        p.get("sweep_start", 0.26)?,
                        p.get("sweep_stop", 0.5)?,
                        p.get("sweep_step", 0.02)?,
                    )?;
                    (config, sweep)
                };
                validate_wiretap(&config, &sweep)?;
                if command == Command::Fig1 {
                    Experiment::Fig1 { config, sweep }
                } else {
                    Experiment::WiretapSweep { config, sweep }
                }
            }
            Command::RelaySim => {
                let n = p.log_len(13)?;
                let blocks = p.positive_u64("blocks", 8)? as usize;
                let e_sr = p.prob("e_sr", 0.1)?;
                let e_rd = p.prob("e_rd", 0.5)?;
                let spec = match (p.has("e_sd"), p.has("e_deg")) {
                    (true, true) => return Err(invalid("e_deg", "give either e_sd or e_deg, not both")),
                    (false, true) => RelayChannelSpec::new(e_sr, p.prob("e_deg", 0.0)?, e_rd),
                    _ => RelayChannelSpec::from_direct(e_sr, p.prob("e_sd", 0.5)?, e_rd),
                }
                .map_err(|e| invalid(if p.has("e_deg") { "e_deg" } else { "e_sd" }, e))?;
                let chosen: Vec<&str> = ["margin", "budget", "target"].into_iter().filter(|k| p.has(k)).collect();
                let design = match chosen.as_slice() {
                    [] | ["target"] => {
                        let t: f64 = p.get("target", 0.05)?;
                        if !(t >= 0.0 && t.is_finite()) {
                            return Err(invalid("target", "must be finite and >= 0"));
                        }
                        RelayDesign::Target(t)
                    }
                    ["margin"] => {
                        let m = p.get("margin", 1.0)?;
                        if !(m > 0.0 && m <= 1.0) {
                            return Err(invalid("margin", "must lie in (0, 1]"));
                        }
                        RelayDesign::Margin(m)
                    }
                    ["budget"] => {
                        let b: f64 = p.get("budget", 0.01)?;
                        if !(b >= 0.0 && b.is_finite()) {
                            return Err(invalid("budget", "must be finite and >= 0"));
                        }
                        RelayDesign::Budget(b)
                    }
                    _ => return Err(invalid(chosen[1], "give only one of margin, budget, target")),
                };
                let trials = p.positive_u64("trials", 200)?;
                let seed = p.get("seed", 1u64)?;
                Experiment::RelaySim { spec, n, blocks, design, trials, seed }
            }
            Command::Selftest => Experiment::Selftest,
        };
        Ok(ExperimentConfig { command, experiment, out, threads, settings: p.used })
    }

    /// `# npolar <version> schema=<v> command=<c> generator=<g> key=value ...`
    pub fn header_line(&self) -> String {
        let mut line = format!(
            "# npolar {} schema={} command={} generator={}",
            env!("CARGO_PKG_VERSION"),
            SCHEMA_VERSION,
            self.command.name(),
            GENERATOR
        );
        for (k, v) in &self.settings {
            let _ = write!(line, " {k}={v}");
        }
        line
    }
}

/// An output file plus its contents.
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub contents: Vec<u8>,
}

/// Result of a run: artifacts to write and a human-readable summary.
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
}

fn csv_with_header(config: &ExperimentConfig, body: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", config.header_line())?;
    body(&mut buf)?;
    Ok(buf)
}

/// Gnuplot script drawing the sweep against its upper bound.
pub fn fig1_plot_script(csv_name: &str, png_name: &str) -> String {
    format!(
        "# npolar {ver} equivocation plot\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output '{png_name}'\n\
         set xlabel 'wiretap erasure probability e_w'\n\
         set ylabel 'equivocation rate'\n\
         set key bottom right\n\
         set key autotitle columnhead\n\
         set grid\n\
         plot '{csv_name}' using 1:2 with linespoints title 'nested polar code', \\\n\
         \x20    '{csv_name}' using 1:3 with lines dashtype 2 title 'min(R, e_w - e_m)'\n",
        ver = env!("CARGO_PKG_VERSION"),
    )
}

/// Performs the computation without touching the filesystem.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    match &config.experiment {
        Experiment::Construct { n, channel, trials, seed } => {
            let profile = match *channel {
                ChannelSpec::Bec(e) => bec_reliability(*n, e),
                other => mc_reliability(other, *n, *trials, *seed),
            }
            .map_err(run_error)?;
            let contents = csv_with_header(config, |w| profile.write_csv(w))?;
            let summary = format!("{} bit channels, mean z = {:.6}", profile.z().len(), profile.mean());
            Ok(RunOutput { artifacts: vec![Artifact { path: config.out.clone(), contents }], summary })
        }
        Experiment::WiretapSweep { config: wt, sweep } | Experiment::Fig1 { config: wt, sweep } => {
            let reports = run_wiretap_experiment(wt, sweep).map_err(run_error)?;
            let contents = csv_with_header(config, |w| write_sweep_csv(&reports, w))?;
            let last = reports.last().expect("sweep is non-empty");
            let summary = format!(
                "{} points, |A|={} |B|={}, equivocation {:.5} at e_w={} (bound {:.5})",
                reports.len(),
                last.a_size,
                last.b_size,
                last.mean_equivocation_rate,
                last.e_w,
                last.upper_bound
            );
            let mut artifacts = Vec::new();
            if config.command == Command::Fig1 {
                let csv_path = config.out.clone().unwrap_or_else(|| PathBuf::from("fig1.csv"));
                let script_path = csv_path.with_extension("gp");
                let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let script = fig1_plot_script(&name(&csv_path), &name(&csv_path.with_extension("png")));
                artifacts.push(Artifact { path: Some(csv_path), contents });
                artifacts.push(Artifact { path: Some(script_path), contents: script.into_bytes() });
            } else {
                artifacts.push(Artifact { path: config.out.clone(), contents });
            }
            Ok(RunOutput { artifacts, summary })
        }
        Experiment::RelaySim { spec, n, blocks, design, trials, seed } => {
            let scheme = match *design {
                RelayDesign::Margin(m) => build_relay_scheme(spec, *n, *blocks, m),
                RelayDesign::Budget(b) => build_relay_scheme_for_budget(spec, *n, *blocks, b),
                RelayDesign::Target(t) => build_relay_scheme_for_target(spec, *n, *blocks, t),
            }
            .map_err(run_error)?;
            let report = simulate_relay(&scheme, spec, *trials, *seed).map_err(run_error)?;
            let contents = csv_with_header(config, |w| report.write_csv(w))?;
            let summary = format!(
                "|A|={} |B|={}, rate {} ({:.6}), overall error rate {} over {} trials",
                scheme.source().a().len(),
                scheme.source().b().len(),
                report.achieved_rate,
                report.achieved_rate.as_f64(),
                report.overall_error_rate,
                report.trials
            );
            Ok(RunOutput { artifacts: vec![Artifact { path: config.out.clone(), contents }], summary })
        }
        Experiment::Selftest => {
            let checks = selftest()?;
            let mut summary = String::new();
            for c in &checks {
                let _ = writeln!(summary, "{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(bad) = checks.iter().find(|c| !c.passed) {
                print!("{summary}");
                return Err(CliError::SelftestFailed(bad.name.clone()));
            }
            Ok(RunOutput { artifacts: Vec::new(), summary: summary.trim_end().to_string() })
        }
    }
}

/// Writes every artifact atomically; nothing is left behind on failure.
pub fn write_artifacts(artifacts: &[Artifact]) -> Result<(), CliError> {
    let mut staged = Vec::new();
    for a in artifacts {
        match &a.path {
            None => io::stdout().write_all(&a.contents)?,
            Some(path) => {
                let dir = match path.parent() {
                    Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                    _ => PathBuf::from("."),
                };
                let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                    .map_err(|e| invalid("out", format!("{}: {e}", path.display())))?;
                tmp.write_all(&a.contents)?;
                tmp.flush()?;
                staged.push((tmp, path.clone()));
            }
        }
    }
    let mut written: Vec<PathBuf> = Vec::new();
    for (tmp, path) in staged {
        if let Err(e) = tmp.persist(&path) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(invalid("out", format!("{}: {}", path.display(), e.error)));
        }
        written.push(path);
    }
    Ok(())
}

/// Parses, runs and writes; used by the binary.
pub fn run(args: &Args) -> Result<RunOutput, CliError> {
    let config = ExperimentConfig::from_args(args)?;
    let work = || -> Result<RunOutput, CliError> {
        let output = execute(&config)?;
        write_artifacts(&output.artifacts)?;
        Ok(output)
    };
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(run_error)?.install(work),
        None => work(),
    }
}

pub fn main_with(args: Args) -> ExitCode {
    match run(&args) {
        Ok(output) => {
            if args.command == Command::Selftest {
                println!("{}", output.summary);
            } else {
                eprintln!("{}", output.summary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("npolar: {e}");
            ExitCode::FAILURE
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelftestCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// The nested code of length `2^n` whose `A` and `B` are the most reliable
/// indices on a BEC(1/2).
pub fn small_nested_code(n: u32, a_size: usize, b_size: usize) -> Result<NestedCodeSpec, CliError> {
    let profile = bec_reliability(n, 0.5).map_err(run_error)?;
    let a = select_info_set(&profile, a_size).map_err(run_error)?;
    let b = select_secure_subset(&a, &profile, b_size).map_err(run_error)?;
    NestedCodeSpec::new(CodeParams::new(n).map_err(run_error)?, a, b).map_err(run_error)
}

/// Every erasure pattern of a length-`len` word, as index sets.
pub fn all_erasure_patterns(len: usize) -> impl Iterator<Item = IndexSet> {
    (0u32..1 << len).map(move |mask| IndexSet::from_unsorted((0..len).filter(|&i| mask >> i & 1 == 1)))
}

pub fn selftest() -> Result<Vec<SelftestCheck>, CliError> {
    let mut checks = Vec::new();
    for (a_size, b_size) in [(5, 3), (6, 2)] {
        let code = small_nested_code(3, a_size, b_size)?;
        let (h, h_s) = parity_checks(&code).map_err(run_error)?;
        let mut mismatches = 0;
        for erased in all_erasure_patterns(8) {
            let rank = equivocation_rank(&h, &h_s, &erased).map_err(run_error)?;
            let brute = equivocation_bruteforce(&code, &erased).map_err(run_error)?;
            if (rank as f64 - brute).abs() > 1e-9 {
                mismatches += 1;
            }
        }
        checks.push(SelftestCheck {
            name: format!("equivocation rank vs bruteforce, N=8 |A|={a_size} |B|={b_size}"),
            passed: mismatches == 0,
            detail: format!("{mismatches} mismatches over 256 patterns"),
        });
    }

    let mut rng = RngStream::new(0, 0);
    let mut bad = 0;
    for n in 0..=6 {
        let g = generator_matrix(n);
        for _ in 0..20 {
            let u = rng.random_bits(1 << n);
            if polar_transform(&u).map_err(run_error)? != vec_mat_mul(&u, &g).map_err(run_error)? {
                bad += 1;
            }
        }
    }
    checks.push(SelftestCheck {
        name: "butterfly transform vs generator matrix, n <= 6".into(),
        passed: bad == 0,
        detail: format!("{bad} mismatches over 140 inputs"),
    });

    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        for eps in [0.1, 0.25, 0.5] {
            let mean = bec_reliability(n, eps).map_err(run_error)?.mean();
            worst = worst.max((mean - eps).abs());
        }
    }
    checks.push(SelftestCheck {
        name: "erasure recursion preserves the mean".into(),
        passed: worst <= 1e-12,
        detail: format!("max deviation {worst:.3e}"),
    });

    let x = BitVector::from_bools(&(0..16).map(|_| rng.gen::<bool>()).collect::<Vec<_>>());
    checks.push(SelftestCheck {
        name: "transform is an involution".into(),
        passed: polar_transform(&polar_transform(&x).map_err(run_error)?).map_err(run_error)? == x,
        detail: "length 16".into(),
    });
    Ok(checks)
}
