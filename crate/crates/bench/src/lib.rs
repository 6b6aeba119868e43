#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Seeded experiment harness: runs the sampler × procedure matrix on a
//! Gaussian mixture and aggregates one results row per cell.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use arms_core::{
    run_chain, summarize, GaussianMixture, MixtureSpec, Procedure, QuadratureGrid, RunSummary,
    SamplerConfig, SamplerKind, SamplerState, SupportSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error in `{field}` (line {line}): {message}")]
    Parse {
        field: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] arms_core::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl BenchError {
    fn parse(field: &str, line: usize, message: impl Into<String>) -> Self {
        BenchError::Parse {
            field: field.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, BenchError::Parse { .. })
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

/// Adaptation stop time of A²RMS.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KStop {
    /// Stop after the whole chain, `K = N`.
    ChainLength,
    Fixed(u64),
}

/// Initial support `{lower, interior..., upper}` with the interior points
/// drawn uniformly from `[interior_lo, interior_hi]` for every run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialSupport {
    pub lower: f64,
    pub upper: f64,
    pub interior_count: usize,
    pub interior_lo: f64,
    pub interior_hi: f64,
}

impl Default for InitialSupport {
    fn default() -> Self {
        InitialSupport {
            lower: -10.0,
            upper: 10.0,
            interior_count: 2,
            interior_lo: -10.0,
            interior_hi: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mixture: MixtureSpec<f64>,
    pub samplers: Vec<SamplerKind>,
    pub procedures: Vec<Procedure>,
    pub n: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub k_stop: KStop,
    pub s0: InitialSupport,
    pub grid: QuadratureGrid<f64>,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    pub tail_beta: f64,
    pub tail_alpha_decay: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mixture: MixtureSpec::benchmark(),
            samplers: vec![SamplerKind::Arms, SamplerKind::A2rms, SamplerKind::Ia2rms],
            procedures: vec![
                Procedure::ArmsHull,
                Procedure::Polyline,
                Procedure::Staircase,
                Procedure::Trapezoid,
            ],
            n: 5000,
            runs: 200,
            base_seed: 0,
            k_stop: KStop::ChainLength,
            s0: InitialSupport::default(),
            grid: QuadratureGrid::benchmark(),
            output: None,
            workers: None,
            tail_beta: 0.0,
            tail_alpha_decay: 1.0,
        }
    }
}

fn parse_value<T: FromStr>(field: &str, line: usize, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| BenchError::parse(field, line, format!("`{}`: {e}", value.trim())))
}

fn parse_list<T: FromStr>(field: &str, line: usize, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(field, line, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(BenchError::parse(field, line, "empty list"));
    }
    Ok(items)
}

impl ExperimentConfig {
    /// Sets one `key = value` entry; `line` is 0 for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let key = key.trim();
        match key {
            "target" => match value.trim() {
                "benchmark" => self.mixture = MixtureSpec::benchmark(),
                "mixture" => {}
                other => {
                    return Err(BenchError::parse(key, line, format!("unknown target `{other}`")))
                }
            },
            "mixture.weights" => self.mixture.weights = parse_list(key, line, value)?,
            "mixture.means" => self.mixture.means = parse_list(key, line, value)?,
            "mixture.variances" => self.mixture.variances = parse_list(key, line, value)?,
            "samplers" => self.samplers = parse_list(key, line, value)?,
            "procedures" => self.procedures = parse_list(key, line, value)?,
            "N" | "n" => self.n = parse_value("N", line, value)?,
            "runs" => self.runs = parse_value(key, line, value)?,
            "seed" => self.base_seed = parse_value(key, line, value)?,
            "K" => {
                self.k_stop = match value.trim() {
                    "N" | "n" => KStop::ChainLength,
                    v => KStop::Fixed(parse_value(key, line, v)?),
                }
            }
            "s0.lower" => self.s0.lower = parse_value(key, line, value)?,
            "s0.upper" => self.s0.upper = parse_value(key, line, value)?,
            "s0.interior_count" => self.s0.interior_count = parse_value(key, line, value)?,
            "s0.interior_lo" => self.s0.interior_lo = parse_value(key, line, value)?,
            "s0.interior_hi" => self.s0.interior_hi = parse_value(key, line, value)?,
            "grid.lo" => self.grid.lo = parse_value(key, line, value)?,
            "grid.hi" => self.grid.hi = parse_value(key, line, value)?,
            "grid.points" => self.grid.n_points = parse_value(key, line, value)?,
            "out" => self.output = Some(PathBuf::from(value.trim())),
            "workers" => self.workers = Some(parse_value(key, line, value)?),
            "tail.beta" => self.tail_beta = parse_value(key, line, value)?,
            "tail.alpha_decay" => self.tail_alpha_decay = parse_value(key, line, value)?,
            _ => return Err(BenchError::parse(key, line, "unknown key")),
        }
        Ok(())
    }

    /// Checks the cross-field invariants; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(BenchError::parse(field, 0, msg));
        if self.n < 1 {
            return bad("N", "must be at least 1".into());
        }
        if self.runs < 1 {
            return bad("runs", "must be at least 1".into());
        }
        if let Err(e) = self.mixture.validate() {
            return bad("mixture", e.to_string());
        }
        let s0 = &self.s0;
        if !(s0.lower < s0.upper) {
            return bad("s0.lower", format!("{} must be below s0.upper {}", s0.lower, s0.upper));
        }
        if let Some(m) = self
            .mixture
            .means
            .iter()
            .find(|&&m| !(m > s0.lower && m < s0.upper))
        {
            return bad("s0.lower", format!("[{}, {}] must bracket mean {m}", s0.lower, s0.upper));
        }
        if !(s0.interior_lo <= s0.interior_hi)
            || s0.interior_lo < s0.lower
            || s0.interior_hi > s0.upper
        {
            return bad(
                "s0.interior_lo",
                format!(
                    "[{}, {}] must lie inside [{}, {}]",
                    s0.interior_lo, s0.interior_hi, s0.lower, s0.upper
                ),
            );
        }
        if let Err(e) = QuadratureGrid::new(self.grid.lo, self.grid.hi, self.grid.n_points) {
            return bad("grid", e.to_string());
        }
        if self.samplers.is_empty() {
            return bad("samplers", "empty list".into());
        }
        if self.procedures.is_empty() {
            return bad("procedures", "empty list".into());
        }
        if self.workers == Some(0) {
            return bad("workers", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.tail_beta) {
            return bad("tail.beta", format!("{} not in [0, 1]", self.tail_beta));
        }
        if !(self.tail_alpha_decay > 0.0) {
            return bad("tail.alpha_decay", "must be positive".into());
        }
        Ok(())
    }

    pub fn k_stop_value(&self) -> u64 {
        match self.k_stop {
            KStop::ChainLength => self.n as u64,
            KStop::Fixed(k) => k,
        }
    }

    pub fn sampler_config(&self, kind: SamplerKind, procedure: Procedure) -> SamplerConfig<f64> {
        let cfg = SamplerConfig::new(kind, procedure).with_k_stop(self.k_stop_value());
        if self.tail_beta > 0.0 {
            cfg.with_tail_inflation(self.tail_beta, self.tail_alpha_decay)
        } else {
            cfg
        }
    }

    pub fn cells(&self) -> Vec<(SamplerKind, Procedure)> {
        self.samplers
            .iter()
            .flat_map(|&s| self.procedures.iter().map(move |&p| (s, p)))
            .collect()
    }
}

/// Parses flat `key = value` text (`#` starts a comment) on top of the
/// defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(BenchError::parse(line, i + 1, "expected `key = value`"));
        };
        cfg.set(key, value, i + 1)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::parse("config", 0, format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Initial support and starting point of one run, drawn from its stream.
///
/// Interior points are redrawn (up to 1000 times) until the initial proposal
/// has integrable tails.
pub fn initial_conditions(
    cfg: &ExperimentConfig,
    procedure: Procedure,
    target: &GaussianMixture<f64>,
    rng: &mut ChaCha8Rng,
) -> arms_core::Result<(SupportSet<f64>, f64)> {
    let s0 = &cfg.s0;
    let mut last_err = None;
    for _ in 0..1000 {
        let mut pts = vec![s0.lower, s0.upper];
        pts.extend((0..s0.interior_count).map(|_| rng.gen_range(s0.interior_lo..=s0.interior_hi)));
        pts.sort_by(f64::total_cmp);
        let built = SupportSet::new(pts, target).and_then(|s| {
            arms_core::PiecewiseProposal::build(&s, procedure, target).map(|_| s)
        });
        match built {
            Ok(support) => {
                let x0 = rng.gen_range(s0.lower..=s0.upper);
                return Ok((support, x0));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Runs chain `run_index` of a cell and returns it with the final state.
pub fn run_single(
    cfg: &ExperimentConfig,
    kind: SamplerKind,
    procedure: Procedure,
    run_index: u64,
    n: usize,
) -> arms_core::Result<(Vec<f64>, SamplerState<f64>)> {
    let target = GaussianMixture::new(cfg.mixture.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.base_seed.wrapping_add(run_index));
    let (support, x0) = initial_conditions(cfg, procedure, &target, &mut rng)?;
    run_chain(
        cfg.sampler_config(kind, procedure),
        &target,
        support,
        x0,
        n,
        &mut rng,
    )
}

pub fn run_summary(
    cfg: &ExperimentConfig,
    kind: SamplerKind,
    procedure: Procedure,
    run_index: u64,
) -> arms_core::Result<RunSummary<f64>> {
    let target = GaussianMixture::new(cfg.mixture.clone())?;
    let (chain, state) = run_single(cfg, kind, procedure, run_index, cfg.n)?;
    summarize(&chain, &state, &target, &cfg.grid)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub run_index: u64,
    pub error: String,
}

/// One aggregated results row.
#[derive(Clone, Debug, PartialEq)]
pub struct CellRow {
    pub sampler: SamplerKind,
    pub procedure: Procedure,
    pub est_mean: f64,
    /// Across-run standard deviation of the per-run means.
    pub std_est: f64,
    pub lag1_corr: f64,
    pub avg_support: f64,
    pub avg_rs_rej: f64,
    pub avg_second_ctrl: f64,
    pub avg_d: f64,
    /// Successful runs entering the averages.
    pub runs: usize,
    pub n: usize,
    pub seed: u64,
    pub failures: Vec<RunFailure>,
}

impl CellRow {
    /// More than 1% of the runs failed.
    pub fn failed(&self) -> bool {
        let total = self.runs + self.failures.len();
        self.failures.len() * 100 > total || self.runs == 0
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

pub fn aggregate(
    cfg: &ExperimentConfig,
    sampler: SamplerKind,
    procedure: Procedure,
    results: &[arms_core::Result<RunSummary<f64>>],
) -> CellRow {
    let mut ok = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(s) => ok.push(*s),
            Err(e) => failures.push(RunFailure {
                run_index: i as u64,
                error: e.to_string(),
            }),
        }
    }
    let means: Vec<f64> = ok.iter().map(|s| s.est_mean).collect();
    let (est_mean, std_est) = arms_core::mean_and_std(&means);
    CellRow {
        sampler,
        procedure,
        est_mean,
        std_est,
        lag1_corr: mean(ok.iter().filter_map(|s| s.lag1_corr)),
        avg_support: mean(ok.iter().map(|s| s.final_m as f64)),
        avg_rs_rej: mean(ok.iter().map(|s| s.rs_rejections as f64)),
        avg_second_ctrl: mean(ok.iter().map(|s| s.second_control_additions as f64)),
        avg_d: mean(ok.iter().map(|s| s.final_d)),
        runs: ok.len(),
        n: cfg.n,
        seed: cfg.base_seed,
        failures,
    }
}

/// Runs every cell of `cfg`. Runs execute in parallel; aggregation walks
/// them in index order, so the output does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellRow>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.runs as u64).map(move |r| (c, r)))
        .collect();
    let work = || -> Vec<arms_core::Result<RunSummary<f64>>> {
        jobs.par_iter()
            .map(|&(c, r)| run_summary(cfg, cells[c].0, cells[c].1, r))
            .collect()
    };
    let results = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| BenchError::Pool(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(cells
        .iter()
        .zip(results.chunks(cfg.runs))
        .map(|(&(s, p), chunk)| aggregate(cfg, s, p, chunk))
        .collect())
}

/// Six significant digits, trailing zeros kept; scientific notation outside
/// `[1e-5, 1e6)`.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        return format!("{x:.5e}");
    }
    let s = format!("{:.*}", (5 - exp) as usize, x);
    // Rounding can carry into a new leading digit (9.999996 -> 10.00000).
    let digits = s.chars().filter(char::is_ascii_digit).count();
    let leading_zeros = if exp < 0 { (-exp) as usize } else { 0 };
    if digits > 6 + leading_zeros && exp + 1 < 6 {
        return format!("{:.*}", (4 - exp).max(0) as usize, x);
    }
    s
}

pub const CSV_HEADER: &str = "sampler,procedure,est_mean,std_est,lag1_corr,avg_support,avg_rs_rej,avg_second_ctrl,avg_D,runs,N,seed";

pub fn write_csv<W: Write>(rows: &[CellRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let mut line = format!("{},{}", r.sampler, r.procedure.code().to_lowercase());
        for v in [
            r.est_mean,
            r.std_est,
            r.lag1_corr,
            r.avg_support,
            r.avg_rs_rej,
            r.avg_second_ctrl,
            r.avg_d,
        ] {
            let _ = write!(line, ",{}", format_sig(v));
        }
        writeln!(w, "{line},{},{},{}", r.runs, r.n, r.seed)?;
    }
    Ok(())
}

/// Writes the table to `path`.
pub fn emit_csv(rows: &[CellRow], path: &Path) -> Result<()> {
    let io_err = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(io_err)?;
    std::fs::write(path, buf).map_err(io_err)
}
