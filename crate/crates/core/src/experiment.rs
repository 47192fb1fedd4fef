//! Experiment orchestration: target preparation, A/B convergence runs, the
//! quantisation-change scatter, histograms and single renders.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]; CSV
//! outputs are byte-identical across runs with the same config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{HoloError, Result};
use crate::field::{dft2, ComplexField, DeltaKernel};
use crate::metrics::{final_error_improvement, fmt_float, mse, pearson, relative_improvement};
use crate::pgm::{load_pgm, save_pgm, Normalization};
use crate::rng::{SplitMix64, Stream, Streams};
use crate::search::{
    back_project, search, Algorithm, InitialGuess, SearchConfig, SearchResult, Selection,
    DEFAULT_RECOMPUTE_INTERVAL, DEFAULT_T0, DEFAULT_TRACE_STRIDE,
};
use crate::slm::{Modulation, ModulationScheme};
use crate::target::{synthetic_mandrill, usaf_target, TargetImage};

pub const RESOLUTIONS: [usize; 6] = [64, 128, 256, 512, 1024, 2048];
pub const HISTOGRAM_BINS: usize = 64;
pub const DEFAULT_SCATTER_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageSource {
    /// Procedural Mandrill-class texture.
    Mandrill,
    /// USAF-style bar target.
    Usaf,
    File(PathBuf),
}

impl std::fmt::Display for ImageSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImageSource::Mandrill => f.write_str("mandrill"),
            ImageSource::Usaf => f.write_str("usaf"),
            ImageSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl std::str::FromStr for ImageSource {
    type Err = HoloError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "mandrill" => ImageSource::Mandrill,
            "usaf" => ImageSource::Usaf,
            "" => return Err(HoloError::Config("empty image path".into())),
            path => ImageSource::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    DsNaive,
    DsFast,
    Sa,
}

impl std::str::FromStr for AlgorithmKind {
    type Err = HoloError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ds-naive" => Ok(AlgorithmKind::DsNaive),
            "ds-fast" => Ok(AlgorithmKind::DsFast),
            "sa" => Ok(AlgorithmKind::Sa),
            other => Err(HoloError::Config(format!(
                "unknown algorithm `{other}` (expected ds-naive, ds-fast or sa)"
            ))),
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlgorithmKind::DsNaive => "ds-naive",
            AlgorithmKind::DsFast => "ds-fast",
            AlgorithmKind::Sa => "sa",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub image: ImageSource,
    pub resolution: usize,
    pub scheme: ModulationScheme,
    pub algorithm: AlgorithmKind,
    /// Annealing temperature scale; `None` derives it from the initial error.
    pub t_coeff: Option<f64>,
    pub t0: f64,
    pub iterations: u64,
    pub seed: u64,
    pub selection: Selection,
    pub symmetry: bool,
    pub out_dir: PathBuf,
    pub trace_stride: u64,
    pub recompute_interval: u64,
    /// Pixels sampled by the scatter experiment.
    pub samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            image: ImageSource::Mandrill,
            resolution: 128,
            scheme: ModulationScheme::binary_phase(),
            algorithm: AlgorithmKind::DsFast,
            t_coeff: None,
            t0: DEFAULT_T0,
            iterations: 20_000,
            seed: 0,
            selection: Selection::Sorted,
            symmetry: false,
            out_dir: PathBuf::from("out"),
            trace_stride: DEFAULT_TRACE_STRIDE,
            recompute_interval: DEFAULT_RECOMPUTE_INTERVAL,
            samples: DEFAULT_SCATTER_SAMPLES,
        }
    }
}

fn parse_value<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| HoloError::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(HoloError::Config(format!("bad boolean `{value}` for `{key}`"))),
    }
}

impl ExperimentConfig {
    /// Sets one option by its flag name (`out-dir`, `t-coeff`, ...);
    /// underscores are accepted in place of dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "image" => self.image = value.parse()?,
            "resolution" => self.resolution = parse_value(&key, value)?,
            "scheme" => self.scheme = value.trim().parse()?,
            "algorithm" => self.algorithm = value.parse()?,
            "selection" => self.selection = value.parse()?,
            "iterations" => self.iterations = parse_value(&key, value)?,
            "seed" => self.seed = parse_value(&key, value)?,
            "symmetry" => self.symmetry = parse_bool(&key, value)?,
            "t-coeff" => {
                self.t_coeff = match value.trim() {
                    "auto" => None,
                    v => Some(parse_value(&key, v)?),
                }
            }
            "t0" => self.t0 = parse_value(&key, value)?,
            "out-dir" => self.out_dir = PathBuf::from(value.trim()),
            "trace-stride" => self.trace_stride = parse_value(&key, value)?,
            "recompute-interval" => self.recompute_interval = parse_value(&key, value)?,
            "samples" => self.samples = parse_value(&key, value)?,
            _ => return Err(HoloError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HoloError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(key, value)
                .map_err(|e| HoloError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !RESOLUTIONS.contains(&self.resolution) {
            return Err(HoloError::Config(format!(
                "resolution {} not in {RESOLUTIONS:?}",
                self.resolution
            )));
        }
        if self.trace_stride == 0 || self.recompute_interval == 0 {
            return Err(HoloError::Config(
                "trace-stride and recompute-interval must be >= 1".into(),
            ));
        }
        if let Some(t) = self.t_coeff {
            if !(t > 0.0 && t.is_finite()) {
                return Err(HoloError::Config(format!("t-coeff must be positive, got {t}")));
            }
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(HoloError::Config(format!("t0 must be positive, got {}", self.t0)));
        }
        Ok(())
    }

    pub fn search_config(&self, selection: Selection) -> SearchConfig<f64> {
        let algorithm = match self.algorithm {
            AlgorithmKind::DsNaive => Algorithm::DirectSearchNaive,
            AlgorithmKind::DsFast => Algorithm::DirectSearchFast,
            AlgorithmKind::Sa => Algorithm::SimulatedAnnealing {
                t_coeff: self.t_coeff,
                t_0: self.t0,
            },
        };
        SearchConfig {
            iterations: self.iterations,
            scheme: self.scheme,
            selection,
            algorithm,
            recompute_interval: self.recompute_interval,
            trace_stride: self.trace_stride,
        }
    }

    /// Loads or generates the image at the configured resolution (nearest
    /// neighbour for files), optionally symmetrises it, and normalises its
    /// energy.
    pub fn prepare_target(&self) -> Result<TargetImage<f64>> {
        self.validate()?;
        let img = match &self.image {
            ImageSource::Mandrill => synthetic_mandrill(self.resolution)?,
            ImageSource::Usaf => usaf_target(self.resolution)?,
            ImageSource::File(path) => {
                load_pgm::<f64>(path)?.resample_nearest(self.resolution, self.resolution)?
            }
        };
        let img = if self.symmetry { img.induce_symmetry() } else { img };
        img.normalize_energy()
    }

    fn describe(&self, out: &mut String) {
        let _ = writeln!(out, "image = {}", self.image);
        let _ = writeln!(out, "resolution = {}", self.resolution);
        let _ = writeln!(out, "scheme = {}", self.scheme);
        let _ = writeln!(out, "algorithm = {}", self.algorithm);
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "symmetry = {}", self.symmetry);
    }
}

fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn save_magnitude(dir: &Path, name: &str, field: &ComplexField<f64>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    save_pgm(dir.join(name), field.width(), field.height(), &field.magnitudes(), Normalization::LinearMax)
}

/// Phase devices are shown as phase / 2pi, amplitude devices as amplitude.
fn save_hologram(dir: &Path, name: &str, holo: &ComplexField<f64>, scheme: &ModulationScheme) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let values: Vec<f64> = holo
        .data()
        .iter()
        .map(|c| match scheme.kind() {
            Modulation::Phase => c.arg().rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU,
            Modulation::Amplitude => c.re,
        })
        .collect();
    save_pgm(dir.join(name), holo.width(), holo.height(), &values, Normalization::ClampUnit)
}

fn save_target(dir: &Path, target: &TargetImage<f64>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    save_pgm(dir.join("target.pgm"), target.width(), target.height(), target.mag(), Normalization::LinearMax)
}

/// Outcome of a random-vs-SPS comparison.
#[derive(Debug, Clone)]
pub struct AbReport {
    pub random: SearchResult<f64>,
    pub sps: SearchResult<f64>,
    /// Relative gain in error reduction; `None` when undefined (the random
    /// run did not reduce the error while SPS did something different).
    pub improvement: Option<f64>,
    /// Relative reduction of the final error.
    pub final_error_improvement: Option<f64>,
    pub wall_time_s: f64,
}

impl AbReport {
    pub fn initial_mse(&self) -> f64 {
        self.random.initial_mse
    }

    pub fn summary(&self, config: &ExperimentConfig) -> String {
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_else(|| "undefined".into());
        let mut s = String::new();
        config.describe(&mut s);
        let _ = writeln!(s, "initial_mse = {}", fmt_float(self.initial_mse()));
        let _ = writeln!(s, "final_mse_random = {}", fmt_float(self.random.final_mse));
        let _ = writeln!(s, "final_mse_sps = {}", fmt_float(self.sps.final_mse));
        let _ = writeln!(s, "improvement_error_reduction = {}", opt(self.improvement));
        let _ = writeln!(s, "improvement_final_error = {}", opt(self.final_error_improvement));
        let _ = writeln!(s, "accepted_random = {}", self.random.accepted);
        let _ = writeln!(s, "accepted_sps = {}", self.sps.accepted);
        if let Some(sched) = self.random.schedule {
            let _ = writeln!(s, "t_coeff = {}", fmt_float(sched.t_coeff()));
            let _ = writeln!(s, "t0 = {}", fmt_float(sched.t_0()));
        }
        let _ = writeln!(s, "wall_time_s = {:.3}", self.wall_time_s);
        s
    }
}

/// Searches once with each selection strategy from the same back-projection
/// and the same proposal and acceptance streams.
pub fn compare_selections(target: &TargetImage<f64>, config: &ExperimentConfig) -> Result<AbReport> {
    let start = Instant::now();
    let initial = InitialGuess::new(target, &config.scheme, &mut Streams::new(config.seed).phase)?;
    let run = |selection| {
        let mut streams = Streams::new(config.seed);
        search(target, &config.search_config(selection), &initial, &mut streams)
    };
    let random = run(Selection::Random)?;
    let sps = run(Selection::Sorted)?;
    let improvement = relative_improvement(&random.trace, &sps.trace).ok();
    let final_error_improvement = final_error_improvement(&random.trace, &sps.trace).ok();
    Ok(AbReport {
        random,
        sps,
        improvement,
        final_error_improvement,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Random-vs-SPS convergence comparison. Writes `trace_random.csv`,
/// `trace_sps.csv`, replay and hologram images for both runs, `target.pgm`
/// and `summary.txt` to the output directory.
pub fn run_convergence_ab(config: &ExperimentConfig) -> Result<AbReport> {
    let target = config.prepare_target()?;
    let report = compare_selections(&target, config)?;
    let dir = &config.out_dir;
    write_file(dir, "trace_random.csv", report.random.trace.to_csv())?;
    write_file(dir, "trace_sps.csv", report.sps.trace.to_csv())?;
    save_magnitude(dir, "replay_random.pgm", &report.random.replay)?;
    save_magnitude(dir, "replay_sps.pgm", &report.sps.replay)?;
    save_hologram(dir, "hologram_random.pgm", &report.random.hologram, &config.scheme)?;
    save_hologram(dir, "hologram_sps.pgm", &report.sps.hologram, &config.scheme)?;
    save_target(dir, &target)?;
    write_file(dir, "summary.txt", report.summary(config))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub pixel_index: usize,
    pub delta: f64,
    pub mse_change: f64,
}

#[derive(Debug, Clone)]
pub struct ScatterReport {
    pub points: Vec<ScatterPoint>,
    pub baseline_mse: f64,
    /// Least-squares `a` in `mse_change = a * delta^2`.
    pub fit_coefficient: f64,
    /// Correlation between observed changes and the fitted square law.
    pub pearson: Option<f64>,
}

impl ScatterReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pixel_index,delta,mse_change\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.pixel_index, fmt_float(p.delta), fmt_float(p.mse_change));
        }
        out
    }
}

/// `count` distinct pixel indices in ascending order (all of them when
/// `count >= len`), chosen by a partial Fisher-Yates shuffle.
pub fn sample_pixels(len: usize, count: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    if count < len {
        for i in 0..count {
            let j = i + rng.below((len - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(count);
        idx.sort_unstable();
    }
    idx
}

/// Quantises single pixels of the back-projection one at a time and measures
/// the resulting error change against the unquantised replay.
pub fn scatter(target: &TargetImage<f64>, config: &ExperimentConfig) -> Result<ScatterReport> {
    let mut streams = Streams::new(config.seed);
    let field = back_project(target, &mut streams.phase);
    let replay = dft2(&field);
    let baseline_mse = mse(target, &replay)?;
    let mut kernel = DeltaKernel::new(field.width(), field.height())?;
    let mut sampler = SplitMix64::derive(config.seed, Stream::Sampling as u64);
    let picks = sample_pixels(field.len(), config.samples, &mut sampler);

    let mut points = Vec::with_capacity(picks.len());
    for i in picks {
        let original = field.data()[i];
        let dh = config.scheme.quantise_value(original) - original;
        let (x, y) = field.coords(i);
        let changed = kernel.candidate_mse(&replay, target.mag(), x, y, dh)?;
        points.push(ScatterPoint {
            pixel_index: i,
            delta: dh.norm(),
            mse_change: changed - baseline_mse,
        });
    }

    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), p| {
        let d2 = p.delta * p.delta;
        (n + d2 * p.mse_change, d + d2 * d2)
    });
    let fit_coefficient = if den > 0.0 { num / den } else { 0.0 };
    let fitted: Vec<f64> = points.iter().map(|p| fit_coefficient * p.delta * p.delta).collect();
    let observed: Vec<f64> = points.iter().map(|p| p.mse_change).collect();
    Ok(ScatterReport {
        pearson: pearson(&fitted, &observed).ok(),
        points,
        baseline_mse,
        fit_coefficient,
    })
}

/// Writes `scatter.csv` and `scatter_summary.txt`.
pub fn run_scatter_experiment(config: &ExperimentConfig) -> Result<ScatterReport> {
    let start = Instant::now();
    let target = config.prepare_target()?;
    let report = scatter(&target, config)?;
    write_file(&config.out_dir, "scatter.csv", report.to_csv())?;
    let mut s = String::new();
    config.describe(&mut s);
    let _ = writeln!(s, "samples = {}", report.points.len());
    let _ = writeln!(s, "baseline_mse = {}", fmt_float(report.baseline_mse));
    let _ = writeln!(s, "fit_coefficient = {}", fmt_float(report.fit_coefficient));
    let _ = writeln!(
        s,
        "pearson = {}",
        report.pearson.map(fmt_float).unwrap_or_else(|| "undefined".into())
    );
    let _ = writeln!(s, "wall_time_s = {:.3}", start.elapsed().as_secs_f64());
    write_file(&config.out_dir, "scatter_summary.txt", s)?;
    Ok(report)
}

/// Fixed-width histogram over `[lower, upper)`; values at or beyond the
/// upper edge land in the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lower: f64,
    pub upper: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lower: f64, upper: f64, bins: usize, values: impl IntoIterator<Item = f64>) -> Self {
        let mut counts = vec![0u64; bins];
        let width = upper - lower;
        for v in values {
            let pos = if width > 0.0 { (v - lower) / width * bins as f64 } else { 0.0 };
            let bin = (pos.floor().max(0.0) as usize).min(bins - 1);
            counts[bin] += 1;
        }
        Self { lower, upper, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let bins = self.counts.len() as f64;
        let step = (self.upper - self.lower) / bins;
        let mut out = String::from("bin,lower,upper,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let lo = self.lower + step * i as f64;
            let _ = writeln!(out, "{i},{},{},{c}", fmt_float(lo), fmt_float(lo + step));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct HistogramReport {
    pub magnitude: Histogram,
    pub angle: Histogram,
    pub change: Histogram,
}

fn max_or_one(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(0.0, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

pub fn histograms(target: &TargetImage<f64>, config: &ExperimentConfig) -> Result<HistogramReport> {
    let mut streams = Streams::new(config.seed);
    let initial = InitialGuess::new(target, &config.scheme, &mut streams.phase)?;
    let mags = initial.backprojection.magnitudes();
    let pi = std::f64::consts::PI;
    let angles = initial.backprojection.data().iter().map(|c| {
        let a = c.arg();
        if a >= pi {
            a - 2.0 * pi
        } else {
            a
        }
    });
    let changes = initial.changes.delta();
    Ok(HistogramReport {
        magnitude: Histogram::new(0.0, max_or_one(&mags), HISTOGRAM_BINS, mags.iter().cloned()),
        angle: Histogram::new(-pi, pi, HISTOGRAM_BINS, angles),
        change: Histogram::new(0.0, max_or_one(changes), HISTOGRAM_BINS, changes.iter().cloned()),
    })
}

/// Writes `hist_magnitude.csv`, `hist_angle.csv` and `hist_change.csv`.
pub fn run_histograms(config: &ExperimentConfig) -> Result<HistogramReport> {
    let target = config.prepare_target()?;
    let report = histograms(&target, config)?;
    let dir = &config.out_dir;
    write_file(dir, "hist_magnitude.csv", report.magnitude.to_csv())?;
    write_file(dir, "hist_angle.csv", report.angle.to_csv())?;
    write_file(dir, "hist_change.csv", report.change.to_csv())?;
    Ok(report)
}

/// Single search with the configured selection. Writes the trace, target,
/// hologram and replay images and `summary.txt`.
pub fn run_render(config: &ExperimentConfig) -> Result<SearchResult<f64>> {
    let start = Instant::now();
    let target = config.prepare_target()?;
    let result = crate::search::run(&target, &config.search_config(config.selection), config.seed)?;
    let dir = &config.out_dir;
    write_file(dir, &format!("trace_{}.csv", config.selection), result.trace.to_csv())?;
    save_target(dir, &target)?;
    save_magnitude(dir, "replay.pgm", &result.replay)?;
    save_hologram(dir, "hologram.pgm", &result.hologram, &config.scheme)?;
    let mut s = String::new();
    config.describe(&mut s);
    let _ = writeln!(s, "selection = {}", config.selection);
    let _ = writeln!(s, "initial_mse = {}", fmt_float(result.initial_mse));
    let _ = writeln!(s, "final_mse = {}", fmt_float(result.final_mse));
    let _ = writeln!(s, "accepted = {}", result.accepted);
    let _ = writeln!(s, "wall_time_s = {:.3}", start.elapsed().as_secs_f64());
    write_file(dir, "summary.txt", s)?;
    Ok(result)
}
