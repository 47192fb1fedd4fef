//! Holographic search: back-projection, pixel selection, Direct Search and
//! Simulated Annealing.

use num_complex::Complex;

use crate::error::{HoloError, Result};
use crate::field::{ComplexField, DeltaKernel, Dft2};
use crate::metrics::{mse, mse_slices, ConvergenceTrace};
use crate::rng::{SplitMix64, Streams};
use crate::scalar::{lit, Scalar};
use crate::slm::{change_map, propose_value, quantise, ChangeMap, ModulationScheme};
use crate::target::TargetImage;

/// Default number of accepted updates between full replay recomputes.
pub const DEFAULT_RECOMPUTE_INTERVAL: u64 = 50_000;
pub const DEFAULT_TRACE_STRIDE: u64 = 100;
/// Default decay constant of the annealing schedule; `e^-6 ~ 0.0025`.
pub const DEFAULT_T0: f64 = 6.0;

/// Inverse DFT of the target with i.i.d. uniform random phases, drawn in
/// row-major order from `rng`.
pub fn back_project<T: Scalar>(target: &TargetImage<T>, rng: &mut SplitMix64) -> ComplexField<T> {
    let (w, h) = target.dims();
    let spectrum = ComplexField::from_fn(w, h, |x, y| {
        let phase = lit::<T>(rng.next_f64() * std::f64::consts::TAU);
        Complex::from_polar(target.get(x, y), phase)
    })
    .expect("target dims already validated");
    crate::field::idft2(&spectrum)
}

/// Test-pixel selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    /// Uniform over all pixels, with replacement.
    Random,
    /// Sorted pixel selection: decreasing quantisation change.
    Sorted,
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Selection::Random => "random",
            Selection::Sorted => "sps",
        })
    }
}

impl std::str::FromStr for Selection {
    type Err = HoloError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "random" => Ok(Selection::Random),
            "sps" | "sorted" => Ok(Selection::Sorted),
            other => Err(HoloError::Config(format!("unknown selection `{other}`"))),
        }
    }
}

/// Selection state of a running search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PixelOrder {
    Random(SplitMix64),
    /// `order` is a permutation of all pixel indices. Once exhausted the
    /// cursor wraps and the same order is cycled again.
    Sorted { order: Vec<usize>, cursor: usize },
}

impl PixelOrder {
    /// Next pixel index (row-major) for a field with `len` pixels.
    pub fn next_index(&mut self, len: usize) -> usize {
        match self {
            PixelOrder::Random(rng) => rng.below(len as u64) as usize,
            PixelOrder::Sorted { order, cursor } => {
                if *cursor >= order.len() {
                    *cursor = 0;
                }
                let i = order[*cursor];
                *cursor += 1;
                if *cursor == order.len() {
                    *cursor = 0;
                }
                i
            }
        }
    }

    /// Next pixel as `(x, y)`.
    pub fn next_pixel(&mut self, width: usize, height: usize) -> (usize, usize) {
        let i = self.next_index(width * height);
        (i % width, i / width)
    }
}

/// Pixels ordered by non-increasing quantisation change, ties by ascending
/// row-major index.
pub fn sps_order<T: Scalar>(changes: &ChangeMap<T>) -> PixelOrder {
    let d = changes.delta();
    let mut order: Vec<usize> = (0..d.len()).collect();
    // stable sort keeps ascending index among equal deltas
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(std::cmp::Ordering::Equal));
    PixelOrder::Sorted { order, cursor: 0 }
}

/// `T(n) = t_coeff * exp(-t_0 * n / N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSchedule<T> {
    t_coeff: T,
    t_0: T,
    total_n: u64,
}

impl<T: Scalar> AnnealingSchedule<T> {
    pub fn new(t_coeff: T, t_0: T, total_n: u64) -> Result<Self> {
        if !(t_coeff > T::zero() && t_coeff.is_finite()) {
            return Err(HoloError::InvalidParameter(format!("t_coeff must be positive, got {t_coeff}")));
        }
        if !(t_0 > T::zero() && t_0.is_finite()) {
            return Err(HoloError::InvalidParameter(format!("t_0 must be positive, got {t_0}")));
        }
        if total_n == 0 {
            return Err(HoloError::InvalidParameter("schedule length must be positive".into()));
        }
        Ok(Self {
            t_coeff,
            t_0,
            total_n,
        })
    }

    pub fn t_coeff(&self) -> T {
        self.t_coeff
    }

    pub fn t_0(&self) -> T {
        self.t_0
    }

    pub fn total_n(&self) -> u64 {
        self.total_n
    }

    pub fn temperature(&self, n: u64) -> T {
        let frac = lit::<T>(n as f64) / lit::<T>(self.total_n as f64);
        self.t_coeff * (-self.t_0 * frac).exp()
    }

    /// Boltzmann acceptance probability `exp(-dE / T)`, capped at 1.
    pub fn acceptance_probability(&self, delta_e: T, n: u64) -> T {
        if delta_e <= T::zero() {
            return T::one();
        }
        (-delta_e / self.temperature(n)).exp()
    }

    /// Metropolis decision. Non-worsening changes are always accepted without
    /// a draw; worsening ones consume exactly one uniform from `rng`.
    pub fn accept(&self, delta_e: T, n: u64, rng: &mut SplitMix64) -> bool {
        if delta_e <= T::zero() {
            return true;
        }
        lit::<T>(rng.next_f64()) < self.acceptance_probability(delta_e, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm<T> {
    /// Full 2D DFT per candidate. Slow; kept as the oracle for the fast variant.
    DirectSearchNaive,
    /// Single-pixel replay update per candidate.
    DirectSearchFast,
    /// Fast update with Metropolis acceptance. `t_coeff = None` derives the
    /// temperature scale from the initial error (see [`default_t_coeff`]).
    SimulatedAnnealing { t_coeff: Option<T>, t_0: T },
}

impl<T: Scalar> Algorithm<T> {
    pub fn annealing() -> Self {
        Algorithm::SimulatedAnnealing {
            t_coeff: None,
            t_0: lit(DEFAULT_T0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::DirectSearchNaive => "ds-naive",
            Algorithm::DirectSearchFast => "ds-fast",
            Algorithm::SimulatedAnnealing { .. } => "sa",
        }
    }
}

/// Default annealing temperature scale: the initial error divided by the
/// pixel count.
///
/// A single-pixel change moves every replay value by `O(1/sqrt(NxNy))`, so
/// the error change it causes is `O(E0 / NxNy)`. Scaling the temperature the
/// same way keeps the early acceptance rate of worsening moves independent of
/// resolution.
pub fn default_t_coeff<T: Scalar>(initial_mse: T, pixels: usize) -> T {
    initial_mse / lit::<T>(pixels as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig<T> {
    pub iterations: u64,
    pub scheme: ModulationScheme,
    pub selection: Selection,
    pub algorithm: Algorithm<T>,
    pub recompute_interval: u64,
    pub trace_stride: u64,
}

impl<T: Scalar> SearchConfig<T> {
    pub fn new(iterations: u64, scheme: ModulationScheme, selection: Selection, algorithm: Algorithm<T>) -> Self {
        Self {
            iterations,
            scheme,
            selection,
            algorithm,
            recompute_interval: DEFAULT_RECOMPUTE_INTERVAL,
            trace_stride: DEFAULT_TRACE_STRIDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.recompute_interval == 0 {
            return Err(HoloError::InvalidParameter("recompute_interval must be >= 1".into()));
        }
        if self.trace_stride == 0 {
            return Err(HoloError::InvalidParameter("trace_stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Starting point shared by every search from the same seed.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialGuess<T> {
    /// Unquantised back-projection.
    pub backprojection: ComplexField<T>,
    /// Back-projection quantised onto the scheme.
    pub hologram: ComplexField<T>,
    pub changes: ChangeMap<T>,
}

impl<T: Scalar> InitialGuess<T> {
    pub fn new(target: &TargetImage<T>, scheme: &ModulationScheme, phase_rng: &mut SplitMix64) -> Result<Self> {
        let backprojection = back_project(target, phase_rng);
        let hologram = quantise(&backprojection, scheme);
        let changes = change_map(&backprojection, &hologram)?;
        Ok(Self {
            backprojection,
            hologram,
            changes,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<T> {
    /// Final quantised aperture.
    pub hologram: ComplexField<T>,
    pub replay: ComplexField<T>,
    pub trace: ConvergenceTrace<T>,
    pub accepted: u64,
    pub initial_mse: T,
    pub final_mse: T,
    /// Accept/reject outcome of every iteration.
    pub decisions: Vec<bool>,
    /// Schedule used, for annealing runs.
    pub schedule: Option<AnnealingSchedule<T>>,
}

enum Acceptor<T> {
    Greedy,
    Metropolis(AnnealingSchedule<T>),
}

/// Runs the configured algorithm from `initial`, drawing from `streams`.
pub fn search<T: Scalar>(
    target: &TargetImage<T>,
    config: &SearchConfig<T>,
    initial: &InitialGuess<T>,
    streams: &mut Streams,
) -> Result<SearchResult<T>> {
    config.validate()?;
    if target.dims() != initial.hologram.dims() {
        return Err(HoloError::DimensionMismatch {
            left: target.dims(),
            right: initial.hologram.dims(),
        });
    }
    let (w, h) = target.dims();
    let len = w * h;
    let plan = Dft2::new(w, h)?;
    let mut kernel = DeltaKernel::new(w, h)?;
    let tmag = target.mag();

    let mut hologram = initial.hologram.clone();
    let mut replay = plan.forward(&hologram)?;
    let mut current = mse(target, &replay)?;
    let initial_mse = current;

    let naive = matches!(config.algorithm, Algorithm::DirectSearchNaive);
    let acceptor = match config.algorithm {
        Algorithm::SimulatedAnnealing { t_coeff, t_0 } => {
            let t_coeff = t_coeff.unwrap_or_else(|| default_t_coeff(initial_mse, len));
            // a perfect start leaves no temperature scale; fall back to greedy
            if t_coeff > T::zero() {
                Acceptor::Metropolis(AnnealingSchedule::new(t_coeff, t_0, config.iterations.max(1))?)
            } else {
                Acceptor::Greedy
            }
        }
        _ => Acceptor::Greedy,
    };

    let mut order = match config.selection {
        Selection::Random => PixelOrder::Random(streams.selection.clone()),
        Selection::Sorted => sps_order(&initial.changes),
    };

    let mut trace = ConvergenceTrace::new();
    trace.push(0, current, 0)?;
    let mut decisions = Vec::with_capacity(config.iterations.min(1 << 26) as usize);
    let mut accepted = 0u64;
    let mut since_refresh = 0u64;
    let mut trial = replay.clone();

    for n in 0..config.iterations {
        let idx = order.next_index(len);
        let (x, y) = (idx % w, idx / w);
        let old = hologram.data()[idx];
        let new = propose_value(old, &config.scheme, &mut streams.proposal);
        let dh = new - old;

        let candidate = if naive {
            hologram.data_mut()[idx] = new;
            trial.data_mut().copy_from_slice(hologram.data());
            plan.forward_in_place(&mut trial)?;
            hologram.data_mut()[idx] = old;
            mse_slices(tmag, trial.data())
        } else {
            kernel.candidate_mse(&replay, tmag, x, y, dh)?
        };

        let delta_e = candidate - current;
        let accept = match &acceptor {
            Acceptor::Greedy => delta_e < T::zero(),
            Acceptor::Metropolis(s) => s.accept(delta_e, n, &mut streams.acceptance),
        };

        if accept {
            hologram.data_mut()[idx] = new;
            if naive {
                std::mem::swap(&mut replay, &mut trial);
            } else {
                kernel.apply(&mut replay, x, y, dh)?;
            }
            current = candidate;
            accepted += 1;
            since_refresh += 1;
            if !naive && since_refresh >= config.recompute_interval {
                replay.data_mut().copy_from_slice(hologram.data());
                plan.forward_in_place(&mut replay)?;
                current = mse(target, &replay)?;
                since_refresh = 0;
            }
        }
        decisions.push(accept);

        let done = n + 1;
        if done % config.trace_stride == 0 || done == config.iterations {
            trace.push(done, current, accepted)?;
        }
    }

    if let PixelOrder::Random(rng) = order {
        streams.selection = rng;
    }

    Ok(SearchResult {
        hologram,
        replay,
        trace,
        accepted,
        initial_mse,
        final_mse: current,
        decisions,
        schedule: match acceptor {
            Acceptor::Metropolis(s) => Some(s),
            Acceptor::Greedy => None,
        },
    })
}

/// Back-projects with the seed's phase stream, then searches.
pub fn run<T: Scalar>(target: &TargetImage<T>, config: &SearchConfig<T>, seed: u64) -> Result<SearchResult<T>> {
    let mut streams = Streams::new(seed);
    let initial = InitialGuess::new(target, &config.scheme, &mut streams.phase)?;
    search(target, config, &initial, &mut streams)
}

/// Direct Search (naive or fast) from the back-projection for `seed`.
/// Only error-reducing changes are accepted.
pub fn direct_search<T: Scalar>(
    target: &TargetImage<T>,
    config: &SearchConfig<T>,
    seed: u64,
) -> Result<SearchResult<T>> {
    if matches!(config.algorithm, Algorithm::SimulatedAnnealing { .. }) {
        return Err(HoloError::InvalidParameter(
            "direct_search needs a direct-search algorithm".into(),
        ));
    }
    run(target, config, seed)
}

/// Simulated Annealing from the back-projection for `seed`.
pub fn simulated_annealing<T: Scalar>(
    target: &TargetImage<T>,
    config: &SearchConfig<T>,
    seed: u64,
) -> Result<SearchResult<T>> {
    if !matches!(config.algorithm, Algorithm::SimulatedAnnealing { .. }) {
        return Err(HoloError::InvalidParameter(
            "simulated_annealing needs an annealing algorithm".into(),
        ));
    }
    run(target, config, seed)
}
