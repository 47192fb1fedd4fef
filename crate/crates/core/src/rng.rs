//! Seedable random streams.
//!
//! Every run uses SplitMix64 (Steele, Lea & Flood 2014), so the streams are
//! reproducible in any language with 64-bit wrapping arithmetic:
//!
//! ```text
//! state = state + 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniform reals are `(output >> 11) * 2^-53`, in `[0, 1)`. Bounded integers
//! in `0..n` reject outputs below `(2^64 - n) mod n` and return `output mod n`.
//!
//! One master seed feeds several independent sub-streams. Sub-stream `k`
//! starts from state `mix(master ^ (k * 0xD1B54A32D192ED03))`, where `mix` is
//! the output function above applied to its argument without the increment.
//! The tags are listed on [`Stream`].

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SPREAD: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Sub-stream `tag` of `master`.
    pub fn derive(master: u64, tag: u64) -> Self {
        Self::new(mix64(master ^ tag.wrapping_mul(STREAM_SPREAD)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }
}

/// Tags of the sub-streams derived from a run's master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Random phases of the back-projection.
    Phase = 1,
    /// Candidate pixel values.
    Proposal = 2,
    /// Pixel choice under random selection.
    Selection = 3,
    /// Metropolis draws of simulated annealing.
    Acceptance = 4,
    /// Pixel subsets for the scatter experiment.
    Sampling = 5,
}

/// The per-run set of sub-streams.
#[derive(Debug, Clone)]
pub struct Streams {
    pub phase: SplitMix64,
    pub proposal: SplitMix64,
    pub selection: SplitMix64,
    pub acceptance: SplitMix64,
}

impl Streams {
    pub fn new(master: u64) -> Self {
        Self {
            phase: SplitMix64::derive(master, Stream::Phase as u64),
            proposal: SplitMix64::derive(master, Stream::Proposal as u64),
            selection: SplitMix64::derive(master, Stream::Selection as u64),
            acceptance: SplitMix64::derive(master, Stream::Acceptance as u64),
        }
    }
}
