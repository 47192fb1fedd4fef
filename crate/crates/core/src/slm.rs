//! Spatial light modulator constraints and quantisation onto them.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{HoloError, Result};
use crate::field::ComplexField;
use crate::rng::SplitMix64;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Phase,
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Levels {
    /// `n >= 2` evenly spaced levels.
    Discrete(u32),
    Continuous,
}

/// What values an SLM pixel can display.
///
/// * discrete phase, `n` levels: `exp(2 pi i k / n)` for `k in 0..n`
/// * discrete amplitude, `n` levels: `k / (n - 1)` for `k in 0..n`
/// * continuous phase: any unit-magnitude value
/// * continuous amplitude: any real value in `[0, 1]`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModulationScheme {
    kind: Modulation,
    levels: Levels,
}

impl ModulationScheme {
    pub fn new(kind: Modulation, levels: Levels) -> Result<Self> {
        if let Levels::Discrete(n) = levels {
            if n < 2 {
                return Err(HoloError::InvalidParameter(format!(
                    "a discrete scheme needs at least 2 levels, got {n}"
                )));
            }
        }
        Ok(Self { kind, levels })
    }

    pub const fn binary_phase() -> Self {
        Self {
            kind: Modulation::Phase,
            levels: Levels::Discrete(2),
        }
    }

    pub const fn binary_amplitude() -> Self {
        Self {
            kind: Modulation::Amplitude,
            levels: Levels::Discrete(2),
        }
    }

    pub const fn continuous_phase() -> Self {
        Self {
            kind: Modulation::Phase,
            levels: Levels::Continuous,
        }
    }

    pub const fn continuous_amplitude() -> Self {
        Self {
            kind: Modulation::Amplitude,
            levels: Levels::Continuous,
        }
    }

    pub fn kind(&self) -> Modulation {
        self.kind
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    /// Value of discrete level `k`. Quarter turns of the phase circle are exact.
    pub fn level<T: Scalar>(&self, k: u32) -> Complex<T> {
        let n = match self.levels {
            Levels::Discrete(n) => n,
            Levels::Continuous => panic!("continuous scheme has no indexed levels"),
        };
        match self.kind {
            Modulation::Amplitude => Complex::new(lit::<T>(k as f64) / lit::<T>((n - 1) as f64), T::zero()),
            Modulation::Phase if (4 * k as u64).is_multiple_of(n as u64) => match 4 * k / n {
                0 => Complex::new(T::one(), T::zero()),
                1 => Complex::new(T::zero(), T::one()),
                2 => Complex::new(-T::one(), T::zero()),
                _ => Complex::new(T::zero(), -T::one()),
            },
            Modulation::Phase => {
                let angle = lit::<T>(std::f64::consts::TAU * k as f64 / n as f64);
                let (s, c) = angle.sin_cos();
                Complex::new(c, s)
            }
        }
    }

    /// Index of the level nearest to `c` in the complex plane. Exact
    /// midpoints go to the lower index. `None` for continuous schemes.
    pub fn nearest_level<T: Scalar>(&self, c: Complex<T>) -> Option<u32> {
        let n = match self.levels {
            Levels::Discrete(n) => n,
            Levels::Continuous => return None,
        };
        let (k0, k1) = match self.kind {
            Modulation::Phase => {
                if c.re == T::zero() && c.im == T::zero() {
                    return Some(0);
                }
                let mut theta = c.im.atan2(c.re);
                if theta < T::zero() {
                    theta = theta + T::TAU();
                }
                let t = theta / (T::TAU() / lit::<T>(n as f64));
                let k0 = (t.floor().to_u64().unwrap_or(0) % n as u64) as u32;
                (k0, (k0 + 1) % n)
            }
            Modulation::Amplitude => {
                let v = c.re.max(T::zero()).min(T::one());
                let x = v * lit::<T>((n - 1) as f64);
                let k0 = (x.floor().to_u64().unwrap_or(0) as u32).min(n - 2);
                (k0, k0 + 1)
            }
        };
        let d0 = (c - self.level::<T>(k0)).norm_sqr();
        let d1 = (c - self.level::<T>(k1)).norm_sqr();
        Some(if d1 < d0 || (d1 == d0 && k1 < k0) { k1 } else { k0 })
    }

    /// Nearest allowed value to `c`.
    pub fn quantise_value<T: Scalar>(&self, c: Complex<T>) -> Complex<T> {
        match (self.kind, self.levels) {
            (_, Levels::Discrete(_)) => self.level(self.nearest_level(c).unwrap_or(0)),
            (Modulation::Phase, Levels::Continuous) => {
                let r2 = c.norm_sqr();
                if r2 == T::zero() {
                    Complex::new(T::one(), T::zero())
                } else if (r2 - T::one()).abs() <= lit::<T>(4.0) * T::epsilon() {
                    // already on the unit circle; renormalising could move it an ulp
                    c
                } else {
                    c.unscale(r2.sqrt())
                }
            }
            (Modulation::Amplitude, Levels::Continuous) => {
                Complex::new(c.re.max(T::zero()).min(T::one()), T::zero())
            }
        }
    }

    /// Whether `c` is a value the device can display.
    pub fn allows<T: Scalar>(&self, c: Complex<T>) -> bool {
        match (self.kind, self.levels) {
            (_, Levels::Discrete(_)) => self
                .nearest_level(c)
                .map(|k| self.level::<T>(k) == c)
                .unwrap_or(false),
            (Modulation::Phase, Levels::Continuous) => {
                (c.norm_sqr() - T::one()).abs() <= lit::<T>(1e3) * T::epsilon()
            }
            (Modulation::Amplitude, Levels::Continuous) => {
                c.im == T::zero() && c.re >= T::zero() && c.re <= T::one()
            }
        }
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            Modulation::Phase => "phase",
            Modulation::Amplitude => "amplitude",
        };
        match self.levels {
            Levels::Discrete(2) => write!(f, "binary-{kind}"),
            Levels::Discrete(n) => write!(f, "{kind}:{n}"),
            Levels::Continuous => write!(f, "{kind}:cont"),
        }
    }
}

impl FromStr for ModulationScheme {
    type Err = HoloError;

    /// Accepts `binary-phase`, `phase:<n>`, `phase:cont`, `binary-amplitude`,
    /// `amplitude:<n>` and `amplitude:cont`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || HoloError::UnknownScheme(s.to_string());
        match s.trim() {
            "binary-phase" => return Ok(Self::binary_phase()),
            "binary-amplitude" => return Ok(Self::binary_amplitude()),
            _ => {}
        }
        let (kind, levels) = s.trim().split_once(':').ok_or_else(bad)?;
        let kind = match kind {
            "phase" => Modulation::Phase,
            "amplitude" => Modulation::Amplitude,
            _ => return Err(bad()),
        };
        let levels = match levels {
            "cont" => Levels::Continuous,
            n => Levels::Discrete(n.parse().map_err(|_| bad())?),
        };
        Self::new(kind, levels).map_err(|_| bad())
    }
}

/// Quantises every pixel onto `scheme`.
pub fn quantise<T: Scalar>(field: &ComplexField<T>, scheme: &ModulationScheme) -> ComplexField<T> {
    let mut out = field.clone();
    for c in out.data_mut() {
        *c = scheme.quantise_value(*c);
    }
    out
}

/// Per-pixel magnitude of the quantisation change, the SPS sort key.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeMap<T> {
    width: usize,
    height: usize,
    delta: Vec<T>,
}

impl<T: Scalar> ChangeMap<T> {
    pub fn new(width: usize, height: usize, delta: Vec<T>) -> Result<Self> {
        if delta.len() != width * height {
            return Err(HoloError::InvalidParameter(format!(
                "change map has {} values, expected {}",
                delta.len(),
                width * height
            )));
        }
        if delta.iter().any(|d| !(*d >= T::zero())) {
            return Err(HoloError::InvalidParameter(
                "change magnitudes must be non-negative".into(),
            ));
        }
        Ok(Self { width, height, delta })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn delta(&self) -> &[T] {
        &self.delta
    }
}

/// `|quantised - original|` per pixel.
pub fn change_map<T: Scalar>(
    original: &ComplexField<T>,
    quantised: &ComplexField<T>,
) -> Result<ChangeMap<T>> {
    original.same_dims(quantised)?;
    let delta = original
        .data()
        .iter()
        .zip(quantised.data())
        .map(|(o, q)| (q - o).norm())
        .collect();
    Ok(ChangeMap {
        width: original.width(),
        height: original.height(),
        delta,
    })
}

/// A different allowed value to try in place of `current`.
///
/// Binary schemes flip to the other level; other discrete schemes pick one of
/// the remaining levels uniformly; continuous schemes draw uniformly (angle or
/// amplitude) until the draw differs from `current` by more than `1e-12`.
pub fn propose_value<T: Scalar>(
    current: Complex<T>,
    scheme: &ModulationScheme,
    rng: &mut SplitMix64,
) -> Complex<T> {
    let min_step = lit::<T>(1e-12);
    match (scheme.kind, scheme.levels) {
        (_, Levels::Discrete(2)) => {
            let k = scheme.nearest_level(current).unwrap_or(0);
            scheme.level(1 - k)
        }
        (_, Levels::Discrete(n)) => {
            let k = scheme.nearest_level(current).unwrap_or(0);
            let mut j = rng.below(n as u64 - 1) as u32;
            if j >= k {
                j += 1;
            }
            scheme.level(j)
        }
        (Modulation::Phase, Levels::Continuous) => loop {
            let angle = lit::<T>(rng.next_f64() * std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            let v = Complex::new(c, s);
            if (v - current).norm() > min_step {
                return v;
            }
        },
        (Modulation::Amplitude, Levels::Continuous) => loop {
            let v = Complex::new(lit::<T>(rng.next_f64()), T::zero());
            if (v - current).norm() > min_step {
                return v;
            }
        },
    }
}
