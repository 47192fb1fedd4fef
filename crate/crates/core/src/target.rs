//! Target images: magnitude grids the replay field should reproduce.

use num_complex::Complex;

use crate::error::{HoloError, Result};
use crate::field::{check_dims, idft2, ComplexField};
use crate::rng::SplitMix64;
use crate::scalar::{lit, Scalar};

/// Non-negative target magnitudes `|T|`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetImage<T> {
    width: usize,
    height: usize,
    mag: Vec<T>,
}

impl<T: Scalar> TargetImage<T> {
    pub fn new(width: usize, height: usize, mag: Vec<T>) -> Result<Self> {
        let n = check_dims(width, height)?;
        if mag.len() != n {
            return Err(HoloError::InvalidParameter(format!(
                "image has {} values, expected {n}",
                mag.len()
            )));
        }
        if let Some(i) = mag.iter().position(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(HoloError::InvalidParameter(format!(
                "magnitude at index {i} is {} (must be finite and >= 0)",
                mag[i]
            )));
        }
        Ok(Self { width, height, mag })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut mag = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                mag.push(f(x, y));
            }
        }
        Self::new(width, height, mag)
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            mag: vec![T::zero(); n],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.mag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mag.is_empty()
    }

    pub fn mag(&self) -> &[T] {
        &self.mag
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.mag[y * self.width + x]
    }

    pub fn energy(&self) -> T {
        self.mag.iter().fold(T::zero(), |acc, &m| acc + m * m)
    }

    /// Makes the image 180-degree rotation symmetric by taking the brighter of
    /// each pixel and its rotated partner. Binary-phase holograms can only
    /// replay such images.
    pub fn induce_symmetry(&self) -> Self {
        let (w, h) = self.dims();
        let mut mag = self.mag.clone();
        for y in 0..h {
            for x in 0..w {
                let a = self.mag[y * w + x];
                let b = self.mag[(h - 1 - y) * w + (w - 1 - x)];
                mag[y * w + x] = a.max(b);
            }
        }
        Self { mag, ..*self }
    }

    /// Scales to `sum |T|^2 = Nx Ny`, the energy a unit-magnitude SLM delivers.
    pub fn normalize_energy(&self) -> Result<Self> {
        let energy = self.energy();
        if energy <= T::zero() {
            return Err(HoloError::ZeroEnergy);
        }
        let s = (lit::<T>(self.len() as f64) / energy).sqrt();
        Ok(Self {
            mag: self.mag.iter().map(|&m| m * s).collect(),
            ..*self
        })
    }

    /// Nearest-neighbour resample to `width x height`.
    pub fn resample_nearest(&self, width: usize, height: usize) -> Result<Self> {
        if (width, height) == self.dims() {
            return Ok(self.clone());
        }
        let (sw, sh) = self.dims();
        Self::from_fn(width, height, |x, y| {
            let sx = (x * sw) / width;
            let sy = (y * sh) / height;
            self.mag[sy * sw + sx]
        })
    }
}

/// Procedural stand-in for the Mandrill test photograph: a random-phase
/// field with a `1/f^1.1` amplitude spectrum (the fall-off of natural
/// images), histogram-equalised onto `(0, 1)`. Deterministic for a given
/// size.
pub fn synthetic_mandrill(size: usize) -> Result<TargetImage<f64>> {
    check_dims(size, size)?;
    let mut rng = SplitMix64::new(0x4D41_4E44_5249_4C4C);
    let spectrum = ComplexField::from_fn(size, size, |u, v| {
        let fx = u.min(size - u) as f64;
        let fy = v.min(size - v) as f64;
        let r = (fx * fx + fy * fy).sqrt();
        let phase = rng.next_f64() * std::f64::consts::TAU;
        if r == 0.0 {
            Complex::new(0.0, 0.0)
        } else {
            Complex::from_polar(r.powf(-1.1), phase)
        }
    })?;
    let texture: Vec<f64> = idft2(&spectrum).data().iter().map(|c| c.re).collect();
    // histogram equalisation: photographs span the full grey range
    let mut ranks: Vec<usize> = (0..texture.len()).collect();
    ranks.sort_by(|&a, &b| texture[a].total_cmp(&texture[b]).then(a.cmp(&b)));
    let mut grey = vec![0.0; texture.len()];
    for (r, &i) in ranks.iter().enumerate() {
        grey[i] = (r as f64 + 0.5) / texture.len() as f64;
    }
    TargetImage::new(size, size, grey)
}

/// USAF-1951-style bar target: elements of three vertical and three
/// horizontal bars with bar width shrinking by `2^(-1/6)` per element,
/// bright on a dark background.
pub fn usaf_target(size: usize) -> Result<TargetImage<f64>> {
    check_dims(size, size)?;
    let mut img = vec![0.0f64; size * size];
    let margin = (size / 32).max(1);
    let (mut cx, mut cy) = (margin, margin);
    let mut row_height = 0;
    let mut bar = size as f64 / 24.0;
    for _ in 0..18 {
        let bw = (bar.round() as usize).max(1);
        let len = 5 * bw;
        let elem_w = 5 * bw + bw + len;
        if cx + elem_w + margin > size {
            cx = margin;
            cy += row_height + 2 * bw.max(1);
            row_height = 0;
        }
        if cy + len + margin > size {
            break;
        }
        for k in 0..3 {
            for y in cy..cy + len {
                for x in cx + 2 * k * bw..cx + (2 * k + 1) * bw {
                    img[y * size + x] = 1.0;
                }
            }
            let hx = cx + 6 * bw;
            for y in cy + 2 * k * bw..cy + (2 * k + 1) * bw {
                for x in hx..hx + len {
                    img[y * size + x] = 1.0;
                }
            }
        }
        cx += elem_w + 2 * bw;
        row_height = row_height.max(len);
        bar /= 2f64.powf(1.0 / 6.0);
    }
    TargetImage::new(size, size, img)
}
