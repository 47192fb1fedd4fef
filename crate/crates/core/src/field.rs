//! Complex fields, the unitary 2D DFT pair and the single-pixel replay update.
//!
//! Storage is row-major: pixel `(x, y)` lives at `y * width + x`. The same
//! layout is used for replay fields, with `u` along the width and `v` along
//! the height.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{HoloError, Result};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    width: usize,
    height: usize,
    data: Vec<Complex<T>>,
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<usize> {
    if width < 2 || height < 2 {
        return Err(HoloError::Dimensions {
            width,
            height,
            reason: "both sides must be at least 2",
        });
    }
    width
        .checked_mul(height)
        .filter(|&n| n <= isize::MAX as usize / 16)
        .ok_or(HoloError::Dimensions {
            width,
            height,
            reason: "pixel count overflows addressable memory",
        })
}

impl<T: Scalar> ComplexField<T> {
    pub fn new(width: usize, height: usize, data: Vec<Complex<T>>) -> Result<Self> {
        let n = check_dims(width, height)?;
        if data.len() != n {
            return Err(HoloError::InvalidParameter(format!(
                "field data has {} values, expected {width}x{height} = {n}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![Complex::new(T::zero(), T::zero()); n],
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Result<Self> {
        let n = check_dims(width, height)?;
        let mut data = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self { width, height, data })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; fields have at least 2x2 pixels.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    #[inline]
    pub fn index_of(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn check_bounds(&self, x: usize, y: usize) -> Result<()> {
        if x >= self.width || y >= self.height {
            return Err(HoloError::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex<T> {
        self.data[self.index_of(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: Complex<T>) {
        let i = self.index_of(x, y);
        self.data[i] = value;
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.data.iter().map(|c| c.norm_sqr().sqrt()).collect()
    }

    pub fn same_dims<U>(&self, other: &ComplexField<U>) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(HoloError::DimensionMismatch {
                left: self.dims(),
                right: (other.width, other.height),
            });
        }
        Ok(())
    }
}

/// Planned forward and inverse unitary transforms for one field size.
pub struct Dft2<T: Scalar> {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
    scale: T,
}

impl<T: Scalar> Dft2<T> {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        let n = check_dims(width, height)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
            scale: T::one() / lit::<T>(n as f64).sqrt(),
        })
    }

    pub fn forward(&self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        let mut out = field.clone();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    pub fn inverse(&self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        let mut out = field.clone();
        self.inverse_in_place(&mut out)?;
        Ok(out)
    }

    pub fn forward_in_place(&self, field: &mut ComplexField<T>) -> Result<()> {
        self.check(field)?;
        self.run(field, true);
        Ok(())
    }

    pub fn inverse_in_place(&self, field: &mut ComplexField<T>) -> Result<()> {
        self.check(field)?;
        self.run(field, false);
        Ok(())
    }

    fn check(&self, field: &ComplexField<T>) -> Result<()> {
        if field.dims() != (self.width, self.height) {
            return Err(HoloError::DimensionMismatch {
                left: (self.width, self.height),
                right: field.dims(),
            });
        }
        Ok(())
    }

    fn run(&self, field: &mut ComplexField<T>, forward: bool) {
        let (w, h) = (self.width, self.height);
        let (rows, cols) = if forward {
            (&self.row_fwd, &self.col_fwd)
        } else {
            (&self.row_inv, &self.col_inv)
        };
        // rustfft processes every `w`-long chunk of the buffer.
        rows.process(&mut field.data);

        let mut columns = vec![Complex::new(T::zero(), T::zero()); w * h];
        for y in 0..h {
            for x in 0..w {
                columns[x * h + y] = field.data[y * w + x];
            }
        }
        cols.process(&mut columns);
        for x in 0..w {
            for y in 0..h {
                field.data[y * w + x] = columns[x * h + y].scale(self.scale);
            }
        }
    }
}

/// Forward transform `F[u,v] = (1/sqrt(NxNy)) sum f[x,y] exp(-2 pi i (ux/Nx + vy/Ny))`.
pub fn dft2<T: Scalar>(field: &ComplexField<T>) -> ComplexField<T> {
    let plan = Dft2::new(field.width, field.height).expect("field dims already validated");
    plan.forward(field).expect("plan matches field")
}

/// Inverse of [`dft2`]; positive exponent, same `1/sqrt(NxNy)` factor.
pub fn idft2<T: Scalar>(field: &ComplexField<T>) -> ComplexField<T> {
    let plan = Dft2::new(field.width, field.height).expect("field dims already validated");
    plan.inverse(field).expect("plan matches field")
}

/// Optical parameters of the Fresnel quadratic phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelParams<T> {
    wavelength: T,
    distance: T,
    pixel_pitch: T,
}

impl<T: Scalar> FresnelParams<T> {
    pub fn new(wavelength: T, distance: T, pixel_pitch: T) -> Result<Self> {
        if !(wavelength > T::zero()) || !wavelength.is_finite() {
            return Err(HoloError::InvalidParameter(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if distance == T::zero() || !distance.is_finite() {
            return Err(HoloError::InvalidParameter(format!(
                "propagation distance must be finite and non-zero, got {distance}"
            )));
        }
        if !(pixel_pitch > T::zero()) || !pixel_pitch.is_finite() {
            return Err(HoloError::InvalidParameter(format!(
                "pixel pitch must be positive, got {pixel_pitch}"
            )));
        }
        Ok(Self {
            wavelength,
            distance,
            pixel_pitch,
        })
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn distance(&self) -> T {
        self.distance
    }

    pub fn pixel_pitch(&self) -> T {
        self.pixel_pitch
    }

    /// Quadratic phase `pi (x^2 + y^2) / (lambda z)` at grid index `(ix, iy)`
    /// of a `width x height` field, with coordinates centred on
    /// `(width / 2, height / 2)`.
    pub fn phase_at(&self, ix: usize, iy: usize, width: usize, height: usize) -> T {
        let x = (lit::<T>(ix as f64) - lit::<T>((width / 2) as f64)) * self.pixel_pitch;
        let y = (lit::<T>(iy as f64) - lit::<T>((height / 2) as f64)) * self.pixel_pitch;
        T::PI() * (x * x + y * y) / (self.wavelength * self.distance)
    }
}

/// Multiplies each pixel by the Fresnel quadratic phase. A subsequent
/// [`dft2`] gives the mid-field replay.
///
/// Unlike the DFT, which indexes from the corner, the quadratic term is
/// centred on the optical axis.
pub fn fresnel_premultiply<T: Scalar>(
    field: &ComplexField<T>,
    params: &FresnelParams<T>,
) -> ComplexField<T> {
    let (w, h) = field.dims();
    let mut out = field.clone();
    for y in 0..h {
        for x in 0..w {
            let phase = params.phase_at(x, y, w, h);
            if phase == T::zero() {
                continue;
            }
            let (s, c) = phase.sin_cos();
            let i = y * w + x;
            out.data[i] = out.data[i] * Complex::new(c, s);
        }
    }
    out
}

/// Twiddle tables and scratch space for O(NxNy) single-pixel replay updates.
///
/// A change `dh` of aperture pixel `(x, y)` moves every replay value by
/// `dh / sqrt(NxNy) * exp(-2 pi i (ux/Nx + vy/Ny))`. The exponential
/// factorises into a row term `wx[(u x) mod Nx]` and a column term
/// `wy[(v y) mod Ny]`, both looked up from tables of roots of unity.
#[derive(Debug, Clone)]
pub struct DeltaKernel<T> {
    width: usize,
    height: usize,
    wx: Vec<Complex<T>>,
    wy: Vec<Complex<T>>,
    scale: T,
    row: Vec<Complex<T>>,
    col: Vec<Complex<T>>,
}

fn roots_of_unity<T: Scalar>(n: usize) -> Vec<Complex<T>> {
    (0..n)
        .map(|k| {
            // Exact values on the axes keep binary and quaternary cases clean.
            match (4 * k) % n == 0 {
                true => match 4 * k / n {
                    0 => Complex::new(T::one(), T::zero()),
                    1 => Complex::new(T::zero(), -T::one()),
                    2 => Complex::new(-T::one(), T::zero()),
                    _ => Complex::new(T::zero(), T::one()),
                },
                false => {
                    let angle = -lit::<T>(2.0 * std::f64::consts::PI * k as f64 / n as f64);
                    let (s, c) = angle.sin_cos();
                    Complex::new(c, s)
                }
            }
        })
        .collect()
}

impl<T: Scalar> DeltaKernel<T> {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        let n = check_dims(width, height)?;
        let zero = Complex::new(T::zero(), T::zero());
        Ok(Self {
            width,
            height,
            wx: roots_of_unity(width),
            wy: roots_of_unity(height),
            scale: T::one() / lit::<T>(n as f64).sqrt(),
            row: vec![zero; width],
            col: vec![zero; height],
        })
    }

    fn prepare(&mut self, x: usize, y: usize, dh: Complex<T>) {
        let (w, h) = (self.width, self.height);
        let mut k = 0;
        for u in 0..w {
            self.row[u] = self.wx[k];
            k += x;
            if k >= w {
                k -= w;
            }
        }
        let amp = dh.scale(self.scale);
        let mut k = 0;
        for v in 0..h {
            self.col[v] = amp * self.wy[k];
            k += y;
            if k >= h {
                k -= h;
            }
        }
    }

    fn check(&self, replay: &ComplexField<T>, x: usize, y: usize) -> Result<()> {
        if replay.dims() != (self.width, self.height) {
            return Err(HoloError::DimensionMismatch {
                left: (self.width, self.height),
                right: replay.dims(),
            });
        }
        replay.check_bounds(x, y)
    }

    /// Adds the replay contribution of changing aperture pixel `(x, y)` by `dh`.
    pub fn apply(
        &mut self,
        replay: &mut ComplexField<T>,
        x: usize,
        y: usize,
        dh: Complex<T>,
    ) -> Result<()> {
        self.check(replay, x, y)?;
        self.prepare(x, y, dh);
        for (line, &c) in replay.data.chunks_exact_mut(self.width).zip(&self.col) {
            for (r, &a) in line.iter_mut().zip(&self.row) {
                *r = *r + a * c;
            }
        }
        Ok(())
    }

    /// Phase-insensitive MSE the replay would have after the change, without
    /// modifying it. Sums in the same order as [`crate::metrics::mse`], so
    /// committing the change with [`DeltaKernel::apply`] and recomputing
    /// gives a bit-identical value.
    pub fn candidate_mse(
        &mut self,
        replay: &ComplexField<T>,
        target: &[T],
        x: usize,
        y: usize,
        dh: Complex<T>,
    ) -> Result<T> {
        self.check(replay, x, y)?;
        if target.len() != replay.len() {
            return Err(HoloError::InvalidParameter(format!(
                "target has {} values, replay has {}",
                target.len(),
                replay.len()
            )));
        }
        self.prepare(x, y, dh);
        let mut acc = T::zero();
        let w = self.width;
        for ((line, tline), &c) in replay
            .data
            .chunks_exact(w)
            .zip(target.chunks_exact(w))
            .zip(&self.col)
        {
            for ((&r, &t), &a) in line.iter().zip(tline).zip(&self.row) {
                let e = t - (r + a * c).norm_sqr().sqrt();
                acc = acc + e * e;
            }
        }
        Ok(acc / lit::<T>(replay.len() as f64))
    }
}

/// In-place replay update for a change `dh` of aperture pixel `(x, y)`.
///
/// The caller guarantees `replay` is the [`dft2`] of the current aperture.
/// Use a [`DeltaKernel`] directly when updating repeatedly.
pub fn delta_update<T: Scalar>(
    replay: &mut ComplexField<T>,
    x: usize,
    y: usize,
    dh: Complex<T>,
) -> Result<()> {
    replay.check_bounds(x, y)?;
    DeltaKernel::new(replay.width, replay.height)?.apply(replay, x, y, dh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    type C = Complex<f64>;

    fn random_field(w: usize, h: usize, seed: u64) -> ComplexField<f64> {
        let mut rng = SplitMix64::new(seed);
        ComplexField::from_fn(w, h, |_, _| {
            C::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0)
        })
        .unwrap()
    }

    #[test]
    fn rejects_degenerate_dims() {
        assert!(ComplexField::<f64>::zeros(1, 4).is_err());
        assert!(ComplexField::<f64>::zeros(4, 0).is_err());
        assert!(ComplexField::<f64>::zeros(usize::MAX, 2).is_err());
        assert!(ComplexField::<f64>::new(2, 2, vec![C::default(); 3]).is_err());
    }

    #[test]
    fn delta_transform_is_flat() {
        let mut f = ComplexField::<f64>::zeros(2, 2).unwrap();
        f.set(0, 0, C::new(1.0, 0.0));
        let out = dft2(&f);
        for c in out.data() {
            assert!((c - C::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn flat_inverse_is_delta() {
        let f = ComplexField::new(2, 2, vec![C::new(0.5, 0.0); 4]).unwrap();
        let out = idft2(&f);
        assert!((out.get(0, 0) - C::new(1.0, 0.0)).norm() < 1e-15);
        for i in 1..4 {
            assert!(out.data()[i].norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_rectangular() {
        let f = random_field(8, 6, 11);
        let back = idft2(&dft2(&f));
        for (a, b) in f.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_precision_transform() {
        let f = ComplexField::<f32>::from_fn(8, 8, |x, y| {
            Complex::new((x as f32 * 0.3).sin(), (y as f32 * 0.7).cos())
        })
        .unwrap();
        let back = idft2(&dft2(&f));
        for (a, b) in f.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-5);
        }
        assert!((dft2(&f).energy() - f.energy()).abs() / f.energy() < 1e-5);
    }

    #[test]
    fn plan_rejects_wrong_size() {
        let plan = Dft2::<f64>::new(4, 4).unwrap();
        let f = ComplexField::<f64>::zeros(4, 8).unwrap();
        assert!(matches!(
            plan.forward(&f),
            Err(HoloError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_delta_is_noop() {
        let mut r = random_field(8, 8, 3);
        let before = r.clone();
        delta_update(&mut r, 3, 5, C::new(0.0, 0.0)).unwrap();
        assert_eq!(r, before);
    }

    #[test]
    fn delta_out_of_bounds() {
        let mut r = random_field(8, 4, 3);
        assert!(matches!(
            delta_update(&mut r, 8, 0, C::new(1.0, 0.0)),
            Err(HoloError::OutOfBounds { .. })
        ));
        assert!(delta_update(&mut r, 0, 4, C::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn candidate_matches_applied() {
        let h = random_field(16, 8, 5);
        let replay = dft2(&h);
        let target: Vec<f64> = (0..128).map(|i| (i % 7) as f64 / 7.0).collect();
        let mut kernel = DeltaKernel::new(16, 8).unwrap();
        let dh = C::new(-0.4, 0.9);
        let predicted = kernel.candidate_mse(&replay, &target, 9, 3, dh).unwrap();
        let mut applied = replay.clone();
        kernel.apply(&mut applied, 9, 3, dh).unwrap();
        let t = crate::target::TargetImage::new(16, 8, target).unwrap();
        assert_eq!(predicted, crate::metrics::mse(&t, &applied).unwrap());
    }

    #[test]
    fn fresnel_params_validated() {
        assert!(FresnelParams::new(0.0, 1.0, 1e-6).is_err());
        assert!(FresnelParams::new(633e-9, 0.0, 1e-6).is_err());
        assert!(FresnelParams::new(633e-9, 1.0, -1e-6).is_err());
        assert!(FresnelParams::new(633e-9, -0.5, 8e-6).is_ok());
    }

    #[test]
    fn fresnel_centre_unchanged() {
        let f = random_field(4, 4, 9);
        let p = FresnelParams::new(633e-9, 0.5, 8e-6).unwrap();
        let out = fresnel_premultiply(&f, &p);
        assert_eq!(out.get(2, 2), f.get(2, 2));
    }
}
