//! Error metrics, correlation and A/B statistics.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{HoloError, Result};
use crate::field::ComplexField;
use crate::scalar::{lit, Scalar};
use crate::target::TargetImage;

/// Phase-insensitive mean squared error `mean((|T| - |R|)^2)`.
pub fn mse<T: Scalar>(target: &TargetImage<T>, replay: &ComplexField<T>) -> Result<T> {
    if target.dims() != replay.dims() {
        return Err(HoloError::DimensionMismatch {
            left: target.dims(),
            right: replay.dims(),
        });
    }
    Ok(mse_slices(target.mag(), replay.data()))
}

pub(crate) fn mse_slices<T: Scalar>(target: &[T], replay: &[Complex<T>]) -> T {
    let mut acc = T::zero();
    for (&t, r) in target.iter().zip(replay) {
        let e = t - r.norm_sqr().sqrt();
        acc = acc + e * e;
    }
    acc / lit::<T>(replay.len() as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(HoloError::InvalidParameter(format!(
            "pearson needs equal lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(HoloError::InvalidParameter(
            "pearson needs at least 2 samples".into(),
        ));
    }
    let n = lit::<T>(xs.len() as f64);
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(HoloError::ZeroVariance("xs"));
    }
    if syy == T::zero() {
        return Err(HoloError::ZeroVariance("ys"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample<T> {
    pub iteration: u64,
    pub mse: T,
    pub accepted: u64,
}

/// Sampled convergence history of one search run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace<T> {
    samples: Vec<TraceSample<T>>,
}

impl<T: Scalar> ConvergenceTrace<T> {
    pub fn new() -> Self {
        Self { samples: Vec::new() }
    }

    /// Appends a sample. Iterations must strictly increase and accepted
    /// counts must not decrease.
    pub fn push(&mut self, iteration: u64, mse: T, accepted: u64) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if iteration <= last.iteration || accepted < last.accepted {
                return Err(HoloError::InvalidParameter(format!(
                    "trace sample ({iteration}, {accepted}) does not follow ({}, {})",
                    last.iteration, last.accepted
                )));
            }
        }
        if !(mse >= T::zero()) {
            return Err(HoloError::InvalidParameter(format!("negative or NaN mse {mse}")));
        }
        self.samples.push(TraceSample {
            iteration,
            mse,
            accepted,
        });
        Ok(())
    }

    pub fn samples(&self) -> &[TraceSample<T>] {
        &self.samples
    }

    pub fn first(&self) -> Option<&TraceSample<T>> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&TraceSample<T>> {
        self.samples.last()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].mse <= w[0].mse)
    }

    /// `iteration,mse,accepted` rows; floats printed with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,mse,accepted\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.iteration, fmt_float(s.mse), s.accepted);
        }
        out
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_float<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

fn endpoints<T: Scalar>(
    baseline: &ConvergenceTrace<T>,
    variant: &ConvergenceTrace<T>,
) -> Result<(T, T, T)> {
    let (Some(b0), Some(b1), Some(v0), Some(v1)) =
        (baseline.first(), baseline.last(), variant.first(), variant.last())
    else {
        return Err(HoloError::IncomparableTraces("empty trace".into()));
    };
    let scale = b0.mse.abs().max(v0.mse.abs());
    if (b0.mse - v0.mse).abs() > lit::<T>(1e-9) * scale {
        return Err(HoloError::IncomparableTraces(format!(
            "initial errors differ: {} vs {}",
            b0.mse, v0.mse
        )));
    }
    if b1.iteration != v1.iteration {
        return Err(HoloError::IncomparableTraces(format!(
            "traces end at iterations {} and {}",
            b1.iteration, v1.iteration
        )));
    }
    Ok((b0.mse, b1.mse, v1.mse))
}

/// Relative gain in error reduction of `variant` over `baseline`:
/// `((E0 - E_variant) - (E0 - E_baseline)) / (E0 - E_baseline)`.
///
/// Equal reductions give exactly 0, including the case where neither run
/// reduced the error. Otherwise a baseline that did not reduce the error is
/// an error.
pub fn relative_improvement<T: Scalar>(
    baseline: &ConvergenceTrace<T>,
    variant: &ConvergenceTrace<T>,
) -> Result<T> {
    let (e0, eb, ev) = endpoints(baseline, variant)?;
    let base_reduction = e0 - eb;
    let var_reduction = e0 - ev;
    if var_reduction == base_reduction {
        return Ok(T::zero());
    }
    if !(base_reduction > T::zero()) {
        return Err(HoloError::UndefinedImprovement(base_reduction.to_f64_lossy()));
    }
    Ok((var_reduction - base_reduction) / base_reduction)
}

/// Relative reduction in final error, `(E_baseline - E_variant) / E_baseline`.
pub fn final_error_improvement<T: Scalar>(
    baseline: &ConvergenceTrace<T>,
    variant: &ConvergenceTrace<T>,
) -> Result<T> {
    let (_, eb, ev) = endpoints(baseline, variant)?;
    if eb == ev {
        return Ok(T::zero());
    }
    if !(eb > T::zero()) {
        return Err(HoloError::UndefinedImprovement(eb.to_f64_lossy()));
    }
    Ok((eb - ev) / eb)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn trace(points: &[(u64, f64, u64)]) -> ConvergenceTrace<f64> {
        let mut t = ConvergenceTrace::new();
        for &(i, m, a) in points {
            t.push(i, m, a).unwrap();
        }
        t
    }

    #[test]
    fn mse_hand_case() {
        let t = TargetImage::zeros(2, 2).unwrap();
        let mut r = ComplexField::zeros(2, 2).unwrap();
        r.set(1, 0, C::new(0.0, 2.0));
        assert_eq!(mse(&t, &r).unwrap(), 1.0);
    }

    #[test]
    fn mse_ignores_phase() {
        let t = TargetImage::new(2, 2, vec![1.0, 2.0, 0.5, 0.0]).unwrap();
        let r = ComplexField::from_fn(2, 2, |x, y| C::from_polar(t.get(x, y), (x * 3 + y) as f64)).unwrap();
        assert!(mse(&t, &r).unwrap() < 1e-30);
    }

    #[test]
    fn mse_dimension_mismatch() {
        let t = TargetImage::<f64>::zeros(2, 2).unwrap();
        let r = ComplexField::zeros(4, 2).unwrap();
        assert!(matches!(mse(&t, &r), Err(HoloError::DimensionMismatch { .. })));
    }

    #[test]
    fn pearson_linear() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64).sin() * 3.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(HoloError::ZeroVariance("xs"))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0], &[5.0, 5.0]),
            Err(HoloError::ZeroVariance("ys"))
        ));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn improvement_hand_case() {
        let base = trace(&[(0, 1.0, 0), (10, 0.5, 4)]);
        let var = trace(&[(0, 1.0, 0), (10, 0.4, 5)]);
        assert!((relative_improvement(&base, &var).unwrap() - 0.2).abs() < 1e-12);
        assert!((final_error_improvement(&base, &var).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(relative_improvement(&base, &base).unwrap(), 0.0);
    }

    #[test]
    fn improvement_degenerate() {
        let flat = trace(&[(0, 1.0, 0)]);
        assert_eq!(relative_improvement(&flat, &flat).unwrap(), 0.0);
        let base = trace(&[(0, 1.0, 0), (10, 1.0, 0)]);
        let var = trace(&[(0, 1.0, 0), (10, 0.9, 1)]);
        assert!(matches!(
            relative_improvement(&base, &var),
            Err(HoloError::UndefinedImprovement(_))
        ));
        let other_start = trace(&[(0, 2.0, 0), (10, 0.9, 1)]);
        assert!(relative_improvement(&var, &other_start).is_err());
        let short = trace(&[(0, 1.0, 0), (5, 0.9, 1)]);
        assert!(relative_improvement(&var, &short).is_err());
    }

    #[test]
    fn trace_rejects_bad_order() {
        let mut t = trace(&[(0, 1.0, 0), (10, 0.5, 3)]);
        assert!(t.push(10, 0.4, 3).is_err());
        assert!(t.push(20, 0.4, 2).is_err());
        assert!(t.push(20, -0.1, 3).is_err());
        assert!(t.push(20, 0.4, 3).is_ok());
    }

    #[test]
    fn csv_format() {
        let t = trace(&[(0, 0.25, 0), (100, 0.125, 7)]);
        assert_eq!(
            t.to_csv(),
            "iteration,mse,accepted\n0,2.5000000000000000e-1,0\n100,1.2500000000000000e-1,7\n"
        );
    }
}
