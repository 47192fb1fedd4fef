#![allow(dead_code)]

use std::f64::consts::PI;

use holo_sps::{Complex, ComplexField, Field, SplitMix64};

pub type C = Complex<f64>;

/// Quadruple loop over the transform definition; `sign` is -1 forward, +1 inverse.
pub fn brute_dft(f: &Field, sign: f64) -> Field {
    let (w, h) = f.dims();
    let norm = 1.0 / ((w * h) as f64).sqrt();
    ComplexField::from_fn(w, h, |u, v| {
        let mut acc = C::new(0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                let angle = sign * 2.0 * PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                acc += f.get(x, y) * C::new(angle.cos(), angle.sin());
            }
        }
        acc * norm
    })
    .unwrap()
}

pub fn random_field(w: usize, h: usize, seed: u64) -> Field {
    let mut rng = SplitMix64::new(seed);
    ComplexField::from_fn(w, h, |_, _| C::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0)).unwrap()
}

pub fn binary_field(w: usize, h: usize, seed: u64) -> Field {
    let mut rng = SplitMix64::new(seed);
    ComplexField::from_fn(w, h, |_, _| if rng.below(2) == 0 { C::new(1.0, 0.0) } else { C::new(-1.0, 0.0) }).unwrap()
}

pub fn max_abs_diff(a: &Field, b: &Field) -> f64 {
    a.data().iter().zip(b.data()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}
