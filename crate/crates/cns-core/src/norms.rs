//! Parseval norms and inner products of the spaces `H`, `V`, `E`.

use serde::{Deserialize, Serialize};

use crate::field::{SpectralScalar, SpectralVector};
use crate::grid::DOMAIN_LENGTH;
use crate::transforms::{synthesize_oversampled, synthesize_vector};

/// Parseval factor `(2*pi)^2` of the convention `u = sum c(k) e^{ikx}`, so
/// `|u|_H` is the true `L2(T^2)` norm.
pub const PARSEVAL: f64 = DOMAIN_LENGTH * DOMAIN_LENGTH;

/// The norm triple of `u` in the spaces `H`, `V = D(A^{1/2})`, `E = D(A)`:
/// `h = |u|_{L2}`, `v = |grad u|_{L2}`, `e = |A u|_{L2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorms {
    pub h: f64,
    pub v: f64,
    pub e: f64,
}

fn norm_sums(weights: impl Fn(f64) -> (f64, f64, f64), coeffs: &[(f64, f64)]) -> (f64, f64, f64) {
    let mut h2 = 0.0;
    let mut v2 = 0.0;
    let mut e2 = 0.0;
    for &(ksq, csq) in coeffs {
        let (wh, wv, we) = weights(ksq);
        h2 += wh * csq;
        v2 += wv * csq;
        e2 += we * csq;
    }
    (h2, v2, e2)
}

fn mode_table_scalar(s: &SpectralScalar) -> Vec<(f64, f64)> {
    s.grid()
        .iter_modes()
        .map(|(idx, k1, k2)| {
            let ksq = (k1 * k1 + k2 * k2) as f64;
            (ksq, s.coeffs()[idx].norm_sqr())
        })
        .collect()
}

/// `h^2 = (2pi)^2 sum |c|^2`, `v^2 = (2pi)^2 sum |k|^2 |c|^2`,
/// `e^2 = (2pi)^2 sum |k|^4 |c|^2`, summed over both components.
pub fn sobolev_norms(u: &SpectralVector) -> SobolevNorms {
    let mut table = mode_table_scalar(u.component(0));
    table.extend(mode_table_scalar(u.component(1)));
    let (h2, v2, e2) = norm_sums(|ksq| (1.0, ksq, ksq * ksq), &table);
    SobolevNorms {
        h: (PARSEVAL * h2).sqrt(),
        v: (PARSEVAL * v2).sqrt(),
        e: (PARSEVAL * e2).sqrt(),
    }
}

pub fn sobolev_norms_scalar(s: &SpectralScalar) -> SobolevNorms {
    let table = mode_table_scalar(s);
    let (h2, v2, e2) = norm_sums(|ksq| (1.0, ksq, ksq * ksq), &table);
    SobolevNorms {
        h: (PARSEVAL * h2).sqrt(),
        v: (PARSEVAL * v2).sqrt(),
        e: (PARSEVAL * e2).sqrt(),
    }
}

/// `L2` inner product `<u, v>_H` (real part; the imaginary part vanishes for
/// Hermitian fields).
pub fn inner_h(u: &SpectralVector, v: &SpectralVector) -> f64 {
    let mut acc = 0.0;
    for c in 0..2 {
        for (a, b) in u
            .component(c)
            .coeffs()
            .iter()
            .zip(v.component(c).coeffs().iter())
        {
            acc += (a * b.conj()).re;
        }
    }
    PARSEVAL * acc
}

pub fn inner_h_scalar(a: &SpectralScalar, b: &SpectralScalar) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.coeffs().iter().zip(b.coeffs().iter()) {
        acc += (x * y.conj()).re;
    }
    PARSEVAL * acc
}

pub fn norm_h(u: &SpectralVector) -> f64 {
    sobolev_norms(u).h
}

pub fn norm_h_scalar(s: &SpectralScalar) -> f64 {
    sobolev_norms_scalar(s).h
}

/// Full `H^2` Sobolev norm `(|f|^2 + |grad f|^2 + |D^2 f|^2)^{1/2}` of a
/// scalar test function, via `sum (1 + |k|^2 + |k|^4) |c|^2`.
pub fn norm_h2_scalar(s: &SpectralScalar) -> f64 {
    let table = mode_table_scalar(s);
    let mut acc = 0.0;
    for (ksq, csq) in table {
        acc += (1.0 + ksq + ksq * ksq) * csq;
    }
    (PARSEVAL * acc).sqrt()
}

/// `L^p` norm of a scalar field by oversampled grid quadrature. The 4x
/// oversampling makes the rectangle rule exact for `p <= 8` on fields
/// supported inside the 2/3 dealias band.
pub fn lp_norm_scalar(s: &SpectralScalar, p: f64, oversample: usize) -> f64 {
    let samples = synthesize_oversampled(s, oversample);
    let m = s.grid().n() * oversample;
    let w = (DOMAIN_LENGTH / m as f64).powi(2);
    let sum: f64 = samples.iter().map(|v| v.abs().powf(p)).sum();
    (w * sum).powf(1.0 / p)
}

/// `L^p` norm of `|u(x)|` (pointwise Euclidean magnitude) of a vector field.
pub fn lp_norm_vector(u: &SpectralVector, p: f64, oversample: usize) -> f64 {
    let a = synthesize_oversampled(u.component(0), oversample);
    let b = synthesize_oversampled(u.component(1), oversample);
    let m = u.grid().n() * oversample;
    let w = (DOMAIN_LENGTH / m as f64).powi(2);
    let sum: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x * x + y * y).sqrt().powf(p))
        .sum();
    (w * sum).powf(1.0 / p)
}

/// Sup norm of a scalar field over grid samples, optionally oversampled.
pub fn linf_norm_scalar(s: &SpectralScalar, oversample: usize) -> f64 {
    synthesize_oversampled(s, oversample)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest pointwise speed `max |u(x)|` on the base grid.
pub fn max_speed(u: &SpectralVector) -> f64 {
    let (a, b) = synthesize_vector(u);
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x * x + y * y).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::taylor_green;
    use crate::grid::GridSpec;

    #[test]
    fn zero_field_has_zero_norms() {
        let grid = GridSpec::new(8).unwrap();
        let u = SpectralVector::zeros(grid);
        let n = sobolev_norms(&u);
        assert_eq!((n.h, n.v, n.e), (0.0, 0.0, 0.0));
    }

    #[test]
    fn taylor_green_norms_match_closed_forms() {
        // |u|_H = pi sqrt(2), |u|_V = 2 pi, |u|_E = 2 pi sqrt(2)
        let grid = GridSpec::new(32).unwrap();
        let n = sobolev_norms(&taylor_green(grid));
        let pi = std::f64::consts::PI;
        assert!((n.h - pi * 2.0f64.sqrt()).abs() < 1e-12);
        assert!((n.v - 2.0 * pi).abs() < 1e-12);
        assert!((n.e - 2.0 * pi * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l4_norm_of_sine_matches_quadrature_closed_form() {
        // int_T2 sin^4(x1) dx = 3 pi^2 / 2
        let grid = GridSpec::new(32).unwrap();
        let samples = crate::transforms::sample_function(grid, |x1, _| x1.sin());
        let s = crate::transforms::forward_transform(grid, &samples).unwrap();
        let l4 = lp_norm_scalar(&s, 4.0, 4);
        let expected = (1.5 * std::f64::consts::PI.powi(2)).powf(0.25);
        assert!((l4 - expected).abs() < 1e-12, "got {l4}, want {expected}");
    }
}
