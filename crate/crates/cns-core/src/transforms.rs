//! FFT synthesis/analysis and spectral differentiation.
//!
//! Convention: `u(x) = sum_k c(k) exp(i k . x)` on the uniform grid
//! `x_j = 2*pi*j/n`, so analysis is the forward DFT divided by `n^2` and
//! synthesis is the unnormalized inverse DFT. Each thread owns its own FFT
//! plans and scratch space; fields themselves are immutable inputs.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::CoreError;
use crate::field::{SpectralScalar, SpectralVector, HERMITIAN_TOL};
use crate::grid::GridSpec;

thread_local! {
    static PLAN_CACHE: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLAN_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                let dir = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                planner.plan_fft(n, dir)
            })
            .clone()
    })
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// In-place 2D DFT over a row-major `n x n` complex buffer.
fn fft2(buf: &mut [Complex64], n: usize, forward: bool) {
    let p = plan(n, forward);
    let mut scratch = vec![Complex64::ZERO; p.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n) {
        p.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, n);
    for row in buf.chunks_exact_mut(n) {
        p.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, n);
}

/// Analyze real `n x n` samples (row-major, `samples[j1*n + j2] = u(x_j1, x_j2)`)
/// into the coefficients of the interpolating trigonometric polynomial.
///
/// The result is exactly Hermitian (conjugate pairs are averaged) and is
/// projected onto the mean-zero subspace `L2_0`: the `k = 0` coefficient is
/// dropped, since every field type in this crate lives there.
pub fn forward_transform(grid: GridSpec, samples: &[f64]) -> Result<SpectralScalar, CoreError> {
    let n = grid.n();
    if samples.len() != n * n {
        return Err(CoreError::DimensionMismatch {
            expected: n * n,
            got: samples.len(),
        });
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, n, true);
    let norm = 1.0 / (n * n) as f64;
    for c in buf.iter_mut() {
        *c *= norm;
    }
    let mut out = SpectralScalar::from_coeffs(grid, buf)?;
    out.symmetrize();
    out.coeffs_mut()[0] = Complex64::ZERO;
    Ok(out)
}

/// Synthesize point samples on the `n x n` grid. Fails if the coefficients
/// are not Hermitian to tolerance; the imaginary residue of the synthesis is
/// checked against the same tolerance and then discarded.
pub fn inverse_transform(s: &SpectralScalar) -> Result<Vec<f64>, CoreError> {
    let scale = s
        .coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let res = s.hermitian_residual();
    if res > HERMITIAN_TOL * scale.max(1.0) {
        return Err(CoreError::HermitianViolation {
            residual: res,
            tolerance: HERMITIAN_TOL * scale.max(1.0),
        });
    }
    Ok(synthesize_unchecked(s))
}

/// Synthesis without the Hermitian check, for internal hot loops where the
/// invariant is maintained by construction.
pub(crate) fn synthesize_unchecked(s: &SpectralScalar) -> Vec<f64> {
    let n = s.grid().n();
    let mut buf = s.coeffs().to_vec();
    fft2(&mut buf, n, false);
    buf.into_iter().map(|c| c.re).collect()
}

/// Synthesize on a `factor * n` grid by zero-padding the spectrum. Exact for
/// band-limited fields; used for sup-norm and `L^p` quadrature where products
/// of fields exceed the base grid's resolution.
pub fn synthesize_oversampled(s: &SpectralScalar, factor: usize) -> Vec<f64> {
    assert!(factor >= 1);
    let n = s.grid().n();
    let m = n * factor;
    if factor == 1 {
        return synthesize_unchecked(s);
    }
    let mut big = vec![Complex64::ZERO; m * m];
    let grid = s.grid();
    for (idx, k1, k2) in grid.iter_modes() {
        let c = s.coeffs()[idx];
        if c != Complex64::ZERO {
            let i1 = if k1 >= 0 { k1 as usize } else { (k1 + m as i64) as usize };
            let i2 = if k2 >= 0 { k2 as usize } else { (k2 + m as i64) as usize };
            big[i1 * m + i2] = c;
        }
    }
    fft2(&mut big, m, false);
    big.into_iter().map(|c| c.re).collect()
}

/// Synthesize both velocity components.
pub fn synthesize_vector(u: &SpectralVector) -> (Vec<f64>, Vec<f64>) {
    (
        synthesize_unchecked(u.component(0)),
        synthesize_unchecked(u.component(1)),
    )
}

/// Spectral partial derivative along axis `axis` (0 or 1): multiply by
/// `i * k_axis`. The unmatched Nyquist line is zeroed (its odd derivative is
/// ill-defined on the real interpolant).
pub fn derivative(s: &SpectralScalar, axis: usize) -> SpectralScalar {
    debug_assert!(axis < 2);
    let grid = s.grid();
    let mut out = s.clone();
    let ny = (grid.n() / 2) as i64;
    for (idx, k1, k2) in grid.iter_modes() {
        let k = if axis == 0 { k1 } else { k2 };
        if k1 == ny || k2 == ny {
            out.coeffs_mut()[idx] = Complex64::ZERO;
        } else {
            out.coeffs_mut()[idx] = Complex64::new(0.0, k as f64) * s.coeffs()[idx];
        }
    }
    out
}

/// Gradient of a scalar field as a two-component spectral field.
pub fn gradient(s: &SpectralScalar) -> SpectralVector {
    SpectralVector::from_components(derivative(s, 0), derivative(s, 1)).expect("same grid")
}

/// Sample the function `f(x1, x2)` on the uniform grid, row-major.
pub fn sample_function<F: Fn(f64, f64) -> f64>(grid: GridSpec, f: F) -> Vec<f64> {
    let pts = grid.sample_points();
    let n = grid.n();
    let mut out = Vec::with_capacity(n * n);
    for &x1 in &pts {
        for &x2 in &pts {
            out.push(f(x1, x2));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_give_zero_coefficients() {
        let grid = GridSpec::new(8).unwrap();
        let s = forward_transform(grid, &vec![0.0; 64]).unwrap();
        assert!(s.coeffs().iter().all(|c| *c == Complex64::ZERO));
    }

    #[test]
    fn sine_has_the_analytic_coefficients() {
        // sin(x1) = -i/2 e^{i x1} + i/2 e^{-i x1}
        let grid = GridSpec::new(16).unwrap();
        let samples = sample_function(grid, |x1, _| x1.sin());
        let s = forward_transform(grid, &samples).unwrap();
        let c_plus = s.coeff(1, 0);
        let c_minus = s.coeff(-1, 0);
        assert!((c_plus - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!((c_minus - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        for (idx, k1, k2) in grid.iter_modes() {
            if (k1, k2) != (1, 0) && (k1, k2) != (-1, 0) {
                assert!(s.coeffs()[idx].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cosine_synthesis_matches_analytic_samples() {
        let grid = GridSpec::new(16).unwrap();
        let mut s = SpectralScalar::zeros(grid);
        s.set_coeff(0, 1, Complex64::new(0.5, 0.0));
        s.set_coeff(0, -1, Complex64::new(0.5, 0.0));
        let samples = inverse_transform(&s).unwrap();
        let expected = sample_function(grid, |_, x2| x2.cos());
        for (a, b) in samples.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_of_sine_is_cosine() {
        let grid = GridSpec::new(16).unwrap();
        let samples = sample_function(grid, |x1, _| x1.sin());
        let s = forward_transform(grid, &samples).unwrap();
        let g = gradient(&s);
        let g1 = inverse_transform(g.component(0)).unwrap();
        let expected = sample_function(grid, |x1, _| x1.cos());
        for (a, b) in g1.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
        let g2 = inverse_transform(g.component(1)).unwrap();
        assert!(g2.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn oversampled_synthesis_agrees_on_common_points() {
        let grid = GridSpec::new(8).unwrap();
        let mut s = SpectralScalar::zeros(grid);
        s.set_coeff(1, 2, Complex64::new(0.3, 0.1));
        s.set_coeff(-1, -2, Complex64::new(0.3, -0.1));
        let base = synthesize_unchecked(&s);
        let over = synthesize_oversampled(&s, 4);
        let n = 8;
        let m = 32;
        for j1 in 0..n {
            for j2 in 0..n {
                let a = base[j1 * n + j2];
                let b = over[(4 * j1) * m + 4 * j2];
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn inverse_rejects_non_hermitian_input() {
        let grid = GridSpec::new(8).unwrap();
        let mut s = SpectralScalar::zeros(grid);
        s.set_coeff(1, 0, Complex64::new(1.0, 0.0));
        // missing conjugate partner
        assert!(matches!(
            inverse_transform(&s),
            Err(CoreError::HermitianViolation { .. })
        ));
    }
}
