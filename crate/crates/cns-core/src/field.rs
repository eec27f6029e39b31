//! Spectral fields: complex coefficient arrays on the wavevector lattice.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::grid::GridSpec;

/// Relative tolerance on the divergence residual below which a velocity field
/// counts as divergence-free.
pub const DIVERGENCE_FREE_TOL: f64 = 1e-12;

/// Hermitian-symmetry tolerance used by the synthesis routines.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Real-valued mean-zero scalar field on the torus, stored as Fourier
/// coefficients under the convention `s(x) = sum_k c(k) exp(i k . x)`.
///
/// Invariants: `c(0) = 0` (mean-zero, membership in `L2_0`) and
/// `c(-k) = conj(c(k))` (realness), where `-k` wraps modulo `n` so the
/// unmatched Nyquist line pairs with itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalar {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralScalar {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::ZERO; grid.len()],
        }
    }

    /// Wrap raw coefficients. The caller is responsible for the type
    /// invariants; `check_invariants` verifies them.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self, CoreError> {
        if coeffs.len() != grid.len() {
            return Err(CoreError::DimensionMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at wavevector `(k1, k2)`.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.linear_index(k1, k2)]
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        let idx = self.grid.linear_index(k1, k2);
        self.coeffs[idx] = value;
    }

    /// Largest deviation from Hermitian symmetry, `max |c(-k) - conj(c(k))|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = (n - i1) % n;
                let j2 = (n - i2) % n;
                let d = (self.coeffs[j1 * n + j2] - self.coeffs[i1 * n + i2].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Replace each conjugate pair by its Hermitian average, making the
    /// symmetry exact. Leaves the mean mode untouched.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n();
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = (n - i1) % n;
                let j2 = (n - i2) % n;
                let a = i1 * n + i2;
                let b = j1 * n + j2;
                if a < b {
                    let avg = 0.5 * (self.coeffs[a] + self.coeffs[b].conj());
                    self.coeffs[a] = avg;
                    self.coeffs[b] = avg.conj();
                } else if a == b {
                    // self-conjugate mode: must be real
                    self.coeffs[a] = Complex64::new(self.coeffs[a].re, 0.0);
                }
            }
        }
    }

    pub fn mean_mode_abs(&self) -> f64 {
        self.coeffs[0].norm()
    }

    pub fn check_invariants(&self, tol: f64) -> Result<(), CoreError> {
        let res = self.hermitian_residual();
        let scale = self.linf_coeff().max(1.0);
        if res > tol * scale {
            return Err(CoreError::HermitianViolation {
                residual: res,
                tolerance: tol * scale,
            });
        }
        if self.mean_mode_abs() > tol * scale {
            return Err(CoreError::NonzeroMean(self.mean_mode_abs()));
        }
        Ok(())
    }

    fn linf_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Zero every coefficient with `max(|k1|, |k2|) > dealias_fraction * n/2`.
    /// Idempotent.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let grid = self.grid;
        for (idx, k1, k2) in grid.iter_modes() {
            if !grid.in_dealias_band(k1, k2) {
                self.coeffs[idx] = Complex64::ZERO;
            }
        }
    }

    /// Zero the Nyquist lines `k_i = n/2` where the odd derivative of the
    /// interpolant is ill-defined.
    pub fn zero_nyquist(&mut self) {
        let n = self.grid.n();
        let ny = n / 2;
        for i in 0..n {
            self.coeffs[ny * n + i] = Complex64::ZERO;
            self.coeffs[i * n + ny] = Complex64::ZERO;
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid.n(), other.grid.n());
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += o;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid.n(), other.grid.n());
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c -= o;
        }
        out
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.grid.n(), other.grid.n());
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += factor * o;
        }
    }

    /// Multiply each coefficient by a per-mode real factor (diagonal operator).
    pub fn apply_multiplier(&self, factors: &[f64]) -> Self {
        debug_assert_eq!(factors.len(), self.coeffs.len());
        let mut out = self.clone();
        for (c, f) in out.coeffs.iter_mut().zip(factors.iter()) {
            *c *= *f;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Two-component velocity field `(u1, u2)` sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    components: [SpectralScalar; 2],
}

impl SpectralVector {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            components: [SpectralScalar::zeros(grid), SpectralScalar::zeros(grid)],
        }
    }

    pub fn from_components(u1: SpectralScalar, u2: SpectralScalar) -> Result<Self, CoreError> {
        if u1.grid().n() != u2.grid().n() {
            return Err(CoreError::GridMismatch {
                expected: u1.grid().n(),
                got: u2.grid().n(),
            });
        }
        Ok(Self {
            components: [u1, u2],
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &SpectralScalar {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut SpectralScalar {
        &mut self.components[i]
    }

    /// Relative divergence residual `max_k |k . u(k)| / max_k (|k| |u(k)|)`.
    pub fn divergence_residual(&self) -> f64 {
        let grid = self.grid();
        let mut num = 0.0f64;
        let mut scale = 0.0f64;
        for (idx, k1, k2) in grid.iter_modes() {
            let u1 = self.components[0].coeffs()[idx];
            let u2 = self.components[1].coeffs()[idx];
            let div = (k1 as f64) * u1 + (k2 as f64) * u2;
            let kn = ((k1 * k1 + k2 * k2) as f64).sqrt();
            num = num.max(div.norm());
            scale = scale.max(kn * (u1.norm().max(u2.norm())));
        }
        if scale == 0.0 {
            0.0
        } else {
            num / scale
        }
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_residual() <= DIVERGENCE_FREE_TOL
    }

    pub fn dealias(&self) -> Self {
        Self {
            components: [self.components[0].dealias(), self.components[1].dealias()],
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            components: [
                self.components[0].scale(factor),
                self.components[1].scale(factor),
            ],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: [
                self.components[0].add(&other.components[0]),
                self.components[1].add(&other.components[1]),
            ],
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            components: [
                self.components[0].sub(&other.components[0]),
                self.components[1].sub(&other.components[1]),
            ],
        }
    }

    pub fn axpy(&mut self, factor: f64, other: &Self) {
        self.components[0].axpy(factor, &other.components[0]);
        self.components[1].axpy(factor, &other.components[1]);
    }

    pub fn apply_multiplier(&self, factors: &[f64]) -> Self {
        Self {
            components: [
                self.components[0].apply_multiplier(factors),
                self.components[1].apply_multiplier(factors),
            ],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(SpectralScalar::is_finite)
    }

    pub fn check_invariants(&self, tol: f64) -> Result<(), CoreError> {
        self.components[0].check_invariants(tol)?;
        self.components[1].check_invariants(tol)
    }
}

/// The Taylor-Green eigenfield `(sin x1 cos x2, -cos x1 sin x2)`, an
/// eigenfunction of the Stokes operator (`A u = 2u`) with `B(u,u) = 0`.
/// Not normalized; its `L2` norm is `pi * sqrt(2)`.
pub fn taylor_green(grid: GridSpec) -> SpectralVector {
    let mut u1 = SpectralScalar::zeros(grid);
    let mut u2 = SpectralScalar::zeros(grid);
    let quarter = Complex64::new(0.25, 0.0);
    let i = Complex64::i();
    // sin a cos b = (e^{i(a+b)} + e^{i(a-b)} - e^{-i(a-b)} - e^{-i(a+b)}) / 4i
    u1.set_coeff(1, 1, -i * quarter);
    u1.set_coeff(1, -1, -i * quarter);
    u1.set_coeff(-1, 1, i * quarter);
    u1.set_coeff(-1, -1, i * quarter);
    // -cos a sin b = -(e^{i(a+b)} - e^{i(a-b)} + e^{-i(a-b)} - e^{-i(a+b)}) / 4i
    u2.set_coeff(1, 1, i * quarter);
    u2.set_coeff(1, -1, -i * quarter);
    u2.set_coeff(-1, 1, i * quarter);
    u2.set_coeff(-1, -1, -i * quarter);
    SpectralVector::from_components(u1, u2).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_green_is_divergence_free_and_hermitian() {
        let grid = GridSpec::new(16).unwrap();
        let tg = taylor_green(grid);
        assert!(tg.is_divergence_free());
        tg.check_invariants(1e-14).unwrap();
    }

    #[test]
    fn dealias_is_idempotent_and_kills_nyquist_mode() {
        let grid = GridSpec::new(16).unwrap();
        let mut s = SpectralScalar::zeros(grid);
        s.set_coeff(8, 0, Complex64::new(1.0, 0.0));
        s.set_coeff(2, 3, Complex64::new(0.5, -0.5));
        let once = s.dealias();
        assert_eq!(once.coeff(8, 0), Complex64::ZERO);
        assert_eq!(once.coeff(2, 3), Complex64::new(0.5, -0.5));
        assert_eq!(once.dealias(), once);
    }

    #[test]
    fn symmetrize_enforces_exact_hermitian_pairs() {
        let grid = GridSpec::new(8).unwrap();
        let mut s = SpectralScalar::zeros(grid);
        s.set_coeff(1, 2, Complex64::new(1.0, 0.5));
        s.set_coeff(-1, -2, Complex64::new(0.9, -0.4));
        s.symmetrize();
        assert_eq!(s.coeff(1, 2), s.coeff(-1, -2).conj());
        assert_eq!(s.hermitian_residual(), 0.0);
    }
}
