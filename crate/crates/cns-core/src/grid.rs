//! Wavevector lattice of the truncated Fourier representation.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Side length of the periodic box, fixed to `2*pi` per dimension.
pub const DOMAIN_LENGTH: f64 = 2.0 * std::f64::consts::PI;

/// Square `n x n` lattice of retained wavevectors `k = (k1, k2)` with
/// `k_i in {-n/2+1, ..., n/2}`, plus the dealiasing cutoff.
///
/// Coefficient arrays use FFT index order: index `i` along an axis carries
/// wavenumber `i` for `i <= n/2` and `i - n` for `i > n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    dealias_fraction: f64,
}

impl GridSpec {
    /// Grid with the standard 2/3-rule dealiasing cutoff.
    pub fn new(n: usize) -> Result<Self, CoreError> {
        Self::with_dealias(n, 2.0 / 3.0)
    }

    /// Grid with an explicit dealias fraction in `(0, 1]`. A fraction of 1
    /// retains every mode (no dealiasing), useful as a negative control.
    pub fn with_dealias(n: usize, dealias_fraction: f64) -> Result<Self, CoreError> {
        if n < 4 || n % 2 != 0 {
            return Err(CoreError::InvalidGrid(format!(
                "n must be even and >= 4, got {n}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(CoreError::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self {
            n,
            dealias_fraction,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Number of retained coefficients (`n * n`).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Wavenumber carried by FFT index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// FFT index carrying wavenumber `k` (must lie in the lattice).
    pub fn index_of(&self, k: i64) -> usize {
        let half = (self.n / 2) as i64;
        debug_assert!(k > -half && k <= half, "wavenumber {k} outside lattice");
        if k >= 0 {
            k as usize
        } else {
            (k + self.n as i64) as usize
        }
    }

    /// Linear index of the coefficient at wavevector `(k1, k2)`.
    pub fn linear_index(&self, k1: i64, k2: i64) -> usize {
        self.index_of(k1) * self.n + self.index_of(k2)
    }

    /// Largest retained `max(|k1|, |k2|)` after dealiasing.
    pub fn dealias_band(&self) -> i64 {
        let cutoff = self.dealias_fraction * (self.n as f64) / 2.0;
        cutoff.floor() as i64
    }

    /// Whether wavevector `(k1, k2)` survives the dealias cutoff
    /// (`max(|k1|,|k2|) <= dealias_fraction * n/2`).
    pub fn in_dealias_band(&self, k1: i64, k2: i64) -> bool {
        let m = k1.abs().max(k2.abs()) as f64;
        m <= self.dealias_fraction * (self.n as f64) / 2.0
    }

    /// Iterate `(linear index, k1, k2)` over the whole lattice.
    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        let n = self.n;
        (0..n * n).map(move |idx| {
            let i1 = idx / n;
            let i2 = idx % n;
            (idx, self.wavenumber(i1), self.wavenumber(i2))
        })
    }

    /// Uniform physical sample points `x_j = 2*pi*j/n` along one axis.
    pub fn sample_points(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| DOMAIN_LENGTH * j as f64 / self.n as f64)
            .collect()
    }

    /// Quadrature weight of one sample of the rectangle rule, `(2*pi/n)^2`.
    pub fn quadrature_weight(&self) -> f64 {
        (DOMAIN_LENGTH / self.n as f64).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_covers_spec_range() {
        let g = GridSpec::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        for k in -3..=4 {
            assert_eq!(g.wavenumber(g.index_of(k)), k);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(2).is_err());
        assert!(GridSpec::new(7).is_err());
        assert!(GridSpec::with_dealias(8, 0.0).is_err());
        assert!(GridSpec::with_dealias(8, 1.2).is_err());
    }

    #[test]
    fn dealias_band_two_thirds() {
        let g = GridSpec::new(64).unwrap();
        assert_eq!(g.dealias_band(), 21);
        assert!(g.in_dealias_band(21, -21));
        assert!(!g.in_dealias_band(22, 0));
        assert!(!g.in_dealias_band(0, 32));
    }

    #[test]
    fn full_fraction_keeps_nyquist() {
        let g = GridSpec::with_dealias(8, 1.0).unwrap();
        assert!(g.in_dealias_band(4, 4));
    }
}
