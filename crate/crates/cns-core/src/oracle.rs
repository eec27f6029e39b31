//! Reference implementations used only by tests: brute-force Galerkin
//! convolution for the advection term (`O(N^4)`) kept independent of the
//! pseudo-spectral evaluation path it cross-checks.

use num_complex::Complex64;

use crate::field::{SpectralScalar, SpectralVector};
use crate::operators::leray_project;

/// Direct convolution-sum evaluation of `Leray[(u . grad) v]` restricted to
/// the dealias band: for each retained output mode `k`,
/// `w_j(k) = sum_{p+q=k} i (u(p) . q) v_j(q)`, then Leray projection.
///
/// Single-threaded by design; cost grows as the fourth power of the band
/// width, which confines it to test grids.
pub fn bilinear_b_convolution(u: &SpectralVector, v: &SpectralVector) -> SpectralVector {
    let grid = u.grid();
    assert_eq!(grid.n(), v.grid().n(), "grid mismatch");
    let band = grid.dealias_band();
    let mut out = SpectralVector::zeros(grid);

    // active input modes of v (band-limited by assumption)
    let mut active_v: Vec<(i64, i64, usize)> = Vec::new();
    for (idx, q1, q2) in grid.iter_modes() {
        if q1.abs().max(q2.abs()) <= band
            && (v.component(0).coeffs()[idx] != Complex64::ZERO
                || v.component(1).coeffs()[idx] != Complex64::ZERO)
        {
            active_v.push((q1, q2, idx));
        }
    }

    for (out_idx, k1, k2) in grid.iter_modes() {
        if k1.abs().max(k2.abs()) > band {
            continue;
        }
        let mut w = [Complex64::ZERO; 2];
        for &(q1, q2, q_idx) in &active_v {
            let p1 = k1 - q1;
            let p2 = k2 - q2;
            if p1.abs().max(p2.abs()) > band {
                continue;
            }
            let p_idx = grid.linear_index(p1, p2);
            let u_dot_q = u.component(0).coeffs()[p_idx] * q1 as f64
                + u.component(1).coeffs()[p_idx] * q2 as f64;
            let iu = Complex64::new(0.0, 1.0) * u_dot_q;
            w[0] += iu * v.component(0).coeffs()[q_idx];
            w[1] += iu * v.component(1).coeffs()[q_idx];
        }
        out.component_mut(0).coeffs_mut()[out_idx] = w[0];
        out.component_mut(1).coeffs_mut()[out_idx] = w[1];
    }
    let mut out = leray_project(&out);
    out.component_mut(0).coeffs_mut()[0] = Complex64::ZERO;
    out.component_mut(1).coeffs_mut()[0] = Complex64::ZERO;
    out
}
