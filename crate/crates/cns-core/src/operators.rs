//! The continuous operators of the constrained equation: Leray projection,
//! Stokes operator, heat semigroup, advection forms and the constrained
//! nonlinearity. All pure functions of immutable inputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::field::{SpectralScalar, SpectralVector};
use crate::grid::{GridSpec, DOMAIN_LENGTH};
use crate::norms::{inner_h, norm_h, sobolev_norms};
use crate::transforms::{derivative, synthesize_oversampled, synthesize_vector};

/// Kinematic viscosity; `nu = 0` selects the Euler limit equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscosityParam {
    nu: f64,
}

impl ViscosityParam {
    pub fn new(nu: f64) -> Result<Self, CoreError> {
        if nu < 0.0 || !nu.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "viscosity must be finite and >= 0, got {nu}"
            )));
        }
        Ok(Self { nu })
    }

    pub fn value(&self) -> f64 {
        self.nu
    }
}

/// Absolute tolerance on `| |u|_H - 1 |` for operations that require a point
/// of the manifold: loose enough for accumulated integrator drift, tight
/// enough to keep the dissipation identity meaningful.
pub const MANIFOLD_TOL: f64 = 1e-8;

/// Leray-Helmholtz projection onto divergence-free fields:
/// per mode `u <- u - k (k . u)/|k|^2`. Idempotent and self-adjoint in `H`.
pub fn leray_project(v: &SpectralVector) -> SpectralVector {
    let grid = v.grid();
    let mut out = v.clone();
    for (idx, k1, k2) in grid.iter_modes() {
        let ksq = (k1 * k1 + k2 * k2) as f64;
        if ksq == 0.0 {
            continue;
        }
        let a = v.component(0).coeffs()[idx];
        let b = v.component(1).coeffs()[idx];
        let kdot = (k1 as f64) * a + (k2 as f64) * b;
        out.component_mut(0).coeffs_mut()[idx] = a - (k1 as f64) * kdot / ksq;
        out.component_mut(1).coeffs_mut()[idx] = b - (k2 as f64) * kdot / ksq;
    }
    out
}

/// Stokes operator `A u = -Delta u`: per mode `u <- |k|^2 u`.
pub fn stokes_apply(u: &SpectralVector) -> SpectralVector {
    let factors = laplacian_symbol(u.grid());
    u.apply_multiplier(&factors)
}

/// Per-mode `|k|^2` table in FFT index order.
pub fn laplacian_symbol(grid: GridSpec) -> Vec<f64> {
    grid.iter_modes()
        .map(|(_, k1, k2)| (k1 * k1 + k2 * k2) as f64)
        .collect()
}

/// Per-mode heat kernel `exp(-nu t |k|^2)`.
pub fn heat_kernel(grid: GridSpec, nu: f64, t: f64) -> Vec<f64> {
    grid.iter_modes()
        .map(|(_, k1, k2)| (-nu * t * (k1 * k1 + k2 * k2) as f64).exp())
        .collect()
}

/// Heat semigroup `S(t) u`: per mode `u <- exp(-nu t |k|^2) u`.
pub fn heat_semigroup(
    u: &SpectralVector,
    t: f64,
    nu: ViscosityParam,
) -> Result<SpectralVector, CoreError> {
    if t < 0.0 {
        return Err(CoreError::NegativeTime(t));
    }
    Ok(u.apply_multiplier(&heat_kernel(u.grid(), nu.value(), t)))
}

/// Navier-Stokes bilinear map `B(u, v) = Leray[(u . grad) v]`, evaluated
/// pseudo-spectrally with mandatory dealiasing. For inputs supported inside
/// the 2/3 band the result is the exact Galerkin convolution, which is what
/// makes `<B(u,u), Au> = 0` hold to roundoff on the torus.
pub fn bilinear_b(u: &SpectralVector, v: &SpectralVector) -> Result<SpectralVector, CoreError> {
    let grid = u.grid();
    if grid.n() != v.grid().n() {
        return Err(CoreError::GridMismatch {
            expected: grid.n(),
            got: v.grid().n(),
        });
    }
    let (u1, u2) = synthesize_vector(u);
    let mut out = SpectralVector::zeros(grid);
    for j in 0..2 {
        let d1 = crate::transforms::synthesize_unchecked(&derivative(v.component(j), 0));
        let d2 = crate::transforms::synthesize_unchecked(&derivative(v.component(j), 1));
        let advected: Vec<f64> = u1
            .iter()
            .zip(u2.iter())
            .zip(d1.iter().zip(d2.iter()))
            .map(|((a, b), (g1, g2))| a * g1 + b * g2)
            .collect();
        let mut w = crate::transforms::forward_transform(grid, &advected)?;
        w.dealias_in_place();
        *out.component_mut(j) = w;
    }
    out = leray_project(&out);
    Ok(out)
}

/// Trilinear advection form `b(u, v, w) = sum_ij int u_i (d_i v_j) w_j dx` by
/// real-space quadrature on a 2x oversampled grid (exact for cubic products of
/// fields within the dealias band).
pub fn trilinear_b(
    u: &SpectralVector,
    v: &SpectralVector,
    w: &SpectralVector,
) -> Result<f64, CoreError> {
    let n = u.grid().n();
    if v.grid().n() != n || w.grid().n() != n {
        return Err(CoreError::GridMismatch {
            expected: n,
            got: v.grid().n().max(w.grid().n()),
        });
    }
    let factor = 2;
    let m = n * factor;
    let u1 = synthesize_oversampled(u.component(0), factor);
    let u2 = synthesize_oversampled(u.component(1), factor);
    let mut acc = 0.0;
    for j in 0..2 {
        let d1 = synthesize_oversampled(&derivative(v.component(j), 0), factor);
        let d2 = synthesize_oversampled(&derivative(v.component(j), 1), factor);
        let wj = synthesize_oversampled(w.component(j), factor);
        for idx in 0..m * m {
            acc += (u1[idx] * d1[idx] + u2[idx] * d2[idx]) * wj[idx];
        }
    }
    let weight = (DOMAIN_LENGTH / m as f64).powi(2);
    Ok(acc * weight)
}

/// Constraint nonlinearity `G1(u) = |grad u|^2 u = ||u||_V^2 u`.
pub fn g1_constraint(u: &SpectralVector) -> SpectralVector {
    let v = sobolev_norms(u).v;
    u.scale(v * v)
}

/// Full nonlinearity of the nu-weighted constrained equation,
/// `G(u) = nu G1(u) - B(u, u)`; with `nu = 1` this is the map whose Duhamel
/// fixed point defines the mild solution.
pub fn g_total(u: &SpectralVector, nu: ViscosityParam) -> Result<SpectralVector, CoreError> {
    let mut out = bilinear_b(u, u)?.scale(-1.0);
    if nu.value() != 0.0 {
        out.axpy(nu.value() * sobolev_norms(u).v.powi(2), u);
    }
    Ok(out)
}

fn require_on_manifold(u: &SpectralVector) -> Result<f64, CoreError> {
    let h = norm_h(u);
    let drift = (h - 1.0).abs();
    if drift > MANIFOLD_TOL {
        return Err(CoreError::OffManifold {
            drift,
            tolerance: MANIFOLD_TOL,
        });
    }
    Ok(h)
}

/// Projection onto the tangent space of the unit sphere at `u`:
/// `pi_u(v) = v - <v, u>_H u`. Requires `|u|_H = 1` within `MANIFOLD_TOL`.
pub fn tangent_project(
    u: &SpectralVector,
    v: &SpectralVector,
) -> Result<SpectralVector, CoreError> {
    require_on_manifold(u)?;
    let mut out = v.clone();
    out.axpy(-inner_h(v, u), u);
    Ok(out)
}

/// Gradient of the Dirichlet energy along the sphere,
/// `grad_M E(u) = A u - ||u||_V^2 u`. Its squared `H` norm equals
/// `|u|_E^2 - ||u||_V^4` on the manifold.
pub fn manifold_gradient(u: &SpectralVector) -> Result<SpectralVector, CoreError> {
    require_on_manifold(u)?;
    let mut out = stokes_apply(u);
    out.axpy(-sobolev_norms(u).v.powi(2), u);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::taylor_green;
    use crate::random::random_smooth_field;

    fn normalized_tg(n: usize) -> SpectralVector {
        let tg = taylor_green(GridSpec::new(n).unwrap());
        let h = norm_h(&tg);
        tg.scale(1.0 / h)
    }

    #[test]
    fn leray_annihilates_gradient_modes_and_keeps_solenoidal_ones() {
        let grid = GridSpec::new(8).unwrap();
        let mut v = SpectralVector::zeros(grid);
        // mode k = (1,0) with u parallel to k: pure gradient, must vanish
        v.component_mut(0).set_coeff(1, 0, Complex64::new(1.0, 0.0));
        v.component_mut(0).set_coeff(-1, 0, Complex64::new(1.0, 0.0));
        let p = leray_project(&v);
        assert!(norm_h(&p) < 1e-14);

        let mut w = SpectralVector::zeros(grid);
        // mode k = (1,0) with u perpendicular to k: already solenoidal
        w.component_mut(1).set_coeff(1, 0, Complex64::new(0.0, -0.5));
        w.component_mut(1).set_coeff(-1, 0, Complex64::new(0.0, 0.5));
        let q = leray_project(&w);
        assert!(norm_h(&q.sub(&w)) < 1e-14);
    }

    #[test]
    fn leray_is_idempotent_and_self_adjoint() {
        let grid = GridSpec::new(16).unwrap();
        // deliberately non-solenoidal input: gradient of a random scalar plus
        // a solenoidal part
        let a = random_smooth_field(1, 3.0, grid);
        let mut v = crate::transforms::gradient(a.component(0));
        v.axpy(0.7, &a);
        let w = {
            let b = random_smooth_field(2, 3.0, grid);
            let mut w = crate::transforms::gradient(b.component(1));
            w.axpy(-0.3, &b);
            w
        };
        let pv = leray_project(&v);
        let ppv = leray_project(&pv);
        assert!(norm_h(&ppv.sub(&pv)) < 1e-13 * norm_h(&pv).max(1.0));
        let lhs = inner_h(&pv, &w);
        let rhs = inner_h(&v, &leray_project(&w));
        assert!((lhs - rhs).abs() < 1e-13 * lhs.abs().max(1.0));
    }

    #[test]
    fn stokes_doubles_the_taylor_green_field() {
        let grid = GridSpec::new(16).unwrap();
        let tg = taylor_green(grid);
        let au = stokes_apply(&tg);
        assert!(norm_h(&au.sub(&tg.scale(2.0))) < 1e-13);
    }

    #[test]
    fn stokes_pairs_to_the_v_norm() {
        let grid = GridSpec::new(32).unwrap();
        let u = random_smooth_field(5, 3.0, grid);
        let v2 = sobolev_norms(&u).v.powi(2);
        let pairing = inner_h(&stokes_apply(&u), &u);
        assert!((pairing - v2).abs() < 1e-12 * v2);
    }

    #[test]
    fn heat_semigroup_identity_decay_and_composition() {
        let grid = GridSpec::new(16).unwrap();
        let nu = ViscosityParam::new(1.0).unwrap();
        let u = random_smooth_field(9, 3.0, grid);
        let s0 = heat_semigroup(&u, 0.0, nu).unwrap();
        assert!(norm_h(&s0.sub(&u)) < 1e-15);

        // single mode |k|^2 = 2 decays by e^{-1} at t = 0.5
        let tg = taylor_green(grid);
        let st = heat_semigroup(&tg, 0.5, nu).unwrap();
        assert!(norm_h(&st.sub(&tg.scale((-1.0f64).exp()))) < 1e-13);

        let a = heat_semigroup(&heat_semigroup(&u, 0.3, nu).unwrap(), 0.3, nu).unwrap();
        let b = heat_semigroup(&u, 0.6, nu).unwrap();
        assert!(norm_h(&a.sub(&b)) < 1e-13);

        assert!(matches!(
            heat_semigroup(&u, -0.1, nu),
            Err(CoreError::NegativeTime(_))
        ));
    }

    #[test]
    fn bilinear_vanishes_on_zero_and_taylor_green() {
        let grid = GridSpec::new(32).unwrap();
        let u = random_smooth_field(3, 3.0, grid);
        let z = SpectralVector::zeros(grid);
        assert!(norm_h(&bilinear_b(&z, &u).unwrap()) < 1e-14);
        assert!(norm_h(&bilinear_b(&u, &z).unwrap()) < 1e-14);
        // (u . grad)u is a pure gradient for Taylor-Green
        let tg = normalized_tg(32);
        assert!(norm_h(&bilinear_b(&tg, &tg).unwrap()) < 1e-13);
    }

    #[test]
    fn trilinear_skew_symmetry_and_duality() {
        let grid = GridSpec::new(32).unwrap();
        let u = random_smooth_field(10, 3.0, grid);
        let v = random_smooth_field(11, 3.0, grid);
        let w = random_smooth_field(12, 3.0, grid);
        let scale = sobolev_norms(&u).v.powi(3);

        // b(u,u,u) = 0 and b(u,w,w) = 0 for divergence-free u
        assert!(trilinear_b(&u, &u, &u).unwrap().abs() < 1e-11 * scale);
        assert!(trilinear_b(&u, &w, &w).unwrap().abs() < 1e-11 * scale);
        // b(0,v,w) = 0
        let z = SpectralVector::zeros(grid);
        assert!(trilinear_b(&z, &v, &w).unwrap().abs() < 1e-15);

        // duality with the bilinear map
        let lhs = trilinear_b(&u, &v, &w).unwrap();
        let rhs = inner_h(&bilinear_b(&u, &v).unwrap(), &w);
        assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0));
    }

    #[test]
    fn g1_on_normalized_taylor_green_is_2u() {
        let tg = normalized_tg(16);
        let g = g1_constraint(&tg);
        assert!(norm_h(&g.sub(&tg.scale(2.0))) < 1e-12);
    }

    #[test]
    fn g1_is_cubically_homogeneous() {
        let grid = GridSpec::new(16).unwrap();
        let u = random_smooth_field(4, 3.0, grid);
        let c = 1.7;
        let lhs = g1_constraint(&u.scale(c));
        let rhs = g1_constraint(&u).scale(c * c * c);
        assert!(norm_h(&lhs.sub(&rhs)) < 1e-12 * norm_h(&rhs));
    }

    #[test]
    fn g_total_reduces_correctly_at_nu_zero_and_on_taylor_green() {
        let grid = GridSpec::new(32).unwrap();
        let u = random_smooth_field(8, 3.0, grid);
        let euler = g_total(&u, ViscosityParam::new(0.0).unwrap()).unwrap();
        let minus_b = bilinear_b(&u, &u).unwrap().scale(-1.0);
        assert!(norm_h(&euler.sub(&minus_b)) < 1e-14);

        let tg = normalized_tg(32);
        let g = g_total(&tg, ViscosityParam::new(1.0).unwrap()).unwrap();
        assert!(norm_h(&g.sub(&tg.scale(2.0))) < 1e-12);
    }

    #[test]
    fn tangent_projection_identities() {
        let grid = GridSpec::new(32).unwrap();
        let u = random_smooth_field(6, 3.0, grid);
        let v = random_smooth_field(7, 3.0, grid).scale(0.8);

        assert!(norm_h(&tangent_project(&u, &u).unwrap()) < 1e-11);
        let p = tangent_project(&u, &v).unwrap();
        assert!(inner_h(&p, &u).abs() < 1e-11);
        let pp = tangent_project(&u, &p).unwrap();
        assert!(norm_h(&pp.sub(&p)) < 1e-12);

        // B(u,u) is already tangent at u
        let b = bilinear_b(&u, &u).unwrap();
        let pb = tangent_project(&u, &b).unwrap();
        assert!(norm_h(&pb.sub(&b)) < 1e-11 * norm_h(&b).max(1e-30));

        // off-manifold input is rejected
        assert!(matches!(
            tangent_project(&u.scale(1.1), &v),
            Err(CoreError::OffManifold { .. })
        ));
    }

    #[test]
    fn manifold_gradient_identities() {
        let tg = normalized_tg(32);
        let g = manifold_gradient(&tg).unwrap();
        assert!(norm_h(&g) < 1e-12);

        let grid = GridSpec::new(32).unwrap();
        let u = random_smooth_field(13, 3.0, grid);
        let g = manifold_gradient(&u).unwrap();
        assert!(inner_h(&g, &u).abs() < 1e-11 * norm_h(&g).max(1.0));
        let n = sobolev_norms(&u);
        let expected = n.e.powi(2) - n.v.powi(4);
        let got = inner_h(&g, &g);
        assert!((got - expected).abs() < 1e-10 * expected.abs().max(1.0));
    }
}
