//! Scalar vorticity formulation: Curl, Biot-Savart inversion, an independent
//! vorticity-form solver, and the maximum-principle / weak-form diagnostics.
//!
//! Sign convention: `Curl u = D1 u2 - D2 u1` throughout. The streamfunction
//! relation is chosen so that `Curl` and the Biot-Savart map invert each
//! other under this convention: `psi(k) = -omega(k)/|k|^2` and
//! `u = (-D2 psi, D1 psi)`.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::field::{SpectralScalar, SpectralVector};
use crate::integrate::{check_cfl, integrate, phi1, phi2, phi3, IntegrateFailure, IntegratorConfig};
use crate::norms::{
    inner_h_scalar, linf_norm_scalar, norm_h_scalar, norm_h2_scalar, sobolev_norms_scalar,
};
use crate::operators::ViscosityParam;
use crate::transforms::{derivative, forward_transform, synthesize_unchecked, synthesize_vector};

/// Oversampling factor for sup-norm evaluation inside the maximum-principle
/// check; reduces the under-resolution bias of the grid sup.
pub const SUP_NORM_OVERSAMPLE: usize = 4;

/// Scalar vorticity snapshot.
#[derive(Debug, Clone)]
pub struct VorticityState {
    pub omega: SpectralScalar,
    pub time: f64,
}

/// `Curl u = D1 u2 - D2 u1`: per mode `i k1 u2 - i k2 u1`. Mean-zero by
/// construction; the unmatched Nyquist lines are zeroed with the derivative.
pub fn curl(u: &SpectralVector) -> SpectralScalar {
    let d1u2 = derivative(u.component(1), 0);
    let d2u1 = derivative(u.component(0), 1);
    d1u2.sub(&d2u1)
}

/// Biot-Savart reconstruction of the divergence-free velocity with the given
/// vorticity: `psi(k) = -omega(k)/|k|^2`, `u = (-D2 psi, D1 psi)`.
/// Then `curl(biot_savart(omega)) = omega` and `div u = 0` exactly.
pub fn biot_savart(omega: &SpectralScalar) -> Result<SpectralVector, CoreError> {
    let mean = omega.mean_mode_abs();
    if mean > 1e-12 {
        return Err(CoreError::NonzeroMean(mean));
    }
    let grid = omega.grid();
    let mut psi = SpectralScalar::zeros(grid);
    for (idx, k1, k2) in grid.iter_modes() {
        let ksq = (k1 * k1 + k2 * k2) as f64;
        if ksq > 0.0 {
            psi.coeffs_mut()[idx] = -omega.coeffs()[idx] / ksq;
        }
    }
    let u1 = derivative(&psi, 1).scale(-1.0);
    let u2 = derivative(&psi, 0);
    SpectralVector::from_components(u1, u2)
}

/// Advection term of the vorticity form in divergence form,
/// `div(u omega)`, evaluated pseudo-spectrally with dealiasing.
fn advection_divergence_form(
    u: &SpectralVector,
    omega: &SpectralScalar,
) -> Result<SpectralScalar, CoreError> {
    let grid = omega.grid();
    let (u1, u2) = synthesize_vector(u);
    let w = synthesize_unchecked(omega);
    let f1: Vec<f64> = u1.iter().zip(w.iter()).map(|(a, b)| a * b).collect();
    let f2: Vec<f64> = u2.iter().zip(w.iter()).map(|(a, b)| a * b).collect();
    let f1 = forward_transform(grid, &f1)?;
    let f2 = forward_transform(grid, &f2)?;
    let mut out = derivative(&f1, 0).add(&derivative(&f2, 1));
    out.dealias_in_place();
    out.coeffs_mut()[0] = Complex64::ZERO;
    Ok(out)
}

/// Nonlinearity of the vorticity equation:
/// `N(omega) = -div(u omega) + nu ||u||_V^2 omega`, with `u` recovered from
/// `omega` by Biot-Savart and `||u||_V^2 = |omega|_{L2}^2` (recomputed from
/// the recovered field unless a cross-input path value is supplied).
fn vorticity_nonlinearity(
    omega: &SpectralScalar,
    nu: f64,
    v_norm_sq_override: Option<f64>,
) -> Result<SpectralScalar, CoreError> {
    let u = biot_savart(omega)?;
    let mut out = advection_divergence_form(&u, omega)?.scale(-1.0);
    if nu != 0.0 {
        let v_sq = v_norm_sq_override.unwrap_or_else(|| norm_h_scalar(omega).powi(2));
        out.axpy(nu * v_sq, omega);
    }
    Ok(out)
}

/// One ETD-RK4 (Cox-Matthews) step for the vorticity equation. A different
/// fourth-order exponential integrator than the velocity solver's
/// integrating-factor RK4, so the two trajectories are genuinely independent
/// discretizations and their discrepancy measures form equivalence rather
/// than roundoff.
fn step_vorticity_etdrk4(
    omega: &SpectralScalar,
    dt: f64,
    nu: f64,
    v_norm_sq_override: Option<f64>,
) -> Result<SpectralScalar, CoreError> {
    let grid = omega.grid();
    let z_full: Vec<f64> = grid
        .iter_modes()
        .map(|(_, k1, k2)| -nu * dt * (k1 * k1 + k2 * k2) as f64)
        .collect();
    let e_full: Vec<f64> = z_full.iter().map(|&z| z.exp()).collect();
    let e_half: Vec<f64> = z_full.iter().map(|&z| (0.5 * z).exp()).collect();
    let p1_half: Vec<f64> = z_full.iter().map(|&z| 0.5 * dt * phi1(0.5 * z)).collect();
    // Cox-Matthews weights: h(phi1 - 3 phi2 + 4 phi3), 2h(phi2 - 2 phi3),
    // h(4 phi3 - phi2)
    let w1: Vec<f64> = z_full
        .iter()
        .map(|&z| dt * (phi1(z) - 3.0 * phi2(z) + 4.0 * phi3(z)))
        .collect();
    let w2: Vec<f64> = z_full
        .iter()
        .map(|&z| 2.0 * dt * (phi2(z) - 2.0 * phi3(z)))
        .collect();
    let w3: Vec<f64> = z_full
        .iter()
        .map(|&z| dt * (4.0 * phi3(z) - phi2(z)))
        .collect();

    let n0 = vorticity_nonlinearity(omega, nu, v_norm_sq_override)?;
    let mut a = omega.apply_multiplier(&e_half);
    a.axpy(1.0, &n0.apply_multiplier(&p1_half));
    let na = vorticity_nonlinearity(&a, nu, v_norm_sq_override)?;

    let mut b = omega.apply_multiplier(&e_half);
    b.axpy(1.0, &na.apply_multiplier(&p1_half));
    let nb = vorticity_nonlinearity(&b, nu, v_norm_sq_override)?;

    let mut c = a.apply_multiplier(&e_half);
    let two_nb_minus_n0 = {
        let mut t = nb.scale(2.0);
        t.axpy(-1.0, &n0);
        t
    };
    c.axpy(1.0, &two_nb_minus_n0.apply_multiplier(&p1_half));
    let nc = vorticity_nonlinearity(&c, nu, v_norm_sq_override)?;

    let mut out = omega.apply_multiplier(&e_full);
    out.axpy(1.0, &n0.apply_multiplier(&w1));
    out.axpy(1.0, &na.add(&nb).apply_multiplier(&w2));
    out.axpy(1.0, &nc.apply_multiplier(&w3));
    Ok(out)
}

/// Integrate the vorticity equation from `omega0`. Snapshots are recorded at
/// `cfg.snapshot_stride`, always including the initial and final states. The
/// optional `v_norm_path` supplies per-step `||u||_V^2` values from a coupled
/// velocity run instead of the self-contained recomputation.
pub fn integrate_vorticity(
    omega0: &SpectralScalar,
    v_norm_path: Option<&[f64]>,
    cfg: &IntegratorConfig,
    nu: ViscosityParam,
) -> Result<Vec<VorticityState>, CoreError> {
    cfg.validate()?;
    if omega0.mean_mode_abs() > 1e-12 {
        return Err(CoreError::NonzeroMean(omega0.mean_mode_abs()));
    }
    let steps = cfg.steps();
    if let Some(path) = v_norm_path {
        if path.len() < steps {
            return Err(CoreError::InvalidParameter(format!(
                "v_norm_path has {} entries, need {steps}",
                path.len()
            )));
        }
    }
    let mut omega = omega0.clone();
    let mut states = vec![VorticityState {
        omega: omega.clone(),
        time: 0.0,
    }];
    for step in 1..=steps {
        let u = biot_savart(&omega)?;
        check_cfl(&u, cfg.dt)?;
        let v_override = v_norm_path.map(|p| p[step - 1]);
        omega = step_vorticity_etdrk4(&omega, cfg.dt, nu.value(), v_override)?;
        if !omega.is_finite() {
            return Err(CoreError::NonFinite { step });
        }
        if step % cfg.snapshot_stride == 0 || step == steps {
            states.push(VorticityState {
                omega: omega.clone(),
                time: step as f64 * cfg.dt,
            });
        }
    }
    Ok(states)
}

/// Run the velocity-form and vorticity-form solvers from matched initial data
/// and return `sup_t |curl(u_vel(t)) - omega_vor(t)|_{L2}` over the recorded
/// snapshot times.
pub fn cross_check_forms(
    u0: &SpectralVector,
    cfg: &IntegratorConfig,
    nu: ViscosityParam,
) -> Result<f64, IntegrateFailure> {
    let vel = integrate(u0, cfg, nu)?;
    let omega0 = curl(u0);
    let vor = integrate_vorticity(&omega0, None, cfg, nu).map_err(|e| IntegrateFailure {
        error: e,
        partial: vel.clone(),
    })?;
    let mut sup = 0.0f64;
    let times = vel.snapshot_times();
    for (snap, (state, t)) in vel.snapshots.iter().zip(vor.iter().zip(times.iter())) {
        debug_assert!((state.time - t).abs() < 1e-9);
        let diff = curl(snap).sub(&state.omega);
        sup = sup.max(norm_h_scalar(&diff));
    }
    Ok(sup)
}

/// Outcome of the maximum-principle and enstrophy-budget checks.
#[derive(Debug, Clone)]
pub struct MaxPrincipleReport {
    /// `sup_t |omega(t)|_inf` (4x oversampled)
    pub sup_linf: f64,
    /// `|omega_0|_inf exp(nu ||u_0||_V^2 T)`
    pub sup_bound: f64,
    /// `nu int_0^T |grad omega|_L2^2 dt`
    pub budget_lhs: f64,
    /// `1/2 |omega_0|_L2^2 + nu T ||u_0||_V^2 |omega_0|_inf^2 exp(2 nu ||u_0||_V^2 T)`
    pub budget_rhs: f64,
    pub sup_ok: bool,
    pub budget_ok: bool,
}

impl MaxPrincipleReport {
    pub fn passed(&self) -> bool {
        self.sup_ok && self.budget_ok
    }
}

/// Relative slack on both inequalities; the discrete sup-norm under-resolves
/// the true sup, so equality cases need a little room.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-6;

/// Evaluate the vorticity maximum principle and the enstrophy-gradient budget
/// along a recorded vorticity trajectory. `u0_vnorm` is `||u_0||_V`.
pub fn max_principle_check(
    traj: &[VorticityState],
    u0_vnorm: f64,
    nu: ViscosityParam,
    horizon: f64,
) -> MaxPrincipleReport {
    let nu = nu.value();
    let v0sq = u0_vnorm * u0_vnorm;
    let omega0 = &traj[0].omega;
    let linf0 = linf_norm_scalar(omega0, SUP_NORM_OVERSAMPLE);

    let mut sup_linf = 0.0f64;
    for state in traj {
        sup_linf = sup_linf.max(linf_norm_scalar(&state.omega, SUP_NORM_OVERSAMPLE));
    }
    let sup_bound = linf0 * (nu * v0sq * horizon).exp();

    // nu * int |grad omega|^2 dt by trapezoid over the recorded states
    let mut integral = 0.0;
    for i in 1..traj.len() {
        let a = sobolev_norms_scalar(&traj[i - 1].omega).v.powi(2);
        let b = sobolev_norms_scalar(&traj[i].omega).v.powi(2);
        integral += 0.5 * (a + b) * (traj[i].time - traj[i - 1].time);
    }
    let budget_lhs = nu * integral;
    let l2_0 = norm_h_scalar(omega0);
    let budget_rhs =
        0.5 * l2_0 * l2_0 + nu * horizon * v0sq * linf0 * linf0 * (2.0 * nu * v0sq * horizon).exp();

    MaxPrincipleReport {
        sup_linf,
        sup_bound,
        budget_lhs,
        budget_rhs,
        sup_ok: sup_linf <= sup_bound * (1.0 + MAX_PRINCIPLE_SLACK),
        budget_ok: budget_lhs <= budget_rhs * (1.0 + MAX_PRINCIPLE_SLACK),
    }
}

/// Residual of the weak formulation and the time-equicontinuity ratio.
#[derive(Debug, Clone, Copy)]
pub struct WeakFormReport {
    /// residual of
    /// `<omega(t), phi> - <omega_0, phi> - int (<u omega, grad phi> + nu <omega, Delta phi> + nu ||u||_V^2 <omega, phi>)`
    pub residual: f64,
    /// `max over recorded pairs s < t` of `<omega(t)-omega(s), phi> / ((t-s) |phi|_{H2})`
    pub equicontinuity_ratio: f64,
}

/// Evaluate the weak-form residual at time `t` (nearest recorded state) for a
/// time-independent test function `phi`, plus the equicontinuity ratio over
/// all recorded pairs. `phi` should be band-limited well inside the dealias
/// band so the advection pairing is an exact Galerkin sum.
pub fn weak_form_residual(
    traj: &[VorticityState],
    phi: &SpectralScalar,
    t: f64,
    nu: ViscosityParam,
) -> Result<WeakFormReport, CoreError> {
    let nu = nu.value();
    let end = traj.last().expect("nonempty trajectory").time;
    if t < -1e-12 || t > end + 1e-9 * end.max(1.0) {
        return Err(CoreError::OutsideSpan {
            t,
            start: 0.0,
            end,
        });
    }
    let grad_phi_1 = derivative(phi, 0);
    let grad_phi_2 = derivative(phi, 1);
    let lap_phi = {
        let grid = phi.grid();
        let mut out = phi.clone();
        for (idx, k1, k2) in grid.iter_modes() {
            out.coeffs_mut()[idx] = -((k1 * k1 + k2 * k2) as f64) * phi.coeffs()[idx];
        }
        out
    };

    // integrand f(s) = <u omega, grad phi> + nu <omega, Delta phi>
    //                + nu ||u||_V^2 <omega, phi>
    let integrand = |state: &VorticityState| -> Result<f64, CoreError> {
        let u = biot_savart(&state.omega)?;
        let (u1, u2) = synthesize_vector(&u);
        let w = synthesize_unchecked(&state.omega);
        let grid = state.omega.grid();
        let f1: Vec<f64> = u1.iter().zip(w.iter()).map(|(a, b)| a * b).collect();
        let f2: Vec<f64> = u2.iter().zip(w.iter()).map(|(a, b)| a * b).collect();
        let f1 = forward_transform(grid, &f1)?.dealias();
        let f2 = forward_transform(grid, &f2)?.dealias();
        let advect = inner_h_scalar(&f1, &grad_phi_1) + inner_h_scalar(&f2, &grad_phi_2);
        let vsq = norm_h_scalar(&state.omega).powi(2);
        Ok(advect
            + nu * inner_h_scalar(&state.omega, &lap_phi)
            + nu * vsq * inner_h_scalar(&state.omega, phi))
    };

    // trapezoid up to the recorded state nearest to t
    let mut end_idx = 0;
    for (i, s) in traj.iter().enumerate() {
        if s.time <= t + 1e-9 * t.max(1.0) {
            end_idx = i;
        }
    }
    let mut integral = 0.0;
    let mut prev = integrand(&traj[0])?;
    for i in 1..=end_idx {
        let cur = integrand(&traj[i])?;
        integral += 0.5 * (prev + cur) * (traj[i].time - traj[i - 1].time);
        prev = cur;
    }
    let pairing_t = inner_h_scalar(&traj[end_idx].omega, phi);
    let pairing_0 = inner_h_scalar(&traj[0].omega, phi);
    let residual = pairing_t - pairing_0 - integral;

    let h2 = norm_h2_scalar(phi);
    let mut ratio = 0.0f64;
    for i in 0..traj.len() {
        for j in (i + 1)..traj.len() {
            let dt = traj[j].time - traj[i].time;
            if dt <= 0.0 {
                continue;
            }
            let num = inner_h_scalar(&traj[j].omega.sub(&traj[i].omega), phi);
            ratio = ratio.max(num / (dt * h2));
        }
    }

    Ok(WeakFormReport {
        residual,
        equicontinuity_ratio: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::taylor_green;
    use crate::grid::GridSpec;
    use crate::norms::norm_h;
    use crate::random::random_smooth_field;
    use crate::transforms::{forward_transform, sample_function};

    #[test]
    fn curl_of_taylor_green_is_two_sin_sin() {
        let grid = GridSpec::new(32).unwrap();
        let omega = curl(&taylor_green(grid));
        let samples = sample_function(grid, |x1, x2| 2.0 * x1.sin() * x2.sin());
        let expected = forward_transform(grid, &samples).unwrap();
        assert!(norm_h_scalar(&omega.sub(&expected)) < 1e-13);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let grid = GridSpec::new(16).unwrap();
        let s = random_smooth_field(2, 3.0, grid);
        let g = crate::transforms::gradient(s.component(0));
        assert!(norm_h_scalar(&curl(&g)) < 1e-13);
    }

    #[test]
    fn biot_savart_inverts_curl_on_taylor_green() {
        let grid = GridSpec::new(32).unwrap();
        let tg = taylor_green(grid);
        let u = biot_savart(&curl(&tg)).unwrap();
        assert!(norm_h(&u.sub(&tg)) < 1e-13);
    }

    #[test]
    fn curl_biot_savart_identities_on_random_fields() {
        let grid = GridSpec::new(32).unwrap();
        let u = random_smooth_field(5, 3.0, grid);
        let omega = curl(&u);
        // biot_savart . curl = id on divergence-free fields
        let u2 = biot_savart(&omega).unwrap();
        assert!(norm_h(&u2.sub(&u)) < 1e-13);
        assert!(u2.is_divergence_free());
        // curl . biot_savart = id on mean-zero scalars
        let omega2 = curl(&biot_savart(&omega).unwrap());
        assert!(norm_h_scalar(&omega2.sub(&omega)) < 1e-13);
        // rejects nonzero-mean input
        let mut bad = omega.clone();
        bad.coeffs_mut()[0] = Complex64::new(0.1, 0.0);
        assert!(matches!(biot_savart(&bad), Err(CoreError::NonzeroMean(_))));
    }

    #[test]
    fn elliptic_regularity_holds_with_unit_constant() {
        // |Delta u|_L2 = |grad Curl u|_L2 exactly in the spectral representation
        let grid = GridSpec::new(32).unwrap();
        for seed in 0..5 {
            let u = random_smooth_field(seed, 3.0, grid);
            let lap_norm = {
                let au = crate::operators::stokes_apply(&u);
                norm_h(&au)
            };
            let grad_curl_norm = sobolev_norms_scalar(&curl(&u)).v;
            assert!(
                (lap_norm - grad_curl_norm).abs() < 1e-12 * lap_norm.max(1e-30),
                "seed {seed}: {lap_norm} vs {grad_curl_norm}"
            );
        }
    }
}
