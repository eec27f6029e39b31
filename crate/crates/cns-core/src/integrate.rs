//! Time integration of the constrained equation and its Euler limit.
//!
//! The stiff linear part `-nu A` is diagonal in Fourier space and handled by
//! exact exponential factors; the nonlinearity `nu ||u||_V^2 u - B(u,u)` is
//! explicit. There is no parabolic CFL restriction; the advective CFL
//! `dt * max|u| * n/2 <= 1` is checked at runtime.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::field::SpectralVector;
use crate::norms::{inner_h, max_speed, norm_h, sobolev_norms};
use crate::operators::{
    bilinear_b, g_total, heat_kernel, leray_project, stokes_apply, ViscosityParam,
};
use crate::vorticity::curl;

/// Abort threshold for the `MonitorOnly` drift policy.
pub const DRIFT_ABORT_LIMIT: f64 = 1e-3;

/// Initial conditions must sit on the sphere within this tolerance.
pub const INITIAL_MANIFOLD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Integrating-factor RK4 (default): exponential factors are exact, the
    /// transformed system is advanced with classical RK4.
    IfRk4,
    /// Exponential time differencing RK2, kept as a cross-check scheme.
    EtdRk2,
}

impl Scheme {
    pub fn order(&self) -> usize {
        match self {
            Scheme::IfRk4 => 4,
            Scheme::EtdRk2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenormalizePolicy {
    /// Ignore constraint drift entirely.
    Off,
    /// Rescale `u <- u / |u|_H` after every step.
    EveryStep,
    /// Record drift and abort once it exceeds `DRIFT_ABORT_LIMIT`.
    MonitorOnly,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub renormalize: RenormalizePolicy,
    pub snapshot_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, horizon: f64) -> Result<Self, CoreError> {
        let cfg = Self {
            dt,
            horizon,
            scheme: Scheme::IfRk4,
            renormalize: RenormalizePolicy::MonitorOnly,
            snapshot_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_renormalize(mut self, policy: RenormalizePolicy) -> Self {
        self.renormalize = policy;
        self
    }

    pub fn with_snapshot_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride.max(1);
        self
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon > self.dt) {
            return Err(CoreError::InvalidParameter(format!(
                "horizon {} must exceed dt {}",
                self.horizon, self.dt
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(CoreError::InvalidParameter(
                "snapshot_stride must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

/// One per-step diagnostics row; the column set matches the CSV emitted by
/// the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub h_norm: f64,
    pub v_norm: f64,
    pub e_norm: f64,
    /// `|u|_H - 1`
    pub constraint_residual: f64,
    /// `e^2 - v^4`, the squared norm of the manifold gradient on `M`
    pub dissipation: f64,
    /// relative residual of `<B(u,u), u>`
    pub b_u_ortho: f64,
    /// relative residual of `<B(u,u), Au>`
    pub b_au_ortho: f64,
    /// sup norm of the vorticity over base-grid samples
    pub omega_linf: f64,
    /// `dt * max|u| * n/2`
    pub cfl_number: f64,
}

/// Discrete solution path: per-step times and diagnostics, strided state
/// snapshots, and the run parameters needed to interpret them.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralVector>,
    pub snapshot_steps: Vec<usize>,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub nu: f64,
    pub dt: f64,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &SpectralVector {
        self.snapshots.last().expect("at least the initial snapshot")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshot_steps.iter().map(|&i| self.times[i]).collect()
    }
}

/// Integration failure carrying the trajectory recorded so far.
#[derive(Debug)]
pub struct IntegrateFailure {
    pub error: CoreError,
    pub partial: TrajectoryRecord,
}

impl std::fmt::Display for IntegrateFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "integration aborted at t = {}: {}",
            self.partial.final_time(),
            self.error
        )
    }
}

impl std::error::Error for IntegrateFailure {}

fn nonlinearity(u: &SpectralVector, nu: ViscosityParam) -> Result<SpectralVector, CoreError> {
    g_total(u, nu)
}

/// One step of the chosen scheme for `du/dt = -nu A u + G(u)`.
pub fn step_constrained_ns(
    u: &SpectralVector,
    dt: f64,
    nu: ViscosityParam,
    scheme: Scheme,
) -> Result<SpectralVector, CoreError> {
    check_cfl(u, dt)?;
    let next = match scheme {
        Scheme::IfRk4 => step_ifrk4(u, dt, nu)?,
        Scheme::EtdRk2 => step_etdrk2(u, dt, nu)?,
    };
    if !next.is_finite() {
        return Err(CoreError::NonFinite { step: 0 });
    }
    Ok(next)
}

/// One Euler step (`nu = 0`); the exponential factors degenerate to the
/// identity and both schemes reduce to their classical forms.
pub fn step_euler(u: &SpectralVector, dt: f64, scheme: Scheme) -> Result<SpectralVector, CoreError> {
    step_constrained_ns(u, dt, ViscosityParam::new(0.0).expect("valid"), scheme)
}

pub fn check_cfl(u: &SpectralVector, dt: f64) -> Result<(), CoreError> {
    let speed = max_speed(u);
    let cfl = dt * speed * (u.grid().n() as f64) / 2.0;
    if cfl > 1.0 {
        return Err(CoreError::CflViolation {
            cfl,
            dt_max: 1.0 / (speed * u.grid().n() as f64 / 2.0),
        });
    }
    Ok(())
}

fn step_ifrk4(
    u: &SpectralVector,
    dt: f64,
    nu: ViscosityParam,
) -> Result<SpectralVector, CoreError> {
    let grid = u.grid();
    let e_half = heat_kernel(grid, nu.value(), dt / 2.0);

    let a1 = nonlinearity(u, nu)?;

    // E(u + dt/2 a1)
    let mut stage = u.clone();
    stage.axpy(dt / 2.0, &a1);
    let b2 = nonlinearity(&stage.apply_multiplier(&e_half), nu)?;

    // E u + dt/2 b2
    let eu = u.apply_multiplier(&e_half);
    let mut stage = eu.clone();
    stage.axpy(dt / 2.0, &b2);
    let b3 = nonlinearity(&stage, nu)?;

    // E^2 u + dt E b3
    let mut stage = eu.apply_multiplier(&e_half);
    stage.axpy(dt, &b3.apply_multiplier(&e_half));
    let b4 = nonlinearity(&stage, nu)?;

    // u+ = E^2 u + dt/6 (E^2 a1 + 2 E b2 + 2 E b3 + b4)
    let mut out = eu.apply_multiplier(&e_half);
    out.axpy(
        dt / 6.0,
        &a1.apply_multiplier(&e_half).apply_multiplier(&e_half),
    );
    out.axpy(dt / 3.0, &b2.apply_multiplier(&e_half));
    out.axpy(dt / 3.0, &b3.apply_multiplier(&e_half));
    out.axpy(dt / 6.0, &b4);
    Ok(out)
}

/// `phi1(z) = (e^z - 1)/z`, stable for real `z <= 0`.
pub fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `phi2(z) = (e^z - 1 - z)/z^2` with a series branch near zero.
pub fn phi2(z: f64) -> f64 {
    phi_series_or_direct(z, 2)
}

/// `phi3(z) = (e^z - 1 - z - z^2/2)/z^3` with a series branch near zero.
pub fn phi3(z: f64) -> f64 {
    phi_series_or_direct(z, 3)
}

fn phi_series_or_direct(z: f64, p: u32) -> f64 {
    if z.abs() < 1.0 {
        // sum_{m>=0} z^m / (m+p)!
        let mut factorial = 1.0;
        for j in 1..=p {
            factorial *= j as f64;
        }
        let mut term = 1.0 / factorial;
        let mut sum = term;
        let mut m = 0u32;
        while term.abs() > 1e-20 * sum.abs().max(1e-300) {
            m += 1;
            term *= z / (m + p) as f64;
            sum += term;
        }
        sum
    } else {
        match p {
            2 => (z.exp_m1() - z) / (z * z),
            3 => (z.exp_m1() - z - 0.5 * z * z) / (z * z * z),
            _ => unreachable!(),
        }
    }
}

fn step_etdrk2(
    u: &SpectralVector,
    dt: f64,
    nu: ViscosityParam,
) -> Result<SpectralVector, CoreError> {
    let grid = u.grid();
    let zs: Vec<f64> = grid
        .iter_modes()
        .map(|(_, k1, k2)| -nu.value() * dt * (k1 * k1 + k2 * k2) as f64)
        .collect();
    let e1: Vec<f64> = zs.iter().map(|&z| z.exp()).collect();
    let p1: Vec<f64> = zs.iter().map(|&z| phi1(z)).collect();
    let p2: Vec<f64> = zs.iter().map(|&z| phi2(z)).collect();

    let n0 = nonlinearity(u, nu)?;
    let mut a = u.apply_multiplier(&e1);
    a.axpy(dt, &n0.apply_multiplier(&p1));

    let n1 = nonlinearity(&a, nu)?;
    let mut out = a.clone();
    out.axpy(dt, &n1.sub(&n0).apply_multiplier(&p2));
    Ok(out)
}

fn diagnostics_row(u: &SpectralVector, t: f64, dt: f64) -> Result<DiagnosticsRow, CoreError> {
    let n = sobolev_norms(u);
    let b = bilinear_b(u, u)?;
    let bn = norm_h(&b);
    let au = stokes_apply(u);
    let aun = n.e;
    let tiny = f64::MIN_POSITIVE;
    let b_u = inner_h(&b, u).abs() / (bn * n.h).max(tiny);
    let b_au = inner_h(&b, &au).abs() / (bn * aun).max(tiny);
    let omega = curl(u);
    let omega_linf = crate::norms::linf_norm_scalar(&omega, 1);
    let speed = max_speed(u);
    Ok(DiagnosticsRow {
        t,
        h_norm: n.h,
        v_norm: n.v,
        e_norm: n.e,
        constraint_residual: n.h - 1.0,
        dissipation: n.e.powi(2) - n.v.powi(4),
        b_u_ortho: b_u,
        b_au_ortho: b_au,
        omega_linf,
        cfl_number: dt * speed * (u.grid().n() as f64) / 2.0,
    })
}

/// Project onto `H` and rescale to the unit sphere; the standard way of
/// producing admissible initial data from an arbitrary field.
pub fn project_to_sphere(u: &SpectralVector) -> Result<SpectralVector, CoreError> {
    let p = leray_project(u);
    let h = norm_h(&p);
    if h == 0.0 {
        return Err(CoreError::InvalidParameter(
            "cannot normalize the zero field onto the sphere".into(),
        ));
    }
    Ok(p.scale(1.0 / h))
}

/// Integrate the constrained equation from `u0` on `[0, horizon]`.
///
/// `u0` must lie on the sphere within `INITIAL_MANIFOLD_TOL` (use
/// [`project_to_sphere`] first). On failure the error carries the trajectory
/// recorded so far: the equation itself has no blow-up, so an in-tolerance
/// abort is a bug signal, not an expected outcome.
pub fn integrate(
    u0: &SpectralVector,
    cfg: &IntegratorConfig,
    nu: ViscosityParam,
) -> Result<TrajectoryRecord, IntegrateFailure> {
    cfg.validate().map_err(|e| IntegrateFailure {
        error: e,
        partial: empty_record(u0, cfg, nu),
    })?;
    let h0 = norm_h(u0);
    if (h0 - 1.0).abs() > INITIAL_MANIFOLD_TOL {
        return Err(IntegrateFailure {
            error: CoreError::OffManifold {
                drift: (h0 - 1.0).abs(),
                tolerance: INITIAL_MANIFOLD_TOL,
            },
            partial: empty_record(u0, cfg, nu),
        });
    }

    let steps = cfg.steps();
    let mut record = empty_record(u0, cfg, nu);
    let mut u = u0.clone();

    push_state(&mut record, &u, 0.0, cfg, 0, nu).map_err(|e| IntegrateFailure {
        error: e,
        partial: empty_record(u0, cfg, nu),
    })?;

    for step in 1..=steps {
        let t = step as f64 * cfg.dt;
        u = match step_constrained_ns(&u, cfg.dt, nu, cfg.scheme) {
            Ok(next) => next,
            Err(mut e) => {
                if let CoreError::NonFinite { step: s } = &mut e {
                    *s = step;
                }
                return Err(IntegrateFailure {
                    error: e,
                    partial: record,
                });
            }
        };

        match cfg.renormalize {
            RenormalizePolicy::Off => {}
            RenormalizePolicy::EveryStep => {
                let h = norm_h(&u);
                u = u.scale(1.0 / h);
            }
            RenormalizePolicy::MonitorOnly => {
                let drift = (norm_h(&u) - 1.0).abs();
                if drift > DRIFT_ABORT_LIMIT {
                    return Err(IntegrateFailure {
                        error: CoreError::DriftAbort {
                            drift,
                            limit: DRIFT_ABORT_LIMIT,
                            step,
                        },
                        partial: record,
                    });
                }
            }
        }

        if let Err(e) = push_state(&mut record, &u, t, cfg, step, nu) {
            return Err(IntegrateFailure {
                error: e,
                partial: record,
            });
        }
    }
    Ok(record)
}

/// Euler-limit integration (`nu = 0`): both `|u|_H` and `||u||_V` are
/// conserved up to integrator order.
pub fn integrate_euler(
    u0: &SpectralVector,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord, IntegrateFailure> {
    integrate(u0, cfg, ViscosityParam::new(0.0).expect("valid"))
}

fn empty_record(u0: &SpectralVector, cfg: &IntegratorConfig, nu: ViscosityParam) -> TrajectoryRecord {
    TrajectoryRecord {
        times: Vec::new(),
        snapshots: vec![u0.clone()],
        snapshot_steps: vec![0],
        diagnostics: Vec::new(),
        nu: nu.value(),
        dt: cfg.dt,
    }
}

fn push_state(
    record: &mut TrajectoryRecord,
    u: &SpectralVector,
    t: f64,
    cfg: &IntegratorConfig,
    step: usize,
    nu: ViscosityParam,
) -> Result<(), CoreError> {
    record.times.push(t);
    record
        .diagnostics
        .push(diagnostics_row(u, t, cfg.dt, nu)?);
    let is_snapshot = step % cfg.snapshot_stride == 0 || step == cfg.steps();
    if is_snapshot {
        if step == 0 {
            record.snapshots[0] = u.clone();
        } else {
            record.snapshots.push(u.clone());
            record.snapshot_steps.push(step);
        }
    }
    Ok(())
}

/// Squared `X_t` norm of the recorded path at time `t`:
/// running `sup ||u(s)||_V^2` over recorded steps up to `t` plus the
/// trapezoidal integral of `|u|_E^2`. Monotone non-decreasing in `t`.
pub fn xt_norm_squared(traj: &TrajectoryRecord, t: f64) -> Result<f64, CoreError> {
    let times = &traj.times;
    let start = *times.first().ok_or(CoreError::OutsideSpan {
        t,
        start: 0.0,
        end: 0.0,
    })?;
    let end = *times.last().unwrap();
    let slack = 1e-12 * end.abs().max(1.0);
    if t < start - slack || t > end + slack {
        return Err(CoreError::OutsideSpan { t, start, end });
    }
    let v2: Vec<f64> = traj.diagnostics.iter().map(|d| d.v_norm.powi(2)).collect();
    let e2: Vec<f64> = traj.diagnostics.iter().map(|d| d.e_norm.powi(2)).collect();

    let mut sup = v2[0];
    let mut integral = 0.0;
    for i in 1..times.len() {
        if times[i] <= t + slack {
            sup = sup.max(v2[i]);
            integral += 0.5 * (e2[i] + e2[i - 1]) * (times[i] - times[i - 1]);
        } else {
            // partial final segment with linearly interpolated e^2
            let dt_full = times[i] - times[i - 1];
            let frac = ((t - times[i - 1]) / dt_full).clamp(0.0, 1.0);
            let e2_t = e2[i - 1] + frac * (e2[i] - e2[i - 1]);
            integral += 0.5 * (e2[i - 1] + e2_t) * (t - times[i - 1]).max(0.0);
            break;
        }
    }
    Ok(sup + integral)
}

/// `X_t` norm itself (square root of [`xt_norm_squared`]).
pub fn xt_norm(traj: &TrajectoryRecord, t: f64) -> Result<f64, CoreError> {
    Ok(xt_norm_squared(traj, t)?.sqrt())
}

/// Per-step residual of the energy identity
/// `1/2 v^2(t) + nu int_0^t (e^2 - v^4) ds - 1/2 v^2(0)`,
/// with the dissipation integral by trapezoidal quadrature.
pub fn energy_identity_residual(traj: &TrajectoryRecord) -> Vec<f64> {
    let nu = traj.nu;
    let v2_0 = traj.diagnostics[0].v_norm.powi(2);
    let mut out = Vec::with_capacity(traj.times.len());
    let mut integral = 0.0;
    for i in 0..traj.times.len() {
        if i > 0 {
            let dt = traj.times[i] - traj.times[i - 1];
            integral +=
                0.5 * (traj.diagnostics[i].dissipation + traj.diagnostics[i - 1].dissipation) * dt;
        }
        let v2 = traj.diagnostics[i].v_norm.powi(2);
        out.push(0.5 * v2 + nu * integral - 0.5 * v2_0);
    }
    out
}
