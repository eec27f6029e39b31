//! Pseudo-spectral simulation library for the 2D incompressible Navier-Stokes
//! equation on the torus `[0, 2pi)^2`, constrained to the unit `L2` sphere
//!
//! ```text
//!     du/dt = -nu A u + nu |grad u|^2 u - B(u, u),      |u(0)|_{L2} = 1,
//! ```
//!
//! where `A` is the Stokes operator and `B` the Leray-projected advection term.
//! The constraint term `|grad u|^2 u` is the Lagrange multiplier that keeps the
//! flow tangent to the sphere; on the torus it is orthogonal to `B(u,u)`, which
//! makes the enstrophy a Lyapunov function of the flow.
//!
//! The crate provides:
//!
//! - [`grid`], [`field`], [`transforms`]: the truncated Fourier representation of
//!   mean-zero periodic fields, FFT synthesis/analysis and 2/3-rule dealiasing;
//! - [`operators`]: Leray projection, Stokes operator, heat semigroup, the
//!   advection bilinear/trilinear forms and the constrained nonlinearity;
//! - [`integrate`]: integrating-factor RK4 / ETD-RK2 time steppers with
//!   trajectory diagnostics (norms, constraint drift, energy identity);
//! - [`vorticity`]: the scalar vorticity formulation, Biot-Savart inversion,
//!   an independent ETD-RK4 vorticity solver and maximum-principle checks;
//! - [`picard`]: the cutoff Duhamel fixed-point machinery (local existence as
//!   an executable object) with empirical contraction verification;
//! - [`checks`]: the bundled invariant suite producing pass/fail reports.

pub mod checks;
pub mod error;
pub mod field;
pub mod grid;
pub mod integrate;
pub mod norms;
pub mod operators;
pub mod oracle;
pub mod par;
pub mod picard;
pub mod random;
pub mod transforms;
pub mod vorticity;

pub use error::CoreError;
pub use field::{SpectralScalar, SpectralVector};
pub use grid::GridSpec;
pub use norms::SobolevNorms;
pub use operators::ViscosityParam;
