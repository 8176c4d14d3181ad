//! Algebraic flux correction for the one-dimensional shallow water equations
//! with bottom topography.
//!
//! The crate discretizes the balance law
//!
//! ```text
//! h_t + (hv)_x = 0,    (hv)_t + (hv^2 + g h^2 / 2)_x + g h b_x = 0
//! ```
//!
//! with continuous linear finite elements and provides three space
//! discretizations built on the same edge data:
//!
//! * [`Scheme::Low`]: the algebraic local Lax-Friedrichs method with a
//!   bathymetry limiter that keeps water heights nonnegative and preserves
//!   the lake at rest,
//! * [`Scheme::Mcl`]: monolithic convex limiting of the antidiffusive fluxes
//!   that recover the Galerkin target scheme (water height first, then
//!   velocity-constrained momentum),
//! * [`Scheme::MclSde`]: the limited scheme with an additional semi-discrete
//!   entropy fix.
//!
//! Time integration uses adaptive SSP Runge-Kutta methods, see
//! [`time_integration`]. Wetting and drying treatments live in [`wet_dry`],
//! analytic and reference solutions for standard benchmarks in
//! [`benchmarks`].

pub mod benchmarks;
pub mod boundary;
pub mod entropy_stability;
pub mod error;
pub mod fem_core;
pub mod low_order;
pub mod mcl_limiter;
pub mod solver;
pub mod state;
pub mod time_integration;
pub mod wet_dry;

pub use boundary::{BoundaryKind, BoundarySpec, Side};
pub use error::{Error, Result};
pub use fem_core::{build_uniform_mesh, interpolate_bathymetry, Bathymetry, Mesh1D};
pub use low_order::WaveSpeed;
pub use mcl_limiter::RawFluxMode;
pub use solver::{Assembly, Problem, Scheme, SchemeConfig, Solver, StepReport, TadmorFix};
pub use state::{Conserved, NodalState};
pub use time_integration::{SspOrder, TimeConfig};
pub use wet_dry::{WetDryConfig, WetDryStrategy};
