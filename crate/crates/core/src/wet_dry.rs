//! Velocity recovery near dry states.
//!
//! Every strategy leaves the water height alone and computes the nodal
//! velocity used by the next right-hand side evaluation; some also overwrite
//! the discharge by `h ṽ`.

use serde::{Deserialize, Serialize};

use crate::entropy_stability::entropy;
use crate::error::{Error, Result};
use crate::fem_core::{Bathymetry, Mesh1D};
use crate::state::{Conserved, NodalState, NodeValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WetDryStrategy {
    /// `v = hv/h` above a tiny cutoff, zero below.
    #[default]
    None,
    ZeroVelocity,
    Azerad,
    KurganovPetrova,
    EntropyBased,
    FrictionBoundaryLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WetDryConfig {
    pub strategy: WetDryStrategy,
    /// Strategy tolerance; the strategy's own default when absent.
    pub epsilon: Option<f64>,
    pub sigma: f64,
    pub delta: f64,
    /// Overwrite the discharge by `h ṽ`; the strategy's own default when
    /// absent.
    pub overwrite_discharge: Option<bool>,
}

impl Default for WetDryConfig {
    fn default() -> Self {
        Self {
            strategy: WetDryStrategy::None,
            epsilon: None,
            sigma: 10.0,
            delta: 1e-3,
            overwrite_discharge: None,
        }
    }
}

impl WetDryConfig {
    pub fn with_strategy(strategy: WetDryStrategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }
}

pub fn fix_zero_velocity(h: f64, hv: f64, tol: f64) -> f64 {
    if h >= tol && h > 0.0 {
        hv / h
    } else {
        0.0
    }
}

pub fn fix_azerad(h: f64, hv: f64, eps: f64) -> f64 {
    let m = h.max(eps);
    let den = h * h + m * m;
    if den > 0.0 {
        2.0 * h * hv / den
    } else {
        0.0
    }
}

pub fn fix_kurganov_petrova(h: f64, hv: f64, eps: f64) -> f64 {
    let m = h.max(eps);
    let den = (h.powi(4) + m.powi(4)).sqrt();
    if den > 0.0 {
        std::f64::consts::SQRT_2 * h * hv / den
    } else {
        0.0
    }
}

/// Velocity bounded by the entropy estimate `η(ũ_i) <= η_i^max`, for a flat
/// bottom at level `b`.
pub fn fix_entropy_based(h: f64, hv: f64, eta_max: f64, b: f64, g: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let q = (2.0 * (eta_max - g * h * b) / h - g * h).max(0.0).sqrt();
    if hv.abs() <= h * q {
        hv / h
    } else {
        q * hv.signum()
    }
}

/// `v^BL_i = -(g/σ) h_i Σ_j H_j c_ij / m_i` for every node.
pub fn boundary_layer_velocity(
    state: &NodalState,
    mesh: &Mesh1D,
    b: &[f64],
    g: f64,
    sigma: f64,
) -> Vec<f64> {
    (0..state.len())
        .map(|i| {
            let grad: f64 = mesh
                .stencil(i)
                .into_iter()
                .map(|j| (state.h[j] + b[j]) * mesh.grad_coeff(i, j))
                .sum();
            -(g / sigma) * state.h[i] * grad / mesh.lumped_mass()[i]
        })
        .collect()
}

pub fn fix_friction_boundary_layer(h: f64, hv: f64, v_bl: f64, delta: f64) -> f64 {
    hv / h.max(delta) + ((delta - h) / delta).max(0.0) * v_bl
}

/// A strategy with all parameters resolved for one mesh and initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WetDry {
    pub strategy: WetDryStrategy,
    /// Threshold of the active formula (`tol`, `ε` or `δ`).
    pub epsilon: f64,
    pub sigma: f64,
    pub delta: f64,
    pub overwrite: bool,
    /// Dry cutoff for plain velocity recovery.
    pub cutoff: f64,
}

impl WetDry {
    pub fn new(cfg: &WetDryConfig, mesh: &Mesh1D, bathy: &Bathymetry, max_h0: f64) -> Result<Self> {
        if !(cfg.sigma > 0.0) || !(cfg.delta > 0.0) || cfg.epsilon.is_some_and(|e| !(e >= 0.0)) {
            return Err(Error::Config(
                "wet/dry parameters need sigma > 0, delta > 0, epsilon >= 0".into(),
            ));
        }
        if cfg.strategy == WetDryStrategy::EntropyBased && !bathy.is_flat() {
            return Err(Error::Config(
                "the entropy-based wet/dry fix requires a flat bottom".into(),
            ));
        }
        let normalized = mesh.max_element_length() / mesh.domain_length();
        let (default_eps, default_overwrite) = match cfg.strategy {
            WetDryStrategy::None => (0.0, false),
            WetDryStrategy::ZeroVelocity => (normalized * normalized, false),
            WetDryStrategy::Azerad => (1e-16 * max_h0, false),
            WetDryStrategy::KurganovPetrova => (normalized, true),
            WetDryStrategy::EntropyBased => (0.0, true),
            WetDryStrategy::FrictionBoundaryLayer => (cfg.delta, true),
        };
        Ok(Self {
            strategy: cfg.strategy,
            epsilon: cfg.epsilon.unwrap_or(default_eps),
            sigma: cfg.sigma,
            delta: cfg.delta,
            overwrite: cfg.overwrite_discharge.unwrap_or(default_overwrite),
            cutoff: 1e-12 * max_h0,
        })
    }

    fn plain(&self, h: f64, hv: f64) -> f64 {
        if h > self.cutoff {
            hv / h
        } else {
            0.0
        }
    }

    /// Nodal velocities, discharges overwritten where the strategy asks for
    /// it. `eta_max` feeds the entropy-based fix; without it that strategy
    /// falls back to plain recovery.
    pub fn apply(
        &self,
        state: &mut NodalState,
        mesh: &Mesh1D,
        bathy: &Bathymetry,
        eta_max: Option<&[f64]>,
        g: f64,
    ) -> Vec<f64> {
        let n = state.len();
        let v: Vec<f64> = match self.strategy {
            WetDryStrategy::None => (0..n)
                .map(|i| self.plain(state.h[i], state.hv[i]))
                .collect(),
            WetDryStrategy::ZeroVelocity => (0..n)
                .map(|i| fix_zero_velocity(state.h[i], state.hv[i], self.epsilon))
                .collect(),
            WetDryStrategy::Azerad => (0..n)
                .map(|i| fix_azerad(state.h[i], state.hv[i], self.epsilon))
                .collect(),
            WetDryStrategy::KurganovPetrova => (0..n)
                .map(|i| fix_kurganov_petrova(state.h[i], state.hv[i], self.epsilon))
                .collect(),
            WetDryStrategy::EntropyBased => match eta_max {
                Some(em) => (0..n)
                    .map(|i| fix_entropy_based(state.h[i], state.hv[i], em[i], bathy.nodal_b[i], g))
                    .collect(),
                None => (0..n)
                    .map(|i| self.plain(state.h[i], state.hv[i]))
                    .collect(),
            },
            WetDryStrategy::FrictionBoundaryLayer => {
                let v_bl = boundary_layer_velocity(state, mesh, &bathy.nodal_b, g, self.sigma);
                (0..n)
                    .map(|i| {
                        fix_friction_boundary_layer(state.h[i], state.hv[i], v_bl[i], self.delta)
                    })
                    .collect()
            }
        };
        for i in 0..n {
            if state.h[i] <= 0.0 {
                state.hv[i] = 0.0;
            }
        }
        let overwrite =
            self.overwrite && (self.strategy != WetDryStrategy::EntropyBased || eta_max.is_some());
        if overwrite {
            for i in 0..n {
                state.hv[i] = state.h[i] * v[i];
            }
        }
        v
    }
}

/// Node values for the edge formulas from a state, its recovered velocities
/// and the bathymetry.
pub fn node_values(state: &NodalState, v: &[f64], b: &[f64]) -> Vec<NodeValue> {
    (0..state.len())
        .map(|i| NodeValue::new(Conserved::new(state.h[i], state.hv[i]), v[i], b[i]))
        .collect()
}

/// `η(u_i)` with the velocity of the node value.
pub fn nodal_entropy(nodes: &[NodeValue], g: f64) -> Vec<f64> {
    nodes.iter().map(|n| entropy(n, g)).collect()
}
