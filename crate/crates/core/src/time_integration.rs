//! Explicit SSP Runge-Kutta methods in Shu-Osher form and the adaptive time
//! step.
//!
//! Every stage is `u^(k) = a_k u^n + (1 - a_k) [u^(k-1) + Δt L(u^(k-1))]`, a
//! convex combination of the old state and a forward Euler step.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SspOrder {
    /// Forward Euler.
    One,
    /// Heun's method.
    #[default]
    Two,
    /// The three-stage Shu-Osher method.
    Three,
}

impl SspOrder {
    /// Weights `a_k` of the old state `u^n` in each stage.
    pub fn stage_weights(self) -> &'static [f64] {
        match self {
            SspOrder::One => &[0.0],
            SspOrder::Two => &[0.0, 0.5],
            SspOrder::Three => &[0.0, 0.75, 1.0 / 3.0],
        }
    }

    pub fn stages(self) -> usize {
        self.stage_weights().len()
    }
}

impl TryFrom<u8> for SspOrder {
    type Error = String;
    fn try_from(k: u8) -> std::result::Result<Self, String> {
        match k {
            1 => Ok(SspOrder::One),
            2 => Ok(SspOrder::Two),
            3 => Ok(SspOrder::Three),
            _ => Err(format!("unsupported SSP RK order {k}, expected 1, 2 or 3")),
        }
    }
}

impl From<SspOrder> for u8 {
    fn from(o: SspOrder) -> u8 {
        match o {
            SspOrder::One => 1,
            SspOrder::Two => 2,
            SspOrder::Three => 3,
        }
    }
}

impl fmt::Display for SspOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SSP{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub rk_order: SspOrder,
    /// CFL parameter `ν`.
    pub nu: f64,
    pub t_end: Option<f64>,
    /// Run until the normalized steady residual drops below this value.
    pub steady_tol: Option<f64>,
    pub max_steps: usize,
    pub max_halvings: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            rk_order: SspOrder::Two,
            nu: 0.5,
            t_end: None,
            steady_tol: None,
            max_steps: 10_000_000,
            max_halvings: 20,
        }
    }
}

impl TimeConfig {
    pub fn until(t_end: f64) -> Self {
        Self {
            t_end: Some(t_end),
            ..Self::default()
        }
    }

    pub fn steady(tol: f64, max_steps: usize) -> Self {
        Self {
            steady_tol: Some(tol),
            max_steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::Config(format!(
                "time.nu must lie in (0, 1], got {}",
                self.nu
            )));
        }
        match (self.t_end, self.steady_tol) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::Config(
                    "exactly one of time.t_end and time.steady_tol must be set".into(),
                ));
            }
            (Some(t), None) if !(t >= 0.0 && t.is_finite()) => {
                return Err(Error::Config(format!(
                    "time.t_end must be finite and nonnegative, got {t}"
                )));
            }
            (None, Some(tol)) if !(tol > 0.0) => {
                return Err(Error::Config(format!(
                    "time.steady_tol must be positive, got {tol}"
                )));
            }
            _ => {}
        }
        if self.max_steps == 0 {
            return Err(Error::Config("time.max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// `Δt = min_i ν m_i / Σ_j 2 d_ij`; infinite when no node has diffusion.
pub fn adaptive_dt(lumped_mass: &[f64], diffusion_sums: &[f64], nu: f64) -> f64 {
    lumped_mass
        .iter()
        .zip(diffusion_sums)
        .filter(|(_, &s)| s > 0.0)
        .map(|(&m, &s)| nu * m / s)
        .fold(f64::INFINITY, f64::min)
}

/// Whether `1 - Δt Σ_j 2 d_ij / m_i >= 0` holds at every node.
pub fn cfl_holds(lumped_mass: &[f64], diffusion_sums: &[f64], dt: f64) -> bool {
    lumped_mass
        .iter()
        .zip(diffusion_sums)
        .all(|(&m, &s)| 1.0 - dt * s / m >= -1e-14)
}

/// One SSP step for a generic ODE `y' = f(y)`.
pub fn ssp_step_ode(
    order: SspOrder,
    y: &[f64],
    dt: f64,
    f: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<f64> {
    let mut prev = y.to_vec();
    for &a in order.stage_weights() {
        let rate = f(&prev);
        prev = y
            .iter()
            .zip(prev.iter().zip(&rate))
            .map(|(&y0, (&p, &r))| a * y0 + (1.0 - a) * (p + dt * r))
            .collect();
    }
    prev
}

/// `max_i max(|r_h,i|, |r_hv,i|) / m_i`.
pub fn steady_state_residual(rhs_h: &[f64], rhs_hv: &[f64], lumped_mass: &[f64]) -> f64 {
    (0..lumped_mass.len())
        .map(|i| rhs_h[i].abs().max(rhs_hv[i].abs()) / lumped_mass[i])
        .fold(0.0, f64::max)
}
