//! Conserved variables and nodal state vectors.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Water height and discharge at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conserved {
    pub h: f64,
    pub hv: f64,
}

impl Conserved {
    pub const fn new(h: f64, hv: f64) -> Self {
        Self { h, hv }
    }

    /// `hv / h`, or zero for a dry (h <= 0) state.
    pub fn velocity(&self) -> f64 {
        if self.h > 0.0 {
            self.hv / self.h
        } else {
            0.0
        }
    }
}

impl Add for Conserved {
    type Output = Conserved;
    fn add(self, o: Conserved) -> Conserved {
        Conserved::new(self.h + o.h, self.hv + o.hv)
    }
}

impl Sub for Conserved {
    type Output = Conserved;
    fn sub(self, o: Conserved) -> Conserved {
        Conserved::new(self.h - o.h, self.hv - o.hv)
    }
}

impl Mul<Conserved> for f64 {
    type Output = Conserved;
    fn mul(self, u: Conserved) -> Conserved {
        Conserved::new(self * u.h, self * u.hv)
    }
}

/// Everything the edge formulas need to know about one node: the conserved
/// state, the velocity produced by the active wet/dry rule, and the nodal
/// bathymetry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeValue {
    pub h: f64,
    pub hv: f64,
    pub v: f64,
    pub b: f64,
}

impl NodeValue {
    pub fn new(u: Conserved, v: f64, b: f64) -> Self {
        Self {
            h: u.h,
            hv: u.hv,
            v,
            b,
        }
    }

    /// Node value whose velocity follows from [`Conserved::velocity`].
    pub fn plain(u: Conserved, b: f64) -> Self {
        Self::new(u, u.velocity(), b)
    }

    pub fn conserved(&self) -> Conserved {
        Conserved::new(self.h, self.hv)
    }

    /// Physical flux `(hv, hv v + g h^2 / 2)`.
    pub fn flux(&self, g: f64) -> Conserved {
        Conserved::new(self.hv, self.hv * self.v + 0.5 * g * self.h * self.h)
    }

    pub fn free_surface(&self) -> f64 {
        self.h + self.b
    }
}

/// Nodal water heights and discharges, the unknowns of the scheme.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodalState {
    pub h: Vec<f64>,
    pub hv: Vec<f64>,
}

impl NodalState {
    pub fn new(h: Vec<f64>, hv: Vec<f64>) -> Result<Self> {
        if h.len() != hv.len() {
            return Err(Error::Data(format!(
                "height and discharge lengths differ ({} vs {})",
                h.len(),
                hv.len()
            )));
        }
        Ok(Self { h, hv })
    }

    pub fn from_fn(nodes: &[f64], f: impl Fn(f64) -> Conserved) -> Self {
        let (h, hv) = nodes.iter().map(|&x| f(x)).map(|u| (u.h, u.hv)).unzip();
        Self { h, hv }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn get(&self, i: usize) -> Conserved {
        Conserved::new(self.h[i], self.hv[i])
    }

    pub fn set(&mut self, i: usize, u: Conserved) {
        self.h[i] = u.h;
        self.hv[i] = u.hv;
    }

    /// Plain velocities `hv / h` (zero where dry).
    pub fn velocity(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i).velocity()).collect()
    }

    pub fn free_surface(&self, b: &[f64]) -> Vec<f64> {
        self.h.iter().zip(b).map(|(h, b)| h + b).collect()
    }

    pub fn max_height(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_height(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fails with the first node holding a non-finite entry or a water height
    /// below `-tol`.
    pub fn check_admissible(&self, tol: f64) -> Result<()> {
        for i in 0..self.len() {
            let (h, hv) = (self.h[i], self.hv[i]);
            if !h.is_finite() || !hv.is_finite() {
                return Err(Error::Numerical {
                    node: i,
                    what: format!("non-finite state (h = {h}, hv = {hv})"),
                });
            }
            if h < -tol {
                return Err(Error::Numerical {
                    node: i,
                    what: format!("negative water height {h:e}"),
                });
            }
        }
        Ok(())
    }
}
