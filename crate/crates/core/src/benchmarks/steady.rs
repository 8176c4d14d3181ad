//! Steady flows over a bump with constant discharge, from the Bernoulli
//! relation `q²/(2 g h²) + h + b = const`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::Conserved;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyCase {
    Subcritical,
    TranscriticalSmooth,
    TranscriticalShock,
    Supercritical,
}

impl SteadyCase {
    pub const ALL: [SteadyCase; 4] = [
        SteadyCase::Subcritical,
        SteadyCase::TranscriticalSmooth,
        SteadyCase::TranscriticalShock,
        SteadyCase::Supercritical,
    ];
}

pub const BUMP_CENTER: f64 = 10.0;
pub const BUMP_HEIGHT: f64 = 0.2;

pub fn bump(x: f64) -> f64 {
    (BUMP_HEIGHT - 0.05 * (x - BUMP_CENTER).powi(2)).max(0.0)
}

/// Critical height `(q²/g)^{1/3}`.
pub fn critical_height(q: f64, g: f64) -> f64 {
    (q * q / g).cbrt()
}

fn head(h: f64, q: f64, b: f64, g: f64) -> f64 {
    q * q / (2.0 * g * h * h) + h + b
}

/// Root of the Bernoulli relation on the subcritical (`h >= h_c`) or
/// supercritical (`h <= h_c`) branch.
pub fn bernoulli_height(energy: f64, q: f64, b: f64, g: f64, subcritical: bool) -> Result<f64> {
    let hc = critical_height(q, g);
    let f = |h: f64| head(h, q, b, g) - energy;
    let fc = f(hc);
    if fc > 1e-13 * energy.abs().max(1.0) {
        return Err(Error::Benchmark(format!(
            "no steady state: head {energy} below the critical head at b = {b}"
        )));
    }
    if fc >= 0.0 {
        return Ok(hc);
    }
    let (mut lo, mut hi) = if subcritical {
        let mut hi = 2.0 * hc;
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        (hc, hi)
    } else {
        let mut lo = 0.5 * hc;
        while f(lo) < 0.0 {
            lo *= 0.5;
        }
        (lo, hc)
    };
    // f is decreasing on the supercritical branch and increasing on the
    // subcritical one.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let above = f(mid) > 0.0;
        if above == subcritical {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `q²/h + g h²/2`, continuous across a steady shock.
pub fn momentum_flux(h: f64, q: f64, g: f64) -> f64 {
    q * q / h + 0.5 * g * h * h
}

/// Exact steady state of one of the four configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyReference {
    pub case: SteadyCase,
    pub q: f64,
    pub g: f64,
    upstream_energy: f64,
    downstream_energy: f64,
    /// Location of the hydraulic jump, if any.
    pub shock: Option<f64>,
}

impl SteadyReference {
    pub fn new(case: SteadyCase) -> Result<Self> {
        let (q, g) = match case {
            SteadyCase::Subcritical => (4.42, 9.81),
            SteadyCase::TranscriticalSmooth => (1.53, 9.81),
            SteadyCase::TranscriticalShock => (0.18, 9.81),
            SteadyCase::Supercritical => (2.1, 1.0),
        };
        let hc = critical_height(q, g);
        let crest = head(hc, q, BUMP_HEIGHT, g);
        let (up, down) = match case {
            SteadyCase::Subcritical => {
                let e = head(2.0, q, 0.0, g);
                (e, e)
            }
            SteadyCase::Supercritical => {
                let e = head(1.0, q, 0.0, g);
                (e, e)
            }
            SteadyCase::TranscriticalSmooth => (crest, crest),
            SteadyCase::TranscriticalShock => (crest, head(0.33, q, 0.0, g)),
        };
        let mut r = Self {
            case,
            q,
            g,
            upstream_energy: up,
            downstream_energy: down,
            shock: None,
        };
        if case == SteadyCase::TranscriticalShock {
            r.shock = Some(r.locate_shock()?);
        }
        Ok(r)
    }

    /// Jump position where the supercritical branch after the crest and the
    /// subcritical downstream branch satisfy the Rankine-Hugoniot condition.
    fn locate_shock(&self) -> Result<f64> {
        let mismatch = |x: f64| -> Result<f64> {
            let b = bump(x);
            let h1 = bernoulli_height(self.upstream_energy, self.q, b, self.g, false)?;
            let h2 = bernoulli_height(self.downstream_energy, self.q, b, self.g, true)?;
            Ok(momentum_flux(h1, self.q, self.g) - momentum_flux(h2, self.q, self.g))
        };
        // The subcritical downstream branch only exists where the bump is
        // below this height.
        let b_max = self.downstream_energy - 1.5 * critical_height(self.q, self.g);
        let lo = BUMP_CENTER + ((BUMP_HEIGHT - b_max).max(0.0) / 0.05).sqrt();
        let (mut lo, mut hi) = (lo.min(12.0), BUMP_CENTER + (BUMP_HEIGHT / 0.05).sqrt());
        let (flo, fhi) = (mismatch(lo)?, mismatch(hi)?);
        if flo.signum() == fhi.signum() {
            return Err(Error::Benchmark(
                "hydraulic jump is not bracketed on the lee side of the bump".into(),
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mismatch(mid)?.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn height(&self, x: f64) -> Result<f64> {
        let b = bump(x);
        match self.case {
            SteadyCase::Subcritical => {
                bernoulli_height(self.upstream_energy, self.q, b, self.g, true)
            }
            SteadyCase::Supercritical => {
                bernoulli_height(self.upstream_energy, self.q, b, self.g, false)
            }
            SteadyCase::TranscriticalSmooth => {
                bernoulli_height(self.upstream_energy, self.q, b, self.g, x <= BUMP_CENTER)
            }
            SteadyCase::TranscriticalShock => {
                let shock = self.shock.unwrap_or(f64::INFINITY);
                if x <= BUMP_CENTER {
                    bernoulli_height(self.upstream_energy, self.q, b, self.g, true)
                } else if x < shock {
                    bernoulli_height(self.upstream_energy, self.q, b, self.g, false)
                } else {
                    bernoulli_height(self.downstream_energy, self.q, b, self.g, true)
                }
            }
        }
    }

    pub fn state(&self, x: f64) -> Result<Conserved> {
        Ok(Conserved::new(self.height(x)?, self.q))
    }
}
