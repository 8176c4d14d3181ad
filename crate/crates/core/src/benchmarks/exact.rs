//! Closed-form solutions of the dam break problems and the parabolic lake.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state::Conserved;

/// Middle state of the wet dam break (rarefaction to the left, shock to the
/// right) as `(h_m, v_m)`.
pub fn wet_dam_break_middle_state(h_l: f64, h_r: f64, g: f64) -> Result<(f64, f64)> {
    if !(h_l > h_r && h_r > 0.0 && g > 0.0) {
        return Err(Error::Benchmark(format!(
            "wet dam break needs h_L > h_R > 0 and g > 0, got {h_l}, {h_r}, {g}"
        )));
    }
    let c_l = (g * h_l).sqrt();
    let rarefaction = |h: f64| 2.0 * (c_l - (g * h).sqrt());
    let shock = |h: f64| (h - h_r) * (0.5 * g * (h + h_r) / (h * h_r)).sqrt();
    let mismatch = |h: f64| rarefaction(h) - shock(h);
    let (mut lo, mut hi) = (h_r, h_l);
    if !(mismatch(lo) > 0.0 && mismatch(hi) < 0.0) {
        return Err(Error::Benchmark(
            "root of the wet dam break matching condition is not bracketed".into(),
        ));
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h_m = 0.5 * (lo + hi);
    Ok((h_m, rarefaction(h_m)))
}

/// Wet dam break over a flat bottom with the dam at `x0`.
pub fn exact_wet_dam_break(
    x: f64,
    t: f64,
    h_l: f64,
    h_r: f64,
    x0: f64,
    g: f64,
) -> Result<Conserved> {
    let (h_m, v_m) = wet_dam_break_middle_state(h_l, h_r, g)?;
    Ok(wet_dam_break_profile(x, t, h_l, h_r, x0, g, h_m, v_m))
}

/// Evaluator for repeated use that solves for the middle state once.
pub fn wet_dam_break_evaluator(
    h_l: f64,
    h_r: f64,
    x0: f64,
    g: f64,
) -> Result<impl Fn(f64, f64) -> Conserved + Send + Sync + Clone> {
    let (h_m, v_m) = wet_dam_break_middle_state(h_l, h_r, g)?;
    Ok(move |x: f64, t: f64| wet_dam_break_profile(x, t, h_l, h_r, x0, g, h_m, v_m))
}

#[allow(clippy::too_many_arguments)]
fn wet_dam_break_profile(
    x: f64,
    t: f64,
    h_l: f64,
    h_r: f64,
    x0: f64,
    g: f64,
    h_m: f64,
    v_m: f64,
) -> Conserved {
    if t <= 0.0 {
        return Conserved::new(step(x, x0, h_l, h_r), 0.0);
    }
    let c_l = (g * h_l).sqrt();
    let c_m = (g * h_m).sqrt();
    let s = h_m * v_m / (h_m - h_r);
    let xi = (x - x0) / t;
    if xi <= -c_l {
        Conserved::new(h_l, 0.0)
    } else if xi <= v_m - c_m {
        let h = (2.0 * c_l - xi).powi(2) / (9.0 * g);
        Conserved::new(h, h * 2.0 * (c_l + xi) / 3.0)
    } else if xi < s {
        Conserved::new(h_m, h_m * v_m)
    } else {
        Conserved::new(h_r, 0.0)
    }
}

/// Dam break into a dry region: a single rarefaction with the wet front at
/// `x0 + 2 t √(g h_L)`.
pub fn exact_dry_dam_break(x: f64, t: f64, h_l: f64, x0: f64, g: f64) -> Conserved {
    if t <= 0.0 {
        return Conserved::new(step(x, x0, h_l, 0.0), 0.0);
    }
    let c_l = (g * h_l).sqrt();
    let xi = (x - x0) / t;
    if xi <= -c_l {
        Conserved::new(h_l, 0.0)
    } else if xi < 2.0 * c_l {
        let h = (2.0 * c_l - xi).powi(2) / (9.0 * g);
        Conserved::new(h, h * 2.0 * (c_l + xi) / 3.0)
    } else {
        Conserved::new(0.0, 0.0)
    }
}

/// Initial dam break profile; the node on the dam belongs to the left.
pub fn step(x: f64, x0: f64, left: f64, right: f64) -> f64 {
    if x <= x0 {
        left
    } else {
        right
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThackerParams {
    pub big_b: f64,
    pub a: f64,
    pub h0: f64,
    pub g: f64,
}

impl Default for ThackerParams {
    fn default() -> Self {
        Self {
            big_b: 5.0,
            a: 3000.0,
            h0: 10.0,
            g: 9.81,
        }
    }
}

impl ThackerParams {
    pub fn omega(&self) -> f64 {
        (2.0 * self.g * self.h0).sqrt() / self.a
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega()
    }

    pub fn bathymetry(&self, x: f64) -> f64 {
        self.h0 * (x / self.a).powi(2)
    }

    /// Shorelines `(x_-, x_+)` at time `t`.
    pub fn shorelines(&self, t: f64) -> (f64, f64) {
        let c = -self.big_b / self.omega() * (self.omega() * t).cos();
        (c - self.a, c + self.a)
    }
}

/// Free surface elevation `H` and velocity `v` of the parabolic lake.
pub fn exact_thacker(x: f64, t: f64, p: &ThackerParams) -> (f64, f64) {
    let w = p.omega();
    let (xm, xp) = p.shorelines(t);
    if (xm..=xp).contains(&x) {
        let h = p.h0
            - p.big_b.powi(2) / (4.0 * p.g) * (1.0 + (2.0 * w * t).cos())
            - p.big_b * x / p.a * (2.0 * p.h0 / p.g).sqrt() * (w * t).cos();
        let v = p.big_b * p.a * w / (2.0 * p.h0 * p.g).sqrt() * (w * t).sin();
        (h, v)
    } else {
        (p.bathymetry(x), 0.0)
    }
}

/// Water height and discharge of the parabolic lake.
pub fn thacker_state(x: f64, t: f64, p: &ThackerParams) -> Conserved {
    let (big_h, v) = exact_thacker(x, t, p);
    let h = (big_h - p.bathymetry(x)).max(0.0);
    Conserved::new(h, h * v)
}
