//! Monolithic convex limiting of the antidiffusive fluxes: water height
//! first, then the momentum flux under velocity constraints.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::low_order::{low_order_rhs, EdgeCoefficients, EdgeData, Rhs};
use crate::state::NodeValue;

/// Which raw antidiffusive fluxes are fed to the limiter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawFluxMode {
    /// Fluxes recovering the consistent-mass Galerkin scheme, with low-order
    /// time derivatives in the mass matrix correction.
    #[default]
    Full,
    /// As `Full` with the time derivatives set to zero.
    Steady,
    /// `f_ij = d_ij (u_i - u_j)`, no bathymetry terms.
    Simple,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawFluxes {
    /// `f_ij^h` per mesh edge, oriented from `i` to `j`.
    pub f_h: Vec<f64>,
    pub f_hv: Vec<f64>,
    pub hdot: Vec<f64>,
    pub hvdot: Vec<f64>,
}

fn raw_flux_pair(
    e: &EdgeData,
    u_i: &NodeValue,
    u_j: &NodeValue,
    dots: Option<(f64, f64, f64, f64)>,
    mode: RawFluxMode,
) -> (f64, f64) {
    match mode {
        RawFluxMode::Simple => (e.d * (u_i.h - u_j.h), e.d * (u_i.hv - u_j.hv)),
        RawFluxMode::Full | RawFluxMode::Steady => {
            let adb = e.alpha * (u_i.b - u_j.b);
            let mut f_h = e.d * (u_i.h - u_j.h + adb);
            let mut f_hv = e.d * (u_i.hv - u_j.hv + 0.5 * (u_i.v + u_j.v) * adb);
            if let Some((hd_i, hd_j, md_i, md_j)) = dots {
                f_h += e.m_ij * (hd_i - hd_j);
                f_hv += e.m_ij * (md_i - md_j);
            }
            (f_h, f_hv)
        }
    }
}

/// Raw antidiffusive fluxes. `low` is the low-order right-hand side
/// `m_i du_i/dt`, needed in `Full` mode only.
pub fn raw_fluxes(
    nodes: &[NodeValue],
    coeffs: &EdgeCoefficients,
    low: &Rhs,
    lumped_mass: &[f64],
    mode: RawFluxMode,
) -> RawFluxes {
    let n = nodes.len();
    let (hdot, hvdot) = if mode == RawFluxMode::Full {
        (
            (0..n).map(|i| low.h[i] / lumped_mass[i]).collect(),
            (0..n).map(|i| low.hv[i] / lumped_mass[i]).collect(),
        )
    } else {
        (vec![0.0; n], vec![0.0; n])
    };
    let mut out = RawFluxes {
        f_h: Vec::with_capacity(coeffs.edges.len()),
        f_hv: Vec::with_capacity(coeffs.edges.len()),
        hdot,
        hvdot,
    };
    for e in &coeffs.edges {
        let dots = (mode == RawFluxMode::Full)
            .then(|| (out.hdot[e.i], out.hdot[e.j], out.hvdot[e.i], out.hvdot[e.j]));
        let (f_h, f_hv) = raw_flux_pair(e, &nodes[e.i], &nodes[e.j], dots, mode);
        out.f_h.push(f_h);
        out.f_hv.push(f_hv);
    }
    out
}

/// Raw flux of the reversed edge `(j, i)`, computed from its own formula.
pub fn raw_flux_reversed(
    e: &EdgeData,
    nodes: &[NodeValue],
    raw: &RawFluxes,
    mode: RawFluxMode,
) -> (f64, f64) {
    let rev = EdgeData {
        i: e.j,
        j: e.i,
        c_ij: e.c_ji,
        c_ji: e.c_ij,
        bar_ij: e.bar_ji,
        bar_ji: e.bar_ij,
        ..*e
    };
    let dots = (mode == RawFluxMode::Full)
        .then(|| (raw.hdot[e.j], raw.hdot[e.i], raw.hvdot[e.j], raw.hvdot[e.i]));
    raw_flux_pair(&rev, &nodes[e.j], &nodes[e.i], dots, mode)
}

/// Local bounds `(min, max)` per node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Bounds {
    fn empty(n: usize) -> Self {
        Self {
            min: vec![f64::INFINITY; n],
            max: vec![f64::NEG_INFINITY; n],
        }
    }

    fn include(&mut self, node: usize, value: f64) {
        self.min[node] = self.min[node].min(value);
        self.max[node] = self.max[node].max(value);
    }

    /// Nodes without any contribution get the bounds `(0, 0)`.
    fn finish(mut self) -> Self {
        for (lo, hi) in self.min.iter_mut().zip(self.max.iter_mut()) {
            if *lo > *hi {
                *lo = 0.0;
                *hi = 0.0;
            }
        }
        self
    }
}

/// `h_i^min`, `h_i^max` over the bathymetry-corrected height bar states of
/// node `i`, including the boundary pseudo-edge.
pub fn height_bounds(n: usize, coeffs: &EdgeCoefficients) -> Bounds {
    let mut b = Bounds::empty(n);
    for e in &coeffs.edges {
        b.include(e.i, e.bar_ij.h_b);
        b.include(e.j, e.bar_ji.h_b);
    }
    for be in &coeffs.boundary {
        b.include(be.node, be.bar.h_b);
    }
    b.finish()
}

/// Scalar clamp shared by the height and momentum limiters. The two slack
/// arguments are the admissible increments `(upper, lower)` of the bar state
/// of `i`, already multiplied by `2 d_ij`; the clamp never flips the sign of
/// `f`.
fn clamp_flux(f: f64, up: f64, down: f64) -> f64 {
    if f >= 0.0 {
        f.min(up.max(0.0))
    } else {
        f.max(down.min(0.0))
    }
}

pub fn limit_height_flux(
    f: f64,
    d: f64,
    hbar_ij_b: f64,
    hbar_ji_b: f64,
    bounds_i: (f64, f64),
    bounds_j: (f64, f64),
) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let (min_i, max_i) = bounds_i;
    let (min_j, max_j) = bounds_j;
    clamp_flux(
        f,
        2.0 * d * (max_i - hbar_ij_b).min(hbar_ji_b - min_j),
        2.0 * d * (min_i - hbar_ij_b).max(hbar_ji_b - max_j),
    )
}

/// Generalized velocity bar state `v̄_ij = v̄_ji` of a wet edge, evaluated
/// in the form where the bathymetry terms of the bar states have cancelled.
pub fn velocity_bar_state(e: &EdgeData, nodes: &[NodeValue], g: f64) -> f64 {
    let (u_i, u_j) = (&nodes[e.i], &nodes[e.j]);
    let num = 2.0 * e.d * (e.bar_ij.hv + e.bar_ji.hv)
        - g * 0.5 * (u_i.h + u_j.h) * e.alpha * (u_j.b - u_i.b) * (e.c_ij - e.c_ji);
    num / (2.0 * e.d * (e.bar_ij.h + e.bar_ji.h))
}

/// `v̄_ij` from its defining ratio of bathymetry-corrected bar states.
pub fn velocity_bar_state_direct(e: &EdgeData) -> f64 {
    (e.bar_ij.hv_b + e.bar_ji.hv_b) / (e.bar_ij.h_b + e.bar_ji.h_b)
}

pub fn is_dry_edge(e: &EdgeData, dry_tol: f64) -> bool {
    e.d <= 0.0 || e.bar_ij.h_b + e.bar_ji.h_b < dry_tol || e.bar_ij.h + e.bar_ji.h <= 0.0
}

/// Velocity bounds over `{v̄_ij, (hv)‾_ij^b / h̄_ij}`, skipping dry edges and
/// dry bar states. `vbar` holds `NaN` for dry edges.
pub fn velocity_bounds(n: usize, coeffs: &EdgeCoefficients, vbar: &[f64], dry_tol: f64) -> Bounds {
    let mut b = Bounds::empty(n);
    for (e, &v) in coeffs.edges.iter().zip(vbar) {
        if !v.is_nan() {
            b.include(e.i, v);
            b.include(e.j, v);
        }
        for (node, bar) in [(e.i, &e.bar_ij), (e.j, &e.bar_ji)] {
            if bar.h >= dry_tol && bar.h > 0.0 {
                b.include(node, bar.hv_b / bar.h);
            }
        }
    }
    for be in &coeffs.boundary {
        if be.bar.h >= dry_tol && be.bar.h > 0.0 {
            b.include(be.node, be.bar.hv_b / be.bar.h);
        }
    }
    b.finish()
}

/// Result of the sequential limiter. Edge quantities are oriented from `i`
/// to `j`; the reversed fluxes are their negatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LimitedFluxes {
    pub f_h_star: Vec<f64>,
    pub f_hv_star: Vec<f64>,
    pub g_hv: Vec<f64>,
    pub g_hv_star: Vec<f64>,
    pub vbar: Vec<f64>,
    /// `(h̄_ij^*, h̄_ji^*)`
    pub hbar_star: Vec<(f64, f64)>,
    /// `(h̄_ij^{b,*}, h̄_ji^{b,*})`
    pub hbar_b_star: Vec<(f64, f64)>,
    /// `((hv)‾_ij^{b,*}, (hv)‾_ji^{b,*})`
    pub hvbar_b_star: Vec<(f64, f64)>,
    pub h_bounds: Bounds,
    pub v_bounds: Bounds,
}

/// Momentum limiter for one edge. Returns `(g, g*, f^{hv,*})`.
pub fn limit_momentum_flux(
    f_hv: f64,
    e: &EdgeData,
    hbar_star: (f64, f64),
    vbar: f64,
    bounds_i: (f64, f64),
    bounds_j: (f64, f64),
) -> (f64, f64, f64) {
    let (hs_ij, hs_ji) = hbar_star;
    let shift = 2.0 * e.d * (e.bar_ij.hv_b - hs_ij * vbar);
    let g = f_hv + shift;
    let (min_i, max_i) = bounds_i;
    let (min_j, max_j) = bounds_j;
    let g_star = clamp_flux(
        g,
        2.0 * e.d * (hs_ij * (max_i - vbar)).min(hs_ji * (vbar - min_j)),
        2.0 * e.d * (hs_ij * (min_i - vbar)).max(hs_ji * (vbar - max_j)),
    );
    (g, g_star, g_star - shift)
}

/// Sequential limiting of all mesh edges.
pub fn limit_fluxes(
    nodes: &[NodeValue],
    coeffs: &EdgeCoefficients,
    raw: &RawFluxes,
    g: f64,
    dry_tol: f64,
) -> LimitedFluxes {
    let n = nodes.len();
    let m = coeffs.edges.len();
    let h_bounds = height_bounds(n, coeffs);
    let mut out = LimitedFluxes {
        f_h_star: Vec::with_capacity(m),
        f_hv_star: vec![0.0; m],
        g_hv: vec![0.0; m],
        g_hv_star: vec![0.0; m],
        vbar: Vec::with_capacity(m),
        hbar_star: Vec::with_capacity(m),
        hbar_b_star: Vec::with_capacity(m),
        hvbar_b_star: vec![(0.0, 0.0); m],
        h_bounds: Bounds::default(),
        v_bounds: Bounds::default(),
    };
    for (k, e) in coeffs.edges.iter().enumerate() {
        let bi = (h_bounds.min[e.i], h_bounds.max[e.i]);
        let bj = (h_bounds.min[e.j], h_bounds.max[e.j]);
        let fs = limit_height_flux(raw.f_h[k], e.d, e.bar_ij.h_b, e.bar_ji.h_b, bi, bj);
        let s = if e.d > 0.0 { fs / (2.0 * e.d) } else { 0.0 };
        out.f_h_star.push(fs);
        out.hbar_star.push((e.bar_ij.h + s, e.bar_ji.h - s));
        out.hbar_b_star.push((e.bar_ij.h_b + s, e.bar_ji.h_b - s));
        out.vbar.push(if is_dry_edge(e, dry_tol) {
            f64::NAN
        } else {
            velocity_bar_state(e, nodes, g)
        });
    }
    let v_bounds = velocity_bounds(n, coeffs, &out.vbar, dry_tol);
    for (k, e) in coeffs.edges.iter().enumerate() {
        // Roundoff can leave a limited height bar state slightly negative.
        let (hs_ij, hs_ji) = out.hbar_star[k];
        let snap = |h: f64| if h < 0.0 && h >= -dry_tol { 0.0 } else { h };
        let (hs_ij, hs_ji) = (snap(hs_ij), snap(hs_ji));
        let v = out.vbar[k];
        if !v.is_nan() && hs_ij >= 0.0 && hs_ji >= 0.0 {
            let (gg, gs, fs) = limit_momentum_flux(
                raw.f_hv[k],
                e,
                (hs_ij, hs_ji),
                v,
                (v_bounds.min[e.i], v_bounds.max[e.i]),
                (v_bounds.min[e.j], v_bounds.max[e.j]),
            );
            out.g_hv[k] = gg;
            out.g_hv_star[k] = gs;
            out.f_hv_star[k] = fs;
        }
        let s = if e.d > 0.0 {
            out.f_hv_star[k] / (2.0 * e.d)
        } else {
            0.0
        };
        out.hvbar_b_star[k] = (e.bar_ij.hv_b + s, e.bar_ji.hv_b - s);
    }
    out.h_bounds = h_bounds;
    out.v_bounds = v_bounds;
    out
}

/// Flux-corrected right-hand side: the low-order right-hand side plus the
/// limited fluxes, each scaled by `beta` if given.
pub fn mcl_rhs(
    nodes: &[NodeValue],
    coeffs: &EdgeCoefficients,
    limited: &LimitedFluxes,
    beta: Option<&[f64]>,
) -> Result<Rhs> {
    let mut rhs = low_order_rhs(nodes, coeffs)?;
    add_fluxes(
        &mut rhs,
        coeffs,
        &limited.f_h_star,
        &limited.f_hv_star,
        beta,
    );
    rhs.check_finite()?;
    Ok(rhs)
}

pub fn add_fluxes(
    rhs: &mut Rhs,
    coeffs: &EdgeCoefficients,
    f_h: &[f64],
    f_hv: &[f64],
    beta: Option<&[f64]>,
) {
    for (k, e) in coeffs.edges.iter().enumerate() {
        let b = beta.map_or(1.0, |b| b[k]);
        rhs.h[e.i] += b * f_h[k];
        rhs.h[e.j] -= b * f_h[k];
        rhs.hv[e.i] += b * f_hv[k];
        rhs.hv[e.j] -= b * f_hv[k];
    }
}
