//! Entropy pair, the generalized Tadmor condition for the low-order edge
//! fluxes, the entropy limiter for the corrected fluxes, and the semi-discrete
//! entropy inequality as a diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem_core::{Edge, Mesh1D};
use crate::low_order::{EdgeCoefficients, EdgeData, Rhs};
use crate::state::NodeValue;

/// `η = (g h² + h v²)/2 + g h b`.
pub fn entropy(u: &NodeValue, g: f64) -> f64 {
    0.5 * (g * u.h * u.h + u.h * u.v * u.v) + g * u.h * u.b
}

/// `q = (g (h + b) + v²/2) h v`.
pub fn entropy_flux(u: &NodeValue, g: f64) -> f64 {
    (g * (u.h + u.b) + 0.5 * u.v * u.v) * u.hv
}

/// `(g (h + b) - v²/2, v)`.
pub fn entropy_variables(u: &NodeValue, g: f64) -> [f64; 2] {
    [g * (u.h + u.b) - 0.5 * u.v * u.v, u.v]
}

/// `ψ = g h² v / 2`.
pub fn entropy_potential(u: &NodeValue, g: f64) -> f64 {
    0.5 * g * u.h * u.h * u.v
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Left factor shared by `P_ij` and `R_ij`:
/// `(g [h_i - h_j + α (b_i - b_j)] - (v_i² - v_j²)/2, v_i - v_j)`.
fn entropy_jump(u_i: &NodeValue, u_j: &NodeValue, alpha: f64, g: f64) -> [f64; 2] {
    [
        g * (u_i.h - u_j.h + alpha * (u_i.b - u_j.b)) - 0.5 * (u_i.v * u_i.v - u_j.v * u_j.v),
        u_i.v - u_j.v,
    ]
}

/// `(P_ij, Q_ij)` of the generalized Tadmor condition `d_ij P_ij / 2 <= Q_ij`.
pub fn compute_pq(u_i: &NodeValue, u_j: &NodeValue, alpha: f64, c_ij: f64, g: f64) -> (f64, f64) {
    let adb = alpha * (u_j.b - u_i.b);
    let vt = 0.5 * (u_i.v + u_j.v);
    let p = dot(
        entropy_jump(u_i, u_j, alpha, g),
        [u_j.h - u_i.h + adb, u_j.hv - u_i.hv + vt * adb],
    );
    let flat = |u: &NodeValue| NodeValue { b: 0.0, ..*u };
    let (w_i, w_j) = (
        entropy_variables(&flat(u_i), g),
        entropy_variables(&flat(u_j), g),
    );
    let (f_i, f_j) = (u_i.flux(g), u_j.flux(g));
    let ht = 0.5 * (u_i.h + u_j.h);
    let mt = 0.5 * (u_i.hv + u_j.hv);
    let q = (entropy_potential(u_j, g) - entropy_potential(u_i, g)) * c_ij
        + 0.5
            * dot(
                [w_i[0] - w_j[0], w_i[1] - w_j[1]],
                [f_j.h + f_i.h, f_j.hv + f_i.hv],
            )
            * c_ij
        + g * (ht * vt - mt) * c_ij * adb;
    (p, q)
}

/// Sum of the absolute values of the terms of `Q_ij`, the scale of its
/// rounding error.
pub fn q_magnitude(u_i: &NodeValue, u_j: &NodeValue, alpha: f64, c_ij: f64, g: f64) -> f64 {
    let adb = alpha * (u_j.b - u_i.b);
    let flat = |u: &NodeValue| NodeValue { b: 0.0, ..*u };
    let (w_i, w_j) = (
        entropy_variables(&flat(u_i), g),
        entropy_variables(&flat(u_j), g),
    );
    let (f_i, f_j) = (u_i.flux(g), u_j.flux(g));
    let c = c_ij.abs();
    let ht = 0.5 * (u_i.h + u_j.h);
    let vt = 0.5 * (u_i.v + u_j.v);
    let mt = 0.5 * (u_i.hv + u_j.hv);
    (entropy_potential(u_j, g).abs() + entropy_potential(u_i, g).abs()) * c
        + 0.5
            * ((w_i[0].abs() + w_j[0].abs()) * (f_j.h + f_i.h).abs()
                + (w_i[1].abs() + w_j[1].abs()) * (f_j.hv + f_i.hv).abs())
            * c
        + g * ((ht * vt).abs() + mt.abs()) * c * adb.abs()
}

/// `R_ij` for the corrected fluxes `(f^{h,*}_ij, f^{hv,*}_ij)`.
pub fn compute_r(u_i: &NodeValue, u_j: &NodeValue, alpha: f64, f_h: f64, f_hv: f64, g: f64) -> f64 {
    dot(entropy_jump(u_i, u_j, alpha, g), [f_h, f_hv])
}

/// How the low-order viscosity is made to satisfy the generalized Tadmor
/// condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TadmorFix {
    /// Leave `d_ij` alone.
    Off,
    /// `d_ij = 2 min{0, Q_ij, Q_ji} / P_ij` on violating edges.
    #[default]
    ResetViscosity,
    /// Lower `α_ij^b` by bisection until the condition holds, falling back
    /// to the viscosity reset when even `α = 0` fails.
    ReduceBathymetryLimiter,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyEdge {
    pub p: f64,
    pub q_ij: f64,
    pub q_ji: f64,
    pub r: f64,
    pub beta: f64,
    /// Rounding scale of `Q_ij` and `Q_ji`.
    pub q_scale: f64,
}

impl EntropyEdge {
    pub fn new(e: &EdgeData, nodes: &[NodeValue], g: f64) -> Self {
        let (u_i, u_j) = (&nodes[e.i], &nodes[e.j]);
        let (p, q_ij) = compute_pq(u_i, u_j, e.alpha, e.c_ij, g);
        let (_, q_ji) = compute_pq(u_j, u_i, e.alpha, e.c_ji, g);
        let q_scale = q_magnitude(u_i, u_j, e.alpha, e.c_ij, g)
            .max(q_magnitude(u_j, u_i, e.alpha, e.c_ji, g));
        Self {
            p,
            q_ij,
            q_ji,
            r: 0.0,
            beta: 1.0,
            q_scale,
        }
    }

    pub fn min_q(&self) -> f64 {
        self.q_ij.min(self.q_ji)
    }

    /// Whether `d P / 2 <= min{Q_ij, Q_ji}` fails beyond rounding.
    pub fn violated(&self, d: f64) -> bool {
        let lhs = 0.5 * d * self.p;
        let tol = 1e-12 * (lhs.abs() + self.q_scale);
        lhs > self.min_q() + tol
    }

    /// The reset value of `d_ij`, if `P_ij` allows one.
    pub fn reset_viscosity(&self) -> Option<f64> {
        let scale = self.q_scale;
        (self.p < 0.0 && self.p.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE))
            .then(|| 2.0 * self.min_q().min(0.0) / self.p)
    }
}

/// Per-step counters of the low-order entropy enforcement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnforcementStats {
    pub violations: usize,
    pub d_adjustments: usize,
    pub alpha_reductions: usize,
    /// Violations that could not be repaired (non-negative `P_ij`).
    pub unresolved: usize,
}

fn reduce_alpha(e: &EdgeData, nodes: &[NodeValue], g: f64) -> Option<EdgeData> {
    let holds = |alpha: f64| {
        let trial = e.with_alpha(nodes, g, alpha);
        !EntropyEdge::new(&trial, nodes, g).violated(trial.d)
    };
    if !holds(0.0) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, e.alpha);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(e.with_alpha(nodes, g, lo))
}

/// Enforces the generalized Tadmor condition on every mesh edge. Edges whose
/// viscosity changes get their bar states and `α_ij^b` recomputed once.
pub fn enforce_low_order_entropy(
    mesh: &Mesh1D,
    nodes: &[NodeValue],
    coeffs: &mut EdgeCoefficients,
    g: f64,
    fix: TadmorFix,
    dry_tol: f64,
) -> Result<EnforcementStats> {
    let mut stats = EnforcementStats::default();
    if fix == TadmorFix::Off {
        return Ok(stats);
    }
    let mesh_edges: &[Edge] = mesh.edges();
    for (k, e) in coeffs.edges.iter_mut().enumerate() {
        // P and Q of two (nearly) dry nodes are pure underflow.
        if nodes[e.i].h.max(nodes[e.j].h) <= dry_tol {
            continue;
        }
        let ent = EntropyEdge::new(e, nodes, g);
        if !ent.violated(e.d) {
            continue;
        }
        stats.violations += 1;
        if fix == TadmorFix::ReduceBathymetryLimiter && e.alpha > 0.0 {
            if let Some(reduced) = reduce_alpha(e, nodes, g) {
                *e = reduced;
                stats.alpha_reductions += 1;
                continue;
            }
        }
        match ent.reset_viscosity() {
            Some(d) if d > e.d => {
                *e = EdgeData::with_viscosity(&mesh_edges[k], nodes, g, e.lambda, d)?;
                stats.d_adjustments += 1;
            }
            _ => stats.unresolved += 1,
        }
    }
    Ok(stats)
}

/// Entropy correction factor `β_ij` from the budget `2 min{Q} - d P`.
/// Excess production up to `tol` is accepted as rounding.
pub fn entropy_limiter(budget: f64, r: f64, tol: f64) -> f64 {
    if r <= 0.0 || r <= budget + tol {
        1.0
    } else {
        (budget / r).clamp(0.0, 1.0)
    }
}

/// Entropy data and `β_ij` for all mesh edges given corrected fluxes.
pub fn entropy_limiter_all(
    nodes: &[NodeValue],
    coeffs: &EdgeCoefficients,
    f_h: &[f64],
    f_hv: &[f64],
    g: f64,
) -> Vec<EntropyEdge> {
    coeffs
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut ent = EntropyEdge::new(e, nodes, g);
            ent.r = compute_r(&nodes[e.i], &nodes[e.j], e.alpha, f_h[k], f_hv[k], g);
            let dp = e.d * ent.p;
            ent.beta = entropy_limiter(
                2.0 * ent.min_q() - dp,
                ent.r,
                1e-14 * (dp.abs() + 2.0 * ent.q_scale),
            );
            ent
        })
        .collect()
}

/// Directed-edge terms `G*_ij`, `W*_ij` and `(q_j - q_i) c_ij` of the entropy
/// inequality of node `i`. With `β f* = 0` these are `G_ij` and `W_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyTerms {
    pub g_star: f64,
    pub w_star: f64,
    pub q_flux: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn entropy_terms(
    u_i: &NodeValue,
    u_j: &NodeValue,
    d: f64,
    alpha: f64,
    c_ij: f64,
    bf_h: f64,
    bf_hv: f64,
    g: f64,
) -> EntropyTerms {
    let (w_i, w_j) = (entropy_variables(u_i, g), entropy_variables(u_j, g));
    let (f_i, f_j) = (u_i.flux(g), u_j.flux(g));
    let adb = alpha * (u_j.b - u_i.b);
    let ht = 0.5 * (u_i.h + u_j.h);
    let gv = [
        d * (u_j.h - u_i.h + adb),
        d * (u_j.hv - u_i.hv + 0.5 * (u_i.v + u_j.v) * adb),
    ];
    let s = [0.0, -g * ht * adb * c_ij];
    let mut g_star = 0.5 * dot([w_i[0] + w_j[0], w_i[1] + w_j[1]], gv)
        + 0.5
            * dot(
                [w_i[0] - w_j[0], w_i[1] - w_j[1]],
                [
                    (f_i.h - f_j.h) * c_ij + s[0],
                    (f_i.hv - f_j.hv) * c_ij + s[1],
                ],
            );
    let db = u_i.b - u_j.b;
    let mut w_star =
        0.5 * g * (1.0 - alpha) * db * (d * (u_j.h - u_i.h + adb) - (u_i.hv + u_j.hv) * c_ij);
    g_star += 0.5
        * ((g * (u_i.h + u_i.b + u_j.h + u_j.b) - 0.5 * (u_i.v * u_i.v + u_j.v * u_j.v)) * bf_h
            + (u_i.v + u_j.v) * bf_hv);
    w_star += 0.5 * g * (1.0 - alpha) * db * bf_h;
    EntropyTerms {
        g_star,
        w_star,
        q_flux: (entropy_flux(u_j, g) - entropy_flux(u_i, g)) * c_ij,
    }
}

/// Entropy inequality residual per node,
/// `v(u_i, b_i)ᵀ m_i du_i/dt - Σ_j [G*_ij + W*_ij - (q_j - q_i) c_ij]`,
/// over mesh edges. `rhs` must not contain boundary pseudo-edge terms;
/// `f_h`, `f_hv` are the fluxes added to the low-order right-hand side
/// (already multiplied by `β`).
pub fn entropy_inequality_residual(
    nodes: &[NodeValue],
    coeffs: &EdgeCoefficients,
    rhs: &Rhs,
    f_h: &[f64],
    f_hv: &[f64],
    g: f64,
) -> Vec<f64> {
    let mut res: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, u)| dot(entropy_variables(u, g), [rhs.h[i], rhs.hv[i]]))
        .collect();
    for (k, e) in coeffs.edges.iter().enumerate() {
        let (u_i, u_j) = (&nodes[e.i], &nodes[e.j]);
        let t = entropy_terms(u_i, u_j, e.d, e.alpha, e.c_ij, f_h[k], f_hv[k], g);
        res[e.i] -= t.g_star + t.w_star - t.q_flux;
        let t = entropy_terms(u_j, u_i, e.d, e.alpha, e.c_ji, -f_h[k], -f_hv[k], g);
        res[e.j] -= t.g_star + t.w_star - t.q_flux;
    }
    res
}

/// Magnitude used to judge entropy residuals: the largest per-node sum of
/// absolute edge terms.
pub fn residual_scale(nodes: &[NodeValue], coeffs: &EdgeCoefficients, g: f64) -> f64 {
    let mut s = vec![0.0; nodes.len()];
    for e in &coeffs.edges {
        let (u_i, u_j) = (&nodes[e.i], &nodes[e.j]);
        let ent = EntropyEdge::new(e, nodes, g);
        let mag = (0.5 * e.d * ent.p).abs()
            + ent.q_ij.abs()
            + ent.q_ji.abs()
            + (entropy_flux(u_j, g) - entropy_flux(u_i, g)).abs() * e.c_ij.abs();
        s[e.i] += mag;
        s[e.j] += mag;
    }
    s.into_iter().fold(0.0, f64::max)
}
