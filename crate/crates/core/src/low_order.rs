//! Property-preserving low-order discretization: algebraic local
//! Lax-Friedrichs diffusion, the bathymetry limiter, and the resulting
//! bar states.

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryEdge, Regime, Side};
use crate::error::{Error, Result};
use crate::fem_core::{Edge, Mesh1D};
use crate::state::{Conserved, NodeValue};

/// How the maximum wave speed of an edge Riemann problem is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveSpeed {
    /// `max{|v_i| + sqrt(g h_i), |v_j| + sqrt(g h_j)}`.
    #[default]
    Nodal,
    /// Guaranteed upper bound built from the two-rarefaction estimate of the
    /// intermediate height.
    Gms,
}

/// Maximum wave speed for two conserved states, with plain velocities.
pub fn max_wave_speed(u_i: Conserved, u_j: Conserved, g: f64) -> Result<f64> {
    if u_i.h < 0.0 || u_j.h < 0.0 {
        return Err(Error::Precondition(format!(
            "negative water height in wave speed ({}, {})",
            u_i.h, u_j.h
        )));
    }
    Ok(nodal_wave_speed(
        &NodeValue::plain(u_i, 0.0),
        &NodeValue::plain(u_j, 0.0),
        g,
    ))
}

pub fn nodal_wave_speed(a: &NodeValue, b: &NodeValue, g: f64) -> f64 {
    let s = |n: &NodeValue| n.v.abs() + (g * n.h.max(0.0)).sqrt();
    s(a).max(s(b))
}

/// Guaranteed maximum wave speed of the Riemann problem with left state `l`
/// and right state `r`.
pub fn guaranteed_max_speed(l: &NodeValue, r: &NodeValue, g: f64) -> f64 {
    let (hl, hr) = (l.h.max(0.0), r.h.max(0.0));
    let (cl, cr) = ((g * hl).sqrt(), (g * hr).sqrt());
    let (vl, vr) = (l.v, r.v);
    if hl <= 0.0 && hr <= 0.0 {
        return vl.abs().max(vr.abs());
    }
    if hl <= 0.0 {
        return (vr - 2.0 * cr).abs().max((vr + cr).abs());
    }
    if hr <= 0.0 {
        return (vl + 2.0 * cl).abs().max((vl - cl).abs());
    }
    if 2.0 * (cl + cr) <= vr - vl {
        // The fan opens a dry region between the two rarefactions.
        return [vl - cl, vl + 2.0 * cl, vr - 2.0 * cr, vr + cr]
            .into_iter()
            .fold(0.0, |m, s| m.max(s.abs()));
    }
    let c_star = 0.5 * (cl + cr) + 0.25 * (vl - vr);
    let h_star = c_star * c_star / g;
    let factor = |h: f64| {
        let x = (h_star - h).max(0.0) / h;
        ((1.0 + x) * (1.0 + 0.5 * x)).sqrt()
    };
    let lambda_1 = vl - cl * factor(hl);
    let lambda_2 = vr + cr * factor(hr);
    lambda_1.abs().max(lambda_2.abs())
}

pub fn wave_speed(mode: WaveSpeed, a: &NodeValue, b: &NodeValue, g: f64) -> f64 {
    match mode {
        WaveSpeed::Nodal => nodal_wave_speed(a, b, g),
        // `a` sits left of `b` for every mesh edge and pseudo-edge we build.
        WaveSpeed::Gms => guaranteed_max_speed(a, b, g),
    }
}

/// `d_ij = max{λ_ij |c_ij|, λ_ji |c_ji|}` with a symmetric speed estimate.
pub fn viscosity_coefficient(lambda: f64, c_ij: f64, c_ji: f64) -> f64 {
    (lambda * c_ij.abs()).max(lambda * c_ji.abs())
}

/// Low-order bar state `(u_i + u_j)/2 - (f_j - f_i) c_ij / (2 d_ij)`.
///
/// Returns `None` for `d_ij = 0` unless both states and fluxes coincide, in
/// which case the common state is returned, or both nodes are dry, in which
/// case the average is returned.
pub fn bar_states(
    u_i: &NodeValue,
    u_j: &NodeValue,
    d: f64,
    c_ij: f64,
    g: f64,
) -> Option<Conserved> {
    let (f_i, f_j) = (u_i.flux(g), u_j.flux(g));
    let avg = 0.5 * (u_i.conserved() + u_j.conserved());
    if d > 0.0 {
        let two_d = 2.0 * d;
        Some(Conserved::new(
            avg.h - (f_j.h - f_i.h) * c_ij / two_d,
            avg.hv - (f_j.hv - f_i.hv) * c_ij / two_d,
        ))
    } else if u_i.conserved() == u_j.conserved() && f_i == f_j {
        Some(u_i.conserved())
    } else if u_i.h <= 0.0 && u_j.h <= 0.0 {
        Some(avg)
    } else {
        None
    }
}

/// Largest `α ∈ [0, 1]` keeping both bathymetry-corrected height bar states
/// nonnegative.
pub fn bathymetry_limiter(hbar_ij: f64, hbar_ji: f64, b_i: f64, b_j: f64) -> f64 {
    let db = b_j - b_i;
    if db == 0.0 {
        return 1.0;
    }
    // The bar state that the bathymetry difference pushes down, and the
    // difference entering it.
    let (target, delta) = if db > 0.0 {
        (hbar_ji, b_i - b_j)
    } else {
        (hbar_ij, b_j - b_i)
    };
    let mut alpha = (2.0 * target / -delta).min(1.0).max(0.0);
    while alpha > 0.0 && target + 0.5 * alpha * delta < 0.0 {
        alpha = alpha.next_down().max(0.0);
    }
    alpha
}

/// Quadrature-based source contribution `g (h_i + h_j)/2 (b_j - b_i) c_ij` of
/// one edge to the momentum equation of node `i`.
pub fn source_quadrature(h_i: f64, h_j: f64, b_i: f64, b_j: f64, c_ij: f64, g: f64) -> f64 {
    g * 0.5 * (h_i + h_j) * (b_j - b_i) * c_ij
}

/// Bar states of one directed pair `(i, j)`, without and with bathymetry
/// terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BarState {
    /// `h̄_ij`
    pub h: f64,
    /// `(hv)‾_ij`
    pub hv: f64,
    /// `h̄_ij^b`
    pub h_b: f64,
    /// `(hv)‾_ij^b`
    pub hv_b: f64,
}

impl BarState {
    fn corrected(
        plain: Conserved,
        u_i: &NodeValue,
        u_j: &NodeValue,
        alpha: f64,
        d: f64,
        c_ij: f64,
        g: f64,
    ) -> Self {
        let db = u_j.b - u_i.b;
        let mut hv_b = plain.hv + 0.25 * (u_i.v + u_j.v) * alpha * db;
        if d > 0.0 {
            hv_b -= source_quadrature(u_i.h, u_j.h, u_i.b, u_j.b, c_ij, g) * alpha / (2.0 * d);
        }
        Self {
            h: plain.h,
            hv: plain.hv,
            h_b: plain.h + 0.5 * alpha * db,
            hv_b,
        }
    }

    pub fn with_bathymetry(&self) -> Conserved {
        Conserved::new(self.h_b, self.hv_b)
    }
}

/// Low-order coefficients of one mesh edge `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeData {
    pub i: usize,
    pub j: usize,
    pub c_ij: f64,
    pub c_ji: f64,
    pub m_ij: f64,
    pub lambda: f64,
    pub d: f64,
    pub alpha: f64,
    pub bar_ij: BarState,
    pub bar_ji: BarState,
}

impl EdgeData {
    pub fn new(edge: &Edge, nodes: &[NodeValue], g: f64, mode: WaveSpeed) -> Result<Self> {
        let (a, b) = (&nodes[edge.i], &nodes[edge.j]);
        let lambda = wave_speed(mode, a, b, g);
        let d = viscosity_coefficient(lambda, edge.c_ij, edge.c_ji);
        Self::with_viscosity(edge, nodes, g, lambda, d)
    }

    /// Edge data for a prescribed viscosity coefficient `d`.
    pub fn with_viscosity(
        edge: &Edge,
        nodes: &[NodeValue],
        g: f64,
        lambda: f64,
        d: f64,
    ) -> Result<Self> {
        let (u_i, u_j) = (&nodes[edge.i], &nodes[edge.j]);
        let degenerate = || Error::DegenerateEdge {
            i: edge.i,
            j: edge.j,
        };
        let plain_ij = bar_states(u_i, u_j, d, edge.c_ij, g).ok_or_else(degenerate)?;
        let plain_ji = bar_states(u_j, u_i, d, edge.c_ji, g).ok_or_else(degenerate)?;
        let alpha = bathymetry_limiter(plain_ij.h, plain_ji.h, u_i.b, u_j.b);
        Ok(Self {
            i: edge.i,
            j: edge.j,
            c_ij: edge.c_ij,
            c_ji: edge.c_ji,
            m_ij: edge.mass,
            lambda,
            d,
            alpha,
            bar_ij: BarState::corrected(plain_ij, u_i, u_j, alpha, d, edge.c_ij, g),
            bar_ji: BarState::corrected(plain_ji, u_j, u_i, alpha, d, edge.c_ji, g),
        })
    }

    /// The same edge with a smaller bathymetry correction factor.
    pub fn with_alpha(&self, nodes: &[NodeValue], g: f64, alpha: f64) -> Self {
        let (u_i, u_j) = (&nodes[self.i], &nodes[self.j]);
        let plain = |b: &BarState| Conserved::new(b.h, b.hv);
        Self {
            alpha,
            bar_ij: BarState::corrected(plain(&self.bar_ij), u_i, u_j, alpha, self.d, self.c_ij, g),
            bar_ji: BarState::corrected(plain(&self.bar_ji), u_j, u_i, alpha, self.d, self.c_ji, g),
            ..*self
        }
    }

    /// Bar states seen from `node`.
    pub fn bar_from(&self, node: usize) -> &BarState {
        if node == self.i {
            &self.bar_ij
        } else {
            &self.bar_ji
        }
    }
}

impl BoundaryEdge {
    /// Pseudo-edge between a boundary node and its external Riemann state.
    /// The external state carries the node's bathymetry.
    pub fn new(
        node: usize,
        side: Side,
        internal: &NodeValue,
        external: NodeValue,
        regime: Regime,
        g: f64,
        mode: WaveSpeed,
    ) -> Result<Self> {
        let c = 0.5 * side.normal();
        let lambda = match side {
            Side::Left => wave_speed(mode, &external, internal, g),
            Side::Right => wave_speed(mode, internal, &external, g),
        };
        let d = lambda * c.abs();
        let plain = bar_states(internal, &external, d, c, g).ok_or(Error::Boundary {
            side,
            what: "zero wave speed with distinct internal and external states".into(),
        })?;
        Ok(Self {
            node,
            side,
            c,
            external,
            regime,
            lambda,
            d,
            bar: BarState {
                h: plain.h,
                hv: plain.hv,
                h_b: plain.h,
                hv_b: plain.hv,
            },
        })
    }
}

/// Edge coefficients for one right-hand side evaluation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeCoefficients {
    pub edges: Vec<EdgeData>,
    pub boundary: Vec<BoundaryEdge>,
}

impl EdgeCoefficients {
    pub fn assemble(
        mesh: &Mesh1D,
        nodes: &[NodeValue],
        boundary: Vec<BoundaryEdge>,
        g: f64,
        mode: WaveSpeed,
    ) -> Result<Self> {
        let edges = mesh
            .edges()
            .iter()
            .map(|e| EdgeData::new(e, nodes, g, mode))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { edges, boundary })
    }

    /// `Σ_{j ∈ N_i \ {i}} 2 d_ij` over mesh edges only.
    pub fn diffusion_sums(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for e in &self.edges {
            s[e.i] += 2.0 * e.d;
            s[e.j] += 2.0 * e.d;
        }
        s
    }
}

/// Semi-discrete right-hand side `m_i du_i/dt` (not divided by the lumped
/// mass).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rhs {
    pub h: Vec<f64>,
    pub hv: Vec<f64>,
}

impl Rhs {
    pub fn zeros(n: usize) -> Self {
        Self {
            h: vec![0.0; n],
            hv: vec![0.0; n],
        }
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

    pub fn check_finite(&self) -> Result<()> {
        match (0..self.len()).find(|&i| !self.h[i].is_finite() || !self.hv[i].is_finite()) {
            Some(node) => Err(Error::Numerical {
                node,
                what: format!(
                    "non-finite right-hand side ({}, {})",
                    self.h[node], self.hv[node]
                ),
            }),
            None => Ok(()),
        }
    }
}

/// Low-order right-hand side in bar state form,
/// `Σ_j 2 d_ij (ū_ij^b - u_i)`, including boundary pseudo-edges.
pub fn low_order_rhs(nodes: &[NodeValue], coeffs: &EdgeCoefficients) -> Result<Rhs> {
    let mut rhs = Rhs::zeros(nodes.len());
    for e in &coeffs.edges {
        for (node, bar) in [(e.i, &e.bar_ij), (e.j, &e.bar_ji)] {
            rhs.h[node] += 2.0 * e.d * (bar.h_b - nodes[node].h);
            rhs.hv[node] += 2.0 * e.d * (bar.hv_b - nodes[node].hv);
        }
    }
    for be in &coeffs.boundary {
        let u = &nodes[be.node];
        rhs.h[be.node] += 2.0 * be.d * (be.bar.h_b - u.h);
        rhs.hv[be.node] += 2.0 * be.d * (be.bar.hv_b - u.hv);
    }
    rhs.check_finite()?;
    Ok(rhs)
}

/// Low-order right-hand side in flux form: artificial diffusion, Galerkin
/// flux differences, the entropy-stabilizing bathymetry term and the limited
/// source, plus the weak boundary fluxes. Algebraically identical to
/// [`low_order_rhs`].
pub fn low_order_rhs_flux_form(
    nodes: &[NodeValue],
    coeffs: &EdgeCoefficients,
    g: f64,
) -> Result<Rhs> {
    let mut rhs = Rhs::zeros(nodes.len());
    for e in &coeffs.edges {
        for (i, j, c) in [(e.i, e.j, e.c_ij), (e.j, e.i, e.c_ji)] {
            let (u_i, u_j) = (&nodes[i], &nodes[j]);
            let (f_i, f_j) = (u_i.flux(g), u_j.flux(g));
            let adb = e.alpha * (u_j.b - u_i.b);
            rhs.h[i] += e.d * (u_j.h - u_i.h + adb) - (f_j.h - f_i.h) * c;
            rhs.hv[i] += e.d * (u_j.hv - u_i.hv + 0.5 * (u_i.v + u_j.v) * adb)
                - (f_j.hv - f_i.hv) * c
                - e.alpha * source_quadrature(u_i.h, u_j.h, u_i.b, u_j.b, c, g);
        }
    }
    for be in &coeffs.boundary {
        let inc = crate::boundary::boundary_flux_contribution(
            &nodes[be.node],
            &be.external,
            be.side,
            g,
            be.lambda,
        );
        rhs.h[be.node] += inc.h;
        rhs.hv[be.node] += inc.hv;
    }
    rhs.check_finite()?;
    Ok(rhs)
}
