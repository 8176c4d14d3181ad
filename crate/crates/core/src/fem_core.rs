//! Continuous P1 finite elements on an interval.
//!
//! All matrix structures are edge based: in one dimension the stencil of a
//! node holds itself and at most two neighbors, so the off-diagonal entries
//! of the consistent mass matrix `m_ij` and of the discrete gradient
//! `c_ij = ∫ φ_i φ_j'` are stored once per edge `(i, i + 1)` in ascending
//! order. That order is also the accumulation order of every assembly loop.

use crate::error::{Error, Result};

/// One mesh edge between nodes `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    /// Consistent mass entry `m_ij = m_ji`.
    pub mass: f64,
    /// `c_ij = ∫ φ_i φ_j'`.
    pub c_ij: f64,
    /// `c_ji = ∫ φ_j φ_i'`.
    pub c_ji: f64,
}

impl Edge {
    /// Gradient coefficient seen from `node` towards the other end.
    pub fn c_from(&self, node: usize) -> f64 {
        if node == self.i {
            self.c_ij
        } else {
            self.c_ji
        }
    }

    pub fn other(&self, node: usize) -> usize {
        if node == self.i {
            self.j
        } else {
            self.i
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    element_lengths: Vec<f64>,
    lumped_mass: Vec<f64>,
    mass_diag: Vec<f64>,
    grad_diag: Vec<f64>,
    edges: Vec<Edge>,
    node_edges: Vec<Vec<usize>>,
}

/// Uniform mesh of `n_elements` elements on `[x_left, x_right]`.
pub fn build_uniform_mesh(x_left: f64, x_right: f64, n_elements: usize) -> Result<Mesh1D> {
    if !(x_left.is_finite() && x_right.is_finite()) || x_left >= x_right {
        return Err(Error::Config(format!(
            "invalid interval [{x_left}, {x_right}]"
        )));
    }
    if n_elements < 2 {
        return Err(Error::Config(format!(
            "at least two elements are required, got {n_elements}"
        )));
    }
    let dx = (x_right - x_left) / n_elements as f64;
    let nodes = (0..=n_elements)
        .map(|k| {
            if k == n_elements {
                x_right
            } else {
                x_left + k as f64 * dx
            }
        })
        .collect();
    Mesh1D::from_nodes(nodes)
}

impl Mesh1D {
    /// Mesh with the given strictly increasing node coordinates.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Config(format!(
                "at least three nodes are required, got {}",
                nodes.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(
                "node coordinates must increase strictly".into(),
            ));
        }
        let n = nodes.len();
        let element_lengths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();

        let mut lumped_mass = vec![0.0; n];
        let mut mass_diag = vec![0.0; n];
        let mut grad_diag = vec![0.0; n];
        let mut edges = Vec::with_capacity(n - 1);
        let mut node_edges = vec![Vec::with_capacity(2); n];
        for (e, &len) in element_lengths.iter().enumerate() {
            let (i, j) = (e, e + 1);
            lumped_mass[i] += 0.5 * len;
            lumped_mass[j] += 0.5 * len;
            mass_diag[i] += len / 3.0;
            mass_diag[j] += len / 3.0;
            // φ_i' = -1/len, φ_j' = 1/len on the element, ∫ φ = len / 2.
            grad_diag[i] -= 0.5;
            grad_diag[j] += 0.5;
            edges.push(Edge {
                i,
                j,
                mass: len / 6.0,
                c_ij: 0.5,
                c_ji: -0.5,
            });
            node_edges[i].push(e);
            node_edges[j].push(e);
        }
        Ok(Self {
            nodes,
            element_lengths,
            lumped_mass,
            mass_diag,
            grad_diag,
            edges,
            node_edges,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.element_lengths.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn element_lengths(&self) -> &[f64] {
        &self.element_lengths
    }

    /// Lumped masses `m_i = Σ_j m_ij`.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped_mass
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Indices into [`Mesh1D::edges`] of the edges touching `node`.
    pub fn node_edges(&self, node: usize) -> &[usize] {
        &self.node_edges[node]
    }

    /// Stencil `N_i`: the node itself and all nodes sharing an element with it,
    /// in ascending order.
    pub fn stencil(&self, node: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.node_edges[node]
            .iter()
            .map(|&e| self.edges[e].other(node))
            .chain(std::iter::once(node))
            .collect();
        s.sort_unstable();
        s
    }

    /// Consistent mass entry `m_ij`, zero outside the sparsity pattern.
    pub fn consistent_mass(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.mass_diag[i];
        }
        self.edge_between(i, j).map_or(0.0, |e| self.edges[e].mass)
    }

    /// Discrete gradient entry `c_ij = ∫ φ_i φ_j'`, zero outside the pattern.
    pub fn grad_coeff(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.grad_diag[i];
        }
        self.edge_between(i, j)
            .map_or(0.0, |e| self.edges[e].c_from(i))
    }

    fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        self.node_edges[i]
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(i) == j)
    }

    pub fn x_left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn domain_length(&self) -> f64 {
        self.x_right() - self.x_left()
    }

    /// Largest element length.
    pub fn max_element_length(&self) -> f64 {
        self.element_lengths.iter().copied().fold(0.0, f64::max)
    }

    /// Integral of the P1 interpolant of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.lumped_mass
            .iter()
            .zip(values)
            .map(|(m, u)| m * u)
            .sum()
    }

    /// Evaluates the P1 interpolant of `values` at `x` (clamped to the domain).
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return values[0];
        }
        if x >= self.nodes[n - 1] {
            return values[n - 1];
        }
        let k = self.nodes.partition_point(|&xn| xn <= x) - 1;
        let t = (x - self.nodes[k]) / self.element_lengths[k];
        (1.0 - t) * values[k] + t * values[k + 1]
    }
}

/// Nodal values of the interpolated bottom topography and the gravitational
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Bathymetry {
    pub nodal_b: Vec<f64>,
    pub gravity: f64,
}

impl Bathymetry {
    pub fn flat(mesh: &Mesh1D, level: f64, gravity: f64) -> Self {
        Self {
            nodal_b: vec![level; mesh.n_nodes()],
            gravity,
        }
    }

    /// True when every nodal value equals the first one.
    pub fn is_flat(&self) -> bool {
        self.nodal_b.iter().all(|&b| b == self.nodal_b[0])
    }
}

/// Samples `b` at the mesh nodes. A bathymetry that jumps at a node resolves
/// to whatever `b` returns there.
pub fn interpolate_bathymetry(
    b: impl Fn(f64) -> f64,
    mesh: &Mesh1D,
    gravity: f64,
) -> Result<Bathymetry> {
    if !(gravity.is_finite() && gravity > 0.0) {
        return Err(Error::Config(format!(
            "gravity must be positive, got {gravity}"
        )));
    }
    let nodal_b = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let v = b(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Data(format!(
                    "bathymetry is {v} at node {k} (x = {x})"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Bathymetry { nodal_b, gravity })
}
