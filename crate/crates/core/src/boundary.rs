//! Weakly imposed boundary conditions. Each boundary node talks to an
//! external state through a Rusanov flux, which the edge machinery treats
//! as a pseudo-edge with `c = n/2` and `d = λ/2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::low_order::BarState;
use crate::state::{Conserved, NodeValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Outward unit normal.
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Boundary condition at one end of the domain. Discharges are signed in
/// the direction of the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Reflecting wall: mirrored velocity.
    Wall,
    SubcriticalInlet {
        discharge: f64,
    },
    SubcriticalOutlet {
        height: f64,
    },
    SupercriticalInlet {
        height: f64,
        discharge: f64,
    },
    SupercriticalOutlet,
    /// The regime is chosen from the signs of `v n ± sqrt(g h)` at the
    /// boundary node; `height` and `discharge` are used where the chosen
    /// regime prescribes them.
    Transcritical {
        height: f64,
        discharge: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl BoundarySpec {
    pub fn walls() -> Self {
        Self {
            left: BoundaryKind::Wall,
            right: BoundaryKind::Wall,
        }
    }

    pub fn get(&self, side: Side) -> BoundaryKind {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for side in [Side::Left, Side::Right] {
            let bad = |what: &str| {
                Err(Error::Boundary {
                    side,
                    what: what.into(),
                })
            };
            match self.get(side) {
                BoundaryKind::SubcriticalOutlet { height }
                    if !(height > 0.0 && height.is_finite()) =>
                {
                    return bad("outlet height must be positive");
                }
                BoundaryKind::SupercriticalInlet { height, discharge }
                | BoundaryKind::Transcritical { height, discharge }
                    if !(height >= 0.0 && height.is_finite() && discharge.is_finite()) =>
                {
                    return bad("prescribed height must be nonnegative and data finite");
                }
                BoundaryKind::SubcriticalInlet { discharge } if !discharge.is_finite() => {
                    return bad("prescribed discharge must be finite");
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Flow regime realized at a boundary node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Wall,
    SubcriticalInflow,
    SubcriticalOutflow,
    SupercriticalInflow,
    SupercriticalOutflow,
}

/// Pseudo-edge connecting a boundary node with its external state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub node: usize,
    pub side: Side,
    pub c: f64,
    pub external: NodeValue,
    pub regime: Regime,
    pub lambda: f64,
    pub d: f64,
    pub bar: BarState,
}

pub fn classify(internal: &NodeValue, side: Side, g: f64) -> Regime {
    let vn = internal.v * side.normal();
    let c = (g * internal.h.max(0.0)).sqrt();
    if vn >= c {
        Regime::SupercriticalOutflow
    } else if vn <= -c {
        Regime::SupercriticalInflow
    } else if vn < 0.0 {
        Regime::SubcriticalInflow
    } else {
        Regime::SubcriticalOutflow
    }
}

/// External state for the boundary node `internal`. The external state
/// carries the node's bathymetry.
pub fn external_state(
    internal: &NodeValue,
    kind: BoundaryKind,
    side: Side,
    g: f64,
) -> Result<(NodeValue, Regime)> {
    let with = |h: f64, hv: f64| NodeValue::plain(Conserved::new(h, hv), internal.b);
    let (ext, regime) = match kind {
        BoundaryKind::Wall => (
            NodeValue::new(
                Conserved::new(internal.h, -internal.hv),
                -internal.v,
                internal.b,
            ),
            Regime::Wall,
        ),
        BoundaryKind::SubcriticalInlet { discharge } => {
            (with(internal.h, discharge), Regime::SubcriticalInflow)
        }
        BoundaryKind::SubcriticalOutlet { height } => {
            (with(height, internal.hv), Regime::SubcriticalOutflow)
        }
        BoundaryKind::SupercriticalInlet { height, discharge } => {
            (with(height, discharge), Regime::SupercriticalInflow)
        }
        BoundaryKind::SupercriticalOutlet => (*internal, Regime::SupercriticalOutflow),
        BoundaryKind::Transcritical { height, discharge } => {
            let regime = classify(internal, side, g);
            let ext = match regime {
                Regime::SupercriticalOutflow | Regime::Wall => *internal,
                Regime::SupercriticalInflow => with(height, discharge),
                Regime::SubcriticalInflow => with(internal.h, discharge),
                Regime::SubcriticalOutflow => with(height, internal.hv),
            };
            (ext, regime)
        }
    };
    if !(ext.h >= 0.0 && ext.h.is_finite() && ext.hv.is_finite()) {
        return Err(Error::Boundary {
            side,
            what: format!("inadmissible external state ({}, {})", ext.h, ext.hv),
        });
    }
    Ok((ext, regime))
}

/// Weak boundary term `(f(u_i) - F̂(u_i, u_e)) · n` of the node's equation,
/// with the Rusanov flux `F̂ n = (f_i + f_e) n / 2 - λ (u_e - u_i) / 2`.
pub fn boundary_flux_contribution(
    internal: &NodeValue,
    external: &NodeValue,
    side: Side,
    g: f64,
    lambda: f64,
) -> Conserved {
    let n = side.normal();
    let (f_i, f_e) = (internal.flux(g), external.flux(g));
    let (u_i, u_e) = (internal.conserved(), external.conserved());
    let numerical = (0.5 * n) * (f_i + f_e) - (0.5 * lambda) * (u_e - u_i);
    n * f_i - numerical
}
