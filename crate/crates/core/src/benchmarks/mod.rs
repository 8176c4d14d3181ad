//! Benchmark registry, exact and reference solutions, error norms.

pub mod exact;
pub mod steady;

use std::fmt;
use std::sync::Arc;

use crate::boundary::{BoundaryKind, BoundarySpec};
use crate::error::{Error, Result};
use crate::fem_core::{build_uniform_mesh, interpolate_bathymetry, Mesh1D};
use crate::mcl_limiter::RawFluxMode;
use crate::solver::{Problem, Scheme, SchemeConfig, Solver};
use crate::state::{Conserved, NodalState};
use crate::time_integration::TimeConfig;
use crate::wet_dry::{WetDryConfig, WetDryStrategy};

use self::exact::{
    exact_dry_dam_break, step, thacker_state, wet_dam_break_evaluator, ThackerParams,
};
use self::steady::{bump, SteadyCase, SteadyReference};

/// Exact solution `u(x, t)`.
pub type Evaluator = Arc<dyn Fn(f64, f64) -> Conserved + Send + Sync>;

#[derive(Clone)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub description: &'static str,
    pub domain: (f64, f64),
    pub g: f64,
    pub bathymetry: fn(f64) -> f64,
    /// Initial height and discharge at `x`.
    pub initial: Arc<dyn Fn(f64) -> Conserved + Send + Sync>,
    pub boundary: BoundarySpec,
    pub t_end: Option<f64>,
    pub steady_tol: Option<f64>,
    pub exact: Option<Evaluator>,
    pub elements: usize,
    pub nu: f64,
    pub wet_dry: WetDryStrategy,
    pub raw_flux_mode: RawFluxMode,
}

impl fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("g", &self.g)
            .field("boundary", &self.boundary)
            .field("t_end", &self.t_end)
            .field("steady_tol", &self.steady_tol)
            .field("elements", &self.elements)
            .field("nu", &self.nu)
            .field("wet_dry", &self.wet_dry)
            .field("raw_flux_mode", &self.raw_flux_mode)
            .finish_non_exhaustive()
    }
}

impl BenchmarkCase {
    pub fn mesh(&self, elements: usize) -> Result<Mesh1D> {
        build_uniform_mesh(self.domain.0, self.domain.1, elements)
    }

    pub fn problem(&self, elements: usize) -> Result<Problem> {
        let mesh = self.mesh(elements)?;
        let bathymetry = interpolate_bathymetry(self.bathymetry, &mesh, self.g)?;
        let initial = NodalState::from_fn(mesh.nodes(), |x| (self.initial)(x));
        Ok(Problem {
            mesh,
            bathymetry,
            initial,
            boundary: self.boundary,
        })
    }

    pub fn time_config(&self) -> TimeConfig {
        TimeConfig {
            t_end: self.t_end,
            steady_tol: self.steady_tol,
            nu: self.nu,
            max_steps: if self.steady_tol.is_some() {
                2_000_000
            } else {
                TimeConfig::default().max_steps
            },
            ..TimeConfig::default()
        }
    }

    pub fn scheme_config(&self, scheme: Scheme) -> SchemeConfig {
        SchemeConfig {
            scheme,
            raw_flux_mode: self.raw_flux_mode,
            ..SchemeConfig::default()
        }
    }

    pub fn wet_dry_config(&self) -> WetDryConfig {
        WetDryConfig::with_strategy(self.wet_dry)
    }

    /// Solver with the benchmark's default settings.
    pub fn solver(&self, scheme: Scheme, elements: usize) -> Result<Solver> {
        Solver::new(
            self.problem(elements)?,
            self.scheme_config(scheme),
            self.time_config(),
            self.wet_dry_config(),
        )
    }

    pub fn exact_state(&self, x: f64, t: f64) -> Option<Conserved> {
        self.exact.as_ref().map(|f| f(x, t))
    }
}

pub const NAMES: [&str; 10] = [
    "lake-at-rest",
    "lake-at-rest-exact",
    "subcritical",
    "transcritical-smooth",
    "transcritical-shock",
    "supercritical",
    "wet-dam-break",
    "dry-dam-break",
    "dam-break-bump",
    "thacker",
];

fn lake_bump(x: f64) -> f64 {
    (0.25 - 5.0 * (x - 0.5).powi(2)).max(0.0)
}

/// Piecewise linear ridge with its shorelines at `x = 3/8` (`H = 0.2`) and
/// `x = 5/8` (`H = 0.1`), so both fall on nodes when the element count is a
/// multiple of eight.
fn lake_ridge(x: f64) -> f64 {
    if x <= 0.5 {
        (0.25 - 0.4 * (0.5 - x)).max(0.0)
    } else {
        (0.25 - 1.2 * (x - 0.5)).max(0.0)
    }
}

fn lake_level(x: f64) -> f64 {
    if x < 0.5 {
        0.2
    } else {
        0.1
    }
}

fn dam_break_bump(x: f64) -> f64 {
    if (x - 10.0).abs() < 2.0 {
        (0.25 * std::f64::consts::PI * x).sin()
    } else {
        0.0
    }
}

fn thacker_bottom(x: f64) -> f64 {
    ThackerParams::default().bathymetry(x)
}

fn steady_case(name: &'static str, case: SteadyCase) -> Result<BenchmarkCase> {
    let r = SteadyReference::new(case)?;
    let (h0, hv0, boundary, t_end, steady_tol, description) = match case {
        SteadyCase::Subcritical => (
            2.0,
            0.0,
            BoundarySpec {
                left: BoundaryKind::SubcriticalInlet { discharge: 4.42 },
                right: BoundaryKind::SubcriticalOutlet { height: 2.0 },
            },
            Some(400.0),
            None,
            "subcritical flow over a bump",
        ),
        SteadyCase::TranscriticalSmooth => (
            0.66,
            0.0,
            BoundarySpec {
                left: BoundaryKind::SubcriticalInlet { discharge: 1.53 },
                right: BoundaryKind::Transcritical {
                    height: 0.66,
                    discharge: 1.53,
                },
            },
            Some(200.0),
            None,
            "transcritical flow over a bump without shock",
        ),
        SteadyCase::TranscriticalShock => (
            0.33,
            0.0,
            BoundarySpec {
                left: BoundaryKind::SubcriticalInlet { discharge: 0.18 },
                right: BoundaryKind::SubcriticalOutlet { height: 0.33 },
            },
            Some(800.0),
            None,
            "transcritical flow over a bump with a hydraulic jump",
        ),
        SteadyCase::Supercritical => (
            1.0,
            2.1,
            BoundarySpec {
                left: BoundaryKind::SupercriticalInlet {
                    height: 1.0,
                    discharge: 2.1,
                },
                right: BoundaryKind::SupercriticalOutlet,
            },
            None,
            Some(1e-12),
            "supercritical flow over a bump",
        ),
    };
    Ok(BenchmarkCase {
        name,
        description,
        domain: (0.0, 25.0),
        g: r.g,
        bathymetry: bump,
        initial: Arc::new(move |_| Conserved::new(h0, hv0)),
        boundary,
        t_end,
        steady_tol,
        exact: Some(Arc::new(move |x, _| {
            r.state(x).unwrap_or(Conserved::new(f64::NAN, f64::NAN))
        })),
        elements: 128,
        nu: 0.5,
        wet_dry: WetDryStrategy::None,
        raw_flux_mode: RawFluxMode::Simple,
    })
}

/// Look up a benchmark by name.
pub fn benchmark(name: &str) -> Result<BenchmarkCase> {
    let walls = BoundarySpec::walls();
    let case = match name {
        "lake-at-rest" | "lake-at-rest-exact" => {
            let exact_variant = name == "lake-at-rest-exact";
            let b: fn(f64) -> f64 = if exact_variant { lake_ridge } else { lake_bump };
            let init = move |x: f64| Conserved::new((lake_level(x) - b(x)).max(0.0), 0.0);
            BenchmarkCase {
                name: if exact_variant {
                    "lake-at-rest-exact"
                } else {
                    "lake-at-rest"
                },
                description: if exact_variant {
                    "two lakes at rest with shorelines on mesh nodes"
                } else {
                    "two lakes at rest separated by a bump, shorelines between nodes"
                },
                domain: (0.0, 1.0),
                g: 1.0,
                bathymetry: b,
                initial: Arc::new(init),
                boundary: walls,
                t_end: Some(100.0),
                steady_tol: None,
                exact: Some(Arc::new(move |x, _| init(x))),
                elements: 128,
                nu: 0.5,
                wet_dry: WetDryStrategy::FrictionBoundaryLayer,
                raw_flux_mode: RawFluxMode::Simple,
            }
        }
        "subcritical" => steady_case("subcritical", SteadyCase::Subcritical)?,
        "transcritical-smooth" => {
            steady_case("transcritical-smooth", SteadyCase::TranscriticalSmooth)?
        }
        "transcritical-shock" => {
            steady_case("transcritical-shock", SteadyCase::TranscriticalShock)?
        }
        "supercritical" => steady_case("supercritical", SteadyCase::Supercritical)?,
        "wet-dam-break" => {
            let ex = wet_dam_break_evaluator(1.0, 0.1, 0.5, 1.0)?;
            BenchmarkCase {
                name: "wet-dam-break",
                description: "dam break over a flat bottom, h_L = 1, h_R = 0.1",
                domain: (0.0, 1.0),
                g: 1.0,
                bathymetry: |_| 0.0,
                initial: Arc::new(|x| Conserved::new(step(x, 0.5, 1.0, 0.1), 0.0)),
                boundary: walls,
                t_end: Some(0.3),
                steady_tol: None,
                exact: Some(Arc::new(ex)),
                elements: 128,
                nu: 0.5,
                wet_dry: WetDryStrategy::None,
                raw_flux_mode: RawFluxMode::Full,
            }
        }
        "dry-dam-break" => BenchmarkCase {
            name: "dry-dam-break",
            description: "dam break into a dry region over a flat bottom",
            domain: (0.0, 1.0),
            g: 1.0,
            bathymetry: |_| 0.0,
            initial: Arc::new(|x| Conserved::new(step(x, 0.5, 1.0, 0.0), 0.0)),
            boundary: walls,
            t_end: Some(0.15),
            steady_tol: None,
            exact: Some(Arc::new(|x, t| exact_dry_dam_break(x, t, 1.0, 0.5, 1.0))),
            elements: 128,
            nu: 0.5,
            wet_dry: WetDryStrategy::FrictionBoundaryLayer,
            raw_flux_mode: RawFluxMode::Full,
        },
        "dam-break-bump" => BenchmarkCase {
            name: "dam-break-bump",
            description: "dam break over a sinusoidal bump",
            domain: (0.0, 20.0),
            g: 1.0,
            bathymetry: dam_break_bump,
            initial: Arc::new(|x| {
                Conserved::new(step(x, 10.0, 1.6, 1.05) - dam_break_bump(x), 0.0)
            }),
            boundary: walls,
            t_end: Some(4.5),
            steady_tol: None,
            exact: None,
            elements: 400,
            nu: 0.5,
            wet_dry: WetDryStrategy::FrictionBoundaryLayer,
            raw_flux_mode: RawFluxMode::Full,
        },
        "thacker" => {
            let p = ThackerParams::default();
            BenchmarkCase {
                name: "thacker",
                description: "oscillating lake in a parabolic basin",
                domain: (-5000.0, 5000.0),
                g: p.g,
                bathymetry: thacker_bottom,
                initial: Arc::new(move |x| thacker_state(x, 0.0, &p)),
                boundary: walls,
                t_end: Some(3000.0),
                steady_tol: None,
                exact: Some(Arc::new(move |x, t| thacker_state(x, t, &p))),
                elements: 128,
                nu: 0.05,
                wet_dry: WetDryStrategy::FrictionBoundaryLayer,
                raw_flux_mode: RawFluxMode::Full,
            }
        }
        _ => {
            return Err(Error::Benchmark(format!(
                "unknown benchmark '{name}', available: {}",
                NAMES.join(", ")
            )));
        }
    };
    Ok(case)
}

pub fn all() -> Result<Vec<BenchmarkCase>> {
    NAMES.iter().map(|n| benchmark(n)).collect()
}

/// Numerical reference for the dam break over a bump: the low-order scheme
/// on a fine mesh, returned as a nodal state on that mesh.
pub fn dam_break_bump_reference(elements: usize) -> Result<(Mesh1D, NodalState)> {
    let case = benchmark("dam-break-bump")?;
    let mut solver = case.solver(Scheme::Low, elements)?;
    solver.run(|_, _| {})?;
    Ok((solver.mesh().clone(), solver.state().clone()))
}

/// `∫ |e_h|` of the piecewise linear interpolant of nodal values `e`.
pub fn l1_norm_p1(mesh: &Mesh1D, e: &[f64]) -> f64 {
    mesh.element_lengths()
        .iter()
        .enumerate()
        .map(|(k, &dx)| {
            let (a, b) = (e[k], e[k + 1]);
            if a * b >= 0.0 {
                0.5 * dx * (a.abs() + b.abs())
            } else {
                0.5 * dx * (a * a + b * b) / (a.abs() + b.abs())
            }
        })
        .sum()
}

/// L1 errors of height, discharge and free surface against the nodal
/// interpolant of an exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Error {
    pub h: f64,
    pub hv: f64,
    pub free_surface: f64,
}

pub fn l1_error(state: &NodalState, exact: impl Fn(f64) -> Conserved, mesh: &Mesh1D) -> L1Error {
    let n = mesh.n_nodes();
    let mut eh = Vec::with_capacity(n);
    let mut ehv = Vec::with_capacity(n);
    for (i, &x) in mesh.nodes().iter().enumerate() {
        let u = exact(x);
        eh.push(state.h[i] - u.h);
        ehv.push(state.hv[i] - u.hv);
    }
    L1Error {
        h: l1_norm_p1(mesh, &eh),
        hv: l1_norm_p1(mesh, &ehv),
        // With the bottom interpolated at the nodes, H - H_exact = h - h_exact.
        free_surface: l1_norm_p1(mesh, &eh),
    }
}

impl L1Error {
    /// `‖e_h‖ + ‖e_hv‖`, the quantity reported in convergence tables.
    pub fn combined(&self) -> f64 {
        self.h + self.hv
    }
}

/// Samples per element used by [`l1_error_quadrature`].
pub const QUADRATURE_SAMPLES: usize = 400;

/// L1 errors of the piecewise linear solution against the exact function
/// itself, by a composite midpoint rule on every element. Unlike
/// [`l1_error`] this sees discontinuities inside elements.
pub fn l1_error_quadrature(
    state: &NodalState,
    exact: impl Fn(f64) -> Conserved,
    mesh: &Mesh1D,
    samples: usize,
) -> L1Error {
    let x = mesh.nodes();
    let samples = samples.max(1);
    let (mut eh, mut ehv) = (0.0, 0.0);
    for k in 0..mesh.n_elements() {
        let dx = x[k + 1] - x[k];
        let w = dx / samples as f64;
        for j in 0..samples {
            let t = (j as f64 + 0.5) / samples as f64;
            let u = exact(x[k] + t * dx);
            let h = state.h[k] * (1.0 - t) + state.h[k + 1] * t;
            let hv = state.hv[k] * (1.0 - t) + state.hv[k + 1] * t;
            eh += w * (h - u.h).abs();
            ehv += w * (hv - u.hv).abs();
        }
    }
    L1Error {
        h: eh,
        hv: ehv,
        free_surface: eh,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EocRow {
    pub elements: usize,
    /// `1/h` on the unit domain, otherwise elements per unit length.
    pub inv_h: f64,
    pub error: f64,
    /// Undefined for the first row and whenever an error is zero.
    pub eoc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<EocRow>,
}

impl ErrorReport {
    pub fn eocs(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.eoc).collect()
    }
}

/// EOC table for errors on meshes that are refined by a factor of two.
pub fn eoc(domain_length: f64, errors: &[(usize, f64)]) -> Result<ErrorReport> {
    for w in errors.windows(2) {
        if w[1].0 != 2 * w[0].0 {
            return Err(Error::Benchmark(format!(
                "EOC undefined: mesh sequence {} -> {} is not a refinement by two",
                w[0].0, w[1].0
            )));
        }
    }
    let rows = errors
        .iter()
        .enumerate()
        .map(|(k, &(n, e))| {
            let eoc = if k == 0 {
                None
            } else {
                let prev = errors[k - 1].1;
                (prev > 0.0 && e > 0.0).then(|| (prev / e).log2())
            };
            EocRow {
                elements: n,
                inv_h: n as f64 / domain_length,
                error: e,
                eoc,
            }
        })
        .collect();
    Ok(ErrorReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn registry_is_complete() {
        for name in NAMES {
            let case = benchmark(name).unwrap();
            assert_eq!(case.name, name);
            let p = case.problem(64).unwrap();
            p.validate().unwrap();
            case.time_config().validate().unwrap();
        }
        assert!(matches!(benchmark("tsunami"), Err(Error::Benchmark(_))));
    }

    #[test]
    fn exact_solutions_reproduce_initial_data() {
        for name in [
            "lake-at-rest",
            "lake-at-rest-exact",
            "wet-dam-break",
            "dry-dam-break",
            "thacker",
        ] {
            let case = benchmark(name).unwrap();
            let ex = case.exact.clone().unwrap();
            for &x in case.mesh(256).unwrap().nodes() {
                let (u0, ue) = ((case.initial)(x), ex(x, 0.0));
                assert!(
                    (u0.h - ue.h).abs() < 1e-13 && (u0.hv - ue.hv).abs() < 1e-13,
                    "{name} at {x}"
                );
            }
        }
    }

    #[test]
    fn exact_lake_satisfies_discrete_well_balancing_condition() {
        let case = benchmark("lake-at-rest-exact").unwrap();
        for n in [64, 128, 256] {
            let p = case.problem(n).unwrap();
            let b = &p.bathymetry.nodal_b;
            for k in 0..n {
                let (hi, hj) = (p.initial.h[k], p.initial.h[k + 1]);
                let same_level = (hi + b[k] - hj - b[k + 1]).abs() < 1e-15;
                assert!(
                    (hi == 0.0 && hj == 0.0) || same_level,
                    "n = {n}, element {k}"
                );
            }
        }
        // The non-aligned variant violates it somewhere.
        let p = benchmark("lake-at-rest").unwrap().problem(128).unwrap();
        let b = &p.bathymetry.nodal_b;
        let violated = (0..128).any(|k| {
            let (hi, hj) = (p.initial.h[k], p.initial.h[k + 1]);
            !(hi == 0.0 && hj == 0.0) && (hi + b[k] - hj - b[k + 1]).abs() > 1e-12
        });
        assert!(violated);
    }

    #[test]
    fn l1_of_exact_interpolant_is_zero() {
        let case = benchmark("wet-dam-break").unwrap();
        let mesh = case.mesh(64).unwrap();
        let ex = case.exact.clone().unwrap();
        let state = NodalState::from_fn(mesh.nodes(), |x| ex(x, 0.3));
        let e = l1_error(&state, |x| ex(x, 0.3), &mesh);
        assert_eq!(e.h, 0.0);
        assert_eq!(e.hv, 0.0);
        let report = eoc(1.0, &[(32, 0.0), (64, 0.0)]).unwrap();
        assert_eq!(report.eocs(), vec![None, None]);
    }

    #[test]
    fn l1_norm_is_exact_for_linear_functions() {
        let mesh = build_uniform_mesh(0.0, 1.0, 2).unwrap();
        // ∫_0^1 |2x - 1| dx = 1/2 and ∫_0^1 |x + 1| dx = 3/2.
        assert_relative_eq!(l1_norm_p1(&mesh, &[-1.0, 0.0, 1.0]), 0.5, epsilon = 1e-15);
        assert_relative_eq!(l1_norm_p1(&mesh, &[1.0, 1.5, 2.0]), 1.5, epsilon = 1e-15);
        // A sign change inside an element: ∫_0^1/2 |4x - 1| dx = 1/4.
        assert_relative_eq!(
            l1_norm_p1(&mesh, &[-1.0, 1.0, 1.0]),
            0.25 + 0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn quadrature_error_sees_jumps_inside_elements() {
        let mesh = build_uniform_mesh(0.0, 1.0, 2).unwrap();
        let state = NodalState::from_fn(mesh.nodes(), |_| Conserved::new(0.0, 0.0));
        let exact = |x: f64| {
            if 0.1 < x && x < 0.35 {
                Conserved::new(1.0, -2.0)
            } else {
                Conserved::new(0.0, 0.0)
            }
        };
        // The nodal interpolant misses the jump entirely.
        assert_eq!(l1_error(&state, exact, &mesh).h, 0.0);
        let e = l1_error_quadrature(&state, exact, &mesh, QUADRATURE_SAMPLES);
        assert_relative_eq!(e.h, 0.25, epsilon = 1e-14);
        assert_relative_eq!(e.hv, 0.5, epsilon = 1e-14);
        assert_relative_eq!(e.combined(), 0.75, epsilon = 1e-14);
    }

    #[test]
    fn eoc_table() {
        let r = eoc(1.0, &[(32, 4.0), (64, 2.0), (128, 0.5)]).unwrap();
        assert_eq!(r.eocs(), vec![None, Some(1.0), Some(2.0)]);
        assert_eq!(r.rows[1].inv_h, 64.0);
        assert!(eoc(1.0, &[(32, 1.0), (96, 0.5)]).is_err());
    }
}
