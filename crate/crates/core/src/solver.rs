//! Assembly of the semi-discrete right-hand side for the three schemes and
//! the adaptive explicit time loop.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::{external_state, BoundaryEdge, BoundarySpec, Side};
pub use crate::entropy_stability::TadmorFix;
use crate::entropy_stability::{
    enforce_low_order_entropy, entropy, entropy_inequality_residual, entropy_limiter_all,
    residual_scale, EnforcementStats, EntropyEdge,
};
use crate::error::{Error, Result};
use crate::fem_core::{Bathymetry, Mesh1D};
use crate::low_order::{low_order_rhs, EdgeCoefficients, Rhs, WaveSpeed};
use crate::mcl_limiter::{add_fluxes, limit_fluxes, raw_fluxes, LimitedFluxes, RawFluxMode};
use crate::state::{Conserved, NodalState, NodeValue};
use crate::time_integration::{adaptive_dt, cfl_holds, steady_state_residual, TimeConfig};
use crate::wet_dry::{node_values, WetDry, WetDryConfig, WetDryStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Scheme {
    /// Low-order method.
    #[serde(rename = "LOW")]
    Low,
    /// Monolithic convex limiting.
    #[default]
    #[serde(rename = "MCL")]
    Mcl,
    /// Monolithic convex limiting with the semi-discrete entropy fix.
    #[serde(rename = "MCL-SDE")]
    MclSde,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Low, Scheme::Mcl, Scheme::MclSde];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Low => "LOW",
            Scheme::Mcl => "MCL",
            Scheme::MclSde => "MCL-SDE",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "-").as_str() {
            "LOW" => Ok(Scheme::Low),
            "MCL" => Ok(Scheme::Mcl),
            "MCL-SDE" | "MCLSDE" => Ok(Scheme::MclSde),
            _ => Err(Error::Config(format!(
                "unknown scheme '{s}', expected LOW, MCL or MCL-SDE"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub raw_flux_mode: RawFluxMode,
    pub wave_speed: WaveSpeed,
    pub tadmor_fix: TadmorFix,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            ..Self::default()
        }
    }
}

/// Mesh, bathymetry, initial state and boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub mesh: Mesh1D,
    pub bathymetry: Bathymetry,
    pub initial: NodalState,
    pub boundary: BoundarySpec,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        let n = self.mesh.n_nodes();
        if self.initial.len() != n || self.bathymetry.nodal_b.len() != n {
            return Err(Error::Structure(format!(
                "initial state ({}) and bathymetry ({}) must have one value per node ({n})",
                self.initial.len(),
                self.bathymetry.nodal_b.len()
            )));
        }
        if !(self.bathymetry.gravity > 0.0) {
            return Err(Error::Config("gravity must be positive".into()));
        }
        self.boundary.validate()?;
        self.initial.check_admissible(0.0)
    }

    pub fn gravity(&self) -> f64 {
        self.bathymetry.gravity
    }
}

/// Everything computed for one right-hand side evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub nodes: Vec<NodeValue>,
    pub coeffs: EdgeCoefficients,
    /// `m_i du_i/dt`.
    pub rhs: Rhs,
    /// Contribution of the boundary pseudo-edges to `rhs`.
    pub boundary_rhs: Rhs,
    pub limited: Option<LimitedFluxes>,
    pub entropy: Option<Vec<EntropyEdge>>,
    /// Fluxes added to the low-order right-hand side, `β_ij f*_ij`.
    pub flux_h: Vec<f64>,
    pub flux_hv: Vec<f64>,
    pub enforcement: EnforcementStats,
}

impl Assembly {
    pub fn diffusion_sums(&self) -> Vec<f64> {
        self.coeffs.diffusion_sums(self.nodes.len())
    }

    /// Flux-corrected bar states `ū_ij^{b,**}` of all mesh edges (both
    /// orientations) and of the boundary pseudo-edges, each with the weight
    /// `2 d` and the node receiving it.
    pub fn corrected_bar_states(&self) -> Vec<(usize, f64, Conserved)> {
        let mut out = Vec::with_capacity(2 * self.coeffs.edges.len() + 2);
        for (k, e) in self.coeffs.edges.iter().enumerate() {
            let s = |f: f64| if e.d > 0.0 { f / (2.0 * e.d) } else { 0.0 };
            let (fh, fm) = (s(self.flux_h[k]), s(self.flux_hv[k]));
            out.push((
                e.i,
                2.0 * e.d,
                Conserved::new(e.bar_ij.h_b + fh, e.bar_ij.hv_b + fm),
            ));
            out.push((
                e.j,
                2.0 * e.d,
                Conserved::new(e.bar_ji.h_b - fh, e.bar_ji.hv_b - fm),
            ));
        }
        for be in &self.coeffs.boundary {
            out.push((be.node, 2.0 * be.d, be.bar.with_bathymetry()));
        }
        out
    }
}

/// Outcome of one completed time step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub step: usize,
    /// Time after the step.
    pub t: f64,
    pub dt: f64,
    /// Number of times the step was restarted with a halved `Δt`.
    pub repetitions: usize,
    pub d_adjustments: usize,
    /// Normalized steady residual of the state at the start of the step.
    pub residual: f64,
    pub min_height: f64,
    /// Largest entropy inequality residual over nodes divided by its scale,
    /// evaluated at the start of the step when diagnostics are enabled.
    pub entropy_residual: Option<f64>,
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats {
    pub steps: usize,
    pub repetitions: usize,
    pub cfl_repetitions: usize,
    pub positivity_repetitions: usize,
    pub d_adjustments: usize,
    pub alpha_reductions: usize,
    pub unresolved_entropy_violations: usize,
    /// Smallest water height after any accepted stage.
    pub min_stage_height: f64,
    pub max_entropy_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub t: f64,
    pub steps: usize,
    pub steady_converged: bool,
    pub final_residual: f64,
    pub stats: RunStats,
}

/// Water heights below this after a stage trigger a step repetition.
pub const POSITIVITY_TOL: f64 = -1e-14;

enum Retry {
    Cfl,
    Positivity,
}

#[derive(Debug, Clone)]
pub struct Solver {
    problem: Problem,
    scheme: SchemeConfig,
    time: TimeConfig,
    wet_dry: WetDry,
    state: NodalState,
    velocity: Vec<f64>,
    t: f64,
    step: usize,
    max_h0: f64,
    initial_residual: Option<f64>,
    diagnostics: bool,
    checkpoint: Option<f64>,
    stats: RunStats,
}

impl Solver {
    pub fn new(
        problem: Problem,
        scheme: SchemeConfig,
        time: TimeConfig,
        wet_dry: WetDryConfig,
    ) -> Result<Self> {
        problem.validate()?;
        time.validate()?;
        let max_h0 = problem.initial.max_height();
        let wd = WetDry::new(&wet_dry, &problem.mesh, &problem.bathymetry, max_h0)?;
        let mut state = problem.initial.clone();
        let velocity = wd.apply(
            &mut state,
            &problem.mesh,
            &problem.bathymetry,
            None,
            problem.gravity(),
        );
        Ok(Self {
            problem,
            scheme,
            time,
            wet_dry: wd,
            state,
            velocity,
            t: 0.0,
            step: 0,
            max_h0,
            initial_residual: None,
            diagnostics: false,
            checkpoint: None,
            stats: RunStats {
                min_stage_height: f64::INFINITY,
                ..RunStats::default()
            },
        })
    }

    /// Evaluate the entropy inequality residual at every step.
    /// Make steps land exactly on `t` as they would on the end time.
    pub fn set_checkpoint(&mut self, t: Option<f64>) {
        self.checkpoint = t;
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.diagnostics = on;
        self
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.problem.mesh
    }

    pub fn state(&self) -> &NodalState {
        &self.state
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    pub fn stats(&self) -> RunStats {
        self.stats
    }

    pub fn scheme(&self) -> SchemeConfig {
        self.scheme
    }

    pub fn time_config(&self) -> TimeConfig {
        self.time
    }

    pub fn wet_dry(&self) -> &WetDry {
        &self.wet_dry
    }

    fn g(&self) -> f64 {
        self.problem.gravity()
    }

    fn boundary_edges(&self, nodes: &[NodeValue]) -> Result<Vec<BoundaryEdge>> {
        let g = self.g();
        let last = nodes.len() - 1;
        [(Side::Left, 0), (Side::Right, last)]
            .into_iter()
            .map(|(side, node)| {
                let internal = &nodes[node];
                let (ext, regime) =
                    external_state(internal, self.problem.boundary.get(side), side, g)?;
                if ext.h == 0.0 && ext.hv != 0.0 {
                    return Err(Error::Boundary {
                        side,
                        what: format!(
                            "dry external state with discharge {} at node {node}",
                            ext.hv
                        ),
                    });
                }
                BoundaryEdge::new(node, side, internal, ext, regime, g, self.scheme.wave_speed)
            })
            .collect()
    }

    fn dry_tol(&self) -> f64 {
        1e-14 * self.max_h0
    }

    /// Right-hand side for a state with given nodal velocities.
    pub fn assemble(&self, state: &NodalState, velocity: &[f64]) -> Result<Assembly> {
        let g = self.g();
        let mesh = &self.problem.mesh;
        let nodes = node_values(state, velocity, &self.problem.bathymetry.nodal_b);
        let boundary = self.boundary_edges(&nodes)?;
        let mut coeffs =
            EdgeCoefficients::assemble(mesh, &nodes, boundary, g, self.scheme.wave_speed)?;
        let enforcement = enforce_low_order_entropy(
            mesh,
            &nodes,
            &mut coeffs,
            g,
            self.scheme.tadmor_fix,
            self.dry_tol(),
        )?;
        let low = low_order_rhs(&nodes, &coeffs)?;
        let mut boundary_rhs = Rhs::zeros(nodes.len());
        for be in &coeffs.boundary {
            boundary_rhs.h[be.node] += 2.0 * be.d * (be.bar.h_b - nodes[be.node].h);
            boundary_rhs.hv[be.node] += 2.0 * be.d * (be.bar.hv_b - nodes[be.node].hv);
        }
        let m = coeffs.edges.len();
        let (rhs, limited, entropy, flux_h, flux_hv) = match self.scheme.scheme {
            Scheme::Low => (low, None, None, vec![0.0; m], vec![0.0; m]),
            Scheme::Mcl | Scheme::MclSde => {
                let raw = raw_fluxes(
                    &nodes,
                    &coeffs,
                    &low,
                    mesh.lumped_mass(),
                    self.scheme.raw_flux_mode,
                );
                let lim = limit_fluxes(&nodes, &coeffs, &raw, g, self.dry_tol());
                let (fh, fm, ent) = if self.scheme.scheme == Scheme::MclSde {
                    let ent =
                        entropy_limiter_all(&nodes, &coeffs, &lim.f_h_star, &lim.f_hv_star, g);
                    let fh = (0..m).map(|k| ent[k].beta * lim.f_h_star[k]).collect();
                    let fm = (0..m).map(|k| ent[k].beta * lim.f_hv_star[k]).collect();
                    (fh, fm, Some(ent))
                } else {
                    (lim.f_h_star.clone(), lim.f_hv_star.clone(), None)
                };
                let mut rhs = low;
                add_fluxes(&mut rhs, &coeffs, &fh, &fm, None);
                rhs.check_finite()?;
                (rhs, Some(lim), ent, fh, fm)
            }
        };
        Ok(Assembly {
            nodes,
            coeffs,
            rhs,
            boundary_rhs,
            limited,
            entropy,
            flux_h,
            flux_hv,
            enforcement,
        })
    }

    /// Largest normalized entropy inequality residual of an assembly.
    pub fn entropy_residual(&self, a: &Assembly) -> f64 {
        let g = self.g();
        let interior = Rhs {
            h: (0..a.rhs.len())
                .map(|i| a.rhs.h[i] - a.boundary_rhs.h[i])
                .collect(),
            hv: (0..a.rhs.len())
                .map(|i| a.rhs.hv[i] - a.boundary_rhs.hv[i])
                .collect(),
        };
        let res =
            entropy_inequality_residual(&a.nodes, &a.coeffs, &interior, &a.flux_h, &a.flux_hv, g);
        let scale = residual_scale(&a.nodes, &a.coeffs, g).max(f64::MIN_POSITIVE);
        res.into_iter().fold(f64::NEG_INFINITY, f64::max) / scale
    }

    /// Current steady residual, normalized by the residual of the first
    /// step.
    pub fn steady_residual(&self, a: &Assembly) -> f64 {
        let r = steady_state_residual(&a.rhs.h, &a.rhs.hv, self.problem.mesh.lumped_mass());
        match self.initial_residual {
            Some(r0) if r0 > 0.0 => r / r0,
            _ => r,
        }
    }

    /// Entropy bound `η_i^max` of a forward Euler update from `a`.
    fn eta_max_forward_euler(&self, a: &Assembly, dt: f64) -> Vec<f64> {
        let g = self.g();
        let mass = self.problem.mesh.lumped_mass();
        let b = &self.problem.bathymetry.nodal_b;
        let mut weight = vec![0.0; a.nodes.len()];
        let mut acc = vec![0.0; a.nodes.len()];
        for (node, w, u) in a.corrected_bar_states() {
            weight[node] += w;
            acc[node] += w * entropy(&NodeValue::plain(u, b[node]), g);
        }
        (0..a.nodes.len())
            .map(|i| {
                let lam = dt / mass[i];
                (1.0 - lam * weight[i]) * entropy(&a.nodes[i], g) + lam * acc[i]
            })
            .collect()
    }

    fn try_step(
        &self,
        first: &Assembly,
        dt: f64,
    ) -> std::result::Result<Result<(NodalState, Vec<f64>, f64, usize)>, Retry> {
        let mass = self.problem.mesh.lumped_mass();
        let weights = self.time.rk_order.stage_weights();
        let entropy_fix = self.wet_dry.strategy == WetDryStrategy::EntropyBased;
        let eta0: Vec<f64> = if entropy_fix {
            first.nodes.iter().map(|n| entropy(n, self.g())).collect()
        } else {
            Vec::new()
        };
        let mut prev = self.state.clone();
        let mut prev_v = self.velocity.clone();
        let mut min_h = f64::INFINITY;
        let mut d_adjustments = first.enforcement.d_adjustments;
        for (k, &a) in weights.iter().enumerate() {
            let owned;
            let asm = if k == 0 {
                first
            } else {
                owned = match self.assemble(&prev, &prev_v) {
                    Ok(x) => x,
                    Err(e) => return Ok(Err(e)),
                };
                if !cfl_holds(mass, &owned.diffusion_sums(), dt) {
                    return Err(Retry::Cfl);
                }
                d_adjustments += owned.enforcement.d_adjustments;
                &owned
            };
            let mut next = prev.clone();
            for i in 0..next.len() {
                let fe_h = prev.h[i] + dt * asm.rhs.h[i] / mass[i];
                let fe_hv = prev.hv[i] + dt * asm.rhs.hv[i] / mass[i];
                next.h[i] = a * self.state.h[i] + (1.0 - a) * fe_h;
                next.hv[i] = a * self.state.hv[i] + (1.0 - a) * fe_hv;
            }
            let stage_min = next.min_height();
            if stage_min < POSITIVITY_TOL || !stage_min.is_finite() {
                return Err(Retry::Positivity);
            }
            min_h = min_h.min(stage_min);
            for h in next.h.iter_mut() {
                if *h < 0.0 {
                    *h = 0.0;
                }
            }
            let eta_max = entropy_fix.then(|| {
                let fe = self.eta_max_forward_euler(asm, dt);
                (0..fe.len())
                    .map(|i| a * eta0[i] + (1.0 - a) * fe[i])
                    .collect::<Vec<_>>()
            });
            prev_v = self.wet_dry.apply(
                &mut next,
                &self.problem.mesh,
                &self.problem.bathymetry,
                eta_max.as_deref(),
                self.g(),
            );
            prev = next;
        }
        Ok(Ok((prev, prev_v, min_h, d_adjustments)))
    }

    /// Advance by one adaptive step.
    pub fn step(&mut self) -> Result<StepReport> {
        let first = self.assemble(&self.state, &self.velocity)?;
        if self.initial_residual.is_none() {
            self.initial_residual = Some(steady_state_residual(
                &first.rhs.h,
                &first.rhs.hv,
                self.problem.mesh.lumped_mass(),
            ));
        }
        let residual = self.steady_residual(&first);
        let entropy_residual = self.diagnostics.then(|| self.entropy_residual(&first));
        let mut dt = adaptive_dt(
            self.problem.mesh.lumped_mass(),
            &first.diffusion_sums(),
            self.time.nu,
        );
        let target = [self.time.t_end, self.checkpoint.filter(|&c| c > self.t)]
            .into_iter()
            .flatten()
            .reduce(f64::min);
        if let Some(target) = target {
            dt = dt.min(target - self.t);
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::StepFailure {
                t: self.t,
                step: self.step,
                what: format!("no admissible time step (dt = {dt})"),
            });
        }
        let mut repetitions = 0;
        loop {
            match self.try_step(&first, dt) {
                Ok(done) => {
                    let (state, velocity, min_h, d_adj) = done?;
                    self.state = state;
                    self.velocity = velocity;
                    self.t = match target {
                        Some(target) if target - (self.t + dt) <= 1e-14 * target.abs() => target,
                        _ => self.t + dt,
                    };
                    self.step += 1;
                    let s = &mut self.stats;
                    s.steps += 1;
                    s.repetitions += repetitions;
                    s.d_adjustments += d_adj;
                    s.alpha_reductions += first.enforcement.alpha_reductions;
                    s.unresolved_entropy_violations += first.enforcement.unresolved;
                    s.min_stage_height = s.min_stage_height.min(min_h);
                    if let Some(er) = entropy_residual {
                        s.max_entropy_residual =
                            Some(s.max_entropy_residual.map_or(er, |m: f64| m.max(er)));
                    }
                    return Ok(StepReport {
                        step: self.step,
                        t: self.t,
                        dt,
                        repetitions,
                        d_adjustments: d_adj,
                        residual,
                        min_height: min_h,
                        entropy_residual,
                    });
                }
                Err(reason) => {
                    match reason {
                        Retry::Cfl => self.stats.cfl_repetitions += 1,
                        Retry::Positivity => self.stats.positivity_repetitions += 1,
                    }
                    repetitions += 1;
                    if repetitions > self.time.max_halvings {
                        return Err(Error::StepFailure {
                            t: self.t,
                            step: self.step,
                            what: format!(
                                "step rejected {} times (last reason: {})",
                                repetitions,
                                match reason {
                                    Retry::Cfl => "CFL condition violated in a later stage",
                                    Retry::Positivity => "negative water height",
                                }
                            ),
                        });
                    }
                    dt *= 0.5;
                }
            }
        }
    }

    /// Run until the end time or steady state, calling `observe` after every
    /// step. Returns once `max_steps` is reached even without convergence.
    pub fn run(&mut self, mut observe: impl FnMut(&Solver, &StepReport)) -> Result<RunSummary> {
        let mut last_residual = f64::INFINITY;
        loop {
            if let Some(t_end) = self.time.t_end {
                if self.t >= t_end {
                    break;
                }
            }
            if self.step >= self.time.max_steps {
                break;
            }
            let report = self.step()?;
            last_residual = report.residual;
            observe(self, &report);
            if let Some(tol) = self.time.steady_tol {
                if report.residual < tol {
                    return Ok(self.summary(true, last_residual));
                }
            }
        }
        let converged = match self.time.steady_tol {
            Some(tol) => {
                let a = self.assemble(&self.state, &self.velocity)?;
                last_residual = self.steady_residual(&a);
                last_residual < tol
            }
            None => false,
        };
        Ok(self.summary(converged, last_residual))
    }

    fn summary(&self, steady_converged: bool, final_residual: f64) -> RunSummary {
        RunSummary {
            t: self.t,
            steps: self.step,
            steady_converged,
            final_residual,
            stats: self.stats,
        }
    }
}
