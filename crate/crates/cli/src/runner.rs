use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;

use swe_afc::benchmarks::{
    self, l1_error_quadrature, BenchmarkCase, Evaluator, L1Error, QUADRATURE_SAMPLES,
};
use swe_afc::solver::RunStats;
use swe_afc::{
    build_uniform_mesh, interpolate_bathymetry, Bathymetry, Conserved, NodalState, Problem,
    RawFluxMode, Scheme, SchemeConfig, Solver, TimeConfig, WetDryConfig,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::expr::Expr;

/// Everything needed to start one solver.
pub struct Setup {
    pub problem: Problem,
    pub scheme: SchemeConfig,
    pub time: TimeConfig,
    pub wet_dry: WetDryConfig,
    pub exact: Option<Evaluator>,
}

impl RunConfig {
    pub fn resolutions(&self) -> Result<Vec<usize>, CliError> {
        if !self.elements.is_empty() {
            return Ok(self.elements.clone());
        }
        match self.benchmark_case()? {
            Some(c) => Ok(vec![c.elements]),
            None => Err(CliError::config("elements", "no mesh resolution given")),
        }
    }

    pub fn setup(&self, scheme: Scheme, elements: usize) -> Result<Setup, CliError> {
        self.validate()?;
        let case = self.benchmark_case()?;
        let (t_end, steady_tol) = self.end_condition(case.as_ref());
        let (mut problem, mut time, wet_dry, raw_flux_mode, exact) = match &case {
            Some(c) => {
                let p = c
                    .problem(elements)
                    .map_err(|e| CliError::solver("mesh", e))?;
                (
                    p,
                    c.time_config(),
                    c.wet_dry_config(),
                    c.raw_flux_mode,
                    c.exact.clone(),
                )
            }
            None => (
                self.custom_problem(elements)?,
                TimeConfig::default(),
                WetDryConfig::default(),
                if steady_tol.is_some() {
                    RawFluxMode::Simple
                } else {
                    RawFluxMode::Full
                },
                None,
            ),
        };
        if let Some(b) = self.boundary {
            problem.boundary = b;
        }
        time.t_end = t_end;
        time.steady_tol = steady_tol;
        let t = &self.time;
        if let Some(k) = t.rk_order {
            time.rk_order = k;
        }
        if let Some(nu) = t.nu {
            time.nu = nu;
        }
        if let Some(m) = t.max_steps {
            time.max_steps = m;
        } else if steady_tol.is_some() {
            time.max_steps = time.max_steps.max(2_000_000);
        }
        if let Some(m) = t.max_halvings {
            time.max_halvings = m;
        }
        time.validate().map_err(|e| CliError::solver("time", e))?;
        Ok(Setup {
            problem,
            scheme: SchemeConfig {
                scheme,
                raw_flux_mode: self.raw_flux_mode.unwrap_or(raw_flux_mode),
                wave_speed: self.wave_speed,
                tadmor_fix: self.tadmor_fix,
            },
            time,
            wet_dry: self.wet_dry.unwrap_or(wet_dry),
            exact,
        })
    }

    fn custom_problem(&self, elements: usize) -> Result<Problem, CliError> {
        let p = self.problem.as_ref().expect("validated");
        let mesh = build_uniform_mesh(p.domain[0], p.domain[1], elements)
            .map_err(|e| CliError::solver("problem.domain", e))?;
        let parse = |field: &str, text: &str| {
            let e = Expr::parse(text).map_err(|m| CliError::config(field, m))?;
            e.sample(mesh.nodes())
                .map_err(|m| CliError::config(field, m))
        };
        let b = parse("problem.bathymetry", &p.bathymetry)?;
        let h = parse("problem.h", &p.h)?;
        let hv = parse("problem.hv", &p.hv)?;
        let bathymetry = interpolate_bathymetry(|_| 0.0, &mesh, p.g)
            .map(|flat| Bathymetry { nodal_b: b, ..flat })
            .map_err(|e| CliError::solver("problem.g", e))?;
        let initial = NodalState::new(h, hv).map_err(|e| CliError::solver("problem.h", e))?;
        Ok(Problem {
            mesh,
            bathymetry,
            initial,
            boundary: self.boundary.unwrap_or_else(swe_afc::BoundarySpec::walls),
        })
    }
}

/// Column layout of solution snapshots.
pub const SOLUTION_COLUMNS: &str = "x,h,hv,v,b,H";
/// Column layout of the per-step diagnostics.
pub const DIAGNOSTICS_COLUMNS: &str =
    "step,t,dt,mass,steady_residual,repetitions,d_adjustments,min_height,entropy_residual";

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub scheme: Scheme,
    pub elements: usize,
    pub t: f64,
    pub steps: usize,
    pub steady_converged: Option<bool>,
    pub final_residual: f64,
    pub stats: RunStats,
    /// Against the exact solution at the final time, when one is known.
    pub error: Option<L1Error>,
    pub solutions: Vec<PathBuf>,
    pub diagnostics: PathBuf,
}

impl fmt::Display for RunRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={}: t={} after {} steps, {} repetitions, {} d-adjustments, residual {:.3e}",
            self.scheme,
            self.elements,
            self.t,
            self.steps,
            self.stats.repetitions,
            self.stats.d_adjustments,
            self.final_residual
        )?;
        if let Some(c) = self.steady_converged {
            write!(f, ", {}", if c { "converged" } else { "not converged" })?;
        }
        if let Some(e) = self.stats.max_entropy_residual {
            write!(f, ", max entropy residual {e:.3e}")?;
        }
        if let Some(e) = &self.error {
            write!(f, ", L1 error h {:.4e} hv {:.4e}", e.h, e.hv)?;
        }
        Ok(())
    }
}

fn slug(scheme: Scheme) -> String {
    scheme.name().to_ascii_lowercase()
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn snapshot(header: &str, solver: &Solver) -> String {
    let mut s = String::from(header);
    let _ = writeln!(s, "#@ t = {}, step = {}", solver.time(), solver.steps());
    s.push_str(SOLUTION_COLUMNS);
    s.push('\n');
    let st = solver.state();
    let b = &solver.problem().bathymetry.nodal_b;
    let v = solver.velocity();
    for (i, x) in solver.mesh().nodes().iter().enumerate() {
        let _ = writeln!(
            s,
            "{x},{},{},{},{},{}",
            st.h[i],
            st.hv[i],
            v[i],
            b[i],
            st.h[i] + b[i]
        );
    }
    s
}

fn mass(solver: &Solver) -> f64 {
    let m = solver.mesh().lumped_mass();
    solver.state().h.iter().zip(m).map(|(h, m)| h * m).sum()
}

fn execute(
    config: &RunConfig,
    header: &str,
    scheme: Scheme,
    elements: usize,
) -> Result<RunRecord, CliError> {
    let setup = config.setup(scheme, elements)?;
    let context = format!("{scheme} with {elements} elements");
    let dir = &config.output.dir;
    let prefix = format!("{}-n{elements}", slug(scheme));
    let diagnostics = dir.join(format!("{prefix}-diagnostics.csv"));
    let time = setup.time;
    let mut solver = Solver::new(setup.problem, setup.scheme, setup.time, setup.wet_dry)
        .map_err(|e| CliError::solver(&context, e))?
        .with_diagnostics(config.output.diagnostics);

    let mut outputs: Vec<f64> = config
        .output
        .times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && time.t_end.is_none_or(|te| t < te))
        .collect();
    outputs.sort_by(f64::total_cmp);
    outputs.dedup();
    let mut pending = outputs.into_iter().peekable();

    let mut solutions = Vec::new();
    let mut save = |solver: &Solver| -> Result<(), CliError> {
        let path = dir.join(format!("{prefix}-{:03}.csv", solutions.len()));
        write_file(&path, &snapshot(header, solver))?;
        solutions.push(path);
        Ok(())
    };
    save(&solver)?;

    let mut diag = format!("{header}{DIAGNOSTICS_COLUMNS}\n");
    let mut converged = false;
    let mut last_residual = f64::NAN;
    let failure = loop {
        if time.t_end.is_some_and(|te| solver.time() >= te) || solver.steps() >= time.max_steps {
            break None;
        }
        solver.set_checkpoint(pending.peek().copied());
        let r = match solver.step() {
            Ok(r) => r,
            Err(e) => break Some(e),
        };
        last_residual = r.residual;
        let _ = writeln!(
            diag,
            "{},{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            r.dt,
            mass(&solver),
            r.residual,
            r.repetitions,
            r.d_adjustments,
            r.min_height,
            r.entropy_residual.map_or(String::new(), |e| e.to_string())
        );
        while pending.peek().is_some_and(|&t| solver.time() >= t) {
            pending.next();
            save(&solver)?;
        }
        if time.steady_tol.is_some_and(|tol| r.residual < tol) {
            converged = true;
            break None;
        }
    };
    write_file(&diagnostics, &diag)?;
    if let Some(e) = failure {
        let path = dir.join(format!("{prefix}-error.txt"));
        write_file(&path, &format!("{header}{e}\n"))?;
        return Err(CliError::solver(context, e));
    }
    save(&solver)?;
    let t = solver.time();
    let error = setup.exact.map(|ex| {
        l1_error_quadrature(
            solver.state(),
            |x| ex(x, t),
            solver.mesh(),
            QUADRATURE_SAMPLES,
        )
    });
    Ok(RunRecord {
        scheme,
        elements,
        t,
        steps: solver.steps(),
        steady_converged: time.steady_tol.map(|_| converged),
        final_residual: last_residual,
        stats: solver.stats(),
        error,
        solutions,
        diagnostics,
    })
}

/// Runs every configured scheme on every resolution, concurrently, and
/// writes the artifacts to the output directory.
pub fn run(config: &RunConfig) -> Result<Vec<RunRecord>, CliError> {
    config.validate()?;
    let resolutions = config.resolutions()?;
    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let header = config.header();
    let mut jobs = Vec::new();
    for &scheme in &config.scheme {
        for &n in &resolutions {
            jobs.push((scheme, n));
        }
    }
    let results = Mutex::new(Vec::new());
    thread::scope(|s| {
        for (k, &(scheme, n)) in jobs.iter().enumerate() {
            let (results, header) = (&results, &header);
            s.spawn(move || {
                let r = execute(config, header, scheme, n);
                results.lock().unwrap().push((k, r));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|r| r.0);
    results.into_iter().map(|r| r.1).collect()
}

/// Error and EOC columns for each scheme, in the layout of a convergence
/// table: one row per mesh, one error/EOC pair per scheme.
#[derive(Debug, Clone)]
pub struct EocTable {
    pub schemes: Vec<Scheme>,
    pub rows: Vec<EocTableRow>,
}

#[derive(Debug, Clone)]
pub struct EocTableRow {
    pub elements: usize,
    pub inv_h: f64,
    /// Per scheme: combined L1 error and EOC against the previous row.
    pub entries: Vec<(f64, Option<f64>)>,
}

impl EocTable {
    pub fn to_csv(&self, header: &str) -> String {
        let mut s = String::from(header);
        s.push_str("elements,inv_h");
        for sc in &self.schemes {
            let _ = write!(s, ",{sc}_error,{sc}_eoc");
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{}", r.elements, r.inv_h);
            for (e, eoc) in &r.entries {
                let _ = write!(s, ",{e},{}", eoc.map_or(String::new(), |x| x.to_string()));
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for EocTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>8}", "1/h")?;
        for sc in &self.schemes {
            write!(f, " {:>12} {:>6}", sc.name(), "EOC")?;
        }
        writeln!(f)?;
        for r in &self.rows {
            write!(f, "{:>8}", r.inv_h)?;
            for (e, eoc) in &r.entries {
                let eoc = eoc.map_or("-".into(), |x| format!("{x:.2}"));
                write!(f, " {e:>12.3e} {eoc:>6}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Convergence study against the exact solution of a benchmark. The error
/// is the L1 norm of the height error plus that of the discharge error.
pub fn convergence_study(config: &RunConfig) -> Result<EocTable, CliError> {
    let case: BenchmarkCase = config.benchmark_case()?.ok_or_else(|| {
        CliError::config(
            "benchmark",
            "convergence studies need a benchmark with an exact solution",
        )
    })?;
    if case.exact.is_none() {
        return Err(CliError::config(
            "benchmark",
            format!("benchmark '{}' has no exact solution", case.name),
        ));
    }
    if config.elements.len() < 2 {
        return Err(CliError::config(
            "elements",
            "need at least two resolutions",
        ));
    }
    let records = run(config)?;
    let mut rows: Vec<EocTableRow> = Vec::new();
    let mut columns = Vec::new();
    for &scheme in &config.scheme {
        let errors: Vec<(usize, f64)> = records
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| (r.elements, r.error.expect("exact solution").combined()))
            .collect();
        let report = benchmarks::eoc(case.domain.1 - case.domain.0, &errors)
            .map_err(|e| CliError::solver("elements", e))?;
        columns.push(report);
    }
    for (k, &n) in config.elements.iter().enumerate() {
        rows.push(EocTableRow {
            elements: n,
            inv_h: columns[0].rows[k].inv_h,
            entries: columns
                .iter()
                .map(|c| (c.rows[k].error, c.rows[k].eoc))
                .collect(),
        });
    }
    let table = EocTable {
        schemes: config.scheme.clone(),
        rows,
    };
    let path = config.output.dir.join("eoc.csv");
    write_file(&path, &table.to_csv(&config.header()))?;
    Ok(table)
}

/// Nodal samples of a benchmark's exact solution at time `t`, in the
/// solution snapshot layout.
pub fn exact_csv(name: &str, elements: usize, t: f64) -> Result<String, CliError> {
    let case = benchmarks::benchmark(name).map_err(|e| CliError::config("benchmark", e))?;
    let exact = case
        .exact
        .clone()
        .ok_or_else(|| CliError::config("benchmark", format!("'{name}' has no exact solution")))?;
    let mesh = case
        .mesh(elements)
        .map_err(|e| CliError::solver("elements", e))?;
    let mut s = format!("#@ benchmark = {name}, t = {t}\n{SOLUTION_COLUMNS}\n");
    for &x in mesh.nodes() {
        let u: Conserved = exact(x, t);
        let b = (case.bathymetry)(x);
        let _ = writeln!(s, "{x},{},{},{},{b},{}", u.h, u.hv, u.velocity(), u.h + b);
    }
    Ok(s)
}
