use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use swe_afc::benchmarks::exact::wet_dam_break_middle_state;
use swe_afc::benchmarks::{self, l1_error, l1_error_quadrature, BenchmarkCase, QUADRATURE_SAMPLES};
use swe_afc::boundary::{external_state, BoundaryEdge};
use swe_afc::entropy_stability::{compute_pq, compute_r, entropy_limiter_all, EntropyEdge};
use swe_afc::low_order::{bathymetry_limiter, low_order_rhs, EdgeCoefficients};
use swe_afc::mcl_limiter::{limit_fluxes, limit_height_flux, raw_fluxes, LimitedFluxes};
use swe_afc::state::NodeValue;
use swe_afc::wet_dry::{fix_azerad, fix_friction_boundary_layer, fix_kurganov_petrova};
use swe_afc::*;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn case(name: &str) -> BenchmarkCase {
    benchmarks::benchmark(name).unwrap()
}

fn solver_with(
    c: &BenchmarkCase,
    scheme: SchemeConfig,
    time: TimeConfig,
    elements: usize,
    wet_dry: WetDryConfig,
) -> Result<Solver> {
    Solver::new(c.problem(elements)?, scheme, time, wet_dry)
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

// Reference errors and EOCs for the wet dam break (h_L = 1, h_R = 0.1, g = 1, T = 0.3).
const TABLE: [(Scheme, [f64; 5], [f64; 4]); 3] = [
    (
        Scheme::Low,
        [7.93e-2, 4.98e-2, 3.00e-2, 1.77e-2, 1.06e-2],
        [0.67, 0.73, 0.76, 0.75],
    ),
    (
        Scheme::Mcl,
        [3.28e-2, 1.67e-2, 8.47e-3, 4.28e-3, 1.94e-3],
        [0.97, 0.98, 0.99, 1.14],
    ),
    (
        Scheme::MclSde,
        [3.66e-2, 1.89e-2, 9.59e-3, 4.85e-3, 2.24e-3],
        [0.95, 0.98, 0.98, 1.11],
    ),
];

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let c = case("wet-dam-break");
    let ex = c.exact.clone().unwrap();
    let sizes = [32, 64, 128, 256, 512];
    let errors = Mutex::new(vec![[0.0; 5]; 3]);
    thread::scope(|s| {
        for (k, (scheme, _, _)) in TABLE.iter().enumerate() {
            for (l, &n) in sizes.iter().enumerate() {
                let (c, ex, errors) = (&c, &ex, &errors);
                s.spawn(move || {
                    let mut solver = c.solver(*scheme, n).unwrap();
                    solver.run(|_, _| {}).unwrap();
                    let e = l1_error_quadrature(
                        solver.state(),
                        |x| ex(x, 0.3),
                        solver.mesh(),
                        QUADRATURE_SAMPLES,
                    );
                    errors.lock().unwrap()[k][l] = e.combined();
                });
            }
        }
    });
    let errors = errors.into_inner().unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let mut pass = elapsed < 60.0;
    let mut parts = Vec::new();
    for (k, (scheme, reference, reference_eoc)) in TABLE.iter().enumerate() {
        let e = errors[k];
        let eoc: Vec<f64> = (0..4).map(|l| (e[l] / e[l + 1]).log2()).collect();
        let worst_rel = (0..5)
            .map(|l| (e[l] - reference[l]).abs() / reference[l])
            .fold(0.0, f64::max);
        let worst_eoc = (0..4)
            .map(|l| (eoc[l] - reference_eoc[l]).abs())
            .fold(0.0, f64::max);
        let ok = (0..5).all(|l| within(e[l], reference[l], 0.15))
            && (0..4).all(|l| (eoc[l] - reference_eoc[l]).abs() <= 0.1);
        pass &= ok;
        parts.push(format!(
            "{scheme} errors [{}] EOC [{}] max rel dev {:.1}% max EOC dev {:.3}{}",
            e.iter()
                .map(|x| format!("{x:.3e}"))
                .collect::<Vec<_>>()
                .join(" "),
            eoc.iter()
                .map(|x| format!("{x:.2}"))
                .collect::<Vec<_>>()
                .join(" "),
            100.0 * worst_rel,
            worst_eoc,
            if ok { "" } else { " (out of tolerance)" }
        ));
    }
    parts.push(format!("{elapsed:.1} s"));
    Outcome::new(pass, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["lake-at-rest-exact", "lake-at-rest"] {
        let c = case(name);
        for scheme in Scheme::ALL {
            let mut solver = c.solver(scheme, c.elements).unwrap();
            let h0 = solver.state().h.clone();
            let scale = solver.state().max_height();
            let mut hv_hist = Vec::new();
            let mut max_dh: f64 = 0.0;
            let summary = solver.run(|sv, _| {
                let st = sv.state();
                hv_hist.push(st.hv.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                for (h, h0) in st.h.iter().zip(&h0) {
                    max_dh = max_dh.max((h - h0).abs());
                }
            });
            let Ok(summary) = summary else {
                pass = false;
                parts.push(format!("{name} {scheme}: run failed"));
                continue;
            };
            let max_hv = hv_hist.iter().copied().fold(0.0, f64::max);
            let ok = if name == "lake-at-rest-exact" {
                max_hv <= 1e-12 * scale && max_dh <= 1e-12 * scale
            } else {
                let bound = 1e-10 * c.g * scale * scale;
                let q = hv_hist.len() / 4;
                let early = hv_hist[..q].iter().copied().fold(0.0, f64::max);
                let late = hv_hist[hv_hist.len() - q..]
                    .iter()
                    .copied()
                    .fold(0.0, f64::max);
                let no_growth = late <= 10.0 * early + 1e-14 * c.g * scale * scale;
                let steps_ok = (summary.steps as f64 - 22898.0).abs() <= 0.01 * 22898.0;
                max_hv <= bound && no_growth && steps_ok
            };
            pass &= ok;
            parts.push(format!(
                "{name} {scheme}: steps {} max|hv| {max_hv:.1e} max|dH| {max_dh:.1e}{}",
                summary.steps,
                if ok { "" } else { " (out of tolerance)" }
            ));
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    use WetDryStrategy::*;
    let runs = Mutex::new(Vec::new());
    thread::scope(|s| {
        for name in ["dry-dam-break", "thacker"] {
            for strategy in [
                ZeroVelocity,
                Azerad,
                KurganovPetrova,
                EntropyBased,
                FrictionBoundaryLayer,
            ] {
                for scheme in Scheme::ALL {
                    let runs = &runs;
                    s.spawn(move || {
                        let c = case(name);
                        let r = solver_with(
                            &c,
                            c.scheme_config(scheme),
                            c.time_config(),
                            c.elements,
                            WetDryConfig::with_strategy(strategy),
                        )
                        .and_then(|mut sv| {
                            let res = sv.run(|_, _| {});
                            let stats = sv.stats();
                            res.map(|_| stats).map_err(|e| (e, stats).0)
                        });
                        runs.lock().unwrap().push((name, strategy, scheme, r));
                    });
                }
            }
        }
    });
    let mut runs = runs.into_inner().unwrap();
    runs.sort_by_key(|(n, st, sc, _)| (*n, *st as u8, *sc as u8));
    let mut pass = true;
    let mut failures = Vec::new();
    let mut controlled = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, strategy, scheme, r) in &runs {
        // Thacker's basin is allowed to defeat these two fixes, and the
        // entropy-based fix is restricted to flat bottoms.
        let may_fail =
            *name == "thacker" && matches!(strategy, ZeroVelocity | Azerad | EntropyBased);
        match r {
            Ok(stats) => {
                worst = worst.min(stats.min_stage_height);
                if stats.min_stage_height < -1e-14 || stats.positivity_repetitions > 0 {
                    pass = false;
                    failures.push(format!(
                        "{name} {strategy:?} {scheme}: min h {:.1e}, {} positivity repetitions",
                        stats.min_stage_height, stats.positivity_repetitions
                    ));
                }
            }
            Err(e) if may_fail => controlled.push(format!("{strategy:?} {scheme}: {e}")),
            Err(e) => {
                pass = false;
                failures.push(format!("{name} {strategy:?} {scheme}: {e}"));
            }
        }
    }
    let mut detail = format!(
        "{} runs, min stage height {worst:.1e}, {} controlled failures on thacker",
        runs.len(),
        controlled.len()
    );
    if !failures.is_empty() {
        detail += &format!("; failures: {}", failures.join("; "));
    }
    Outcome::new(pass, detail)
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["wet-dam-break", "subcritical"] {
        let c = case(name);
        for scheme in [Scheme::Low, Scheme::MclSde] {
            let mut solver = c.solver(scheme, c.elements).unwrap().with_diagnostics(true);
            let r = solver.run(|_, _| {});
            let worst = solver.stats().max_entropy_residual;
            let ok = r.is_ok() && worst.is_some_and(|w| w <= 1e-10);
            pass &= ok;
            parts.push(format!(
                "{name} {scheme}: max residual {}{}",
                worst.map_or("n/a".into(), |w| format!("{w:.2e}")),
                match &r {
                    Err(e) => format!(" (run failed: {e})"),
                    Ok(_) if !ok => " (out of tolerance)".into(),
                    _ => String::new(),
                }
            ));
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let c = case("wet-dam-break");
    let mut pass = true;
    let mut parts = Vec::new();
    for scheme in Scheme::ALL {
        let run = |level: f64| {
            let mut p = c.problem(c.elements).unwrap();
            p.bathymetry = Bathymetry::flat(&p.mesh, level, c.g);
            let mut sv = Solver::new(
                p,
                c.scheme_config(scheme),
                c.time_config(),
                c.wet_dry_config(),
            )
            .unwrap();
            let mut dts = Vec::new();
            for _ in 0..100 {
                dts.push(sv.step().unwrap().dt);
            }
            (sv.state().clone(), dts)
        };
        let (a, da) = run(0.0);
        let (b, db) = run(0.7);
        let same = a == b && da == db;
        pass &= same;
        parts.push(format!(
            "{scheme}: {}",
            if same {
                "bitwise identical"
            } else {
                "trajectories differ"
            }
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

fn steady_run(
    c: &BenchmarkCase,
    scheme: Scheme,
    mode: RawFluxMode,
    n: usize,
    cap: usize,
) -> (bool, usize, f64) {
    let mut cfg = c.scheme_config(scheme);
    cfg.raw_flux_mode = mode;
    let mut tc = c.time_config();
    tc.max_steps = cap;
    let mut sv = solver_with(c, cfg, tc, n, c.wet_dry_config()).unwrap();
    match sv.run(|_, _| {}) {
        Ok(s) => (s.steady_converged, s.steps, s.final_residual),
        Err(_) => (false, sv.steps(), f64::NAN),
    }
}

fn criterion_6() -> Outcome {
    let c = case("supercritical");
    let sizes = [128, 256, 512];
    let default_runs = Mutex::new(Vec::new());
    let full_runs = Mutex::new(Vec::new());
    const SDE_CAP: usize = 200_000;
    thread::scope(|s| {
        for n in sizes {
            for scheme in Scheme::ALL {
                let (c, out) = (&c, &default_runs);
                s.spawn(move || {
                    let r = steady_run(c, scheme, c.raw_flux_mode, n, 2_000_000);
                    out.lock().unwrap().push((n, scheme, r));
                });
            }
            let (c, out) = (&c, &full_runs);
            s.spawn(move || {
                let sde = steady_run(c, Scheme::MclSde, RawFluxMode::Full, n, SDE_CAP);
                let cap = if sde.0 { 10 * sde.1 } else { SDE_CAP };
                let mcl = steady_run(c, Scheme::Mcl, RawFluxMode::Full, n, cap);
                out.lock().unwrap().push((n, sde, mcl, cap));
            });
        }
    });
    let mut default_runs = default_runs.into_inner().unwrap();
    default_runs.sort_by_key(|(n, s, _)| (*n, *s as u8));
    let mut full_runs = full_runs.into_inner().unwrap();
    full_runs.sort_by_key(|r| r.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, scheme, (conv, steps, res)) in &default_runs {
        let ok = *conv && *res < 1e-12;
        pass &= ok;
        parts.push(format!(
            "{n} {scheme}: {} after {steps} steps (residual {res:.1e})",
            if ok { "converged" } else { "NOT converged" }
        ));
    }
    for (n, sde, mcl, cap) in &full_runs {
        let ok = sde.0 && !mcl.0;
        pass &= ok;
        parts.push(format!(
            "full fluxes {n}: MCL-SDE {} ({} steps, residual {:.1e}), MCL {} within {cap} steps (residual {:.1e})",
            if sde.0 { "converged" } else { "NOT converged" },
            sde.1,
            sde.2,
            if mcl.0 { "converged" } else { "not converged" },
            mcl.2
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let c = case("thacker");
    let ex = c.exact.clone().unwrap();
    let results = Mutex::new(Vec::new());
    thread::scope(|s| {
        for scheme in Scheme::ALL {
            let (c, ex, results) = (&c, &ex, &results);
            s.spawn(move || {
                let full = c.solver(scheme, 128).and_then(|mut sv| {
                    sv.run(|_, _| {})?;
                    Ok(sv.stats())
                });
                let mut tc = c.time_config();
                tc.t_end = Some(2000.0);
                let err = solver_with(c, c.scheme_config(scheme), tc, 128, c.wet_dry_config())
                    .and_then(|mut sv| {
                        sv.run(|_, _| {})?;
                        Ok(l1_error(sv.state(), |x| ex(x, 2000.0), sv.mesh()).free_surface)
                    });
                results.lock().unwrap().push((scheme, full, err));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|r| r.0 as u8);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut errs = [None; 3];
    for (k, (scheme, full, err)) in results.iter().enumerate() {
        match full {
            Ok(st) => {
                let ok = st.repetitions == 0 && st.d_adjustments == 0;
                pass &= ok;
                parts.push(format!(
                    "{scheme}: T=3000 reached, {} repetitions, {} d-adjustments",
                    st.repetitions, st.d_adjustments
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{scheme}: run failed ({e})"));
            }
        }
        errs[k] = err.as_ref().ok().copied();
    }
    match errs {
        [Some(low), Some(mcl), Some(sde)] => {
            let ok = mcl < low && sde < low;
            pass &= ok;
            parts.push(format!(
                "free surface L1 at t=2000: LOW {low:.3e}, MCL {mcl:.3e}, MCL-SDE {sde:.3e}"
            ));
        }
        _ => {
            pass = false;
            parts.push(format!(
                "free surface L1 at t=2000 incomplete: {:?}",
                errs.map(|e| e.map(|e| format!("{e:.3e}")))
            ));
        }
    }
    // Fixes that are allowed to break down on this case must do so with an
    // error rather than a panic or a silent negative state.
    let mut controlled = Vec::new();
    for strategy in [WetDryStrategy::ZeroVelocity, WetDryStrategy::Azerad] {
        for scheme in Scheme::ALL {
            let r = solver_with(
                &c,
                c.scheme_config(scheme),
                c.time_config(),
                128,
                WetDryConfig::with_strategy(strategy),
            )
            .and_then(|mut sv| sv.run(|_, _| {}).map(|_| sv.stats()));
            match r {
                Ok(st) if st.min_stage_height >= -1e-14 => controlled.push("completed"),
                Ok(_) => {
                    pass = false;
                    controlled.push("negative heights");
                }
                Err(_) => controlled.push("error"),
            }
        }
    }
    parts.push(format!("zero-velocity/azerad outcomes {controlled:?}"));
    Outcome::new(pass, parts.join("; "))
}

fn wall_coefficients(nodes: &[NodeValue], g: f64) -> (Mesh1D, EdgeCoefficients) {
    let mesh = build_uniform_mesh(0.0, 1.0, nodes.len() - 1).unwrap();
    let boundary = [(Side::Left, 0), (Side::Right, nodes.len() - 1)]
        .into_iter()
        .map(|(side, k)| {
            let (ext, regime) = external_state(&nodes[k], BoundaryKind::Wall, side, g).unwrap();
            BoundaryEdge::new(k, side, &nodes[k], ext, regime, g, WaveSpeed::Nodal).unwrap()
        })
        .collect();
    let ec = EdgeCoefficients::assemble(&mesh, nodes, boundary, g, WaveSpeed::Nodal).unwrap();
    (mesh, ec)
}

fn random_nodes() -> impl Strategy<Value = Vec<NodeValue>> {
    prop::collection::vec(
        (
            prop_oneof![1 => Just(0.0), 6 => 1e-3f64..2.0],
            -2.0f64..2.0,
            -0.8f64..0.8,
        ),
        3..24,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(h, hv, b)| {
                let hv = if h == 0.0 { 0.0 } else { hv };
                let v = if h == 0.0 { 0.0 } else { hv / h };
                NodeValue::new(Conserved::new(h, hv), v, b)
            })
            .collect()
    })
}

fn mirrored(nodes: &[NodeValue]) -> Vec<NodeValue> {
    nodes
        .iter()
        .rev()
        .map(|n| NodeValue::new(Conserved::new(n.h, -n.hv), -n.v, n.b))
        .collect()
}

fn limited(
    nodes: &[NodeValue],
    mode: RawFluxMode,
    g: f64,
) -> (Mesh1D, EdgeCoefficients, LimitedFluxes) {
    let (mesh, ec) = wall_coefficients(nodes, g);
    let low = low_order_rhs(nodes, &ec).unwrap();
    let raw = raw_fluxes(nodes, &ec, &low, mesh.lumped_mass(), mode);
    let h0 = nodes.iter().map(|n| n.h).fold(0.0, f64::max);
    let lim = limit_fluxes(nodes, &ec, &raw, g, 1e-14 * h0);
    (mesh, ec, lim)
}

const TRIALS: u32 = 10_000;

fn property(
    name: &str,
    f: impl Fn(&mut TestRunner) -> std::result::Result<(), String>,
) -> (String, bool) {
    let mut runner = TestRunner::new(Config {
        cases: TRIALS,
        failure_persistence: None,
        ..Config::default()
    });
    match f(&mut runner) {
        Ok(()) => (format!("{name} ok"), true),
        Err(e) => (format!("{name} FAILED: {e}"), false),
    }
}

fn criterion_8() -> Outcome {
    let g = 9.81;
    let modes = prop_oneof![
        Just(RawFluxMode::Full),
        Just(RawFluxMode::Steady),
        Just(RawFluxMode::Simple)
    ];
    let results = [
        property("alpha/beta ranges and symmetry", |r| {
            r.run(&random_nodes(), |nodes| {
                let (_, ec, lim) = limited(&nodes, RawFluxMode::Full, g);
                let ent = entropy_limiter_all(&nodes, &ec, &lim.f_h_star, &lim.f_hv_star, g);
                for (k, e) in ec.edges.iter().enumerate() {
                    let (u_i, u_j) = (&nodes[e.i], &nodes[e.j]);
                    prop_assert!((0.0..=1.0).contains(&e.alpha));
                    let rev = bathymetry_limiter(e.bar_ji.h, e.bar_ij.h, u_j.b, u_i.b);
                    prop_assert_eq!(rev, e.alpha);
                    prop_assert!((0.0..=1.0).contains(&ent[k].beta));
                    // β is a function of P, min Q and R, all symmetric.
                    let fwd = EntropyEdge::new(e, &nodes, g);
                    let (p_ji, _) = compute_pq(u_j, u_i, e.alpha, e.c_ji, g);
                    let tol = 1e-10 * (1.0 + fwd.q_scale);
                    prop_assert!((p_ji - fwd.p).abs() <= tol);
                    let r_ji = compute_r(u_j, u_i, e.alpha, -lim.f_h_star[k], -lim.f_hv_star[k], g);
                    prop_assert!((r_ji - ent[k].r).abs() <= 1e-10 * (1.0 + ent[k].r.abs()));
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        property("limited fluxes antisymmetric under reflection", |r| {
            r.run(&(random_nodes(), modes.clone()), |(nodes, mode)| {
                let (_, _, lim) = limited(&nodes, mode, g);
                let (_, _, mir) = limited(&mirrored(&nodes), mode, g);
                let m = lim.f_h_star.len();
                let scale = 1e-9
                    * (1.0
                        + lim
                            .f_h_star
                            .iter()
                            .chain(&lim.f_hv_star)
                            .fold(0.0f64, |a, b| a.max(b.abs())));
                for k in 0..m {
                    prop_assert!((mir.f_h_star[m - 1 - k] + lim.f_h_star[k]).abs() <= scale);
                    prop_assert!((mir.f_hv_star[m - 1 - k] - lim.f_hv_star[k]).abs() <= scale);
                    let gs = 1e-9 * (1.0 + lim.g_hv_star[k].abs());
                    prop_assert!(
                        (mir.g_hv_star[m - 1 - k] - lim.g_hv_star[k]).abs() <= gs,
                        "g* {} vs {}",
                        mir.g_hv_star[m - 1 - k],
                        lim.g_hv_star[k]
                    );
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        property("bar states inside their bounds", |r| {
            r.run(&(random_nodes(), modes.clone()), |(nodes, mode)| {
                let (_, ec, lim) = limited(&nodes, mode, g);
                let h0 = nodes.iter().map(|n| n.h).fold(0.0, f64::max);
                let tol = 1e-12 * (1.0 + 4.0 * h0);
                for (k, e) in ec.edges.iter().enumerate() {
                    prop_assert!(e.bar_ij.h_b >= -tol && e.bar_ji.h_b >= -tol);
                    let (a, b) = lim.hbar_b_star[k];
                    prop_assert!(
                        a >= lim.h_bounds.min[e.i] - tol && a <= lim.h_bounds.max[e.i] + tol
                    );
                    prop_assert!(
                        b >= lim.h_bounds.min[e.j] - tol && b <= lim.h_bounds.max[e.j] + tol
                    );
                    let v = lim.vbar[k];
                    if !v.is_nan() {
                        prop_assert!(lim.v_bounds.min[e.i] <= v && v <= lim.v_bounds.max[e.i]);
                        prop_assert!(lim.v_bounds.min[e.j] <= v && v <= lim.v_bounds.max[e.j]);
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        property("limiter idempotence", |r| {
            r.run(&(random_nodes(), modes.clone()), |(nodes, mode)| {
                let (_, ec, lim) = limited(&nodes, mode, g);
                for (k, e) in ec.edges.iter().enumerate() {
                    let again = limit_height_flux(
                        lim.f_h_star[k],
                        e.d,
                        e.bar_ij.h_b,
                        e.bar_ji.h_b,
                        (lim.h_bounds.min[e.i], lim.h_bounds.max[e.i]),
                        (lim.h_bounds.min[e.j], lim.h_bounds.max[e.j]),
                    );
                    prop_assert_eq!(again, lim.f_h_star[k]);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        property("mass conservation with walls", |r| {
            r.run(&(random_nodes(), 0usize..3), |(nodes, pick)| {
                let mesh = build_uniform_mesh(0.0, 1.0, nodes.len() - 1).unwrap();
                let initial = NodalState::new(
                    nodes.iter().map(|n| n.h).collect(),
                    nodes.iter().map(|n| n.hv).collect(),
                )
                .unwrap();
                let bathymetry = Bathymetry {
                    nodal_b: nodes.iter().map(|n| n.b).collect(),
                    gravity: g,
                };
                let problem = Problem {
                    mesh: mesh.clone(),
                    bathymetry,
                    initial: initial.clone(),
                    boundary: BoundarySpec::walls(),
                };
                let time = TimeConfig {
                    max_steps: 3,
                    ..TimeConfig::until(1e3)
                };
                let mut sv = Solver::new(
                    problem,
                    SchemeConfig::new(Scheme::ALL[pick]),
                    time,
                    WetDryConfig::with_strategy(WetDryStrategy::KurganovPetrova),
                )
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
                sv.run(|_, _| {})
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                let mass = |h: &[f64]| -> f64 {
                    h.iter().zip(mesh.lumped_mass()).map(|(h, m)| h * m).sum()
                };
                let (m0, m1) = (mass(&initial.h), mass(&sv.state().h));
                prop_assert!(
                    (m1 - m0).abs() <= 1e-12 * m0.max(f64::MIN_POSITIVE),
                    "{} vs {}",
                    m0,
                    m1
                );
                Ok(())
            })
            .map_err(|e| e.to_string())
        }),
        property("wet/dry fixes continuous at thresholds", |r| {
            r.run(
                &(-1.0f64..1.0, 1e-6f64..1e-2, -5.0f64..5.0),
                |(hv, eps, v_bl)| {
                    let (lo, hi) = (eps * (1.0 - 1e-9), eps * (1.0 + 1e-9));
                    for f in [fix_azerad as fn(f64, f64, f64) -> f64, fix_kurganov_petrova] {
                        let (a, b) = (f(lo, hv, eps), f(hi, hv, eps));
                        prop_assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()));
                    }
                    let (a, b) = (
                        fix_friction_boundary_layer(lo, hv, v_bl, eps),
                        fix_friction_boundary_layer(hi, hv, v_bl, eps),
                    );
                    prop_assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()));
                    Ok(())
                },
            )
            .map_err(|e| e.to_string())
        }),
    ];
    let pass = results.iter().all(|r| r.1);
    let detail = format!(
        "{TRIALS} trials each: {}",
        results
            .iter()
            .map(|r| r.0.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Outcome::new(pass, detail)
}

/// Sign changes of the discrete slopes of `f` over nodes in `[a, b]`,
/// ignoring slopes at rounding level.
fn slope_sign_changes(x: &[f64], f: &[f64], a: f64, b: f64) -> usize {
    let slopes: Vec<f64> = (0..x.len() - 1)
        .filter(|&k| x[k] >= a && x[k + 1] <= b)
        .map(|k| f[k + 1] - f[k])
        .filter(|d| d.abs() > 1e-10)
        .collect();
    slopes.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

fn criterion_9() -> Outcome {
    let c = case("wet-dam-break");
    let (hm, vm) = wet_dam_break_middle_state(1.0, 0.1, c.g).unwrap();
    let t = 0.3;
    let (a, b) = (
        0.5 - (c.g * 1.0f64).sqrt() * t,
        0.5 + (vm - (c.g * hm).sqrt()) * t,
    );
    let elements = 512;
    let mut pass = true;
    let mut parts = Vec::new();
    for ws in [WaveSpeed::Nodal, WaveSpeed::Gms] {
        for (rk, nu) in [(SspOrder::One, 1.0), (SspOrder::Two, 0.5)] {
            let mut cfg = c.scheme_config(Scheme::Mcl);
            cfg.wave_speed = ws;
            let mut tc = c.time_config();
            tc.rk_order = rk;
            tc.nu = nu;
            let mut sv = solver_with(&c, cfg, tc, elements, c.wet_dry_config()).unwrap();
            sv.run(|_, _| {}).unwrap();
            let x = sv.mesh().nodes();
            let st = sv.state();
            let n = slope_sign_changes(x, &st.h, a, b);
            let expect_oscillations = rk == SspOrder::One;
            let ok = (n > 0) == expect_oscillations;
            pass &= ok;
            parts.push(format!("{ws:?} {rk:?} nu={nu}: {n} sign changes"));
        }
    }
    Outcome::new(
        pass,
        format!(
            "MCL, {elements} elements, fan [{a:.3}, {b:.3}]: {}",
            parts.join("; ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("dam break convergence", criterion_1),
        ("well-balancedness", criterion_2),
        ("positivity", criterion_3),
        ("entropy inequality", criterion_4),
        ("flat-bottom reduction", criterion_5),
        ("steady convergence", criterion_6),
        ("Thacker lake", criterion_7),
        ("property suites", criterion_8),
        ("forward Euler oscillations", criterion_9),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let outcomes = Mutex::new(Vec::new());
    thread::scope(|s| {
        for (k, (name, f)) in criteria.iter().enumerate() {
            if !filter.is_empty() && !filter.contains(&(k + 1)) {
                continue;
            }
            let outcomes = &outcomes;
            s.spawn(move || {
                let t0 = Instant::now();
                let o = f();
                outcomes
                    .lock()
                    .unwrap()
                    .push((k + 1, *name, o, t0.elapsed().as_secs_f64()));
            });
        }
    });
    let mut outcomes = outcomes.into_inner().unwrap();
    outcomes.sort_by_key(|o| o.0);
    let mut failed = 0;
    for (k, name, o, secs) in &outcomes {
        println!(
            "criterion {k} ({name}): {} [{secs:.1} s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
