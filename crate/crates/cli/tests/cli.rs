use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use swe_afc::benchmarks::NAMES;
use swe_afc::Scheme;
use swe_afc_cli::{convergence_study, RunConfig};

fn swe_afc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swe-afc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn lists_every_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_afc(&["list"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for name in NAMES {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn artifacts_reproduce_their_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_afc(
        &[
            "run",
            "--benchmark",
            "wet-dam-break",
            "--scheme",
            "LOW,MCL-SDE",
            "--elements",
            "64",
            "--output-times",
            "0.1,0.2",
            "--diagnostics",
            "--out-dir",
            "a",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = dir.path().join("a");
    let last = a.join("mcl-sde-n64-003.csv");
    let text = fs::read_to_string(&last).unwrap();
    assert!(text.contains("#@ t = 0.3,"));
    assert!(text.contains("\nx,h,hv,v,b,H\n"));
    let diag = fs::read_to_string(a.join("low-n64-diagnostics.csv")).unwrap();
    let row = diag.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        row,
        "step,t,dt,mass,steady_residual,repetitions,d_adjustments,min_height,entropy_residual"
    );

    let o = swe_afc(
        &["run", "--config", last.to_str().unwrap(), "--out-dir", "b"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut files: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    files.sort();
    assert_eq!(files.len(), 10);
    for f in files {
        assert_eq!(
            data(&a.join(&f)),
            data(&dir.path().join("b").join(&f)),
            "{f:?}"
        );
    }
}

#[test]
fn custom_problem_matches_registered_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("dam.toml"),
        "scheme = \"MCL\"\nelements = 64\n\n[problem]\ndomain = [0.0, 1.0]\ng = 1.0\n\
         h = \"if(x <= 0.5, 1, 0.1)\"\n\n[time]\nt_end = 0.3\n\n[output]\ndir = \"custom\"\n",
    )
    .unwrap();
    assert!(swe_afc(&["run", "--config", "dam.toml"], dir.path())
        .status
        .success());
    let o = swe_afc(
        &[
            "run",
            "--benchmark",
            "wet-dam-break",
            "--scheme",
            "MCL",
            "--elements",
            "64",
            "--out-dir",
            "bench",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let f = "mcl-n64-001.csv";
    assert_eq!(
        data(&dir.path().join("custom").join(f)),
        data(&dir.path().join("bench").join(f))
    );
}

#[test]
fn lake_at_rest_step_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_afc(
        &[
            "run",
            "--benchmark",
            "lake-at-rest",
            "--scheme",
            "LOW",
            "--t-end",
            "100",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let steps: f64 = text
        .split(" after ")
        .nth(1)
        .and_then(|s| s.split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((steps - 22898.0).abs() <= 0.01 * 22898.0, "{text}");
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| swe_afc(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["run", "--benchmark", "nope"]), 2);
    assert_eq!(
        code(&["run", "--benchmark", "thacker", "--elements", "0"]),
        2
    );
    assert_eq!(code(&["run"]), 2);
    fs::write(dir.path().join("file"), "").unwrap();
    assert_eq!(
        code(&[
            "run",
            "--benchmark",
            "wet-dam-break",
            "--elements",
            "8",
            "--out-dir",
            "file/x"
        ]),
        3
    );
    // A puddle swept against a step: the first stage goes negative and no
    // step repetitions are allowed.
    fs::write(
        dir.path().join("fail.toml"),
        "scheme = \"LOW\"\nelements = 5\n\n[problem]\ndomain = [0.0, 1.0]\n\
         bathymetry = \"if(x > 0.7 && x < 0.9, -0.44, if(x > 0.9, 0.39, 0))\"\n\
         h = \"if(x > 0.7 && x < 0.9, 0.001, 0)\"\nhv = \"if(x > 0.7 && x < 0.9, -1.8944, 0)\"\n\n\
         [time]\nt_end = 1.0\nmax_halvings = 0\n\n[output]\ndir = \"f\"\n",
    )
    .unwrap();
    let o = swe_afc(&["run", "--config", "fail.toml"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 1"));
    assert!(dir.path().join("f/low-n5-error.txt").exists());
}

#[test]
fn exact_solution_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_afc(
        &[
            "exact",
            "--benchmark",
            "wet-dam-break",
            "--elements",
            "4",
            "--t",
            "0",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,h,hv,v,b,H");
    assert_eq!(rows[1], "0,1,0,0,0,1");
    assert_eq!(rows[5], "1,0.1,0,0,0,0.1");
}

#[test]
fn convergence_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::for_benchmark("wet-dam-break");
    c.scheme = vec![Scheme::Low, Scheme::Mcl];
    c.elements = vec![16, 32, 64];
    c.output.dir = dir.path().to_path_buf();
    let table = convergence_study(&c).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows[0].entries.iter().all(|e| e.1.is_none()));
    for r in &table.rows[1..] {
        for (k, (e, eoc)) in r.entries.iter().enumerate() {
            let prev = table.rows[0].entries[k].0;
            assert!(*e < prev);
            assert!(eoc.unwrap() > 0.3);
        }
    }
    let csv = fs::read_to_string(dir.path().join("eoc.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        lines[0],
        "elements,inv_h,LOW_error,LOW_eoc,MCL_error,MCL_eoc"
    );
    assert!(lines[1].starts_with("16,16,") && lines[1].ends_with(','));
    assert_eq!(RunConfig::from_artifact(&csv).unwrap(), c);
}

#[test]
fn rejects_mixed_end_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_afc(
        &[
            "run",
            "--benchmark",
            "subcritical",
            "--t-end",
            "1",
            "--steady",
            "1e-10",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
}
