//! Run configuration, read from TOML.
//!
//! A configuration names either a registered benchmark or a custom problem.
//! Unset fields fall back to the benchmark's own settings, so the text of a
//! configuration is enough to reproduce a run. Every artifact repeats it in
//! its header.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use swe_afc::benchmarks::{self, BenchmarkCase};
use swe_afc::{BoundarySpec, RawFluxMode, Scheme, SspOrder, TadmorFix, WaveSpeed, WetDryConfig};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Registered benchmark; mutually exclusive with `problem`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<CustomProblem>,
    /// One scheme or a list. Lists run every scheme on the same setup.
    #[serde(default = "default_schemes", deserialize_with = "one_or_many")]
    pub scheme: Vec<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_flux_mode: Option<RawFluxMode>,
    #[serde(default)]
    pub wave_speed: WaveSpeed,
    #[serde(default)]
    pub tadmor_fix: TadmorFix,
    /// Mesh resolutions. Empty means the benchmark default.
    #[serde(default, deserialize_with = "one_or_many")]
    pub elements: Vec<usize>,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wet_dry: Option<WetDryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub domain: [f64; 2],
    #[serde(default = "default_gravity")]
    pub g: f64,
    /// Expressions in `x`.
    #[serde(default = "zero_expr")]
    pub bathymetry: String,
    pub h: String,
    #[serde(default = "zero_expr")]
    pub hv: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rk_order: Option<SspOrder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_halvings: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Times at which solution snapshots are written in addition to the
    /// initial and final states.
    pub times: Vec<f64>,
    /// Evaluate the entropy residual every step.
    pub diagnostics: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            times: Vec::new(),
            diagnostics: false,
        }
    }
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Mcl]
}

fn default_gravity() -> f64 {
    9.81
}

fn zero_expr() -> String {
    "0".into()
}

fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            benchmark: None,
            problem: None,
            scheme: default_schemes(),
            raw_flux_mode: None,
            wave_speed: WaveSpeed::default(),
            tadmor_fix: TadmorFix::default(),
            elements: Vec::new(),
            time: TimeSection::default(),
            wet_dry: None,
            boundary: None,
            output: OutputSection::default(),
        }
    }
}

const HEADER_PREFIX: &str = "# ";

impl RunConfig {
    pub fn for_benchmark(name: &str) -> Self {
        Self {
            benchmark: Some(name.into()),
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.message()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// Configuration from the `# ` header of an artifact written by
    /// [`crate::run`].
    pub fn from_artifact(text: &str) -> Result<Self, CliError> {
        let body: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix(HEADER_PREFIX).or((l == "#").then_some("")))
            .map(|l| format!("{l}\n"))
            .collect();
        if body.trim().is_empty() {
            return Err(CliError::config(
                "header",
                "artifact has no configuration header",
            ));
        }
        Self::from_toml(&body)
    }

    /// Reads a TOML file, or the header of a CSV artifact.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if text.starts_with('#') {
            Self::from_artifact(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    /// The header written at the top of every artifact.
    pub fn header(&self) -> String {
        self.to_toml()
            .lines()
            .map(|l| {
                if l.is_empty() {
                    "#\n".to_string()
                } else {
                    format!("{HEADER_PREFIX}{l}\n")
                }
            })
            .collect()
    }

    pub fn benchmark_case(&self) -> Result<Option<BenchmarkCase>, CliError> {
        self.benchmark
            .as_deref()
            .map(|name| benchmarks::benchmark(name).map_err(|e| CliError::config("benchmark", e)))
            .transpose()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.benchmark, &self.problem) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "benchmark",
                    "give either a benchmark or a [problem] block, not both",
                ))
            }
            (None, None) => {
                return Err(CliError::config(
                    "benchmark",
                    "no benchmark and no [problem] block given",
                ))
            }
            _ => {}
        }
        let case = self.benchmark_case()?;
        if let Some(p) = &self.problem {
            if !(p.domain[0].is_finite() && p.domain[1].is_finite() && p.domain[0] < p.domain[1]) {
                return Err(CliError::config("problem.domain", "need a < b"));
            }
            if !(p.g > 0.0 && p.g.is_finite()) {
                return Err(CliError::config("problem.g", "gravity must be positive"));
            }
            for (field, e) in [
                ("problem.bathymetry", &p.bathymetry),
                ("problem.h", &p.h),
                ("problem.hv", &p.hv),
            ] {
                crate::expr::Expr::parse(e).map_err(|m| CliError::config(field, m))?;
            }
            if self.elements.is_empty() {
                return Err(CliError::config(
                    "elements",
                    "custom problems need a mesh resolution",
                ));
            }
        }
        if self.scheme.is_empty() {
            return Err(CliError::config("scheme", "no scheme given"));
        }
        if let Some(k) = self.elements.iter().position(|&n| n == 0) {
            return Err(CliError::config(
                &format!("elements[{k}]"),
                "resolutions must be positive",
            ));
        }
        let (t_end, steady) = self.end_condition(case.as_ref());
        if t_end.is_some() == steady.is_some() {
            return Err(CliError::config(
                "time",
                "exactly one of time.t_end and time.steady_tol must be set",
            ));
        }
        if let Some(nu) = self.time.nu {
            if !(nu > 0.0 && nu <= 1.0) {
                return Err(CliError::config(
                    "time.nu",
                    "CFL parameter must lie in (0, 1]",
                ));
            }
        }
        if let Some(k) = self
            .output
            .times
            .iter()
            .position(|t| !(t.is_finite() && *t >= 0.0))
        {
            return Err(CliError::config(
                &format!("output.times[{k}]"),
                "output times must be finite and nonnegative",
            ));
        }
        Ok(())
    }

    /// End time and steady tolerance after benchmark defaults. Setting one
    /// of them in the configuration clears the other default.
    pub fn end_condition(&self, case: Option<&BenchmarkCase>) -> (Option<f64>, Option<f64>) {
        match (self.time.t_end, self.time.steady_tol) {
            (None, None) => case.map_or((None, None), |c| (c.t_end, c.steady_tol)),
            explicit => explicit,
        }
    }
}
