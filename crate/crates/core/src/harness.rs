//! Experiment configuration, convergence reports and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{
    convergence_study, fit_slope, step_count, StudyOptions, DEFAULT_SUBSTEPS, SLOPE_WINDOW,
};
use crate::error::{Error, Result};
use crate::fd::BoundaryClosure;
use crate::field::GridKind;
use crate::problem::{Preset, ProblemSpec};
use crate::schemes::Method;
use crate::weno::GhostFill;

/// CSV header of a convergence report.
pub const REPORT_HEADER: &str = "method,h,work_a_evals,error_inf,runtime_ms";

/// Keys accepted in configuration files; CLI flags use the same names.
pub const CONFIG_KEYS: [&str; 16] = [
    "preset",
    "nu",
    "t_final",
    "resolution",
    "paper_scale",
    "methods",
    "h",
    "substeps",
    "output",
    "workers",
    "closure",
    "ghost",
    "dealias",
    "project_real",
    "reference_dt",
    "timings",
];

/// Parses step-size expressions such as `0.01`, `1/40`, `2pi/40`, `pi/8`.
pub fn parse_step(text: &str) -> Result<f64> {
    let bad = || Error::config("h", format!("cannot parse step size `{text}`"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (lower.as_str(), None),
    };
    let numerator = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = if coef.is_empty() {
            1.0
        } else {
            coef.parse::<f64>().map_err(|_| bad())?
        };
        c * std::f64::consts::PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let value = match den {
        Some(d) => numerator / d.parse::<f64>().map_err(|_| bad())?,
        None => numerator,
    };
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::config("h", format!("step size `{text}` must be positive")));
    }
    Ok(value)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(key, format!("expected a boolean, got `{value}`"))),
    }
}

fn parse_num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse::<V>()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// A convergence experiment; every field maps to one configuration key.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub nu: Option<f64>,
    pub t_final: Option<f64>,
    pub resolution: Option<usize>,
    pub paper_scale: bool,
    pub methods: Vec<String>,
    /// Step-size expressions; the preset defaults when empty.
    pub h: Vec<String>,
    pub substeps: usize,
    pub output: Option<String>,
    pub workers: usize,
    pub closure: BoundaryClosure,
    pub ghost: GhostFill,
    pub dealias: bool,
    pub project_real: bool,
    pub reference_dt: Option<f64>,
    /// Records wall-clock runtimes; otherwise `runtime_ms` is written as 0.
    pub timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Example1,
            nu: None,
            t_final: None,
            resolution: None,
            paper_scale: false,
            methods: vec!["Strang".into()],
            h: Vec::new(),
            substeps: DEFAULT_SUBSTEPS,
            output: None,
            workers: 1,
            closure: BoundaryClosure::default(),
            ghost: GhostFill::default(),
            dealias: false,
            project_real: true,
            reference_dt: None,
            timings: false,
        }
    }
}

impl ExperimentConfig {
    pub fn for_preset(preset: Preset) -> Self {
        Self {
            preset,
            ..Self::default()
        }
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "preset" => self.preset = v.parse().map_err(|e| Error::config(key, e))?,
            "nu" => self.nu = Some(parse_num(key, v)?),
            "t_final" => self.t_final = Some(parse_step(v).map_err(|_| {
                Error::config(key, format!("cannot parse final time `{v}`"))
            })?),
            "resolution" => self.resolution = Some(parse_num(key, v)?),
            "paper_scale" => self.paper_scale = parse_bool(key, v)?,
            "methods" => self.methods = split_list(v),
            "h" => self.h = split_list(v),
            "substeps" => self.substeps = parse_num(key, v)?,
            "output" => self.output = Some(v.to_string()),
            "workers" => self.workers = parse_num(key, v)?,
            "closure" => {
                self.closure = match v.to_ascii_lowercase().as_str() {
                    "six" | "six-point" | "sixpoint" => BoundaryClosure::SixPoint,
                    "five" | "five-point" | "fivepoint" => BoundaryClosure::FivePoint,
                    _ => return Err(Error::config(key, format!("unknown closure `{v}`"))),
                }
            }
            "ghost" => {
                self.ghost = match v.to_ascii_lowercase().as_str() {
                    "odd" | "odd-reflection" | "reflect" => GhostFill::OddReflection,
                    "zero" => GhostFill::Zero,
                    _ => return Err(Error::config(key, format!("unknown ghost fill `{v}`"))),
                }
            }
            "dealias" => self.dealias = parse_bool(key, v)?,
            "project_real" => self.project_real = parse_bool(key, v)?,
            "reference_dt" => self.reference_dt = Some(parse_num(key, v)?),
            "timings" => self.timings = parse_bool(key, v)?,
            _ => {
                return Err(Error::config(
                    key,
                    format!("unknown key (accepted: {})", CONFIG_KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Parses a flat `key = value` file; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn problem(&self) -> ProblemSpec<f64> {
        let mut p = ProblemSpec::preset(self.preset, self.paper_scale);
        if let Some(nu) = self.nu {
            p.nu = nu;
        }
        if let Some(t) = self.t_final {
            p.t_final = t;
        }
        if let Some(r) = self.resolution {
            p.resolution = r;
        }
        if let Some(dt) = self.reference_dt {
            p.reference_dt = dt;
        }
        p.closure = self.closure;
        p.ghost = self.ghost;
        p.dealias = self.dealias;
        p
    }

    pub fn resolved_methods(&self) -> Result<Vec<Method<f64>>> {
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        self.methods
            .iter()
            .map(|m| Method::by_name(m).map_err(|e| Error::config("methods", e)))
            .collect()
    }

    pub fn step_sizes(&self) -> Result<Vec<f64>> {
        if self.h.is_empty() {
            self.preset.default_h_values().iter().map(|s| parse_step(s)).collect()
        } else {
            self.h.iter().map(|s| parse_step(s)).collect()
        }
    }

    /// Checks everything that can be checked without integrating.
    pub fn validate(&self) -> Result<()> {
        let problem = self.problem();
        problem.validate()?;
        if self.substeps == 0 {
            return Err(Error::config("substeps", "must be at least 1"));
        }
        for m in self.resolved_methods()? {
            if problem.boundary == GridKind::Dirichlet && !m.real_coefficients_only() {
                return Err(Error::StabilityGuard {
                    scheme: m.name().to_string(),
                    backend: "dirichlet",
                });
            }
        }
        for h in self.step_sizes()? {
            step_count(problem.t_final, h)?;
        }
        Ok(())
    }

    /// Validates, runs the study and collects the report.
    pub fn run(&self) -> Result<ConvergenceReport> {
        self.validate()?;
        let problem = self.problem();
        let study = convergence_study(
            &problem,
            &self.resolved_methods()?,
            &self.step_sizes()?,
            &StudyOptions {
                substeps: self.substeps,
                project_real: self.project_real,
                workers: self.workers,
            },
        )?;
        let mut report = ConvergenceReport::default();
        for cell in study.cells {
            match cell.outcome {
                Ok(r) => report.rows.push(ReportRow {
                    method: cell.method,
                    h: cell.h,
                    work: r.work,
                    error_inf: r.error_inf.unwrap_or(f64::NAN),
                    runtime_ms: if self.timings {
                        r.runtime.as_secs_f64() * 1e3
                    } else {
                        0.0
                    },
                }),
                Err(reason) => report.failures.push(CellFailure {
                    method: cell.method,
                    h: cell.h,
                    reason,
                }),
            }
        }
        report.slopes = study
            .slopes
            .into_iter()
            .filter_map(|(m, s)| s.map(|s| (m, s)))
            .collect();
        report.normalize();
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub h: f64,
    pub work: u64,
    pub error_inf: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub method: String,
    pub h: f64,
    pub reason: String,
}

/// Error-versus-work table of a study.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub slopes: Vec<(String, f64)>,
    pub failures: Vec<CellFailure>,
}

impl ConvergenceReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorts rows by method, then by decreasing `h`.
    pub fn normalize(&mut self) {
        self.rows.sort_by(|a, b| {
            a.method
                .cmp(&b.method)
                .then(b.h.partial_cmp(&a.h).unwrap_or(std::cmp::Ordering::Equal))
        });
        self.slopes.sort_by(|a, b| a.0.cmp(&b.0));
        self.failures.sort_by(|a, b| {
            a.method
                .cmp(&b.method)
                .then(b.h.partial_cmp(&a.h).unwrap_or(std::cmp::Ordering::Equal))
        });
    }

    pub fn slope(&self, method: &str) -> Option<f64> {
        self.slopes.iter().find(|s| s.0 == method).map(|s| s.1)
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// Refits every slope from the stored rows.
    pub fn recompute_slopes(&self) -> Vec<(String, Option<f64>)> {
        let mut names: Vec<&str> = self.rows.iter().map(|r| r.method.as_str()).collect();
        names.dedup();
        names
            .into_iter()
            .map(|m| {
                let pts: Vec<(f64, f64)> = self.rows_for(m).map(|r| (r.h, r.error_inf)).collect();
                (m.to_string(), fit_slope(&pts, SLOPE_WINDOW))
            })
            .collect()
    }

    /// CSV text; numbers carry 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        if self.is_empty() {
            return Err(Error::config("output", "refusing to write an empty report"));
        }
        let mut sorted = self.clone();
        sorted.normalize();
        let mut out = String::new();
        out.push_str(REPORT_HEADER);
        out.push('\n');
        for r in &sorted.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{},{:.16e},{:.16e}",
                r.method, r.h, r.work, r.error_inf, r.runtime_ms
            );
        }
        for f in &sorted.failures {
            let reason = f.reason.replace('\n', " ");
            let _ = writeln!(out, "# failed method={} h={:.16e} reason={}", f.method, f.h, reason);
        }
        for (m, s) in &sorted.slopes {
            let _ = writeln!(out, "# slope method={m} value={s:.16e}");
        }
        Ok(out)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::config(format!("line {line}"), msg);
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == REPORT_HEADER => {}
            _ => return Err(bad(1, "missing report header")),
        }
        let mut report = ConvergenceReport::default();
        for (i, line) in lines {
            let n = i + 1;
            if let Some(rest) = line.strip_prefix("# slope ") {
                let (m, v) = rest
                    .strip_prefix("method=")
                    .and_then(|r| r.split_once(" value="))
                    .ok_or_else(|| bad(n, "malformed slope line"))?;
                let v = v.parse::<f64>().map_err(|_| bad(n, "malformed slope value"))?;
                report.slopes.push((m.to_string(), v));
            } else if let Some(rest) = line.strip_prefix("# failed ") {
                let (m, rest) = rest
                    .strip_prefix("method=")
                    .and_then(|r| r.split_once(" h="))
                    .ok_or_else(|| bad(n, "malformed failure line"))?;
                let (h, reason) = rest
                    .split_once(" reason=")
                    .ok_or_else(|| bad(n, "malformed failure line"))?;
                report.failures.push(CellFailure {
                    method: m.to_string(),
                    h: h.parse().map_err(|_| bad(n, "malformed step"))?,
                    reason: reason.to_string(),
                });
            } else if line.starts_with('#') || line.trim().is_empty() {
                continue;
            } else {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 5 {
                    return Err(bad(n, "expected five columns"));
                }
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "malformed number"));
                report.rows.push(ReportRow {
                    method: f[0].to_string(),
                    h: num(f[1])?,
                    work: f[2].parse().map_err(|_| bad(n, "malformed work count"))?,
                    error_inf: num(f[3])?,
                    runtime_ms: num(f[4])?,
                });
            }
        }
        Ok(report)
    }
}

/// Writes the report to `path`.
pub fn emit_report(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let text = report.to_csv()?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_report(path: &Path) -> Result<ConvergenceReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    ConvergenceReport::parse_csv(&text)
}
