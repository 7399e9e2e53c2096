use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::Signed;

use burgers_split::engine::{integrate, StepperConfig};
use burgers_split::exact::{
    hopf_cole_coefficients_with, sample_exact, QuadratureSpec, DEFAULT_TERMS, DEFAULT_T_MIN,
};
use burgers_split::fd::DirichletGrid;
use burgers_split::harness::{emit_report, parse_step, ExperimentConfig};
use burgers_split::schemes::{builtin_extrapolation, builtin_schemes, EXTRAPOLATION_NAMES};
use burgers_split::{Error, Method, Preset, Result};

#[derive(Parser)]
#[command(name = "burgers-split", version, about = "Operator splitting for the viscous Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Splitting schemes and extrapolation rules.
    Schemes {
        #[command(subcommand)]
        action: SchemesAction,
    },
    /// Integrates one method at one step size and prints error and work.
    Run(RunArgs),
    /// Runs a convergence study and writes the CSV report.
    Converge(ConvergeArgs),
    /// Samples a Hopf–Cole exact solution as CSV.
    Exact(ExactArgs),
}

#[derive(Subcommand)]
enum SchemesAction {
    List,
}

/// Flags shared by `run` and `converge`; each one overrides the config key
/// of the same name.
#[derive(Args)]
struct ProblemArgs {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    #[arg(long)]
    resolution: Option<String>,
    /// Restores N = 512 and D = 500.
    #[arg(long = "paper-scale")]
    paper_scale: bool,
    #[arg(long)]
    substeps: Option<String>,
    #[arg(long)]
    closure: Option<String>,
    #[arg(long)]
    ghost: Option<String>,
    #[arg(long)]
    dealias: bool,
    #[arg(long = "no-projection")]
    no_projection: bool,
    #[arg(long = "reference-dt")]
    reference_dt: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    method: String,
    #[arg(long)]
    h: String,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated method names.
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated step sizes such as `2pi/40,2pi/80`.
    #[arg(long)]
    h: Option<String>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    workers: Option<String>,
    /// Records wall-clock runtimes instead of zeros.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, default_value = "example2")]
    example: String,
    #[arg(long, default_value_t = 0.1)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Number of interior sample points.
    #[arg(long, default_value_t = 500)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_TERMS)]
    terms: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ProblemArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let pairs = [
            ("preset", &self.preset),
            ("nu", &self.nu),
            ("t_final", &self.t_final),
            ("resolution", &self.resolution),
            ("substeps", &self.substeps),
            ("closure", &self.closure),
            ("ghost", &self.ghost),
            ("reference_dt", &self.reference_dt),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.paper_scale {
            cfg.paper_scale = true;
        }
        if self.dealias {
            cfg.dealias = true;
        }
        if self.no_projection {
            cfg.project_real = false;
        }
        Ok(cfg)
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn schemes_list() -> Result<()> {
    let mut out = String::new();
    out.push_str("name     pattern  stages  order  effective  coefficients\n");
    for s in builtin_schemes::<f64>() {
        let eff = s
            .effective_order
            .map_or_else(|| "-".to_string(), |(p1, p2)| format!("({p1},{p2})"));
        out.push_str(&format!(
            "{:<8} {:<8} {:<7} {:<6} {:<10} a = [{}]\n",
            s.name,
            s.pattern.to_string(),
            s.stages(),
            s.nominal_order,
            eff,
            s.a.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")
        ));
        out.push_str(&format!(
            "{:<52} b = [{}]\n",
            "",
            s.b.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")
        ));
    }
    for name in EXTRAPOLATION_NAMES {
        let rule = builtin_extrapolation(name)?;
        let mut terms = String::new();
        for (i, t) in rule.terms.iter().enumerate() {
            let negative = *t.weight.numer() < 0;
            let sign = match (i, negative) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            terms.push_str(&format!("{sign}{}·S(h/{})^{}", t.weight.abs(), t.substeps, t.substeps));
        }
        out.push_str(&format!(
            "{:<8} {:<8} {:<7} {:<6} {:<10} {} (Strang base)\n",
            rule.name,
            "extrap",
            rule.a_evals_per_step(1),
            rule.nominal_order(),
            "-",
            terms
        ));
    }
    write_output(None, &out)
}

fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = args.problem.config()?;
    cfg.set("methods", &args.method)?;
    cfg.set("h", &args.h)?;
    cfg.validate()?;
    let problem = cfg.problem();
    let method = Method::<f64>::by_name(&args.method).map_err(|e| Error::config("method", e))?;
    let h = parse_step(&args.h)?;
    let config = StepperConfig::new(method, h)
        .with_substeps(cfg.substeps)
        .with_projection(cfg.project_real);
    let r = integrate(&problem, &config)?;
    let error = r
        .error_inf
        .map_or_else(|| "none".to_string(), |e| format!("{e:.16e}"));
    write_output(
        None,
        &format!(
            "method={} h={:.16e} steps={} work_a_evals={} error_inf={}\n",
            config.method.name(),
            h,
            r.steps,
            r.work,
            error
        ),
    )
}

fn converge(args: &ConvergeArgs) -> Result<()> {
    let mut cfg = args.problem.config()?;
    if let Some(m) = &args.methods {
        cfg.set("methods", m)?;
    }
    if let Some(h) = &args.h {
        cfg.set("h", h)?;
    }
    if let Some(w) = &args.workers {
        cfg.set("workers", w)?;
    }
    if let Some(o) = &args.output {
        cfg.output = Some(o.display().to_string());
    }
    if args.timings {
        cfg.timings = true;
    }
    let report = cfg.run()?;
    for f in &report.failures {
        eprintln!("cell failed: method={} h={:e}: {}", f.method, f.h, f.reason);
    }
    match &cfg.output {
        Some(path) => emit_report(&report, path.as_ref())?,
        None => write_output(None, &report.to_csv()?)?,
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Evaluation(format!(
            "{} of {} cells failed",
            report.failures.len(),
            report.failures.len() + report.rows.len()
        )))
    }
}

fn exact(args: &ExactArgs) -> Result<()> {
    let preset: Preset = args.example.parse().map_err(|e| Error::config("example", e))?;
    let example = preset
        .exact()
        .ok_or_else(|| Error::config("example", format!("{preset} has no closed-form solution")))?;
    let series = hopf_cole_coefficients_with(
        example,
        args.nu,
        args.terms,
        &QuadratureSpec::default(),
        DEFAULT_T_MIN,
    )?;
    let nodes = DirichletGrid::<f64>::new(args.points)?.nodes();
    let mut xs = vec![0.0];
    xs.extend(nodes);
    xs.push(1.0);
    let u = sample_exact(&series, &xs, args.t)?;
    let mut out = String::from("x,u\n");
    for (x, v) in xs.iter().zip(u) {
        out.push_str(&format!("{x:.16e},{v:.16e}\n"));
    }
    write_output(args.output.as_ref(), &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Schemes {
            action: SchemesAction::List,
        } => schemes_list(),
        Command::Run(a) => run(a),
        Command::Converge(a) => converge(a),
        Command::Exact(a) => exact(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_kind().code() as u8)
        }
    }
}
