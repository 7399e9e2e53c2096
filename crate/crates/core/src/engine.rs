//! Composition of sub-flows into splitting and extrapolation steps, time
//! integration to a final time, and convergence studies.

use std::time::{Duration, Instant};

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{hopf_cole_coefficients, sample_exact, QuadratureSpec, DEFAULT_TERMS};
use crate::fd::{build_diffusion_matrix, fd_diffusion_flow, DiffusionMatrix, DirichletGrid, ExpCache};
use crate::field::{Field, GridKind};
use crate::problem::{ProblemSpec, DEFAULT_REFERENCE_DT};
use crate::scalar::Real;
use crate::schemes::{ExtrapolationRule, Method, Pattern, SplittingScheme};
use crate::spectral::{reference_solve_periodic, PeriodicGrid, SpectralField, SpectralOps};
use crate::weno::WenoSolver;
use crate::work::WorkCounter;

/// Default number of internal RK4 steps per conservation sub-flow.
pub const DEFAULT_SUBSTEPS: usize = 5;
/// Relative tolerance on `T/h` being an integer.
pub const DIVISIBILITY_TOLERANCE: f64 = 1e-9;
/// Error window used for slope fits.
pub const SLOPE_WINDOW: (f64, f64) = (1e-12, 1e-1);
/// Rows needed before a slope is reported.
pub const MIN_SLOPE_ROWS: usize = 3;

/// A spatial discretization exposing the two sub-flows.
///
/// `flow_a` advances the conservation law by a real time and counts one
/// evaluation; `flow_b` advances the diffusion equation by a possibly complex
/// time.
pub trait SplitBackend<T: Real>: Sync {
    type State: Clone + Send;

    fn name(&self) -> &'static str;
    fn supports_complex_time(&self) -> bool;
    fn load(&self, field: &Field<T>) -> Result<Self::State>;
    fn store(&self, state: &Self::State, time: T) -> Result<Field<T>>;
    fn flow_a(&self, state: &Self::State, tau: T, work: &WorkCounter) -> Result<Self::State>;
    fn flow_b(&self, state: &Self::State, tau: Complex<T>) -> Result<Self::State>;
    fn project_real(&self, state: &Self::State) -> Self::State;
    fn combine(&self, terms: &[(T, &Self::State)]) -> Self::State;
}

/// Fourier pseudospectral backend on the periodic grid.
#[derive(Debug, Clone)]
pub struct PeriodicBackend<T: Real> {
    pub ops: SpectralOps<T>,
    pub nu: T,
    pub substeps: usize,
}

impl<T: Real> PeriodicBackend<T> {
    pub fn new(n: usize, nu: T, substeps: usize) -> Result<Self> {
        Ok(Self {
            ops: SpectralOps::new(PeriodicGrid::new(n)?),
            nu,
            substeps,
        })
    }
}

impl<T: Real> SplitBackend<T> for PeriodicBackend<T> {
    type State = SpectralField<T>;

    fn name(&self) -> &'static str {
        "periodic"
    }

    fn supports_complex_time(&self) -> bool {
        true
    }

    fn load(&self, field: &Field<T>) -> Result<Self::State> {
        self.ops.forward_dft(field)
    }

    fn store(&self, state: &Self::State, time: T) -> Result<Field<T>> {
        Ok(self.ops.inverse_dft(state)?.with_time(time))
    }

    fn flow_a(&self, state: &Self::State, tau: T, work: &WorkCounter) -> Result<Self::State> {
        self.ops
            .conservation_flow(state, Complex::new(tau, T::zero()), self.substeps, work)
    }

    fn flow_b(&self, state: &Self::State, tau: Complex<T>) -> Result<Self::State> {
        self.ops.diffusion_flow(state, self.nu, tau)
    }

    fn project_real(&self, state: &Self::State) -> Self::State {
        self.ops.project_real(state)
    }

    fn combine(&self, terms: &[(T, &Self::State)]) -> Self::State {
        SpectralField::linear_combination(terms)
    }
}

/// Finite-difference diffusion with WENO5 conservation on `[0, 1]`.
#[derive(Debug)]
pub struct DirichletBackend<T: Real> {
    pub matrix: DiffusionMatrix<T>,
    pub cache: ExpCache<T>,
    pub weno: WenoSolver<T>,
    pub nu: T,
}

impl<T: Real> DirichletBackend<T> {
    /// Builds the Laplacian and rejects it unless its exponential contracts.
    pub fn new(problem: &ProblemSpec<T>, substeps: usize) -> Result<Self> {
        if problem.resolution < crate::problem::MIN_DIRICHLET_D {
            return Err(Error::GridTooSmall(format!(
                "Dirichlet backend needs D ≥ {}, got {}",
                crate::problem::MIN_DIRICHLET_D,
                problem.resolution
            )));
        }
        let grid = DirichletGrid::new(problem.resolution)?;
        let matrix = build_diffusion_matrix(&grid, problem.closure)?;
        matrix.check_contractive()?;
        Ok(Self {
            matrix,
            cache: ExpCache::new(),
            weno: WenoSolver::new(grid, substeps).with_ghost(problem.ghost),
            nu: problem.nu,
        })
    }
}

impl<T: Real> SplitBackend<T> for DirichletBackend<T> {
    type State = Vec<T>;

    fn name(&self) -> &'static str {
        "dirichlet"
    }

    fn supports_complex_time(&self) -> bool {
        false
    }

    fn load(&self, field: &Field<T>) -> Result<Self::State> {
        if !field.is_real() {
            return Err(Error::BackendIncompatible(
                "the Dirichlet backend stores real states only".into(),
            ));
        }
        if field.len() != self.matrix.grid().len() {
            return Err(Error::Dimension {
                expected: self.matrix.grid().len(),
                found: field.len(),
            });
        }
        Ok(field.real_part())
    }

    fn store(&self, state: &Self::State, time: T) -> Result<Field<T>> {
        Ok(Field::from_real(state, GridKind::Dirichlet).with_time(time))
    }

    fn flow_a(&self, state: &Self::State, tau: T, work: &WorkCounter) -> Result<Self::State> {
        self.weno.flow(state, tau, work)
    }

    fn flow_b(&self, state: &Self::State, tau: Complex<T>) -> Result<Self::State> {
        if tau.im != T::zero() {
            return Err(Error::BackendIncompatible(format!(
                "complex diffusion time {tau} on the Dirichlet backend"
            )));
        }
        fd_diffusion_flow(state, self.nu, tau.re, &self.matrix, &self.cache)
    }

    fn project_real(&self, state: &Self::State) -> Self::State {
        state.clone()
    }

    fn combine(&self, terms: &[(T, &Self::State)]) -> Self::State {
        let mut out = vec![T::zero(); terms.first().map_or(0, |t| t.1.len())];
        for (w, s) in terms {
            for (o, &v) in out.iter_mut().zip(s.iter()) {
                *o += *w * v;
            }
        }
        out
    }
}

/// One sub-flow application with its effective time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubFlow<T> {
    A(T),
    B(Complex<T>),
}

/// The sub-flows of one step in application order.
pub fn composition<T: Real>(scheme: &SplittingScheme<T>, h: T) -> Vec<SubFlow<T>> {
    let (a, b) = (&scheme.a, &scheme.b);
    let mut out = Vec::with_capacity(a.len() + b.len());
    match scheme.pattern {
        Pattern::Bab => {
            for (i, &bi) in b.iter().enumerate() {
                out.push(SubFlow::B(bi * h));
                if let Some(&ai) = a.get(i) {
                    out.push(SubFlow::A(ai * h));
                }
            }
        }
        Pattern::Aba => {
            for (i, &ai) in a.iter().enumerate() {
                out.push(SubFlow::A(ai * h));
                if let Some(&bi) = b.get(i) {
                    out.push(SubFlow::B(bi * h));
                }
            }
        }
    }
    out
}

/// `n` base steps of size `h/n` with adjacent diffusion flows fused.
pub fn merged_substeps<T: Real>(base: &SplittingScheme<T>, h: T, n: usize) -> Vec<SubFlow<T>> {
    let sub = h / T::from_usize_lossy(n);
    let mut out: Vec<SubFlow<T>> = Vec::new();
    for _ in 0..n {
        for op in composition(base, sub) {
            match (out.last_mut(), op) {
                (Some(SubFlow::B(prev)), SubFlow::B(t)) => *prev += t,
                _ => out.push(op),
            }
        }
    }
    out
}

fn apply_flows<T: Real, B: SplitBackend<T>>(
    backend: &B,
    state: &B::State,
    flows: &[SubFlow<T>],
    work: &WorkCounter,
) -> Result<B::State> {
    let mut s = state.clone();
    for op in flows {
        s = match *op {
            SubFlow::A(t) => backend.flow_a(&s, t, work)?,
            SubFlow::B(t) => backend.flow_b(&s, t)?,
        };
    }
    Ok(s)
}

fn guard<T: Real, B: SplitBackend<T>>(backend: &B, method: &Method<T>) -> Result<()> {
    if !method.real_coefficients_only() && !backend.supports_complex_time() {
        return Err(Error::StabilityGuard {
            scheme: method.name().to_string(),
            backend: backend.name(),
        });
    }
    Ok(())
}

/// One step of a splitting scheme, optionally projected to its real part.
pub fn split_step<T: Real, B: SplitBackend<T>>(
    backend: &B,
    state: &B::State,
    scheme: &SplittingScheme<T>,
    h: T,
    project_real: bool,
    work: &WorkCounter,
) -> Result<B::State> {
    guard(backend, &Method::Splitting(scheme.clone()))?;
    let s = apply_flows(backend, state, &composition(scheme, h), work)?;
    Ok(if project_real { backend.project_real(&s) } else { s })
}

/// One Richardson-extrapolated step: the weighted sum of the base method
/// applied `n_j` times with step `h/n_j`.
pub fn extrapolated_step<T: Real, B: SplitBackend<T>>(
    backend: &B,
    state: &B::State,
    rule: &ExtrapolationRule,
    base: &SplittingScheme<T>,
    h: T,
    project_real: bool,
    work: &WorkCounter,
) -> Result<B::State> {
    guard(backend, &Method::Splitting(base.clone()))?;
    let weights = rule.weights::<T>();
    let results = rule
        .terms
        .iter()
        .map(|term| apply_flows(backend, state, &merged_substeps(base, h, term.substeps), work))
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<(T, &B::State)> = weights.iter().copied().zip(results.iter()).collect();
    let s = backend.combine(&terms);
    Ok(if project_real { backend.project_real(&s) } else { s })
}

/// Dispatches one step of either kind of method.
pub fn method_step<T: Real, B: SplitBackend<T>>(
    backend: &B,
    state: &B::State,
    method: &Method<T>,
    h: T,
    project_real: bool,
    work: &WorkCounter,
) -> Result<B::State> {
    match method {
        Method::Splitting(s) => split_step(backend, state, s, h, project_real, work),
        Method::Extrapolated { rule, base } => {
            extrapolated_step(backend, state, rule, base, h, project_real, work)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig<T> {
    pub method: Method<T>,
    pub h: T,
    pub substeps: usize,
    pub project_real: bool,
}

impl<T: Real> StepperConfig<T> {
    pub fn new(method: Method<T>, h: T) -> Self {
        Self {
            method,
            h,
            substeps: DEFAULT_SUBSTEPS,
            project_real: true,
        }
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_projection(mut self, project_real: bool) -> Self {
        self.project_real = project_real;
        self
    }
}

/// Number of steps of size `h` in `t_final`, or a configuration error.
pub fn step_count<T: Real>(t_final: T, h: T) -> Result<usize> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::config("h", format!("step size must be positive, got {h}")));
    }
    let ratio = t_final.to_f64_lossy() / h.to_f64_lossy();
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > DIVISIBILITY_TOLERANCE * ratio.max(1.0) {
        return Err(Error::config(
            "h",
            format!("step {h} does not divide the final time {t_final} (ratio {ratio})"),
        ));
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone)]
pub struct RunResult<T> {
    pub field: Field<T>,
    /// Infinity-norm error against the reference, when one exists.
    pub error_inf: Option<T>,
    /// Conservation sub-flow evaluations.
    pub work: u64,
    pub steps: usize,
    pub wall_time: Duration,
}

fn run_steps<T: Real, B: SplitBackend<T>>(
    backend: &B,
    u0: &Field<T>,
    config: &StepperConfig<T>,
    steps: usize,
) -> Result<(Field<T>, u64)> {
    guard(backend, &config.method)?;
    let work = WorkCounter::new();
    let mut state = backend.load(u0)?;
    for _ in 0..steps {
        state = method_step(backend, &state, &config.method, config.h, config.project_real, &work)?;
    }
    let mut field = backend.store(&state, T::from_usize_lossy(steps) * config.h)?;
    if config.project_real {
        field.project_real();
    }
    Ok((field, work.a_flows()))
}

/// Reference solution at the final time, or `None` when the problem has none.
pub fn reference_solution<T: Real>(problem: &ProblemSpec<T>) -> Result<Option<Vec<T>>> {
    problem.validate()?;
    match problem.boundary {
        GridKind::Periodic => {
            let ops = SpectralOps::new(PeriodicGrid::new(problem.resolution)?)
                .with_dealias(problem.dealias);
            let dt = if problem.reference_dt > T::zero() {
                problem.reference_dt
            } else {
                T::lit(DEFAULT_REFERENCE_DT)
            };
            let dt = dt.min(problem.t_final);
            let u0 = problem.initial_field()?;
            let u = reference_solve_periodic(&ops, &u0, problem.nu, problem.t_final, dt)?;
            Ok(Some(u.real_part()))
        }
        GridKind::Dirichlet => match problem.preset_kind().and_then(|p| p.exact()) {
            Some(example) => {
                let series = hopf_cole_coefficients(
                    example,
                    problem.nu,
                    DEFAULT_TERMS,
                    &QuadratureSpec::default(),
                )?;
                Ok(Some(sample_exact(&series, &problem.nodes()?, problem.t_final)?))
            }
            None => Ok(None),
        },
    }
}

fn check_method<T: Real>(problem: &ProblemSpec<T>, method: &Method<T>) -> Result<()> {
    if problem.boundary == GridKind::Dirichlet && !method.real_coefficients_only() {
        return Err(Error::StabilityGuard {
            scheme: method.name().to_string(),
            backend: "dirichlet",
        });
    }
    Ok(())
}

/// Runs with a precomputed reference.
pub fn integrate_against<T: Real>(
    problem: &ProblemSpec<T>,
    config: &StepperConfig<T>,
    reference: Option<&[T]>,
) -> Result<RunResult<T>> {
    problem.validate()?;
    check_method(problem, &config.method)?;
    let steps = step_count(problem.t_final, config.h)?;
    let u0 = problem.initial_field()?;
    let start = Instant::now();
    let (field, work) = match problem.boundary {
        GridKind::Periodic => {
            let mut backend = PeriodicBackend::new(problem.resolution, problem.nu, config.substeps)?;
            backend.ops = backend.ops.with_dealias(problem.dealias);
            run_steps(&backend, &u0, config, steps)?
        }
        GridKind::Dirichlet => {
            let backend = DirichletBackend::new(problem, config.substeps)?;
            run_steps(&backend, &u0, config, steps)?
        }
    };
    let wall_time = start.elapsed();
    let error_inf = reference.map(|r| field.max_abs_diff(r)).transpose()?;
    Ok(RunResult {
        field,
        error_inf,
        work,
        steps,
        wall_time,
    })
}

/// Integrates `problem` to its final time and measures the error.
pub fn integrate<T: Real>(problem: &ProblemSpec<T>, config: &StepperConfig<T>) -> Result<RunResult<T>> {
    problem.validate()?;
    check_method(problem, &config.method)?;
    step_count(problem.t_final, config.h)?;
    let reference = reference_solution(problem)?;
    integrate_against(problem, config, reference.as_deref())
}

/// One `(method, h)` cell of a study.
#[derive(Debug, Clone)]
pub struct StudyCell {
    pub method: String,
    pub h: f64,
    pub outcome: std::result::Result<CellResult, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResult {
    pub work: u64,
    pub error_inf: Option<f64>,
    pub runtime: Duration,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub cells: Vec<StudyCell>,
    /// Least-squares slope of `log(error)` against `log(h)` per method.
    pub slopes: Vec<(String, Option<f64>)>,
}

#[derive(Debug, Clone, Copy)]
pub struct StudyOptions {
    pub substeps: usize,
    pub project_real: bool,
    /// Worker threads; `0` or `1` evaluates the cells sequentially.
    pub workers: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            substeps: DEFAULT_SUBSTEPS,
            project_real: true,
            workers: 1,
        }
    }
}

/// Least-squares slope through the points whose error lies in `window`.
pub fn fit_slope(points: &[(f64, f64)], window: (f64, f64)) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| *h > 0.0 && e.is_finite() && *e >= window.0 && *e <= window.1)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < MIN_SLOPE_ROWS {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs every `(method, h)` pair; failures are recorded per cell.
pub fn convergence_study<T: Real>(
    problem: &ProblemSpec<T>,
    methods: &[Method<T>],
    h_values: &[T],
    options: &StudyOptions,
) -> Result<StudyResult> {
    if methods.is_empty() {
        return Err(Error::config("methods", "at least one method is required"));
    }
    if h_values.is_empty() {
        return Err(Error::config("h", "at least one step size is required"));
    }
    problem.validate()?;
    for m in methods {
        check_method(problem, m)?;
    }
    for &h in h_values {
        step_count(problem.t_final, h)?;
    }
    let reference = reference_solution(problem)?;
    let jobs: Vec<(&Method<T>, T)> = methods
        .iter()
        .flat_map(|m| h_values.iter().map(move |&h| (m, h)))
        .collect();
    let run = |(m, h): &(&Method<T>, T)| -> StudyCell {
        let config = StepperConfig {
            method: (*m).clone(),
            h: *h,
            substeps: options.substeps,
            project_real: options.project_real,
        };
        let outcome = integrate_against(problem, &config, reference.as_deref())
            .map(|r| CellResult {
                work: r.work,
                error_inf: r.error_inf.map(|e| e.to_f64_lossy()),
                runtime: r.wall_time,
            })
            .map_err(|e| e.to_string());
        StudyCell {
            method: m.name().to_string(),
            h: h.to_f64_lossy(),
            outcome,
        }
    };
    let cells: Vec<StudyCell> = if options.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::config("workers", e))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    } else {
        jobs.iter().map(run).collect()
    };
    let slopes = methods
        .iter()
        .map(|m| {
            let pts: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| c.method == m.name())
                .filter_map(|c| match &c.outcome {
                    Ok(CellResult {
                        error_inf: Some(e), ..
                    }) => Some((c.h, *e)),
                    _ => None,
                })
                .collect();
            (m.name().to_string(), fit_slope(&pts, SLOPE_WINDOW))
        })
        .collect();
    Ok(StudyResult { cells, slopes })
}

/// Test backend with the identity as conservation flow, for checking
/// composition bookkeeping in isolation.
#[derive(Debug, Clone)]
pub struct DiffusionOnly<T: Real> {
    pub inner: PeriodicBackend<T>,
}

impl<T: Real> SplitBackend<T> for DiffusionOnly<T> {
    type State = SpectralField<T>;

    fn name(&self) -> &'static str {
        "diffusion-only"
    }

    fn supports_complex_time(&self) -> bool {
        true
    }

    fn load(&self, field: &Field<T>) -> Result<Self::State> {
        self.inner.load(field)
    }

    fn store(&self, state: &Self::State, time: T) -> Result<Field<T>> {
        self.inner.store(state, time)
    }

    fn flow_a(&self, state: &Self::State, _tau: T, work: &WorkCounter) -> Result<Self::State> {
        work.record_a_flow();
        Ok(state.clone())
    }

    fn flow_b(&self, state: &Self::State, tau: Complex<T>) -> Result<Self::State> {
        self.inner.flow_b(state, tau)
    }

    fn project_real(&self, state: &Self::State) -> Self::State {
        self.inner.project_real(state)
    }

    fn combine(&self, terms: &[(T, &Self::State)]) -> Self::State {
        self.inner.combine(terms)
    }
}

impl<T: Real> DiffusionOnly<T> {
    /// Total effective diffusion time of a composition.
    pub fn total_time(flows: &[SubFlow<T>]) -> Complex<T> {
        flows.iter().fold(Complex::zero(), |acc, f| match f {
            SubFlow::B(t) => acc + *t,
            SubFlow::A(_) => acc,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Preset;
    use crate::schemes::{builtin_extrapolation, builtin_scheme, SCHEME_NAMES};

    fn example1() -> ProblemSpec<f64> {
        ProblemSpec::preset(Preset::Example1, false)
    }

    fn backend(nu: f64) -> PeriodicBackend<f64> {
        PeriodicBackend::new(128, nu, DEFAULT_SUBSTEPS).unwrap()
    }

    fn max_diff(a: &Field<f64>, b: &Field<f64>) -> f64 {
        a.max_abs_diff(&b.real_part()).unwrap()
    }

    #[test]
    fn strang_composition_order() {
        let s = builtin_scheme::<f64>("Strang").unwrap();
        let c = composition(&s, 0.2);
        assert_eq!(
            c,
            vec![
                SubFlow::B(Complex::new(0.1, 0.0)),
                SubFlow::A(0.2),
                SubFlow::B(Complex::new(0.1, 0.0))
            ]
        );
        let t = s.transposed().unwrap();
        assert_eq!(
            composition(&t, 0.2),
            vec![SubFlow::A(0.1), SubFlow::B(Complex::new(0.2, 0.0)), SubFlow::A(0.1)]
        );
    }

    #[test]
    fn merged_substeps_fuse_interfaces() {
        let s = builtin_scheme::<f64>("Strang").unwrap();
        let m = merged_substeps(&s, 0.3, 3);
        let a_count = m.iter().filter(|f| matches!(f, SubFlow::A(_))).count();
        assert_eq!(a_count, 3);
        assert_eq!(m.len(), 7);
        if let SubFlow::B(t) = m[2] {
            assert!((t.re - 0.1).abs() < 1e-15);
        } else {
            panic!("expected a fused diffusion flow");
        }
        assert!((DiffusionOnly::total_time(&m).re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn work_per_step_matches_stage_count() {
        let expected = [
            ("Strang", 1),
            ("ML62", 3),
            ("RC4", 4),
            ("O4", 4),
            ("SM4", 4),
            ("SM64", 6),
            ("EXT4", 3),
            ("EXT6", 6),
        ];
        let b = DiffusionOnly { inner: backend(0.03) };
        let u0 = b.load(&example1().initial_field().unwrap()).unwrap();
        for (name, per_step) in expected {
            let m = Method::<f64>::by_name(name).unwrap();
            assert_eq!(m.a_evals_per_step(), per_step, "{name}");
            let work = WorkCounter::new();
            let mut s = u0.clone();
            for _ in 0..7 {
                s = method_step(&b, &s, &m, 0.1, true, &work).unwrap();
            }
            assert_eq!(work.a_flows(), 7 * per_step as u64, "{name}");
        }
    }

    #[test]
    fn diffusion_only_steps_equal_total_diffusion() {
        let b = DiffusionOnly { inner: backend(0.03) };
        let u0 = b.load(&example1().initial_field().unwrap()).unwrap();
        let h = 0.25;
        let exact = b.inner.flow_b(&u0, Complex::new(h, 0.0)).unwrap();
        let exact = b.store(&exact, h).unwrap();
        for name in SCHEME_NAMES.iter().chain(["EXT4", "EXT6"].iter()) {
            let m = Method::<f64>::by_name(name).unwrap();
            let s = method_step(&b, &u0, &m, h, true, &WorkCounter::new()).unwrap();
            let f = b.store(&s, h).unwrap();
            assert!(max_diff(&f, &exact) < 1e-13, "{name}");
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let b = backend(0.03);
        let u0 = b.load(&example1().initial_field().unwrap()).unwrap();
        let f0 = b.store(&u0, 0.0).unwrap();
        for name in SCHEME_NAMES.iter().chain(["EXT4", "EXT6"].iter()) {
            let m = Method::<f64>::by_name(name).unwrap();
            let s = method_step(&b, &u0, &m, 0.0, true, &WorkCounter::new()).unwrap();
            assert!(max_diff(&b.store(&s, 0.0).unwrap(), &f0) < 1e-14, "{name}");
        }
    }

    #[test]
    fn strang_local_error_is_third_order() {
        let p = example1();
        let b = backend(0.03);
        let strang = builtin_scheme::<f64>("Strang").unwrap();
        let u0 = p.initial_field().unwrap();
        let err = |h: f64| {
            let s = split_step(&b, &b.load(&u0).unwrap(), &strang, h, true, &WorkCounter::new())
                .unwrap();
            let r = reference_solve_periodic(&b.ops, &u0, 0.03, h, 1e-4).unwrap();
            max_diff(&b.store(&s, h).unwrap(), &r)
        };
        let ratio = err(0.1) / err(0.05);
        assert!((6.5..=9.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn adjoint_of_palindromic_scheme_coincides() {
        let b = backend(0.03);
        let u0 = b.load(&example1().initial_field().unwrap()).unwrap();
        for name in SCHEME_NAMES {
            let s = builtin_scheme::<f64>(name).unwrap();
            let w = WorkCounter::new();
            let x = split_step(&b, &u0, &s, 0.1, true, &w).unwrap();
            let y = split_step(&b, &u0, &s.reversed(), 0.1, true, &w).unwrap();
            let d = max_diff(&b.store(&x, 0.1).unwrap(), &b.store(&y, 0.1).unwrap());
            assert!(d < 1e-12, "{name}: {d}");
        }
    }

    #[test]
    fn projection_is_a_no_op_for_real_schemes() {
        let p = example1();
        for name in ["Strang", "ML62", "EXT4"] {
            let m = Method::<f64>::by_name(name).unwrap();
            let on = integrate_against(&p, &StepperConfig::new(m.clone(), p.t_final / 40.0), None)
                .unwrap();
            let off = integrate_against(
                &p,
                &StepperConfig::new(m, p.t_final / 40.0).with_projection(false),
                None,
            )
            .unwrap();
            assert!(on.field.is_real());
            assert!(off.field.max_imag() < 1e-13);
            assert!(max_diff(&on.field, &off.field) < 1e-13, "{name}");
        }
    }

    #[test]
    fn projected_complex_runs_are_real() {
        let p = example1();
        let m = Method::<f64>::by_name("RC4").unwrap();
        let r = integrate_against(&p, &StepperConfig::new(m.clone(), p.t_final / 20.0), None).unwrap();
        assert!(r.field.is_real());
        let raw = integrate_against(
            &p,
            &StepperConfig::new(m, p.t_final / 20.0).with_projection(false),
            None,
        )
        .unwrap();
        assert!(raw.field.max_imag() > 0.0);
    }

    #[test]
    fn integrate_is_deterministic_and_counts_work() {
        let p = example1();
        let m = Method::<f64>::by_name("Strang").unwrap();
        let h = std::f64::consts::TAU / 256.0;
        let r1 = integrate_against(&p, &StepperConfig::new(m.clone(), h), None).unwrap();
        let r2 = integrate_against(&p, &StepperConfig::new(m, h), None).unwrap();
        assert_eq!(r1.work, 256);
        assert_eq!(r1.steps, 256);
        assert_eq!(r1.field.real_part(), r2.field.real_part());
    }

    #[test]
    fn zero_data_has_zero_error() {
        let p = ProblemSpec::sampled(GridKind::Periodic, vec![0.0; 32], 0.1, 1.0);
        for name in ["Strang", "RC4", "EXT6"] {
            let m = Method::<f64>::by_name(name).unwrap();
            let r = integrate(&p, &StepperConfig::new(m, 0.25)).unwrap();
            assert_eq!(r.error_inf, Some(0.0), "{name}");
        }
    }

    #[test]
    fn indivisible_step_is_rejected() {
        let p = example1();
        let m = Method::<f64>::by_name("Strang").unwrap();
        let err = integrate_against(&p, &StepperConfig::new(m, 0.3), None).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "h"));
        assert!(step_count(1.0, 0.25).is_ok());
        assert!(step_count(1.0, 0.0).is_err());
    }

    #[test]
    fn complex_schemes_are_guarded_on_dirichlet() {
        let p = ProblemSpec::<f64>::preset(Preset::Example2, false).with_resolution(20);
        for name in ["RC4", "O4", "SM4", "SM64"] {
            let m = Method::<f64>::by_name(name).unwrap();
            let err = integrate_against(&p, &StepperConfig::new(m, 0.1), None).unwrap_err();
            assert!(matches!(err, Error::StabilityGuard { .. }), "{name}");
        }
        let b = DirichletBackend::new(&p, 5).unwrap();
        let s = builtin_scheme::<f64>("RC4").unwrap();
        let u0 = b.load(&p.initial_field().unwrap()).unwrap();
        let err = split_step(&b, &u0, &s, 0.1, true, &WorkCounter::new()).unwrap_err();
        assert!(matches!(err, Error::StabilityGuard { .. }));
    }

    #[test]
    fn dirichlet_strang_converges() {
        let p = ProblemSpec::<f64>::preset(Preset::Example2, false).with_resolution(40);
        let reference = reference_solution(&p).unwrap().unwrap();
        let m = Method::<f64>::by_name("Strang").unwrap();
        let e = |h: f64| {
            integrate_against(&p, &StepperConfig::new(m.clone(), h), Some(&reference))
                .unwrap()
                .error_inf
                .unwrap()
        };
        let (e1, e2) = (e(0.1), e(0.05));
        assert!(e2 < e1 && e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn extrapolation_weights_preserve_constants() {
        let b = DiffusionOnly { inner: backend(0.03) };
        let rule = builtin_extrapolation("EXT6").unwrap();
        let base = builtin_scheme::<f64>("Strang").unwrap();
        let c = Field::from_real(&[0.7; 128], GridKind::Periodic);
        let s = extrapolated_step(&b, &b.load(&c).unwrap(), &rule, &base, 0.5, true, &WorkCounter::new())
            .unwrap();
        assert!(b.store(&s, 0.5).unwrap().max_abs_diff(&[0.7; 128]).unwrap() < 1e-14);
    }

    #[test]
    fn slope_fit_window_and_minimum_rows() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| (h, 3.0 * h * h)).collect();
        assert!((fit_slope(&pts, SLOPE_WINDOW).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_slope(&pts[..2], SLOPE_WINDOW).is_none());
        let floor = [(0.1, 1e-13), (0.05, 1e-14), (0.025, 1e-15)];
        assert!(fit_slope(&floor, SLOPE_WINDOW).is_none());
    }

    #[test]
    fn study_records_cells_and_slopes() {
        let p = ProblemSpec::<f64>::preset(Preset::Example1, false)
            .with_resolution(32)
            .with_t_final(1.0);
        let methods = vec![Method::by_name("Strang").unwrap(), Method::by_name("RC4").unwrap()];
        let hs = [0.25, 0.125, 0.0625, 0.03125];
        let seq = convergence_study(&p, &methods, &hs, &StudyOptions::default()).unwrap();
        let par = convergence_study(
            &p,
            &methods,
            &hs,
            &StudyOptions {
                workers: 3,
                ..StudyOptions::default()
            },
        )
        .unwrap();
        assert_eq!(seq.cells.len(), 8);
        for (a, b) in seq.cells.iter().zip(&par.cells) {
            assert_eq!(a.method, b.method);
            let (a, b) = (a.outcome.as_ref().unwrap(), b.outcome.as_ref().unwrap());
            assert_eq!(a.error_inf, b.error_inf);
            assert_eq!(a.work, b.work);
        }
        let strang = seq.slopes[0].1.unwrap();
        assert!((strang - 2.0).abs() < 0.3, "{strang}");
    }

    #[test]
    fn single_precision_smoke() {
        let p = ProblemSpec::<f32>::preset(Preset::Example1, false).with_resolution(32);
        let m = Method::<f32>::by_name("RC4").unwrap();
        let r = integrate_against(&p, &StepperConfig::new(m, p.t_final / 32.0), None).unwrap();
        assert!(r.field.is_finite());
        assert_eq!(r.work, 128);
    }
}
