//! Closed-form Hopf–Cole solutions of the Dirichlet examples on `[0, 1]`:
//!
//! `u(x,t) = 2νπ · Σ c_n e^{−n²π²νt} n sin(nπx) / (c_0 + Σ c_n e^{−n²π²νt} cos(nπx))`
//!
//! with `c_0 = ∫ w`, `c_n = 2∫ w cos(nπx)` for the weight
//! `w(x) = exp(−(2ν)⁻¹ ∫₀ˣ u₀)` of the initial data.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Initial data with a printed Hopf–Cole series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactExample {
    /// `u₀ = sin(πx)/5`.
    Example2,
    /// `u₀ = x(1 − x)/2`.
    Example3,
}

impl ExactExample {
    /// Hopf–Cole weight `w(x)` at viscosity `nu`.
    pub fn weight<T: Real>(self, nu: T, x: T) -> T {
        match self {
            ExactExample::Example2 => {
                let pi = T::PI();
                (-(T::one() - (pi * x).cos()) / (T::lit(10.0) * pi * nu)).exp()
            }
            ExactExample::Example3 => {
                (-x * x * (T::lit(3.0) - T::lit(2.0) * x) / (T::lit(24.0) * nu)).exp()
            }
        }
    }

    pub fn initial<T: Real>(self, x: T) -> T {
        match self {
            ExactExample::Example2 => (T::PI() * x).sin() / T::lit(5.0),
            ExactExample::Example3 => T::lit(0.5) * x * (T::one() - x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    /// Adaptive bisection with Richardson-corrected Simpson panels.
    AdaptiveSimpson,
    /// Fixed composite Gauss–Legendre: `panels` panels of `points` nodes.
    GaussLegendre { panels: usize, points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub abs_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::AdaptiveSimpson,
            abs_tolerance: 1e-12,
            max_subdivisions: 1 << 20,
        }
    }
}

impl QuadratureSpec {
    /// 256-node composite Gauss–Legendre rule.
    pub fn gauss_legendre_256() -> Self {
        Self {
            rule: QuadratureRule::GaussLegendre {
                panels: 16,
                points: 16,
            },
            ..Self::default()
        }
    }

    pub fn integrate<T: Real>(&self, f: impl Fn(T) -> T, a: T, b: T) -> Result<T> {
        if !(self.abs_tolerance > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
        }
        match self.rule {
            QuadratureRule::AdaptiveSimpson => {
                adaptive_simpson(&f, a, b, T::lit(self.abs_tolerance), self.max_subdivisions)
            }
            QuadratureRule::GaussLegendre { panels, points } => {
                Ok(gauss_legendre(&f, a, b, panels, points))
            }
        }
    }
}

/// Adaptive Simpson quadrature with an explicit work stack. Fails with a
/// precision error once `max_subdivisions` intervals have been split.
pub fn adaptive_simpson<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    tol: T,
    max_subdivisions: usize,
) -> Result<T> {
    struct Panel<T> {
        a: T,
        b: T,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: T,
        depth: u32,
    }
    let half = T::lit(0.5);
    let six = T::lit(6.0);
    let simpson = |a: T, b: T, fa: T, fm: T, fb: T| (b - a) / six * (fa + T::lit(4.0) * fm + fb);
    let (fa, fb) = (f(a), f(b));
    let fm = f(half * (a + b));
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        tol,
        depth: 0,
    }];
    let mut total = T::zero();
    let mut splits = 0usize;
    let mut unresolved = T::zero();
    while let Some(p) = stack.pop() {
        let m = half * (p.a + p.b);
        let lm = half * (p.a + m);
        let rm = half * (m + p.b);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        // At least four bisection levels before a panel is accepted.
        if p.depth >= 4 && delta.abs() <= T::lit(15.0) * p.tol {
            total += left + right + delta / T::lit(15.0);
            continue;
        }
        splits += 1;
        if splits > max_subdivisions || p.depth > 60 {
            unresolved += delta.abs();
            total += left + right + delta / T::lit(15.0);
            continue;
        }
        let tol = p.tol * half;
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol,
            depth: p.depth + 1,
        });
    }
    if unresolved > tol {
        return Err(Error::Precision {
            achieved: unresolved.to_f64_lossy(),
            requested: tol.to_f64_lossy(),
        });
    }
    Ok(total)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

pub fn gauss_legendre<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, panels: usize, points: usize) -> T {
    let rule = gauss_legendre_nodes(points);
    let width = (b - a) / T::from_usize_lossy(panels);
    let half = T::lit(0.5) * width;
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + (T::from_usize_lossy(p) + T::lit(0.5)) * width;
        for &(x, w) in &rule {
            total += T::lit(w) * f(mid + half * T::lit(x));
        }
    }
    total * half
}

/// Truncated series data of one Hopf–Cole solution.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfColeSeries<T> {
    pub example: ExactExample,
    pub nu: T,
    pub c0: T,
    /// `c_1 … c_M`.
    pub c: Vec<T>,
    pub quadrature_tolerance: f64,
    /// Smallest time at which the truncation is certified.
    pub t_min: T,
}

/// Default series length.
pub const DEFAULT_TERMS: usize = 100;
/// Default smallest certified evaluation time.
pub const DEFAULT_T_MIN: f64 = 0.05;
/// Bound on the first neglected series term at `t_min`.
pub const TRUNCATION_TOLERANCE: f64 = 1e-16;

impl<T: Real> HopfColeSeries<T> {
    pub fn terms(&self) -> usize {
        self.c.len()
    }

    /// Bound on the first omitted term: `|c_n| ≤ 2 max w = 2`, damped by
    /// `exp(−(M+1)²π²ν t_min)`.
    pub fn tail_bound(&self) -> T {
        let m1 = T::from_usize_lossy(self.c.len() + 1);
        let pi = T::PI();
        T::lit(2.0) * (-(m1 * m1) * pi * pi * self.nu * self.t_min).exp()
    }
}

/// Computes `c_0, c_1 … c_M` by quadrature.
pub fn hopf_cole_coefficients<T: Real>(
    example: ExactExample,
    nu: T,
    terms: usize,
    quad: &QuadratureSpec,
) -> Result<HopfColeSeries<T>> {
    hopf_cole_coefficients_with(example, nu, terms, quad, T::lit(DEFAULT_T_MIN))
}

pub fn hopf_cole_coefficients_with<T: Real>(
    example: ExactExample,
    nu: T,
    terms: usize,
    quad: &QuadratureSpec,
    t_min: T,
) -> Result<HopfColeSeries<T>> {
    if !(nu > T::zero()) {
        return Err(Error::InvalidInput(format!("viscosity must be positive, got {nu}")));
    }
    if terms == 0 {
        return Err(Error::InvalidInput("series needs at least one term".into()));
    }
    let (zero, one) = (T::zero(), T::one());
    let c0 = quad.integrate(|x| example.weight(nu, x), zero, one)?;
    let pi = T::PI();
    let c = (1..=terms)
        .map(|n| {
            let nf = T::from_usize_lossy(n);
            quad.integrate(|x| example.weight(nu, x) * (nf * pi * x).cos(), zero, one)
                .map(|v| T::lit(2.0) * v)
        })
        .collect::<Result<Vec<T>>>()?;
    let series = HopfColeSeries {
        example,
        nu,
        c0,
        c,
        quadrature_tolerance: quad.abs_tolerance,
        t_min,
    };
    let tail = series.tail_bound().to_f64_lossy();
    if tail > TRUNCATION_TOLERANCE {
        return Err(Error::Precision {
            achieved: tail,
            requested: TRUNCATION_TOLERANCE,
        });
    }
    Ok(series)
}

/// Evaluates the truncated series ratio at `(x, t)`.
pub fn evaluate_exact<T: Real>(series: &HopfColeSeries<T>, x: T, t: T) -> Result<T> {
    if t < series.t_min {
        return Err(Error::Evaluation(format!(
            "t = {t} is below the certified minimum time {}",
            series.t_min
        )));
    }
    if x < T::zero() || x > T::one() {
        return Err(Error::Evaluation(format!("x = {x} outside [0, 1]")));
    }
    if x == T::zero() || x == T::one() {
        return Ok(T::zero());
    }
    let pi = T::PI();
    let decay = pi * pi * series.nu * t;
    let mut num = T::zero();
    let mut den = series.c0;
    for (i, &cn) in series.c.iter().enumerate() {
        let n = T::from_usize_lossy(i + 1);
        let damp = cn * (-n * n * decay).exp();
        num += damp * n * (n * pi * x).sin();
        den += damp * (n * pi * x).cos();
    }
    if den.abs() < T::lit(1e-300).max(T::min_positive_value()) {
        return Err(Error::Evaluation(format!(
            "series denominator vanished at x = {x}, t = {t}"
        )));
    }
    Ok(T::lit(2.0) * series.nu * pi * num / den)
}

/// Exact solution sampled at the given nodes.
pub fn sample_exact<T: Real>(series: &HopfColeSeries<T>, nodes: &[T], t: T) -> Result<Vec<T>> {
    nodes.iter().map(|&x| evaluate_exact(series, x, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_rules_on_known_integrals() {
        let q = QuadratureSpec::default();
        let v: f64 = q.integrate(|x: f64| x.exp(), 0.0, 1.0).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        let g = QuadratureSpec::gauss_legendre_256();
        let v: f64 = g
            .integrate(|x: f64| (7.0 * std::f64::consts::PI * x).cos().powi(2), 0.0, 1.0)
            .unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16] {
            let s: f64 = gauss_legendre_nodes(n).iter().map(|p| p.1).sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
        // 3-point rule integrates x⁴ exactly.
        let v = gauss_legendre(&|x: f64| x.powi(4), -1.0, 1.0, 1, 3);
        assert!((v - 0.4).abs() < 1e-15);
    }

    #[test]
    fn simpson_reports_non_convergence() {
        let q = QuadratureSpec {
            max_subdivisions: 4,
            abs_tolerance: 1e-14,
            ..QuadratureSpec::default()
        };
        let err = q
            .integrate(|x: f64| (200.0 * x).sin() * (1.0 / (x + 1e-3)), 0.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::Precision { .. }));
        let bad = QuadratureSpec {
            abs_tolerance: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(bad.integrate(|x: f64| x, 0.0, 1.0).is_err());
    }

    #[test]
    fn large_viscosity_limit() {
        let s = hopf_cole_coefficients::<f64>(ExactExample::Example2, 1e6, 10, &QuadratureSpec::default())
            .unwrap();
        assert!((s.c0 - 1.0).abs() < 1e-6);
        assert!(s.c.iter().all(|c| c.abs() < 1e-6));
    }

    #[test]
    fn boundary_values_vanish() {
        let s = hopf_cole_coefficients::<f64>(ExactExample::Example3, 0.1, 40, &QuadratureSpec::default())
            .unwrap();
        for t in [0.1, 1.0, 3.0] {
            assert_eq!(evaluate_exact(&s, 0.0, t).unwrap(), 0.0);
            assert_eq!(evaluate_exact(&s, 1.0, t).unwrap(), 0.0);
        }
        assert!(evaluate_exact(&s, 0.5, 0.01).is_err());
        assert!(evaluate_exact(&s, 1.5, 1.0).is_err());
    }

    #[test]
    fn example3_coefficients_decay() {
        let s = hopf_cole_coefficients::<f64>(ExactExample::Example3, 0.1, 50, &QuadratureSpec::default())
            .unwrap();
        assert!(s.c[49].abs() < s.c[9].abs());
        assert!(s.c0 > 0.0);
    }

    #[test]
    fn uncertified_truncation_is_rejected() {
        let q = QuadratureSpec::default();
        let err = hopf_cole_coefficients::<f64>(ExactExample::Example2, 1e-3, 20, &q).unwrap_err();
        assert!(matches!(err, Error::Precision { .. }));
    }

    #[test]
    fn invalid_arguments() {
        let q = QuadratureSpec::default();
        assert!(hopf_cole_coefficients::<f64>(ExactExample::Example2, 0.0, 10, &q).is_err());
        assert!(hopf_cole_coefficients::<f64>(ExactExample::Example2, 0.1, 0, &q).is_err());
    }
}
