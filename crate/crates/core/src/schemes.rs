//! Splitting coefficient sets and Richardson extrapolation rules.
//!
//! Every scheme is stored in the BAB pattern
//! `Ψ_h = Φᴮ(b_{m+1}h) ∘ Φᴬ(a_m h) ∘ ⋯ ∘ Φᴬ(a_1 h) ∘ Φᴮ(b_1 h)`,
//! where `A` is the conservation sub-flow and `B` the diffusion sub-flow.
//! Coefficients are kept at the printed precision of their published
//! sources; only the mirrored halves are filled in by symmetry.

use std::fmt;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Order of sub-flow application within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// Diffusion first and last: `len(b) = len(a) + 1`.
    Bab,
    /// Conservation first and last: `len(a) = len(b) + 1`.
    Aba,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Bab => "BAB",
            Pattern::Aba => "ABA",
        })
    }
}

/// A named composition method with real `a` (conservation) and complex
/// `b` (diffusion) coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingScheme<T> {
    pub name: String,
    pub pattern: Pattern,
    pub a: Vec<T>,
    pub b: Vec<Complex<T>>,
    pub nominal_order: u32,
    /// Generalized order `(p1, p2)` for perturbed problems `A + εB`.
    pub effective_order: Option<(u32, u32)>,
    pub real_coefficients_only: bool,
}

impl<T: Real> SplittingScheme<T> {
    pub fn new(
        name: impl Into<String>,
        pattern: Pattern,
        a: Vec<T>,
        b: Vec<Complex<T>>,
        nominal_order: u32,
        effective_order: Option<(u32, u32)>,
    ) -> Self {
        let real_coefficients_only = b.iter().all(|c| c.im == T::zero());
        Self {
            name: name.into(),
            pattern,
            a,
            b,
            nominal_order,
            effective_order,
            real_coefficients_only,
        }
    }

    /// Number of conservation-flow evaluations per step.
    pub fn stages(&self) -> usize {
        self.a.len()
    }

    /// ABA variant of a real-coefficient BAB scheme: the roles of the two
    /// coefficient lists are exchanged, so the conservation flow takes the
    /// outer half steps.
    pub fn transposed(&self) -> Result<Self> {
        if !self.real_coefficients_only {
            return Err(Error::InvalidInput(format!(
                "scheme `{}` has complex diffusion coefficients; transposition would give the \
                 conservation flow complex times",
                self.name
            )));
        }
        let pattern = match self.pattern {
            Pattern::Bab => Pattern::Aba,
            Pattern::Aba => Pattern::Bab,
        };
        Ok(Self {
            name: format!("{}-{}", self.name, pattern),
            pattern,
            a: self.b.iter().map(|c| c.re).collect(),
            b: self.a.iter().map(|&r| Complex::new(r, T::zero())).collect(),
            nominal_order: self.nominal_order,
            effective_order: None,
            real_coefficients_only: true,
        })
    }

    /// The adjoint composition (coefficients applied in reverse order).
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.a.reverse();
        out.b.reverse();
        out.name = format!("{}*", self.name);
        out
    }
}

/// One violated invariant together with its measured residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: Invariant,
    pub residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    SumA,
    SumB,
    Palindrome,
    PositiveA,
    NonNegativeReB,
    Lengths,
    RealFlag,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: f64 = format!("{:.11e}", self.residual).parse().unwrap_or(self.residual);
        write!(f, "{}, residual {}", self.detail, shown)
    }
}

/// Outcome of [`validate`]; empty when every invariant holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, invariant: Invariant) -> bool {
        self.violations.iter().any(|v| v.invariant == invariant)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Absolute tolerance for the consistency sums at precision `T`.
pub fn consistency_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0))
}

/// Checks consistency, symmetry, admissibility and bookkeeping invariants.
pub fn validate<T: Real>(scheme: &SplittingScheme<T>) -> ValidationReport {
    let tol = consistency_tolerance::<T>();
    let mut violations = Vec::new();
    let mut push = |invariant, residual: T, detail: String| {
        violations.push(Violation {
            invariant,
            residual: residual.to_f64_lossy(),
            detail,
        })
    };

    let sum_a = scheme.a.iter().fold(T::zero(), |acc, &x| acc + x);
    let res_a = (sum_a - T::one()).abs();
    if !(res_a < tol) {
        push(Invariant::SumA, res_a, "sum(a) ≠ 1".to_string());
    }
    let sum_b = scheme
        .b
        .iter()
        .fold(Complex::<T>::zero(), |acc, &x| acc + x);
    let res_b = (sum_b - Complex::one()).norm();
    if !(res_b < tol) {
        push(Invariant::SumB, res_b, "sum(b) ≠ 1+0i".to_string());
    }

    let (outer, inner) = match scheme.pattern {
        Pattern::Bab => (scheme.b.len(), scheme.a.len()),
        Pattern::Aba => (scheme.a.len(), scheme.b.len()),
    };
    if outer != inner + 1 {
        push(
            Invariant::Lengths,
            T::from_usize_lossy(outer.abs_diff(inner + 1)),
            format!(
                "{} pattern needs {} outer coefficients for {} inner, found {}",
                scheme.pattern,
                inner + 1,
                inner,
                outer
            ),
        );
    }

    let n = scheme.a.len();
    for i in 0..n / 2 {
        if scheme.a[i] != scheme.a[n - 1 - i] {
            push(
                Invariant::Palindrome,
                (scheme.a[i] - scheme.a[n - 1 - i]).abs(),
                format!("a[{}] ≠ a[{}]", i + 1, n - i),
            );
        }
    }
    let n = scheme.b.len();
    for i in 0..n / 2 {
        if scheme.b[i] != scheme.b[n - 1 - i] {
            push(
                Invariant::Palindrome,
                (scheme.b[i] - scheme.b[n - 1 - i]).norm(),
                format!("b[{}] ≠ b[{}]", i + 1, n - i),
            );
        }
    }

    for (i, &ai) in scheme.a.iter().enumerate() {
        if !(ai > T::zero()) {
            push(Invariant::PositiveA, ai, format!("a[{}] is not positive", i + 1));
        }
    }
    for (i, bi) in scheme.b.iter().enumerate() {
        if !(bi.re >= T::zero()) {
            push(
                Invariant::NonNegativeReB,
                bi.re,
                format!("Re(b[{}]) is negative", i + 1),
            );
        }
    }

    let real = scheme.b.iter().all(|c| c.im == T::zero());
    if real != scheme.real_coefficients_only {
        let max_im = scheme.b.iter().fold(T::zero(), |acc, c| acc.max(c.im.abs()));
        push(
            Invariant::RealFlag,
            max_im,
            "real_coefficients_only flag disagrees with the b coefficients".to_string(),
        );
    }

    ValidationReport { violations }
}

/// Registry names of the builtin splitting schemes.
pub const SCHEME_NAMES: [&str; 6] = ["Strang", "ML62", "RC4", "O4", "SM4", "SM64"];

/// Registry names of the builtin extrapolation rules.
pub const EXTRAPOLATION_NAMES: [&str; 2] = ["EXT4", "EXT6"];

fn canonical(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_uppercase()
}

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Mirrors `half` into a palindrome; with `odd` the last entry is the centre.
fn palindrome<X: Clone>(half: &[X], odd: bool) -> Vec<X> {
    let mut out = half.to_vec();
    let tail = if odd { &half[..half.len() - 1] } else { half };
    out.extend(tail.iter().rev().cloned());
    out
}

/// Looks up one of the builtin schemes by (case-insensitive) name.
#[allow(clippy::excessive_precision)]
pub fn builtin_scheme<T: Real>(name: &str) -> Result<SplittingScheme<T>> {
    let real = |x: T| Complex::new(x, T::zero());
    let scheme = match canonical(name).as_str() {
        "STRANG" => SplittingScheme::new(
            "Strang",
            Pattern::Bab,
            vec![T::one()],
            vec![real(T::lit(0.5)); 2],
            2,
            None,
        ),
        "ML62" => {
            let five = T::lit(5.0);
            let a1 = (five - five.sqrt()) / T::lit(10.0);
            let a2 = T::one() / five.sqrt();
            let b1 = T::one() / T::lit(12.0);
            let b2 = five / T::lit(12.0);
            SplittingScheme::new(
                "ML62",
                Pattern::Bab,
                palindrome(&[a1, a2], true),
                palindrome(&[real(b1), real(b2)], false),
                2,
                Some((6, 2)),
            )
        }
        "RC4" => {
            let third = T::one() / T::lit(3.0);
            let b1 = Complex::new(T::one() / T::lit(10.0), -third / T::lit(10.0));
            let b2 = Complex::new(T::lit(4.0) / T::lit(15.0), T::lit(2.0) / T::lit(15.0));
            let b3 = Complex::new(T::lit(4.0) / T::lit(15.0), -T::one() / T::lit(5.0));
            SplittingScheme::new(
                "RC4",
                Pattern::Bab,
                vec![T::lit(0.25); 4],
                palindrome(&[b1, b2, b3], true),
                4,
                None,
            )
        }
        "O4" => SplittingScheme::new(
            "O4",
            Pattern::Bab,
            palindrome(
                &[T::lit(0.1859688195991091314), T::lit(0.3140311804008908686)],
                false,
            ),
            palindrome(
                &[
                    c(0.060078275263542, 0.060314841253379),
                    c(0.270211839133611, -0.152903932291162),
                    c(0.339419771205694, 0.185178182075567),
                ],
                true,
            ),
            4,
            None,
        ),
        "SM4" => SplittingScheme::new(
            "SM4",
            Pattern::Bab,
            palindrome(
                &[T::lit(0.13505265889288437), T::lit(0.36494734110711563)],
                false,
            ),
            palindrome(
                &[
                    c(0.018329102861074364, -0.10677008344599524),
                    c(0.2784394345454581, 0.20041452008768607),
                    c(0.40646292518693505, -0.18728887328338165),
                ],
                true,
            ),
            4,
            None,
        ),
        "SM64" => SplittingScheme::new(
            "SM64",
            Pattern::Bab,
            vec![T::one() / T::lit(6.0); 6],
            palindrome(
                &[
                    c(0.05753968253968254, -0.007886748775536424),
                    c(0.20476190476190473, 0.04732049265321855),
                    c(0.16309523809523818, -0.11830123163304637),
                    c(0.14920634920634912, 0.15773497551072851),
                ],
                true,
            ),
            4,
            Some((6, 4)),
        ),
        _ => {
            return Err(Error::NotFound {
                kind: "splitting scheme",
                name: name.to_string(),
                available: SCHEME_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(scheme)
}

/// Every builtin scheme in registry order.
pub fn builtin_schemes<T: Real>() -> Vec<SplittingScheme<T>> {
    SCHEME_NAMES
        .iter()
        .map(|n| builtin_scheme(n).expect("registry name"))
        .collect()
}

/// One term `weight · (base method at h/substeps, applied substeps times)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtrapolationTerm {
    pub weight: Ratio<i64>,
    pub substeps: usize,
}

/// Weighted combination of a symmetric base method run with different
/// substep counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtrapolationRule {
    pub name: String,
    pub terms: Vec<ExtrapolationTerm>,
    pub base_order: u32,
}

impl ExtrapolationRule {
    pub fn weight_sum(&self) -> Ratio<i64> {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// `Σ w_j · n_j^(−p)` in exact arithmetic.
    pub fn moment(&self, p: u32) -> Ratio<i64> {
        self.terms
            .iter()
            .map(|t| t.weight / Ratio::from_integer(t.substeps as i64).pow(p as i32))
            .sum()
    }

    /// Even powers whose error terms the rule must cancel.
    pub fn cancelled_powers(&self) -> Vec<u32> {
        (0..self.terms.len().saturating_sub(1) as u32)
            .map(|k| self.base_order + 2 * k)
            .collect()
    }

    /// True when the weights sum to one and every required moment vanishes.
    pub fn is_consistent(&self) -> bool {
        self.weight_sum().is_one()
            && self
                .cancelled_powers()
                .into_iter()
                .all(|p| self.moment(p).is_zero())
    }

    pub fn nominal_order(&self) -> u32 {
        self.base_order + 2 * (self.terms.len() as u32 - 1)
    }

    pub fn weights<T: Real>(&self) -> Vec<T> {
        self.terms
            .iter()
            .map(|t| T::from_i64(*t.weight.numer()).unwrap() / T::from_i64(*t.weight.denom()).unwrap())
            .collect()
    }

    /// Conservation-flow evaluations per step for a base scheme with
    /// `base_stages` stages.
    pub fn a_evals_per_step(&self, base_stages: usize) -> usize {
        self.terms.iter().map(|t| t.substeps * base_stages).sum()
    }
}

/// Looks up `EXT4` or `EXT6` (case-insensitive).
pub fn builtin_extrapolation(name: &str) -> Result<ExtrapolationRule> {
    let r = |n: i64, d: i64| Ratio::new(n, d);
    let term = |weight, substeps| ExtrapolationTerm { weight, substeps };
    match canonical(name).as_str() {
        "EXT4" => Ok(ExtrapolationRule {
            name: "EXT4".into(),
            terms: vec![term(r(4, 3), 2), term(r(-1, 3), 1)],
            base_order: 2,
        }),
        "EXT6" => Ok(ExtrapolationRule {
            name: "EXT6".into(),
            terms: vec![term(r(81, 40), 3), term(r(-16, 15), 2), term(r(1, 24), 1)],
            base_order: 2,
        }),
        _ => Err(Error::NotFound {
            kind: "extrapolation rule",
            name: name.to_string(),
            available: EXTRAPOLATION_NAMES.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

/// A time-stepping method: a plain composition or an extrapolated one.
#[derive(Debug, Clone, PartialEq)]
pub enum Method<T> {
    Splitting(SplittingScheme<T>),
    Extrapolated {
        rule: ExtrapolationRule,
        base: SplittingScheme<T>,
    },
}

impl<T: Real> Method<T> {
    /// Resolves a CLI-facing method name; extrapolation rules use Strang as base.
    pub fn by_name(name: &str) -> Result<Self> {
        match builtin_scheme(name) {
            Ok(s) => Ok(Method::Splitting(s)),
            Err(_) => match builtin_extrapolation(name) {
                Ok(rule) => Ok(Method::Extrapolated {
                    rule,
                    base: builtin_scheme("Strang")?,
                }),
                Err(_) => Err(Error::NotFound {
                    kind: "method",
                    name: name.to_string(),
                    available: SCHEME_NAMES
                        .iter()
                        .chain(EXTRAPOLATION_NAMES.iter())
                        .map(|s| s.to_string())
                        .collect(),
                }),
            },
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Method::Splitting(s) => &s.name,
            Method::Extrapolated { rule, .. } => &rule.name,
        }
    }

    pub fn real_coefficients_only(&self) -> bool {
        match self {
            Method::Splitting(s) => s.real_coefficients_only,
            Method::Extrapolated { base, .. } => base.real_coefficients_only,
        }
    }

    pub fn a_evals_per_step(&self) -> usize {
        match self {
            Method::Splitting(s) => s.stages(),
            Method::Extrapolated { rule, base } => rule.a_evals_per_step(base.stages()),
        }
    }

    pub fn nominal_order(&self) -> u32 {
        match self {
            Method::Splitting(s) => s.nominal_order,
            Method::Extrapolated { rule, .. } => rule.nominal_order(),
        }
    }
}
