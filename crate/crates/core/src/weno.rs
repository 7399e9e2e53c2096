//! Fifth-order WENO finite differences for `u_t + f(u)_x = 0` on the
//! Dirichlet grid, advanced in time with classical RK4.

use crate::error::{Error, Result};
use crate::fd::DirichletGrid;
use crate::field::{Field, GridKind};
use crate::scalar::Real;
use crate::work::WorkCounter;

/// Regularization in the nonlinear weights.
pub const WENO_EPSILON: f64 = 1e-6;

/// Linear weights `γ₁, γ₂, γ₃`.
pub const LINEAR_WEIGHTS: [f64; 3] = [0.1, 0.6, 0.3];

/// Number of ghost values on each side of the interior data.
pub const GHOSTS: usize = 3;

pub trait FluxFunction<T> {
    fn flux(&self, u: T) -> T;
    /// Characteristic speed `f'(u)`.
    fn speed(&self, u: T) -> T;
}

/// `f(u) = u²/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BurgersFlux;

impl<T: Real> FluxFunction<T> for BurgersFlux {
    fn flux(&self, u: T) -> T {
        T::lit(0.5) * u * u
    }
    fn speed(&self, u: T) -> T {
        u
    }
}

/// How the three ghost values beyond each homogeneous boundary are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GhostFill {
    /// Odd extension through the boundary node: `u(−x) = −u(x)`.
    #[default]
    OddReflection,
    /// All ghosts set to the boundary value zero.
    Zero,
}

/// Smoothness indicators `β₁, β₂, β₃` of the stencil `f_{j−2} … f_{j+2}`.
pub fn smoothness_indicators<T: Real>(f: [T; 5]) -> [T; 3] {
    let [fm2, fm1, f0, fp1, fp2] = f;
    let c13 = T::lit(13.0) / T::lit(12.0);
    let q = T::lit(0.25);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let sq = |x: T| x * x;
    [
        c13 * sq(fm2 - two * fm1 + f0) + q * sq(fm2 - four * fm1 + three * f0),
        c13 * sq(fm1 - two * f0 + fp1) + q * sq(fm1 - fp1),
        c13 * sq(f0 - two * fp1 + fp2) + q * sq(three * f0 - four * fp1 + fp2),
    ]
}

/// Normalized nonlinear weights `w_k = w̃_k / Σ w̃`, `w̃_k = γ_k/(ε + β_k)²`.
pub fn nonlinear_weights<T: Real>(f: [T; 5]) -> [T; 3] {
    let beta = smoothness_indicators(f);
    let eps = T::lit(WENO_EPSILON);
    let raw: [T; 3] = std::array::from_fn(|k| {
        let d = eps + beta[k];
        T::lit(LINEAR_WEIGHTS[k]) / (d * d)
    });
    let sum = raw[0] + raw[1] + raw[2];
    raw.map(|w| w / sum)
}

/// Third-order candidate fluxes at `j+1/2`.
pub fn candidate_fluxes<T: Real>(f: [T; 5]) -> [T; 3] {
    let [fm2, fm1, f0, fp1, fp2] = f;
    let third = T::one() / T::lit(3.0);
    let sixth = T::one() / T::lit(6.0);
    [
        third * fm2 - T::lit(7.0) * sixth * fm1 + T::lit(11.0) * sixth * f0,
        -sixth * fm1 + T::lit(5.0) * sixth * f0 + third * fp1,
        third * f0 + T::lit(5.0) * sixth * fp1 - sixth * fp2,
    ]
}

/// Left-biased WENO5 value at `j+1/2` from `f_{j−2} … f_{j+2}`.
pub fn reconstruct<T: Real>(f: [T; 5]) -> T {
    let w = nonlinear_weights(f);
    let q = candidate_fluxes(f);
    w[0] * q[0] + w[1] * q[1] + w[2] * q[2]
}

/// Numerical fluxes `f̂_{m+1/2}` for every interface `m = 2 … L−4` of the
/// ghost-extended array `u_ext` (length `L`), i.e. `L − 5` values. With
/// three ghosts per side, entry `i` is the interface between interior nodes
/// `i − 1` and `i`.
///
/// When the characteristic speed has one sign over the interior the plain
/// upwind-biased flux is used; otherwise a global Lax–Friedrichs splitting
/// `f± = ½(f ± αu)`, `α = max|f'(u)|`, with the `f⁻` part reconstructed by
/// mirror symmetry.
pub fn weno_flux<T: Real, F: FluxFunction<T>>(u_ext: &[T], flux: &F) -> Result<Vec<T>> {
    let len = u_ext.len();
    if len < 2 * GHOSTS + 1 {
        return Err(Error::Dimension {
            expected: 2 * GHOSTS + 1,
            found: len,
        });
    }
    let interior = &u_ext[GHOSTS..len - GHOSTS];
    let nonneg = interior.iter().all(|&u| flux.speed(u) >= T::zero());
    let nonpos = interior.iter().all(|&u| flux.speed(u) <= T::zero());
    let f: Vec<T> = u_ext.iter().map(|&u| flux.flux(u)).collect();
    let left = |g: &[T], m: usize| reconstruct([g[m - 2], g[m - 1], g[m], g[m + 1], g[m + 2]]);
    let right = |g: &[T], m: usize| reconstruct([g[m + 3], g[m + 2], g[m + 1], g[m], g[m - 1]]);
    let interfaces = 2..=len - 4;
    if nonneg {
        return Ok(interfaces.map(|m| left(&f, m)).collect());
    }
    if nonpos {
        return Ok(interfaces.map(|m| right(&f, m)).collect());
    }
    let alpha = u_ext
        .iter()
        .fold(T::zero(), |a, &u| a.max(flux.speed(u).abs()));
    let half = T::lit(0.5);
    let fp: Vec<T> = f.iter().zip(u_ext).map(|(&fv, &u)| half * (fv + alpha * u)).collect();
    let fm: Vec<T> = f.iter().zip(u_ext).map(|(&fv, &u)| half * (fv - alpha * u)).collect();
    Ok(interfaces.map(|m| left(&fp, m) + right(&fm, m)).collect())
}

/// Interior values padded with three ghosts per side.
pub fn extend_with_ghosts<T: Real>(u: &[T], ghost: GhostFill) -> Vec<T> {
    let d = u.len();
    let mut ext = Vec::with_capacity(d + 2 * GHOSTS);
    let at = |i: usize| if i < d { -u[i] } else { T::zero() };
    match ghost {
        GhostFill::OddReflection => {
            ext.extend([at(1), at(0), T::zero()]);
            ext.extend_from_slice(u);
            ext.extend([
                T::zero(),
                if d >= 1 { -u[d - 1] } else { T::zero() },
                if d >= 2 { -u[d - 2] } else { T::zero() },
            ]);
        }
        GhostFill::Zero => {
            ext.extend([T::zero(); GHOSTS]);
            ext.extend_from_slice(u);
            ext.extend([T::zero(); GHOSTS]);
        }
    }
    ext
}

/// `(f̂_{j+1/2} − f̂_{j−1/2})/δx` at every interior node, approximating `f(u)_x`.
pub fn flux_derivative<T: Real, F: FluxFunction<T>>(
    u: &[T],
    spacing: T,
    ghost: GhostFill,
    flux: &F,
) -> Result<Vec<T>> {
    let fl = weno_flux(&extend_with_ghosts(u, ghost), flux)?;
    Ok(fl.windows(2).map(|w| (w[1] - w[0]) / spacing).collect())
}

/// RK4 integrator for the WENO semi-discretization of the conservation law.
#[derive(Debug, Clone, Copy)]
pub struct WenoSolver<T> {
    pub grid: DirichletGrid<T>,
    pub ghost: GhostFill,
    pub substeps: usize,
}

impl<T: Real> WenoSolver<T> {
    pub fn new(grid: DirichletGrid<T>, substeps: usize) -> Self {
        Self {
            grid,
            ghost: GhostFill::default(),
            substeps,
        }
    }

    pub fn with_ghost(mut self, ghost: GhostFill) -> Self {
        self.ghost = ghost;
        self
    }

    fn rhs(&self, u: &[T]) -> Result<Vec<T>> {
        let d = flux_derivative(u, self.grid.spacing(), self.ghost, &BurgersFlux)?;
        Ok(d.into_iter().map(|v| -v).collect())
    }

    /// Advances `u` by time `tau`; one call is one A-flow evaluation.
    pub fn flow(&self, u: &[T], tau: T, work: &WorkCounter) -> Result<Vec<T>> {
        if self.substeps == 0 {
            return Err(Error::InvalidInput("substeps must be at least 1".into()));
        }
        if tau < T::zero() {
            return Err(Error::InadmissibleStep {
                flow: "conservation",
                tau: format!("{tau}"),
            });
        }
        if u.len() != self.grid.len() {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: u.len(),
            });
        }
        work.record_a_flow();
        if tau == T::zero() {
            return Ok(u.to_vec());
        }
        let dt = tau / T::from_usize_lossy(self.substeps);
        let half = dt * T::lit(0.5);
        let sixth = dt / T::lit(6.0);
        let two = T::lit(2.0);
        let axpy = |x: &[T], a: T, y: &[T]| -> Vec<T> {
            x.iter().zip(y).map(|(&xi, &yi)| xi + a * yi).collect()
        };
        let mut u = u.to_vec();
        for step in 0..self.substeps {
            let k1 = self.rhs(&u)?;
            let k2 = self.rhs(&axpy(&u, half, &k1))?;
            let k3 = self.rhs(&axpy(&u, half, &k2))?;
            let k4 = self.rhs(&axpy(&u, dt, &k3))?;
            for i in 0..u.len() {
                u[i] += sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp {
                    flow: "conservation",
                    step: step + 1,
                });
            }
        }
        Ok(u)
    }
}

/// Field-level conservation flow; rejects complex-valued states.
pub fn weno_conservation_flow<T: Real>(
    state: &Field<T>,
    tau: T,
    solver: &WenoSolver<T>,
    work: &WorkCounter,
) -> Result<Field<T>> {
    if !state.is_real() {
        return Err(Error::BackendIncompatible(
            "WENO conservation flow needs a real-valued state".into(),
        ));
    }
    let out = solver.flow(&state.real_part(), tau, work)?;
    Ok(Field::from_real(&out, GridKind::Dirichlet).with_time(state.time() + tau))
}
