//! Dirichlet backend on `[0, 1]`: fourth-order finite-difference Laplacian
//! and its exponential as the diffusion sub-flow.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::field::{Field, GridKind};
use crate::linalg::{matrix_exponential, DenseMatrix};
use crate::scalar::Real;

/// `D` interior unknowns at `x_j = j/(D+1)`; the homogeneous boundary
/// values at 0 and 1 are not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletGrid<T> {
    d: usize,
    spacing: T,
}

impl<T: Real> DirichletGrid<T> {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::GridTooSmall("Dirichlet grid needs D ≥ 1".into()));
        }
        Ok(Self {
            d,
            spacing: T::one() / T::from_usize_lossy(d + 1),
        })
    }

    pub fn len(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn nodes(&self) -> Vec<T> {
        (1..=self.d)
            .map(|j| T::from_usize_lossy(j) * self.spacing)
            .collect()
    }

    pub fn sample(&self, f: impl Fn(T) -> T) -> Field<T> {
        let v: Vec<T> = self.nodes().into_iter().map(f).collect();
        Field::from_real(&v, GridKind::Dirichlet)
    }
}

/// One-sided second-derivative stencil used in the first and last rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryClosure {
    /// `[45, −154, 214, −156, 61, −10]/12`: the six-point fourth-order formula.
    #[default]
    SixPoint,
    /// `[45, −154, 214, −156, 61]/12`. Not consistent (row sum 10/12) and
    /// gives `B` eigenvalues with positive real part; kept for comparison.
    FivePoint,
}

impl BoundaryClosure {
    pub fn coefficients(self) -> &'static [f64] {
        match self {
            BoundaryClosure::SixPoint => &[45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
            BoundaryClosure::FivePoint => &[45.0, -154.0, 214.0, -156.0, 61.0],
        }
    }
}

/// Fourth-order Laplacian on the interior nodes (without the viscosity).
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionMatrix<T: Real> {
    matrix: DenseMatrix<T>,
    closure: BoundaryClosure,
    grid: DirichletGrid<T>,
}

/// Assembles `B`: closure rows at both ends, `[16, −30, 16, −1]` next to
/// them and `[−1, 16, −30, 16, −1]` inside, all over `12 δx²`. The bottom
/// rows mirror the top rows exactly.
pub fn build_diffusion_matrix<T: Real>(
    grid: &DirichletGrid<T>,
    closure: BoundaryClosure,
) -> Result<DiffusionMatrix<T>> {
    let d = grid.len();
    if d < 6 {
        return Err(Error::GridTooSmall(format!(
            "diffusion stencil needs D ≥ 6 interior nodes, got {d}"
        )));
    }
    let scale = T::one() / (T::lit(12.0) * grid.spacing() * grid.spacing());
    let mut m = DenseMatrix::zeros(d, d);
    let mut set_mirrored = |i: usize, j: usize, v: f64| {
        let v = T::lit(v) * scale;
        m[(i, j)] = v;
        m[(d - 1 - i, d - 1 - j)] = v;
    };
    for (j, &c) in closure.coefficients().iter().enumerate() {
        set_mirrored(0, j, c);
    }
    for (j, c) in [16.0, -30.0, 16.0, -1.0].into_iter().enumerate() {
        set_mirrored(1, j, c);
    }
    for i in 2..d - 2 {
        for (o, c) in [-1.0, 16.0, -30.0, 16.0, -1.0].into_iter().enumerate() {
            m[(i, i + o - 2)] = T::lit(c) * scale;
        }
    }
    Ok(DiffusionMatrix {
        matrix: m,
        closure,
        grid: *grid,
    })
}

impl<T: Real> DiffusionMatrix<T> {
    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn closure(&self) -> BoundaryClosure {
        self.closure
    }

    pub fn grid(&self) -> &DirichletGrid<T> {
        &self.grid
    }

    pub fn apply(&self, u: &[T]) -> Vec<T> {
        self.matrix.matvec(u)
    }

    /// Upper bound `‖exp(B)⁸‖₁^{1/8}` on the spectral radius of `exp(B)`.
    /// Below one exactly when the heat semigroup generated by `B` contracts.
    pub fn spectral_radius_bound(&self) -> Result<T> {
        let mut e = matrix_exponential(&self.matrix)?;
        for _ in 0..3 {
            e = e.matmul(&e);
        }
        let norm = e.norm_1();
        Ok(if norm.is_finite() {
            norm.powf(T::lit(0.125))
        } else {
            T::infinity()
        })
    }

    /// Fails unless every eigenvalue of `B` has negative real part.
    pub fn check_contractive(&self) -> Result<()> {
        let rho = self.spectral_radius_bound()?;
        if rho < T::one() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "diffusion matrix with {:?} closure is not dissipative (spectral radius bound of exp(B) is {})",
                self.closure, rho
            )))
        }
    }
}

type ExpEntries<T> = HashMap<(u64, u64), Arc<DenseMatrix<T>>>;

/// Memoized `exp(ν τ B)` keyed by the bit patterns of `(ν, τ)`.
#[derive(Debug, Default)]
pub struct ExpCache<T: Real> {
    entries: Mutex<ExpEntries<T>>,
}

impl<T: Real> ExpCache<T> {
    pub fn new() -> Self {
        Self {
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compute(
        &self,
        matrix: &DiffusionMatrix<T>,
        nu: T,
        tau: T,
    ) -> Result<Arc<DenseMatrix<T>>> {
        let key = (nu.to_f64_lossy().to_bits(), tau.to_f64_lossy().to_bits());
        if let Some(e) = self.entries.lock().unwrap().get(&key) {
            return Ok(Arc::clone(e));
        }
        let e = Arc::new(matrix_exponential(&matrix.matrix().scaled(nu * tau))?);
        Ok(Arc::clone(
            self.entries.lock().unwrap().entry(key).or_insert(e),
        ))
    }
}

/// `exp(ν τ B)·u`; only nonnegative real `τ` is admissible here.
pub fn fd_diffusion_flow<T: Real>(
    u: &[T],
    nu: T,
    tau: T,
    matrix: &DiffusionMatrix<T>,
    cache: &ExpCache<T>,
) -> Result<Vec<T>> {
    if tau < T::zero() {
        return Err(Error::InadmissibleStep {
            flow: "diffusion",
            tau: format!("{tau}"),
        });
    }
    if u.len() != matrix.grid().len() {
        return Err(Error::Dimension {
            expected: matrix.grid().len(),
            found: u.len(),
        });
    }
    if tau == T::zero() {
        return Ok(u.to_vec());
    }
    Ok(cache.get_or_compute(matrix, nu, tau)?.matvec(u))
}
