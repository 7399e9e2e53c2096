use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which spatial discretization a [`Field`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    Periodic,
    Dirichlet,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            GridKind::Periodic => "periodic",
            GridKind::Dirichlet => "dirichlet",
        }
    }
}

/// Grid-sampled solution state. Values are complex so that intermediate
/// states of complex-time compositions can be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    values: Vec<Complex<T>>,
    grid: GridKind,
    time: T,
}

impl<T: Real> Field<T> {
    pub fn new(values: Vec<Complex<T>>, grid: GridKind, time: T) -> Self {
        Self { values, grid, time }
    }

    pub fn from_real(values: &[T], grid: GridKind) -> Self {
        Self {
            values: values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
            grid,
            time: T::zero(),
        }
    }

    pub fn zeros(len: usize, grid: GridKind) -> Self {
        Self {
            values: vec![Complex::zero(); len],
            grid,
            time: T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn grid(&self) -> GridKind {
        self.grid
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn with_time(mut self, time: T) -> Self {
        self.time = time;
        self
    }

    pub fn real_part(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.im.abs()))
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == T::zero())
    }

    /// Drops the imaginary part of every sample.
    pub fn project_real(&mut self) {
        for v in &mut self.values {
            v.im = T::zero();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Infinity-norm distance between the real parts of two equally sized fields.
    pub fn max_abs_diff(&self, other: &[T]) -> Result<T> {
        if other.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(other)
            .fold(T::zero(), |acc, (a, &b)| acc.max((a.re - b).abs())))
    }
}
