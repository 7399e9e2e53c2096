//! Periodic backend on `[0, 2π]`: discrete Fourier transform with the
//! `h = 2π/N` prefactor, the exact diffusion multiplier, the pseudospectral
//! conservation flow and an integrating-factor RK4 reference integrator.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Field, GridKind};
use crate::scalar::Real;
use crate::work::WorkCounter;

/// Uniform periodic grid with nodes `x_j = j·2π/N`, `j = 1..N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid<T> {
    n: usize,
    spacing: T,
}

impl<T: Real> PeriodicGrid<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::GridTooSmall(format!(
                "periodic grid needs a power of two N ≥ 8, got {n}"
            )));
        }
        Ok(Self {
            n,
            spacing: T::TAU() / T::from_usize_lossy(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn nodes(&self) -> Vec<T> {
        (1..=self.n)
            .map(|j| T::from_usize_lossy(j) * self.spacing)
            .collect()
    }

    /// Wavenumber `k ∈ (−N/2, N/2]` stored at transform index `idx`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Transform index holding wavenumber `k`.
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn sample(&self, f: impl Fn(T) -> T) -> Field<T> {
        let v: Vec<T> = self.nodes().into_iter().map(f).collect();
        Field::from_real(&v, GridKind::Periodic)
    }
}

/// Fourier coefficients `û_k`, `k = −N/2+1 … N/2`, stored in transform order
/// (index `k mod N`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![Complex::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex<T> {
        self.coeffs[k.rem_euclid(self.coeffs.len() as i64) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex<T>) {
        let n = self.coeffs.len() as i64;
        self.coeffs[k.rem_euclid(n) as usize] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest violation of `û(−k) = conj(û(k))`, relative to the largest coefficient.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let n = self.coeffs.len() as i64;
        let scale = self
            .coeffs
            .iter()
            .fold(T::zero(), |a, c| a.max(c.norm()))
            .max(T::min_positive_value());
        let mut worst = T::zero();
        for k in 0..=n / 2 {
            worst = worst.max((self.coeff(-k) - self.coeff(k).conj()).norm());
        }
        worst / scale
    }

    /// `Σ w_i · s_i` over equally sized spectral fields.
    pub fn linear_combination(terms: &[(T, &SpectralField<T>)]) -> Self {
        let n = terms.first().map_or(0, |(_, s)| s.len());
        let mut coeffs = vec![Complex::zero(); n];
        for (w, s) in terms {
            for (o, c) in coeffs.iter_mut().zip(&s.coeffs) {
                *o += c * *w;
            }
        }
        Self { coeffs }
    }
}

/// Transform plans and per-grid constants; cheap to clone and shareable
/// across threads.
#[derive(Clone)]
pub struct SpectralOps<T: Real> {
    grid: PeriodicGrid<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    dealias: bool,
}

impl<T: Real> fmt::Debug for SpectralOps<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralOps")
            .field("grid", &self.grid)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl<T: Real> SpectralOps<T> {
    pub fn new(grid: PeriodicGrid<T>) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.len()),
            inverse: planner.plan_fft_inverse(grid.len()),
            dealias: false,
        }
    }

    /// Enables 2/3-rule truncation before the quadratic product (diagnostics only).
    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    /// `û_k = h Σ_j u_j e^{−ik x_j}` with `h = 2π/N`.
    pub fn forward_dft(&self, field: &Field<T>) -> Result<SpectralField<T>> {
        if field.len() != self.grid.len() {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: field.len(),
            });
        }
        Ok(self.forward_values(field.values()))
    }

    /// `u_j = (1/2π) Σ_k û_k e^{ik x_j}`.
    pub fn inverse_dft(&self, spec: &SpectralField<T>) -> Result<Field<T>> {
        if spec.len() != self.grid.len() {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: spec.len(),
            });
        }
        Ok(Field::new(self.inverse_values(spec), GridKind::Periodic, T::zero()))
    }

    // Node x_j = j·h sits at index j−1 and x_N ≡ 0 sits last; one rotation
    // puts x = 0 first for the plain FFT.
    fn forward_values(&self, values: &[Complex<T>]) -> SpectralField<T> {
        let n = values.len();
        let mut buf = Vec::with_capacity(n);
        buf.push(values[n - 1]);
        buf.extend_from_slice(&values[..n - 1]);
        self.forward.process(&mut buf);
        let h = self.grid.spacing();
        for c in &mut buf {
            *c *= h;
        }
        SpectralField { coeffs: buf }
    }

    fn inverse_values(&self, spec: &SpectralField<T>) -> Vec<Complex<T>> {
        let mut buf = spec.coeffs.clone();
        self.inverse.process(&mut buf);
        let scale = T::one() / T::TAU();
        buf.rotate_left(1);
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Exact diffusion flow: multiplies `û_k` by `exp(−ν k² τ)`.
    pub fn diffusion_flow(
        &self,
        spec: &SpectralField<T>,
        nu: T,
        tau: Complex<T>,
    ) -> Result<SpectralField<T>> {
        if tau.re < T::zero() {
            return Err(Error::InadmissibleStep {
                flow: "diffusion",
                tau: format!("{tau}"),
            });
        }
        let mut out = spec.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let k = T::from_i64(self.grid.wavenumber(idx)).unwrap();
            *c *= (tau * (-nu * k * k)).exp();
        }
        Ok(out)
    }

    /// Spectral right-hand side `−(ik/2)·F[(F⁻¹û)²]` of `u_t + (u²/2)_x = 0`.
    pub fn conservation_rhs(&self, spec: &SpectralField<T>) -> SpectralField<T> {
        let n = self.grid.len();
        let mut phys = if self.dealias {
            let mut cut = spec.clone();
            let limit = (n / 3) as i64;
            for (idx, c) in cut.coeffs.iter_mut().enumerate() {
                if self.grid.wavenumber(idx).abs() > limit {
                    *c = Complex::zero();
                }
            }
            self.inverse_values(&cut)
        } else {
            self.inverse_values(spec)
        };
        for v in &mut phys {
            *v = *v * *v;
        }
        let mut sq = self.forward_values(&phys);
        let half = T::lit(0.5);
        for (idx, c) in sq.coeffs.iter_mut().enumerate() {
            let k = self.grid.wavenumber(idx);
            // The Nyquist mode has no odd derivative on the grid.
            if 2 * k.unsigned_abs() as usize == n {
                *c = Complex::zero();
                continue;
            }
            let ik = Complex::new(T::zero(), T::from_i64(k).unwrap());
            *c = -(ik * half) * *c;
        }
        sq
    }

    /// Classical RK4 on [`Self::conservation_rhs`] over total time `tau`
    /// split into `substeps` equal steps. Counts as one A-flow evaluation.
    pub fn conservation_flow(
        &self,
        spec: &SpectralField<T>,
        tau: Complex<T>,
        substeps: usize,
        work: &WorkCounter,
    ) -> Result<SpectralField<T>> {
        if substeps == 0 {
            return Err(Error::InvalidInput("substeps must be at least 1".into()));
        }
        work.record_a_flow();
        let dt = tau / T::from_usize_lossy(substeps);
        let half = dt * T::lit(0.5);
        let sixth = dt / T::lit(6.0);
        let mut u = spec.clone();
        for step in 0..substeps {
            let k1 = self.conservation_rhs(&u);
            let k2 = self.conservation_rhs(&axpy(&u, half, &k1));
            let k3 = self.conservation_rhs(&axpy(&u, half, &k2));
            let k4 = self.conservation_rhs(&axpy(&u, dt, &k3));
            for (i, c) in u.coeffs.iter_mut().enumerate() {
                *c += sixth
                    * (k1.coeffs[i] + (k2.coeffs[i] + k3.coeffs[i]) * T::lit(2.0) + k4.coeffs[i]);
            }
            if !u.is_finite() {
                return Err(Error::BlowUp {
                    flow: "conservation",
                    step: step + 1,
                });
            }
        }
        Ok(u)
    }

    /// Real part of the physical field, back in spectral space.
    pub fn project_real(&self, spec: &SpectralField<T>) -> SpectralField<T> {
        let mut phys = self.inverse_values(spec);
        for v in &mut phys {
            v.im = T::zero();
        }
        self.forward_values(&phys)
    }
}

fn axpy<T: Real>(u: &SpectralField<T>, a: Complex<T>, k: &SpectralField<T>) -> SpectralField<T> {
    SpectralField {
        coeffs: u
            .coeffs
            .iter()
            .zip(&k.coeffs)
            .map(|(&x, &y)| x + a * y)
            .collect(),
    }
}

/// Integrating-factor RK4 integrator for the full equation
/// `u_t + u u_x = ν u_xx` on the periodic grid; used as the reference
/// solution for periodic experiments.
#[derive(Debug, Clone)]
pub struct ReferenceSolver<T: Real> {
    pub ops: SpectralOps<T>,
    pub nu: T,
    pub dt: T,
    /// Disables the nonlinear term (pure heat equation); a test hook.
    pub nonlinear: bool,
}

impl<T: Real> ReferenceSolver<T> {
    pub fn new(ops: SpectralOps<T>, nu: T, dt: T) -> Self {
        Self {
            ops,
            nu,
            dt,
            nonlinear: true,
        }
    }

    pub fn solve(&self, u0: &Field<T>, t_final: T) -> Result<Field<T>> {
        if !(self.dt > T::zero()) || self.dt > t_final {
            return Err(Error::InvalidInput(format!(
                "reference step {} must lie in (0, {}]",
                self.dt, t_final
            )));
        }
        let steps = (t_final / self.dt).ceil().to_usize().unwrap_or(1).max(1);
        let dt = t_final / T::from_usize_lossy(steps);
        let half = dt * T::lit(0.5);
        let grid = *self.ops.grid();
        let e_half: Vec<Complex<T>> = (0..grid.len())
            .map(|idx| {
                let k = T::from_i64(grid.wavenumber(idx)).unwrap();
                Complex::new((-self.nu * k * k * half).exp(), T::zero())
            })
            .collect();
        let nonlin = |v: &SpectralField<T>| {
            if self.nonlinear {
                self.ops.conservation_rhs(v)
            } else {
                SpectralField::zeros(v.len())
            }
        };
        let scale = |v: &SpectralField<T>| SpectralField {
            coeffs: v.coeffs.iter().zip(&e_half).map(|(&c, &e)| c * e).collect(),
        };
        let mut u = self.ops.forward_dft(u0)?;
        let dtc = Complex::new(dt, T::zero());
        let halfc = Complex::new(half, T::zero());
        for step in 0..steps {
            let a = nonlin(&u);
            let eu = scale(&u);
            let b = nonlin(&scale(&axpy(&u, halfc, &a)));
            let c = nonlin(&axpy(&eu, halfc, &b));
            let d = nonlin(&axpy(&scale(&eu), dtc, &scale(&c)));
            let e2u = scale(&eu);
            let e2a = scale(&scale(&a));
            let ebc = scale(&SpectralField::linear_combination(&[(T::one(), &b), (T::one(), &c)]));
            let sixth = dt / T::lit(6.0);
            for i in 0..u.coeffs.len() {
                u.coeffs[i] = e2u.coeffs[i]
                    + (e2a.coeffs[i] + ebc.coeffs[i] * T::lit(2.0) + d.coeffs[i]) * sixth;
            }
            if !u.is_finite() {
                return Err(Error::BlowUp {
                    flow: "reference",
                    step: step + 1,
                });
            }
        }
        let mut out = self.ops.inverse_dft(&u)?;
        out.project_real();
        Ok(out.with_time(t_final))
    }
}

/// Integrates the full equation from `u0` to `t_final` with step `dt`.
pub fn reference_solve_periodic<T: Real>(
    ops: &SpectralOps<T>,
    u0: &Field<T>,
    nu: T,
    t_final: T,
    dt: T,
) -> Result<Field<T>> {
    ReferenceSolver::new(ops.clone(), nu, dt).solve(u0, t_final)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(n: usize) -> SpectralOps<f64> {
        SpectralOps::new(PeriodicGrid::new(n).unwrap())
    }

    /// Direct evaluation of the transform sum.
    fn naive_dft(values: &[f64], k: i64) -> Complex<f64> {
        let n = values.len();
        let h = std::f64::consts::TAU / n as f64;
        (1..=n)
            .map(|j| {
                let x = j as f64 * h;
                Complex::from_polar(values[j - 1] * h, -(k as f64) * x)
            })
            .sum()
    }

    #[test]
    fn grid_requires_power_of_two() {
        assert!(PeriodicGrid::<f64>::new(4).is_err());
        assert!(PeriodicGrid::<f64>::new(24).is_err());
        let g = PeriodicGrid::<f64>::new(16).unwrap();
        assert_eq!(g.wavenumber(8), 8);
        assert_eq!(g.wavenumber(9), -7);
        assert_eq!(g.index_of(-7), 9);
        assert!((g.nodes()[15] - std::f64::consts::TAU).abs() < 1e-15);
    }

    #[test]
    fn constant_field_only_has_mean_mode() {
        let o = ops(16);
        let c = 0.7;
        let s = o.forward_dft(&o.grid().sample(|_| c)).unwrap();
        assert!((s.coeff(0) - Complex::new(std::f64::consts::TAU * c, 0.0)).norm() < 1e-13);
        for k in 1..=8 {
            assert!(s.coeff(k).norm() < 1e-13);
            assert!(s.coeff(-k).norm() < 1e-13);
        }
    }

    #[test]
    fn sine_matches_direct_sum() {
        let o = ops(16);
        let f = o.grid().sample(f64::sin);
        let s = o.forward_dft(&f).unwrap();
        let vals = f.real_part();
        for k in -7..=8 {
            assert!((s.coeff(k) - naive_dft(&vals, k)).norm() < 1e-13, "k={k}");
        }
        let pi = std::f64::consts::PI;
        assert!((s.coeff(1) - Complex::new(0.0, -pi)).norm() < 1e-13);
        assert!((s.coeff(-1) - Complex::new(0.0, pi)).norm() < 1e-13);
    }

    #[test]
    fn inverse_of_zero_and_dc() {
        let o = ops(8);
        let z = o.inverse_dft(&SpectralField::zeros(8)).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
        let mut s = SpectralField::zeros(8);
        s.set_coeff(0, Complex::new(std::f64::consts::TAU, 0.0));
        let f = o.inverse_dft(&s).unwrap();
        for v in f.values() {
            assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let o = ops(8);
        assert!(matches!(
            o.forward_dft(&Field::zeros(16, GridKind::Periodic)),
            Err(Error::Dimension { expected: 8, found: 16 })
        ));
        assert!(o.inverse_dft(&SpectralField::zeros(4)).is_err());
    }

    #[test]
    fn diffusion_single_mode_and_sign_guard() {
        let o = ops(32);
        let s = o.forward_dft(&o.grid().sample(f64::sin)).unwrap();
        let out = o.diffusion_flow(&s, 0.03, Complex::new(1.0, 0.0)).unwrap();
        let f = o.inverse_dft(&out).unwrap();
        for (v, x) in f.values().iter().zip(o.grid().nodes()) {
            assert!((v.re - x.sin() * (-0.03f64).exp()).abs() < 1e-14);
        }
        assert_eq!(out.coeff(0), s.coeff(0));
        assert!(matches!(
            o.diffusion_flow(&s, 0.03, Complex::new(-1e-3, 0.0)),
            Err(Error::InadmissibleStep { .. })
        ));
    }

    #[test]
    fn complex_time_multiplier_is_contractive() {
        // b₁ of the RC4 scheme times h = 0.1, acting on k = 4.
        let tau = Complex::new(0.1 / 10.0, -0.1 / 30.0);
        let o = ops(16);
        let mut s = SpectralField::zeros(16);
        s.set_coeff(4, Complex::new(1.0, 0.0));
        let out = o.diffusion_flow(&s, 0.03, tau).unwrap();
        let expect = (tau * (-0.03 * 16.0)).exp();
        assert!((out.coeff(4) - expect).norm() < 1e-15);
        assert!(out.coeff(4).norm() < 1.0);
    }

    #[test]
    fn conservation_rhs_of_sine() {
        let o = ops(64);
        let s = o.forward_dft(&o.grid().sample(f64::sin)).unwrap();
        let r = o.inverse_dft(&o.conservation_rhs(&s)).unwrap();
        for (v, x) in r.values().iter().zip(o.grid().nodes()) {
            assert!((v.re + 0.5 * (2.0 * x).sin()).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
        let c = o.forward_dft(&o.grid().sample(|_| 0.4)).unwrap();
        assert!(o.conservation_rhs(&c).coeffs().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn conservation_flow_trivial_cases() {
        let o = ops(32);
        let w = WorkCounter::new();
        let s = o
            .forward_dft(&o.grid().sample(|x| 0.5 + 0.25 * x.sin()))
            .unwrap();
        let same = o.conservation_flow(&s, Complex::zero(), 5, &w).unwrap();
        assert_eq!(same, s);
        let c = o.forward_dft(&o.grid().sample(|_| 0.3)).unwrap();
        let out = o
            .conservation_flow(&c, Complex::new(0.7, 0.0), 5, &w)
            .unwrap();
        for (a, b) in out.coeffs().iter().zip(c.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
        assert_eq!(w.a_flows(), 2);
        assert!(o.conservation_flow(&c, Complex::zero(), 0, &w).is_err());
    }

    #[test]
    fn conservation_flow_detects_blow_up() {
        let o = ops(32);
        let s = o.forward_dft(&o.grid().sample(|x| 1e3 * x.sin())).unwrap();
        let err = o
            .conservation_flow(&s, Complex::new(1e3, 0.0), 10, &WorkCounter::new())
            .unwrap_err();
        assert!(matches!(err, Error::BlowUp { flow: "conservation", .. }));
    }

    #[test]
    fn reference_pure_diffusion_matches_heat_kernel() {
        let o = ops(32);
        let mut solver = ReferenceSolver::new(o.clone(), 0.03, 1e-2);
        solver.nonlinear = false;
        let out = solver.solve(&o.grid().sample(f64::sin), 1.0).unwrap();
        for (v, x) in out.values().iter().zip(o.grid().nodes()) {
            assert!((v.re - x.sin() * (-0.03f64).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn reference_of_zero_is_zero() {
        let o = ops(16);
        let out = reference_solve_periodic(&o, &Field::zeros(16, GridKind::Periodic), 0.1, 1.0, 0.1)
            .unwrap();
        assert!(out.values().iter().all(|v| v.norm() == 0.0));
        assert!(reference_solve_periodic(&o, &Field::zeros(16, GridKind::Periodic), 0.1, 1.0, 2.0)
            .is_err());
    }

    #[test]
    fn dealias_truncates_high_modes() {
        let o = ops(16).with_dealias(true);
        let mut s = SpectralField::zeros(16);
        s.set_coeff(7, Complex::new(1.0, 0.0));
        s.set_coeff(-7, Complex::new(1.0, 0.0));
        assert!(o.conservation_rhs(&s).coeffs().iter().all(|c| c.norm() == 0.0));
    }
}
