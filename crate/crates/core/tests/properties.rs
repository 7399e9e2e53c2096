//! Randomized invariants.

use num_complex::Complex;
use proptest::prelude::*;

use burgers_split::linalg::{matrix_exponential, DenseMatrix};
use burgers_split::spectral::{PeriodicGrid, SpectralOps};
use burgers_split::weno::nonlinear_weights;
use burgers_split::{Field, GridKind, WorkCounter};

fn ops(n: usize) -> SpectralOps<f64> {
    SpectralOps::new(PeriodicGrid::new(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_round_trip(values in prop::collection::vec(-10.0f64..10.0, 32)) {
        let o = ops(32);
        let f = Field::from_real(&values, GridKind::Periodic);
        let back = o.inverse_dft(&o.forward_dft(&f).unwrap()).unwrap();
        let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        prop_assert!(back.max_abs_diff(&values).unwrap() < 1e-12 * scale);
    }

    #[test]
    fn real_data_is_conjugate_symmetric(values in prop::collection::vec(-5.0f64..5.0, 64)) {
        let o = ops(64);
        let s = o.forward_dft(&Field::from_real(&values, GridKind::Periodic)).unwrap();
        prop_assert!(s.conjugate_symmetry_defect() < 1e-12);
        let d = o.diffusion_flow(&s, 0.05, Complex::new(0.3, 0.0)).unwrap();
        prop_assert!(d.conjugate_symmetry_defect() < 1e-12);
        let c = o.conservation_flow(&d, Complex::new(0.01, 0.0), 2, &WorkCounter::new()).unwrap();
        prop_assert!(c.conjugate_symmetry_defect() < 1e-10);
    }

    #[test]
    fn diffusion_semigroup(
        values in prop::collection::vec(-1.0f64..1.0, 16),
        t1 in (0.0f64..0.5, -0.5f64..0.5),
        t2 in (0.0f64..0.5, -0.5f64..0.5),
    ) {
        let o = ops(16);
        let s = o.forward_dft(&Field::from_real(&values, GridKind::Periodic)).unwrap();
        let (a, b) = (Complex::new(t1.0, t1.1), Complex::new(t2.0, t2.1));
        let two = o.diffusion_flow(&o.diffusion_flow(&s, 0.1, a).unwrap(), 0.1, b).unwrap();
        let one = o.diffusion_flow(&s, 0.1, a + b).unwrap();
        for (x, y) in two.coeffs().iter().zip(one.coeffs()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn conservation_keeps_mean(values in prop::collection::vec(-1.0f64..1.0, 32)) {
        let o = ops(32);
        let s = o.forward_dft(&Field::from_real(&values, GridKind::Periodic)).unwrap();
        let c = o.conservation_flow(&s, Complex::new(0.05, 0.0), 3, &WorkCounter::new()).unwrap();
        prop_assert!((c.coeff(0) - s.coeff(0)).norm() < 1e-13);
    }

    #[test]
    fn weno_weights_are_convex(f in prop::array::uniform5(-3.0f64..3.0)) {
        let w = nonlinear_weights(f);
        prop_assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_inverse(entries in prop::collection::vec(-1.0f64..1.0, 25)) {
        let m = DenseMatrix::from_row_major(5, 5, entries).unwrap();
        let p = matrix_exponential(&m).unwrap().matmul(&matrix_exponential(&m.scaled(-1.0)).unwrap());
        let defect = p.sub(&DenseMatrix::identity(5)).max_abs();
        prop_assert!(defect < 1e-10);
    }
}
