//! Property tests for the quasi-norm laws and the Luxemburg machinery.

use aniso_hardy_core::dilation::{Dilation, QuasiNormEvaluator};
use aniso_hardy_core::grid::{BoundingBox, GriddedFunction};
use aniso_hardy_core::util::rel_diff;
use aniso_hardy_core::varexp::{luxemburg_norm, modular, ExponentFunction};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn evaluator_for_diag(d0: f64, d1: f64) -> QuasiNormEvaluator {
    let d = Dilation::analyze(DMatrix::from_row_slice(2, 2, &[d0, 0.0, 0.0, d1]), 0.01).unwrap();
    QuasiNormEvaluator::build(d).unwrap()
}

fn step_function(values: &[f64]) -> GriddedFunction {
    let bbox = BoundingBox::new(vec![-1.0], vec![1.0]).unwrap();
    let n = values.len();
    let vals: Vec<f64> = (0..64).map(|i| values[i * n / 64]).collect();
    GriddedFunction::from_values(bbox, 64, vals).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quasinorm_scaling_law_on_random_diagonal_dilations(
        d0 in 1.5f64..3.5,
        d1 in 1.5f64..3.5,
        x0 in -20.0f64..20.0,
        x1 in -20.0f64..20.0,
    ) {
        prop_assume!(x0.abs() > 1e-6 || x1.abs() > 1e-6);
        let qn = evaluator_for_diag(d0, d1);
        let x = [x0, x1];
        let ax = [d0 * x0, d1 * x1];
        let vx = qn.evaluate(&x);
        let vax = qn.evaluate(&ax);
        prop_assert_eq!(vax.level.unwrap(), vx.level.unwrap() + 1);
        prop_assert!(vx.value > 0.0);
    }

    #[test]
    fn luxemburg_homogeneity_and_closed_form(
        c in 0.05f64..20.0,
        p0 in 0.4f64..3.0,
        mu in -5.0f64..5.0,
    ) {
        prop_assume!(mu.abs() > 1e-3);
        let f = step_function(&[c, 0.0, c, c]);
        let p = ExponentFunction::constant(p0).unwrap();
        let norm = luxemburg_norm(&f, &p, 1e-10).unwrap();
        // closed form for constant exponent: (∫|f|^{p0})^{1/p0}
        let direct = modular(&f, &p).powf(1.0 / p0);
        prop_assert!(rel_diff(norm, direct) < 1e-8);
        let scaled = f.map(|v| mu * v);
        let norm_scaled = luxemburg_norm(&scaled, &p, 1e-10).unwrap();
        prop_assert!(rel_diff(norm_scaled, mu.abs() * norm) < 1e-8);
    }

    #[test]
    fn modular_is_strictly_decreasing_in_lambda(
        a in 0.2f64..4.0,
        b in 0.2f64..4.0,
        p0 in 0.5f64..2.5,
    ) {
        let f = step_function(&[a, b, a + b, a]);
        let p = ExponentFunction::constant(p0).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let lam = 0.25 * 1.7f64.powi(k);
            let m = modular(&f.map(|v| v / lam), &p);
            prop_assert!(m < last);
            last = m;
        }
    }

    #[test]
    fn quasi_triangle_with_p_underline(
        a in 0.1f64..3.0,
        b in 0.1f64..3.0,
        p0 in 0.4f64..1.8,
    ) {
        let f = step_function(&[a, 0.0, a, 0.5 * a]);
        let g = step_function(&[0.0, b, b, 0.25 * b]);
        let p = ExponentFunction::constant(p0).unwrap();
        let pu = p.p_underline();
        let nf = luxemburg_norm(&f, &p, 1e-10).unwrap();
        let ng = luxemburg_norm(&g, &p, 1e-10).unwrap();
        let sum = f.zip_with(&g, |x, y| x + y).unwrap();
        let ns = luxemburg_norm(&sum, &p, 1e-10).unwrap();
        prop_assert!(ns.powf(pu) <= nf.powf(pu) + ng.powf(pu) + 1e-8);
    }
}
