//! Independent oracles for the stability routes.

use num_complex::Complex64;
use proptest::prelude::*;
use vi_stab::model::{compute_equilibrium, power_transfer_limit, Bandwidth, GridParams};
use vi_stab::stability::{
    capacitance_thresholds, char_poly, eigenvalues, jacobian, routh_verdict, solve_cubic,
    theorem1_stable, Matrix3,
};

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Coefficients of det(λI − J) recovered by evaluating the determinant at
/// λ = 0, ±s and 2s and solving the resulting Vandermonde system by hand.
fn coefficients_by_interpolation(j: &Matrix3, s: f64) -> (f64, f64, f64) {
    let d = |lam: f64| {
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = if r == c { lam } else { 0.0 } - j[r][c];
            }
        }
        det3(m)
    };
    // p(λ) = λ³ + a2 λ² + a1 λ + a0. Subtract λ³ and solve the quadratic fit.
    let a0 = d(0.0);
    let plus = d(s) - s * s * s - a0; // a2 s² + a1 s
    let minus = d(-s) + s * s * s - a0; // a2 s² − a1 s
    let a2 = (plus + minus) / (2.0 * s * s);
    let a1 = (plus - minus) / (2.0 * s);
    (a2, a1, a0)
}

fn params() -> impl Strategy<Value = (GridParams, f64)> {
    (
        10.0..1000.0f64,
        0.01..1.0f64,
        1e-5..1e-2f64,
        1e-5..0.1f64,
        1.0..1e5f64,
        0.01..0.99f64,
    )
        .prop_map(|(v, k, l, c, w, f)| {
            let p = GridParams::new(v, k, l, c, Bandwidth::Finite(w)).unwrap();
            let power = f * power_transfer_limit(&p).unwrap();
            (p, power)
        })
}

#[test]
fn char_poly_matches_expanded_determinant_on_reference_point() {
    for w in [125.0, 357.0, 716.0, 5000.0] {
        let p = GridParams::reference(Bandwidth::Finite(w));
        let eq = compute_equilibrium(&p, 46_000.0).unwrap();
        let cp = char_poly(&p, &eq).unwrap();
        let (a2, a1, a0) = coefficients_by_interpolation(&jacobian(&p, &eq).unwrap(), 1.0);
        assert!(
            (cp.a2 - a2).abs() <= 1e-9 * cp.a2.abs(),
            "a2 {} vs {a2}",
            cp.a2
        );
        assert!(
            (cp.a1 - a1).abs() <= 1e-9 * cp.a1.abs(),
            "a1 {} vs {a1}",
            cp.a1
        );
        assert!(
            (cp.a0 - a0).abs() <= 1e-9 * cp.a0.abs(),
            "a0 {} vs {a0}",
            cp.a0
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn char_poly_matches_determinant((p, power) in params()) {
        let eq = compute_equilibrium(&p, power).unwrap();
        let cp = char_poly(&p, &eq).unwrap();
        let j = jacobian(&p, &eq).unwrap();
        // trace / principal-minor / determinant route, independent of the closed forms.
        let a2 = -(j[0][0] + j[1][1] + j[2][2]);
        let a1 = (j[0][0] * j[1][1] - j[0][1] * j[1][0])
            + (j[0][0] * j[2][2] - j[0][2] * j[2][0])
            + (j[1][1] * j[2][2] - j[1][2] * j[2][1]);
        let a0 = -det3(j);
        let scale1 = j[0][0].abs() * j[2][2].abs() + j[0][1].abs() * j[1][0].abs() + j[1][2].abs() * j[2][1].abs();
        prop_assert!((cp.a2 - a2).abs() <= 1e-9 * (j[0][0].abs() + j[2][2].abs()));
        prop_assert!((cp.a1 - a1).abs() <= 1e-9 * scale1);
        let scale0 = j[0][0].abs() * j[1][2].abs() * j[2][1].abs() + j[0][1].abs() * j[1][0].abs() * j[2][2].abs();
        prop_assert!((cp.a0 - a0).abs() <= 1e-9 * scale0);
    }

    #[test]
    fn eigen_residuals_small((p, power) in params()) {
        let eq = compute_equilibrium(&p, power).unwrap();
        let cp = char_poly(&p, &eq).unwrap();
        let e = eigenvalues(&cp);
        prop_assert!(e.max_residual(&cp) <= 1e-12, "{} {:?} {:?}", e.max_residual(&cp), cp, e.roots);
        // conjugate symmetry
        let nonreal: Vec<&Complex64> = e.roots.iter().filter(|z| z.im != 0.0).collect();
        prop_assert!(nonreal.is_empty() || (nonreal.len() == 2 && *nonreal[0] == nonreal[1].conj()));
    }

    #[test]
    fn threshold_orderings((p, power) in params()) {
        let eq = compute_equilibrium(&p, power).unwrap();
        let t = capacitance_thresholds(&p, &eq).unwrap();
        prop_assert!(t.c0_minus <= t.c2 * (1.0 + 1e-12));
        prop_assert!(t.c2 <= t.c0 * (1.0 + 1e-12));
        prop_assert!(t.c1 < t.c0);
    }

    #[test]
    fn routh_equals_theorem_away_from_thresholds((p, power) in params()) {
        let eq = compute_equilibrium(&p, power).unwrap();
        let t = capacitance_thresholds(&p, &eq).unwrap();
        prop_assume!(t.as_array().iter().all(|&th| (p.capacitance - th).abs() > 1e-3 * th.abs()));
        prop_assert_eq!(routh_verdict(&p, &eq).unwrap().stable, theorem1_stable(&p, &eq).unwrap());
    }
}

#[test]
fn cubic_roots_reproduce_constructed_polynomials() {
    // Build cubics from known roots and check recovery.
    let cases: [(f64, Complex64); 4] = [
        (-1e4, Complex64::new(-3.0, 200.0)),
        (-0.5, Complex64::new(10.0, 1e3)),
        (3.0, Complex64::new(-1e-3, 1.0)),
        (-700.0, Complex64::new(-31.0, 227.0)),
    ];
    for (r, z) in cases {
        let s = 2.0 * z.re;
        let q = z.norm_sqr();
        // (λ − r)(λ² − sλ + q)
        let a2 = -(r + s);
        let a1 = q + r * s;
        let a0 = -r * q;
        let roots = solve_cubic(a2, a1, a0);
        let scale = r.abs().max(z.norm());
        assert!((roots[0].re - r).abs() <= 1e-9 * scale, "{roots:?}");
        assert!((roots[1] - z).norm() <= 1e-9 * scale, "{roots:?} vs {z}");
    }
}

#[test]
fn unstable_reference_point_has_positive_real_part() {
    let p = GridParams::reference(Bandwidth::Finite(125.0));
    let eq = compute_equilibrium(&p, 46_000.0).unwrap();
    let e = eigenvalues(&char_poly(&p, &eq).unwrap());
    assert!(e.max_real_part > 0.0);
    assert!(!theorem1_stable(&p, &eq).unwrap());
}
