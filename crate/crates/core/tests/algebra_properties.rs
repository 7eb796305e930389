use num_complex::Complex64;
use proptest::prelude::*;
use sse_td::algebra::{commutator, conjugate_by_p_exponential, AlgebraElement};
use sse_td::grid::{apply_element, gaussian_packet, SpatialGrid, WaveFunction};

fn small_int() -> impl Strategy<Value = Complex64> {
    (-4i32..=4, -4i32..=4).prop_map(|(re, im)| Complex64::new(re as f64, im as f64))
}

/// Elements with Gaussian-integer coefficients: every bracket is computed exactly.
fn int_element() -> impl Strategy<Value = AlgebraElement> {
    (small_int(), small_int(), [small_int(), small_int(), small_int(), small_int()])
        .prop_map(|(c0, cx, cp)| AlgebraElement { c0, cx, cp })
}

fn unit_element() -> impl Strategy<Value = AlgebraElement> {
    let c = || (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im));
    (c(), c(), [c(), c(), c(), c()]).prop_map(|(c0, cx, cp)| AlgebraElement { c0, cx, cp })
}

/// Imaginary x-free exponent with small coefficients, so `e^P` is a bounded phase.
fn phase_exponent() -> impl Strategy<Value = AlgebraElement> {
    [-0.002f64..0.002, -0.01f64..0.01, -0.1f64..0.1, -0.5f64..0.5].prop_map(|g| {
        g.iter().enumerate().fold(AlgebraElement::zero(), |e, (k, &v)| {
            e + AlgebraElement::p_power(4 - k, Complex64::new(0.0, v))
        })
    })
}

fn interior_relative_error(got: &WaveFunction, want: &WaveFunction, interior: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, a), b) in got.grid().positions().iter().zip(got.samples()).zip(want.samples()) {
        if x.abs() < interior {
            num += (a - b).norm_sqr();
            den += b.norm_sqr();
        }
    }
    (num / den).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn antisymmetry(a in int_element(), b in int_element()) {
        prop_assert_eq!(commutator(&a, &b, 1.0), -commutator(&b, &a, 1.0));
    }

    #[test]
    fn bilinearity(a in int_element(), b in int_element(), c in int_element(), s in small_int(), t in small_int()) {
        let combo = s * a + t * b;
        prop_assert_eq!(commutator(&combo, &c, 1.0), s * commutator(&a, &c, 1.0) + t * commutator(&b, &c, 1.0));
        prop_assert_eq!(commutator(&c, &combo, 1.0), s * commutator(&c, &a, 1.0) + t * commutator(&c, &b, 1.0));
    }

    #[test]
    fn jacobi(a in int_element(), b in int_element(), c in int_element()) {
        let sum = commutator(&a, &commutator(&b, &c, 1.0), 1.0)
            + commutator(&b, &commutator(&c, &a, 1.0), 1.0)
            + commutator(&c, &commutator(&a, &b, 1.0), 1.0);
        prop_assert!(sum.is_zero(), "{}", sum);
    }

    #[test]
    fn bracket_scales_with_hbar(a in int_element(), b in int_element()) {
        prop_assert_eq!(commutator(&a, &b, 2.0), 2.0 * commutator(&a, &b, 1.0));
    }

    #[test]
    fn conjugation_round_trip(p in unit_element(), target in unit_element(), hbar in 0.5f64..2.0) {
        let p = p.with(sse_td::Basis::X, Complex64::new(0.0, 0.0));
        let there = conjugate_by_p_exponential(&p, &target, hbar).unwrap();
        let back = conjugate_by_p_exponential(&(-p), &there, hbar).unwrap();
        prop_assert!((back - target).max_abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_realizes_the_bracket(a in unit_element(), b in unit_element()) {
        let grid = SpatialGrid::new(1024, 32.0, 1.0).unwrap();
        let psi = gaussian_packet(&grid, 0.5, 0.3, 1.0).unwrap();
        let lhs = apply_element(&commutator(&a, &b, 1.0), &psi);
        let rhs = apply_element(&a, &apply_element(&b, &psi))
            .sub(&apply_element(&b, &apply_element(&a, &psi)))
            .unwrap();
        prop_assert!(interior_relative_error(&rhs, &lhs, 16.0) < 1e-8);
    }

    #[test]
    fn grid_realizes_conjugation(p in phase_exponent(), target in unit_element()) {
        let hbar = 1.0;
        let grid = SpatialGrid::new(512, 16.0, hbar).unwrap();
        let psi = gaussian_packet(&grid, -1.0, 0.5, 1.0).unwrap();
        let phase = |sign: f64| {
            move |q: f64| (sign * ((((p.cp[3] * q + p.cp[2]) * q + p.cp[1]) * q + p.cp[0]) * q)).exp()
        };
        let sandwich = apply_element(&target, &psi.multiply_momentum(phase(-1.0)).to_position())
            .multiply_momentum(phase(1.0))
            .to_position();
        let symbolic = apply_element(&conjugate_by_p_exponential(&p, &target, hbar).unwrap(), &psi);
        let err = interior_relative_error(&sandwich, &symbolic, 8.0);
        prop_assert!(err < 1e-9, "relative error {err:e}");
    }
}

#[test]
fn x_p4_bracket_on_the_grid() {
    let grid = SpatialGrid::new(512, 16.0, 1.0).unwrap();
    let psi = gaussian_packet(&grid, 0.0, 0.2, 1.0).unwrap();
    let x = AlgebraElement::x(1.0.into());
    let p4 = AlgebraElement::p_power(4, 1.0.into());
    let lhs = apply_element(&commutator(&x, &p4, 1.0), &psi);
    let rhs = apply_element(&x, &apply_element(&p4, &psi))
        .sub(&apply_element(&p4, &apply_element(&x, &psi)))
        .unwrap();
    assert!(interior_relative_error(&rhs, &lhs, 8.0) < 1e-8);
}

#[test]
fn mixed_bracket_example() {
    let a = AlgebraElement::x(2.0.into()) + AlgebraElement::p_power(2, 3.0.into());
    let b = AlgebraElement::p_power(3, 5.0.into());
    let want = AlgebraElement::p_power(2, Complex64::new(0.0, 30.0));
    assert_eq!(commutator(&a, &b, 1.0), want);
}
