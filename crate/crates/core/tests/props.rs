//! Property tests for the algebraic substrates.

use proptest::prelude::*;

use dmtower_core::ff::{self, Field};
use dmtower_core::SkewPoly;

fn f81() -> Field {
    Field::new(3, 4).unwrap()
}

prop_compose! {
    fn element()(idx in 0u128..81) -> u128 { idx }
}

prop_compose! {
    fn skew_poly()(coeffs in prop::collection::vec(0u128..81, 0..5)) -> Vec<u128> { coeffs }
}

fn mk(field: &Field, idxs: &[u128]) -> SkewPoly {
    SkewPoly::new(
        field,
        1,
        idxs.iter().map(|&i| field.from_index(i)).collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_ops_are_a_field(a in element(), b in element(), c in element()) {
        let f = f81();
        let (a, b, c) = (f.from_index(a), f.from_index(b), f.from_index(c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        if !a.is_zero() {
            prop_assert!((&a * &a.inverse().unwrap()).is_one());
        }
    }

    #[test]
    fn frobenius_is_additive_and_multiplicative(a in element(), b in element(), i in 0usize..6) {
        let f = f81();
        let (a, b) = (f.from_index(a), f.from_index(b));
        prop_assert_eq!((&a + &b).frq(1, i), &a.frq(1, i) + &b.frq(1, i));
        prop_assert_eq!((&a * &b).frq(1, i), &a.frq(1, i) * &b.frq(1, i));
    }

    #[test]
    fn skew_mul_associative_distributive(a in skew_poly(), b in skew_poly(), c in skew_poly()) {
        let f = f81();
        let (a, b, c) = (mk(&f, &a), mk(&f, &b), mk(&f, &c));
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let lhs = a.mul(&b.add(&c)).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap());
        prop_assert_eq!(lhs, rhs);
        let deg_sum = a.degree().and_then(|da| b.degree().map(|db| da + db));
        prop_assert_eq!(a.mul(&b).unwrap().degree(), deg_sum);
    }

    #[test]
    fn right_divmod_reconstructs(a in skew_poly(), b in skew_poly()) {
        let f = f81();
        let (a, b) = (mk(&f, &a), mk(&f, &b));
        prop_assume!(!b.is_zero());
        let (q, r) = a.right_divmod(&b).unwrap();
        if let (Some(dr), Some(db)) = (r.degree(), b.degree()) {
            prop_assert!(dr < db);
        }
        prop_assert_eq!(q.mul(&b).unwrap().add(&r), a);
    }

    #[test]
    fn right_gcd_divides_both_and_is_symmetric(a in skew_poly(), b in skew_poly()) {
        let f = f81();
        let (a, b) = (mk(&f, &a), mk(&f, &b));
        prop_assume!(!a.is_zero() || !b.is_zero());
        let g = a.right_gcd_monic(&b).unwrap();
        prop_assert!(g.is_monic());
        prop_assert_eq!(b.right_gcd_monic(&a).unwrap(), g.clone());
        for h in [&a, &b] {
            if !h.is_zero() {
                let (_, r) = h.right_divmod(&g).unwrap();
                prop_assert!(r.is_zero());
            }
        }
    }

    #[test]
    fn evaluation_is_fq_linear(poly in skew_poly(), a in element(), b in element(), s in 0u64..3) {
        let f = f81();
        let p = mk(&f, &poly);
        let (a, b) = (f.from_index(a), f.from_index(b));
        let lhs = p.evaluate(&(&a.scale(s) + &b)).unwrap();
        let rhs = &p.evaluate(&a).unwrap().scale(s) + &p.evaluate(&b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn kernels_are_subspaces_of_q_power_size(poly in skew_poly()) {
        let f = f81();
        let p = mk(&f, &poly);
        prop_assume!(!p.is_zero());
        let kernel = p.kernel_elements(&f).unwrap();
        let n = kernel.len();
        prop_assert!(n.is_power_of_two() || n % 3 == 0 || n == 1);
        // size is a power of q = 3
        let mut m = n;
        while m % 3 == 0 { m /= 3; }
        prop_assert_eq!(m, 1);
        prop_assert!(n as u128 <= 3u128.pow(p.degree().unwrap() as u32));
        for a in kernel.iter().take(6) {
            for b in kernel.iter().take(6) {
                prop_assert!(kernel.binary_search(&(a + b)).is_ok());
            }
        }
        // the nullspace route agrees with the scan
        prop_assert_eq!(p.kernel_nullspace(&f).unwrap(), kernel);
    }

    #[test]
    fn embeddings_are_ring_morphisms(ai in 0u128..9, bi in 0u128..9) {
        let f9 = Field::new(3, 2).unwrap();
        let f81 = f81();
        let (a, b) = (f9.from_index(ai), f9.from_index(bi));
        let (ea, eb) = (ff::embed(&a, &f81).unwrap(), ff::embed(&b, &f81).unwrap());
        prop_assert_eq!(ff::embed(&(&a * &b), &f81).unwrap(), &ea * &eb);
        prop_assert_eq!(ff::embed(&(&a + &b), &f81).unwrap(), &ea + &eb);
    }
}
