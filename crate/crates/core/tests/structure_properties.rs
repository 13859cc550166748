use nalgebra::DMatrix;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slag_core::harish_chandra::{iwasawa, Basis, GroupElement};
use slag_core::lattice::{boost_matrix_exact, boost_matrix_f64, q_value, GramLattice, LatticeVector, PositivePlane};
use slag_core::rational::{rat, RatMatrix, Rational};
use slag_core::GroupSpec;

fn two_u() -> GramLattice {
    GramLattice::parse("2U").unwrap()
}

/// `(ac, bd, ad, −bc)` is isotropic in U⊕U for every choice.
fn isotropic() -> impl Strategy<Value = LatticeVector> {
    (-4i64..=4, -4i64..=4, -4i64..=4, -4i64..=4)
        .prop_map(|(a, b, c, d)| LatticeVector::new(vec![a * c, b * d, a * d, -b * c]))
        .prop_filter("nonzero", |v| v.coords.iter().any(|&x| x != 0))
}

fn exact_plane() -> impl Strategy<Value = PositivePlane> {
    (1i64..=4, 1i64..=4, 1i64..=4, 1i64..=4, -1i64..=1, -1i64..=1).prop_filter_map(
        "positive span",
        |(a, b, c, d, x, y)| PositivePlane::parse(&two_u(), &format!("{a}e1+{b}e2,{x}e1+{y}e2+{c}e3+{d}e4")).ok(),
    )
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn preserves_form(a: &RatMatrix, q: &RatMatrix) -> bool {
    a.transpose().mul(q).mul(a) == *q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_boost_preserves_form_and_is_a_homomorphism(
        plane in exact_plane(),
        e in isotropic(),
        l1 in positive_rational(),
        l2 in positive_rational(),
    ) {
        let q = two_u().gram_rational();
        let a1 = boost_matrix_exact(&plane, &e, &l1).unwrap();
        let a2 = boost_matrix_exact(&plane, &e, &l2).unwrap();
        prop_assert!(preserves_form(&a1, &q));
        let a12 = boost_matrix_exact(&plane, &e, &(&l1 * &l2)).unwrap();
        prop_assert_eq!(a1.mul(&a2), a12);
        prop_assert_eq!(boost_matrix_exact(&plane, &e, &Rational::one()).unwrap(), RatMatrix::identity(4));
        // A e = λ⁻¹ e
        let image = a1.mul_vec(&e.to_rational());
        let expect: Vec<Rational> = e.to_rational().iter().map(|x| x / &l1).collect();
        prop_assert_eq!(image, expect);
    }

    #[test]
    fn float_boost_matches_exact(plane in exact_plane(), e in isotropic(), l in positive_rational()) {
        let exact = boost_matrix_exact(&plane, &e, &l).unwrap().to_f64();
        let approx = boost_matrix_f64(&plane, &e, slag_core::rational::to_f64(&l)).unwrap();
        prop_assert!((exact - approx).amax() < 1e-9);
    }

    #[test]
    fn e_prime_is_isotropic_and_reflection_is_involutive(plane in exact_plane(), e in isotropic()) {
        let lattice = two_u();
        let e_prime = plane.reflect_e_prime_exact(&e).unwrap();
        prop_assert!(lattice.pairing_rational(&e_prime, &e_prime).is_zero());
        // reflecting e' returns e
        let (p, perp) = plane.project_exact(&e_prime).unwrap();
        let back: Vec<Rational> = p.iter().zip(&perp).map(|(a, b)| a - b).collect();
        prop_assert_eq!(back, e.to_rational());
        let pi = plane.exact_projector().unwrap();
        prop_assert_eq!(pi.mul(&pi), pi);
    }

    #[test]
    fn e_prime_pairs_positively_on_random_planes(seed in 0u64..10_000, e in isotropic()) {
        let plane = PositivePlane::random(&two_u(), seed).unwrap();
        let e_prime = plane.reflect_e_prime(&e).unwrap();
        prop_assert!(plane.pairing(&e_prime, &e_prime).abs() < 1e-8 * e.to_f64().norm_squared().max(1.0));
        prop_assert!(plane.pairing(&e.to_f64(), &e_prime) > 0.0);
        let twice = plane.reflect(&e_prime).unwrap();
        prop_assert!((twice - e.to_f64()).amax() < 1e-9);
    }
}

#[test]
fn non_isotropic_input_is_rejected() {
    let plane = PositivePlane::parse(&two_u(), "e1+e2,e3+e4").unwrap();
    let v = LatticeVector::new(vec![1, 1, 0, 0]);
    assert_eq!(q_value(&two_u(), &v).unwrap(), 2);
    assert!(plane.reflect_e_prime(&v).is_err());
    assert!(boost_matrix_exact(&plane, &v, &rat(2, 1)).is_err());
}

const SPECS: [(u32, u32); 8] = [(1, 1), (1, 2), (1, 3), (2, 2), (1, 5), (2, 3), (2, 4), (3, 3)];

fn synthesize(seed: u64) -> (GroupSpec, GroupElement, Vec<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, q) = SPECS[rng.gen_range(0..SPECS.len())];
    let spec = GroupSpec::new(p, q).unwrap();
    let n = GroupElement::random_unipotent(spec, 0.7, &mut rng);
    let h: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.5..2.5)).collect();
    let a = GroupElement::torus(spec, &h).unwrap();
    let k = GroupElement::random_compact(spec, &mut rng);
    let g = n.in_basis(Basis::Diagonal).mul(&a).mul(&k);
    (spec, g, h, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn iwasawa_recovers_synthesized_factors(seed in any::<u64>()) {
        let (spec, g, h, _) = synthesize(seed);
        let tri = iwasawa(&g).unwrap();
        let size = spec.n() as usize;
        prop_assert!((tri.reconstruct() - g.matrix()).amax() < 1e-9);
        for (got, want) in tri.h.iter().zip(&h) {
            prop_assert!((got - want).abs() < 1e-9);
        }
        let n = tri.n.matrix();
        for i in 0..size {
            prop_assert!((n[(i, i)] - 1.0).abs() < 1e-9);
            for j in 0..i {
                prop_assert!(n[(i, j)].abs() < 1e-9);
            }
        }
        let k = tri.k.matrix();
        prop_assert!((k * k.transpose() - DMatrix::identity(size, size)).amax() < 1e-9);
        prop_assert!(GroupElement::new(spec, k.clone(), Basis::Diagonal).is_ok());
    }

    #[test]
    fn torus_part_is_left_n_and_right_k_invariant(seed in any::<u64>()) {
        let (spec, g, _, mut rng) = synthesize(seed);
        let h = iwasawa(&g).unwrap().h;
        let n = GroupElement::random_unipotent(spec, 0.7, &mut rng);
        let k = GroupElement::random_compact(spec, &mut rng);
        let left = n.in_basis(Basis::Diagonal).mul(&g);
        let right = g.mul(&k);
        for moved in [left, right] {
            let h2 = iwasawa(&moved).unwrap().h;
            for (a, b) in h.iter().zip(&h2) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
