//! Property tests for the structural invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use quartic_prym::exact::qf;
use quartic_prym::f2geom::{perm_to_orthogonal, quadratic_form, quadratic_form_of_rep, F2Class, Partition2222, Perm};
use quartic_prym::lattice::{self, LatticeVector};
use quartic_prym::periods::CMat6;
use quartic_prym::theta::{self, e_q, ThetaKernel, ThetaOptions};
use quartic_prym::Characteristic;

fn perm_strategy() -> impl Strategy<Value = Perm> {
    Just((1..=8).collect::<Vec<u8>>())
        .prop_shuffle()
        .prop_map(|p| Perm::from_images(p.try_into().unwrap()).unwrap())
}

fn lattice_vector() -> impl Strategy<Value = LatticeVector> {
    prop::array::uniform12(-5i64..=5).prop_map(|coords| LatticeVector { coords })
}

fn half_characteristic() -> impl Strategy<Value = Characteristic> {
    prop::array::uniform12(0i64..2).prop_map(|v| Characteristic::from_ints(v, 2))
}

fn test_tau() -> CMat6 {
    let mut t = CMat6::identity().map(|z| z * Complex64::new(0.0, 1.1));
    t[(0, 2)] = Complex64::new(0.25, 0.2);
    t[(2, 0)] = t[(0, 2)];
    t[(1, 5)] = Complex64::new(-0.3, 0.1);
    t[(5, 1)] = t[(1, 5)];
    t[(4, 4)] = Complex64::new(0.4, 0.9);
    t
}

proptest! {
    #[test]
    fn q_is_independent_of_representative(bits in any::<u8>()) {
        prop_assume!(bits.count_ones() % 2 == 0);
        let v = F2Class::from_bits(bits).unwrap();
        prop_assert_eq!(quadratic_form_of_rep(bits), quadratic_form(v));
        prop_assert_eq!(quadratic_form_of_rep(!bits), quadratic_form(v));
    }

    #[test]
    fn permutation_action_is_a_homomorphism(a in perm_strategy(), b in perm_strategy()) {
        prop_assert_eq!(perm_to_orthogonal(&a.then(&b)), perm_to_orthogonal(&a).mul(&perm_to_orthogonal(&b)));
        prop_assert!(perm_to_orthogonal(&a).preserves_q());
    }

    #[test]
    fn partition_action_preserves_shape(a in perm_strategy(), b in perm_strategy()) {
        let r = Partition2222::base();
        prop_assert_eq!(r.act(&a).act(&b), r.act(&a.then(&b)));
    }

    #[test]
    fn rho_is_an_isometry(x in lattice_vector(), y in lattice_vector()) {
        let (rx, ry) = (lattice::rho_apply(&x), lattice::rho_apply(&y));
        prop_assert_eq!(lattice::pairing(&rx, &ry), lattice::pairing(&x, &y));
        prop_assert_eq!(lattice::rho_apply(&rx), LatticeVector { coords: x.coords.map(|c| -c) });
    }

    #[test]
    fn hermitian_form_is_real_on_the_diagonal(x in lattice_vector()) {
        let (_, im) = lattice::hermitian_form(&x, &x);
        prop_assert_eq!(im, qf(0, 1));
    }

    #[test]
    fn reflections_words_are_unitary(word in prop::collection::vec(1u8..=7, 0..8)) {
        let g = lattice::word_element(&word);
        prop_assert!(g.preserves_pairing());
        prop_assert!(g.commutes_with_rho());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn basis_changes_are_symplectic(i in 0usize..105) {
        let e = &lattice::coset_representatives().entries[i];
        let s = lattice::sigma_g(&e.element).unwrap();
        prop_assert!(lattice::is_symplectic(&s));
        prop_assert!(lattice::e_integrality(&s));
    }

    #[test]
    fn characteristic_shift_by_integers(m in half_characteristic(), k in prop::array::uniform12(-2i64..=2)) {
        let kernel = ThetaKernel::new(&test_tau()).unwrap();
        let o = ThetaOptions::default();
        let shifted = m.add(&Characteristic::from_ints(k, 1));
        let phase: quartic_prym::exact::Q = m.prime().iter().zip(&k[6..]).map(|(a, &b)| a * qf(b, 1)).sum();
        let a = kernel.theta(&shifted, &theta::probe_z(), &o).unwrap().value;
        let b = e_q(&phase) * kernel.theta(&m, &theta::probe_z(), &o).unwrap().value;
        prop_assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
    }
}
