use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use heyde::dist::GroupDistribution;
use heyde::group::{random_endomorphism, Endomorphism, FiniteAbelianGroup};
use heyde::heyde::fuzz::{sample_automorphism, sample_heavy_law};
use heyde::heyde::{check_conditional_symmetry, construct_converse, decompose, HeydeInstance};

fn group() -> impl Strategy<Value = FiniteAbelianGroup> {
    prop_oneof![
        Just(vec![3u64]),
        Just(vec![5]),
        Just(vec![9]),
        Just(vec![15]),
        Just(vec![3, 3]),
        Just(vec![3, 9]),
        Just(vec![5, 5]),
    ]
    .prop_map(|f| FiniteAbelianGroup::new(&f).unwrap())
}

fn law(g: &FiniteAbelianGroup, atoms: &[(usize, u32)]) -> GroupDistribution {
    let total: u32 = atoms.iter().map(|a| a.1).sum();
    GroupDistribution::from_indexed(
        g,
        atoms
            .iter()
            .map(|&(x, w)| (x % g.order(), BigRational::new(w.into(), total.into()))),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn pairing_is_bilinear_and_adjoint_is_exact(g in group(), seed in any::<u64>(), x in any::<usize>(), y in any::<usize>(), z in any::<usize>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_endomorphism(&g, &mut rng);
        let adj = e.adjoint();
        let (x, y, z) = (x % g.order(), y % g.order(), z % g.order());
        prop_assert_eq!(g.pairing_phase_idx(e.apply_idx(x), y), g.pairing_phase_idx(x, adj.apply_idx(y)));
        let l = g.exponent();
        let lhs = g.pairing_phase_idx(g.add_idx(x, z), y);
        prop_assert_eq!(lhs, (g.pairing_phase_idx(x, y) + g.pairing_phase_idx(z, y)) % l);
        prop_assert_eq!(adj.adjoint(), e);
    }

    #[test]
    fn transform_of_convolution_is_product(g in group(), a in prop::collection::vec((0usize..100, 1u32..10), 1..5), b in prop::collection::vec((0usize..100, 1u32..10), 1..5)) {
        let (mu, nu) = (law(&g, &a), law(&g, &b));
        let lhs = mu.convolve(&nu).unwrap().char_fn();
        let rhs = mu.char_fn().pointwise_mul(&nu.char_fn()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let back = mu.char_fn().inverse();
        for (i, w) in back.iter().enumerate() {
            let exact = num_traits::ToPrimitive::to_f64(&mu.weight_idx(i)).unwrap();
            prop_assert!((w.re - exact).abs() < 1e-12 && w.im.abs() < 1e-12);
        }
    }

    #[test]
    fn converse_instances_round_trip(g in group(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = sample_automorphism(&g, &mut rng).unwrap();
        let kernel = alpha.one_plus().kernel();
        let omega = sample_heavy_law(&g, kernel.members(), &mut rng);
        let x2 = g.element_at((seed % g.order() as u64) as usize);
        let inst = construct_converse(&omega, &alpha, &x2).unwrap();
        prop_assert!(check_conditional_symmetry(&inst));
        let d = decompose(&inst).unwrap();
        prop_assert_eq!(&d.kernel, &kernel);
        prop_assert_eq!(&d.omega.shift(&d.x1).unwrap(), inst.mu1());
        prop_assert_eq!(&d.omega.shift(&d.x2).unwrap(), inst.mu2());
    }

    #[test]
    fn minus_identity_symmetry_is_equality(g in group(), a in prop::collection::vec((0usize..100, 1u32..10), 1..4), b in prop::collection::vec((0usize..100, 1u32..10), 1..4), same in any::<bool>()) {
        let mu1 = law(&g, &a);
        let mu2 = if same { mu1.clone() } else { law(&g, &b) };
        let inst = HeydeInstance::new(Endomorphism::scalar(&g, -1), mu1.clone(), mu2.clone()).unwrap();
        prop_assert_eq!(check_conditional_symmetry(&inst), mu1 == mu2);
    }
}
