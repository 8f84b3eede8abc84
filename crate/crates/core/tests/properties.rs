use std::collections::BTreeSet;

use homhash_core::attack::saturation_check;
use homhash_core::group::{
    character_eval, orthogonal_subgroup, solve_kernel_from_orthogonal_samples, subgroup_enumerate,
};
use homhash_core::hash::bits_to_word;
use homhash_core::sim::{qft_group, uniform_superposition};
use homhash_core::{
    gen_params, kernel_bruteforce, GenRequest, GroupElement, GroupSpec, HomomorphicHash, Limits, StateVector,
    SubgroupBasis,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn group_spec() -> impl Strategy<Value = GroupSpec> {
    prop::collection::vec(2u64..=12, 1..=4)
        .prop_filter("desk scale", |o| o.iter().product::<u64>() <= 4096)
        .prop_map(|o| GroupSpec::new(o).unwrap())
}

fn element(spec: &GroupSpec) -> impl Strategy<Value = GroupElement> {
    let spec = spec.clone();
    spec.orders().iter().map(|&n| 0..n).collect::<Vec<_>>().prop_map(move |r| spec.element(r).unwrap())
}

fn with_elements(count: usize) -> impl Strategy<Value = (GroupSpec, Vec<GroupElement>)> {
    group_spec().prop_flat_map(move |s| {
        let e = prop::collection::vec(element(&s), count);
        (Just(s), e)
    })
}

fn with_subgroup() -> impl Strategy<Value = SubgroupBasis> {
    group_spec().prop_flat_map(|s| {
        prop::collection::vec(element(&s), 0..=3).prop_map(move |g| SubgroupBasis::new(s.clone(), g).unwrap())
    })
}

fn family() -> impl Strategy<Value = HomomorphicHash> {
    let xor = (3usize..=12, 1usize..=8, any::<u64>()).prop_filter_map("n < m", |(m, n, seed)| {
        (n < m).then(|| gen_params(&GenRequest::XorMatrix { input_bits: m, output_bits: n }, seed).unwrap())
    });
    let crc = (3usize..=12, 1usize..=8, any::<u64>()).prop_filter_map("n < m", |(m, n, seed)| {
        (n < m).then(|| gen_params(&GenRequest::XorCrc { input_bits: m, output_bits: n }, seed).unwrap())
    });
    let kfm =
        (prop::sample::select(vec![(23u64, 11u64), (47, 23), (31, 5), (43, 7), (67, 11)]), 2usize..=3, any::<u64>())
            .prop_map(|((p, q), blocks, seed)| gen_params(&GenRequest::Kfm { p, q, blocks }, seed).unwrap());
    let rsa = prop::sample::select(vec![(13u64, 11u64, 3u64), (31, 7, 3), (37, 41, 5), (29, 53, 4)])
        .prop_map(|(p, q, e)| HomomorphicHash::rsa(p, q, e).unwrap());
    prop_oneof![xor, crc, kfm, rsa]
}

fn enumerate(b: &SubgroupBasis) -> BTreeSet<GroupElement> {
    subgroup_enumerate(b, 1 << 16).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn character_is_multiplicative((spec, e) in with_elements(3)) {
        let sum = spec.add(&e[1], &e[2]).unwrap();
        let lhs = character_eval(&spec, &e[0], &sum).unwrap();
        let rhs = character_eval(&spec, &e[0], &e[1]).unwrap() * character_eval(&spec, &e[0], &e[2]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn character_is_symmetric((spec, e) in with_elements(2)) {
        prop_assert_eq!(character_eval(&spec, &e[0], &e[1]).unwrap(), character_eval(&spec, &e[1], &e[0]).unwrap());
    }

    #[test]
    fn double_orthogonal_and_order_product(h in with_subgroup()) {
        let perp = orthogonal_subgroup(&h).unwrap();
        let back = orthogonal_subgroup(&perp).unwrap();
        let (hs, ps) = (enumerate(&h), enumerate(&perp));
        prop_assert_eq!(enumerate(&back), hs.clone());
        prop_assert_eq!(hs.len() as u64 * ps.len() as u64, h.group().order());
        for g in &ps {
            for x in &hs {
                prop_assert!(character_eval(h.group(), g, x).unwrap().is_one());
            }
        }
    }

    #[test]
    fn solvers_agree(h in with_subgroup()) {
        let direct = enumerate(&orthogonal_subgroup(&h).unwrap());
        let solved = enumerate(&solve_kernel_from_orthogonal_samples(h.generators(), h.group()).unwrap());
        prop_assert_eq!(direct, solved);
    }

    #[test]
    fn homomorphism(h in family(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let spec = h.input_group();
        for _ in 0..50 {
            let x = spec.element_at(rng.gen_range(0..spec.order()));
            let y = spec.element_at(rng.gen_range(0..spec.order()));
            let lhs = h.eval(&spec.add(&x, &y).unwrap()).unwrap();
            let rhs = h.add_outputs(&h.eval(&x).unwrap(), &h.eval(&y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn compressing_instances_have_nontrivial_kernel(h in family()) {
        prop_assume!(h.is_compressing());
        let truth = kernel_bruteforce(&h, &Limits::default()).unwrap();
        prop_assert!(truth.kernel_elements.len() >= 2);
        prop_assert!(truth.kernel_elements.contains(&h.input_group().identity()));
        prop_assert_eq!(
            truth.kernel_elements.len() as u64 * truth.orthogonal_elements.len() as u64,
            h.input_group().order()
        );
    }

    #[test]
    fn oracle_orthogonal_matches_solver(h in family()) {
        let truth = kernel_bruteforce(&h, &Limits::default()).unwrap();
        let kernel = SubgroupBasis::new(h.input_group().clone(), truth.kernel_elements.iter().cloned().collect()).unwrap();
        prop_assert_eq!(enumerate(&orthogonal_subgroup(&kernel).unwrap()), truth.orthogonal_elements);
    }

    #[test]
    fn crc_distributes_over_xor(m in 4usize..=16, n in 1usize..=8, seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(n < m);
        let h = gen_params(&GenRequest::XorCrc { input_bits: m, output_bits: n }, seed).unwrap();
        let spec = h.input_group();
        let mask = (1u64 << m) - 1;
        let (a, b) = (a & mask, b & mask);
        let bits = |w: u64| spec.element((0..m).map(|j| (w >> (m - 1 - j)) & 1).collect()).unwrap();
        let word = |w: u64| bits_to_word(&h.eval(&bits(w)).unwrap());
        prop_assert_eq!(word(a ^ b), word(a) ^ word(b));
    }

    #[test]
    fn saturation_measure_is_monotone((spec, e) in with_elements(6)) {
        let mut last = 1;
        for i in 0..=e.len() {
            let s = saturation_check(&e[..i], &spec, 2).unwrap();
            prop_assert!(s.measure >= last);
            prop_assert_eq!(s.measure, enumerate(&SubgroupBasis::new(spec.clone(), e[..i].to_vec()).unwrap()).len() as u64);
            last = s.measure;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn qft_preserves_norm(spec in group_spec(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let raw: Vec<Complex64> = (0..spec.order()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let state = StateVector::from_amplitudes(spec.clone(), raw.into_iter().map(|a| a / norm).collect()).unwrap();
        let out = qft_group(&state).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qft_of_uniform_is_delta(spec in group_spec()) {
        let out = qft_group(&uniform_superposition(&spec, 1 << 20).unwrap()).unwrap();
        let id = out.amplitude(&spec.identity());
        prop_assert!((id - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }
}
