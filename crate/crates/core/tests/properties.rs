use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tensorltc::analysis::{analyze, extend_from_subcube, ExtendOutcome, SSets};
use tensorltc::decoding::{decode_c2, DecoderConfig};
use tensorltc::harness::{exact_errors, planted};
use tensorltc::tensor::kronecker_power;
use tensorltc::testing::{theorem_bound, PlaneTester};
use tensorltc::{
    LinearCode, PartialTensor, PlaneIndex, PrimeField, Rational, TensorCode, TensorWord,
};

fn cube() -> TensorCode {
    TensorCode::new(LinearCode::parity(3).unwrap(), 3).unwrap()
}

fn bits(len: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..2, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn encoding_matches_kronecker_generator(msg in bits(8)) {
        let code = cube();
        let w = code.encode(&msg).unwrap();
        let g = kronecker_power(code.base().generator(), 3);
        prop_assert_eq!(w.data().to_vec(), g.left_mul(&msg).unwrap());
        prop_assert!(code.contains(&w).unwrap());
        let parsed = TensorWord::parse(&w.to_text()).unwrap();
        prop_assert!(code.contains(&parsed).unwrap());
    }

    #[test]
    fn membership_matches_flat_parity_checks(data in bits(27)) {
        let code = cube();
        let w = TensorWord::new(PrimeField::binary(), 3, 3, data).unwrap();
        let flat = code.flat_code().unwrap();
        prop_assert_eq!(code.contains(&w).unwrap(), flat.is_codeword(w.data()).unwrap());
    }

    #[test]
    fn robustness_chain_on_random_tensors(data in bits(27)) {
        let code = cube();
        let w = TensorWord::new(PrimeField::binary(), 3, 3, data).unwrap();
        let rho = PlaneTester::new(code.clone()).unwrap().robustness_exact(&w).unwrap();
        let dist = code.flat_code().unwrap().relative_distance_to_code(w.data()).unwrap();
        prop_assert!(rho >= theorem_bound(&code).unwrap() * dist);
        let a = analyze(&w, &code).unwrap();
        prop_assert_eq!(a.opinions.mean_local_distance(), rho);
        prop_assert!(a.inconsistency_bound.holds);
        prop_assert!(a.heavy_cover.holds);
        prop_assert!(a.s_sets.e_vanishes && a.s_sets.removal_bound_holds);
        prop_assert!(a.certificate.bound >= dist);
    }

    #[test]
    fn planted_instances_are_covered_by_heavy_planes(seed in any::<u64>(), planes in 1usize..4) {
        let code = cube();
        let w = planted(&code, planes, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let a = analyze(&w, &code).unwrap();
        prop_assert!(a.heavy_cover.holds);
        prop_assert!(a.report.pairwise_bound_holds());
        prop_assert!(a.inconsistency_bound.holds);
        let dist = code.flat_code().unwrap().relative_distance_to_code(w.data()).unwrap();
        prop_assert!(a.certificate.bound >= dist);
    }

    #[test]
    fn extension_inverts_plane_erasure(msg in bits(8), erased in prop::collection::vec(0usize..3, 3)) {
        let code = cube();
        let cw = code.encode(&msg).unwrap();
        let mut partial = PartialTensor::from_word(&cw);
        let planes: Vec<PlaneIndex> = erased.iter().enumerate().map(|(b, &i)| PlaneIndex::new(b, i)).collect();
        partial.erase_planes(&planes).unwrap();
        let sets = erased.iter().map(|&e| (0..3).filter(|&i| i != e).collect()).collect();
        let out = extend_from_subcube(&partial, &code, &SSets::from_sets(3, sets)).unwrap();
        prop_assert_eq!(out, ExtendOutcome::Extended(cw));
    }

    #[test]
    fn decoder_never_returns_a_non_codeword(msg in bits(16), t in 0usize..20, seed in any::<u64>()) {
        let base = LinearCode::hamming74();
        let code = TensorCode::new(base.clone(), 2).unwrap();
        let cw = code.encode(&msg).unwrap();
        let w = exact_errors(&cw, t, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let report = decode_c2(&w, &DecoderConfig::new(base).unwrap()).unwrap();
        if let Ok(c) = report.result {
            prop_assert!(code.contains(&c).unwrap());
            if t <= 1 {
                prop_assert_eq!(c, cw);
            }
        }
    }

    #[test]
    fn gf3_robustness_bound(data in prop::collection::vec(0u32..3, 27), seed in 0u64..50) {
        let base = LinearCode::random(3, 2, 3, seed).unwrap();
        prop_assume!(base.minimum_distance().unwrap() >= 2);
        let code = TensorCode::new(base, 3).unwrap();
        let w = TensorWord::new(PrimeField::new(3).unwrap(), 3, 3, data).unwrap();
        let rho = PlaneTester::new(code.clone()).unwrap().robustness_exact(&w).unwrap();
        let dist = code.flat_code().unwrap().relative_distance_to_code(w.data()).unwrap();
        prop_assert!(rho >= theorem_bound(&code).unwrap() * dist);
        prop_assert!(rho <= Rational::from_integer(1));
    }
}
