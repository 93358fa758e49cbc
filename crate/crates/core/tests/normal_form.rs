mod common;

use maslov_lab::normal_form::{symmetric_normal_form, NormalFormCase};
use maslov_lab::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reverse_constructed_instances_round_trip(seed in any::<u64>(), n in 2usize..=4, parallel in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::normal_form_instance(&mut rng, n, parallel);
        let c = symmetric_normal_form(&inst.m, &inst.xi, &inst.eta).unwrap();
        prop_assert!(c.passes(), "{:?}", c);
        prop_assert!(c.residual <= 1e-9);
        prop_assert_eq!(c.case == NormalFormCase::Parallel, parallel);
        let dim = 2 * n - 2;
        let got = common::power_traces(&c.reduced, dim);
        let want = common::power_traces(&inst.reduced, dim);
        for (x, y) in got.iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-7 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn broken_hypotheses_are_refused(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::normal_form_instance(&mut rng, n, false);
        let eta = &inst.eta * 2.0;
        prop_assert!(matches!(symmetric_normal_form(&inst.m, &inst.xi, &eta), Err(Error::Precondition(_))));
    }
}
