use std::sync::Arc;

use maslov_lab::coefficient::CoefficientPath;
use maslov_lab::corpus::{brake_corpus, CorpusOptions};
use maslov_lab::path::{iterate_path, SymplecticPath};
use maslov_lab::symplectic::{n_matrix, rotation, symplectic_inverse, Mat};
use proptest::prelude::*;

fn one_system(seed: u64, n: usize) -> Arc<CoefficientPath> {
    let opts = CorpusOptions { seed, size: 1, dims: vec![n], ..CorpusOptions::default() };
    Arc::clone(&brake_corpus(&opts).unwrap()[0].coefficient)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The iterate built from `γ` on `[0, 1]` by reflection is the flow of
    /// the field on `[0, k]`.
    #[test]
    fn reflected_iterate_is_the_flow(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=4) {
        let c = one_system(seed, n);
        let field = c.field();
        let base = Arc::new(SymplecticPath::unit(&field, 1.0).unwrap());
        let it = iterate_path(&base, k).unwrap();
        let direct = SymplecticPath::unit(&field, k as f64).unwrap();
        let scale = 1.0 + direct.endpoint().amax();
        prop_assert!((it.endpoint() - direct.endpoint()).amax() < 1e-6 * scale);
        prop_assert!((it.eval(0.5 * k as f64) - direct.eval(0.5 * k as f64)).amax() < 1e-6 * scale);
        // γ(2) = N γ(1)⁻¹ N γ(1)
        let g1 = base.endpoint();
        let nm = n_matrix(n);
        let g2 = &nm * symplectic_inverse(g1) * &nm * g1;
        prop_assert!((it.period_matrix().unwrap() - g2).amax() < 1e-12 * (1.0 + g1.amax().powi(2)));
    }

    #[test]
    fn corpus_draws_are_brake_symmetric(seed in any::<u64>(), n in 1usize..=3) {
        let c = one_system(seed, n);
        prop_assert!(c.is_certified());
        let nm = n_matrix(n);
        for i in 0..16 {
            let t = 0.37 * i as f64;
            prop_assert!((c.eval(-t) - &nm * c.eval(t) * &nm).amax() < 1e-9);
            prop_assert!((c.eval(t) - c.eval(t).transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn rotation_iterates_keep_turning(angle in 0.05f64..6.0, k in 1usize..=5) {
        let mut c = CoefficientPath::constant(Mat::identity(2, 2) * angle, 1.0).unwrap();
        c.validate_brake_symmetry().unwrap();
        let base = Arc::new(SymplecticPath::unit(&Arc::new(c).field(), 1.0).unwrap());
        let it = iterate_path(&base, k).unwrap();
        prop_assert!((it.endpoint() - rotation(k as f64 * angle)).amax() < 1e-9);
    }
}

#[test]
fn asymmetric_coefficients_are_not_certified() {
    // Off-diagonal blocks in a constant B break the reflection.
    let b = Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
    let mut c = CoefficientPath::constant(b, 1.0).unwrap();
    assert!(c.validate_brake_symmetry().is_err());
    assert!(!c.is_certified());
    let base = Arc::new(SymplecticPath::unit(&Arc::new(c).field(), 1.0).unwrap());
    assert!(iterate_path(&base, 2).is_err());
}
