mod common;

use maslov_lab::brake::EllipsoidModel;
use maslov_lab::index::galerkin::TruncationScheme;
use maslov_lab::index::index_l_galerkin;
use maslov_lab::symplectic::LagrangianFrame;
use nalgebra::DVector;
use proptest::prelude::*;

fn radii_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..3.0, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gauge_is_positively_homogeneous(radii in radii_strategy(), s in 0.01f64..50.0, seed in prop::collection::vec(-2.0f64..2.0, 6)) {
        let e = EllipsoidModel::new(radii).unwrap();
        let n = e.n();
        let x = DVector::from_fn(2 * n, |i, _| seed[i]);
        let g = e.gauge(&x);
        prop_assert!((e.gauge(&(&x * s)) - s * g).abs() <= 1e-12 * (1.0 + s * g));
        prop_assert!((e.hamiltonian(&x) - g * g).abs() <= 1e-12 * (1.0 + g * g));
    }

    /// Scaling every radius by `λ` scales periods by `λ²`, the Hessian by
    /// `λ⁻²` and leaves all index counts alone.
    #[test]
    fn scaling_the_radii(radii in radii_strategy(), lambda in 0.3f64..3.0, m in 1usize..=8) {
        let a = EllipsoidModel::new(radii.clone()).unwrap();
        let b = EllipsoidModel::new(radii.iter().map(|r| r * lambda).collect()).unwrap();
        let (oa, ob) = (a.orbits().unwrap(), b.orbits().unwrap());
        for (x, y) in oa.iter().zip(&ob) {
            prop_assert!((y.period - lambda * lambda * x.period).abs() <= 1e-12 * y.period);
            prop_assert!(y.brake_defect() < 1e-10);
        }
        let diff = (b.hessian() * (lambda * lambda) - a.hessian()).amax();
        prop_assert!(diff < 1e-12 * a.hessian().amax());
        for j in 0..a.n() {
            prop_assert_eq!(a.closed_form_l0(j, m), b.closed_form_l0(j, m));
            prop_assert!((a.closed_form_mean(j) - b.closed_form_mean(j)).abs() < 1e-12 * a.closed_form_mean(j));
        }
    }

    #[test]
    fn closed_form_counts_integers_below_the_turns(radii in radii_strategy(), m in 1usize..=30) {
        let e = EllipsoidModel::new(radii.clone()).unwrap();
        for j in 0..e.n() {
            let (mut i, mut nu) = (0, 0);
            for rk in &radii {
                let (c, h) = common::count_below(m as f64 * (radii[j] / rk).powi(2));
                i += c;
                nu += h;
            }
            prop_assert_eq!(e.closed_form_l0(j, m), (i, nu));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn engine_matches_closed_form_on_random_ellipsoids(radii in prop::collection::vec(0.7f64..1.6, 2..=2), m in 1usize..=4) {
        let e = EllipsoidModel::new(radii).unwrap();
        prop_assume!(!e.is_resonant());
        let n = e.n();
        for o in e.orbits().unwrap() {
            let (i, nu) = e.closed_form_l0(o.j, m);
            // Near-integer turn counts would be degenerate to working precision.
            let margin = (0..n)
                .map(|k| {
                    let t = m as f64 * (o.radius / e.radii()[k]).powi(2);
                    (t - t.round()).abs()
                })
                .filter(|d| *d > 1e-9)
                .fold(1.0, f64::min);
            prop_assume!(margin > 1e-3);
            let r = index_l_galerkin(&o.coefficient.field().iterated(m), &LagrangianFrame::l0(n), &TruncationScheme::default()).unwrap();
            prop_assert_eq!((r.index, r.nullity), (i, nu));
        }
    }
}
