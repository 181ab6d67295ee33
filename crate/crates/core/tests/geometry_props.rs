mod common;

use common::*;
use proptest::prelude::*;
use supergeo::geometry::{Chart, MetricContext};
use supergeo::lie_killing::{lie_derivative_bilinear, lie_derivative_function};
use supergeo::Parity;

fn chart() -> std::sync::Arc<Chart> {
    Chart::unit(&["x", "y"], &["th1", "th2"], &[]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_is_graded_antisymmetric(seed: u64, px: bool, py: bool) {
        let c = chart();
        let mut r = rng(seed);
        let x = random_field(&mut r, &c, Parity::from_bit(px), 2);
        let y = random_field(&mut r, &c, Parity::from_bit(py), 2);
        let xy = x.bracket(&y).unwrap();
        let yx = y.bracket(&x).unwrap();
        let yx = if px && py { yx } else { yx.neg() };
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn graded_jacobi(seed: u64, px: bool, py: bool, pz: bool) {
        let c = chart();
        let mut r = rng(seed);
        let x = random_field(&mut r, &c, Parity::from_bit(px), 1);
        let y = random_field(&mut r, &c, Parity::from_bit(py), 1);
        let z = random_field(&mut r, &c, Parity::from_bit(pz), 1);
        // [X,[Y,Z]] = [[X,Y],Z] + (-1)^{|X||Y|} [Y,[X,Z]]
        let lhs = x.bracket(&y.bracket(&z).unwrap()).unwrap();
        let b = y.bracket(&x.bracket(&z).unwrap()).unwrap();
        let b = if px && py { b.neg() } else { b };
        let rhs = x.bracket(&y).unwrap().bracket(&z).unwrap().add(&b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_acts_as_commutator(seed: u64, px: bool, py: bool) {
        let c = chart();
        let mut r = rng(seed);
        let x = random_field(&mut r, &c, Parity::from_bit(px), 1);
        let y = random_field(&mut r, &c, Parity::from_bit(py), 1);
        let f = random_superfunction(&mut r, c.pool(), Parity::Even, 2, false);
        let xy = x.apply(&y.apply(&f).unwrap()).unwrap();
        let yx = y.apply(&x.apply(&f).unwrap()).unwrap().negate_if(px && py);
        prop_assert_eq!(x.bracket(&y).unwrap().apply(&f).unwrap(), &xy - &yx);
    }

    #[test]
    fn lie_derivative_is_a_derivation(seed: u64) {
        let c = chart();
        let mut r = rng(seed);
        let x = random_field(&mut r, &c, Parity::Even, 1);
        let f = random_superfunction(&mut r, c.pool(), Parity::Even, 1, false);
        let g = flat(&["x", "y"], &["th1", "th2"], 0);
        let g = supergeo::geometry::BilinearForm::new(&c, g.matrix().clone()).unwrap();
        let scaled = g.scale_even(&f).unwrap();
        let lhs = lie_derivative_bilinear(&x, &scaled).unwrap();
        let rhs = g
            .scale_even(&lie_derivative_function(&x, &f).unwrap())
            .unwrap()
            .add(&lie_derivative_bilinear(&x, &g).unwrap().scale_even(&f).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn divergence_of_killing_fields_vanishes(seed: u64, odd: bool) {
        let g = flat(&["x", "y"], &["th1", "th2"], 0);
        let ctx = MetricContext::new(&g).unwrap();
        let mut r = rng(seed);
        let x = combination(&mut r, &known_killing(&g), Parity::from_bit(odd));
        prop_assert!(ctx.divergence(&x).unwrap().is_zero());
    }
}
