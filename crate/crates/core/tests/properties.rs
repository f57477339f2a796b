mod common;

use common::*;
use proptest::prelude::*;
use stickygeom_core::frechet::{directional_derivative, frechet_value, pull};
use stickygeom_core::spaces::Space;
use stickygeom_core::transport::wq_lp;

fn spaces() -> Vec<Space> {
    let mut v: Vec<Space> = geodesic_variants().into_iter().map(|(_, s)| s).collect();
    v.push(theta_graph());
    v
}

fn space_index() -> impl Strategy<Value = usize> {
    0..spaces().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn metric_axioms(i in space_index(), seed in any::<u64>()) {
        let mut spaces = spaces();
        spaces.push(finite_cone());
        let s = &spaces[i];
        let mut r = rng(seed);
        let (x, y, z) = (random_point(s, &mut r, 3.0), random_point(s, &mut r, 3.0), random_point(s, &mut r, 3.0));
        prop_assert_eq!(s.distance(&x, &y), s.distance(&y, &x));
        prop_assert_eq!(s.distance(&x, &x), 0.0);
        prop_assert!(s.distance(&x, &z) <= s.distance(&x, &y) + s.distance(&y, &z) + 1e-12);
        if x.euclid().iter().all(|&e| e == 0.0) {
            prop_assert_eq!(s.distance(&x, &s.apex()), x.radius());
        }
    }

    #[test]
    fn geodesics_are_additive_and_npc(i in space_index(), seed in any::<u64>(), t in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let s = &spaces()[i];
        let mut r = rng(seed);
        let (x, y, z) = (random_point(s, &mut r, 3.0), random_point(s, &mut r, 3.0), random_point(s, &mut r, 3.0));
        let g = s.geodesic_point(&x, &y, t).unwrap();
        let l = s.distance(&x, &y);
        prop_assert!((s.distance(&x, &g) + s.distance(&g, &y) - l).abs() <= 1e-12 * l.max(1.0));
        prop_assert!((s.distance(&x, &g) - t * l).abs() <= 1e-9 * l.max(1.0));
        let lhs = s.distance(&z, &g).powi(2);
        let rhs = (1.0 - t) * s.distance(&z, &x).powi(2) + t * s.distance(&z, &y).powi(2) - (1.0 - t) * t * l * l;
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }

    #[test]
    fn pulls_are_one_lipschitz(i in space_index(), seed in any::<u64>()) {
        let s = &spaces()[i];
        let mut r = rng(seed);
        let sigma = random_direction(s, &mut r);
        let (z, w) = (random_point(s, &mut r, 3.0), random_point(s, &mut r, 3.0));
        prop_assert!((pull(s, &sigma, &z) - pull(s, &sigma, &w)).abs() <= s.distance(&z, &w) + 1e-12);
    }

    #[test]
    fn derivative_moves_at_most_w1(i in space_index(), seed in any::<u64>()) {
        let s = &spaces()[i];
        let mut r = rng(seed);
        let p = random_measure(s, &mut r, 4);
        let q = random_measure(s, &mut r, 4);
        let sigma = random_direction(s, &mut r);
        let gap = (directional_derivative(s, &p, &sigma) - directional_derivative(s, &q, &sigma)).abs();
        prop_assert!(gap <= wq_lp(s, &p, &q, 1.0).unwrap() + 1e-9);
    }

    #[test]
    fn first_variation_along_rays(i in space_index(), seed in any::<u64>(), h in 1e-3f64..2.0) {
        // F(σ, h) = F(𝒪) + h ∇_σ F(𝒪) + h²/2 on a cone
        let s = &spaces()[i];
        if s.is_open_book() {
            return Ok(());
        }
        let mut r = rng(seed);
        let p = random_measure(s, &mut r, 6);
        let sigma = random_direction(s, &mut r);
        let x = s.point(sigma, h).unwrap();
        let f0 = frechet_value(s, &p, &s.apex(), None);
        let fh = frechet_value(s, &p, &x, None);
        let d = directional_derivative(s, &p, &sigma);
        prop_assert!(((fh - f0 - 0.5 * h * h) / h - d).abs() <= 1e-9);
    }
}
