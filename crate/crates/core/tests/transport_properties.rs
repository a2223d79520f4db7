use meanfield_core::measure::Configuration;
use meanfield_core::transport::{brute_force_w1, mk_distance, mk_distance_with, Exponent, Solver};
use proptest::prelude::*;

fn cloud(dim: usize, max: usize) -> impl Strategy<Value = Configuration> {
    (1..=max).prop_flat_map(move |n| {
        prop::collection::vec(-3.0f64..3.0, n * dim).prop_map(move |p| Configuration::uniform(dim, p).unwrap())
    })
}

fn pair(dim: usize, max: usize) -> impl Strategy<Value = (Configuration, Configuration)> {
    (1..=max).prop_flat_map(move |n| {
        (prop::collection::vec(-3.0f64..3.0, n * dim), prop::collection::vec(-3.0f64..3.0, n * dim))
            .prop_map(move |(a, b)| (Configuration::uniform(dim, a).unwrap(), Configuration::uniform(dim, b).unwrap()))
    })
}

fn w(a: &Configuration, b: &Configuration, r: Exponent) -> f64 {
    mk_distance(a, b, r).unwrap().distance
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_to_self_is_zero(mu in cloud(2, 9)) {
        prop_assert!(w(&mu, &mu, Exponent::One) <= 1e-12);
        prop_assert!(w(&mu, &mu, Exponent::Two) <= 1e-12);
    }

    #[test]
    fn symmetric(mu in cloud(2, 7), nu in cloud(2, 6)) {
        for r in [Exponent::One, Exponent::Two] {
            prop_assert!((w(&mu, &nu, r) - w(&nu, &mu, r)).abs() <= 1e-10);
        }
    }

    #[test]
    fn triangle_inequality(a in cloud(1, 6), b in cloud(1, 6), c in cloud(1, 6)) {
        for r in [Exponent::One, Exponent::Two] {
            prop_assert!(w(&a, &c, r) <= w(&a, &b, r) + w(&b, &c, r) + 1e-10);
        }
    }

    #[test]
    fn triangle_inequality_in_the_plane(a in cloud(2, 5), b in cloud(2, 5), c in cloud(2, 5)) {
        prop_assert!(w(&a, &c, Exponent::One) <= w(&a, &b, Exponent::One) + w(&b, &c, Exponent::One) + 1e-10);
    }

    #[test]
    fn w1_below_w2((mu, nu) in pair(2, 8)) {
        prop_assert!(w(&mu, &nu, Exponent::One) <= w(&mu, &nu, Exponent::Two) + 1e-12);
    }

    #[test]
    fn exact_solvers_agree_with_enumeration((mu, nu) in pair(2, 7)) {
        let brute = brute_force_w1(&mu, &nu).unwrap();
        let assignment = mk_distance_with(&mu, &nu, Exponent::One, Solver::Assignment).unwrap().distance;
        let flow = mk_distance_with(&mu, &nu, Exponent::One, Solver::MinCostFlow).unwrap().distance;
        prop_assert!((brute - assignment).abs() <= 1e-12);
        prop_assert!((brute - flow).abs() <= 1e-12);
    }

    #[test]
    fn monotone_coupling_is_optimal_on_the_line(mu in cloud(1, 8), nu in cloud(1, 8)) {
        for r in [Exponent::One, Exponent::Two] {
            let mono = mk_distance_with(&mu, &nu, r, Solver::Monotone).unwrap().distance;
            let flow = mk_distance_with(&mu, &nu, r, Solver::MinCostFlow).unwrap().distance;
            prop_assert!((mono - flow).abs() <= 1e-12);
        }
    }

    #[test]
    fn translation_moves_by_the_shift(mu in cloud(2, 8), sx in -2.0f64..2.0, sy in -2.0f64..2.0) {
        let shifted: Vec<f64> = mu.points().chunks(2).flat_map(|p| [p[0] + sx, p[1] + sy]).collect();
        let nu = mu.with_points(shifted).unwrap();
        let norm = (sx * sx + sy * sy).sqrt();
        prop_assert!((w(&mu, &nu, Exponent::One) - norm).abs() <= 1e-10);
        prop_assert!((w(&mu, &nu, Exponent::Two) - norm).abs() <= 1e-10);
    }

    #[test]
    fn plans_are_feasible(mu in cloud(2, 6), nu in cloud(2, 5)) {
        let t = mk_distance(&mu, &nu, Exponent::Two).unwrap();
        prop_assert!(t.plan.is_feasible(mu.weights(), nu.weights()));
    }
}
