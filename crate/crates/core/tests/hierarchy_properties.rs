use meanfield_core::hierarchy::{growth_profile, riccati_reference, solve_truncated, Closure};

#[test]
fn factorized_closure_reproduces_the_closed_form() {
    let traj = solve_truncated(0.5, 10, Closure::Factorized, 1.0, 1e-3).unwrap();
    let exact = riccati_reference(0.5, 1.0, 10).unwrap();
    assert!((traj.final_state()[0] - exact[0]).abs() <= 1e-6);
}

#[test]
fn factorization_is_preserved() {
    // absolute at small data, relative where the values reach 5^20
    let small = solve_truncated(0.1, 20, Closure::Factorized, 9.0, 1e-3).unwrap();
    assert!(small.factorization_defect() <= 1e-5, "{}", small.factorization_defect());
    let large = solve_truncated(0.5, 20, Closure::Factorized, 1.8, 1e-3).unwrap();
    assert!(large.relative_factorization_defect() <= 1e-5, "{}", large.relative_factorization_defect());
}

#[test]
fn zero_closure_error_decreases_with_truncation() {
    let errors: Vec<f64> = [5, 10, 20, 40]
        .iter()
        .map(|&k| (solve_truncated(0.5, k, Closure::Zero, 1.0, 1e-3).unwrap().final_state()[0] - 1.0).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    // the truncation error is 2^-K
    assert!((errors[0] - 0.5f64.powi(5)).abs() < 1e-10);
}

#[test]
fn growth_radius_matches_the_solution() {
    let traj = solve_truncated(0.5, 12, Closure::Factorized, 1.0, 1e-3).unwrap();
    assert!((growth_profile(&traj).radius - 1.0).abs() <= 1e-6);
}
