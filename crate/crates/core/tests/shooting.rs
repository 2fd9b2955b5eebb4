mod common;

use common::*;
use diffrate::{
    diagnose_existence_scalar, gauss_solve, shoot, shoot_system, Diagnosis, EconomyModel,
    FailureReason, Forcing, Matrix, PriceSystem, RateVector, ScalarVariant, ShootOptions, Vector,
};
use rand::Rng;

fn opts(steps: usize) -> ShootOptions<f64> {
    ShootOptions {
        steps: Some(steps),
        ..ShootOptions::default()
    }
}

fn two_sector() -> EconomyModel<f64> {
    let a = Matrix::from_rows(&[vec![0.2, 0.3], vec![0.4, 0.1]]).unwrap();
    EconomyModel::wage_price(a, Vector::from_vec(vec![1.0, 0.5]), 0.1, None, 1.0).unwrap()
}

#[test]
fn two_sector_round_trip() {
    let model = two_sector();
    let system = PriceSystem::new(&model, Forcing::zero(2)).unwrap();
    let v_true = [0.3, 0.7];
    let p0 = [0.6, 0.4];
    let steps = 400;
    let p_star = system.integrate_prices(&v_true, &p0, steps).unwrap();
    let r = shoot_system(&system, &p0, &p_star, &RateVector::ones(2), &opts(steps)).unwrap();
    assert!(r.converged, "{:?}", r.failure_reason);
    assert!(r.v_solution.as_vector().distance_inf(&Vector::from_vec(v_true.to_vec())) <= 1e-8);
    assert!(r.viable);
    assert_eq!(r.iterates.len(), r.iterations + 1);
    assert_eq!(r.residual_history.len(), r.iterations + 1);
}

#[test]
fn newton_steps_solve_the_linearised_system() {
    let model = two_sector();
    let system = PriceSystem::new(&model, Forcing::zero(2)).unwrap();
    let p0 = [0.6, 0.4];
    let steps = 300;
    let p_star = system.integrate_prices(&[0.3, 0.7], &p0, steps).unwrap();
    let r = shoot_system(&system, &p0, &p_star, &RateVector::ones(2), &opts(steps)).unwrap();
    for (k, pair) in r.iterates.windows(2).enumerate() {
        let (state, _) = system.integrate(&pair[0], &p0, steps, steps).unwrap();
        let g = &state.prices - &p_star;
        let d = (&pair[1] - &pair[0]).scale(1.0 / r.step_lengths[k]);
        let lin = &state.sensitivities.mul_vec(&d) + &g;
        assert!(lin.norm_inf() <= 1e-10 * (1.0 + g.norm_inf()), "iter {k}");
    }
}

#[test]
fn local_convergence_is_quadratic() {
    let mut rng = rng(51);
    for _ in 0..5 {
        let model = wage_price_economy(&mut rng, 3, 1.0);
        let system = PriceSystem::new(&model, Forcing::zero(3)).unwrap();
        let v_true = uniform_vec(&mut rng, 3, 0.2, 1.5);
        let p0 = uniform_vec(&mut rng, 3, 0.2, 1.0);
        let steps = 300;
        let p_star = system.integrate_prices(&v_true, &p0, steps).unwrap();
        let v0: Vector<f64> = v_true.iter().map(|v| v + 0.05).collect();
        let r = shoot_system(
            &system,
            &p0,
            &p_star,
            &RateVector::new(v0).unwrap(),
            &ShootOptions { tol: 1e-14, ..opts(steps) },
        )
        .unwrap();
        let h = &r.residual_history;
        // ‖G_{k+1}‖ / ‖G_k‖² bounded while above the rounding floor.
        let ratios: Vec<f64> = h
            .windows(2)
            .filter(|w| w[1] > 1e-13)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect();
        assert!(!ratios.is_empty());
        assert!(ratios.iter().all(|&q| q < 1e3), "{ratios:?}");
    }
}

#[test]
fn damping_never_increases_the_residual() {
    let mut rng = rng(52);
    for _ in 0..20 {
        let model = stable_gravitation_economy(&mut rng, 3, 1.0);
        let system = PriceSystem::new(&model, Forcing::zero(3)).unwrap();
        let v_true = uniform_vec(&mut rng, 3, 0.1, 3.0);
        let p0 = uniform_vec(&mut rng, 3, 0.2, 1.0);
        let p_star = system.integrate_prices(&v_true, &p0, 300).unwrap();
        let v0 = RateVector::new(uniform_vec(&mut rng, 3, 0.1, 3.0)).unwrap();
        let r = shoot_system(&system, &p0, &p_star, &v0, &opts(300)).unwrap();
        for w in r.residual_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}

#[test]
fn reintegration_reproduces_the_target() {
    let mut rng = rng(53);
    let model = wage_price_economy(&mut rng, 4, 2.0);
    let system = PriceSystem::new(&model, Forcing::zero(4)).unwrap();
    let p0 = uniform_vec(&mut rng, 4, 0.2, 1.0);
    let steps = 500;
    let p_star = system
        .integrate_prices(&uniform_vec(&mut rng, 4, 0.3, 1.2), &p0, steps)
        .unwrap();
    let o = opts(steps);
    let r = shoot_system(&system, &p0, &p_star, &RateVector::ones(4), &o).unwrap();
    assert!(r.converged);
    let again = system.integrate_prices(&r.v_solution, &p0, steps).unwrap();
    assert!(again.distance_inf(&p_star) <= 10.0 * o.tol);
    let last = r.final_trajectory.prices.last().unwrap();
    assert!(last.distance_inf(&again) == 0.0);
}

#[test]
fn scalar_diagnosis_agrees_with_shooting() {
    let mut rng = rng(54);
    for _ in 0..40 {
        let a = rng.gen_range(0.2..2.0);
        let horizon = rng.gen_range(0.5..2.0);
        let p0 = rng.gen_range(0.5..2.0);
        let sign = if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
        let p_star = sign * rng.gen_range(0.5..2.0);
        for variant in [ScalarVariant::Gravitation, ScalarVariant::WagePrice] {
            let model = match variant {
                ScalarVariant::Gravitation => EconomyModel::gravitation(
                    Matrix::zeros(1),
                    Some(Matrix::from_diagonal(&[a])),
                    Vector::ones(1),
                    0.0,
                    None,
                    horizon,
                ),
                ScalarVariant::WagePrice => EconomyModel::wage_price(
                    Matrix::from_diagonal(&[a]),
                    Vector::ones(1),
                    0.0,
                    Some(0.0),
                    horizon,
                ),
            }
            .unwrap();
            let diag = diagnose_existence_scalar(variant, a, horizon, p0, p_star).unwrap();
            let r = shoot(
                &model,
                &[p0],
                &[p_star],
                &Forcing::zero(1),
                &RateVector::ones(1),
                &opts(2000),
            )
            .unwrap();
            match diag {
                Diagnosis::SolvableViable { v } | Diagnosis::SolvableNonviable { v } => {
                    assert!(r.converged, "{variant:?} {a} {horizon} {p0} {p_star}");
                    // RK4 at 2000 steps against the exponential.
                    assert!((r.v_solution[0] - v).abs() < 1e-8);
                    assert_eq!(r.viable, matches!(diag, Diagnosis::SolvableViable { .. }));
                }
                Diagnosis::NoSolution => assert!(!r.converged),
                Diagnosis::Indeterminate => unreachable!(),
            }
        }
    }
}

#[test]
fn random_round_trips_mostly_converge() {
    let mut rng = rng(55);
    let mut ok = 0;
    let total = 100;
    for k in 0..total {
        let n = 1 + k % 5;
        let model = if k % 2 == 0 {
            wage_price_economy(&mut rng, n, 1.0)
        } else {
            stable_gravitation_economy(&mut rng, n, 1.0)
        };
        let system = PriceSystem::new(&model, Forcing::zero(n)).unwrap();
        let v_true = uniform_vec(&mut rng, n, 0.2, 2.0);
        let p0 = uniform_vec(&mut rng, n, 0.2, 1.0);
        let steps = 300;
        let p_star = system.integrate_prices(&v_true, &p0, steps).unwrap();
        let r = shoot_system(&system, &p0, &p_star, &RateVector::ones(n), &opts(steps)).unwrap();
        if r.converged && r.v_solution.as_vector().distance_inf(&v_true) <= 1e-6 {
            ok += 1;
        }
    }
    assert!(ok >= 95, "{ok}/{total}");
}

#[test]
fn singular_jacobian_is_reported() {
    // Zero initial prices make every sensitivity vanish.
    let model = two_sector();
    let r = shoot(
        &model.with_wage(Some(0.0)),
        &[0.0, 0.0],
        &[1.0, 1.0],
        &Forcing::zero(2),
        &RateVector::ones(2),
        &opts(100),
    )
    .unwrap();
    assert_eq!(r.failure_reason, FailureReason::SingularJacobian);
    assert!(!r.converged);
}

#[test]
fn newton_direction_matches_dense_solve() {
    let model = two_sector();
    let system = PriceSystem::new(&model, Forcing::zero(2)).unwrap();
    let p0 = [0.6, 0.4];
    let p_star = [0.5, 0.45];
    let r = shoot_system(
        &system,
        &p0,
        &p_star,
        &RateVector::ones(2),
        &ShootOptions { max_iter: 1, damping: false, ..opts(200) },
    )
    .unwrap();
    let (state, _) = system.integrate(&[1.0, 1.0], &p0, 200, 200).unwrap();
    let g = &state.prices - &Vector::from_vec(p_star.to_vec());
    let d = gauss_solve(&state.sensitivities, &-&g).unwrap();
    let expected = &Vector::ones(2) + &d;
    assert!(r.iterates[1].distance_inf(&expected) < 1e-14);
}
