use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structavg::construction;
use structavg::graph::fixtures;
use structavg::necessary;
use structavg::sim::{self, EnsembleConfig, InitialState, Quadrature, SimError};

fn fan_out_config(steps: usize) -> EnsembleConfig {
    let (a, b) = construction::monomial_certificate(&fixtures::fan_out_with_loop()).unwrap().pair_original();
    EnsembleConfig::new(a, b, 101, 1.0, Quadrature::Simpson, steps).unwrap()
}

#[test]
fn minimum_energy_beats_perturbed_controls() {
    let cfg = fan_out_config(40);
    let target = [1.0, 2.0, 3.0];
    let plan = sim::plan_steering(&cfg, &InitialState::Zero, &target).unwrap();
    let u = plan.control_nodes();
    let base_energy = plan.energy_of(&u);
    let winv = plan.gramian.clone().try_inverse().unwrap();
    let last = plan.input_samples.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(0xe0e0);
    for _ in 0..20 {
        let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let v: Vec<DVector<f64>> = (0..=last)
            .map(|k| {
                let s = k as f64 / last as f64;
                let val: f64 = coeffs.iter().enumerate().map(|(i, c)| c * ((i + 1) as f64 * std::f64::consts::PI * s).sin()).sum();
                DVector::from_element(1, val)
            })
            .collect();
        // remove the part of v that moves the average
        let y = &winv * plan.reach_of(&v);
        let perturbed: Vec<DVector<f64>> = v
            .iter()
            .enumerate()
            .map(|(k, vk)| &u[k] + vk - plan.input_samples[last - k].transpose() * &y)
            .collect();
        let achieved = sim::simulate_average(&cfg, &InitialState::Zero, &perturbed).unwrap();
        assert!(sim::relative_error(&achieved, &target) < 1e-3, "perturbed control misses the target");
        assert!(plan.energy_of(&perturbed) > base_energy);
    }
}

#[test]
fn steering_error_falls_with_step() {
    let target = [1.0, 2.0, 3.0];
    let errs: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&s| sim::steer_average(&fan_out_config(s), &InitialState::Zero, &target).unwrap().relative_error)
        .collect();
    assert!(errs.windows(2).all(|w| w[0] / w[1] >= 8.0), "{errs:?}");
}

#[test]
fn counting_failures_do_not_steer() {
    let g = fixtures::two_fed_six_states();
    assert!(necessary::counting_test(&g).fails());
    let (a, b) = sim::pair_for_pattern(&g);
    let cfg = EnsembleConfig::new(a, b, 41, 1.0, Quadrature::Midpoint, 20).unwrap();
    match sim::steer_average(&cfg, &InitialState::Zero, &[1.0; 6]) {
        Err(SimError::SingularGramian { .. }) => {}
        Ok(r) => assert!(r.relative_error > 0.1, "{r:?}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn rank_certified_pairs_steer() {
    let g = fixtures::depth_four_tree();
    let cert = construction::monomial_certificate(&g).unwrap();
    let (a, b) = cert.pair_original();
    // at T = 1 the six-state Gramian is numerically singular; a longer horizon conditions it
    let cfg = EnsembleConfig::new(a.clone(), b.clone(), 101, 1.0, Quadrature::Simpson, 40).unwrap();
    assert!(matches!(
        sim::steer_average(&cfg, &InitialState::Zero, &[1.0; 6]),
        Err(SimError::SingularGramian { .. })
    ));
    let cfg = EnsembleConfig::new(a, b, 101, 3.0, Quadrature::Simpson, 200).unwrap();
    let r = sim::steer_average(&cfg, &InitialState::Zero, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(r.relative_error < 1e-3 && r.gramian_condition < sim::GRAMIAN_CONDITION_LIMIT, "{r:?}");
    let cfg = fan_out_config(20);
    assert!(sim::steer_average(&cfg, &InitialState::Zero, &[0.5, -1.0, 2.0]).unwrap().relative_error < 1e-3);
}
