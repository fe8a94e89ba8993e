use chainsynth::cli::sample_sphere;
use chainsynth::exact::int;
use chainsynth::oracle3::example_controller;
use chainsynth::simulate::{integrate, verify_control_bound, verify_theta_decay, SimulationConfig};
use chainsynth::synthesis::{synthesize, SynthesisParams};
use chainsynth::theta::{dilate, solve_theta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn final_state_shrinks_with_theta_stop() {
    let spec = example_controller();
    let x0 = [0.4, -1.0, 2.0];
    let mut last = f64::INFINITY;
    for stop in [1e-4, 1e-6, 1e-8] {
        let cfg = SimulationConfig {
            theta_stop: stop,
            ..SimulationConfig::default()
        };
        let rec = integrate(&spec, &x0, &cfg).unwrap();
        let x_final = &rec.samples.last().unwrap().x;
        assert!(norm(x_final) < last);
        last = norm(x_final);
        let th = solve_theta(&spec, &x0).unwrap().theta;
        assert!((rec.time_of_motion - th).abs() <= 1e-8 * th);
    }
}

#[test]
fn time_of_motion_is_dilation_covariant() {
    let spec = synthesize(&SynthesisParams::new(3, int(2))).unwrap().0;
    let x0 = [0.3, 0.2, -0.1];
    let base = integrate(&spec, &x0, &SimulationConfig::default())
        .unwrap()
        .time_of_motion;
    for lambda in [0.2, 3.0] {
        let scaled = integrate(&spec, &dilate(lambda, &x0), &SimulationConfig::default())
            .unwrap()
            .time_of_motion;
        assert!((scaled - lambda * base).abs() <= 1e-4 * lambda * base);
    }
}

#[test]
fn random_starts_respect_the_bound() {
    let spec = example_controller();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..20 {
        let x0 = sample_sphere(&mut rng, 3, [0.01, 1.0, 100.0][k % 3]);
        let rec = integrate(&spec, &x0, &SimulationConfig::default()).unwrap();
        assert!(verify_control_bound(&rec, &spec).unwrap() <= 1e-9);
        assert!(rec.max_stage_control <= 1.0 + 1e-9);
        assert!(verify_theta_decay(&rec, &spec).unwrap() <= 1e-6 * rec.theta0);
    }
}

#[test]
fn four_dimensional_decay() {
    let spec = synthesize(&SynthesisParams::new(4, int(1))).unwrap().0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x0 = sample_sphere(&mut rng, 4, 1.0);
    let rec = integrate(&spec, &x0, &SimulationConfig::default()).unwrap();
    assert!(verify_theta_decay(&rec, &spec).unwrap() <= 1e-6 * rec.theta0);
    for w in rec.samples.windows(2) {
        assert!(w[1].t > w[0].t && w[1].theta < w[0].theta);
    }
}
