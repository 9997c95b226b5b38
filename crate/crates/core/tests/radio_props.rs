use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use wsn_game::radio::{
    direction_coefficient, mean_path_loss, transmission_cost, Environment, LinkGeometry, RadioProfile,
};

fn closed_form_pl(n: f64, pl_f: f64, d: f64, d0: f64, eta: f64) -> f64 {
    (pl_f + 10.0 * n * (d / d0).log10()) * eta
}

proptest! {
    #[test]
    fn path_loss_grows_with_distance(d in 10.0f64..500.0, step in 0.01f64..100.0, env in 0usize..6) {
        let env = Environment::ALL[env].params();
        let p = RadioProfile::default();
        let near = mean_path_loss(&env, &LinkGeometry::isotropic(d), &p).unwrap();
        let far = mean_path_loss(&env, &LinkGeometry::isotropic(d + step), &p).unwrap();
        prop_assert!(far > near);
    }

    #[test]
    fn direction_coefficient_in_unit_interval(theta in 0.0f64..360.0, doi_idx in 0usize..6, draw in 1e-9f64..0.999_999) {
        let doi = wsn_game::radio::DOI_VALUES[doi_idx];
        let eta = direction_coefficient(theta, doi, draw).unwrap();
        prop_assert!(eta > 0.0 && eta <= 1.0);
    }

    #[test]
    fn transmission_cost_affine_in_length(a in 1u32..5000, b in 1u32..5000, c in 1u32..5000) {
        let p = RadioProfile::default();
        let tc = |l| transmission_cost(&p, 31, l).unwrap();
        // Slope between any two lengths is the same.
        let s1 = (tc(b) - tc(a)) / (f64::from(b) - f64::from(a));
        let s2 = (tc(c) - tc(a)) / (f64::from(c) - f64::from(a));
        if a != b && a != c {
            prop_assert!((s1 - s2).abs() <= 1e-12 * s1.abs().max(1e-12));
        }
    }

    #[test]
    fn matches_closed_form(d in 10.0f64..1000.0, env in 0usize..6, theta in 0.0f64..360.0, draw in 0.001f64..0.999, iso: bool) {
        let params = Environment::ALL[env].params();
        let p = RadioProfile::default();
        let geom = LinkGeometry { distance_m: d, theta_deg: theta, doi: 0.004, isotropic: iso, direction_draw: draw };
        let eta = if iso || theta == 0.0 { 1.0 } else { draw * 0.004 };
        let expected = closed_form_pl(params.path_loss_exponent, p.free_space_loss_db, d, p.reference_distance_m, eta);
        let got = mean_path_loss(&params, &geom, &p).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9);
    }
}

#[test]
fn shadowing_sample_deviation_matches_environment() {
    for env in Environment::ALL {
        let sigma = env.params().shadowing_sigma_db;
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        let rel = (var.sqrt() - sigma).abs() / sigma;
        assert!(rel < 0.05, "{env}: sample sd {} vs {sigma}", var.sqrt());
    }
}

#[test]
fn rejects_out_of_domain_inputs() {
    assert!(direction_coefficient(10.0, 0.004, 0.0).is_err());
    assert!(direction_coefficient(10.0, 0.004, 1.0).is_err());
    assert!(direction_coefficient(360.0, 0.004, 0.5).is_err());
    let p = RadioProfile::default();
    assert!(transmission_cost(&p, 30, 1024).is_err());
    let env = Environment::OL.params();
    assert!(mean_path_loss(&env, &LinkGeometry::isotropic(5.0), &p).is_err());
}
