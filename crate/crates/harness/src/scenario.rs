use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rsma_uav::model::{aod_from_geometry, RadarTarget};
use rsma_uav::subproblems::centroid;
use rsma_uav::{Config, Cplx, User};

/// Users uniform in the service square with CN(0, 1) path gains. AoDs are
/// taken from the geometry seen from the user centroid, where the UAV starts.
pub fn generate_scenario(cfg: &Config, seed: u64) -> (Vec<User>, Vec<RadarTarget<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut users: Vec<User> = (0..cfg.num_users)
        .map(|_| {
            let position = [rng.gen_range(0.0..=cfg.area_side), rng.gen_range(0.0..=cfg.area_side)];
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            User { position, fading: Cplx::new(re * scale, im * scale), aod: 0.0 }
        })
        .collect();
    let z0 = centroid(&users);
    for u in &mut users {
        u.aod = aod_from_geometry(cfg.uav_height, z0, u.position);
    }
    (users, cfg.targets.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_inside_area() {
        let cfg = Config::default_scenario();
        let (a, _) = generate_scenario(&cfg, 11);
        let (b, _) = generate_scenario(&cfg, 11);
        assert_eq!(a, b);
        assert_ne!(a, generate_scenario(&cfg, 12).0);
        for seed in 0..200 {
            assert!(generate_scenario(&cfg, seed).0.iter().all(|u| cfg.contains(u.position)));
        }
    }

    #[test]
    fn fading_has_unit_variance() {
        let mut cfg = Config::default_scenario();
        cfg.num_users = 10_000;
        cfg.qos_thresholds = vec![1.0; cfg.num_users];
        let (users, _) = generate_scenario(&cfg, 3);
        let mean = users.iter().map(|u| u.fading.norm_sqr()).sum::<f64>() / users.len() as f64;
        assert!((mean - 1.0).abs() < 0.03, "mean |alpha|^2 = {mean}");
    }
}
