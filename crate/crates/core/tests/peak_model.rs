//! The analytic noise-peak probability against Monte Carlo.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sra_core::depth::PeakNoiseModel;
use sra_core::measurement::*;

/// Fraction of pure-noise draws whose largest normalized matched-filter
/// response reaches `u` standard deviations on some column.
fn monte_carlo(phi: &DictionaryMatrix, noise: &NoiseModel, levels: &[f64], draws: usize) -> Vec<f64> {
    let w = noise.inv_sqrt().unwrap();
    let (rows, cols) = (phi.rows(), phi.cols());
    let unit: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let u: Vec<f64> = (0..rows).map(|r| w[r] * phi.get(r, j)).collect();
            let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            u.into_iter().map(|a| a / norm).collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let zero = MeasurementVector::zeros(phi.freq().m());
    let mut hits = vec![0usize; levels.len()];
    for _ in 0..draws {
        let eta = add_noise_with(&zero, noise, &mut rng);
        let white: Vec<f64> = eta.real_view().iter().zip(&w).map(|(a, b)| a * b).collect();
        let peak = unit
            .iter()
            .map(|u| u.iter().zip(&white).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max);
        for (h, u) in hits.iter_mut().zip(levels) {
            if peak >= *u {
                *h += 1;
            }
        }
    }
    hits.into_iter().map(|h| h as f64 / draws as f64).collect()
}

fn compare(noise: &NoiseModel) -> Vec<(f64, f64, f64)> {
    let phi = build_phi(&DistanceGrid::default(), &FrequencyConfig::default());
    let model = PeakNoiseModel::new(&phi, noise).unwrap();
    let j = 100;
    let levels: Vec<f64> = (4..=12).map(|i| i as f64 * 0.5).collect();
    let mc = monte_carlo(&phi, noise, &levels, 20_000);
    levels
        .iter()
        .zip(mc)
        .map(|(u, p_mc)| (*u, model.probability(u * model.amplitude_sd(j), j), p_mc))
        .collect()
}

#[test]
fn tail_model_matches_simulation() {
    for (u, p, p_mc) in compare(&NoiseModel::isotropic(3, 0.1)) {
        // conservative everywhere, accurate where a 0.9 confidence test is decided
        assert!(p >= p_mc - 0.05, "u = {u}: model {p} below simulation {p_mc}");
        if p <= 0.25 {
            assert!((p - p_mc).abs() <= 0.05, "u = {u}: model {p} vs simulation {p_mc}");
        }
    }
}

#[test]
fn tail_model_is_conservative_for_unequal_channels() {
    for (u, p, p_mc) in compare(&NoiseModel::paired(&[0.05, 0.2, 0.1]).unwrap()) {
        assert!(p >= p_mc - 0.01, "u = {u}: model {p} below simulation {p_mc}");
    }
}
