//! Synthetic two-class bump signals for separability experiments.
//!
//! Class 0 carries one positive Gaussian bump; class 1 a positive and a
//! negative bump offset by 0.002. Bumps are unnormalized Gaussians with
//! peak 1 and live on the uniform grid `i / (n - 1)` over `[0, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::harness::dataset::LabeledDataset;
use crate::signal::DiscreteSignal;

pub const DEFAULT_GRID_LEN: usize = 256;

const SIGMA_POSITIVE: f64 = 0.01;
const SIGMA_DIPOLE: f64 = 0.01 / std::f64::consts::SQRT_2;
const DIPOLE_HALF_GAP: f64 = 0.001;
/// `0.001 * sqrt(5)`
const SIGMA_BLIP: f64 = 0.002_236_067_977_499_79;
const BLIP_AMPLITUDE: f64 = 0.5;
const NOISE_SCALE: f64 = 0.1;

/// Gaussian bump centred at `center` with peak value 1.
pub fn bump(t: f64, center: f64, sigma: f64) -> f64 {
    let z = (t - center) / sigma;
    (-0.5 * z * z).exp()
}

fn center(rng: &mut ChaCha8Rng) -> f64 {
    0.98 * rng.random::<f64>() + 0.01
}

/// `n_per_class` signals of each class on a 256-point grid.
pub fn gen_separability_data(n_per_class: usize, noisy: bool, seed: u64) -> Result<LabeledDataset> {
    gen_separability_data_on_grid(n_per_class, noisy, seed, DEFAULT_GRID_LEN)
}

/// As [`gen_separability_data`] with an explicit grid length. Class 0 rows
/// come first, then class 1.
pub fn gen_separability_data_on_grid(
    n_per_class: usize,
    noisy: bool,
    seed: u64,
    grid_len: usize,
) -> Result<LabeledDataset> {
    if n_per_class == 0 {
        return Err(Error::InvalidParameter(
            "need at least one signal per class".into(),
        ));
    }
    if grid_len < 2 {
        return Err(Error::InvalidParameter(
            "grid needs at least two samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..grid_len)
        .map(|i| i as f64 / (grid_len - 1) as f64)
        .collect();

    let mut signals = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for class in 0..2usize {
        for _ in 0..n_per_class {
            let x = center(&mut rng);
            let mut values: Vec<f64> = grid
                .iter()
                .map(|&t| match class {
                    0 => bump(t, x, SIGMA_POSITIVE),
                    _ => {
                        bump(t, x + DIPOLE_HALF_GAP, SIGMA_DIPOLE)
                            - bump(t, x - DIPOLE_HALF_GAP, SIGMA_DIPOLE)
                    }
                })
                .collect();
            if noisy {
                let alpha = if rng.random::<bool>() {
                    BLIP_AMPLITUDE
                } else {
                    -BLIP_AMPLITUDE
                };
                let blip_at = center(&mut rng);
                for (v, &t) in values.iter_mut().zip(&grid) {
                    let eps: f64 = rng.sample(StandardNormal);
                    *v += alpha * bump(t, blip_at, SIGMA_BLIP) + NOISE_SCALE * eps;
                }
            }
            signals.push(DiscreteSignal::from_flat(grid.clone(), values, 1, 1)?);
            labels.push(class);
        }
    }
    let name = if noisy {
        "separability-noisy"
    } else {
        "separability"
    };
    LabeledDataset::from_ids(name, signals, labels, vec!["0".into(), "1".into()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_labels() {
        let d = gen_separability_data(1, false, 3).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.labels(), &[0, 1]);
        assert_eq!(d.signals()[0].len(), DEFAULT_GRID_LEN);
        assert!(gen_separability_data(0, false, 3).is_err());
    }

    #[test]
    fn positive_bumps_stay_in_unit_range() {
        let d = gen_separability_data(30, false, 11).unwrap();
        for (s, &l) in d.signals().iter().zip(d.labels()) {
            let vals = s.values_flat();
            let max = vals.iter().copied().fold(f64::MIN, f64::max);
            let min = vals.iter().copied().fold(f64::MAX, f64::min);
            if l == 0 {
                assert!(min >= 0.0 && max <= 1.0);
            } else {
                assert!(max > 0.0 && min < 0.0 && max <= 1.0 && min >= -1.0);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            gen_separability_data(4, true, 5).unwrap(),
            gen_separability_data(4, true, 5).unwrap()
        );
        assert_ne!(
            gen_separability_data(4, true, 5).unwrap(),
            gen_separability_data(4, true, 6).unwrap()
        );
    }

    #[test]
    fn noise_perturbs_the_background() {
        let clean = gen_separability_data(2, false, 9).unwrap();
        let noisy = gen_separability_data(2, true, 9).unwrap();
        let far_from_bump =
            |s: &DiscreteSignal| s.values_flat().iter().filter(|v| v.abs() > 1e-3).count();
        for (c, n) in clean.signals().iter().zip(noisy.signals()) {
            assert!(far_from_bump(n) > far_from_bump(c) + 100);
        }
    }

    #[test]
    fn sigma_constant() {
        assert!((SIGMA_BLIP - 0.001 * 5f64.sqrt()).abs() < 1e-18);
    }
}
