use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::InitKind;
use crate::lattice::LatticeParams;
use crate::spectral::{dispersion_table, SpectralField};

/// `a_k = √(1/ω_k) e^{iφ_k}` with independent uniform phases.
pub fn init_thermal(params: &LatticeParams, seed: u64) -> SpectralField {
    random_phase_field(params, seed, |_| 1.0)
}

/// `a_k = √((1 + ω_k²)/ω_k) e^{iφ_k}` with independent uniform phases.
pub fn init_out_of_equilibrium(params: &LatticeParams, seed: u64) -> SpectralField {
    random_phase_field(params, seed, |w| 1.0 + w * w)
}

pub fn initial_field(kind: InitKind, params: &LatticeParams, seed: u64) -> SpectralField {
    match kind {
        InitKind::Thermal => init_thermal(params, seed),
        InitKind::OutOfEquilibrium => init_out_of_equilibrium(params, seed),
    }
}

/// `ω_k |a_k|² = action(ω_k)`.
fn random_phase_field(params: &LatticeParams, seed: u64, action: impl Fn(f64) -> f64) -> SpectralField {
    let omega = dispersion_table(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = omega[1..]
        .iter()
        .map(|&w| {
            let phase = rng.random_range(0.0..2.0 * PI);
            Complex64::from_polar((action(w) / w).sqrt(), phase)
        })
        .collect();
    SpectralField::from_modes(modes, 0.0).expect("amplitudes are finite for k in 1..N")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::from_normal_modes;

    #[test]
    fn thermal_equipartition() {
        let p = LatticeParams::unit(101, 0.01).unwrap();
        let f = init_thermal(&p, 3);
        let omega = dispersion_table(&p);
        for k in 1..101 {
            assert!((omega[k] * f.get(k as i64).norm_sqr() - 1.0).abs() < 1e-12);
        }
        let s = from_normal_modes(&f, &p).unwrap();
        assert!(s.total_momentum().abs() < 1e-10);
    }

    #[test]
    fn out_of_equilibrium_spectrum() {
        let p = LatticeParams::unit(1000, 0.0).unwrap();
        let f = init_out_of_equilibrium(&p, 3);
        let omega = dispersion_table(&p);
        for k in 1..1000 {
            let w = omega[k];
            assert!((w * f.get(k as i64).norm_sqr() - (1.0 + w * w)).abs() < 1e-12 * (1.0 + w * w));
        }
        // Long waves carry almost exactly the thermal action.
        let thermal = init_thermal(&p, 3);
        let ratio = f.get(1).norm_sqr() / thermal.get(1).norm_sqr();
        assert!((ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn seeds_are_deterministic() {
        let p = LatticeParams::unit(64, 0.1).unwrap();
        for kind in InitKind::ALL {
            assert_eq!(initial_field(kind, &p, 11), initial_field(kind, &p, 11));
            assert_ne!(initial_field(kind, &p, 11), initial_field(kind, &p, 12));
        }
    }

    #[test]
    fn phases_are_uniform() {
        // 10⁵ phases in 20 bins; χ² with 19 degrees of freedom, p = 0.01 at 36.19.
        let p = LatticeParams::unit(1001, 0.0).unwrap();
        let bins = 20;
        let mut counts = vec![0usize; bins];
        for seed in 0..100 {
            for a in init_thermal(&p, seed).modes() {
                let phase = a.arg().rem_euclid(2.0 * PI);
                counts[((phase / (2.0 * PI) * bins as f64) as usize).min(bins - 1)] += 1;
            }
        }
        let expected = 100_000.0 / bins as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }
}
