use std::fmt;
use std::str::FromStr;

use super::init::init_thermal;
use super::output::fmt_f64;
use crate::error::{Error, Result};
use crate::lattice::LatticeParams;
use crate::normalform::{deviation, monte_carlo_m, wick_m, EtaDistribution, NormalFormKernel, RandomField};
use crate::seed::mix_seed;
use crate::spectral::dispersion_table;

/// Spectrum `φ_k` of the random field in a Wick check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiProfile {
    /// `φ_k = 1`.
    Flat,
    /// `φ_k = 1/ω_k`, the thermal spectrum.
    InverseOmega,
}

impl PhiProfile {
    pub const ALL: [PhiProfile; 2] = [PhiProfile::Flat, PhiProfile::InverseOmega];

    pub fn values(self, params: &LatticeParams) -> Vec<f64> {
        let omega = dispersion_table(params);
        match self {
            PhiProfile::Flat => vec![1.0; params.n() - 1],
            PhiProfile::InverseOmega => omega[1..].iter().map(|w| 1.0 / w).collect(),
        }
    }
}

impl fmt::Display for PhiProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhiProfile::Flat => "flat",
            PhiProfile::InverseOmega => "inverse-omega",
        })
    }
}

impl FromStr for PhiProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(PhiProfile::Flat),
            "inverse-omega" => Ok(PhiProfile::InverseOmega),
            other => Err(Error::Config(format!("unknown spectrum {other:?} (expected flat or inverse-omega)"))),
        }
    }
}

/// Monte-Carlo estimate of the B1 second moment against its Wick value.
#[derive(Debug, Clone, PartialEq)]
pub struct WickCheck {
    pub n: usize,
    pub k1: usize,
    pub profile: PhiProfile,
    pub samples: usize,
    pub wick_m: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    /// `(mc_mean - wick_m) / mc_stderr`.
    pub z: f64,
    /// Fraction of samples with `|Σ| ≥ 3 √M`.
    pub tail_fraction: f64,
}

impl WickCheck {
    pub const CSV_HEADER: [&'static str; 9] =
        ["N", "k1", "phi", "samples", "wick_M", "mc_mean", "mc_stderr", "z", "tail_fraction"];

    pub fn passes(&self) -> bool {
        self.z.abs() <= 3.0 && self.tail_fraction <= 0.05
    }

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k1.to_string(),
            self.profile.to_string(),
            self.samples.to_string(),
            fmt_f64(self.wick_m),
            fmt_f64(self.mc_mean),
            fmt_f64(self.mc_stderr),
            fmt_f64(self.z),
            fmt_f64(self.tail_fraction),
        ]
    }
}

/// Complex-Gaussian phases, `samples` realisations.
pub fn wick_check(n: usize, k1: usize, profile: PhiProfile, samples: usize, seed: u64) -> Result<WickCheck> {
    let params = LatticeParams::unit(n, 0.0)?;
    let field = RandomField::new(profile.values(&params), EtaDistribution::ComplexGaussian, seed)?;
    let exact = wick_m(k1, &field, &params)?;
    let mc = monte_carlo_m(k1, &field, samples, &params)?;
    Ok(WickCheck {
        n,
        k1,
        profile,
        samples,
        wick_m: exact,
        mc_mean: mc.mean,
        mc_stderr: mc.stderr,
        z: (mc.mean - exact) / mc.stderr,
        tail_fraction: mc.tail_fraction(3.0 * exact.sqrt()),
    })
}

/// Deviation of the normal-form transformation on one thermal field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCheck {
    pub n: usize,
    pub sample: u64,
    pub beta_n: f64,
    pub relative_l2: f64,
    pub max_mode_ratio: f64,
}

impl TransformCheck {
    pub const CSV_HEADER: [&'static str; 5] = ["N", "sample", "betaN", "relative_l2", "max_mode_ratio"];

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.sample.to_string(),
            fmt_f64(self.beta_n),
            fmt_f64(self.relative_l2),
            fmt_f64(self.max_mode_ratio),
        ]
    }
}

/// Applies the transformation to `samples` thermal fields at every `βN`.
///
/// Rows are ordered by sample, then by `beta_n_values`.
pub fn transform_check(n: usize, beta_n_values: &[f64], samples: u64, seed: u64) -> Result<Vec<TransformCheck>> {
    let params = LatticeParams::unit(n, 0.0)?;
    let kernel = NormalFormKernel::new(&params)?;
    let mut rows = Vec::with_capacity(samples as usize * beta_n_values.len());
    for sample in 0..samples {
        let b = init_thermal(&params, mix_seed(&[seed, sample]));
        for &beta_n in beta_n_values {
            let a = kernel.apply(&b, beta_n / n as f64)?;
            let d = deviation(&a, &b)?;
            rows.push(TransformCheck {
                n,
                sample,
                beta_n,
                relative_l2: d.relative_l2,
                max_mode_ratio: d.max_mode_ratio,
            });
        }
    }
    Ok(rows)
}
