//! Resonant / non-resonant split of the quartic energy.
//!
//! ```text
//! S1 = Σ T_{1234}     (a1* a2 a3 a4 + c.c.)     δ(1-2-3-4)
//! S2 = Σ 3/2 T_{1,-2,3,4} a1* a2* a3 a4         δ(1+2-3-4)
//! S3 = Σ 1/4 T_{1234} (a1* a2* a3* a4* + c.c.)  δ(1+2+3+4)
//! ```
//!
//! The fast path writes the bond stretch as `q_{j+1} - q_j = f_j + f_j*` with
//! `f_j = Σ_k g_k a_k e^{2πikj/N}` and `g_k = i e^{iπk/N} √(ω_k / 2κ)`. The
//! half-shift phase reproduces the `ι` signs of every umklapp class, so each
//! sum is one conjugation class of `Σ_j (f_j + f_j*)⁴`:
//!
//! ```text
//! S1 = (3/N)   Σ_j (f³ f* + c.c.)
//! S2 = (9/2N)  Σ_j |f|⁴
//! S3 = (3/4N)  Σ_j (f⁴ + c.c.)
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::LatticeParams;
use crate::spectral::{dispersion_table, interaction_t, wrap_mode, SpectralField};

/// Largest chain accepted by [`quartic_sums_brute`].
pub const BRUTE_MAX_N: usize = 64;

/// Factor between `β (S1 + S2 + S3)` and the quartic lattice energy per site.
///
/// With `T` carrying `3/(4κ²)`, the three sums add up to three times
/// `(β/4N) Σ_j (q_{j+1} - q_j)⁴ / β`. Pinned by the single-mode test below and
/// by `spectral_energy_matches_physical_energy`.
pub const QUARTIC_NORMALIZATION: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Brute,
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticSums {
    pub s1: Complex64,
    pub s2: Complex64,
    pub s3: Complex64,
    pub method: Method,
}

impl QuarticSums {
    pub fn total(&self) -> Complex64 {
        self.s1 + self.s2 + self.s3
    }

    /// Largest `|Im S_i| / max_i |S_i|`.
    pub fn imaginary_fraction(&self) -> f64 {
        let scale = [self.s1, self.s2, self.s3]
            .iter()
            .fold(0.0f64, |m, s| m.max(s.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        [self.s1, self.s2, self.s3]
            .iter()
            .fold(0.0f64, |m, s| m.max(s.im.abs()))
            / scale
    }
}

/// Direct O(N³) evaluation of the three constrained sums.
pub fn quartic_sums_brute(field: &SpectralField, params: &LatticeParams) -> Result<QuarticSums> {
    field.check(params)?;
    let n = params.n();
    if n > BRUTE_MAX_N {
        return Err(Error::Precondition(format!(
            "brute-force quartic sums are limited to N <= {BRUTE_MAX_N}, got {n}"
        )));
    }
    let a = field.as_slice();
    let ni = n as i64;
    let zero = Complex64::new(0.0, 0.0);
    let (mut s1, mut s2, mut s3) = (zero, zero, zero);
    for k1 in 1..ni {
        let a1 = a[k1 as usize].conj();
        for k2 in 1..ni {
            let a2 = a[k2 as usize];
            for k3 in 1..ni {
                let a3 = a[k3 as usize];
                let k4 = wrap_mode(k1 - k2 - k3, n) as i64;
                if k4 != 0 {
                    s1 += interaction_t(k1, k2, k3, k4, params) * a1 * a2 * a3 * a[k4 as usize];
                }
                let k4 = wrap_mode(k1 + k2 - k3, n) as i64;
                if k4 != 0 {
                    s2 += 1.5
                        * interaction_t(k1, -k2, k3, k4, params)
                        * a1
                        * a2.conj()
                        * a3
                        * a[k4 as usize];
                }
                let k4 = wrap_mode(-k1 - k2 - k3, n) as i64;
                if k4 != 0 {
                    s3 += 0.25
                        * interaction_t(k1, k2, k3, k4, params)
                        * a1
                        * (a2 * a3 * a[k4 as usize]).conj();
                }
            }
        }
    }
    Ok(QuarticSums {
        s1: s1 + s1.conj(),
        s2,
        s3: s3 + s3.conj(),
        method: Method::Brute,
    })
}

/// Reusable O(N log N) evaluator for one chain size.
#[derive(Clone)]
pub struct QuarticKernel {
    n: usize,
    weights: Vec<Complex64>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for QuarticKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuarticKernel").field("n", &self.n).finish_non_exhaustive()
    }
}

impl QuarticKernel {
    pub fn new(params: &LatticeParams) -> Self {
        let n = params.n();
        let omega = dispersion_table(params);
        let weights = (0..n)
            .map(|k| {
                if k == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let phase = Complex64::from_polar(1.0, PI * k as f64 / n as f64);
                Complex64::i() * phase * (omega[k] / (2.0 * params.kappa())).sqrt()
            })
            .collect();
        Self {
            n,
            weights,
            inverse: FftPlanner::new().plan_fft_inverse(n),
        }
    }

    pub fn sums(&self, field: &SpectralField) -> Result<QuarticSums> {
        if field.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: field.n(),
            });
        }
        let mut f: Vec<Complex64> = field
            .as_slice()
            .iter()
            .zip(&self.weights)
            .map(|(a, g)| a * g)
            .collect();
        self.inverse.process(&mut f);

        let (mut c31, mut c22, mut c40) = (0.0, 0.0, 0.0);
        for z in &f {
            let z2 = z * z;
            let mag2 = z.norm_sqr();
            // Re(f³ f*) = |f|² Re(f²), Re(f⁴) = Re((f²)²).
            c31 += mag2 * z2.re;
            c22 += mag2 * mag2;
            c40 += (z2 * z2).re;
        }
        let inv_n = 1.0 / self.n as f64;
        Ok(QuarticSums {
            s1: Complex64::new(6.0 * inv_n * c31, 0.0),
            s2: Complex64::new(4.5 * inv_n * c22, 0.0),
            s3: Complex64::new(1.5 * inv_n * c40, 0.0),
            method: Method::Fft,
        })
    }
}

/// FFT evaluation of the quartic sums.
pub fn quartic_sums_fft(field: &SpectralField, params: &LatticeParams) -> Result<QuarticSums> {
    field.check(params)?;
    QuarticKernel::new(params).sums(field)
}

/// Energy per site `H/N` from the modal amplitudes.
pub fn hamiltonian_spectral(field: &SpectralField, params: &LatticeParams) -> Result<f64> {
    let sums = quartic_sums_fft(field, params)?;
    Ok(field.harmonic_energy(params) + params.beta() * QUARTIC_NORMALIZATION * sums.total().re)
}

/// Half-open averaging window `[start, end]` in simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-9 * self.end.abs().max(1.0);
        t >= self.start - slack && t <= self.end + slack
    }
}

/// Uniformly weighted running mean of the sums inside a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowAverage {
    pub window: Window,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub samples: usize,
}

impl WindowAverage {
    pub fn new(window: Window) -> Self {
        Self {
            window,
            s1: 0.0,
            s2: 0.0,
            s3: 0.0,
            samples: 0,
        }
    }

    /// Folds in one sample; returns whether it fell inside the window.
    pub fn push(&mut self, t: f64, sums: &QuarticSums) -> bool {
        if !self.window.contains(t) {
            return false;
        }
        self.samples += 1;
        let w = 1.0 / self.samples as f64;
        self.s1 += (sums.s1.re - self.s1) * w;
        self.s2 += (sums.s2.re - self.s2) * w;
        self.s3 += (sums.s3.re - self.s3) * w;
        true
    }

    fn ratio(&self) -> Result<f64> {
        ratio_of(self.s1, self.s2, self.s3)
    }
}

fn ratio_of(s1: f64, s2: f64, s3: f64) -> Result<f64> {
    if s2 == 0.0 || s2.abs() < 1e-14 * s1.abs().max(s3.abs()) {
        return Err(Error::DegenerateDenominator { s2 });
    }
    Ok(((s1 + s3) / s2).abs())
}

/// Time- and ensemble-averaged non-resonant fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioEstimate {
    pub r: f64,
    pub s1_mean: f64,
    pub s2_mean: f64,
    pub s3_mean: f64,
    /// In-window samples summed over ensembles.
    pub n_samples: usize,
    /// Standard deviation of the per-ensemble ratios.
    pub spread: f64,
    pub per_ensemble: Vec<f64>,
}

impl RatioEstimate {
    /// Averages across ensembles first, then forms `|(S1 + S3) / S2|`.
    pub fn from_averages(averages: &[WindowAverage]) -> Result<Self> {
        if averages.is_empty() {
            return Err(Error::Precondition("ratio needs at least one ensemble".into()));
        }
        if let Some(empty) = averages.iter().position(|a| a.samples == 0) {
            return Err(Error::Precondition(format!(
                "ensemble {empty} has no samples inside the averaging window"
            )));
        }
        let count = averages.len() as f64;
        let mean = |f: fn(&WindowAverage) -> f64| averages.iter().map(f).sum::<f64>() / count;
        let (s1, s2, s3) = (mean(|a| a.s1), mean(|a| a.s2), mean(|a| a.s3));
        let r = ratio_of(s1, s2, s3)?;
        let per_ensemble = averages.iter().map(WindowAverage::ratio).collect::<Result<Vec<_>>>()?;
        let spread = if per_ensemble.len() > 1 {
            let m = per_ensemble.iter().sum::<f64>() / count;
            (per_ensemble.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            r,
            s1_mean: s1,
            s2_mean: s2,
            s3_mean: s3,
            n_samples: averages.iter().map(|a| a.samples).sum(),
            spread,
            per_ensemble,
        })
    }
}

/// [`RatioEstimate`] from raw `(t, sums)` streams, one per ensemble.
pub fn ratio_r(ensembles: &[Vec<(f64, QuarticSums)>], window: Window) -> Result<RatioEstimate> {
    let averages: Vec<WindowAverage> = ensembles
        .iter()
        .map(|stream| {
            let mut avg = WindowAverage::new(window);
            for (t, sums) in stream {
                avg.push(*t, sums);
            }
            avg
        })
        .collect();
    RatioEstimate::from_averages(&averages)
}
