//! Normal-form transformation removing the non-resonant quartic interactions.
//!
//! Three families of quartets are removed, one per Kronecker-delta branch:
//!
//! | branch | constraint (mod N)      | coefficient                                   |
//! |--------|-------------------------|-----------------------------------------------|
//! | B1     | k1 - k2 - k3 - k4 ≡ 0   | `-T_{1234}    / (ω1 - ω2 - ω3 - ω4)`          |
//! | B2     | k1 - k2 + k3 + k4 ≡ 0   | `-T_{1,-2,3,4} / (ω1 - ω2 + ω3 + ω4)`         |
//! | B3     | k1 + k2 + k3 + k4 ≡ 0   | `-T_{1234}    / (ω1 + ω2 + ω3 + ω4)`          |
//!
//! The transformation itself is
//! `a_1 = b_1 + β/3 [Σ A⁽¹⁾ b2 b3 b4 + 3 Σ A⁽²⁾ b2 b3* b4* + Σ A⁽³⁾ b2* b3* b4*]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeParams;
use crate::seed::mix_seed;
use crate::spectral::{dispersion_table, iota, wrap_mode, SpectralField, REFERENCE_MAX_N};

/// Largest chain handled by [`scan_bound`].
pub const SCAN_MAX_N: usize = 4096;
/// Largest chain handled by the exact Wick sum.
pub const WICK_MAX_N: usize = 256;
/// Largest chain handled by the Monte-Carlo estimator.
pub const MONTE_CARLO_MAX_N: usize = 64;
/// Relative floor (in units of √(κ/m)) below which a denominator counts as resonant.
pub const RESONANCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// `k1 - k2 - k3 - k4 ≡ 0`
    B1,
    /// `k1 - k2 + k3 + k4 ≡ 0`
    B2,
    /// `k1 + k2 + k3 + k4 ≡ 0`
    B3,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::B1, Branch::B2, Branch::B3];

    pub fn index(self) -> usize {
        match self {
            Branch::B1 => 0,
            Branch::B2 => 1,
            Branch::B3 => 2,
        }
    }

    /// Signed integer combination that must vanish mod `N`.
    pub fn combination(self, k1: i64, k2: i64, k3: i64, k4: i64) -> i64 {
        match self {
            Branch::B1 => k1 - k2 - k3 - k4,
            Branch::B2 => k1 - k2 + k3 + k4,
            Branch::B3 => k1 + k2 + k3 + k4,
        }
    }

    /// The `k4` that closes the constraint, reduced mod `N` (0 means "no mode").
    pub fn closing_mode(self, k1: i64, k2: i64, k3: i64, n: usize) -> usize {
        let k4 = match self {
            Branch::B1 => k1 - k2 - k3,
            Branch::B2 => k2 - k1 - k3,
            Branch::B3 => -k1 - k2 - k3,
        };
        wrap_mode(k4, n)
    }
}

/// A wavenumber quartet on one delta branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuartetKey {
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub k4: usize,
    pub branch: Branch,
}

impl QuartetKey {
    pub fn new(k1: usize, k2: usize, k3: usize, k4: usize, branch: Branch, n: usize) -> Result<Self> {
        let key = Self {
            k1,
            k2,
            k3,
            k4,
            branch,
        };
        if [k1, k2, k3, k4].iter().any(|&k| k == 0 || k >= n) {
            return Err(Error::Precondition(format!(
                "quartet {key:?} has a wavenumber outside 1..{n}"
            )));
        }
        if key.exact_sum().rem_euclid(n as i64) != 0 {
            return Err(Error::Precondition(format!(
                "quartet {key:?} violates its delta constraint mod {n}"
            )));
        }
        Ok(key)
    }

    /// The branch combination as an integer, before reduction mod `N`.
    pub fn exact_sum(&self) -> i64 {
        self.branch.combination(
            self.k1 as i64,
            self.k2 as i64,
            self.k3 as i64,
            self.k4 as i64,
        )
    }

    /// How many times the combination wraps the zone: `exact_sum / N`.
    pub fn umklapp_class(&self, n: usize) -> i64 {
        self.exact_sum() / n as i64
    }
}

/// Per-chain tables shared by all coefficient evaluations.
#[derive(Debug, Clone)]
struct Tables {
    n: usize,
    omega: Vec<f64>,
    sqrt_omega: Vec<f64>,
    t_scale: f64,
    floor: f64,
}

impl Tables {
    fn new(params: &LatticeParams) -> Self {
        let omega = dispersion_table(params);
        let sqrt_omega = omega.iter().map(|w| w.sqrt()).collect();
        Self {
            n: params.n(),
            omega,
            sqrt_omega,
            t_scale: -0.75 / (params.kappa() * params.kappa()),
            floor: RESONANCE_FLOOR * (params.kappa() / params.m()).sqrt(),
        }
    }

    /// `(numerator T, denominator)` of a branch coefficient for in-range wavenumbers.
    fn parts(&self, branch: Branch, k1: usize, k2: usize, k3: usize, k4: usize) -> (f64, f64) {
        let n = self.n;
        let w = &self.omega;
        let amp = self.sqrt_omega[k1] * self.sqrt_omega[k2] * self.sqrt_omega[k3] * self.sqrt_omega[k4];
        let (k2s, k3s, k4s) = (k2 as i64, k3 as i64, k4 as i64);
        // ι(k) = +1 for every k in 1..N-1, and ι(-k2) = -1.
        let (sign, den) = match branch {
            Branch::B1 => (iota(k2s + k3s + k4s, n), w[k1] - w[k2] - w[k3] - w[k4]),
            Branch::B2 => (-iota(-k2s + k3s + k4s, n), w[k1] - w[k2] + w[k3] + w[k4]),
            Branch::B3 => (iota(k2s + k3s + k4s, n), w[k1] + w[k2] + w[k3] + w[k4]),
        };
        (self.t_scale * sign as f64 * amp, den)
    }

    fn coefficient(&self, key: &QuartetKey) -> Result<f64> {
        let (t, den) = self.parts(key.branch, key.k1, key.k2, key.k3, key.k4);
        if den.abs() < self.floor {
            return Err(Error::NonResonance {
                key: *key,
                denominator: den,
            });
        }
        Ok(-t / den)
    }
}

/// Transformation coefficient `A⁽ⁱ⁾` of a quartet.
pub fn coefficient_a(key: &QuartetKey, params: &LatticeParams) -> Result<f64> {
    check_key(key, params)?;
    Tables::new(params).coefficient(key)
}

fn check_key(key: &QuartetKey, params: &LatticeParams) -> Result<()> {
    QuartetKey::new(key.k1, key.k2, key.k3, key.k4, key.branch, params.n()).map(|_| ())
}

/// Direct B1 denominator next to its three-sine factorisation, for a quartet
/// with `k1 = k2 + k3 + k4` exactly.
pub fn denominator_identity_check(key: &QuartetKey, params: &LatticeParams) -> Result<(f64, f64)> {
    check_key(key, params)?;
    if key.branch != Branch::B1 || key.exact_sum() != 0 {
        return Err(Error::Precondition(format!(
            "factorised denominator needs k1 = k2 + k3 + k4 on B1, got {key:?}"
        )));
    }
    let w = dispersion_table(params);
    let lhs = w[key.k1] - w[key.k2] - w[key.k3] - w[key.k4];
    let n = params.n() as f64;
    let half_sine = |d: i64| (PI * d as f64 / (2.0 * n)).sin();
    let (k1, k3, k4, k2) = (key.k1 as i64, key.k3 as i64, key.k4 as i64, key.k2 as i64);
    let rhs = 8.0
        * (params.kappa() / params.m()).sqrt()
        * half_sine(k1 - k2)
        * half_sine(k1 - k4)
        * half_sine(k3 - k1);
    Ok((lhs, rhs))
}

/// Coefficient-sum totals for one `k1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundScanResult {
    pub n: usize,
    pub k1: usize,
    /// `Σ |A⁽ⁱ⁾|²` for B1, B2, B3.
    pub sums: [f64; 3],
    pub total: f64,
    /// `total / (N² ln N)`.
    pub normalized: f64,
    /// Per-branch sums split by `|exact_sum| / N` (0..=3).
    pub class_sums: [[f64; 4]; 3],
    /// Smallest `|denominator|` met on each branch.
    pub min_denominator: [f64; 3],
    /// Largest single `|A⁽³⁾|²`.
    pub max_b3_term: f64,
}

impl BoundScanResult {
    pub const CSV_HEADER: [&'static str; 7] =
        ["N", "k1", "sumB1", "sumB2", "sumB3", "total", "normalized"];
}

/// Sums `|A|²` over every quartet with the given `k1` on all three branches.
///
/// Quartets whose closing `k4` is `≡ 0` are skipped. O(N²).
pub fn scan_bound(k1: usize, params: &LatticeParams) -> Result<BoundScanResult> {
    let n = params.n();
    if n > SCAN_MAX_N {
        return Err(Error::Precondition(format!(
            "bound scan is limited to N <= {SCAN_MAX_N}, got {n}"
        )));
    }
    if k1 == 0 || k1 >= n {
        return Err(Error::Precondition(format!("k1 = {k1} outside 1..{n}")));
    }
    let tables = Tables::new(params);
    let mut out = BoundScanResult {
        n,
        k1,
        sums: [0.0; 3],
        total: 0.0,
        normalized: 0.0,
        class_sums: [[0.0; 4]; 3],
        min_denominator: [f64::INFINITY; 3],
        max_b3_term: 0.0,
    };
    let k1i = k1 as i64;
    for branch in Branch::ALL {
        let b = branch.index();
        for k2 in 1..n {
            for k3 in 1..n {
                let k4 = branch.closing_mode(k1i, k2 as i64, k3 as i64, n);
                if k4 == 0 {
                    continue;
                }
                let (t, den) = tables.parts(branch, k1, k2, k3, k4);
                if den.abs() < tables.floor {
                    return Err(Error::NonResonance {
                        key: QuartetKey {
                            k1,
                            k2,
                            k3,
                            k4,
                            branch,
                        },
                        denominator: den,
                    });
                }
                out.min_denominator[b] = out.min_denominator[b].min(den.abs());
                let term = (t / den).powi(2);
                out.sums[b] += term;
                let class = branch
                    .combination(k1i, k2 as i64, k3 as i64, k4 as i64)
                    .unsigned_abs() as usize
                    / n;
                out.class_sums[b][class] += term;
                if branch == Branch::B3 {
                    out.max_b3_term = out.max_b3_term.max(term);
                }
            }
        }
    }
    out.total = out.sums.iter().sum();
    let nf = n as f64;
    out.normalized = out.total / (nf * nf * nf.ln());
    Ok(out)
}

/// [`scan_bound`] for every `k1` in `1..N`, in parallel.
pub fn scan_bound_all(params: &LatticeParams) -> Result<Vec<BoundScanResult>> {
    (1..params.n())
        .into_par_iter()
        .map(|k1| scan_bound(k1, params))
        .collect()
}

/// Law of the unit-variance phases `η_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaDistribution {
    /// Real and imaginary parts independent `N(0, 1/2)`.
    #[default]
    ComplexGaussian,
    /// `e^{iθ}` with `θ` uniform on `[0, 2π)`.
    UniformCircle,
}

impl EtaDistribution {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        match self {
            EtaDistribution::ComplexGaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            EtaDistribution::UniformCircle => {
                Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
            }
        }
    }

    /// `E|η|^{2j}`.
    fn moment(self, j: u32) -> f64 {
        match self {
            EtaDistribution::ComplexGaussian => (1..=j).product::<u32>() as f64,
            EtaDistribution::UniformCircle => 1.0,
        }
    }
}

/// Random-phase field `b_k = √φ_k η_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomField {
    /// `φ_1..φ_{N-1}`.
    pub phi: Vec<f64>,
    pub eta: EtaDistribution,
    pub seed: u64,
}

impl RandomField {
    pub fn new(phi: Vec<f64>, eta: EtaDistribution, seed: u64) -> Result<Self> {
        if let Some(bad) = phi.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Config(format!("spectral amplitude {bad} is not a finite non-negative number")));
        }
        Ok(Self { phi, eta, seed })
    }

    pub fn n(&self) -> usize {
        self.phi.len() + 1
    }

    /// `φ_k` with `k` in `1..N`.
    pub fn phi_at(&self, k: usize) -> f64 {
        self.phi[k - 1]
    }

    /// One realisation, drawn from the stream selected by `index`.
    pub fn realize(&self, index: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[self.seed, index]));
        let modes = self
            .phi
            .iter()
            .map(|&phi| phi.sqrt() * self.eta.sample(&mut rng))
            .collect();
        SpectralField::from_modes(modes, 0.0).expect("finite amplitudes")
    }

    fn check(&self, params: &LatticeParams) -> Result<()> {
        if self.n() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n() - 1,
                actual: self.phi.len(),
            });
        }
        Ok(())
    }
}

/// Every B1 quartet for `k1` with a nonzero coefficient, as `(k2, k3, k4, A⁽¹⁾)`.
fn b1_terms(k1: usize, tables: &Tables) -> Result<Vec<(usize, usize, usize, f64)>> {
    let n = tables.n;
    let mut terms = Vec::new();
    for k2 in 1..n {
        for k3 in 1..n {
            let k4 = Branch::B1.closing_mode(k1 as i64, k2 as i64, k3 as i64, n);
            if k4 == 0 {
                continue;
            }
            let key = QuartetKey {
                k1,
                k2,
                k3,
                k4,
                branch: Branch::B1,
            };
            let a = tables.coefficient(&key)?;
            if a != 0.0 {
                terms.push((k2, k3, k4, a));
            }
        }
    }
    Ok(terms)
}

fn check_wick_inputs(k1: usize, field: &RandomField, params: &LatticeParams, max_n: usize) -> Result<()> {
    field.check(params)?;
    let n = params.n();
    if n > max_n {
        return Err(Error::Precondition(format!(
            "direct quartet sum is limited to N <= {max_n}, got {n}"
        )));
    }
    if k1 == 0 || k1 >= n {
        return Err(Error::Precondition(format!("k1 = {k1} outside 1..{n}")));
    }
    Ok(())
}

/// `Σ_{k1-k2-k3-k4≡0} |A⁽¹⁾|² φ2 φ3 φ4`, without pairing multiplicities.
pub fn wick_sum(k1: usize, phi: &RandomField, params: &LatticeParams) -> Result<f64> {
    check_wick_inputs(k1, phi, params, WICK_MAX_N)?;
    let tables = Tables::new(params);
    Ok(b1_terms(k1, &tables)?
        .iter()
        .map(|&(k2, k3, k4, a)| a * a * phi.phi_at(k2) * phi.phi_at(k3) * phi.phi_at(k4))
        .sum())
}

/// Exact second moment `M = E|Σ A⁽¹⁾ b2 b3 b4|²` by Wick contraction.
///
/// The ordered sum pairs each `(k2, k3, k4)` with all of its permutations, so a
/// term carries `|A|² φ2 φ3 φ4` times the number of distinct orderings of its
/// multiset and the moment `Π E|η|^{2j}` of repeated indices. For complex
/// Gaussian phases that weight is 6 for every term; on the unit circle it is
/// 6, 3 or 1 for no, one or two coincidences.
pub fn wick_m(k1: usize, field: &RandomField, params: &LatticeParams) -> Result<f64> {
    check_wick_inputs(k1, field, params, WICK_MAX_N)?;
    let tables = Tables::new(params);
    let eta = field.eta;
    Ok(b1_terms(k1, &tables)?
        .iter()
        .map(|&(k2, k3, k4, a)| {
            let weight = if k2 == k3 && k3 == k4 {
                eta.moment(3)
            } else if k2 == k3 || k3 == k4 || k2 == k4 {
                3.0 * eta.moment(2)
            } else {
                6.0
            };
            weight * a * a * field.phi_at(k2) * field.phi_at(k3) * field.phi_at(k4)
        })
        .sum())
}

/// Sampled `|Σ A⁽¹⁾ b2 b3 b4|²` over independent realisations.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// `|Σ|²` of every realisation, in sample order.
    pub squared_sums: Vec<f64>,
}

impl MonteCarloEstimate {
    /// Fraction of realisations with `|Σ| ≥ threshold`.
    pub fn tail_fraction(&self, threshold: f64) -> f64 {
        if self.squared_sums.is_empty() {
            return 0.0;
        }
        let limit = threshold * threshold;
        self.squared_sums.iter().filter(|&&s| s >= limit).count() as f64
            / self.squared_sums.len() as f64
    }
}

/// Monte-Carlo counterpart of [`wick_m`]. Sample `i` uses the stream `(seed, i)`.
pub fn monte_carlo_m(
    k1: usize,
    field: &RandomField,
    n_samples: usize,
    params: &LatticeParams,
) -> Result<MonteCarloEstimate> {
    check_wick_inputs(k1, field, params, MONTE_CARLO_MAX_N)?;
    if n_samples < 100 {
        return Err(Error::Precondition(format!(
            "Monte-Carlo estimate needs at least 100 samples, got {n_samples}"
        )));
    }
    let tables = Tables::new(params);
    let terms = b1_terms(k1, &tables)?;
    let squared_sums: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let b = field.realize(i);
            let b = b.as_slice();
            terms
                .iter()
                .map(|&(k2, k3, k4, a)| a * b[k2] * b[k3] * b[k4])
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect();
    let count = squared_sums.len() as f64;
    let mean = squared_sums.iter().sum::<f64>() / count;
    let var = squared_sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (count - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        stderr: (var / count).sqrt(),
        squared_sums,
    })
}

/// Precomputed quartet coefficients of the transformation for one chain.
///
/// Holds `3 (N-1)³` coefficients at most; restricted to [`REFERENCE_MAX_N`].
#[derive(Debug, Clone)]
pub struct NormalFormKernel {
    n: usize,
    /// Per `k1`: `(branch, k2, k3, k4, A)` with the branch multiplicity folded in.
    terms: Vec<Vec<(Branch, u16, u16, u16, f64)>>,
}

impl NormalFormKernel {
    pub fn new(params: &LatticeParams) -> Result<Self> {
        let n = params.n();
        if n > REFERENCE_MAX_N {
            return Err(Error::Precondition(format!(
                "normal-form transformation is limited to N <= {REFERENCE_MAX_N}, got {n}"
            )));
        }
        let tables = Tables::new(params);
        let terms = (1..n)
            .into_par_iter()
            .map(|k1| {
                let mut row = Vec::new();
                for branch in Branch::ALL {
                    let multiplicity = if branch == Branch::B2 { 3.0 } else { 1.0 };
                    for k2 in 1..n {
                        for k3 in 1..n {
                            let k4 = branch.closing_mode(k1 as i64, k2 as i64, k3 as i64, n);
                            if k4 == 0 {
                                continue;
                            }
                            let key = QuartetKey { k1, k2, k3, k4, branch };
                            let a = tables.coefficient(&key)?;
                            if a != 0.0 {
                                row.push((branch, k2 as u16, k3 as u16, k4 as u16, multiplicity * a));
                            }
                        }
                    }
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut all = vec![Vec::new()];
        all.extend(terms);
        Ok(Self { n, terms: all })
    }

    /// Cubic correction `C` with `a = b + β/3 · C(b)`.
    pub fn cubic_part(&self, b: &SpectralField) -> Result<Vec<Complex64>> {
        if b.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: b.n(),
            });
        }
        let x = b.as_slice();
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (k1, row) in self.terms.iter().enumerate().skip(1) {
            out[k1] = row
                .iter()
                .map(|&(branch, k2, k3, k4, a)| {
                    let (b2, b3, b4) = (x[k2 as usize], x[k3 as usize], x[k4 as usize]);
                    a * match branch {
                        Branch::B1 => b2 * b3 * b4,
                        Branch::B2 => b2 * (b3 * b4).conj(),
                        Branch::B3 => (b2 * b3 * b4).conj(),
                    }
                })
                .sum();
        }
        Ok(out)
    }

    pub fn apply(&self, b: &SpectralField, beta: f64) -> Result<SpectralField> {
        let cubic = self.cubic_part(b)?;
        let modes = b
            .modes()
            .iter()
            .zip(&cubic[1..])
            .map(|(bk, ck)| bk + beta / 3.0 * ck)
            .collect();
        SpectralField::from_modes(modes, b.t)
    }
}

/// Maps the field `b` to `a` through the normal-form transformation.
pub fn apply_transform(b: &SpectralField, params: &LatticeParams) -> Result<SpectralField> {
    b.check(params)?;
    NormalFormKernel::new(params)?.apply(b, params.beta())
}

/// How far a transformed field moved from its input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    /// `‖a - b‖₂ / ‖b‖₂`.
    pub relative_l2: f64,
    /// `max_k |a_k - b_k| / |b_k|` over modes with `|b_k| > 1e-8`.
    pub max_mode_ratio: f64,
}

pub fn deviation(a: &SpectralField, b: &SpectralField) -> Result<Deviation> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: b.n(),
            actual: a.n(),
        });
    }
    let mut diff = 0.0;
    let mut max_mode_ratio = 0.0f64;
    for (x, y) in a.modes().iter().zip(b.modes()) {
        let d = (x - y).norm();
        diff += d * d;
        if y.norm() > 1e-8 {
            max_mode_ratio = max_mode_ratio.max(d / y.norm());
        }
    }
    let base = b.norm();
    Ok(Deviation {
        relative_l2: if base > 0.0 { diff.sqrt() / base } else { 0.0 },
        max_mode_ratio,
    })
}
