//! Fourier and normal-mode representation of the chain.
//!
//! Forward transforms carry the `1/N` factor, `X_k = (1/N) Σ_j x_j e^{-2πikj/N}`,
//! and normal modes are
//! `a_k = [(mω_k)^{1/2} Q_k + i (mω_k)^{-1/2} P_k] / √2` for `k = 1..N-1`.
//! The `k = 0` component (centre-of-mass position and total momentum) has
//! `ω = 0` and is projected out.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{ChainState, LatticeParams, MIN_SITES};

/// Largest chain accepted by the O(N³) reference kernels.
pub const REFERENCE_MAX_N: usize = 128;

/// Reduces a signed wavenumber to its representative in `0..N`.
pub fn wrap_mode(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// `sgn sin(πx/N)`: odd, `2N`-periodic and zero exactly on multiples of `N`.
pub fn iota(x: i64, n: usize) -> i32 {
    let n = n as i64;
    let r = x.rem_euclid(2 * n);
    if r == 0 || r == n {
        0
    } else if r < n {
        1
    } else {
        -1
    }
}

/// Linear frequency `ω(k) = 2 √(κ/m) |sin(πk/N)|`.
pub fn dispersion(k: i64, params: &LatticeParams) -> f64 {
    let n = params.n();
    let r = wrap_mode(k, n);
    // ω(k) = ω(N-k) bitwise.
    let r = r.min(n - r);
    2.0 * (params.kappa() / params.m()).sqrt() * (PI * r as f64 / n as f64).sin()
}

/// All frequencies `ω_0..ω_{N-1}`.
pub fn dispersion_table(params: &LatticeParams) -> Vec<f64> {
    (0..params.n() as i64).map(|k| dispersion(k, params)).collect()
}

/// Interaction coefficient
/// `T = -(3/4κ²) ι(k2+k3+k4) ι(k2) ι(k3) ι(k4) Π √ω(k_i)`.
///
/// Arguments are signed: `T_{1,-2,3,4}` is `interaction_t(k1, -k2, k3, k4, ..)`.
pub fn interaction_t(k1: i64, k2: i64, k3: i64, k4: i64, params: &LatticeParams) -> f64 {
    let n = params.n();
    let sign = iota(k2 + k3 + k4, n) * iota(k2, n) * iota(k3, n) * iota(k4, n);
    if sign == 0 {
        return 0.0;
    }
    let amp = [k1, k2, k3, k4]
        .iter()
        .map(|&k| dispersion(k, params).sqrt())
        .product::<f64>();
    -0.75 / (params.kappa() * params.kappa()) * sign as f64 * amp
}

/// Normal-mode amplitudes `a_1..a_{N-1}` of a chain of `N` masses.
///
/// Stored with length `N`; slot 0 is pinned to zero so wavenumbers index directly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    amps: Vec<Complex64>,
    pub t: f64,
}

impl SpectralField {
    pub fn zeros(n: usize) -> Self {
        Self {
            amps: vec![Complex64::new(0.0, 0.0); n],
            t: 0.0,
        }
    }

    /// Builds a field from the `N-1` amplitudes `a_1..a_{N-1}`.
    pub fn from_modes(modes: Vec<Complex64>, t: f64) -> Result<Self> {
        let n = modes.len() + 1;
        if n < MIN_SITES {
            return Err(Error::Config(format!(
                "a field needs at least {} modes, got {}",
                MIN_SITES - 1,
                modes.len()
            )));
        }
        if modes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("field amplitudes must be finite".into()));
        }
        let mut amps = Vec::with_capacity(n);
        amps.push(Complex64::new(0.0, 0.0));
        amps.extend(modes);
        Ok(Self { amps, t })
    }

    pub fn n(&self) -> usize {
        self.amps.len()
    }

    /// Amplitude of mode `k`; `k = 0` (and any multiple of `N`) reads as zero.
    pub fn get(&self, k: i64) -> Complex64 {
        self.amps[wrap_mode(k, self.n())]
    }

    pub fn set(&mut self, k: usize, value: Complex64) {
        assert!(k > 0 && k < self.n(), "mode {k} outside 1..{}", self.n());
        self.amps[k] = value;
    }

    /// `a_1..a_{N-1}`.
    pub fn modes(&self) -> &[Complex64] {
        &self.amps[1..]
    }

    /// Length-`N` view with the zero slot included.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn check(&self, params: &LatticeParams) -> Result<()> {
        if self.n() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                actual: self.n(),
            });
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ ω_k |a_k|²`, the harmonic energy per site.
    pub fn harmonic_energy(&self, params: &LatticeParams) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| dispersion(k as i64, params) * a.norm_sqr())
            .sum()
    }
}

/// `X_k = (1/N) Σ_j x_j e^{-2πikj/N}`.
pub fn dft(values: &[f64]) -> Result<Vec<Complex64>> {
    if values.len() < MIN_SITES {
        return Err(Error::Config(format!(
            "transform needs at least {MIN_SITES} points, got {}",
            values.len()
        )));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(values.len());
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let scale = 1.0 / values.len() as f64;
    buf.iter_mut().for_each(|x| *x *= scale);
    Ok(buf)
}

/// Inverse of [`dft`]: `x_j = Σ_k X_k e^{2πikj/N}`.
pub fn idft(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(coeffs.len());
    let mut buf = coeffs.to_vec();
    fft.process(&mut buf);
    buf
}

/// Cached FFT plans and frequencies for repeated physical ↔ modal conversion.
///
/// Immutable after construction and cheap to clone; share one per chain size.
#[derive(Clone)]
pub struct ModeTransform {
    params: LatticeParams,
    omega: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ModeTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeTransform")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ModeTransform {
    pub fn new(params: &LatticeParams) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            params: *params,
            omega: dispersion_table(params),
            forward: planner.plan_fft_forward(params.n()),
            inverse: planner.plan_fft_inverse(params.n()),
        }
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn to_normal_modes(&self, state: &ChainState) -> Result<SpectralField> {
        state.check(&self.params)?;
        let n = self.params.n();
        let m = self.params.m();
        let mut q: Vec<Complex64> = state.q.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut p: Vec<Complex64> = state.p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut q);
        self.forward.process(&mut p);
        let scale = 1.0 / n as f64;
        let (q0, p0) = (q[0] * scale, p[0] * scale);
        if q0.norm() > 1e-12 || p0.norm() > 1e-12 {
            log::trace!("discarding zero mode: Q_0 = {q0}, P_0 = {p0}");
        }

        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        for k in 1..n {
            let root = (m * self.omega[k]).sqrt();
            let (qk, pk) = (q[k] * scale, p[k] * scale);
            amps[k] = std::f64::consts::FRAC_1_SQRT_2
                * (root * qk + Complex64::i() * pk / root);
        }
        Ok(SpectralField { amps, t: state.t })
    }

    pub fn from_normal_modes(&self, field: &SpectralField) -> Result<ChainState> {
        field.check(&self.params)?;
        let n = self.params.n();
        let m = self.params.m();
        let a = field.as_slice();
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        let mut p = vec![Complex64::new(0.0, 0.0); n];
        // a_k and conj(a_{N-k}) together fix Q_k and P_k.
        for k in 1..n {
            let root = (m * self.omega[k]).sqrt();
            let partner = a[n - k].conj();
            q[k] = (a[k] + partner) * std::f64::consts::FRAC_1_SQRT_2 / root;
            p[k] = -Complex64::i() * root * (a[k] - partner) * std::f64::consts::FRAC_1_SQRT_2;
        }
        self.inverse.process(&mut q);
        self.inverse.process(&mut p);

        let scale = q
            .iter()
            .chain(&p)
            .fold(1.0_f64, |acc, z| acc.max(z.re.abs()));
        let residue = q.iter().chain(&p).fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
        if residue > 1e-8 * scale {
            return Err(Error::Consistency(format!(
                "inverse transform left imaginary residue {residue:e}"
            )));
        }
        ChainState::new(
            q.iter().map(|z| z.re).collect(),
            p.iter().map(|z| z.re).collect(),
            field.t,
        )
    }
}

pub fn to_normal_modes(state: &ChainState, params: &LatticeParams) -> Result<SpectralField> {
    ModeTransform::new(params).to_normal_modes(state)
}

pub fn from_normal_modes(field: &SpectralField, params: &LatticeParams) -> Result<ChainState> {
    ModeTransform::new(params).from_normal_modes(field)
}

/// Right-hand side `i ȧ_k` of the modal equations of motion, by direct summation.
///
/// ```text
/// i ȧ_1 = ω_1 a_1 + β/3 Σ [ T_{1234} a_2 a_3 a_4 δ(1-2-3-4)
///                          + 3 T_{1,-2,3,4} a*_2 a_3 a_4 δ(1+2-3-4)
///                          + 3 T_{1,-2,3,4} a_2 a*_3 a*_4 δ(1-2+3+4)
///                          + T_{1234} a*_2 a*_3 a*_4 δ(1+2+3+4) ]
/// ```
///
/// O(N³); limited to [`REFERENCE_MAX_N`].
pub fn adot_rhs(field: &SpectralField, params: &LatticeParams) -> Result<Vec<Complex64>> {
    field.check(params)?;
    let n = params.n();
    if n > REFERENCE_MAX_N {
        return Err(Error::Precondition(format!(
            "reference right-hand side is limited to N <= {REFERENCE_MAX_N}, got {n}"
        )));
    }
    let a = field.as_slice();
    let omega = dispersion_table(params);
    let ni = n as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k1 in 1..ni {
        let mut acc = Complex64::new(0.0, 0.0);
        for k2 in 1..ni {
            let a2 = a[k2 as usize];
            for k3 in 1..ni {
                let a3 = a[k3 as usize];
                let k4 = wrap_mode(k1 - k2 - k3, n) as i64;
                if k4 != 0 {
                    acc += interaction_t(k1, k2, k3, k4, params) * a2 * a3 * a[k4 as usize];
                }
                let k4 = wrap_mode(k1 + k2 - k3, n) as i64;
                if k4 != 0 {
                    acc += 3.0
                        * interaction_t(k1, -k2, k3, k4, params)
                        * a2.conj()
                        * a3
                        * a[k4 as usize];
                }
                let k4 = wrap_mode(k2 - k1 - k3, n) as i64;
                if k4 != 0 {
                    acc += 3.0
                        * interaction_t(k1, -k2, k3, k4, params)
                        * a2
                        * (a3 * a[k4 as usize]).conj();
                }
                let k4 = wrap_mode(-k1 - k2 - k3, n) as i64;
                if k4 != 0 {
                    acc += interaction_t(k1, k2, k3, k4, params) * (a2 * a3 * a[k4 as usize]).conj();
                }
            }
        }
        let k = k1 as usize;
        out[k] = omega[k] * a[k] + params.beta() / 3.0 * acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize) -> LatticeParams {
        LatticeParams::unit(n, 0.0).unwrap()
    }

    fn random_zero_mean_state(n: usize, seed: u64, scale: f64) -> ChainState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        for v in [&mut q, &mut p] {
            let mean = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|x| *x -= mean);
        }
        ChainState::new(q, p, 0.0).unwrap()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn dft_of_constant_and_cosine() {
        let x = dft(&[2.5; 8]).unwrap();
        assert!((x[0] - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        assert!(x[1..].iter().all(|z| z.norm() < 1e-15));

        let n = 10;
        let c: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
        let x = dft(&c).unwrap();
        for (k, z) in x.iter().enumerate() {
            let expect = if k == 1 || k == n - 1 { 0.5 } else { 0.0 };
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-15, "k={k}: {z}");
        }
        assert!(dft(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(0, &unit(8)), 0.0);
        assert!((dispersion(4, &unit(8)) - 2.0).abs() < 1e-15);
        assert!((dispersion(1, &unit(6)) - 1.0).abs() < 1e-15);
        assert_eq!(dispersion(-3, &unit(10)), dispersion(3, &unit(10)));
        assert_eq!(dispersion(7, &unit(10)), dispersion(3, &unit(10)));
    }

    #[test]
    fn iota_values() {
        assert_eq!(iota(3, 8), 1);
        assert_eq!(iota(11, 8), -1);
        assert_eq!(iota(8, 8), 0);
        assert_eq!(iota(0, 8), 0);
        assert_eq!(iota(-3, 8), -1);
    }

    #[test]
    fn iota_is_odd_and_2n_periodic() {
        for n in [4usize, 5, 8, 13] {
            let ni = n as i64;
            for x in -4 * ni..=4 * ni {
                assert_eq!(iota(-x, n), -iota(x, n));
                assert_eq!(iota(x + 2 * ni, n), iota(x, n));
                assert_eq!(iota(x, n) == 0, x.rem_euclid(ni) == 0);
                let s = (PI * x as f64 / n as f64).sin();
                if s.abs() > 1e-9 {
                    assert_eq!(iota(x, n), s.signum() as i32);
                }
            }
        }
    }

    #[test]
    fn interaction_coefficient_hand_value() {
        let t = interaction_t(3, 1, 1, 1, &unit(6));
        assert!((t + 0.75 * 2f64.sqrt()).abs() < 1e-14);
        // k2 + k3 + k4 ≡ 0 kills the coefficient.
        assert_eq!(interaction_t(3, 1, 2, 3, &unit(6)), 0.0);
        // Flipping k2 flips ι(k2) and replaces ι(k2+k3+k4) by ι(-k2+k3+k4).
        let p = unit(11);
        let plain = interaction_t(5, 2, 4, 7, &p);
        let flipped = interaction_t(5, -2, 4, 7, &p);
        let expect = plain * -iota(-2 + 4 + 7, 11) as f64 / iota(2 + 4 + 7, 11) as f64;
        assert!((flipped - expect).abs() < 1e-14);
    }

    #[test]
    fn dispersion_is_strictly_subadditive_on_the_lattice() {
        for n in 4..=64usize {
            let p = unit(n);
            let w = dispersion_table(&p);
            for k2 in 1..n {
                for k3 in 1..n {
                    for k4 in 1..n {
                        let k1 = (k2 + k3 + k4) % n;
                        if k1 == 0 {
                            continue;
                        }
                        assert!(w[k1] < w[k2] + w[k3] + w[k4], "N={n} ({k1},{k2},{k3},{k4})");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_state_and_single_mode() {
        let p = unit(12);
        let f = to_normal_modes(&ChainState::at_rest(12), &p).unwrap();
        assert!(f.modes().iter().all(|a| a.norm() == 0.0));
        let s = from_normal_modes(&SpectralField::zeros(12), &p).unwrap();
        assert!(s.q.iter().chain(&s.p).all(|v| *v == 0.0));

        // Standing wave of wavenumber 3 at rest.
        let q: Vec<f64> = (0..12).map(|j| (2.0 * PI * 3.0 * j as f64 / 12.0).cos()).collect();
        let f = to_normal_modes(&ChainState::new(q, vec![0.0; 12], 0.0).unwrap(), &p).unwrap();
        for k in 1..12 {
            let nonzero = f.get(k).norm() > 1e-12;
            assert_eq!(nonzero, k == 3 || k == 9, "k={k}");
        }
    }

    #[test]
    fn round_trip_through_normal_modes() {
        for (n, seed) in [(16, 1), (17, 2), (64, 3)] {
            let p = LatticeParams::new(n, 1.3, 0.7, 0.0).unwrap();
            let s = random_zero_mean_state(n, seed, 1.0);
            let back = from_normal_modes(&to_normal_modes(&s, &p).unwrap(), &p).unwrap();
            assert!(rel_err(&back.q, &s.q) < 1e-10);
            assert!(rel_err(&back.p, &s.p) < 1e-10);
        }
    }

    #[test]
    fn single_mode_field_is_a_travelling_wave() {
        let p = unit(16);
        let mut f = SpectralField::zeros(16);
        f.set(3, Complex64::new(1.0, 0.0));
        let s = from_normal_modes(&f, &p).unwrap();
        // q_j ∝ cos(2π·3j/N): a single Fourier pair.
        let back = to_normal_modes(&s, &p).unwrap();
        for k in 1..16 {
            assert!((back.get(k) - f.get(k)).norm() < 1e-10);
        }
    }

    #[test]
    fn harmonic_energy_matches_physical_energy() {
        for (n, seed) in [(8, 5), (31, 6), (100, 7)] {
            let p = LatticeParams::new(n, 0.8, 1.9, 0.0).unwrap();
            let s = random_zero_mean_state(n, seed, 2.0);
            let e_modes = to_normal_modes(&s, &p).unwrap().harmonic_energy(&p);
            let e_phys = crate::lattice::hamiltonian_physical(&s, &p).unwrap() / n as f64;
            assert!((e_modes - e_phys).abs() <= 1e-10 * e_phys);
        }
        // Pin the normalisation on one mode: a_k = 1 carries ω_k per site.
        let p = unit(20);
        let mut f = SpectralField::zeros(20);
        f.set(5, Complex64::new(1.0, 0.0));
        let s = from_normal_modes(&f, &p).unwrap();
        let e = crate::lattice::hamiltonian_physical(&s, &p).unwrap() / 20.0;
        assert!((e - dispersion(5, &p)).abs() < 1e-12);
    }

    #[test]
    fn linear_limit_of_rhs() {
        let p = unit(12);
        let s = random_zero_mean_state(12, 9, 1.0);
        let f = to_normal_modes(&s, &p).unwrap();
        let rhs = adot_rhs(&f, &p).unwrap();
        for k in 1..12 {
            let expect = dispersion(k as i64, &p) * f.get(k as i64);
            assert!((rhs[k] - expect).norm() < 1e-14);
        }
        assert!(adot_rhs(&SpectralField::zeros(130), &unit(130)).is_err());
    }

    #[test]
    fn single_mode_rhs_support() {
        let n = 16;
        let p = LatticeParams::unit(n, 1.0).unwrap();
        let kk = 3i64;
        let mut f = SpectralField::zeros(n);
        f.set(kk as usize, Complex64::new(0.01, 0.0));
        let rhs = adot_rhs(&f, &p).unwrap();
        let reachable: Vec<usize> = [3 * kk, kk, -kk, -3 * kk]
            .iter()
            .map(|&k| wrap_mode(k, n))
            .collect();
        for k in 1..n {
            let cubic = rhs[k] - dispersion(k as i64, &p) * f.get(k as i64);
            if !reachable.contains(&k) {
                assert!(cubic.norm() < 1e-18, "k={k}");
            }
        }
    }

    #[test]
    fn rhs_matches_physical_flow() {
        // Finite difference of the modal amplitudes along the exact equations of
        // motion, integrated here with a classical RK4 step.
        let n = 16;
        let p = LatticeParams::new(n, 1.0, 1.0, 0.8).unwrap();
        let s = random_zero_mean_state(n, 11, 0.4);
        let rk4 = |s: &ChainState, h: f64| {
            let deriv = |q: &[f64], pm: &[f64]| {
                let st = ChainState::new(q.to_vec(), pm.to_vec(), 0.0).unwrap();
                let acc = crate::lattice::acceleration(&st, &p).unwrap();
                let dq: Vec<f64> = pm.iter().map(|v| v / p.m()).collect();
                let dp: Vec<f64> = acc.iter().map(|a| a * p.m()).collect();
                (dq, dp)
            };
            let axpy = |x: &[f64], y: &[f64], c: f64| -> Vec<f64> {
                x.iter().zip(y).map(|(a, b)| a + c * b).collect()
            };
            let (k1q, k1p) = deriv(&s.q, &s.p);
            let (k2q, k2p) = deriv(&axpy(&s.q, &k1q, h / 2.0), &axpy(&s.p, &k1p, h / 2.0));
            let (k3q, k3p) = deriv(&axpy(&s.q, &k2q, h / 2.0), &axpy(&s.p, &k2p, h / 2.0));
            let (k4q, k4p) = deriv(&axpy(&s.q, &k3q, h), &axpy(&s.p, &k3p, h));
            let comb = |x: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
                (0..x.len())
                    .map(|i| x[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                    .collect()
            };
            ChainState::new(
                comb(&s.q, &k1q, &k2q, &k3q, &k4q),
                comb(&s.p, &k1p, &k2p, &k3p, &k4p),
                s.t + h,
            )
            .unwrap()
        };
        let h = 1e-6;
        let plus = to_normal_modes(&rk4(&s, h), &p).unwrap();
        let minus = to_normal_modes(&rk4(&s, -h), &p).unwrap();
        let rhs = adot_rhs(&to_normal_modes(&s, &p).unwrap(), &p).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for k in 1..n {
            let i_adot = Complex64::i() * (plus.get(k as i64) - minus.get(k as i64)) / (2.0 * h);
            num += (i_adot - rhs[k]).norm_sqr();
            den += rhs[k].norm_sqr();
        }
        assert!((num / den).sqrt() <= 1e-4, "relative error {}", (num / den).sqrt());
    }

    proptest! {
        #[test]
        fn dft_round_trip(x in prop::collection::vec(-10.0f64..10.0, 4..80)) {
            let back = idft(&dft(&x).unwrap());
            let scale = x.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
            for (b, v) in back.iter().zip(&x) {
                prop_assert!((b.re - v).abs() <= 1e-12 * scale);
                prop_assert!(b.im.abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn dft_is_hermitian_for_real_input(x in prop::collection::vec(-5.0f64..5.0, 4..40)) {
            let big = dft(&x).unwrap();
            let n = x.len();
            for k in 1..n {
                prop_assert!((big[n - k] - big[k].conj()).norm() <= 1e-13);
            }
        }

        #[test]
        fn random_field_round_trip(
            re in prop::collection::vec(-3.0f64..3.0, 5..40),
            seed in any::<u64>(),
        ) {
            let n = re.len() + 1;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let modes: Vec<Complex64> = re
                .iter()
                .map(|&r| Complex64::new(r, rng.random_range(-3.0..3.0)))
                .collect();
            let f = SpectralField::from_modes(modes, 0.0).unwrap();
            let p = LatticeParams::new(n, 1.1, 0.9, 0.0).unwrap();
            let back = to_normal_modes(&from_normal_modes(&f, &p).unwrap(), &p).unwrap();
            let err: f64 = f
                .modes()
                .iter()
                .zip(back.modes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(err <= 1e-10 * f.norm());
        }
    }
}
