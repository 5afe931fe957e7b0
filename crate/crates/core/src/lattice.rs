//! Physical-space description of the periodic beta-FPUT chain.
//!
//! Masses are stored at indices `0..N` and neighbours are looked up mod `N`,
//! so `q[N]` is `q[0]`. The equations of motion are
//!
//! ```text
//! m q''_j = κ[(q_{j+1}-q_j) - (q_j-q_{j-1})] + β[(q_{j+1}-q_j)³ - (q_j-q_{j-1})³]
//! ```
//!
//! and they derive from
//! `H = Σ p²/2m + κ/2 Σ (q_{j+1}-q_j)² + β/4 Σ (q_{j+1}-q_j)⁴`.

use crate::error::{Error, Result};

/// Smallest chain the toolkit accepts.
pub const MIN_SITES: usize = 4;

/// Physical parameters of one chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    n: usize,
    m: f64,
    kappa: f64,
    beta: f64,
}

impl LatticeParams {
    pub fn new(n: usize, m: f64, kappa: f64, beta: f64) -> Result<Self> {
        if n < MIN_SITES {
            return Err(Error::Config(format!(
                "chain needs at least {MIN_SITES} masses, got {n}"
            )));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Config(format!("mass must be positive, got {m}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Config(format!(
                "linear spring constant must be positive, got {kappa}"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::Config(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { n, m, kappa, beta })
    }

    /// Unit mass and spring constant, the setting used throughout the experiments.
    pub fn unit(n: usize, beta: f64) -> Result<Self> {
        Self::new(n, 1.0, 1.0, beta)
    }

    /// Builds the chain from the control parameter βN, so `beta = beta_n / n`.
    pub fn from_beta_n(n: usize, m: f64, kappa: f64, beta_n: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("chain needs at least one mass".into()));
        }
        Self::new(n, m, kappa, beta_n / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_n(&self) -> f64 {
        self.beta * self.n as f64
    }

    /// Same chain with a different nonlinearity.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.n, self.m, self.kappa, beta)
    }
}

/// Positions and momenta (`p = m q'`) of every mass at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl ChainState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                actual: p.len(),
            });
        }
        Ok(Self { q, p, t })
    }

    /// The chain at rest in its equilibrium configuration.
    pub fn at_rest(n: usize) -> Self {
        Self {
            q: vec![0.0; n],
            p: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn check(&self, params: &LatticeParams) -> Result<()> {
        for len in [self.q.len(), self.p.len()] {
            if len != params.n() {
                return Err(Error::DimensionMismatch {
                    expected: params.n(),
                    actual: len,
                });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }

    pub fn max_abs_q(&self) -> f64 {
        self.q.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn total_momentum(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Accelerations `q''_j` of every mass.
pub fn acceleration(state: &ChainState, params: &LatticeParams) -> Result<Vec<f64>> {
    state.check(params)?;
    let mut out = vec![0.0; params.n()];
    acceleration_into(&state.q, params, &mut out);
    Ok(out)
}

/// Allocation-free kernel behind [`acceleration`]; slices must have length `N`.
pub(crate) fn acceleration_into(q: &[f64], params: &LatticeParams, out: &mut [f64]) {
    let n = q.len();
    debug_assert_eq!(out.len(), n);
    let (kappa, beta, inv_m) = (params.kappa(), params.beta(), 1.0 / params.m());

    // Bond force between j and j+1, wrapping the last bond onto site 0.
    let bond = |j: usize| {
        let d = q[(j + 1) % n] - q[j];
        kappa * d + beta * d * d * d
    };
    let mut left = bond(n - 1);
    for (j, slot) in out.iter_mut().enumerate() {
        let right = bond(j);
        *slot = (right - left) * inv_m;
        left = right;
    }
}

/// Total energy of the chain.
pub fn hamiltonian_physical(state: &ChainState, params: &LatticeParams) -> Result<f64> {
    state.check(params)?;
    let kinetic = state.p.iter().map(|p| p * p).sum::<f64>() / (2.0 * params.m());
    Ok(kinetic + potential_energy(&state.q, params))
}

/// Spring energy split into its harmonic and quartic parts.
pub fn potential_parts(q: &[f64], params: &LatticeParams) -> (f64, f64) {
    let n = q.len();
    let (mut quad, mut quart) = (0.0, 0.0);
    for j in 0..n {
        let d = q[(j + 1) % n] - q[j];
        let d2 = d * d;
        quad += d2;
        quart += d2 * d2;
    }
    (0.5 * params.kappa() * quad, 0.25 * params.beta() * quart)
}

fn potential_energy(q: &[f64], params: &LatticeParams) -> f64 {
    let (quad, quart) = potential_parts(q, params);
    quad + quart
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(LatticeParams::new(3, 1.0, 1.0, 0.0).is_err());
        assert!(LatticeParams::new(8, 0.0, 1.0, 0.0).is_err());
        assert!(LatticeParams::new(8, 1.0, -1.0, 0.0).is_err());
        assert!(LatticeParams::new(8, 1.0, 1.0, f64::NAN).is_err());
        let p = LatticeParams::from_beta_n(200, 1.0, 1.0, 0.5).unwrap();
        assert!((p.beta_n() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_and_translation_have_no_force() {
        let params = LatticeParams::new(7, 1.3, 0.7, 2.0).unwrap();
        let rest = ChainState::at_rest(7);
        assert!(acceleration(&rest, &params).unwrap().iter().all(|a| *a == 0.0));
        let shifted = ChainState::new(vec![0.37; 7], vec![0.0; 7], 0.0).unwrap();
        assert!(acceleration(&shifted, &params).unwrap().iter().all(|a| *a == 0.0));
    }

    #[test]
    fn zone_boundary_mode_of_four_sites() {
        let params = LatticeParams::unit(4, 0.0).unwrap();
        let s = ChainState::new(vec![1.0, 0.0, -1.0, 0.0], vec![0.0; 4], 0.0).unwrap();
        // cos(πj/2) is the k = 1 mode: ω² = 4 sin²(π/4) = 2.
        assert_eq!(acceleration(&s, &params).unwrap(), vec![-2.0, 0.0, 2.0, 0.0]);
        // (-1)^j is the k = 2 mode: ω² = 4.
        let s = ChainState::new(vec![1.0, -1.0, 1.0, -1.0], vec![0.0; 4], 0.0).unwrap();
        assert_eq!(acceleration(&s, &params).unwrap(), vec![-4.0, 4.0, -4.0, 4.0]);
    }

    #[test]
    fn hand_evaluated_energies() {
        let params = LatticeParams::unit(4, 1.0).unwrap();
        assert_eq!(hamiltonian_physical(&ChainState::at_rest(4), &params).unwrap(), 0.0);
        let kick = ChainState::new(vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        assert_eq!(hamiltonian_physical(&kick, &params).unwrap(), 0.5);
        let bump = ChainState::new(vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4], 0.0).unwrap();
        assert_eq!(hamiltonian_physical(&bump, &params).unwrap(), 1.5);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let params = LatticeParams::unit(8, 0.1).unwrap();
        let s = ChainState::at_rest(6);
        assert!(matches!(
            acceleration(&s, &params),
            Err(Error::DimensionMismatch { expected: 8, actual: 6 })
        ));
        assert!(ChainState::new(vec![0.0; 3], vec![0.0; 4], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn force_is_minus_gradient_of_potential(
            q in prop::collection::vec(-1.5f64..1.5, 12),
            beta in 0.0f64..3.0,
        ) {
            let params = LatticeParams::new(12, 1.7, 0.8, beta).unwrap();
            let state = ChainState::new(q.clone(), vec![0.0; 12], 0.0).unwrap();
            let acc = acceleration(&state, &params).unwrap();
            let eps = 1e-5;
            for j in 0..12 {
                let mut plus = state.clone();
                plus.q[j] += eps;
                let mut minus = state.clone();
                minus.q[j] -= eps;
                let grad = (hamiltonian_physical(&plus, &params).unwrap()
                    - hamiltonian_physical(&minus, &params).unwrap())
                    / (2.0 * eps);
                prop_assert!((grad + params.m() * acc[j]).abs() <= 1e-6);
            }
        }

        #[test]
        fn internal_forces_sum_to_zero(
            q in prop::collection::vec(-3.0f64..3.0, 4..64),
            beta in 0.0f64..5.0,
        ) {
            let n = q.len();
            let params = LatticeParams::new(n, 1.0, 1.0, beta).unwrap();
            let state = ChainState::new(q, vec![0.0; n], 0.0).unwrap();
            let acc = acceleration(&state, &params).unwrap();
            let max = acc.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let total: f64 = acc.iter().sum();
            prop_assert!(total.abs() <= 1e-12 * n as f64 * max.max(f64::MIN_POSITIVE));
        }
    }
}
