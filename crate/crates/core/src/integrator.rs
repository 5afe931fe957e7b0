//! Sixth-order symplectic integration of the physical equations of motion.
//!
//! The base map is the kick-drift-kick leapfrog. Seven leapfrog stages with
//! Yoshida's "solution A" weights `[w3, w2, w1, w0, w1, w2, w3]` compose to a
//! symmetric sixth-order method. Adjacent half kicks are fused, so one step
//! costs eight force evaluations (seven inside [`evolve`], which carries the
//! last force into the next step).

use crate::error::{Error, Result};
use crate::lattice::{acceleration_into, ChainState, LatticeParams};

/// Yoshida (1990) sixth-order composition, solution A.
const W1: f64 = -1.177_679_984_178_87;
const W2: f64 = 0.235_573_213_359_357;
const W3: f64 = 0.784_513_610_477_560;
const W0: f64 = 1.0 - 2.0 * (W1 + W2 + W3);

/// Stage weights in application order.
pub const YOSHIDA6_WEIGHTS: [f64; 7] = [W3, W2, W1, W0, W1, W2, W3];

/// Default diagnostic cadence, in steps.
pub const DEFAULT_SAMPLE_CADENCE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Yoshida6,
}

impl Scheme {
    pub fn weights(self) -> &'static [f64] {
        match self {
            Scheme::Yoshida6 => &YOSHIDA6_WEIGHTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub h: f64,
    pub substeps_per_sample: usize,
    pub scheme: Scheme,
}

impl IntegratorConfig {
    pub fn new(h: f64, substeps_per_sample: usize) -> Result<Self> {
        let config = Self {
            h,
            substeps_per_sample,
            scheme: Scheme::Yoshida6,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.h)));
        }
        if self.substeps_per_sample == 0 {
            return Err(Error::Config("sample cadence must be at least one step".into()));
        }
        let sum: f64 = self.scheme.weights().iter().sum();
        if (sum - 1.0).abs() > 1e-14 {
            return Err(Error::Config(format!("composition weights sum to {sum}")));
        }
        Ok(())
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            h: 0.01,
            substeps_per_sample: DEFAULT_SAMPLE_CADENCE,
            scheme: Scheme::Yoshida6,
        }
    }
}

/// Reusable stepping workspace for one chain.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: LatticeParams,
    scheme: Scheme,
    acc: Vec<f64>,
    acc_valid: bool,
}

impl Stepper {
    pub fn new(params: &LatticeParams, scheme: Scheme) -> Self {
        Self {
            params: *params,
            scheme,
            acc: vec![0.0; params.n()],
            acc_valid: false,
        }
    }

    /// Advances `state` by `h`; negative `h` runs the map backwards.
    pub fn step_by(&mut self, state: &mut ChainState, h: f64) -> Result<()> {
        state.check(&self.params)?;
        if !self.acc_valid {
            acceleration_into(&state.q, &self.params, &mut self.acc);
        }
        let weights = self.scheme.weights();
        let inv_m = 1.0 / self.params.m();
        let m = self.params.m();

        let mut kick = 0.5 * weights[0] * h;
        for (i, &w) in weights.iter().enumerate() {
            for (p, a) in state.p.iter_mut().zip(&self.acc) {
                *p += kick * m * a;
            }
            let drift = w * h * inv_m;
            for (q, p) in state.q.iter_mut().zip(&state.p) {
                *q += drift * p;
            }
            acceleration_into(&state.q, &self.params, &mut self.acc);
            let next = weights.get(i + 1).copied().unwrap_or(0.0);
            kick = 0.5 * (w + next) * h;
        }
        for (p, a) in state.p.iter_mut().zip(&self.acc) {
            *p += kick * m * a;
        }
        state.t += h;
        self.acc_valid = true;

        let probe: f64 = state.q.iter().chain(&state.p).sum();
        if !probe.is_finite() {
            self.acc_valid = false;
            return Err(Error::BlowUp {
                t: state.t,
                max_q: state.max_abs_q(),
            });
        }
        Ok(())
    }

    /// Forgets the cached force; call after mutating a state outside the stepper.
    pub fn invalidate(&mut self) {
        self.acc_valid = false;
    }
}

/// One step of length `config.h`.
pub fn step(state: &ChainState, params: &LatticeParams, config: &IntegratorConfig) -> Result<ChainState> {
    config.validate()?;
    let mut next = state.clone();
    Stepper::new(params, config.scheme).step_by(&mut next, config.h)?;
    Ok(next)
}

/// Callback invoked every `substeps_per_sample` steps of [`evolve`].
pub trait Observer {
    fn observe(&mut self, state: &ChainState) -> std::result::Result<(), String>;
}

impl<F> Observer for F
where
    F: FnMut(&ChainState) -> std::result::Result<(), String>,
{
    fn observe(&mut self, state: &ChainState) -> std::result::Result<(), String> {
        self(state)
    }
}

/// What happened during an [`evolve`] call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservationLog {
    /// Times at which observers ran.
    pub sample_times: Vec<f64>,
    pub steps: usize,
}

/// Integrates from `state.t` to `t_max`.
///
/// Takes whole steps of `h` while they fit, then one shorter step that lands
/// exactly on `t_max`. Observers see the state after every
/// `substeps_per_sample`-th whole step.
pub fn evolve(
    state: &ChainState,
    params: &LatticeParams,
    config: &IntegratorConfig,
    t_max: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<(ChainState, ObservationLog)> {
    config.validate()?;
    state.check(params)?;
    if !(t_max >= state.t) {
        return Err(Error::Config(format!(
            "t_max = {t_max} precedes the initial time {}",
            state.t
        )));
    }
    let t0 = state.t;
    let span = t_max - t0;
    let whole = (span / config.h + 1e-9).floor() as usize;
    let tail = span - whole as f64 * config.h;

    let mut current = state.clone();
    let mut stepper = Stepper::new(params, config.scheme);
    let mut log = ObservationLog::default();
    for i in 1..=whole {
        stepper.step_by(&mut current, config.h)?;
        // Avoid accumulating rounding in t.
        current.t = t0 + i as f64 * config.h;
        log.steps += 1;
        if i % config.substeps_per_sample == 0 {
            for obs in observers.iter_mut() {
                obs.observe(&current).map_err(|message| Error::Observer {
                    t: current.t,
                    message,
                })?;
            }
            log.sample_times.push(current.t);
        }
    }
    if tail > 1e-9 * config.h {
        stepper.step_by(&mut current, tail)?;
        log.steps += 1;
    }
    current.t = t_max;
    Ok((current, log))
}
