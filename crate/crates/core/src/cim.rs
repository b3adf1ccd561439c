//! Mean-field coherent Ising machine.
//!
//! Each spin is an oscillator amplitude `a_i` driven by a linearly ramped
//! pump `p`:
//!
//! ```text
//! da_i = [(p − 1 − a_i²) a_i + ε (Σ_j J_ij a_j + h_i)] dt + η √dt ξ_i
//! ```
//!
//! integrated with Euler–Maruyama (synchronous update, `ξ_i` standard
//! normal) and clamped to `±saturation`. Below threshold (`p < 1`) the
//! amplitudes relax to zero; above it they bifurcate towards `±√(p − 1)`, and
//! the coupling term biases which sign pattern wins. Spins are read out as
//! `sign(a_i)` with zero mapped to +1 every `readout_interval` steps and
//! scored on the Ising energy.
//!
//! Stability: the explicit step needs `dt · (|p − 1| + 3 a_max² + ε ρ(J))`
//! well below 1, where `ρ(J)` is the spectral radius of the coupling matrix.
//! The defaults satisfy this for desk-scale models with unit couplings.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::annealer::SolveReport;
use crate::ising::{IsingError, IsingModel, SpinState};

/// Standard deviation of the initial vacuum-like amplitudes.
/// Default ramp length in steps.
pub const DEFAULT_RAMP_STEPS: usize = 20_000;
/// Default ε is this scale divided by `√V · max(|J_ij|, |h_i|)`.
pub const DEFAULT_COUPLING_SCALE: f64 = 0.5;
pub const INITIAL_AMPLITUDE_SD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CimError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("step index {step} out of range for {steps} ramp steps")]
    StepOutOfRange { step: usize, steps: usize },
    #[error("amplitudes diverged at step {step}; reduce dt (currently {dt})")]
    Divergence { step: usize, dt: f64 },
    #[error(transparent)]
    Ising(#[from] IsingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CimParams {
    pub pump_start: f64,
    pub pump_end: f64,
    pub ramp_steps: usize,
    pub dt: f64,
    /// Injection strength ε; `None` means `0.5 / (√V · max(|J_ij|, |h_i|))`.
    pub coupling_strength: Option<f64>,
    pub noise_amplitude: f64,
    pub seed: u64,
    pub saturation: f64,
    pub readout_interval: usize,
}

impl Default for CimParams {
    fn default() -> Self {
        Self {
            pump_start: -0.5,
            pump_end: 1.5,
            ramp_steps: DEFAULT_RAMP_STEPS,
            dt: 0.01,
            coupling_strength: None,
            noise_amplitude: 0.01,
            seed: 0,
            saturation: 10.0,
            readout_interval: 10,
        }
    }
}

impl CimParams {
    pub fn validate(&self) -> Result<(), CimError> {
        let bad = |msg: String| Err(CimError::InvalidParams(msg));
        if !(self.pump_start.is_finite()
            && self.pump_end.is_finite()
            && self.pump_end > self.pump_start)
        {
            return bad(format!(
                "need pump_end > pump_start (got {} -> {})",
                self.pump_start, self.pump_end
            ));
        }
        if self.ramp_steps == 0 {
            return bad("ramp_steps must be at least 1".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if let Some(eps) = self.coupling_strength {
            if !(eps.is_finite() && eps >= 0.0) {
                return bad(format!("coupling_strength = {eps} must be non-negative"));
            }
        }
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return bad(format!(
                "noise_amplitude = {} must be non-negative",
                self.noise_amplitude
            ));
        }
        if !(self.saturation.is_finite() && self.saturation > 0.0) {
            return bad(format!("saturation = {} must be positive", self.saturation));
        }
        if self.readout_interval == 0 {
            return bad("readout_interval must be at least 1".into());
        }
        Ok(())
    }

    /// ε actually used for `model`. The default is invariant to rescaling
    /// the model's coefficients.
    pub fn effective_coupling(&self, model: &IsingModel) -> f64 {
        self.coupling_strength.unwrap_or_else(|| {
            let scale = model.max_abs_coefficient();
            let scale = if scale > 0.0 { scale } else { 1.0 };
            DEFAULT_COUPLING_SCALE / ((model.num_spins().max(1) as f64).sqrt() * scale)
        })
    }
}

pub fn pump_at(params: &CimParams, step: usize) -> Result<f64, CimError> {
    if step >= params.ramp_steps {
        return Err(CimError::StepOutOfRange {
            step,
            steps: params.ramp_steps,
        });
    }
    if params.ramp_steps == 1 {
        return Ok(params.pump_start);
    }
    let frac = step as f64 / (params.ramp_steps - 1) as f64;
    Ok(params.pump_start + (params.pump_end - params.pump_start) * frac)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeState(Vec<f64>);

impl AmplitudeState {
    pub fn new(amplitudes: Vec<f64>) -> Result<Self, CimError> {
        if let Some(i) = amplitudes.iter().position(|a| !a.is_finite()) {
            return Err(CimError::InvalidParams(format!(
                "amplitude {i} is not finite"
            )));
        }
        Ok(Self(amplitudes))
    }

    /// I.i.d. normal amplitudes with standard deviation `sd`.
    pub fn random<R: Rng + ?Sized>(len: usize, sd: f64, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, sd).expect("finite positive sd");
        Self((0..len).map(|_| normal.sample(rng)).collect())
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|a| -a).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }
}

/// `σ_i = +1` if `a_i ≥ 0`, else −1.
pub fn readout(state: &AmplitudeState) -> SpinState {
    SpinState::new(
        state
            .0
            .iter()
            .map(|&a| if a >= 0.0 { 1 } else { -1 })
            .collect(),
    )
    .expect("signs are ±1")
}

/// Steps the amplitude equation one ramp step at a time.
pub struct CimIntegrator<'m> {
    model: &'m IsingModel,
    params: CimParams,
    eps: f64,
    amps: Vec<f64>,
    next: Vec<f64>,
    rng: ChaCha8Rng,
    step: usize,
}

impl<'m> CimIntegrator<'m> {
    /// Starts from the seeded random initial condition.
    pub fn new(model: &'m IsingModel, params: CimParams) -> Result<Self, CimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let init = AmplitudeState::random(model.num_spins(), INITIAL_AMPLITUDE_SD, &mut rng);
        Self::with_rng(model, params, init, rng)
    }

    /// Starts from `initial`; the noise stream still comes from `params.seed`.
    pub fn from_state(
        model: &'m IsingModel,
        params: CimParams,
        initial: AmplitudeState,
    ) -> Result<Self, CimError> {
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Self::with_rng(model, params, initial, rng)
    }

    fn with_rng(
        model: &'m IsingModel,
        params: CimParams,
        initial: AmplitudeState,
        rng: ChaCha8Rng,
    ) -> Result<Self, CimError> {
        params.validate()?;
        let n = model.num_spins();
        if initial.0.len() != n {
            return Err(IsingError::DimensionMismatch {
                expected: n,
                actual: initial.0.len(),
            }
            .into());
        }
        let s = params.saturation;
        let amps: Vec<f64> = initial.0.iter().map(|a| a.clamp(-s, s)).collect();
        Ok(Self {
            model,
            params,
            eps: params.effective_coupling(model),
            next: vec![0.0; n],
            amps,
            rng,
            step: 0,
        })
    }

    pub fn amplitudes(&self) -> AmplitudeState {
        AmplitudeState(self.amps.clone())
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.params.ramp_steps
    }

    /// Advances one ramp step.
    pub fn step(&mut self) -> Result<(), CimError> {
        let pump = pump_at(&self.params, self.step)?;
        let dt = self.params.dt;
        let noise_scale = self.params.noise_amplitude * dt.sqrt();
        let sat = self.params.saturation;
        let fields = self.model.fields();
        for (i, (&a, &h)) in self.amps.iter().zip(fields).enumerate() {
            let injection: f64 = self
                .model
                .neighbors(i)
                .iter()
                .map(|&(j, v)| v * self.amps[j])
                .sum::<f64>()
                + h;
            let drift = (pump - 1.0 - a * a) * a + self.eps * injection;
            let mut next = a + drift * dt;
            if noise_scale > 0.0 {
                let xi: f64 = StandardNormal.sample(&mut self.rng);
                next += noise_scale * xi;
            }
            if !next.is_finite() {
                return Err(CimError::Divergence {
                    step: self.step,
                    dt,
                });
            }
            self.next[i] = next.clamp(-sat, sat);
        }
        std::mem::swap(&mut self.amps, &mut self.next);
        self.step += 1;
        Ok(())
    }
}

/// Report of a full run plus the amplitudes after the last step.
#[derive(Debug, Clone)]
pub struct CimRun {
    pub report: SolveReport,
    pub final_amplitudes: AmplitudeState,
}

fn drive(mut integ: CimIntegrator<'_>) -> Result<CimRun, CimError> {
    let started = Instant::now();
    let model = integ.model;
    let interval = integ.params.readout_interval;
    let mut best_state = readout(&integ.amplitudes());
    let mut best_energy = model.energy(&best_state)?;
    let mut last = best_state.clone();
    let mut trace = Vec::new();
    let mut sign_changes = 0u64;
    while !integ.is_finished() {
        integ.step()?;
        if integ.steps_taken().is_multiple_of(interval) || integ.is_finished() {
            let spins = readout(&integ.amplitudes());
            sign_changes += spins
                .spins()
                .iter()
                .zip(last.spins())
                .filter(|(a, b)| a != b)
                .count() as u64;
            let e = model.energy(&spins)?;
            if e < best_energy {
                best_energy = e;
                best_state = spins.clone();
            }
            last = spins;
            trace.push(best_energy);
        }
    }
    Ok(CimRun {
        report: SolveReport {
            best_state,
            best_energy,
            energy_trace: trace,
            accepted_flips: sign_changes,
            seed: integ.params.seed,
            wall_time: started.elapsed(),
        },
        final_amplitudes: integ.amplitudes(),
    })
}

/// Integrates the full pump ramp from the seeded initial condition and
/// returns the best sign readout seen.
pub fn cim_solve(model: &IsingModel, params: &CimParams) -> Result<SolveReport, CimError> {
    Ok(cim_run(model, params)?.report)
}

pub fn cim_run(model: &IsingModel, params: &CimParams) -> Result<CimRun, CimError> {
    drive(CimIntegrator::new(model, *params)?)
}

pub fn cim_run_from(
    model: &IsingModel,
    params: &CimParams,
    initial: AmplitudeState,
) -> Result<CimRun, CimError> {
    drive(CimIntegrator::from_state(model, *params, initial)?)
}
