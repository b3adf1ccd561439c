//! Monte-Carlo spin annealer.
//!
//! Each sweep visits every spin once, reads its local field
//! `I_i = Σ_j J_ij σ_j + h_i` and updates it by one of three rules:
//!
//! * Gibbs: `σ_i = +1` with probability `1 / (1 + exp(−2 I_i / T))`.
//! * Metropolis: flip with probability `min(1, exp(−ΔH / T))`, `ΔH = 2 σ_i I_i`.
//! * Greedy: flip iff `ΔH < 0`.
//!
//! Two stochastic inversion points can be switched on: each neighbour spin
//! read while forming `I_i` is negated with probability `p_input_invert`, and
//! the spin written by the update is negated with probability
//! `p_output_invert`. Both default to zero, which is plain simulated
//! annealing.
//!
//! Restart chain `k` draws from `ChaCha8Rng::seed_from_u64(seed)` with its
//! stream set to `k`, so chains are independent and reproducible regardless
//! of how they are scheduled across threads.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{IsingError, IsingModel, SpinState};

/// Boltzmann's constant; temperatures are expressed in energy units.
pub const K_BOLTZMANN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnealError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("sweep index {sweep} out of range for {sweeps} sweeps")]
    SweepOutOfRange { sweep: usize, sweeps: usize },
    #[error("non-finite energy at sweep {sweep}")]
    NonFiniteEnergy { sweep: usize },
    #[error(transparent)]
    Ising(#[from] IsingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: usize,
    pub kind: ScheduleKind,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t_start: 2.0,
            t_end: 0.05,
            sweeps: 500,
            kind: ScheduleKind::Geometric,
        }
    }
}

impl AnnealSchedule {
    pub fn new(
        t_start: f64,
        t_end: f64,
        sweeps: usize,
        kind: ScheduleKind,
    ) -> Result<Self, AnnealError> {
        let s = Self {
            t_start,
            t_end,
            sweeps,
            kind,
        };
        s.validate()?;
        Ok(s)
    }

    /// Constant temperature for every sweep.
    pub fn constant(t: f64, sweeps: usize) -> Result<Self, AnnealError> {
        Self::new(t, t, sweeps, ScheduleKind::Geometric)
    }

    pub fn validate(&self) -> Result<(), AnnealError> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(AnnealError::InvalidParams(format!(
                "temperatures must be positive and finite (t_start = {}, t_end = {})",
                self.t_start, self.t_end
            )));
        }
        if self.t_end > self.t_start {
            return Err(AnnealError::InvalidParams(format!(
                "t_end = {} exceeds t_start = {}",
                self.t_end, self.t_start
            )));
        }
        if self.sweeps == 0 {
            return Err(AnnealError::InvalidParams(
                "sweeps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn temperature_at(schedule: &AnnealSchedule, sweep: usize) -> Result<f64, AnnealError> {
    if sweep >= schedule.sweeps {
        return Err(AnnealError::SweepOutOfRange {
            sweep,
            sweeps: schedule.sweeps,
        });
    }
    if schedule.sweeps == 1 {
        return Ok(schedule.t_start);
    }
    let frac = sweep as f64 / (schedule.sweeps - 1) as f64;
    Ok(match schedule.kind {
        ScheduleKind::Geometric => {
            schedule.t_start * (schedule.t_end / schedule.t_start).powf(frac)
        }
        ScheduleKind::Linear => schedule.t_start + (schedule.t_end - schedule.t_start) * frac,
    })
}

/// Bernoulli inversion probabilities for the input (neighbour reads) and
/// output (written spin) of each update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NoiseConfig {
    pub p_input_invert: f64,
    pub p_output_invert: f64,
}

impl NoiseConfig {
    pub fn new(p_input_invert: f64, p_output_invert: f64) -> Result<Self, AnnealError> {
        let n = Self {
            p_input_invert,
            p_output_invert,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<(), AnnealError> {
        for (name, p) in [
            ("p_input_invert", self.p_input_invert),
            ("p_output_invert", self.p_output_invert),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AnnealError::InvalidParams(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    Metropolis,
    #[default]
    Gibbs,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOrder {
    #[default]
    Sequential,
    RandomPermutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealParams {
    pub schedule: AnnealSchedule,
    pub noise: NoiseConfig,
    pub restarts: usize,
    pub seed: u64,
    pub update_rule: UpdateRule,
    pub sweep_order: SweepOrder,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            schedule: AnnealSchedule::default(),
            noise: NoiseConfig::default(),
            restarts: 50,
            seed: 0,
            update_rule: UpdateRule::Gibbs,
            sweep_order: SweepOrder::Sequential,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<(), AnnealError> {
        self.schedule.validate()?;
        self.noise.validate()?;
        if self.restarts == 0 {
            return Err(AnnealError::InvalidParams(
                "restarts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Best state found by an engine, with its energy trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub best_state: SpinState,
    pub best_energy: f64,
    /// Best-so-far energy after each sweep (or step / readout); non-increasing.
    pub energy_trace: Vec<f64>,
    pub accepted_flips: u64,
    pub seed: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Random stream for restart chain `chain` under `seed`.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Probability of setting a spin to +1 under the Gibbs conditional.
/// At `T = 0` this is a step function with `I = 0` resolved to +1.
pub fn gibbs_up_probability(field: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return if field >= 0.0 { 1.0 } else { 0.0 };
    }
    let x = 2.0 * field / (K_BOLTZMANN * temperature);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepStats {
    pub accepted: u64,
    /// Largest energy increase among accepted flips, measured with the
    /// field the update saw; `−∞` if nothing was accepted.
    pub max_accepted_delta: f64,
}

/// One annealing chain: a spin vector and its private random stream.
pub struct SpinChain<'m> {
    model: &'m IsingModel,
    spins: Vec<i8>,
    rng: ChaCha8Rng,
    order: Vec<usize>,
}

impl<'m> SpinChain<'m> {
    /// Chain `chain` of `seed`, started from uniformly random spins.
    pub fn new(model: &'m IsingModel, seed: u64, chain: u64) -> Self {
        let mut rng = chain_rng(seed, chain);
        let start = SpinState::random(model.num_spins(), &mut rng);
        Self {
            model,
            spins: start.into(),
            rng,
            order: (0..model.num_spins()).collect(),
        }
    }

    pub fn from_state(
        model: &'m IsingModel,
        state: SpinState,
        rng: ChaCha8Rng,
    ) -> Result<Self, AnnealError> {
        if state.len() != model.num_spins() {
            return Err(IsingError::DimensionMismatch {
                expected: model.num_spins(),
                actual: state.len(),
            }
            .into());
        }
        Ok(Self {
            model,
            spins: state.into(),
            rng,
            order: (0..model.num_spins()).collect(),
        })
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn state(&self) -> SpinState {
        SpinState::new(self.spins.clone()).expect("chain spins stay ±1")
    }

    pub fn energy(&self) -> f64 {
        self.model.energy_of(&self.spins)
    }

    fn read_field(&mut self, i: usize, p_input: f64) -> f64 {
        if p_input <= 0.0 {
            return self.model.local_field_of(&self.spins, i);
        }
        let mut field = self.model.fields()[i];
        for &(j, v) in self.model.neighbors(i) {
            let s = f64::from(self.spins[j]);
            field += if self.rng.random::<f64>() < p_input {
                -v * s
            } else {
                v * s
            };
        }
        field
    }

    /// Visits every spin once at `temperature`.
    pub fn sweep(
        &mut self,
        temperature: f64,
        rule: UpdateRule,
        noise: NoiseConfig,
        order: SweepOrder,
    ) -> SweepStats {
        if order == SweepOrder::RandomPermutation {
            self.order.shuffle(&mut self.rng);
        }
        let mut stats = SweepStats {
            accepted: 0,
            max_accepted_delta: f64::NEG_INFINITY,
        };
        for idx in 0..self.order.len() {
            let i = self.order[idx];
            let field = self.read_field(i, noise.p_input_invert);
            let current = self.spins[i];
            let delta = 2.0 * f64::from(current) * field;
            let flip = match rule {
                UpdateRule::Gibbs => {
                    let up = self.rng.random::<f64>() < gibbs_up_probability(field, temperature);
                    (current > 0) != up
                }
                UpdateRule::Metropolis => {
                    delta <= 0.0
                        || self.rng.random::<f64>() < (-delta / (K_BOLTZMANN * temperature)).exp()
                }
                UpdateRule::Greedy => delta < 0.0,
            };
            if flip {
                self.spins[i] = -current;
                stats.accepted += 1;
                stats.max_accepted_delta = stats.max_accepted_delta.max(delta);
            }
            if noise.p_output_invert > 0.0 && self.rng.random::<f64>() < noise.p_output_invert {
                self.spins[i] = -self.spins[i];
            }
        }
        stats
    }
}

struct ChainOutcome {
    best_state: Vec<i8>,
    best_energy: f64,
    trace: Vec<f64>,
    accepted: u64,
}

fn run_chain(
    model: &IsingModel,
    params: &AnnealParams,
    chain: u64,
) -> Result<ChainOutcome, AnnealError> {
    let mut sc = SpinChain::new(model, params.seed, chain);
    let mut best_energy = sc.energy();
    let mut best_state = sc.spins.clone();
    let mut trace = Vec::with_capacity(params.schedule.sweeps);
    let mut accepted = 0;
    for sweep in 0..params.schedule.sweeps {
        let t = temperature_at(&params.schedule, sweep)?;
        accepted += sc
            .sweep(t, params.update_rule, params.noise, params.sweep_order)
            .accepted;
        let e = sc.energy();
        if !e.is_finite() {
            return Err(AnnealError::NonFiniteEnergy { sweep });
        }
        if e < best_energy {
            best_energy = e;
            best_state.copy_from_slice(&sc.spins);
        }
        trace.push(best_energy);
    }
    Ok(ChainOutcome {
        best_state,
        best_energy,
        trace,
        accepted,
    })
}

/// Runs `params.restarts` independent chains and keeps the lowest-energy
/// state (ties go to the lowest chain index).
pub fn anneal(model: &IsingModel, params: &AnnealParams) -> Result<SolveReport, AnnealError> {
    params.validate()?;
    let started = Instant::now();
    let outcomes: Vec<ChainOutcome> = (0..params.restarts as u64)
        .into_par_iter()
        .map(|chain| run_chain(model, params, chain))
        .collect::<Result<_, _>>()?;

    let mut trace = vec![f64::INFINITY; params.schedule.sweeps];
    let mut accepted = 0;
    let mut best: Option<&ChainOutcome> = None;
    for out in &outcomes {
        for (t, e) in trace.iter_mut().zip(&out.trace) {
            *t = t.min(*e);
        }
        accepted += out.accepted;
        if best.is_none_or(|b| out.best_energy < b.best_energy) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one restart");
    Ok(SolveReport {
        best_state: SpinState::new(best.best_state.clone())?,
        best_energy: best.best_energy,
        energy_trace: trace,
        accepted_flips: accepted,
        seed: params.seed,
        wall_time: started.elapsed(),
    })
}

/// Steepest single-flip descent: flips the spin with the most negative
/// `flip_delta` (lowest index on ties) until no flip lowers the energy.
/// The trace holds the energy after every flip.
pub fn greedy_descent(model: &IsingModel, start: &SpinState) -> Result<SolveReport, AnnealError> {
    let started = Instant::now();
    let mut energy = model.energy(start)?;
    let mut spins: Vec<i8> = start.spins().to_vec();
    let mut trace = vec![energy];
    let mut flips = 0;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..spins.len() {
            let d = model.flip_delta_of(&spins, i);
            if d < 0.0 && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let Some((i, _)) = best else { break };
        spins[i] = -spins[i];
        flips += 1;
        energy = model.energy_of(&spins);
        trace.push(energy);
    }
    Ok(SolveReport {
        best_state: SpinState::new(spins)?,
        best_energy: energy,
        energy_trace: trace,
        accepted_flips: flips,
        seed: 0,
        wall_time: started.elapsed(),
    })
}

/// Greedy descent from `restarts` random starts (chain streams as in
/// [`anneal`]); the trace is the best-so-far energy per restart.
pub fn multistart_greedy(
    model: &IsingModel,
    restarts: usize,
    seed: u64,
) -> Result<SolveReport, AnnealError> {
    if restarts == 0 {
        return Err(AnnealError::InvalidParams(
            "restarts must be at least 1".into(),
        ));
    }
    let started = Instant::now();
    let runs: Vec<SolveReport> = (0..restarts as u64)
        .into_par_iter()
        .map(|chain| {
            let start = SpinState::random(model.num_spins(), &mut chain_rng(seed, chain));
            greedy_descent(model, &start)
        })
        .collect::<Result<_, _>>()?;
    let mut trace = Vec::with_capacity(restarts);
    let mut best = &runs[0];
    let mut accepted = 0;
    for run in &runs {
        if run.best_energy < best.best_energy {
            best = run;
        }
        accepted += run.accepted_flips;
        trace.push(best.best_energy);
    }
    Ok(SolveReport {
        best_state: best.best_state.clone(),
        best_energy: best.best_energy,
        energy_trace: trace,
        accepted_flips: accepted,
        seed,
        wall_time: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::testing::random_model;
    use crate::oracle::{enumerate_ising, DEFAULT_CAP};

    fn pair(j: f64) -> IsingModel {
        IsingModel::new(2, [(0, 1, j)], vec![0.0; 2], 0.0).unwrap()
    }

    #[test]
    fn schedule_endpoints() {
        let s = AnnealSchedule::new(2.0, 0.02, 3, ScheduleKind::Geometric).unwrap();
        assert_eq!(temperature_at(&s, 0).unwrap(), 2.0);
        assert!((temperature_at(&s, 1).unwrap() - (2.0f64 * 0.02).sqrt()).abs() < 1e-12);
        assert!((temperature_at(&s, 2).unwrap() - 0.02).abs() <= 1e-12 * 0.02);
        assert!(matches!(
            temperature_at(&s, 3),
            Err(AnnealError::SweepOutOfRange {
                sweep: 3,
                sweeps: 3
            })
        ));

        let lin = AnnealSchedule::new(3.0, 1.0, 5, ScheduleKind::Linear).unwrap();
        assert_eq!(temperature_at(&lin, 2).unwrap(), 2.0);
        assert!((temperature_at(&lin, 4).unwrap() - 1.0).abs() < 1e-12);

        let one = AnnealSchedule::new(3.0, 1.0, 1, ScheduleKind::Linear).unwrap();
        assert_eq!(temperature_at(&one, 0).unwrap(), 3.0);

        assert!(AnnealSchedule::new(1.0, 2.0, 5, ScheduleKind::Linear).is_err());
        assert!(AnnealSchedule::new(1.0, 0.0, 5, ScheduleKind::Linear).is_err());
        assert!(AnnealSchedule::new(1.0, 0.5, 0, ScheduleKind::Linear).is_err());
        assert!(NoiseConfig::new(1.5, 0.0).is_err());
    }

    #[test]
    fn gibbs_probability_limits() {
        assert_eq!(gibbs_up_probability(0.0, 0.0), 1.0);
        assert_eq!(gibbs_up_probability(-1e-300, 0.0), 0.0);
        assert_eq!(gibbs_up_probability(0.0, 1.0), 0.5);
        assert!((gibbs_up_probability(1.0, 1.0) - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert_eq!(gibbs_up_probability(-1e6, 1e-3), 0.0);
    }

    #[test]
    fn single_spin_greedy() {
        let model = IsingModel::new(1, [], vec![1.0], 0.0).unwrap();
        let params = AnnealParams {
            update_rule: UpdateRule::Greedy,
            restarts: 3,
            ..Default::default()
        };
        let r = anneal(&model, &params).unwrap();
        assert_eq!(r.best_state.spins(), &[1]);
        assert_eq!(r.best_energy, -1.0);
    }

    #[test]
    fn ferromagnetic_pair_gibbs() {
        let params = AnnealParams {
            schedule: AnnealSchedule::new(2.0, 0.05, 200, ScheduleKind::Geometric).unwrap(),
            restarts: 20,
            seed: 5,
            ..Default::default()
        };
        assert_eq!(anneal(&pair(1.0), &params).unwrap().best_energy, -1.0);
    }

    #[test]
    fn deterministic_and_monotone() {
        let model = random_model(16, 0.4, 12);
        for rule in [
            UpdateRule::Gibbs,
            UpdateRule::Metropolis,
            UpdateRule::Greedy,
        ] {
            let params = AnnealParams {
                schedule: AnnealSchedule::new(2.0, 0.05, 60, ScheduleKind::Geometric).unwrap(),
                noise: NoiseConfig::new(0.05, 0.02).unwrap(),
                restarts: 8,
                seed: 99,
                update_rule: rule,
                sweep_order: SweepOrder::RandomPermutation,
            };
            let mut a = anneal(&model, &params).unwrap();
            let mut b = anneal(&model, &params).unwrap();
            a.wall_time = Duration::ZERO;
            b.wall_time = Duration::ZERO;
            assert_eq!(a, b);
            assert!(a.energy_trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(model.energy(&a.best_state).unwrap(), a.best_energy);
            assert_eq!(*a.energy_trace.last().unwrap(), a.best_energy);
        }
    }

    #[test]
    fn restarts_are_independent_streams() {
        let model = random_model(12, 0.5, 1);
        let a = SpinChain::new(&model, 7, 0).state();
        let b = SpinChain::new(&model, 7, 1).state();
        assert_ne!(a, b);
        assert_eq!(a, SpinChain::new(&model, 7, 0).state());
    }

    #[test]
    fn metropolis_at_zero_temperature_never_goes_uphill() {
        let model = random_model(20, 0.3, 4);
        let mut chain = SpinChain::new(&model, 3, 0);
        let sched = AnnealSchedule::new(2.0, 1e-9, 40, ScheduleKind::Geometric).unwrap();
        let mut last = SweepStats::default();
        for sweep in 0..sched.sweeps {
            let t = temperature_at(&sched, sweep).unwrap();
            last = chain.sweep(
                t,
                UpdateRule::Metropolis,
                NoiseConfig::default(),
                SweepOrder::Sequential,
            );
        }
        assert!(last.accepted == 0 || last.max_accepted_delta <= 0.0);
    }

    #[test]
    fn output_inversion_reaches_every_state() {
        let model = pair(1.0);
        let mut chain = SpinChain::new(&model, 11, 0);
        let noise = NoiseConfig::new(0.0, 0.5).unwrap();
        let mut seen = [false; 4];
        for _ in 0..10_000 {
            chain.sweep(1e-9, UpdateRule::Metropolis, noise, SweepOrder::Sequential);
            let s = chain.spins();
            seen[usize::from(s[0] > 0) * 2 + usize::from(s[1] > 0)] = true;
        }
        assert!(seen.iter().all(|&v| v));
    }

    #[test]
    fn annealer_finds_ground_state_of_small_models() {
        let mut hits = 0;
        for seed in 0..10 {
            let model = random_model(12, 0.6, 200 + seed);
            let ground = enumerate_ising(&model, DEFAULT_CAP).unwrap().best_value;
            let params = AnnealParams {
                update_rule: UpdateRule::Metropolis,
                seed,
                ..Default::default()
            };
            let r = anneal(&model, &params).unwrap();
            assert!(r.best_energy >= ground - 1e-9);
            if (r.best_energy - ground).abs() <= 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn greedy_descent_examples() {
        let model = pair(1.0);
        let start = SpinState::new(vec![1, -1]).unwrap();
        let r = greedy_descent(&model, &start).unwrap();
        assert_eq!(r.best_energy, -1.0);
        assert_eq!(r.best_state.spins()[0], r.best_state.spins()[1]);

        let ground = SpinState::new(vec![1, 1]).unwrap();
        let r = greedy_descent(&model, &ground).unwrap();
        assert_eq!(r.best_state, ground);
        assert_eq!(r.accepted_flips, 0);
    }

    #[test]
    fn greedy_endpoints_are_local_minima() {
        let model = random_model(10, 0.7, 21);
        let mut rng = chain_rng(1, 0);
        for _ in 0..100 {
            let start = SpinState::random(10, &mut rng);
            let r = greedy_descent(&model, &start).unwrap();
            for i in 0..10 {
                assert!(model.flip_delta(&r.best_state, i).unwrap() >= 0.0);
            }
            assert!(r.energy_trace.windows(2).all(|w| w[1] < w[0]));
        }
        let r = multistart_greedy(&model, 20, 3).unwrap();
        assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
