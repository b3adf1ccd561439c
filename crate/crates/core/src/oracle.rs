//! Exhaustive ground truth for small instances.
//!
//! `enumerate_ising` walks all `2^V` states in Gray-code order so each step
//! costs one local-field update per neighbour. The top bits are fixed per
//! worker and the per-worker tie lists are merged, re-scored exactly and
//! sorted, so the result does not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ising::{IsingModel, SpinState};
use crate::reduction::BilpInstance;

/// Default cap: `V ≤ 24` spins, or `2^24` BILP assignments.
pub const DEFAULT_CAP: u32 = 24;

/// Two energies closer than this (relative to magnitude) are ties.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{num_spins} spins exceed the enumeration cap of {cap}; use an annealing engine instead or raise the cap")]
    TooManySpins { num_spins: usize, cap: u32 },
    #[error("search space of 2^{log2_size:.1} assignments exceeds the cap of 2^{cap}; use a heuristic engine instead or raise the cap")]
    SearchSpaceTooLarge { log2_size: f64, cap: u32 },
}

/// All optima, lexicographically ordered, and the optimal value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult<S> {
    pub best_states: Vec<S>,
    pub best_value: f64,
    pub states_examined: u64,
}

/// Outcome of BILP enumeration.
#[derive(Debug, Clone, PartialEq)]
pub enum BilpOracle {
    Optimal(OracleResult<Vec<i64>>),
    Infeasible { states_examined: u64 },
}

impl BilpOracle {
    pub fn optimal(&self) -> Option<&OracleResult<Vec<i64>>> {
        match self {
            BilpOracle::Optimal(r) => Some(r),
            BilpOracle::Infeasible { .. } => None,
        }
    }
}

fn is_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Candidate minimizers found by one worker, as raw spin masks.
struct Partial {
    best: f64,
    masks: Vec<u64>,
}

impl Partial {
    fn empty() -> Self {
        Self {
            best: f64::INFINITY,
            masks: Vec::new(),
        }
    }

    fn offer(&mut self, energy: f64, mask: u64) {
        if energy < self.best && !is_tie(energy, self.best) {
            self.best = energy;
            self.masks.clear();
            self.masks.push(mask);
        } else if is_tie(energy, self.best) {
            self.best = self.best.min(energy);
            self.masks.push(mask);
        }
    }
}

fn scan_block(model: &IsingModel, prefix: u64, free_bits: usize) -> Partial {
    let n = model.num_spins();
    let mut spins: Vec<i8> = (0..n)
        .map(|i| {
            if i >= free_bits && prefix >> (i - free_bits) & 1 == 1 {
                1
            } else {
                -1
            }
        })
        .collect();
    let mut mask: u64 = prefix << free_bits;
    let mut fields: Vec<f64> = (0..n).map(|i| model.local_field_of(&spins, i)).collect();
    let mut energy = model.energy_of(&spins);

    let mut partial = Partial::empty();
    partial.offer(energy, mask);
    for step in 1u64..(1u64 << free_bits) {
        let i = step.trailing_zeros() as usize;
        let old = f64::from(spins[i]);
        energy += 2.0 * old * fields[i];
        spins[i] = -spins[i];
        mask ^= 1 << i;
        for &(j, v) in model.neighbors(i) {
            fields[j] -= 2.0 * v * old;
        }
        partial.offer(energy, mask);
    }
    partial
}

/// Lexicographic order on spins with −1 < +1, spin 0 most significant.
fn lex_key(state: &SpinState) -> Vec<i8> {
    state.spins().to_vec()
}

/// All minimizers of `model` over `2^V` states.
pub fn enumerate_ising(
    model: &IsingModel,
    cap: u32,
) -> Result<OracleResult<SpinState>, OracleError> {
    let n = model.num_spins();
    if n > cap as usize || n >= 63 {
        return Err(OracleError::TooManySpins { num_spins: n, cap });
    }
    let fixed_bits = n.min(6);
    let free_bits = n - fixed_bits;

    let partials: Vec<Partial> = (0..1u64 << fixed_bits)
        .into_par_iter()
        .map(|prefix| scan_block(model, prefix, free_bits))
        .collect();

    // Incremental energies drift; re-score candidates exactly before deciding.
    let mut scored: Vec<(f64, SpinState)> = Vec::new();
    let approx_best = partials
        .iter()
        .map(|p| p.best)
        .fold(f64::INFINITY, f64::min);
    for p in &partials {
        if !is_tie(p.best, approx_best) {
            continue;
        }
        for &mask in &p.masks {
            let s = SpinState::from_mask(n, mask);
            let e = model.energy_of(s.spins());
            scored.push((e, s));
        }
    }
    let best_value = scored.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    let mut best_states: Vec<SpinState> = scored
        .into_iter()
        .filter(|(e, _)| is_tie(*e, best_value))
        .map(|(_, s)| s)
        .collect();
    best_states.sort_by_key(lex_key);

    Ok(OracleResult {
        best_states,
        best_value,
        states_examined: 1u64 << n,
    })
}

/// All feasible optima of `instance`, found by scanning every in-bounds
/// assignment.
pub fn enumerate_bilp(instance: &BilpInstance, cap: u32) -> Result<BilpOracle, OracleError> {
    let n = instance.num_vars();
    let ranges: Vec<(i64, i64)> = (0..n).map(|v| instance.bounds(v)).collect();
    let log2_size: f64 = ranges
        .iter()
        .map(|&(lo, hi)| ((hi - lo + 1) as f64).log2())
        .sum();
    if log2_size > f64::from(cap) + 1e-9 {
        return Err(OracleError::SearchSpaceTooLarge { log2_size, cap });
    }

    let mut x: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
    let mut examined = 0u64;
    let mut best = f64::INFINITY;
    let mut optima: Vec<Vec<i64>> = Vec::new();
    loop {
        examined += 1;
        if instance.is_feasible(&x) {
            let value = instance.objective_value(&x);
            if value < best && !is_tie(value, best) {
                best = value;
                optima.clear();
            }
            if is_tie(value, best) {
                best = best.min(value);
                optima.push(x.clone());
            }
        }
        // Odometer with the last variable fastest keeps output lexicographic.
        let mut k = n;
        loop {
            if k == 0 {
                optima.retain(|o| is_tie(instance.objective_value(o), best));
                return Ok(if optima.is_empty() {
                    BilpOracle::Infeasible {
                        states_examined: examined,
                    }
                } else {
                    BilpOracle::Optimal(OracleResult {
                        best_states: optima,
                        best_value: best,
                        states_examined: examined,
                    })
                });
            }
            k -= 1;
            if x[k] < ranges[k].1 {
                x[k] += 1;
                break;
            }
            x[k] = ranges[k].0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::testing::random_model;
    use crate::reduction::{reduce, Constraint, Sense, VarKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(spins: &[i8]) -> SpinState {
        SpinState::new(spins.to_vec()).unwrap()
    }

    #[test]
    fn ferromagnetic_pair_has_two_ground_states() {
        let model = IsingModel::new(2, [(0, 1, 1.0)], vec![0.0; 2], 0.0).unwrap();
        let r = enumerate_ising(&model, DEFAULT_CAP).unwrap();
        assert_eq!(r.best_value, -1.0);
        assert_eq!(r.best_states, vec![state(&[-1, -1]), state(&[1, 1])]);
        assert_eq!(r.states_examined, 4);
    }

    #[test]
    fn single_spin_follows_field() {
        let model = IsingModel::new(1, [], vec![-3.0], 0.0).unwrap();
        let r = enumerate_ising(&model, DEFAULT_CAP).unwrap();
        assert_eq!(r.best_value, -3.0);
        assert_eq!(r.best_states, vec![state(&[-1])]);
    }

    #[test]
    fn ground_is_below_random_samples() {
        let model = random_model(10, 0.7, 31);
        let r = enumerate_ising(&model, DEFAULT_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let e = model.energy(&SpinState::random(10, &mut rng)).unwrap();
            assert!(r.best_value <= e + 1e-12);
        }
        for s in &r.best_states {
            assert_eq!(model.energy(s).unwrap(), r.best_value);
        }
    }

    #[test]
    fn matches_plain_scan() {
        for seed in 0..10 {
            let n = 3 + seed as usize;
            let model = random_model(n, 0.5, seed);
            let r = enumerate_ising(&model, DEFAULT_CAP).unwrap();
            let plain = (0..1u64 << n)
                .map(|m| model.energy(&SpinState::from_mask(n, m)).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!((r.best_value - plain).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_list_is_complete_and_sorted() {
        // No couplings, no fields: every state is optimal.
        let model = IsingModel::new(8, [], vec![0.0; 8], 0.0).unwrap();
        let r = enumerate_ising(&model, DEFAULT_CAP).unwrap();
        assert_eq!(r.best_states.len(), 256);
        assert!(r.best_states.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn refuses_beyond_cap() {
        let model = IsingModel::new(5, [], vec![0.0; 5], 0.0).unwrap();
        assert!(matches!(
            enumerate_ising(&model, 4),
            Err(OracleError::TooManySpins {
                num_spins: 5,
                cap: 4
            })
        ));
        let inst = BilpInstance::new(
            vec![1.0; 2],
            vec![],
            vec![VarKind::Integer { lo: 0, hi: 1000 }; 2],
        )
        .unwrap();
        assert!(matches!(
            enumerate_bilp(&inst, 16),
            Err(OracleError::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn bilp_examples() {
        let eq = BilpInstance::new(
            vec![1.0, 2.0],
            vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0)],
            vec![VarKind::Binary; 2],
        )
        .unwrap();
        let r = enumerate_bilp(&eq, DEFAULT_CAP).unwrap();
        let opt = r.optimal().unwrap();
        assert_eq!(opt.best_states, vec![vec![1, 0]]);
        assert_eq!(opt.best_value, 1.0);
        assert_eq!(opt.states_examined, 4);

        let infeasible = BilpInstance::new(
            vec![1.0, 2.0],
            vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0)],
            vec![VarKind::Binary; 2],
        )
        .unwrap();
        assert_eq!(
            enumerate_bilp(&infeasible, DEFAULT_CAP).unwrap(),
            BilpOracle::Infeasible { states_examined: 4 }
        );

        let free = BilpInstance::new(vec![-1.0, -1.0], vec![], vec![VarKind::Binary; 2]).unwrap();
        let r = enumerate_bilp(&free, DEFAULT_CAP).unwrap();
        assert_eq!(r.optimal().unwrap().best_states, vec![vec![1, 1]]);
        assert_eq!(r.optimal().unwrap().best_value, -2.0);
    }

    #[test]
    fn bilp_optimum_agrees_with_reduced_ising() {
        for seed in 0..25 {
            let inst = crate::reduction::testing::random_feasible_binary(5, 2, 900 + seed);
            let art = reduce(&inst, None).unwrap();
            let bilp = enumerate_bilp(&inst, DEFAULT_CAP).unwrap();
            let ising = enumerate_ising(art.ising(), DEFAULT_CAP).unwrap();
            let opt = bilp.optimal().expect("planted instances are feasible");
            let decoded = art.decode(&ising.best_states[0]).unwrap();
            assert!(decoded.feasible);
            assert_eq!(decoded.objective, opt.best_value);
            let penalty_free = (ising.best_value - art.constant_shift()) / art.weights().b();
            let cx = opt.best_value - inst.objective_offset();
            assert!((penalty_free - cx).abs() < 1e-9);
        }
    }

    #[test]
    fn independent_of_insertion_order() {
        let model = random_model(9, 0.6, 77);
        let mut couplings: Vec<_> = model.couplings().collect();
        couplings.reverse();
        let reordered = IsingModel::new(9, couplings, model.fields().to_vec(), 0.0).unwrap();
        assert_eq!(
            enumerate_ising(&model, DEFAULT_CAP).unwrap(),
            enumerate_ising(&reordered, DEFAULT_CAP).unwrap()
        );

        let inst = crate::reduction::testing::random_feasible_binary(6, 3, 4);
        let mut rows = inst.constraints().to_vec();
        rows.reverse();
        let reordered =
            BilpInstance::new(inst.objective().to_vec(), rows, inst.kinds().to_vec()).unwrap();
        assert_eq!(
            enumerate_bilp(&inst, DEFAULT_CAP).unwrap(),
            enumerate_bilp(&reordered, DEFAULT_CAP).unwrap()
        );
    }
}
