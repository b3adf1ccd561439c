//! Penalty reduction of bounded-integer linear programs to QUBO / Ising form.
//!
//! The produced QUBO is `H_A + H_B` with
//!
//! ```text
//! H_A = A Σ_j (b_j − Σ_i S_ji x_i)²     (inequalities completed with slack)
//! H_B = B Σ_i c_i x_i                   (always minimized)
//! ```
//!
//! Integer variables and slack registers are binary-expanded with weights
//! `1, 2, 4, …, residual`, so every value of the range is representable and
//! nothing above it is.
//!
//! With integer data and [`choose_weights`], every ground state of the
//! reduced model decodes to a feasible optimum whenever the instance is
//! feasible. Non-integer coefficients are accepted but carry no such
//! guarantee.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{qubo_to_ising, IsingModel, QuboModel, SpinState};

/// Default cap on the number of bits used to expand one integer range.
pub const DEFAULT_MAX_BITS: u32 = 24;

/// Absolute tolerance used when checking constraint satisfaction.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("variable {var}: empty bounds [{lo}, {hi}]")]
    EmptyBounds { var: usize, lo: i64, hi: i64 },
    #[error("constraint {row}: variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange {
        row: usize,
        index: usize,
        num_vars: usize,
    },
    #[error(
        "variable {var} is continuous; only binary and bounded integer variables are supported \
         (discretize it as a bounded integer, which is then binary-expanded)"
    )]
    ContinuousVariable { var: String },
    #[error("{what}: range of {range} needs {bits} bits, more than the limit of {max_bits}")]
    TooManyBits {
        what: String,
        range: i64,
        bits: u32,
        max_bits: u32,
    },
    #[error("constraint {row}: slack range not representable ({reason})")]
    SlackRange { row: usize, reason: String },
    #[error("invalid penalty weights A = {a}, B = {b}: need A >= B > 0")]
    InvalidWeights { a: f64, b: f64 },
    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("variable {var} = {value} outside bounds [{lo}, {hi}]")]
    OutOfBounds {
        var: usize,
        value: i64,
        lo: i64,
        hi: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Eq => "=",
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Integer { lo: i64, hi: i64 },
}

impl VarKind {
    pub fn bounds(self) -> (i64, i64) {
        match self {
            VarKind::Binary => (0, 1),
            VarKind::Integer { lo, hi } => (lo, hi),
        }
    }
}

/// One linear row `Σ coeffs · x  (sense)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[i64]) -> f64 {
        self.coeffs.iter().map(|&(i, s)| s * x[i] as f64).sum()
    }

    /// Amount by which `x` violates the row; zero when satisfied.
    pub fn residual(&self, x: &[i64]) -> f64 {
        let gap = self.activity(x) - self.rhs;
        let raw = match self.sense {
            Sense::Eq => gap.abs(),
            Sense::Le => gap.max(0.0),
            Sense::Ge => (-gap).max(0.0),
        };
        if raw <= FEASIBILITY_TOLERANCE {
            0.0
        } else {
            raw
        }
    }

    fn is_integral(&self) -> bool {
        self.rhs.fract() == 0.0 && self.coeffs.iter().all(|(_, s)| s.fract() == 0.0)
    }
}

/// Minimization problem `min c·x + offset` over bounded integer variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BilpInstance {
    objective: Vec<f64>,
    objective_offset: f64,
    constraints: Vec<Constraint>,
    kinds: Vec<VarKind>,
}

impl BilpInstance {
    pub fn new(
        objective: Vec<f64>,
        constraints: Vec<Constraint>,
        kinds: Vec<VarKind>,
    ) -> Result<Self, ReductionError> {
        let num_vars = kinds.len();
        if objective.len() != num_vars {
            return Err(ReductionError::DimensionMismatch {
                expected: num_vars,
                actual: objective.len(),
            });
        }
        for (i, c) in objective.iter().enumerate() {
            if !c.is_finite() {
                return Err(ReductionError::NonFinite(format!(
                    "objective coefficient {i}"
                )));
            }
        }
        for (var, kind) in kinds.iter().enumerate() {
            if let VarKind::Integer { lo, hi } = *kind {
                if lo > hi {
                    return Err(ReductionError::EmptyBounds { var, lo, hi });
                }
            }
        }
        for (row, con) in constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(ReductionError::NonFinite(format!(
                    "right-hand side of constraint {row}"
                )));
            }
            for &(index, s) in &con.coeffs {
                if index >= num_vars {
                    return Err(ReductionError::IndexOutOfRange {
                        row,
                        index,
                        num_vars,
                    });
                }
                if !s.is_finite() {
                    return Err(ReductionError::NonFinite(format!(
                        "constraint {row}, variable {index}"
                    )));
                }
            }
        }
        Ok(Self {
            objective,
            objective_offset: 0.0,
            constraints,
            kinds,
        })
    }

    /// Builds a maximization problem, normalized to minimization by negating
    /// the objective.
    pub fn maximize(
        objective: Vec<f64>,
        constraints: Vec<Constraint>,
        kinds: Vec<VarKind>,
    ) -> Result<Self, ReductionError> {
        Self::new(
            objective.into_iter().map(|c| -c).collect(),
            constraints,
            kinds,
        )
    }

    pub fn with_objective_offset(mut self, offset: f64) -> Result<Self, ReductionError> {
        if !offset.is_finite() {
            return Err(ReductionError::NonFinite("objective offset".into()));
        }
        self.objective_offset = offset;
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    pub fn bounds(&self, var: usize) -> (i64, i64) {
        self.kinds[var].bounds()
    }

    pub fn check_assignment(&self, x: &[i64]) -> Result<(), ReductionError> {
        if x.len() != self.num_vars() {
            return Err(ReductionError::DimensionMismatch {
                expected: self.num_vars(),
                actual: x.len(),
            });
        }
        for (var, &value) in x.iter().enumerate() {
            let (lo, hi) = self.bounds(var);
            if value < lo || value > hi {
                return Err(ReductionError::OutOfBounds { var, value, lo, hi });
            }
        }
        Ok(())
    }

    /// `c·x + offset`.
    pub fn objective_value(&self, x: &[i64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, &v)| c * v as f64)
            .sum::<f64>()
            + self.objective_offset
    }

    /// Sum of squared residuals over violated rows.
    pub fn violation(&self, x: &[i64]) -> f64 {
        self.constraints.iter().map(|c| c.residual(x).powi(2)).sum()
    }

    pub fn is_feasible(&self, x: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.residual(x) == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyWeights {
    a: f64,
    b: f64,
}

impl PenaltyWeights {
    pub fn new(a: f64, b: f64) -> Result<Self, ReductionError> {
        if !(a.is_finite() && b.is_finite() && b > 0.0 && a >= b) {
            return Err(ReductionError::InvalidWeights { a, b });
        }
        Ok(Self { a, b })
    }

    /// Constraint weight.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Objective weight.
    pub fn b(&self) -> f64 {
        self.b
    }
}

/// `B = 1`, `A = Σ_i |c_i| (hi_i − lo_i) + 1`.
///
/// The objective can move by at most `Σ |c_i| (hi_i − lo_i)` over the box,
/// while any violated integer row costs at least `A`. For binary variables
/// this is `A = Σ |c_i| + 1`.
pub fn choose_weights(instance: &BilpInstance) -> PenaltyWeights {
    let spread: f64 = instance
        .objective
        .iter()
        .zip(&instance.kinds)
        .map(|(c, k)| {
            let (lo, hi) = k.bounds();
            c.abs() * (hi - lo) as f64
        })
        .sum();
    PenaltyWeights {
        a: spread + 1.0,
        b: 1.0,
    }
}

/// Binary-expansion weights `1, 2, 4, …, residual` covering exactly
/// `0..=range`.
pub fn expansion_weights(range: i64) -> Vec<i64> {
    let mut weights = Vec::new();
    let mut covered = 0i64;
    let mut next = 1i64;
    while covered + next <= range {
        weights.push(next);
        covered += next;
        next *= 2;
    }
    if covered < range {
        weights.push(range - covered);
    }
    weights
}

fn checked_expansion(
    range: i64,
    max_bits: u32,
    what: impl FnOnce() -> String,
) -> Result<Vec<i64>, ReductionError> {
    let weights = expansion_weights(range);
    let bits = weights.len() as u32;
    if bits > max_bits {
        return Err(ReductionError::TooManyBits {
            what: what(),
            range,
            bits,
            max_bits,
        });
    }
    Ok(weights)
}

/// Bits chosen so their weights sum to `value`; `None` if not representable.
fn represent(value: i64, weights: &[i64]) -> Option<Vec<bool>> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(b.cmp(&a)));
    let mut rest = value;
    let mut chosen = vec![false; weights.len()];
    for k in order {
        if weights[k] <= rest {
            chosen[k] = true;
            rest -= weights[k];
        }
    }
    (rest == 0).then_some(chosen)
}

/// How one integer quantity is laid out on QUBO bits:
/// `value = base + Σ weight · bit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitEncoding {
    pub base: i64,
    /// `(bit index, weight)` pairs.
    pub bits: Vec<(usize, i64)>,
}

impl BitEncoding {
    fn value(&self, bits: &[u8]) -> i64 {
        self.base
            + self
                .bits
                .iter()
                .map(|&(k, w)| if bits[k] != 0 { w } else { 0 })
                .sum::<i64>()
    }

    fn max_value(&self) -> i64 {
        self.base + self.bits.iter().map(|&(_, w)| w).sum::<i64>()
    }

    fn write(&self, value: i64, out: &mut [u8]) -> bool {
        let weights: Vec<i64> = self.bits.iter().map(|&(_, w)| w).collect();
        match represent(value - self.base, &weights) {
            Some(chosen) => {
                for (&(k, _), on) in self.bits.iter().zip(chosen) {
                    out[k] = u8::from(on);
                }
                true
            }
            None => false,
        }
    }
}

/// Slack register of one inequality row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackEncoding {
    pub row: usize,
    pub encoding: BitEncoding,
    /// +1 for `<=` rows, −1 for `>=` rows.
    sign: f64,
    /// The slack that zeroes the residual is `target − sign · (S x)`.
    target: f64,
}

impl SlackEncoding {
    fn canonical_value(&self, activity: f64) -> i64 {
        let wanted = (self.target - self.sign * activity).round();
        let hi = self.encoding.max_value();
        (wanted as i64).clamp(self.encoding.base, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionOptions {
    pub max_bits: u32,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

/// Reduced model plus everything needed to map spin states back to the
/// original variables.
#[derive(Debug, Clone)]
pub struct ReductionArtifact {
    instance: BilpInstance,
    ising: IsingModel,
    qubo: QuboModel,
    bit_map: Vec<BitEncoding>,
    slack_map: Vec<SlackEncoding>,
    weights: PenaltyWeights,
    constant_shift: f64,
}

/// Decoded assignment with its objective and feasibility.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decoded {
    pub x: Vec<i64>,
    pub objective: f64,
    pub feasible: bool,
    pub violation: f64,
}

impl ReductionArtifact {
    pub fn instance(&self) -> &BilpInstance {
        &self.instance
    }

    pub fn ising(&self) -> &IsingModel {
        &self.ising
    }

    pub fn qubo(&self) -> &QuboModel {
        &self.qubo
    }

    pub fn bit_map(&self) -> &[BitEncoding] {
        &self.bit_map
    }

    pub fn slack_map(&self) -> &[SlackEncoding] {
        &self.slack_map
    }

    pub fn weights(&self) -> PenaltyWeights {
        self.weights
    }

    /// `B ·` the instance's objective offset; the QUBO value of an encoded
    /// assignment is `A · violation + B · c·x + constant_shift`.
    pub fn constant_shift(&self) -> f64 {
        self.constant_shift
    }

    pub fn num_spins(&self) -> usize {
        self.qubo.num_vars()
    }

    pub fn num_slack_bits(&self) -> usize {
        self.slack_map.iter().map(|s| s.encoding.bits.len()).sum()
    }

    /// Spin state for `x`, with every slack register set canonically.
    pub fn encode(&self, x: &[i64]) -> Result<SpinState, ReductionError> {
        self.instance.check_assignment(x)?;
        let mut bits = vec![0u8; self.num_spins()];
        for (enc, &value) in self.bit_map.iter().zip(x) {
            let ok = enc.write(value, &mut bits);
            debug_assert!(ok, "in-bounds values are always representable");
        }
        for slack in &self.slack_map {
            let activity = self.instance.constraints[slack.row].activity(x);
            let value = slack.canonical_value(activity);
            let ok = slack.encoding.write(value, &mut bits);
            debug_assert!(ok, "clamped slack values are always representable");
        }
        Ok(SpinState::from_bits(&bits))
    }

    pub fn decode(&self, state: &SpinState) -> Result<Decoded, ReductionError> {
        if state.len() != self.num_spins() {
            return Err(ReductionError::DimensionMismatch {
                expected: self.num_spins(),
                actual: state.len(),
            });
        }
        let bits = state.to_bits();
        let x: Vec<i64> = self.bit_map.iter().map(|enc| enc.value(&bits)).collect();
        Ok(Decoded {
            objective: self.instance.objective_value(&x),
            feasible: self.instance.is_feasible(&x),
            violation: self.instance.violation(&x),
            x,
        })
    }
}

fn var_encodings(
    instance: &BilpInstance,
    max_bits: u32,
) -> Result<Vec<BitEncoding>, ReductionError> {
    let mut next_bit = 0usize;
    let mut map = Vec::with_capacity(instance.num_vars());
    for (var, kind) in instance.kinds.iter().enumerate() {
        let (lo, hi) = kind.bounds();
        let weights = checked_expansion(hi - lo, max_bits, || format!("variable {var}"))?;
        let bits = weights
            .into_iter()
            .map(|w| {
                next_bit += 1;
                (next_bit - 1, w)
            })
            .collect();
        map.push(BitEncoding { base: lo, bits });
    }
    Ok(map)
}

/// Rewrites every variable as binary bits. The result has one binary variable
/// per expansion bit, in variable order; fixed variables (`lo == hi`) vanish
/// into the objective offset and right-hand sides.
pub fn expand_integers(
    instance: &BilpInstance,
    max_bits: u32,
) -> Result<BilpInstance, ReductionError> {
    let map = var_encodings(instance, max_bits)?;
    let num_bits: usize = map.iter().map(|e| e.bits.len()).sum();

    let mut objective = vec![0.0; num_bits];
    let mut offset = instance.objective_offset;
    for (enc, &c) in map.iter().zip(&instance.objective) {
        offset += c * enc.base as f64;
        for &(k, w) in &enc.bits {
            objective[k] = c * w as f64;
        }
    }

    let constraints = instance
        .constraints
        .iter()
        .map(|con| {
            let mut rhs = con.rhs;
            let mut coeffs = Vec::new();
            for &(i, s) in &con.coeffs {
                rhs -= s * map[i].base as f64;
                coeffs.extend(map[i].bits.iter().map(|&(k, w)| (k, s * w as f64)));
            }
            Constraint {
                coeffs,
                sense: con.sense,
                rhs,
            }
        })
        .collect();

    BilpInstance::new(objective, constraints, vec![VarKind::Binary; num_bits])?
        .with_objective_offset(offset)
}

/// Reduces with default options; `weights` defaults to [`choose_weights`].
pub fn reduce(
    instance: &BilpInstance,
    weights: Option<PenaltyWeights>,
) -> Result<ReductionArtifact, ReductionError> {
    reduce_with(instance, weights, ReductionOptions::default())
}

pub fn reduce_with(
    instance: &BilpInstance,
    weights: Option<PenaltyWeights>,
    options: ReductionOptions,
) -> Result<ReductionArtifact, ReductionError> {
    let weights = match weights {
        Some(w) => PenaltyWeights::new(w.a, w.b)?,
        None => choose_weights(instance),
    };
    let (a, b) = (weights.a, weights.b);
    let bit_map = var_encodings(instance, options.max_bits)?;
    let mut num_bits: usize = bit_map.iter().map(|e| e.bits.len()).sum();

    // Each row in the form Σ coef · bit = target, slack bits included.
    let mut rows: Vec<(BTreeMap<usize, f64>, f64)> = Vec::with_capacity(instance.constraints.len());
    let mut slack_map = Vec::new();
    for (row, con) in instance.constraints.iter().enumerate() {
        let sign = match con.sense {
            Sense::Ge => -1.0,
            Sense::Eq | Sense::Le => 1.0,
        };
        let mut terms = BTreeMap::new();
        let mut base_activity = 0.0;
        for &(i, s) in &con.coeffs {
            base_activity += s * bit_map[i].base as f64;
            for &(k, w) in &bit_map[i].bits {
                *terms.entry(k).or_insert(0.0) += sign * s * w as f64;
            }
        }
        let mut target = sign * (con.rhs - base_activity);

        if con.sense != Sense::Eq {
            if con.is_integral() {
                target = target.floor();
            }
            let min_act: f64 = terms.values().map(|v: &f64| v.min(0.0)).sum();
            let max_act: f64 = terms.values().map(|v: &f64| v.max(0.0)).sum();
            let slack_hi = (target - min_act).floor();
            let slack_lo = (target - max_act).ceil().max(0.0);
            if slack_hi < slack_lo {
                return Err(ReductionError::SlackRange {
                    row,
                    reason: format!("the row cannot be satisfied by any assignment (needs slack in [{slack_lo}, {slack_hi}])"),
                });
            }
            if slack_hi > i64::MAX as f64 / 2.0 {
                return Err(ReductionError::SlackRange {
                    row,
                    reason: format!("slack bound {slack_hi} is too large"),
                });
            }
            let (lo, hi) = (slack_lo as i64, slack_hi as i64);
            let weights = checked_expansion(hi - lo, options.max_bits, || {
                format!("slack of constraint {row}")
            })?;
            let mut bits = Vec::with_capacity(weights.len());
            for w in weights {
                terms.insert(num_bits, w as f64);
                bits.push((num_bits, w));
                num_bits += 1;
            }
            target -= lo as f64;
            slack_map.push(SlackEncoding {
                row,
                encoding: BitEncoding { base: lo, bits },
                sign,
                target: target + lo as f64 + sign * base_activity,
            });
        }
        rows.push((terms, target));
    }

    let mut qubo = QuboModel::new(num_bits);
    let add = |q: &mut QuboModel, i: usize, j: usize, v: f64| -> Result<(), ReductionError> {
        q.add_term(i, j, v)
            .map_err(|_| ReductionError::NonFinite(format!("QUBO term ({i}, {j})")))
    };

    // A (t − Σ a_k z_k)² with z_k² = z_k.
    for (terms, target) in &rows {
        let terms: Vec<(usize, f64)> = terms
            .iter()
            .map(|(&k, &v)| (k, v))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        qubo.add_offset(a * target * target);
        for (idx, &(k, ak)) in terms.iter().enumerate() {
            add(&mut qubo, k, k, a * (ak * ak - 2.0 * target * ak))?;
            for &(l, al) in &terms[idx + 1..] {
                add(&mut qubo, k, l, 2.0 * a * ak * al)?;
            }
        }
    }

    for (enc, &c) in bit_map.iter().zip(&instance.objective) {
        if c == 0.0 {
            continue;
        }
        qubo.add_offset(b * c * enc.base as f64);
        for &(k, w) in &enc.bits {
            add(&mut qubo, k, k, b * c * w as f64)?;
        }
    }
    let constant_shift = b * instance.objective_offset;
    qubo.add_offset(constant_shift);
    if !qubo.offset().is_finite() {
        return Err(ReductionError::NonFinite("QUBO offset".into()));
    }

    let ising = qubo_to_ising(&qubo);
    Ok(ReductionArtifact {
        instance: instance.clone(),
        ising,
        qubo,
        bit_map,
        slack_map,
        weights,
        constant_shift,
    })
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    fn binary(n: usize) -> Vec<VarKind> {
        vec![VarKind::Binary; n]
    }

    #[test]
    fn single_variable_no_constraints() {
        let inst = BilpInstance::new(vec![-1.0], vec![], binary(1)).unwrap();
        let art = reduce(&inst, None).unwrap();
        assert_eq!(art.qubo().terms().count(), 1);
        let (_, ground) = brute_ground(art.ising());
        assert_eq!(ground.len(), 1);
        assert_eq!(art.decode(&ground[0]).unwrap().x, vec![1]);
    }

    #[test]
    fn equality_example_decodes_to_optimum() {
        let inst = BilpInstance::new(
            vec![1.0, 2.0],
            vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0)],
            binary(2),
        )
        .unwrap();
        let art = reduce(&inst, None).unwrap();
        assert_eq!(art.num_spins(), 2);
        // Original instance: feasible points (1,0)->1 and (0,1)->2.
        let (_, ground) = brute_ground(art.ising());
        assert_eq!(ground.len(), 1);
        let d = art.decode(&ground[0]).unwrap();
        assert_eq!(d.x, vec![1, 0]);
        assert_eq!(d.objective, 1.0);
        assert!(d.feasible);
        assert_eq!(d.violation, 0.0);
    }

    #[test]
    fn inequality_gets_one_slack_bit() {
        let inst = BilpInstance::new(
            vec![-1.0, -1.0],
            vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
            binary(2),
        )
        .unwrap();
        let art = reduce(&inst, None).unwrap();
        assert_eq!(art.num_slack_bits(), 1);
        assert_eq!(art.num_spins(), 3);
        let (_, ground) = brute_ground(art.ising());
        let mut xs: Vec<Vec<i64>> = ground.iter().map(|s| art.decode(s).unwrap().x).collect();
        xs.sort();
        assert_eq!(xs, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn weights_rule() {
        let inst = BilpInstance::new(vec![1.0, 2.0], vec![], binary(2)).unwrap();
        let w = choose_weights(&inst);
        assert_eq!((w.a(), w.b()), (4.0, 1.0));
        let zero = BilpInstance::new(vec![0.0; 3], vec![], binary(3)).unwrap();
        let w = choose_weights(&zero);
        assert_eq!((w.a(), w.b()), (1.0, 1.0));
        assert!(PenaltyWeights::new(1.0, 2.0).is_err());
        assert!(PenaltyWeights::new(1.0, 0.0).is_err());
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(expansion_weights(3), vec![1, 2]);
        assert_eq!(expansion_weights(5), vec![1, 2, 2]);
        assert_eq!(expansion_weights(0), Vec::<i64>::new());
        assert_eq!(expansion_weights(1), vec![1]);
        // Image of every bit pattern is exactly 0..=range.
        for range in 0..40i64 {
            let w = expansion_weights(range);
            let mut image: Vec<i64> = (0..1u64 << w.len())
                .map(|m| {
                    w.iter()
                        .enumerate()
                        .filter(|(k, _)| m >> k & 1 == 1)
                        .map(|(_, v)| v)
                        .sum()
                })
                .collect();
            image.sort();
            image.dedup();
            assert_eq!(image, (0..=range).collect::<Vec<_>>(), "range {range}");
        }
    }

    #[test]
    fn expand_integers_examples() {
        let inst = BilpInstance::new(
            vec![1.0, 3.0, -2.0],
            vec![Constraint::new(
                vec![(0, 1.0), (1, 1.0), (2, 2.0)],
                Sense::Le,
                9.0,
            )],
            vec![
                VarKind::Integer { lo: 0, hi: 3 },
                VarKind::Integer { lo: 0, hi: 5 },
                VarKind::Integer { lo: 2, hi: 2 },
            ],
        )
        .unwrap();
        let bin = expand_integers(&inst, DEFAULT_MAX_BITS).unwrap();
        assert_eq!(bin.num_vars(), 5);
        assert_eq!(bin.objective(), &[1.0, 2.0, 3.0, 6.0, 6.0]);
        assert_eq!(bin.objective_offset(), -4.0);
        assert_eq!(bin.constraints()[0].rhs, 5.0);
        assert!(bin.kinds().iter().all(|k| *k == VarKind::Binary));

        let wide = BilpInstance::new(
            vec![1.0],
            vec![],
            vec![VarKind::Integer { lo: 0, hi: 1 << 30 }],
        )
        .unwrap();
        assert!(matches!(
            expand_integers(&wide, DEFAULT_MAX_BITS),
            Err(ReductionError::TooManyBits { .. })
        ));
        assert!(matches!(
            reduce(&wide, None),
            Err(ReductionError::TooManyBits { .. })
        ));
    }

    #[test]
    fn encode_examples() {
        let inst = BilpInstance::new(
            vec![1.0, 1.0],
            vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0)],
            binary(2),
        )
        .unwrap();
        let art = reduce(&inst, None).unwrap();
        assert_eq!(art.encode(&[1, 0]).unwrap().spins(), &[1, -1]);
        // Infeasible but in bounds: encodes, decode flags it.
        let s = art.encode(&[1, 1]).unwrap();
        let d = art.decode(&s).unwrap();
        assert_eq!(d.x, vec![1, 1]);
        assert!(!d.feasible);
        assert!(d.violation > 0.0);
        assert!(matches!(
            art.encode(&[2, 0]),
            Err(ReductionError::OutOfBounds { var: 0, .. })
        ));
        assert!(matches!(
            art.decode(&SpinState::all_up(3)),
            Err(ReductionError::DimensionMismatch { .. })
        ));

        let int =
            BilpInstance::new(vec![1.0], vec![], vec![VarKind::Integer { lo: 0, hi: 5 }]).unwrap();
        let art = reduce(&int, None).unwrap();
        assert_eq!(art.num_spins(), 3);
        for v in 0..=5 {
            assert_eq!(art.decode(&art.encode(&[v]).unwrap()).unwrap().x, vec![v]);
        }
        assert_eq!(art.encode(&[5]).unwrap().spins(), &[1, 1, 1]);
    }

    #[test]
    fn unsatisfiable_inequality_is_reported_with_row() {
        let inst = BilpInstance::new(
            vec![1.0, 1.0],
            vec![
                Constraint::new(vec![(0, 1.0)], Sense::Le, 1.0),
                Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 3.0),
            ],
            binary(2),
        )
        .unwrap();
        let err = reduce(&inst, None).unwrap_err();
        assert!(matches!(err, ReductionError::SlackRange { row: 1, .. }));
        assert!(err.to_string().contains("constraint 1"));
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(
            BilpInstance::new(vec![f64::INFINITY], vec![], binary(1)),
            Err(ReductionError::NonFinite(_))
        ));
        assert!(matches!(
            BilpInstance::new(
                vec![1.0],
                vec![Constraint::new(vec![(3, 1.0)], Sense::Eq, 1.0)],
                binary(1)
            ),
            Err(ReductionError::IndexOutOfRange {
                row: 0,
                index: 3,
                ..
            })
        ));
        assert!(matches!(
            BilpInstance::new(vec![1.0], vec![], vec![VarKind::Integer { lo: 3, hi: 1 }]),
            Err(ReductionError::EmptyBounds { .. })
        ));
        let max = BilpInstance::maximize(vec![2.0, -1.0], vec![], binary(2)).unwrap();
        assert_eq!(max.objective(), &[-2.0, 1.0]);
    }

    #[test]
    fn every_bit_owned_once() {
        for seed in 0..20 {
            let inst = random_feasible_binary(6, 3, seed);
            let art = reduce(&inst, None).unwrap();
            let mut owners = vec![0; art.num_spins()];
            for enc in art
                .bit_map()
                .iter()
                .chain(art.slack_map().iter().map(|s| &s.encoding))
            {
                for &(k, _) in &enc.bits {
                    owners[k] += 1;
                }
            }
            assert!(owners.iter().all(|&c| c == 1), "seed {seed}: {owners:?}");
        }
    }

    #[test]
    fn qubo_value_splits_into_penalty_and_objective() {
        for seed in 0..30 {
            let inst = random_feasible_binary(5, 3, seed);
            let art = reduce(&inst, None).unwrap();
            let w = art.weights();
            for x in all_assignments(&inst) {
                let s = art.encode(&x).unwrap();
                let q = art.qubo().value(&s.to_bits()).unwrap();
                let cx: f64 = inst
                    .objective()
                    .iter()
                    .zip(&x)
                    .map(|(c, &v)| c * v as f64)
                    .sum();
                let expected = w.a() * inst.violation(&x) + w.b() * cx + art.constant_shift();
                assert!(
                    (q - expected).abs() < 1e-9,
                    "seed {seed} x {x:?}: {q} vs {expected}"
                );
                assert_eq!(art.decode(&s).unwrap().x, x);
            }
        }
    }

    #[test]
    fn ground_state_is_feasible_optimum_with_integer_vars() {
        for seed in 0..15 {
            let base = random_feasible_binary(3, 2, 100 + seed);
            let kinds = vec![
                VarKind::Integer { lo: -1, hi: 2 },
                VarKind::Binary,
                VarKind::Integer { lo: 0, hi: 2 },
            ];
            let Ok(inst) = BilpInstance::new(
                base.objective().to_vec(),
                base.constraints().to_vec(),
                kinds,
            ) else {
                continue;
            };
            let Ok(art) = reduce(&inst, None) else {
                continue;
            };
            let feasible: Vec<Vec<i64>> = all_assignments(&inst)
                .into_iter()
                .filter(|x| inst.is_feasible(x))
                .collect();
            if feasible.is_empty() || art.num_spins() > 16 {
                continue;
            }
            let opt = feasible
                .iter()
                .map(|x| inst.objective_value(x))
                .fold(f64::INFINITY, f64::min);
            let (_, ground) = brute_ground(art.ising());
            for s in ground {
                let d = art.decode(&s).unwrap();
                assert!(d.feasible, "seed {seed}");
                assert_eq!(d.objective, opt, "seed {seed}");
            }
        }
    }

    #[test]
    fn infeasible_states_cost_more_than_optimum() {
        for seed in 0..20 {
            let inst = random_feasible_binary(4, 2, 500 + seed);
            let art = reduce(&inst, None).unwrap();
            let (ground_e, _) = brute_ground(art.ising());
            for mask in 0..1u64 << art.num_spins() {
                let s = SpinState::from_mask(art.num_spins(), mask);
                if !art.decode(&s).unwrap().feasible {
                    assert!(art.ising().energy(&s).unwrap() > ground_e, "seed {seed}");
                }
            }
        }
    }
}
