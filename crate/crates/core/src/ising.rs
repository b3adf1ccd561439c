//! Ising and QUBO data model.
//!
//! Energies follow the pair-once convention:
//!
//! ```text
//! H(σ) = −Σ_{i<j} J_ij σ_i σ_j − Σ_i h_i σ_i + offset
//! ```
//!
//! Couplings are stored sparse, keyed by the ordered pair `(min, max)`, so a
//! pair can never be stored twice and the summation order is independent of
//! the order in which couplings were inserted.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsingError {
    #[error("dimension mismatch: model has {expected} entries but state has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("index {index} out of range for {len} spins")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("self-coupling on spin {0} is not allowed")]
    SelfCoupling(usize),
    #[error("coupling pair ({0}, {1}) given more than once")]
    DuplicatePair(usize, usize),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("spin {index} has value {value}; spins must be -1 or +1")]
    InvalidSpin { index: usize, value: i8 },
}

/// Ordered key for an unordered pair.
fn pair_key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<(), IsingError> {
    if i == j {
        return Err(IsingError::SelfCoupling(i));
    }
    for index in [i, j] {
        if index >= n {
            return Err(IsingError::IndexOutOfRange { index, len: n });
        }
    }
    Ok(())
}

fn check_finite(value: f64, what: impl FnOnce() -> String) -> Result<(), IsingError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(IsingError::NonFinite(what()))
    }
}

/// A vector of ±1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinState(Vec<i8>);

impl SpinState {
    pub fn new(spins: Vec<i8>) -> Result<Self, IsingError> {
        if let Some((index, &value)) = spins.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(IsingError::InvalidSpin { index, value });
        }
        Ok(Self(spins))
    }

    pub fn all_up(len: usize) -> Self {
        Self(vec![1; len])
    }

    /// Spin `i` is +1 iff bit `i` of `mask` is set.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        Self(
            (0..len)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    /// Uniformly random spins.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self(
            (0..len)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect(),
        )
    }

    /// Spin image of a 0/1 vector: `σ = 2x − 1`.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect())
    }

    /// Binary image of the spins: `x = (1 + σ) / 2`.
    pub fn to_bits(&self) -> Vec<u8> {
        self.0.iter().map(|&s| u8::from(s > 0)).collect()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, up: bool) {
        self.0[i] = if up { 1 } else { -1 };
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Every spin negated.
    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl TryFrom<Vec<i8>> for SpinState {
    type Error = IsingError;

    fn try_from(spins: Vec<i8>) -> Result<Self, Self::Error> {
        Self::new(spins)
    }
}

impl From<SpinState> for Vec<i8> {
    fn from(state: SpinState) -> Self {
        state.0
    }
}

/// Sparse Ising model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    num_spins: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    offset: f64,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl IsingModel {
    /// Builds a model from an explicit coupling list. Each unordered pair may
    /// appear at most once; use [`IsingBuilder`] to accumulate terms instead.
    pub fn new(
        num_spins: usize,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        fields: Vec<f64>,
        offset: f64,
    ) -> Result<Self, IsingError> {
        if fields.len() != num_spins {
            return Err(IsingError::DimensionMismatch {
                expected: num_spins,
                actual: fields.len(),
            });
        }
        let mut map = BTreeMap::new();
        for (i, j, value) in couplings {
            check_pair(i, j, num_spins)?;
            check_finite(value, || format!("coupling ({i}, {j})"))?;
            if map.insert(pair_key(i, j), value).is_some() {
                let (a, b) = pair_key(i, j);
                return Err(IsingError::DuplicatePair(a, b));
            }
        }
        for (i, &h) in fields.iter().enumerate() {
            check_finite(h, || format!("field {i}"))?;
        }
        check_finite(offset, || "offset".to_string())?;
        Ok(Self::from_parts(num_spins, map, fields, offset))
    }

    fn from_parts(
        num_spins: usize,
        couplings: BTreeMap<(usize, usize), f64>,
        fields: Vec<f64>,
        offset: f64,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); num_spins];
        for (&(i, j), &value) in &couplings {
            adjacency[i].push((j, value));
            adjacency[j].push((i, value));
        }
        Self {
            num_spins,
            couplings,
            fields,
            offset,
            adjacency,
        }
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    /// Couplings in ascending `(i, j)` order with `i < j`.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn num_couplings(&self) -> usize {
        self.couplings.len()
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&pair_key(i, j)).copied().unwrap_or(0.0)
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Neighbours of spin `i` with their coupling, sorted by neighbour index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Dense symmetric coupling matrix (zero diagonal).
    pub fn coupling_matrix(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.num_spins]; self.num_spins];
        for (i, j, v) in self.couplings() {
            dense[i][j] = v;
            dense[j][i] = v;
        }
        dense
    }

    /// Largest absolute coupling or field; zero for an empty model.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.couplings
            .values()
            .chain(self.fields.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    fn check_state(&self, state: &SpinState) -> Result<(), IsingError> {
        if state.len() != self.num_spins {
            return Err(IsingError::DimensionMismatch {
                expected: self.num_spins,
                actual: state.len(),
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<(), IsingError> {
        if i >= self.num_spins {
            return Err(IsingError::IndexOutOfRange {
                index: i,
                len: self.num_spins,
            });
        }
        Ok(())
    }

    pub fn energy(&self, state: &SpinState) -> Result<f64, IsingError> {
        self.check_state(state)?;
        Ok(self.energy_of(state.spins()))
    }

    /// Energy of a raw spin slice; the caller guarantees the length.
    pub(crate) fn energy_of(&self, spins: &[i8]) -> f64 {
        let pair: f64 = self
            .couplings
            .iter()
            .map(|(&(i, j), &v)| v * f64::from(spins[i] * spins[j]))
            .sum();
        let field: f64 = self
            .fields
            .iter()
            .zip(spins)
            .map(|(h, &s)| h * f64::from(s))
            .sum();
        -pair - field + self.offset
    }

    /// `I_i = Σ_j J_ij σ_j + h_i`, the negative energy gradient at spin `i`.
    pub fn local_field(&self, state: &SpinState, i: usize) -> Result<f64, IsingError> {
        self.check_state(state)?;
        self.check_index(i)?;
        Ok(self.local_field_of(state.spins(), i))
    }

    pub(crate) fn local_field_of(&self, spins: &[i8], i: usize) -> f64 {
        self.adjacency[i]
            .iter()
            .map(|&(j, v)| v * f64::from(spins[j]))
            .sum::<f64>()
            + self.fields[i]
    }

    /// Energy change caused by flipping spin `i`: `2 σ_i I_i`.
    pub fn flip_delta(&self, state: &SpinState, i: usize) -> Result<f64, IsingError> {
        self.check_state(state)?;
        self.check_index(i)?;
        Ok(self.flip_delta_of(state.spins(), i))
    }

    pub(crate) fn flip_delta_of(&self, spins: &[i8], i: usize) -> f64 {
        2.0 * f64::from(spins[i]) * self.local_field_of(spins, i)
    }
}

/// Accumulating builder: repeated pairs and fields are summed.
#[derive(Debug, Clone, Default)]
pub struct IsingBuilder {
    num_spins: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    offset: f64,
}

impl IsingBuilder {
    pub fn new(num_spins: usize) -> Self {
        Self {
            num_spins,
            couplings: BTreeMap::new(),
            fields: vec![0.0; num_spins],
            offset: 0.0,
        }
    }

    pub fn add_coupling(
        &mut self,
        i: usize,
        j: usize,
        value: f64,
    ) -> Result<&mut Self, IsingError> {
        check_pair(i, j, self.num_spins)?;
        check_finite(value, || format!("coupling ({i}, {j})"))?;
        *self.couplings.entry(pair_key(i, j)).or_insert(0.0) += value;
        Ok(self)
    }

    pub fn add_field(&mut self, i: usize, value: f64) -> Result<&mut Self, IsingError> {
        if i >= self.num_spins {
            return Err(IsingError::IndexOutOfRange {
                index: i,
                len: self.num_spins,
            });
        }
        check_finite(value, || format!("field {i}"))?;
        self.fields[i] += value;
        Ok(self)
    }

    pub fn add_offset(&mut self, value: f64) -> &mut Self {
        self.offset += value;
        self
    }

    /// Finalizes the model, dropping couplings that summed to exactly zero.
    pub fn build(mut self) -> Result<IsingModel, IsingError> {
        self.couplings.retain(|_, v| *v != 0.0);
        for (&(i, j), &v) in &self.couplings {
            check_finite(v, || format!("coupling ({i}, {j})"))?;
        }
        for (i, &h) in self.fields.iter().enumerate() {
            check_finite(h, || format!("field {i}"))?;
        }
        check_finite(self.offset, || "offset".to_string())?;
        Ok(IsingModel::from_parts(
            self.num_spins,
            self.couplings,
            self.fields,
            self.offset,
        ))
    }
}

/// QUBO objective `Σ_{i≤j} Q_ij x_i x_j + offset` over binary `x`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboModel {
    num_vars: usize,
    terms: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboModel {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
            offset: 0.0,
        }
    }

    /// Adds `value · x_i x_j`; `(i, j)` and `(j, i)` address the same term.
    pub fn add_term(&mut self, i: usize, j: usize, value: f64) -> Result<(), IsingError> {
        for index in [i, j] {
            if index >= self.num_vars {
                return Err(IsingError::IndexOutOfRange {
                    index,
                    len: self.num_vars,
                });
            }
        }
        check_finite(value, || format!("QUBO term ({i}, {j})"))?;
        *self.terms.entry(pair_key(i, j)).or_insert(0.0) += value;
        Ok(())
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn term(&self, i: usize, j: usize) -> f64 {
        self.terms.get(&pair_key(i, j)).copied().unwrap_or(0.0)
    }

    pub fn value(&self, x: &[u8]) -> Result<f64, IsingError> {
        if x.len() != self.num_vars {
            return Err(IsingError::DimensionMismatch {
                expected: self.num_vars,
                actual: x.len(),
            });
        }
        let sum: f64 = self
            .terms
            .iter()
            .filter(|(&(i, j), _)| x[i] != 0 && x[j] != 0)
            .map(|(_, &v)| v)
            .sum();
        Ok(sum + self.offset)
    }
}

/// Converts a QUBO into the Ising model with equal objective under
/// `x_i = (1 + σ_i) / 2`.
pub fn qubo_to_ising(qubo: &QuboModel) -> IsingModel {
    let mut builder = IsingBuilder::new(qubo.num_vars);
    builder.add_offset(qubo.offset);
    // Indices were range-checked on insertion, so the builder cannot fail.
    for (i, j, q) in qubo.terms() {
        if i == j {
            // q x = q/2 + (q/2) σ
            builder.add_field(i, -q / 2.0).expect("checked index");
            builder.add_offset(q / 2.0);
        } else {
            // q x_i x_j = q/4 (1 + σ_i + σ_j + σ_i σ_j)
            builder.add_coupling(i, j, -q / 4.0).expect("checked index");
            builder.add_field(i, -q / 4.0).expect("checked index");
            builder.add_field(j, -q / 4.0).expect("checked index");
            builder.add_offset(q / 4.0);
        }
    }
    builder
        .build()
        .expect("finite QUBO terms give finite Ising terms")
}

/// Planar-rotor (XY) model; state is an angle per rotor. The constant
/// offset is zero unless set, and lets an embedded Ising model keep its energy.
#[derive(Debug, Clone, PartialEq)]
pub struct XyModel {
    num_rotors: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    offset: f64,
}

impl XyModel {
    pub fn new(
        num_rotors: usize,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        fields: Vec<f64>,
    ) -> Result<Self, IsingError> {
        if fields.len() != num_rotors {
            return Err(IsingError::DimensionMismatch {
                expected: num_rotors,
                actual: fields.len(),
            });
        }
        let mut map = BTreeMap::new();
        for (i, j, value) in couplings {
            check_pair(i, j, num_rotors)?;
            check_finite(value, || format!("coupling ({i}, {j})"))?;
            if map.insert(pair_key(i, j), value).is_some() {
                let (a, b) = pair_key(i, j);
                return Err(IsingError::DuplicatePair(a, b));
            }
        }
        for (i, &h) in fields.iter().enumerate() {
            check_finite(h, || format!("field {i}"))?;
        }
        Ok(Self {
            num_rotors,
            couplings: map,
            fields,
            offset: 0.0,
        })
    }

    pub fn with_offset(mut self, offset: f64) -> Result<Self, IsingError> {
        check_finite(offset, || "offset".to_string())?;
        self.offset = offset;
        Ok(self)
    }

    /// XY model with the same couplings, fields and offset as an Ising model.
    pub fn from_ising(model: &IsingModel) -> Self {
        Self {
            num_rotors: model.num_spins,
            couplings: model.couplings.clone(),
            fields: model.fields.clone(),
            offset: model.offset,
        }
    }

    pub fn num_rotors(&self) -> usize {
        self.num_rotors
    }

    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// `−Σ_{i<j} J_ij cos(θ_i − θ_j) − Σ_i h_i cos θ_i + offset`.
pub fn xy_energy(model: &XyModel, angles: &[f64]) -> Result<f64, IsingError> {
    if angles.len() != model.num_rotors {
        return Err(IsingError::DimensionMismatch {
            expected: model.num_rotors,
            actual: angles.len(),
        });
    }
    let pair: f64 = model
        .couplings
        .iter()
        .map(|(&(i, j), &v)| v * (angles[i] - angles[j]).cos())
        .sum();
    let field: f64 = model
        .fields
        .iter()
        .zip(angles)
        .map(|(h, t)| h * t.cos())
        .sum();
    Ok(model.offset - pair - field)
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn pair_model() -> IsingModel {
        IsingModel::new(2, [(0, 1, 1.0)], vec![0.0, 0.0], 0.0).unwrap()
    }

    fn state(spins: &[i8]) -> SpinState {
        SpinState::new(spins.to_vec()).unwrap()
    }

    #[test]
    fn empty_model_has_zero_energy() {
        let model = IsingModel::new(3, [], vec![0.0; 3], 0.0).unwrap();
        for mask in 0..8 {
            assert_eq!(model.energy(&SpinState::from_mask(3, mask)).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_pair_counted_once() {
        assert_eq!(pair_model().energy(&state(&[1, 1])).unwrap(), -1.0);
        assert_eq!(pair_model().energy(&state(&[1, -1])).unwrap(), 1.0);
    }

    #[test]
    fn energy_matches_naive_double_loop() {
        let model = random_model(4, 1.0, 42);
        let dense = model.coupling_matrix();
        for mask in 0..16 {
            let s = SpinState::from_mask(4, mask);
            let expected = naive_energy(&dense, model.fields(), model.offset(), s.spins());
            let got = model.energy(&s).unwrap();
            assert!(
                (got - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn energy_rejects_wrong_length() {
        let err = pair_model().energy(&state(&[1, 1, 1])).unwrap_err();
        assert_eq!(
            err,
            IsingError::DimensionMismatch {
                expected: 2,
                actual: 3
            }
        );
        assert!(err.to_string().contains('2') && err.to_string().contains('3'));
    }

    #[test]
    fn local_field_examples() {
        assert_eq!(pair_model().local_field(&state(&[1, 1]), 0).unwrap(), 1.0);
        let free = IsingModel::new(3, [], vec![0.5, -2.0, 3.0], 0.0).unwrap();
        for mask in 0..8 {
            let s = SpinState::from_mask(3, mask);
            for i in 0..3 {
                assert_eq!(free.local_field(&s, i).unwrap(), free.fields()[i]);
            }
        }
        assert!(matches!(
            pair_model().local_field(&state(&[1, 1]), 2),
            Err(IsingError::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn local_field_is_two_point_energy_difference() {
        let model = random_model(6, 0.8, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let s = SpinState::random(6, &mut rng);
            for i in 0..6 {
                let mut down = s.clone();
                down.set(i, false);
                let mut up = s.clone();
                up.set(i, true);
                let oracle = (model.energy(&down).unwrap() - model.energy(&up).unwrap()) / 2.0;
                assert!((model.local_field(&s, i).unwrap() - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flip_delta_examples() {
        assert_eq!(pair_model().flip_delta(&state(&[1, 1]), 0).unwrap(), 2.0);
        let model = random_model(8, 0.6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = SpinState::random(8, &mut rng);
        let base = model.energy(&s).unwrap();
        for i in 0..8 {
            let mut flipped = s.clone();
            flipped.flip(i);
            let oracle = model.energy(&flipped).unwrap() - base;
            let delta = model.flip_delta(&s, i).unwrap();
            assert!((delta - oracle).abs() < 1e-12);
            let back = model.flip_delta(&flipped, i).unwrap();
            assert!((delta + back).abs() < 1e-12);
        }
    }

    #[test]
    fn construction_rejects_bad_couplings() {
        assert_eq!(
            IsingModel::new(2, [(1, 1, 1.0)], vec![0.0; 2], 0.0),
            Err(IsingError::SelfCoupling(1))
        );
        assert_eq!(
            IsingModel::new(3, [(0, 1, 1.0), (1, 0, 2.0)], vec![0.0; 3], 0.0),
            Err(IsingError::DuplicatePair(0, 1))
        );
        assert!(matches!(
            IsingModel::new(2, [(0, 5, 1.0)], vec![0.0; 2], 0.0),
            Err(IsingError::IndexOutOfRange { index: 5, .. })
        ));
        assert!(matches!(
            IsingModel::new(2, [(0, 1, f64::NAN)], vec![0.0; 2], 0.0),
            Err(IsingError::NonFinite(_))
        ));
        assert!(SpinState::new(vec![1, 0]).is_err());
    }

    #[test]
    fn builder_accumulates_repeated_pairs() {
        let mut b = IsingBuilder::new(3);
        b.add_coupling(0, 1, 1.0).unwrap();
        b.add_coupling(1, 0, 0.5).unwrap();
        b.add_coupling(1, 2, 1.0).unwrap();
        b.add_coupling(2, 1, -1.0).unwrap();
        b.add_field(2, 0.25).unwrap();
        let model = b.build().unwrap();
        assert_eq!(model.coupling(0, 1), 1.5);
        assert_eq!(model.num_couplings(), 1);
        assert_eq!(model.fields(), &[0.0, 0.0, 0.25]);
    }

    #[test]
    fn single_linear_qubo_term() {
        let mut q = QuboModel::new(1);
        q.add_term(0, 0, 1.0).unwrap();
        let ising = qubo_to_ising(&q);
        assert_eq!(ising.fields(), &[-0.5]);
        assert_eq!(ising.offset(), 0.5);
        for x in [0u8, 1] {
            let s = SpinState::from_bits(&[x]);
            assert_eq!(ising.energy(&s).unwrap(), q.value(&[x]).unwrap());
        }
    }

    #[test]
    fn zero_qubo_maps_to_zero_ising() {
        let ising = qubo_to_ising(&QuboModel::new(4));
        assert_eq!(ising.num_couplings(), 0);
        assert_eq!(ising.fields(), &[0.0; 4]);
        assert_eq!(ising.offset(), 0.0);
    }

    fn random_qubo(n: usize, seed: u64) -> QuboModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = QuboModel::new(n);
        for i in 0..n {
            for j in i..n {
                if rng.random::<f64>() < 0.7 {
                    q.add_term(i, j, rng.random_range(-3.0..3.0)).unwrap();
                }
            }
        }
        q.add_offset(rng.random_range(-1.0..1.0));
        q
    }

    #[test]
    fn qubo_to_ising_exhaustive_five_vars() {
        let q = random_qubo(5, 11);
        let ising = qubo_to_ising(&q);
        for mask in 0u64..32 {
            let bits: Vec<u8> = (0..5).map(|i| (mask >> i & 1) as u8).collect();
            let s = SpinState::from_bits(&bits);
            assert!((ising.energy(&s).unwrap() - q.value(&bits).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn xy_energy_examples() {
        let model = XyModel::new(3, [(0, 1, 0.7), (1, 2, -0.2)], vec![0.0; 3]).unwrap();
        assert!((xy_energy(&model, &[0.0; 3]).unwrap() - (-0.5)).abs() < 1e-15);
        assert!(matches!(
            xy_energy(&model, &[0.0; 2]),
            Err(IsingError::DimensionMismatch {
                expected: 3,
                actual: 2
            })
        ));

        let base = random_model(4, 1.0, 5);
        let ising = IsingModel::new(4, base.couplings(), base.fields().to_vec(), 1.25).unwrap();
        let xy = XyModel::from_ising(&ising);
        let dense = ising.coupling_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let angles: Vec<f64> = (0..4).map(|_| rng.random_range(-PI..PI)).collect();
            let mut naive = 1.25;
            for i in 0..4 {
                for j in i + 1..4 {
                    naive -= dense[i][j] * (angles[i] - angles[j]).cos();
                }
                naive -= ising.fields()[i] * angles[i].cos();
            }
            assert!((xy_energy(&xy, &angles).unwrap() - naive).abs() < 1e-12);
        }
        for mask in 0..16 {
            let s = SpinState::from_mask(4, mask);
            let angles: Vec<f64> = s
                .spins()
                .iter()
                .map(|&v| if v > 0 { 0.0 } else { PI })
                .collect();
            let diff = xy_energy(&xy, &angles).unwrap() - ising.energy(&s).unwrap();
            assert!(diff.abs() < 1e-12);
        }
    }

    fn model_strategy() -> impl Strategy<Value = (IsingModel, SpinState, usize)> {
        (1usize..=12).prop_flat_map(|n| {
            (
                proptest::collection::vec((0..n, 0..n, -2.0f64..2.0), 0..30),
                proptest::collection::vec(-2.0f64..2.0, n),
                proptest::collection::vec(prop_oneof![Just(-1i8), Just(1i8)], n),
                0..n,
            )
                .prop_map(move |(pairs, fields, spins, i)| {
                    let mut b = IsingBuilder::new(n);
                    for (a, c, v) in pairs {
                        if a != c {
                            b.add_coupling(a, c, v).unwrap();
                        }
                    }
                    for (k, h) in fields.into_iter().enumerate() {
                        b.add_field(k, h).unwrap();
                    }
                    (b.build().unwrap(), SpinState::new(spins).unwrap(), i)
                })
        })
    }

    proptest! {
        #[test]
        fn flip_delta_is_twice_spin_times_field((model, s, i) in model_strategy()) {
            let delta = model.flip_delta(&s, i).unwrap();
            let field = model.local_field(&s, i).unwrap();
            prop_assert!((delta - 2.0 * s.get(i) as f64 * field).abs() < 1e-9);
        }

        #[test]
        fn zero_field_energy_is_flip_symmetric((model, s, _i) in model_strategy()) {
            let couplings: Vec<_> = model.couplings().collect();
            let sym = IsingModel::new(model.num_spins(), couplings, vec![0.0; model.num_spins()], 1.5).unwrap();
            let a = sym.energy(&s).unwrap();
            let b = sym.energy(&s.negated()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn energy_independent_of_insertion_order((model, s, _i) in model_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut couplings: Vec<_> = model.couplings().collect();
            couplings.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let shuffled = IsingModel::new(model.num_spins(), couplings, model.fields().to_vec(), 0.0).unwrap();
            prop_assert_eq!(shuffled.energy(&s).unwrap(), model.energy(&s).unwrap());
        }
    }
}
