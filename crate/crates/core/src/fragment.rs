//! GPT fragments of prepare-transform-measure scenarios and their data tables.
//!
//! States are column vectors, effects are covectors in the same chart and
//! pairing is the plain dot product, so `p(k|s,t) = e_k · (T_t ω_s)`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RationalMatrix, RationalVector};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledVector {
    pub id: String,
    pub vector: RationalVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    pub id: String,
    pub matrix: RationalMatrix,
}

impl LabeledVector {
    pub fn new(id: impl Into<String>, vector: RationalVector) -> Self {
        LabeledVector { id: id.into(), vector }
    }
}

impl LabeledMatrix {
    pub fn new(id: impl Into<String>, matrix: RationalMatrix) -> Self {
        LabeledMatrix { id: id.into(), matrix }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GptFragment {
    pub dim: usize,
    pub states: Vec<LabeledVector>,
    pub effects: Vec<LabeledVector>,
    pub unit_effect: RationalVector,
    pub transformations: Vec<LabeledMatrix>,
    pub measurements: Vec<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    Normalization,
    EffectRange,
    MeasurementSum,
    EffectCoverage,
    ProbabilityRange,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::Normalization => "state is not normalized by the unit effect",
            Invariant::EffectRange => "effect evaluates outside [0,1] on a state",
            Invariant::MeasurementSum => "measurement does not sum to unit",
            Invariant::EffectCoverage => "effect belongs to no measurement",
            Invariant::ProbabilityRange => "probability e∘T∘ω outside [0,1]",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub ids: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Transformations with `u∘T ≠ u`. Reported, never a failure.
    pub not_discard_preserving: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, invariant: Invariant) -> bool {
        self.violations.iter().any(|v| v.invariant == invariant)
    }
}

fn check_unique<'a>(kind: &str, ids: impl Iterator<Item = &'a String>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Structure(format!("duplicate {kind} id {id:?}")));
        }
    }
    Ok(())
}

fn in_unit_interval(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

impl GptFragment {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_ids(&self) -> Vec<String> {
        self.states.iter().map(|s| s.id.clone()).collect()
    }

    pub fn effect_ids(&self) -> Vec<String> {
        self.effects.iter().map(|e| e.id.clone()).collect()
    }

    pub fn transformation_ids(&self) -> Vec<String> {
        self.transformations.iter().map(|t| t.id.clone()).collect()
    }

    pub fn effect_index(&self, id: &str) -> Option<usize> {
        self.effects.iter().position(|e| e.id == id)
    }

    /// Measurements as lists of effect positions.
    pub fn measurement_indices(&self) -> Result<Vec<Vec<usize>>> {
        self.measurements
            .iter()
            .map(|m| {
                m.iter()
                    .map(|id| {
                        self.effect_index(id)
                            .ok_or_else(|| Error::Structure(format!("measurement references unknown effect {id:?}")))
                    })
                    .collect()
            })
            .collect()
    }

    /// Dimension and id consistency. Failures here are errors, not report entries.
    pub fn check_structure(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Structure("dimension must be positive".into()));
        }
        let dim_err = |what: &str, id: &str| Error::Dimension(format!("{what} {id:?} does not have dimension {d}"));
        for s in &self.states {
            if s.vector.dim() != d {
                return Err(dim_err("state", &s.id));
            }
        }
        for e in &self.effects {
            if e.vector.dim() != d {
                return Err(dim_err("effect", &e.id));
            }
        }
        if self.unit_effect.dim() != d {
            return Err(dim_err("unit effect", "u"));
        }
        for t in &self.transformations {
            if t.matrix.rows() != d || t.matrix.cols() != d {
                return Err(dim_err("transformation", &t.id));
            }
        }
        check_unique("state", self.states.iter().map(|s| &s.id))?;
        check_unique("effect", self.effects.iter().map(|e| &e.id))?;
        check_unique("transformation", self.transformations.iter().map(|t| &t.id))?;
        if self.states.is_empty() || self.effects.is_empty() || self.transformations.is_empty() {
            return Err(Error::Structure(
                "a scenario needs at least one state, effect and transformation".into(),
            ));
        }
        for m in self.measurement_indices()? {
            let unique: HashSet<_> = m.iter().collect();
            if unique.len() != m.len() {
                return Err(Error::Structure("measurement lists an effect twice".into()));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        self.check_structure()?;
        let mut report = ValidationReport::default();
        let u = &self.unit_effect;

        for s in &self.states {
            let norm = u.dot(&s.vector);
            if !norm.is_one() {
                report.violations.push(Violation {
                    invariant: Invariant::Normalization,
                    ids: vec![s.id.clone()],
                    detail: format!("u∘ω = {norm}"),
                });
            }
        }
        for e in &self.effects {
            for s in &self.states {
                let p = e.vector.dot(&s.vector);
                if !in_unit_interval(&p) {
                    report.violations.push(Violation {
                        invariant: Invariant::EffectRange,
                        ids: vec![e.id.clone(), s.id.clone()],
                        detail: format!("e∘ω = {p}"),
                    });
                }
            }
        }
        let measurements = self.measurement_indices()?;
        for (m, ids) in measurements.iter().zip(&self.measurements) {
            let mut sum = RationalVector::zeros(self.dim);
            for &k in m {
                sum = sum.add(&self.effects[k].vector);
            }
            if &sum != u {
                report.violations.push(Violation {
                    invariant: Invariant::MeasurementSum,
                    ids: ids.clone(),
                    detail: "measurement does not sum to unit".into(),
                });
            }
        }
        let covered: HashSet<usize> = measurements.iter().flatten().copied().collect();
        for (k, e) in self.effects.iter().enumerate() {
            if !covered.contains(&k) {
                report.violations.push(Violation {
                    invariant: Invariant::EffectCoverage,
                    ids: vec![e.id.clone()],
                    detail: "effect belongs to no measurement".into(),
                });
            }
        }
        for t in &self.transformations {
            let images: Vec<RationalVector> = self
                .states
                .iter()
                .map(|s| t.matrix.mul_vec(&s.vector))
                .collect::<Result<_>>()?;
            for e in &self.effects {
                for (s, img) in self.states.iter().zip(&images) {
                    let p = e.vector.dot(img);
                    if !in_unit_interval(&p) {
                        report.violations.push(Violation {
                            invariant: Invariant::ProbabilityRange,
                            ids: vec![e.id.clone(), t.id.clone(), s.id.clone()],
                            detail: format!("e∘T∘ω = {p}"),
                        });
                    }
                }
            }
            if &t.matrix.transpose().mul_vec(u)? != u {
                report.not_discard_preserving.push(t.id.clone());
            }
        }
        Ok(report)
    }

    /// Exact predicted table `p(k|s,t) = e_k∘T_t∘ω_s`, in (k, s, t) declaration order.
    pub fn predict(&self) -> Result<DataTable> {
        self.check_structure()?;
        let mut images = Vec::with_capacity(self.states.len() * self.transformations.len());
        for s in &self.states {
            for t in &self.transformations {
                images.push(t.matrix.mul_vec(&s.vector)?);
            }
        }
        let nt = self.transformations.len();
        let mut entries = Vec::new();
        for e in &self.effects {
            for (si, s) in self.states.iter().enumerate() {
                for (ti, t) in self.transformations.iter().enumerate() {
                    entries.push(DataEntry {
                        k: e.id.clone(),
                        s: s.id.clone(),
                        t: t.id.clone(),
                        p: e.vector.dot(&images[si * nt + ti]),
                    });
                }
            }
        }
        DataTable::new(entries)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DataKey {
    pub k: String,
    pub s: String,
    pub t: String,
}

impl DataKey {
    pub fn new(k: impl Into<String>, s: impl Into<String>, t: impl Into<String>) -> Self {
        DataKey {
            k: k.into(),
            s: s.into(),
            t: t.into(),
        }
    }
}

impl fmt::Display for DataKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p({}|{},{})", self.k, self.s, self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataEntry {
    pub k: String,
    pub s: String,
    pub t: String,
    pub p: Rational,
}

impl DataEntry {
    pub fn key(&self) -> DataKey {
        DataKey::new(&self.k, &self.s, &self.t)
    }
}

/// Table of operational probabilities `p(k|s,t)` keyed by effect, state and
/// transformation ids. Entry order is preserved as given.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct DataTable {
    entries: Vec<DataEntry>,
    index: HashMap<DataKey, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    entries: Vec<DataEntry>,
}

impl TryFrom<RawTable> for DataTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        DataTable::new(raw.entries)
    }
}

impl From<DataTable> for RawTable {
    fn from(t: DataTable) -> Self {
        RawTable { entries: t.entries }
    }
}

impl PartialEq for DataTable {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for DataTable {}

impl DataTable {
    pub fn new(entries: Vec<DataEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.key(), i).is_some() {
                return Err(Error::IndexMismatch(format!("duplicate data entry {}", e.key())));
            }
        }
        Ok(DataTable { entries, index })
    }

    /// Every (k, s, t) of the fragment set to `value`.
    pub fn constant(f: &GptFragment, value: &Rational) -> Result<Self> {
        let mut entries = Vec::new();
        for e in &f.effects {
            for s in &f.states {
                for t in &f.transformations {
                    entries.push(DataEntry {
                        k: e.id.clone(),
                        s: s.id.clone(),
                        t: t.id.clone(),
                        p: value.clone(),
                    });
                }
            }
        }
        Self::new(entries)
    }

    /// The table that ignores the preparation and transformation entirely:
    /// each effect gets `1/|M|` for the measurement `M` containing it.
    pub fn uniform(f: &GptFragment) -> Result<Self> {
        let mut weight: HashMap<usize, Rational> = HashMap::new();
        for m in f.measurement_indices()? {
            let w = Rational::new(1, m.len() as i64);
            for k in m {
                if weight.get(&k).is_some_and(|old| *old != w) {
                    return Err(Error::Precondition(format!(
                        "effect {:?} lies in measurements of different sizes",
                        f.effects[k].id
                    )));
                }
                weight.insert(k, w.clone());
            }
        }
        let mut entries = Vec::new();
        for (ki, e) in f.effects.iter().enumerate() {
            let p = weight
                .get(&ki)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("effect {:?} is in no measurement", e.id)))?;
            for s in &f.states {
                for t in &f.transformations {
                    entries.push(DataEntry {
                        k: e.id.clone(),
                        s: s.id.clone(),
                        t: t.id.clone(),
                        p: p.clone(),
                    });
                }
            }
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[DataEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: &str, s: &str, t: &str) -> Option<&Rational> {
        self.get_key(&DataKey::new(k, s, t))
    }

    pub fn get_key(&self, key: &DataKey) -> Option<&Rational> {
        self.index.get(key).map(|&i| &self.entries[i].p)
    }

    pub fn require(&self, key: &DataKey) -> Result<&Rational> {
        self.get_key(key).ok_or_else(|| Error::MissingKey {
            k: key.k.clone(),
            s: key.s.clone(),
            t: key.t.clone(),
        })
    }

    pub fn set(&mut self, key: &DataKey, p: Rational) -> Result<()> {
        let i = *self.index.get(key).ok_or_else(|| Error::MissingKey {
            k: key.k.clone(),
            s: key.s.clone(),
            t: key.t.clone(),
        })?;
        self.entries[i].p = p;
        Ok(())
    }

    /// `(1 - r)·self + r·other`, entry by entry over `self`'s keys.
    pub fn mix(&self, other: &DataTable, r: &Rational) -> Result<DataTable> {
        let keep = Rational::one() - r;
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let q = other.require(&e.key())?;
                Ok(DataEntry {
                    p: &keep * &e.p + r * q,
                    ..e.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DataTable::new(entries)
    }

    /// Violations of the table invariants relative to `f`: missing keys,
    /// entries outside [0,1], and measurement rows not summing to one.
    pub fn check(&self, f: &GptFragment) -> Result<Vec<String>> {
        let mut problems = Vec::new();
        for e in &self.entries {
            if !in_unit_interval(&e.p) {
                problems.push(format!("{} = {} outside [0,1]", e.key(), e.p));
            }
        }
        let measurements = f.measurement_indices()?;
        for s in &f.states {
            for t in &f.transformations {
                for m in &measurements {
                    let mut sum = Rational::zero();
                    for &k in m {
                        match self.get(&f.effects[k].id, &s.id, &t.id) {
                            Some(p) => sum += p,
                            None => {
                                problems.push(format!("missing {}", DataKey::new(&f.effects[k].id, &s.id, &t.id)));
                            }
                        }
                    }
                    if !sum.is_one() {
                        problems.push(format!("measurement row (s={}, t={}) sums to {sum}", s.id, t.id));
                    }
                }
            }
        }
        Ok(problems)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Single-qubit stabilizer fragment in the Pauli basis `(1, X, Y, Z)`.
///
/// States are Bloch vectors `(1, x, y, z)` of the six Pauli eigenstates in
/// the order `+, -, +y, -y, 0, 1`; effects are the matching projectors,
/// i.e. the same vectors halved, paired against states by dot product.
/// Transformations are the Pauli-transfer matrices of `I, Z, S, S^-1`.
pub fn stabilizer_qubit_fragment() -> GptFragment {
    let bloch: [(&str, [i64; 4]); 6] = [
        ("+", [1, 1, 0, 0]),
        ("-", [1, -1, 0, 0]),
        ("+y", [1, 0, 1, 0]),
        ("-y", [1, 0, -1, 0]),
        ("0", [1, 0, 0, 1]),
        ("1", [1, 0, 0, -1]),
    ];
    let half = Rational::new(1, 2);
    let states = bloch
        .iter()
        .map(|(id, v)| LabeledVector::new(*id, RationalVector::from_ints(v)))
        .collect();
    let effects = bloch
        .iter()
        .map(|(id, v)| LabeledVector::new(*id, RationalVector::from_ints(v).scale(&half)))
        .collect();
    let s_gate = RationalMatrix::from_int_rows(&[&[1, 0, 0, 0], &[0, 0, -1, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]]);
    let transformations = vec![
        LabeledMatrix::new("I", RationalMatrix::identity(4)),
        LabeledMatrix::new(
            "Z",
            RationalMatrix::from_int_rows(&[&[1, 0, 0, 0], &[0, -1, 0, 0], &[0, 0, -1, 0], &[0, 0, 0, 1]]),
        ),
        LabeledMatrix::new("S", s_gate.clone()),
        LabeledMatrix::new("S^-1", s_gate.transpose()),
    ];
    let measurements = [["0", "1"], ["+", "-"], ["+y", "-y"]]
        .iter()
        .map(|m| m.iter().map(|s| s.to_string()).collect())
        .collect();
    GptFragment {
        dim: 4,
        states,
        effects,
        unit_effect: RationalVector::from_ints(&[1, 0, 0, 0]),
        transformations,
        measurements,
    }
}

/// Square-bit fragment in dimension 3 with coordinates `(1, x, y)`.
///
/// Four states on the corners of a diamond, `x±` and `y±`, obey the single
/// identity `x+ + x- = y+ + y-`. One binary measurement with outcomes `0`
/// and `1` reads the `x` coordinate, and the transformations are the
/// identity `id` and a quarter turn `R`.
pub fn square_bit_fragment() -> GptFragment {
    let corners: [(&str, [i64; 3]); 4] = [
        ("x+", [1, 1, 0]),
        ("x-", [1, -1, 0]),
        ("y+", [1, 0, 1]),
        ("y-", [1, 0, -1]),
    ];
    let half = Rational::new(1, 2);
    GptFragment {
        dim: 3,
        states: corners
            .iter()
            .map(|(id, v)| LabeledVector::new(*id, RationalVector::from_ints(v)))
            .collect(),
        effects: vec![
            LabeledVector::new("0", RationalVector::from_ints(&[1, 1, 0]).scale(&half)),
            LabeledVector::new("1", RationalVector::from_ints(&[1, -1, 0]).scale(&half)),
        ],
        unit_effect: RationalVector::from_ints(&[1, 0, 0]),
        transformations: vec![
            LabeledMatrix::new("id", RationalMatrix::identity(3)),
            LabeledMatrix::new(
                "R",
                RationalMatrix::from_int_rows(&[&[1, 0, 0], &[0, 0, -1], &[0, 1, 0]]),
            ),
        ],
        measurements: vec![vec!["0".into(), "1".into()]],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedTransformation {
    pub id: String,
    pub kept: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LumpResult {
    pub fragment: GptFragment,
    pub merged: Vec<MergedTransformation>,
}

/// All composites `t1∘t2` (apply `t2` first), with the first-stage index
/// varying fastest. Composites equal as matrices to an earlier one are
/// dropped and reported against the id that was kept.
pub fn compose_stages(
    first: &[LabeledMatrix],
    second: &[LabeledMatrix],
) -> Result<(Vec<LabeledMatrix>, Vec<MergedTransformation>)> {
    let mut out: Vec<LabeledMatrix> = Vec::new();
    let mut merged = Vec::new();
    for t2 in second {
        for t1 in first {
            let id = format!("{}∘{}", t1.id, t2.id);
            let matrix = t1.matrix.mul(&t2.matrix)?;
            match out.iter().find(|o| o.matrix == matrix) {
                Some(kept) => merged.push(MergedTransformation {
                    id,
                    kept: kept.id.clone(),
                }),
                None => out.push(LabeledMatrix { id, matrix }),
            }
        }
    }
    Ok((out, merged))
}

/// Reduces a two-stage scenario to prepare-transform-measure form by
/// replacing `base`'s transformations with the distinct composites.
pub fn lump(first: &[LabeledMatrix], second: &[LabeledMatrix], base: &GptFragment) -> Result<LumpResult> {
    for t in first.iter().chain(second) {
        if t.matrix.rows() != base.dim || t.matrix.cols() != base.dim {
            return Err(Error::Dimension(format!(
                "transformation {:?} is not {}x{}",
                t.id, base.dim, base.dim
            )));
        }
    }
    let (transformations, merged) = compose_stages(first, second)?;
    let fragment = GptFragment {
        transformations,
        ..base.clone()
    };
    Ok(LumpResult { fragment, merged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn by_id<'a>(f: &'a GptFragment, id: &str) -> &'a LabeledMatrix {
        f.transformations.iter().find(|t| t.id == id).unwrap()
    }

    #[test]
    fn stabilizer_validates() {
        let f = stabilizer_qubit_fragment();
        let report = f.validate().unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert!(report.not_discard_preserving.is_empty());
        assert_eq!(f, stabilizer_qubit_fragment());
    }

    #[test]
    fn square_bit_validates_and_predicts() {
        let f = square_bit_fragment();
        assert!(f.validate().unwrap().passed());
        let table = f.predict().unwrap();
        assert_eq!(table.len(), 16);
        assert_eq!(table.get("0", "x+", "id"), Some(&rat!(1)));
        assert_eq!(table.get("0", "y+", "id"), Some(&rat!(1, 2)));
        // R sends y+ to x-
        assert_eq!(table.get("0", "y+", "R"), Some(&rat!(0)));
        assert_eq!(table.get("1", "y-", "R"), Some(&rat!(0)));
        assert!(table.check(&f).unwrap().is_empty());
    }

    #[test]
    fn plus_state_bloch_vector() {
        let f = stabilizer_qubit_fragment();
        assert_eq!(f.states[0].id, "+");
        assert_eq!(f.states[0].vector, RationalVector::from_ints(&[1, 1, 0, 0]));
    }

    #[test]
    fn phase_gate_action() {
        let f = stabilizer_qubit_fragment();
        let s = &by_id(&f, "S").matrix;
        let v = RationalVector::from_ints(&[5, 7, 11, 13]);
        assert_eq!(s.mul_vec(&v).unwrap(), RationalVector::from_ints(&[5, -11, 7, 13]));
    }

    #[test]
    fn predictions() {
        let f = stabilizer_qubit_fragment();
        let table = f.predict().unwrap();
        assert_eq!(table.len(), 6 * 6 * 4);
        assert_eq!(table.get("+", "+", "I"), Some(&rat!(1)));
        assert_eq!(table.get("0", "+", "S"), Some(&rat!(1, 2)));
        assert_eq!(table.get("+y", "+", "S"), Some(&rat!(1)));
        assert!(table.check(&f).unwrap().is_empty());
    }

    #[test]
    fn measurement_not_summing_to_unit() {
        let mut f = stabilizer_qubit_fragment();
        f.measurements.push(vec!["0".into()]);
        let report = f.validate().unwrap();
        assert!(report.violates(Invariant::MeasurementSum));
        assert_eq!(
            Invariant::MeasurementSum.to_string(),
            "measurement does not sum to unit"
        );
    }

    #[test]
    fn unnormalized_state() {
        let mut f = stabilizer_qubit_fragment();
        f.states[0].vector = RationalVector::from_ints(&[2, 0, 0, 0]);
        let report = f.validate().unwrap();
        assert!(report.violates(Invariant::Normalization));
        let bad = report
            .violations
            .iter()
            .find(|v| v.invariant == Invariant::Normalization)
            .unwrap();
        assert_eq!(bad.ids, vec!["+".to_string()]);
    }

    #[test]
    fn uncovered_effect_and_range() {
        let mut f = stabilizer_qubit_fragment();
        f.effects
            .push(LabeledVector::new("big", RationalVector::from_ints(&[2, 0, 0, 0])));
        let report = f.validate().unwrap();
        assert!(report.violates(Invariant::EffectCoverage));
        assert!(report.violates(Invariant::EffectRange));
        assert!(report.violates(Invariant::ProbabilityRange));
    }

    #[test]
    fn non_discard_preserving_is_only_reported() {
        let mut f = stabilizer_qubit_fragment();
        // postselected channel: halves every probability
        let mut half = RationalMatrix::identity(4);
        for i in 0..4 {
            half[(i, i)] = rat!(1, 2);
        }
        f.transformations.push(LabeledMatrix::new("leak", half));
        let report = f.validate().unwrap();
        assert!(report.passed());
        assert_eq!(report.not_discard_preserving, vec!["leak".to_string()]);
    }

    #[test]
    fn structural_errors() {
        let mut f = stabilizer_qubit_fragment();
        f.states[1].vector = RationalVector::from_ints(&[1, 0, 0]);
        assert!(matches!(f.validate(), Err(Error::Dimension(_))));
        let mut f = stabilizer_qubit_fragment();
        f.measurements.push(vec!["nope".into()]);
        assert!(matches!(f.validate(), Err(Error::Structure(_))));
        let mut f = stabilizer_qubit_fragment();
        f.states[1].id = "+".into();
        assert!(matches!(f.validate(), Err(Error::Structure(_))));
    }

    #[test]
    fn lump_z_and_s() {
        let f = stabilizer_qubit_fragment();
        let first = [by_id(&f, "I").clone(), by_id(&f, "Z").clone()];
        let second = [by_id(&f, "I").clone(), by_id(&f, "S").clone()];
        let lumped = lump(&first, &second, &f).unwrap();
        let ids = lumped.fragment.transformation_ids();
        assert_eq!(ids, vec!["I∘I", "Z∘I", "I∘S", "Z∘S"]);
        assert_eq!(lumped.fragment.transformations[3].matrix, by_id(&f, "S^-1").matrix);
        assert!(lumped.merged.is_empty());
    }

    #[test]
    fn lump_merges_duplicates() {
        let f = stabilizer_qubit_fragment();
        let i = [by_id(&f, "I").clone()];
        let lumped = lump(&i, &i, &f).unwrap();
        assert_eq!(lumped.fragment.transformations.len(), 1);
        assert_eq!(lumped.fragment.transformations[0].matrix, RationalMatrix::identity(4));

        let iz = [by_id(&f, "I").clone(), by_id(&f, "Z").clone()];
        let lumped = lump(&iz, &iz, &f).unwrap();
        assert_eq!(lumped.fragment.transformation_ids(), vec!["I∘I", "Z∘I"]);
        assert_eq!(
            lumped.merged,
            vec![
                MergedTransformation {
                    id: "I∘Z".into(),
                    kept: "Z∘I".into()
                },
                MergedTransformation {
                    id: "Z∘Z".into(),
                    kept: "I∘I".into()
                },
            ]
        );
    }

    #[test]
    fn lump_dimension_mismatch() {
        let f = stabilizer_qubit_fragment();
        let bad = [LabeledMatrix::new("x", RationalMatrix::identity(3))];
        assert!(matches!(lump(&bad, &bad, &f), Err(Error::Dimension(_))));
    }

    #[test]
    fn lump_is_associative() {
        let f = stabilizer_qubit_fragment();
        let a = [by_id(&f, "Z").clone(), by_id(&f, "S").clone()];
        let b = [by_id(&f, "I").clone(), by_id(&f, "S^-1").clone()];
        let c = [by_id(&f, "S").clone(), by_id(&f, "Z").clone()];
        let (bc, _) = compose_stages(&b, &c).unwrap();
        let (ab, _) = compose_stages(&a, &b).unwrap();
        let left = lump(&a, &bc, &f).unwrap().fragment;
        let right = lump(&ab, &c, &f).unwrap().fragment;
        let mats = |g: &GptFragment| {
            let mut v: Vec<_> = g.transformations.iter().map(|t| t.matrix.to_rows()).collect();
            v.sort();
            v
        };
        assert_eq!(mats(&left), mats(&right));
    }

    #[test]
    fn scenario_json_round_trip() {
        let f = stabilizer_qubit_fragment();
        let text = f.to_json().unwrap();
        assert_eq!(GptFragment::from_json(&text).unwrap(), f);
        let table = f.predict().unwrap();
        let t = table.to_json().unwrap();
        assert!(t.contains("\"p\": \"1/2\""));
        assert_eq!(DataTable::from_json(&t).unwrap(), table);
    }

    #[test]
    fn uniform_table_is_one_half() {
        let f = stabilizer_qubit_fragment();
        let u = DataTable::uniform(&f).unwrap();
        assert_eq!(u, DataTable::constant(&f, &rat!(1, 2)).unwrap());
        let mixed = f.predict().unwrap().mix(&u, &rat!(1)).unwrap();
        assert_eq!(mixed, u);
    }
}
