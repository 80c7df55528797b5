//! Generating sets of linear operational identities.
//!
//! Stack the process vectors as columns (transformations are vectorized by
//! column stacking first) and take a kernel basis: every coefficient vector
//! `α` with `Σ α_i v_i = 0` is then a rational combination of the returned
//! generators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fragment::GptFragment;
use crate::linalg::{kernel_basis, RationalMatrix, RationalVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    States,
    Effects,
    Transformations,
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessKind::States => "states",
            ProcessKind::Effects => "effects",
            ProcessKind::Transformations => "transformations",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentitySet {
    pub kind: ProcessKind,
    pub ids: Vec<String>,
    pub generators: Vec<RationalVector>,
}

impl IdentitySet {
    pub fn empty(kind: ProcessKind, ids: Vec<String>) -> Self {
        IdentitySet {
            kind,
            ids,
            generators: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// True if `v` is a rational combination of the generators.
    pub fn spans(&self, v: &RationalVector) -> bool {
        if v.is_zero() {
            return true;
        }
        if self.generators.is_empty() {
            return false;
        }
        let mut cols = self.generators.clone();
        let base = RationalMatrix::from_columns(&cols).map(|m| m.rank()).unwrap_or(0);
        cols.push(v.clone());
        RationalMatrix::from_columns(&cols).map(|m| m.rank()).unwrap_or(0) == base
    }
}

fn identities_of(kind: ProcessKind, ids: Vec<String>, columns: Vec<RationalVector>) -> Result<IdentitySet> {
    let m = RationalMatrix::from_columns(&columns)?;
    Ok(IdentitySet {
        kind,
        ids,
        generators: kernel_basis(&m),
    })
}

pub fn state_identities(f: &GptFragment) -> Result<IdentitySet> {
    f.check_structure()?;
    identities_of(
        ProcessKind::States,
        f.state_ids(),
        f.states.iter().map(|s| s.vector.clone()).collect(),
    )
}

/// Identities among the listed effects only; the unit effect is not a column.
pub fn effect_identities(f: &GptFragment) -> Result<IdentitySet> {
    f.check_structure()?;
    identities_of(
        ProcessKind::Effects,
        f.effect_ids(),
        f.effects.iter().map(|e| e.vector.clone()).collect(),
    )
}

pub fn transformation_identities(f: &GptFragment) -> Result<IdentitySet> {
    f.check_structure()?;
    identities_of(
        ProcessKind::Transformations,
        f.transformation_ids(),
        f.transformations.iter().map(|t| t.matrix.vectorize()).collect(),
    )
}

pub fn identities(f: &GptFragment, kind: ProcessKind) -> Result<IdentitySet> {
    match kind {
        ProcessKind::States => state_identities(f),
        ProcessKind::Effects => effect_identities(f),
        ProcessKind::Transformations => transformation_identities(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::{stabilizer_qubit_fragment, LabeledMatrix, LabeledVector};

    fn expected_span() -> [RationalVector; 2] {
        [
            RationalVector::from_ints(&[1, 1, -1, -1, 0, 0]),
            RationalVector::from_ints(&[1, 1, 0, 0, -1, -1]),
        ]
    }

    fn trivial_fragment(states: &[&[i64]], effects: &[&[i64]]) -> GptFragment {
        GptFragment {
            dim: 2,
            states: states
                .iter()
                .enumerate()
                .map(|(i, v)| LabeledVector::new(format!("s{i}"), RationalVector::from_ints(v)))
                .collect(),
            effects: effects
                .iter()
                .enumerate()
                .map(|(i, v)| LabeledVector::new(format!("e{i}"), RationalVector::from_ints(v)))
                .collect(),
            unit_effect: RationalVector::from_ints(&[1, 0]),
            transformations: vec![LabeledMatrix::new("id", RationalMatrix::identity(2))],
            measurements: vec![],
        }
    }

    #[test]
    fn stabilizer_states_and_effects() {
        let f = stabilizer_qubit_fragment();
        for ids in [state_identities(&f).unwrap(), effect_identities(&f).unwrap()] {
            assert_eq!(ids.len(), 2);
            for g in expected_span() {
                assert!(ids.spans(&g));
            }
        }
        let s = state_identities(&f).unwrap();
        for g in &s.generators {
            let mut sum = RationalVector::zeros(4);
            for (a, st) in g.iter().zip(&f.states) {
                sum = sum.add(&st.vector.scale(a));
            }
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn stabilizer_transformations() {
        let f = stabilizer_qubit_fragment();
        let t = transformation_identities(&f).unwrap();
        assert_eq!(t.generators, vec![RationalVector::from_ints(&[1, 1, -1, -1])]);
    }

    #[test]
    fn three_gates_have_no_identity() {
        let mut f = stabilizer_qubit_fragment();
        f.transformations.truncate(3);
        assert!(transformation_identities(&f).unwrap().is_empty());
    }

    #[test]
    fn repeated_identity_gate() {
        let mut f = stabilizer_qubit_fragment();
        f.transformations = vec![f.transformations[0].clone(), f.transformations[0].clone()];
        f.transformations[1].id = "I2".into();
        let t = transformation_identities(&f).unwrap();
        assert_eq!(t.generators, vec![RationalVector::from_ints(&[1, -1])]);
    }

    #[test]
    fn small_cases() {
        let f = trivial_fragment(&[&[1, 0]], &[&[1, 0]]);
        assert!(state_identities(&f).unwrap().is_empty());
        let f = trivial_fragment(&[&[1, 1], &[1, 1]], &[&[1, 0]]);
        assert_eq!(
            state_identities(&f).unwrap().generators,
            vec![RationalVector::from_ints(&[1, -1])]
        );
        // {e, u - e} with e not proportional to u - e
        let f = trivial_fragment(&[&[1, 0]], &[&[1, 1], &[0, -1]]);
        assert!(effect_identities(&f).unwrap().is_empty());
        let f = trivial_fragment(&[&[1, 0]], &[&[1, 1], &[1, 1], &[1, 0]]);
        assert_eq!(
            effect_identities(&f).unwrap().generators,
            vec![RationalVector::from_ints(&[1, -1, 0])]
        );
    }

    #[test]
    fn json_shape() {
        let f = stabilizer_qubit_fragment();
        let t = transformation_identities(&f).unwrap();
        let v: serde_json::Value = serde_json::to_value(&t).unwrap();
        assert_eq!(v["kind"], "transformations");
        assert_eq!(v["generators"][0][2], "-1");
        assert_eq!(v["ids"][3], "S^-1");
    }
}
