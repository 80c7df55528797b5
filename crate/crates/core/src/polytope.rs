//! Measurement- and source-assignment polytopes and their vertices.
//!
//! Vertices are found by exhaustive basic-solution enumeration: with the
//! equalities of rank `r`, every choice of `n − r` inequalities made tight
//! that pins down a unique point is solved exactly and kept if feasible.
//! This is exponential in general and meant for the desk-scale polytopes
//! that assignment problems produce.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragment::GptFragment;
use crate::identities::{IdentitySet, ProcessKind};
use crate::linalg::{dot, rref_in_place, RationalVector};
use crate::rational::Rational;
use crate::simplex::{GeneralOutcome, LinearProgram, Relation, Sense};

/// A single linear constraint; for inequalities the meaning is `coeffs·x ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: RationalVector,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: RationalVector, rhs: Rational) -> Self {
        Constraint { coeffs, rhs }
    }

    fn slack(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs.0, x) - &self.rhs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HPolytope {
    pub num_vars: usize,
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
    pub var_labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VRep {
    pub labels: Vec<String>,
    pub vertices: Vec<RationalVector>,
}

impl VRep {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

fn unit(n: usize, i: usize) -> RationalVector {
    let mut v = RationalVector::zeros(n);
    v[i] = Rational::one();
    v
}

fn check_identity_set(ids: &IdentitySet, kind: ProcessKind, labels: &[String]) -> Result<()> {
    if ids.kind != kind {
        return Err(Error::Precondition(format!(
            "expected identities among {kind}, got {}",
            ids.kind
        )));
    }
    if ids.ids != labels {
        return Err(Error::IndexMismatch(format!(
            "identity set is over {:?} but the fragment lists {:?}",
            ids.ids, labels
        )));
    }
    Ok(())
}

/// Assignments of response probabilities to the listed effects: each
/// measurement sums to one, entries are nonnegative and every effect
/// identity is respected.
pub fn measurement_polytope(f: &GptFragment, ids: &IdentitySet) -> Result<HPolytope> {
    f.check_structure()?;
    let labels = f.effect_ids();
    check_identity_set(ids, ProcessKind::Effects, &labels)?;
    let n = labels.len();
    let mut equalities = Vec::new();
    for m in f.measurement_indices()? {
        let mut coeffs = RationalVector::zeros(n);
        for k in m {
            coeffs[k] = Rational::one();
        }
        equalities.push(Constraint::new(coeffs, Rational::one()));
    }
    for g in &ids.generators {
        equalities.push(Constraint::new(g.clone(), Rational::zero()));
    }
    let inequalities = (0..n).map(|i| Constraint::new(unit(n, i), Rational::zero())).collect();
    Ok(HPolytope {
        num_vars: n,
        equalities,
        inequalities,
        var_labels: labels,
    })
}

/// Retrodictive assignments to the source outcomes: a probability vector
/// over states that respects every state identity.
pub fn source_polytope(f: &GptFragment, ids: &IdentitySet) -> Result<HPolytope> {
    f.check_structure()?;
    let labels = f.state_ids();
    check_identity_set(ids, ProcessKind::States, &labels)?;
    let n = labels.len();
    let mut equalities = vec![Constraint::new(
        (0..n).map(|_| Rational::one()).collect(),
        Rational::one(),
    )];
    for g in &ids.generators {
        equalities.push(Constraint::new(g.clone(), Rational::zero()));
    }
    let inequalities = (0..n).map(|i| Constraint::new(unit(n, i), Rational::zero())).collect();
    Ok(HPolytope {
        num_vars: n,
        equalities,
        inequalities,
        var_labels: labels,
    })
}

impl HPolytope {
    fn check_shape(&self) -> Result<()> {
        if self.var_labels.len() != self.num_vars {
            return Err(Error::Dimension("label count differs from variable count".into()));
        }
        for c in self.equalities.iter().chain(&self.inequalities) {
            if c.coeffs.dim() != self.num_vars {
                return Err(Error::Dimension(format!(
                    "constraint of length {} in a polytope over {} variables",
                    c.coeffs.dim(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        self.equalities.iter().all(|c| c.slack(&x.0).is_zero())
            && self.inequalities.iter().all(|c| !c.slack(&x.0).is_negative())
    }

    fn lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::with_free_vars(self.num_vars);
        for c in &self.equalities {
            lp.add_row(c.coeffs.0.clone(), Relation::Eq, c.rhs.clone());
        }
        for c in &self.inequalities {
            lp.add_row(c.coeffs.0.clone(), Relation::Ge, c.rhs.clone());
        }
        lp
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self.lp().solve(), GeneralOutcome::Infeasible)
    }

    /// True when the recession cone is trivial.
    pub fn is_bounded(&self) -> bool {
        let n = self.num_vars;
        let mut cone = LinearProgram::with_free_vars(n);
        for c in &self.equalities {
            cone.add_row(c.coeffs.0.clone(), Relation::Eq, Rational::zero());
        }
        for c in &self.inequalities {
            cone.add_row(c.coeffs.0.clone(), Relation::Ge, Rational::zero());
        }
        for i in 0..n {
            cone.add_row(unit(n, i).0, Relation::Le, Rational::one());
            cone.add_row(unit(n, i).0, Relation::Ge, -Rational::one());
        }
        for i in 0..n {
            for sign in [1, -1] {
                let mut lp = cone.clone();
                lp.set_objective(Sense::Maximize, unit(n, i).scale(&Rational::from_int(sign)).0);
                if let GeneralOutcome::Optimal { value, .. } = lp.solve() {
                    if value.is_positive() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Rank of the rows active at `x` (equalities plus tight inequalities).
    pub fn active_rank(&self, x: &RationalVector) -> usize {
        let mut rows: Vec<Vec<Rational>> = self
            .equalities
            .iter()
            .map(|c| c.coeffs.0.clone())
            .chain(
                self.inequalities
                    .iter()
                    .filter(|c| c.slack(&x.0).is_zero())
                    .map(|c| c.coeffs.0.clone()),
            )
            .collect();
        rref_in_place(&mut rows, self.num_vars).len()
    }
}

/// Complete, duplicate-free vertex list, sorted lexicographically.
pub fn enumerate_vertices(p: &HPolytope) -> Result<VRep> {
    p.check_shape()?;
    if !p.is_feasible() {
        return Err(Error::EmptyPolytope);
    }
    if !p.is_bounded() {
        return Err(Error::UnboundedPolytope);
    }
    let n = p.num_vars;
    let mut eq_rows: Vec<Vec<Rational>> = p
        .equalities
        .iter()
        .map(|c| {
            let mut row = c.coeffs.0.clone();
            row.push(c.rhs.clone());
            row
        })
        .collect();
    let eq_rank = rref_in_place(&mut eq_rows, n).len();
    eq_rows.truncate(eq_rank);
    let need = n - eq_rank;

    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for chosen in (0..p.inequalities.len()).combinations(need) {
        let mut rows = eq_rows.clone();
        for &i in &chosen {
            let c = &p.inequalities[i];
            let mut row = c.coeffs.0.clone();
            row.push(c.rhs.clone());
            rows.push(row);
        }
        let pivots = rref_in_place(&mut rows, n);
        if pivots.len() < n || rows[n..].iter().any(|r| !r[n].is_zero()) {
            continue;
        }
        let x: Vec<Rational> = rows[..n].iter().map(|r| r[n].clone()).collect();
        if p.inequalities.iter().all(|c| !c.slack(&x).is_negative()) {
            found.insert(x);
        }
    }
    Ok(VRep {
        labels: p.var_labels.clone(),
        vertices: found.into_iter().map(RationalVector).collect(),
    })
}
