//! The noncontextuality feasibility program and its Farkas certificates.
//!
//! Unknowns are the joint weights `p(κ′κ|t)` over measurement-assignment
//! vertices `κ′`, source-assignment vertices `κ` and transformations `t`.
//! Rows, in order:
//!
//! 1. normalization, one per `t`: `Σ_{κ′κ} p(κ′κ|t) = 1`
//! 2. causal independence, one per `κ` and unordered pair `t < t′`:
//!    `Σ_{κ′} p(κ′κ|t) − p(κ′κ|t′) = 0`
//! 3. transformation identities, one per `(κ′, κ, c)`: `Σ_t α_t^(c) p(κ′κ|t) = 0`
//! 4. data, one per `(k, s, t)`: `N Σ_{κ′κ} [Φ_κ′]_k [Ψ_κ]_s p(κ′κ|t) = p(k|s,t)`
//!
//! [`certify`] decides `M·x = b, x ≥ 0` by minimizing the total negative
//! part of a free solution of `M·x = b`. That program is the LP dual of
//! `min y·b s.t. 0 ≤ y·M ≤ 1`, so a single solve yields either a
//! nonnegative solution or an optimal box-constrained Farkas witness.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragment::{DataKey, DataTable};
use crate::identities::{IdentitySet, ProcessKind};
use crate::linalg::{dot, RationalMatrix, RationalVector};
use crate::polytope::VRep;
use crate::rational::{integer_scale, Rational};
use crate::simplex::{solve_standard, LpOutcome};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowTag {
    Normalization {
        t: String,
    },
    CausalIndependence {
        kappa: usize,
        t: String,
        t_other: String,
    },
    TransformationIdentity {
        kappa_out: usize,
        kappa_in: usize,
        generator: usize,
    },
    Data {
        k: String,
        s: String,
        t: String,
    },
}

impl RowTag {
    pub fn is_data(&self) -> bool {
        matches!(self, RowTag::Data { .. })
    }
}

/// Column coordinates `(κ′, κ, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnKey {
    pub kappa_out: usize,
    pub kappa_in: usize,
    pub t: usize,
}

/// How data rows are scaled: by the state count `N` for the original
/// scenario, or by one for the flag-convexified scenario whose data are
/// `p(k s̄|t) = p(k|s,t)/N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataScaling {
    Original,
    FlagConvexified,
}

/// Program matrix and row bookkeeping, independent of any particular data.
#[derive(Clone, Debug)]
pub struct ProgramSkeleton {
    pub matrix: RationalMatrix,
    pub row_tags: Vec<RowTag>,
    pub columns: Vec<ColumnKey>,
    /// constant right-hand side of each non-data row
    pub constants: Vec<Option<Rational>>,
    pub num_states: usize,
    pub num_kappa_out: usize,
    pub num_kappa_in: usize,
    pub effect_ids: Vec<String>,
    pub state_ids: Vec<String>,
    pub transformation_ids: Vec<String>,
    pub scaling: DataScaling,
}

impl ProgramSkeleton {
    pub fn column_index(&self, kappa_out: usize, kappa_in: usize, t: usize) -> usize {
        (kappa_out * self.num_kappa_in + kappa_in) * self.transformation_ids.len() + t
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn num_cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Data keys in row order.
    pub fn data_keys(&self) -> Vec<DataKey> {
        self.row_tags
            .iter()
            .filter_map(|tag| match tag {
                RowTag::Data { k, s, t } => Some(DataKey::new(k, s, t)),
                _ => None,
            })
            .collect()
    }

    pub fn data_row_of(&self) -> HashMap<DataKey, usize> {
        self.row_tags
            .iter()
            .enumerate()
            .filter_map(|(i, tag)| match tag {
                RowTag::Data { k, s, t } => Some((DataKey::new(k, s, t), i)),
                _ => None,
            })
            .collect()
    }

    /// Right-hand side for a given data table.
    pub fn rhs(&self, data: &DataTable) -> Result<RationalVector> {
        let expected: HashSet<DataKey> = self.data_keys().into_iter().collect();
        if let Some(extra) = data.entries().iter().find(|e| !expected.contains(&e.key())) {
            return Err(Error::IndexMismatch(format!(
                "data entry {} is not part of the scenario",
                extra.key()
            )));
        }
        self.row_tags
            .iter()
            .zip(&self.constants)
            .map(|(tag, c)| match (tag, c) {
                (RowTag::Data { k, s, t }, _) => data
                    .get(k, s, t)
                    .cloned()
                    .ok_or_else(|| Error::IndexMismatch(format!("data table lacks {}", DataKey::new(k, s, t)))),
                (_, Some(c)) => Ok(c.clone()),
                (_, None) => unreachable!("non-data rows carry constants"),
            })
            .collect()
    }

    pub fn with_data(&self, data: &DataTable) -> Result<NcProgram> {
        Ok(NcProgram {
            rhs: self.rhs(data)?,
            skeleton: self.clone(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct NcProgram {
    pub skeleton: ProgramSkeleton,
    pub rhs: RationalVector,
}

impl NcProgram {
    pub fn matrix(&self) -> &RationalMatrix {
        &self.skeleton.matrix
    }

    pub fn row_tags(&self) -> &[RowTag] {
        &self.skeleton.row_tags
    }
}

/// Assembles the program matrix.
pub fn build_skeleton(
    phi: &VRep,
    psi: &VRep,
    t_ids: &IdentitySet,
    num_states: usize,
    scaling: DataScaling,
) -> Result<ProgramSkeleton> {
    if t_ids.kind != ProcessKind::Transformations {
        return Err(Error::Precondition(format!(
            "expected transformation identities, got {}",
            t_ids.kind
        )));
    }
    if psi.labels.len() != num_states {
        return Err(Error::IndexMismatch(format!(
            "source assignments range over {} states but N = {num_states}",
            psi.labels.len()
        )));
    }
    if phi.vertices.iter().any(|v| v.dim() != phi.labels.len())
        || psi.vertices.iter().any(|v| v.dim() != psi.labels.len())
    {
        return Err(Error::Dimension("vertex length differs from label count".into()));
    }
    let nt = t_ids.ids.len();
    if nt == 0 {
        return Err(Error::IndexMismatch("no transformations".into()));
    }
    if t_ids.generators.iter().any(|g| g.dim() != nt) {
        return Err(Error::Dimension(
            "identity generator length differs from transformation count".into(),
        ));
    }
    let (nko, nki) = (phi.vertices.len(), psi.vertices.len());
    let ncols = nko * nki * nt;
    let col = |ko: usize, ki: usize, t: usize| (ko * nki + ki) * nt + t;

    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut tags = Vec::new();
    let mut constants = Vec::new();
    let zero_row = || vec![Rational::zero(); ncols];

    for t in 0..nt {
        let mut row = zero_row();
        for ko in 0..nko {
            for ki in 0..nki {
                row[col(ko, ki, t)] = Rational::one();
            }
        }
        rows.push(row);
        tags.push(RowTag::Normalization {
            t: t_ids.ids[t].clone(),
        });
        constants.push(Some(Rational::one()));
    }
    for ki in 0..nki {
        for t in 0..nt {
            for t2 in t + 1..nt {
                let mut row = zero_row();
                for ko in 0..nko {
                    row[col(ko, ki, t)] = Rational::one();
                    row[col(ko, ki, t2)] = -Rational::one();
                }
                rows.push(row);
                tags.push(RowTag::CausalIndependence {
                    kappa: ki,
                    t: t_ids.ids[t].clone(),
                    t_other: t_ids.ids[t2].clone(),
                });
                constants.push(Some(Rational::zero()));
            }
        }
    }
    for ko in 0..nko {
        for ki in 0..nki {
            for (c, g) in t_ids.generators.iter().enumerate() {
                let mut row = zero_row();
                for t in 0..nt {
                    row[col(ko, ki, t)] = g[t].clone();
                }
                rows.push(row);
                tags.push(RowTag::TransformationIdentity {
                    kappa_out: ko,
                    kappa_in: ki,
                    generator: c,
                });
                constants.push(Some(Rational::zero()));
            }
        }
    }
    let factor = match scaling {
        DataScaling::Original => Rational::from(num_states),
        DataScaling::FlagConvexified => Rational::one(),
    };
    for (k, k_id) in phi.labels.iter().enumerate() {
        for (s, s_id) in psi.labels.iter().enumerate() {
            // weight of (κ′, κ) in this row, shared by every t
            let weights: Vec<(usize, usize, Rational)> = (0..nko)
                .filter(|&ko| !phi.vertices[ko][k].is_zero())
                .flat_map(|ko| {
                    (0..nki)
                        .filter(move |&ki| !psi.vertices[ki][s].is_zero())
                        .map(move |ki| (ko, ki))
                })
                .map(|(ko, ki)| (ko, ki, &factor * &phi.vertices[ko][k] * &psi.vertices[ki][s]))
                .collect();
            for (t, t_id) in t_ids.ids.iter().enumerate() {
                let mut row = zero_row();
                for (ko, ki, w) in &weights {
                    row[col(*ko, *ki, t)] = w.clone();
                }
                rows.push(row);
                tags.push(RowTag::Data {
                    k: k_id.clone(),
                    s: s_id.clone(),
                    t: t_id.clone(),
                });
                constants.push(None);
            }
        }
    }

    let columns = (0..nko)
        .flat_map(|ko| {
            (0..nki).flat_map(move |ki| {
                (0..nt).map(move |t| ColumnKey {
                    kappa_out: ko,
                    kappa_in: ki,
                    t,
                })
            })
        })
        .collect();
    let matrix = if rows.is_empty() {
        RationalMatrix::zeros(0, ncols)
    } else {
        RationalMatrix::from_rows(rows)?
    };
    Ok(ProgramSkeleton {
        matrix,
        row_tags: tags,
        columns,
        constants,
        num_states,
        num_kappa_out: nko,
        num_kappa_in: nki,
        effect_ids: phi.labels.clone(),
        state_ids: psi.labels.clone(),
        transformation_ids: t_ids.ids.clone(),
        scaling,
    })
}

/// The program for the original scenario and a concrete data table.
pub fn build_program(
    phi: &VRep,
    psi: &VRep,
    t_ids: &IdentitySet,
    data: &DataTable,
    num_states: usize,
) -> Result<NcProgram> {
    build_skeleton(phi, psi, t_ids, num_states, DataScaling::Original)?.with_data(data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertResult {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<RationalVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RationalVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_value: Option<Rational>,
}

impl CertResult {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }
}

/// Exact feasibility verdict with a solution or an optimal Farkas witness.
pub fn certify(p: &NcProgram) -> Result<CertResult> {
    let m = p.matrix();
    let (rows, n) = (m.rows(), m.cols());
    // columns [M | -M]: x = v - w, minimize Σ w
    let mut a = RationalMatrix::zeros(rows, 2 * n);
    for i in 0..rows {
        for (j, v) in m.row(i).iter().enumerate() {
            if !v.is_zero() {
                a[(i, j)] = v.clone();
                a[(i, n + j)] = -v;
            }
        }
    }
    let mut cost = vec![Rational::zero(); 2 * n];
    for c in &mut cost[n..] {
        *c = Rational::one();
    }
    let b = &p.rhs.0;
    let result = match solve_standard(&a, b, &cost) {
        LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
        LpOutcome::Infeasible { ray } => {
            // b is outside the column space: the ray annihilates M and is
            // positive on b, so its negation rescaled to y·b = -1 is a witness
            let scale = -dot(&ray, b).recip();
            let y: RationalVector = ray.iter().map(|v| v * &scale).collect();
            CertResult {
                verdict: Verdict::Infeasible,
                x: None,
                witness_value: Some(y.dot(&p.rhs)),
                witness: Some(y),
            }
        }
        LpOutcome::Optimal { x, value, duals } => {
            if value.is_zero() {
                CertResult {
                    verdict: Verdict::Feasible,
                    x: Some(RationalVector(x[..n].to_vec())),
                    witness: None,
                    witness_value: None,
                }
            } else {
                let y: RationalVector = duals.iter().map(|v| -v).collect();
                CertResult {
                    verdict: Verdict::Infeasible,
                    x: None,
                    witness_value: Some(y.dot(&p.rhs)),
                    witness: Some(y),
                }
            }
        }
    };
    check_certificate(p, &result)?;
    Ok(result)
}

/// Verifies the defining conditions of a certification result exactly.
pub fn check_certificate(p: &NcProgram, r: &CertResult) -> Result<()> {
    let m = p.matrix();
    match r.verdict {
        Verdict::Feasible => {
            let x =
                r.x.as_ref()
                    .ok_or_else(|| Error::Inconsistent("feasible result without x".into()))?;
            if x.iter().any(Rational::is_negative) {
                return Err(Error::Inconsistent("solution has a negative entry".into()));
            }
            if m.mul_vec(x)? != p.rhs {
                return Err(Error::Inconsistent("solution does not satisfy M·x = b".into()));
            }
        }
        Verdict::Infeasible => {
            let y = r
                .witness
                .as_ref()
                .ok_or_else(|| Error::Inconsistent("infeasible result without witness".into()))?;
            let ym = m.left_mul_vec(y)?;
            if ym.iter().any(|v| v.is_negative() || *v > Rational::one()) {
                return Err(Error::Inconsistent("witness violates 0 ≤ y·M ≤ 1".into()));
            }
            let value = y.dot(&p.rhs);
            if !value.is_negative() || r.witness_value.as_ref() != Some(&value) {
                return Err(Error::Inconsistent("witness value is not y·b < 0".into()));
            }
        }
    }
    Ok(())
}

/// `Σ γ_{k,s,t} p(k|s,t) + γ₀ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInequality", into = "RawInequality")]
pub struct NcInequality {
    /// nonzero coefficients only
    pub coeffs: BTreeMap<DataKey, Rational>,
    pub constant: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawCoeff {
    k: String,
    s: String,
    t: String,
    gamma: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawInequality {
    coeffs: Vec<RawCoeff>,
    constant: Rational,
}

impl TryFrom<RawInequality> for NcInequality {
    type Error = Error;
    fn try_from(raw: RawInequality) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for c in raw.coeffs {
            let key = DataKey::new(c.k, c.s, c.t);
            if coeffs.contains_key(&key) {
                return Err(Error::Parse(format!("coefficient for {key} given twice")));
            }
            if !c.gamma.is_zero() {
                coeffs.insert(key, c.gamma);
            }
        }
        Ok(NcInequality {
            coeffs,
            constant: raw.constant,
        })
    }
}

impl From<NcInequality> for RawInequality {
    fn from(ineq: NcInequality) -> Self {
        RawInequality {
            coeffs: ineq
                .coeffs
                .into_iter()
                .map(|(key, gamma)| RawCoeff {
                    k: key.k,
                    s: key.s,
                    t: key.t,
                    gamma,
                })
                .collect(),
            constant: ineq.constant,
        }
    }
}

impl fmt::Display for NcInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (key, g) in &self.coeffs {
            if first {
                write!(f, "{g}·{key}")?;
            } else if g.is_negative() {
                write!(f, " - {}·{key}", -g)?;
            } else {
                write!(f, " + {g}·{key}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " ≥ {}", -&self.constant)
    }
}

impl NcInequality {
    pub fn new(coeffs: impl IntoIterator<Item = (DataKey, Rational)>, constant: Rational) -> Self {
        let mut map: BTreeMap<DataKey, Rational> = BTreeMap::new();
        for (k, g) in coeffs {
            *map.entry(k).or_default() += g;
        }
        map.retain(|_, g| !g.is_zero());
        NcInequality { coeffs: map, constant }
    }

    pub fn zero() -> Self {
        NcInequality {
            coeffs: BTreeMap::new(),
            constant: Rational::zero(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Positive rescaling to coprime integers. The direction of the
    /// inequality is never flipped.
    pub fn canonical(&self) -> NcInequality {
        let mut all: Vec<Rational> = self.coeffs.values().cloned().collect();
        all.push(self.constant.clone());
        match integer_scale(&all) {
            None => self.clone(),
            Some(f) => NcInequality {
                coeffs: self.coeffs.iter().map(|(k, g)| (k.clone(), g * &f)).collect(),
                constant: &self.constant * &f,
            },
        }
    }

    pub fn scaled(&self, factor: &Rational) -> NcInequality {
        NcInequality::new(
            self.coeffs.iter().map(|(k, g)| (k.clone(), g * factor)),
            &self.constant * factor,
        )
    }

    /// `Σ γ p` only, without the constant.
    pub fn functional(&self, data: &DataTable) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (key, g) in &self.coeffs {
            acc += g * data.require(key)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    /// `Σ γ_{k,s,t} p(k|s,t)`
    pub value: Rational,
    pub constant: Rational,
    /// whether `value + constant ≥ 0`
    pub satisfied: bool,
}

pub fn evaluate(ineq: &NcInequality, data: &DataTable) -> Result<Evaluation> {
    let value = ineq.functional(data)?;
    let satisfied = !(&value + &ineq.constant).is_negative();
    Ok(Evaluation {
        value,
        constant: ineq.constant.clone(),
        satisfied,
    })
}

/// Reads a noncontextuality inequality off an infeasibility witness:
/// data-row multipliers become coefficients and the constant rows
/// contribute `Σ y_i b_i` to the constant term.
pub fn witness_to_inequality(r: &CertResult, p: &NcProgram) -> Result<NcInequality> {
    if r.verdict != Verdict::Infeasible {
        return Err(Error::Precondition("witness requested for a feasible result".into()));
    }
    let y = r
        .witness
        .as_ref()
        .ok_or_else(|| Error::Inconsistent("infeasible result without witness".into()))?;
    if y.dim() != p.skeleton.num_rows() {
        return Err(Error::Dimension("witness length differs from row count".into()));
    }
    let mut coeffs = Vec::new();
    let mut constant = Rational::zero();
    for ((tag, c), yi) in p.skeleton.row_tags.iter().zip(&p.skeleton.constants).zip(y.iter()) {
        match (tag, c) {
            (RowTag::Data { k, s, t }, _) => coeffs.push((DataKey::new(k, s, t), yi.clone())),
            (_, Some(c)) => constant += yi * c,
            (_, None) => {}
        }
    }
    Ok(NcInequality::new(coeffs, constant))
}

/// Objective `c·x` whose value equals `Σ γ p(k|s,t)` on the data implied by `x`.
fn functional_on_columns(ineq: &NcInequality, skeleton: &ProgramSkeleton) -> Result<Vec<Rational>> {
    let rows = skeleton.data_row_of();
    let mut c = vec![Rational::zero(); skeleton.num_cols()];
    for (key, g) in &ineq.coeffs {
        let &i = rows
            .get(key)
            .ok_or_else(|| Error::IndexMismatch(format!("{key} is not a data entry of the scenario")))?;
        for (cj, mij) in c.iter_mut().zip(skeleton.matrix.row(i)) {
            if !mij.is_zero() {
                *cj += g * mij;
            }
        }
    }
    Ok(c)
}

/// Exact minimum of `Σ γ p(k|s,t)` over every data table the classical
/// model family can produce.
pub fn nc_bound(ineq: &NcInequality, skeleton: &ProgramSkeleton) -> Result<Rational> {
    let c = functional_on_columns(ineq, skeleton)?;
    let structural: Vec<usize> = (0..skeleton.num_rows())
        .filter(|&i| !skeleton.row_tags[i].is_data())
        .collect();
    let mut a = RationalMatrix::zeros(structural.len(), skeleton.num_cols());
    let mut b = Vec::with_capacity(structural.len());
    for (r, &i) in structural.iter().enumerate() {
        for (j, v) in skeleton.matrix.row(i).iter().enumerate() {
            if !v.is_zero() {
                a[(r, j)] = v.clone();
            }
        }
        b.push(skeleton.constants[i].clone().unwrap_or_default());
    }
    match solve_standard(&a, &b, &c) {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Unbounded => Err(Error::Unbounded),
        LpOutcome::Infeasible { .. } => Err(Error::Inconsistent(
            "scenario constraints admit no classical model at all".into(),
        )),
    }
}
