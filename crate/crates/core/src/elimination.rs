//! Complete inequality sets by Fourier-Motzkin elimination.
//!
//! The unknowns `p(κ′κ|t)` are projected out of the program rows, leaving
//! linear constraints on the data symbols `p(k|s,t)` alone. Equalities are
//! used for substitution first. The remaining inequalities are combined one
//! variable at a time, and Chernikov's rule discards any row built from more
//! than `step + 1` of the original inequalities.
//!
//! The projected system is then put in a canonical form: implicit
//! equalities are detected, all equalities are brought to reduced row
//! echelon form and substituted into the inequalities, and inequalities
//! implied by the others are dropped. The result is a sorted list of
//! coprime integer inequalities, with each equality emitted as a pair of
//! opposite inequalities.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{NcInequality, ProgramSkeleton, RowTag};
use crate::fragment::DataKey;
use crate::linalg::{rref_in_place, RationalVector};
use crate::rational::{integer_scale, Rational};
use crate::simplex::{GeneralOutcome, LinearProgram, Relation, Sense};

pub const DEFAULT_ROW_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowRelation {
    /// `coeffs·v + constant ≥ 0`
    Ge,
    /// `coeffs·v + constant = 0`
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemRow {
    pub coeffs: RationalVector,
    pub constant: Rational,
    pub relation: RowRelation,
}

/// Constraints over `num_unknowns` eliminable variables followed by one
/// free parameter per data symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IneqSystem {
    pub num_unknowns: usize,
    pub data_symbols: Vec<DataKey>,
    pub rows: Vec<SystemRow>,
}

impl IneqSystem {
    pub fn num_vars(&self) -> usize {
        self.num_unknowns + self.data_symbols.len()
    }

    /// Nonnegativity of every unknown, the constant program rows, and one
    /// equality `M_i·x − p_i = 0` per data row.
    pub fn from_skeleton(sk: &ProgramSkeleton) -> IneqSystem {
        let nu = sk.num_cols();
        let data_symbols = sk.data_keys();
        let nv = nu + data_symbols.len();
        let mut rows = Vec::new();
        for j in 0..nu {
            let mut coeffs = RationalVector::zeros(nv);
            coeffs[j] = Rational::one();
            rows.push(SystemRow {
                coeffs,
                constant: Rational::zero(),
                relation: RowRelation::Ge,
            });
        }
        let mut d = nu;
        for (i, (tag, c)) in sk.row_tags.iter().zip(&sk.constants).enumerate() {
            let mut coeffs = RationalVector::zeros(nv);
            coeffs.0[..nu].clone_from_slice(sk.matrix.row(i));
            let constant = if tag.is_data() {
                coeffs[d] = -Rational::one();
                d += 1;
                Rational::zero()
            } else {
                -c.clone().unwrap_or_default()
            };
            rows.push(SystemRow {
                coeffs,
                constant,
                relation: RowRelation::Eq,
            });
        }
        debug_assert!(sk.row_tags.iter().filter(|t| matches!(t, RowTag::Data { .. })).count() == nv - nu);
        IneqSystem {
            num_unknowns: nu,
            data_symbols,
            rows,
        }
    }

    fn check(&self) -> Result<()> {
        let nv = self.num_vars();
        if let Some(r) = self.rows.iter().find(|r| r.coeffs.dim() != nv) {
            return Err(Error::Dimension(format!(
                "row has {} coefficients, system has {nv} variables",
                r.coeffs.dim()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationOptions {
    pub row_budget: usize,
    /// drop inequalities implied by the others from the final output
    pub remove_redundant: bool,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        EliminationOptions {
            row_budget: DEFAULT_ROW_BUDGET,
            remove_redundant: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub row_budget: usize,
    /// largest working row count seen during elimination
    pub peak_rows: usize,
    pub substituted: usize,
    pub fm_steps: usize,
    pub remaining_unknowns: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub inequalities: Vec<NcInequality>,
    /// false when the row budget stopped the elimination; the listed
    /// inequalities are then valid but possibly not sufficient
    pub complete: bool,
    pub diagnostics: Diagnostics,
}

impl Elimination {
    /// Errors with [`Error::BudgetExceeded`] unless the run completed.
    pub fn require_complete(self) -> Result<Vec<NcInequality>> {
        if self.complete {
            Ok(self.inequalities)
        } else {
            Err(Error::BudgetExceeded {
                budget: self.diagnostics.row_budget,
                rows: self.diagnostics.peak_rows,
                eliminated: self.diagnostics.substituted + self.diagnostics.fm_steps,
            })
        }
    }
}

/// Sparse row `Σ entries + constant`, entries sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Row {
    entries: Vec<(usize, Rational)>,
    constant: Rational,
}

impl Row {
    fn from_dense(coeffs: &[Rational], constant: &Rational) -> Row {
        Row {
            entries: coeffs
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| (j, v.clone()))
                .collect(),
            constant: constant.clone(),
        }
    }

    fn get(&self, var: usize) -> Option<&Rational> {
        self.entries
            .binary_search_by_key(&var, |(j, _)| *j)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    fn has_unknowns(&self, nu: usize) -> bool {
        self.entries.first().is_some_and(|(j, _)| *j < nu)
    }

    /// `a·self + b·other`
    fn combine(&self, a: &Rational, other: &Row, b: &Rational) -> Row {
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut k) = (0, 0);
        while i < self.entries.len() || k < other.entries.len() {
            let left = self.entries.get(i).map(|e| e.0);
            let right = other.entries.get(k).map(|e| e.0);
            let (j, v) = match (left, right) {
                (Some(l), Some(r)) if l == r => {
                    let v = a * &self.entries[i].1 + b * &other.entries[k].1;
                    i += 1;
                    k += 1;
                    (l, v)
                }
                (Some(l), r) if r.is_none_or(|r| l < r) => {
                    i += 1;
                    (l, a * &self.entries[i - 1].1)
                }
                (_, Some(r)) => {
                    k += 1;
                    (r, b * &other.entries[k - 1].1)
                }
                _ => unreachable!(),
            };
            if !v.is_zero() {
                entries.push((j, v));
            }
        }
        Row {
            entries,
            constant: a * &self.constant + b * &other.constant,
        }
    }

    /// Positive rescaling to coprime integers.
    fn canonicalize(&mut self) {
        let mut values: Vec<Rational> = self.entries.iter().map(|e| e.1.clone()).collect();
        values.push(self.constant.clone());
        if let Some(f) = integer_scale(&values) {
            if !f.is_one() {
                for e in &mut self.entries {
                    e.1 *= &f;
                }
                self.constant *= &f;
            }
        }
    }

    fn is_trivial(&self) -> bool {
        self.entries.is_empty() && !self.constant.is_negative()
    }
}

/// Canonical form of a single inequality row: positive multiple with
/// coprime integer coefficients.
pub fn canonicalize_row(coeffs: &[Rational], constant: &Rational) -> (Vec<Rational>, Rational) {
    let mut row = Row::from_dense(coeffs, constant);
    row.canonicalize();
    let mut dense = vec![Rational::zero(); coeffs.len()];
    for (j, v) in row.entries {
        dense[j] = v;
    }
    (dense, row.constant)
}

/// Storage form of a working row: 32-bit variable indices and, in the
/// common case, 64-bit integer values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct PackedRow {
    vars: Box<[u32]>,
    values: PackedValues,
    constant: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PackedValues {
    Int(Box<[i64]>),
    Rational(Box<[Rational]>),
}

impl PackedRow {
    fn pack(row: Row) -> PackedRow {
        let vars = row.entries.iter().map(|(j, _)| *j as u32).collect();
        let ints: Option<Box<[i64]>> = row.entries.iter().map(|(_, v)| v.to_i64()).collect();
        let values = match ints {
            Some(ints) => PackedValues::Int(ints),
            None => PackedValues::Rational(row.entries.into_iter().map(|(_, v)| v).collect()),
        };
        PackedRow {
            vars,
            values,
            constant: row.constant,
        }
    }

    fn unpack(&self) -> Row {
        let entries = match &self.values {
            PackedValues::Int(v) => self
                .vars
                .iter()
                .zip(v.iter())
                .map(|(j, x)| (*j as usize, Rational::from_int(*x)))
                .collect(),
            PackedValues::Rational(v) => self
                .vars
                .iter()
                .zip(v.iter())
                .map(|(j, x)| (*j as usize, x.clone()))
                .collect(),
        };
        Row {
            entries,
            constant: self.constant.clone(),
        }
    }

    fn sign(&self, i: usize) -> i32 {
        match &self.values {
            PackedValues::Int(v) => v[i].signum() as i32,
            PackedValues::Rational(v) => v[i].signum(),
        }
    }

    fn sign_of(&self, var: usize) -> Option<i32> {
        self.vars.binary_search(&(var as u32)).ok().map(|i| self.sign(i))
    }

    /// Positions and signs of the entries on unknowns.
    fn unknown_signs(&self, nu: usize) -> impl Iterator<Item = (usize, i32)> + '_ {
        self.vars
            .iter()
            .take_while(move |&&j| (j as usize) < nu)
            .enumerate()
            .map(|(i, &j)| (j as usize, self.sign(i)))
    }
}

fn row_hash(r: &PackedRow) -> u64 {
    let mut h = DefaultHasher::new();
    r.hash(&mut h);
    h.finish()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Ancestors(Vec<u64>);

impl Ancestors {
    fn single(i: usize, n: usize) -> Self {
        let mut bits = vec![0u64; n.div_ceil(64)];
        bits[i / 64] |= 1 << (i % 64);
        Ancestors(bits)
    }

    fn union(&self, other: &Ancestors) -> Ancestors {
        Ancestors(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn union_count(&self, other: &Ancestors) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }
}

/// Projects out every unknown and returns the canonical inequality set over
/// the data symbols.
pub fn eliminate_all(sys: &IneqSystem, opts: &EliminationOptions) -> Result<Elimination> {
    sys.check()?;
    let nu = sys.num_unknowns;
    let mut diag = Diagnostics {
        row_budget: opts.row_budget,
        ..Diagnostics::default()
    };

    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    for r in &sys.rows {
        let row = Row::from_dense(&r.coeffs.0, &r.constant);
        match r.relation {
            RowRelation::Eq => eqs.push(row),
            RowRelation::Ge => ineqs.push(row),
        }
    }

    // substitution through equalities
    let mut data_eqs = Vec::new();
    while let Some(e) = eqs.pop() {
        let Some((v, pv)) = e.entries.first().filter(|(j, _)| *j < nu).cloned() else {
            if !e.entries.is_empty() || !e.constant.is_zero() {
                data_eqs.push(e);
            }
            continue;
        };
        let inv = pv.recip();
        for row in eqs.iter_mut().chain(ineqs.iter_mut()) {
            if let Some(c) = row.get(v) {
                let f = -(c * &inv);
                *row = row.combine(&Rational::one(), &e, &f);
            }
        }
        diag.substituted += 1;
    }

    let n_orig = ineqs.len();
    let mut work: Vec<(PackedRow, Ancestors)> = Vec::new();
    let mut projected: Vec<Row> = Vec::new();
    for (i, mut r) in ineqs.into_iter().enumerate() {
        r.canonicalize();
        if r.has_unknowns(nu) {
            work.push((PackedRow::pack(r), Ancestors::single(i, n_orig)));
        } else if !r.is_trivial() {
            projected.push(r);
        }
    }
    diag.peak_rows = work.len() + projected.len();

    let mut complete = true;
    let mut step = 0;
    while !work.is_empty() {
        if work.len() + projected.len() > opts.row_budget {
            complete = false;
            break;
        }
        let mut pos = vec![0usize; nu];
        let mut neg = vec![0usize; nu];
        for (r, _) in &work {
            for (j, sign) in r.unknown_signs(nu) {
                if sign > 0 {
                    pos[j] += 1;
                } else {
                    neg[j] += 1;
                }
            }
        }
        let v = (0..nu)
            .filter(|&j| pos[j] + neg[j] > 0)
            .min_by_key(|&j| (pos[j] * neg[j], j))
            .expect("working rows contain unknowns");
        step += 1;

        let (mut plus, mut minus, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for (r, anc) in work {
            match r.sign_of(v) {
                Some(s) if s > 0 => plus.push((r.unpack(), anc)),
                Some(_) => minus.push((r.unpack(), anc)),
                None => rest.push((r, anc)),
            }
        }
        // rows are deduplicated through their hashes so that each row is stored once
        let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, (r, _)) in rest.iter().enumerate() {
            seen.entry(row_hash(r)).or_default().push(i);
        }
        let mut next = rest;
        let mut over_budget = false;
        'outer: for (p, pa) in &plus {
            let a = p.get(v).cloned().unwrap_or_default();
            for (n, na) in &minus {
                if pa.union_count(na) > step + 1 {
                    continue;
                }
                let b = n.get(v).cloned().unwrap_or_default();
                let mut r = p.combine(&-&b, n, &a);
                r.canonicalize();
                if r.is_trivial() {
                    continue;
                }
                let anc = pa.union(na);
                if !r.has_unknowns(nu) {
                    projected.push(r);
                    continue;
                }
                let r = PackedRow::pack(r);
                let bucket = seen.entry(row_hash(&r)).or_default();
                match bucket.iter().copied().find(|&i| next[i].0 == r) {
                    Some(i) => {
                        if anc.count() < next[i].1.count() {
                            next[i].1 = anc;
                        }
                    }
                    None => {
                        bucket.push(next.len());
                        next.push((r, anc));
                    }
                }
                if next.len() + projected.len() > opts.row_budget {
                    over_budget = true;
                    break 'outer;
                }
            }
        }
        diag.fm_steps = step;
        diag.peak_rows = diag.peak_rows.max(next.len() + projected.len());
        work = next;
        if over_budget {
            complete = false;
            break;
        }
    }
    diag.remaining_unknowns = {
        let mut live = vec![false; nu];
        for (r, _) in &work {
            for (j, _) in r.unknown_signs(nu) {
                live[j] = true;
            }
        }
        live.iter().filter(|&&b| b).count()
    };

    let nd = sys.data_symbols.len();
    let to_dense = |r: &Row| -> (Vec<Rational>, Rational) {
        let mut d = vec![Rational::zero(); nd];
        for (j, v) in &r.entries {
            d[j - nu] = v.clone();
        }
        (d, r.constant.clone())
    };
    let ineqs: Vec<(Vec<Rational>, Rational)> = projected.iter().map(to_dense).collect();
    let eqs: Vec<(Vec<Rational>, Rational)> = data_eqs.iter().map(to_dense).collect();

    let inequalities = if complete {
        canonical_projection(ineqs, eqs, &sys.data_symbols, opts.remove_redundant)?
    } else {
        let mut out: Vec<NcInequality> = ineqs
            .iter()
            .map(|(c, k)| to_inequality(c, k, &sys.data_symbols))
            .chain(eqs.iter().flat_map(|(c, k)| equality_pair(c, k, &sys.data_symbols)))
            .collect();
        out.sort();
        out.dedup();
        out
    };
    Ok(Elimination {
        inequalities,
        complete,
        diagnostics: diag,
    })
}

fn to_inequality(coeffs: &[Rational], constant: &Rational, symbols: &[DataKey]) -> NcInequality {
    let (coeffs, constant) = canonicalize_row(coeffs, constant);
    NcInequality::new(
        symbols.iter().cloned().zip(coeffs).filter(|(_, g)| !g.is_zero()),
        constant,
    )
}

fn equality_pair(coeffs: &[Rational], constant: &Rational, symbols: &[DataKey]) -> [NcInequality; 2] {
    let up = to_inequality(coeffs, constant, symbols);
    let down = up.scaled(&-Rational::one());
    [up, down]
}

fn data_lp(rows: &[&(Vec<Rational>, Rational)], eqs: &[(Vec<Rational>, Rational)], nd: usize) -> LinearProgram {
    let mut lp = LinearProgram::with_free_vars(nd);
    for (c, k) in rows {
        lp.add_row(c.clone(), Relation::Ge, -k);
    }
    for (c, k) in eqs {
        lp.add_row(c.clone(), Relation::Eq, -k);
    }
    lp
}

/// Implicit-equality detection, reduction modulo equalities and optional
/// redundancy removal over the data symbols.
fn canonical_projection(
    ineqs: Vec<(Vec<Rational>, Rational)>,
    mut eqs: Vec<(Vec<Rational>, Rational)>,
    symbols: &[DataKey],
    remove_redundant: bool,
) -> Result<Vec<NcInequality>> {
    let nd = symbols.len();
    let mut ineqs = dedup_rows(ineqs);

    // an inequality whose maximum over the projection is zero holds with equality
    let mut strict = Vec::new();
    for i in 0..ineqs.len() {
        let others: Vec<&(Vec<Rational>, Rational)> = ineqs.iter().collect();
        let mut lp = data_lp(&others, &eqs, nd);
        lp.set_objective(Sense::Maximize, ineqs[i].0.clone());
        match lp.solve() {
            GeneralOutcome::Infeasible => {
                return Err(Error::Inconsistent(
                    "no data table satisfies the projected system".into(),
                ))
            }
            GeneralOutcome::Optimal { value, .. } if (&value + &ineqs[i].1).is_zero() => eqs.push(ineqs[i].clone()),
            _ => strict.push(i),
        }
    }
    ineqs = strict.into_iter().map(|i| ineqs[i].clone()).collect();

    // reduced row echelon form of the equalities, constant column last
    let mut rows: Vec<Vec<Rational>> = eqs
        .iter()
        .map(|(c, k)| c.iter().cloned().chain(std::iter::once(k.clone())).collect())
        .collect();
    let pivots = rref_in_place(&mut rows, nd + 1);
    if pivots.contains(&nd) {
        return Err(Error::Inconsistent("data equalities are contradictory".into()));
    }
    let eq_rows: Vec<(Vec<Rational>, Rational)> = rows
        .into_iter()
        .take(pivots.len())
        .map(|mut r| {
            let k = r.pop().unwrap_or_default();
            (r, k)
        })
        .collect();

    for (c, k) in ineqs.iter_mut() {
        for (&p, (ec, ek)) in pivots.iter().zip(&eq_rows) {
            if c[p].is_zero() {
                continue;
            }
            let f = c[p].clone();
            for (v, w) in c.iter_mut().zip(ec) {
                if !w.is_zero() {
                    *v -= &f * w;
                }
            }
            *k -= &f * ek;
        }
    }
    let mut ineqs = dedup_rows(ineqs);

    if remove_redundant {
        let mut keep = vec![true; ineqs.len()];
        for i in 0..ineqs.len() {
            let others: Vec<&(Vec<Rational>, Rational)> = ineqs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && keep[j])
                .map(|(_, r)| r)
                .collect();
            let mut lp = data_lp(&others, &[], nd);
            lp.set_objective(Sense::Minimize, ineqs[i].0.clone());
            if let GeneralOutcome::Optimal { value, .. } = lp.solve() {
                if !(&value + &ineqs[i].1).is_negative() {
                    keep[i] = false;
                }
            }
        }
        let mut k = keep.into_iter();
        ineqs.retain(|_| k.next().unwrap_or(false));
    }

    let mut out: Vec<NcInequality> = ineqs
        .iter()
        .map(|(c, k)| to_inequality(c, k, symbols))
        .chain(eq_rows.iter().flat_map(|(c, k)| equality_pair(c, k, symbols)))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn dedup_rows(rows: Vec<(Vec<Rational>, Rational)>) -> Vec<(Vec<Rational>, Rational)> {
    let mut out: Vec<(Vec<Rational>, Rational)> = rows
        .into_iter()
        .map(|(c, k)| canonicalize_row(&c, &k))
        .filter(|(c, k)| c.iter().any(|v| !v.is_zero()) || k.is_negative())
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Maps inequalities over flag-convexified probabilities `p(k s̄|t)` to the
/// original scenario: coefficients unchanged, constant multiplied by `N`.
pub fn to_original(ineqs: &[NcInequality], num_states: usize) -> Vec<NcInequality> {
    let n = Rational::from(num_states);
    ineqs
        .iter()
        .map(|q| NcInequality {
            coeffs: q.coeffs.clone(),
            constant: &q.constant * &n,
        })
        .collect()
}

/// Canonical forms, sorted and without duplicates.
pub fn canonical_set(ineqs: &[NcInequality]) -> Vec<NcInequality> {
    let mut out: Vec<NcInequality> = ineqs.iter().map(NcInequality::canonical).collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use proptest::prelude::*;

    fn row(coeffs: &[i64], constant: i64, relation: RowRelation) -> SystemRow {
        SystemRow {
            coeffs: RationalVector::from_ints(coeffs),
            constant: Rational::from_int(constant),
            relation,
        }
    }

    #[test]
    fn packed_rows_round_trip() {
        let ints = Row::from_dense(&[rat!(0), rat!(3), rat!(-2)], &rat!(5));
        let packed = PackedRow::pack(ints.clone());
        assert!(matches!(packed.values, PackedValues::Int(_)));
        assert_eq!(packed.sign_of(2), Some(-1));
        assert_eq!(packed.sign_of(0), None);
        assert_eq!(packed.unpack(), ints);

        let big = Rational::from_int(i64::MAX) * Rational::from_int(4);
        let mixed = Row::from_dense(&[rat!(1, 2), big], &rat!(0));
        let packed = PackedRow::pack(mixed.clone());
        assert!(matches!(packed.values, PackedValues::Rational(_)));
        assert_eq!(packed.unknown_signs(1).collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(packed.unpack(), mixed);
    }

    fn keys(n: usize) -> Vec<DataKey> {
        (0..n).map(|i| DataKey::new("k", format!("s{i}"), "t")).collect()
    }

    #[test]
    fn bounded_single_variable_leaves_nothing() {
        // x ≥ 0, 1 − x ≥ 0
        let sys = IneqSystem {
            num_unknowns: 1,
            data_symbols: vec![],
            rows: vec![row(&[1], 0, RowRelation::Ge), row(&[-1], 1, RowRelation::Ge)],
        };
        let e = eliminate_all(&sys, &EliminationOptions::default()).unwrap();
        assert!(e.complete);
        assert!(e.inequalities.is_empty());
    }

    #[test]
    fn interval_projection() {
        // p = x + y with x, y ≥ 0 and x + y ≤ 1 projects to 0 ≤ p ≤ 1
        let sys = IneqSystem {
            num_unknowns: 2,
            data_symbols: keys(1),
            rows: vec![
                row(&[1, 0, 0], 0, RowRelation::Ge),
                row(&[0, 1, 0], 0, RowRelation::Ge),
                row(&[-1, -1, 0], 1, RowRelation::Ge),
                row(&[1, 1, -1], 0, RowRelation::Eq),
            ],
        };
        let e = eliminate_all(&sys, &EliminationOptions::default()).unwrap();
        let k = &keys(1)[0];
        assert_eq!(
            e.inequalities,
            canonical_set(&[
                NcInequality::new([(k.clone(), rat!(1))], rat!(0)),
                NcInequality::new([(k.clone(), rat!(-1))], rat!(1)),
            ])
        );
    }

    #[test]
    fn simplex_projection_with_equality() {
        // p0 = x0, p1 = x1, p2 = x2 on the standard simplex
        let mut rows = vec![];
        for j in 0..3 {
            let mut c = vec![0; 6];
            c[j] = 1;
            rows.push(row(&c, 0, RowRelation::Ge));
            c[3 + j] = -1;
            rows.push(row(&c, 0, RowRelation::Eq));
        }
        rows.push(row(&[1, 1, 1, 0, 0, 0], -1, RowRelation::Eq));
        let sys = IneqSystem {
            num_unknowns: 3,
            data_symbols: keys(3),
            rows,
        };
        let e = eliminate_all(&sys, &EliminationOptions::default()).unwrap();
        // p0 + p1 + p2 = 1 as a pair and p1, p2 ≥ 0, p1 + p2 ≤ 1 after eliminating p0
        assert_eq!(e.inequalities.len(), 5);
        let at = |p: [i64; 3]| {
            let data = crate::fragment::DataTable::new(
                keys(3)
                    .into_iter()
                    .zip(p)
                    .map(|(k, v)| crate::fragment::DataEntry {
                        k: k.k,
                        s: k.s,
                        t: k.t,
                        p: Rational::from_int(v),
                    })
                    .collect(),
            )
            .unwrap();
            e.inequalities
                .iter()
                .all(|q| crate::feasibility::evaluate(q, &data).unwrap().satisfied)
        };
        assert!(at([1, 0, 0]));
        assert!(at([0, 0, 1]));
        assert!(!at([1, 1, -1]));
        assert!(!at([0, 0, 0]));
    }

    #[test]
    fn budget_is_reported() {
        let mut rows = vec![];
        for i in 0..4 {
            let mut c = vec![0; 4];
            c[i] = 1;
            rows.push(row(&c, 0, RowRelation::Ge));
            c[i] = -1;
            rows.push(row(&c, 1, RowRelation::Ge));
        }
        let sys = IneqSystem {
            num_unknowns: 4,
            data_symbols: vec![],
            rows,
        };
        let opts = EliminationOptions {
            row_budget: 2,
            remove_redundant: true,
        };
        let e = eliminate_all(&sys, &opts).unwrap();
        assert!(!e.complete);
        assert!(matches!(
            e.require_complete(),
            Err(Error::BudgetExceeded { budget: 2, .. })
        ));
    }

    #[test]
    fn to_original_scales_constant() {
        let k = DataKey::new("0", "a", "t");
        let q = NcInequality::new([(k.clone(), rat!(2))], rat!(-1, 3));
        assert_eq!(to_original(std::slice::from_ref(&q), 6)[0].constant, rat!(-2));
        assert_eq!(to_original(std::slice::from_ref(&q), 1), vec![q]);
        let z = NcInequality::new([(k, rat!(1))], rat!(0));
        assert_eq!(to_original(std::slice::from_ref(&z), 6), vec![z]);
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(
            nums in proptest::collection::vec(-50i64..50, 1..6),
            dens in proptest::collection::vec(1i64..12, 6),
            constant in -20i64..20,
        ) {
            let coeffs: Vec<Rational> = nums.iter().zip(&dens).map(|(&n, &d)| Rational::new(n, d)).collect();
            let once = canonicalize_row(&coeffs, &Rational::from_int(constant));
            let twice = canonicalize_row(&once.0, &once.1);
            prop_assert_eq!(&once, &twice);
            // direction preserved
            for (a, b) in coeffs.iter().zip(&once.0) {
                prop_assert_eq!(a.signum(), b.signum());
            }
        }
    }
}
