//! Seeded random data tables for cross-checking inequality sets against
//! the feasibility oracle.
//!
//! Classical tables come from the classical data polytope itself: a random
//! linear functional on the data is minimized over the program polytope,
//! which lands on a boundary point, and a few such points are mixed.
//! Tables outside the polytope are produced by extrapolating between
//! classical points, and tables close to its boundary by bisecting between
//! the centroid and such an extrapolation. All of these are affine
//! combinations, so every linear equality the classical tables obey is
//! preserved and only the inequalities decide the verdict.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{certify, NcInequality, ProgramSkeleton};
use crate::fragment::{DataEntry, DataKey, DataTable};
use crate::linalg::{RationalMatrix, RationalVector};
use crate::rational::Rational;
use crate::simplex::{solve_standard, LpOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// convex mixture of boundary points
    Classical,
    /// minimizer of a random data functional
    Boundary,
    /// extrapolation beyond one classical point away from another
    Extrapolated,
    /// a few bisection steps between the centroid and an extrapolation
    NearBoundary,
    /// independent uniform entries on a grid
    Unstructured,
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub kind: SampleKind,
    pub table: DataTable,
}

/// Data table `p = M_data·x` implied by a solution of the structural rows.
pub fn table_from_point(sk: &ProgramSkeleton, x: &RationalVector) -> Result<DataTable> {
    let rows = sk.data_row_of();
    let entries = sk
        .data_keys()
        .into_iter()
        .map(|key| {
            let i = rows[&key];
            let p = crate::linalg::dot(sk.matrix.row(i), &x.0);
            DataEntry {
                k: key.k,
                s: key.s,
                t: key.t,
                p,
            }
        })
        .collect();
    DataTable::new(entries)
}

/// Structural rows plus one normalization row `Σ_{k∈m} p(k|s,t) = 1` per
/// measurement `m`, state and transformation.
fn classical_lp(sk: &ProgramSkeleton, measurements: &[Vec<String>]) -> Result<(RationalMatrix, Vec<Rational>)> {
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut b = Vec::new();
    for i in (0..sk.num_rows()).filter(|&i| !sk.row_tags[i].is_data()) {
        rows.push(sk.matrix.row(i).to_vec());
        b.push(sk.constants[i].clone().unwrap_or_default());
    }
    let data_rows = sk.data_row_of();
    for m in measurements {
        for s in &sk.state_ids {
            for t in &sk.transformation_ids {
                let mut row = vec![Rational::zero(); sk.num_cols()];
                for k in m {
                    let key = DataKey::new(k, s, t);
                    let i = *data_rows
                        .get(&key)
                        .ok_or_else(|| Error::IndexMismatch(format!("{key} is not a data entry of the scenario")))?;
                    for (r, v) in row.iter_mut().zip(sk.matrix.row(i)) {
                        *r += v;
                    }
                }
                rows.push(row);
                b.push(Rational::one());
            }
        }
    }
    Ok((RationalMatrix::from_rows(rows)?, b))
}

/// Point minimizing a random integer functional of the data.
fn boundary_point(
    sk: &ProgramSkeleton,
    a: &RationalMatrix,
    b: &[Rational],
    rng: &mut impl Rng,
) -> Result<RationalVector> {
    let gamma = NcInequality::new(
        sk.data_keys()
            .into_iter()
            .map(|k| (k, Rational::from_int(rng.gen_range(-5..=5)))),
        Rational::zero(),
    );
    let rows = sk.data_row_of();
    let mut c = vec![Rational::zero(); sk.num_cols()];
    for (key, g) in &gamma.coeffs {
        for (cj, m) in c.iter_mut().zip(sk.matrix.row(rows[key])) {
            if !m.is_zero() {
                *cj += g * m;
            }
        }
    }
    match solve_standard(a, b, &c) {
        LpOutcome::Optimal { x, .. } => Ok(RationalVector(x)),
        _ => Err(Error::Inconsistent("the classical program has no solution".into())),
    }
}

fn random_weights(n: usize, rng: &mut impl Rng) -> Vec<Rational> {
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=8)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| Rational::new(w, total)).collect()
}

/// `q + λ(p − q)` for a boundary point `p`, a random classical mixture `q`
/// and `λ ∈ (1, 3]`, pulled back toward `p` until all entries lie in [0, 1].
fn extrapolate(
    sk: &ProgramSkeleton,
    a: &RationalMatrix,
    b: &[Rational],
    boundary: &[DataTable],
    mix_of: &impl Fn(&[DataTable], &[Rational]) -> Result<DataTable>,
    rng: &mut impl Rng,
) -> Result<DataTable> {
    let p = table_from_point(sk, &boundary_point(sk, a, b, rng)?)?;
    let q = mix_of(boundary, &random_weights(boundary.len(), rng))?;
    let mut lambda = Rational::new(rng.gen_range(9..=24), 8);
    for _ in 0..8 {
        let t = q.mix(&p, &lambda)?;
        if in_range(&t) {
            return Ok(t);
        }
        lambda = (lambda + Rational::one()) * Rational::new(1, 2);
    }
    Ok(p)
}

fn in_range(t: &DataTable) -> bool {
    t.entries().iter().all(|e| !e.p.is_negative() && e.p <= Rational::one())
}

/// `count` normalized tables cycling through every [`SampleKind`],
/// deterministic in the generator state. `measurements` lists effect ids
/// per measurement.
pub fn sample_tables(
    sk: &ProgramSkeleton,
    measurements: &[Vec<String>],
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Sample>> {
    let (a, b) = classical_lp(sk, measurements)?;
    let mut boundary = Vec::new();
    for _ in 0..4 {
        boundary.push(table_from_point(sk, &boundary_point(sk, &a, &b, rng)?)?);
    }
    let mix_of = |tables: &[DataTable], w: &[Rational]| -> Result<DataTable> {
        let mut acc = tables[0].clone();
        let mut mass = w[0].clone();
        for (t, wi) in tables.iter().zip(w).skip(1) {
            mass += wi;
            acc = acc.mix(t, &(wi / &mass))?;
        }
        Ok(acc)
    };
    let centroid = mix_of(
        &boundary,
        &vec![Rational::new(1, boundary.len() as i64); boundary.len()],
    )?;

    let kinds = [
        SampleKind::Classical,
        SampleKind::Boundary,
        SampleKind::Extrapolated,
        SampleKind::NearBoundary,
        SampleKind::Unstructured,
    ];
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let kind = kinds[i % kinds.len()];
        let table = match kind {
            SampleKind::Classical => {
                let pts: Vec<DataTable> = (0..3)
                    .map(|_| table_from_point(sk, &boundary_point(sk, &a, &b, rng)?))
                    .collect::<Result<_>>()?;
                mix_of(&pts, &random_weights(3, rng))?
            }
            SampleKind::Boundary => table_from_point(sk, &boundary_point(sk, &a, &b, rng)?)?,
            SampleKind::Extrapolated => extrapolate(sk, &a, &b, &boundary, &mix_of, rng)?,
            SampleKind::NearBoundary => {
                let far = extrapolate(sk, &a, &b, &boundary, &mix_of, rng)?;
                let (mut inside, mut outside) = (Rational::zero(), Rational::one());
                let mut last = far.clone();
                if !certify(&sk.with_data(&far)?)?.is_feasible() {
                    for _ in 0..rng.gen_range(3..=8) {
                        let mid = (&inside + &outside) * Rational::new(1, 2);
                        last = centroid.mix(&far, &mid)?;
                        if certify(&sk.with_data(&last)?)?.is_feasible() {
                            inside = mid;
                        } else {
                            outside = mid;
                        }
                    }
                }
                last
            }
            SampleKind::Unstructured => {
                let mut table = centroid.clone();
                for m in measurements {
                    for st in &sk.state_ids {
                        for t in &sk.transformation_ids {
                            let w: Vec<i64> = (0..m.len()).map(|_| rng.gen_range(0..=6)).collect();
                            let total: i64 = w.iter().sum();
                            for (k, wk) in m.iter().zip(&w) {
                                let p = if total == 0 {
                                    Rational::new(1, m.len() as i64)
                                } else {
                                    Rational::new(*wk, total)
                                };
                                table.set(&DataKey::new(k, st, t), p)?;
                            }
                        }
                    }
                }
                table
            }
        };
        out.push(Sample { kind, table });
    }
    Ok(out)
}
