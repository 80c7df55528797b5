//! Dense exact linear algebra over [`Rational`].
//!
//! Everything here is Gauss-Jordan elimination in one form or another:
//! reduced row echelon form, rank, kernel bases and particular solutions of
//! `m·x = b`. Kernel bases are returned in a canonical integer scaling so
//! that downstream identity sets are reproducible.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{integer_scale, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalVector(pub Vec<Rational>);

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RationalVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RationalVector(vec![Rational::zero(); dim])
    }

    pub fn from_ints(values: &[i64]) -> Self {
        RationalVector(values.iter().map(|&v| Rational::from_int(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn dot(&self, other: &RationalVector) -> Rational {
        dot(&self.0, &other.0)
    }

    pub fn scale(&self, factor: &Rational) -> RationalVector {
        RationalVector(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn add(&self, other: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Scales to coprime integers with the first nonzero entry positive.
    pub fn canonical_integer(&self) -> RationalVector {
        let Some(mut factor) = integer_scale(&self.0) else {
            return self.clone();
        };
        if self.0.iter().find(|v| !v.is_zero()).is_some_and(Rational::is_negative) {
            factor = -factor;
        }
        self.scale(&factor)
    }
}

impl Index<usize> for RationalVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl IndexMut<usize> for RationalVector {
    fn index_mut(&mut self, i: usize) -> &mut Rational {
        &mut self.0[i]
    }
}

impl FromIterator<Rational> for RationalVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RationalVector(iter.into_iter().collect())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_int(v)).collect())
                .collect(),
        )
        .expect("ragged literal")
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[RationalVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, RationalVector::dim);
        if columns.iter().any(|c| c.dim() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = col[i].clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> RationalVector {
        RationalVector(self.row(i).to_vec())
    }

    pub fn column(&self, j: usize) -> RationalVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &RationalVector) -> Result<RationalVector> {
        if v.dim() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), &v.0)).collect())
    }

    /// Row vector times matrix, `y·m`.
    pub fn left_mul_vec(&self, y: &RationalVector) -> Result<RationalVector> {
        if y.dim() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} times {}x{} matrix",
                y.dim(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                if !a.is_zero() {
                    *o += yi * a;
                }
            }
        }
        Ok(RationalVector(out))
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Column-stacked vectorization.
    pub fn vectorize(&self) -> RationalVector {
        (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|ij| self[ij].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for RationalMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Rational>>::deserialize(deserializer)?;
        RationalMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Reduced row echelon form and the pivot column of each nonzero row.
pub fn rref(m: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let mut rows = m.to_rows();
    let pivots = rref_in_place(&mut rows, m.cols());
    (
        RationalMatrix::from_rows(rows).unwrap_or_else(|_| RationalMatrix::zeros(m.rows(), m.cols())),
        pivots,
    )
}

/// Gauss-Jordan on a list of rows, considering only the first `ncols`
/// columns as pivot candidates. Trailing columns (augmented right-hand
/// sides) are carried along.
pub(crate) fn rref_in_place(rows: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for v in rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = rows[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel, one vector per free column of the RREF,
/// each scaled to coprime integers with a positive leading entry.
pub fn kernel_basis(m: &RationalMatrix) -> Vec<RationalVector> {
    let (r, pivots) = rref(m);
    let n = m.cols();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = RationalVector::zeros(n);
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&r[(i, f)];
            }
            v.canonical_integer()
        })
        .collect()
}

/// Some exact solution of `m·x = b`, or `None` when the system is inconsistent.
pub fn solve_linear(m: &RationalMatrix, b: &RationalVector) -> Result<Option<RationalVector>> {
    if m.rows() != b.dim() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but right-hand side has {} entries",
            m.rows(),
            b.dim()
        )));
    }
    let n = m.cols();
    let mut rows: Vec<Vec<Rational>> = (0..m.rows())
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.push(b[i].clone());
            row
        })
        .collect();
    let pivots = rref_in_place(&mut rows, n);
    if rows[pivots.len()..].iter().any(|row| !row[n].is_zero()) {
        return Ok(None);
    }
    let mut x = RationalVector::zeros(n);
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = rows[i][n].clone();
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bloch_states() -> RationalMatrix {
        // columns: +, -, +y, -y, 0, 1 in the (1, X, Y, Z) basis
        RationalMatrix::from_int_rows(&[
            &[1, 1, 1, 1, 1, 1],
            &[1, -1, 0, 0, 0, 0],
            &[0, 0, 1, -1, 0, 0],
            &[0, 0, 0, 0, 1, -1],
        ])
    }

    #[test]
    fn rref_identity() {
        let (r, p) = rref(&RationalMatrix::identity(2));
        assert_eq!(r, RationalMatrix::identity(2));
        assert_eq!(p, vec![0, 1]);
    }

    #[test]
    fn rref_proportional_rows() {
        let (r, p) = rref(&RationalMatrix::from_int_rows(&[&[1, 1], &[2, 2]]));
        assert_eq!(r, RationalMatrix::from_int_rows(&[&[1, 1], &[0, 0]]));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn stabilizer_state_matrix_rank() {
        assert_eq!(bloch_states().rank(), 4);
    }

    #[test]
    fn kernel_of_full_rank_is_empty() {
        assert!(kernel_basis(&RationalMatrix::identity(2)).is_empty());
    }

    #[test]
    fn kernel_of_sum_row() {
        let k = kernel_basis(&RationalMatrix::from_int_rows(&[&[1, 1]]));
        assert_eq!(k, vec![RationalVector::from_ints(&[1, -1])]);
    }

    #[test]
    fn kernel_of_stabilizer_states() {
        let m = bloch_states();
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 2);
        let expected = [
            RationalVector::from_ints(&[1, 1, -1, -1, 0, 0]),
            RationalVector::from_ints(&[1, 1, 0, 0, -1, -1]),
        ];
        // same span: stacking both sets does not raise the rank
        let mut all = k.clone();
        all.extend(expected.iter().cloned());
        assert_eq!(RationalMatrix::from_columns(&all).unwrap().rank(), 2);
        for v in &k {
            assert!(m.mul_vec(v).unwrap().is_zero());
        }
    }

    #[test]
    fn solve_identity() {
        let b = RationalVector::from_ints(&[3, -4]);
        let x = solve_linear(&RationalMatrix::identity(2), &b).unwrap().unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solve_underdetermined() {
        let m = RationalMatrix::from_int_rows(&[&[1, 1]]);
        let b = RationalVector::from_ints(&[1]);
        let x = solve_linear(&m, &b).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), b);
    }

    #[test]
    fn solve_inconsistent() {
        let m = RationalMatrix::from_int_rows(&[&[1], &[1]]);
        let b = RationalVector::from_ints(&[0, 1]);
        assert!(solve_linear(&m, &b).unwrap().is_none());
    }

    #[test]
    fn solve_dimension_mismatch() {
        let m = RationalMatrix::identity(2);
        assert!(solve_linear(&m, &RationalVector::from_ints(&[1])).is_err());
    }

    #[test]
    fn matrix_json_is_nested_strings() {
        let m = RationalMatrix::from_rows(vec![vec![Rational::new(1, 2), Rational::from_int(3)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"[["1/2","3"]]"#);
        assert_eq!(serde_json::from_str::<RationalMatrix>(&s).unwrap(), m);
    }

    fn arb_matrix() -> impl Strategy<Value = RationalMatrix> {
        (1usize..5, 1usize..7).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..4, r * c).prop_map(move |vals| {
                let rows = vals
                    .chunks(c)
                    .map(|ch| ch.iter().map(|&v| Rational::from_int(v)).collect())
                    .collect();
                RationalMatrix::from_rows(rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn kernel_vectors_annihilate(m in arb_matrix()) {
            let k = kernel_basis(&m);
            for v in &k {
                prop_assert!(m.mul_vec(v).unwrap().is_zero());
                prop_assert_eq!(v, &v.canonical_integer());
            }
            prop_assert_eq!(m.rank() + k.len(), m.cols());
            prop_assert_eq!(kernel_basis(&m), k);
        }

        #[test]
        fn solve_reproduces_rhs(m in arb_matrix(), seed in proptest::collection::vec(-3i64..4, 7)) {
            let x0: RationalVector = seed[..m.cols()].iter().map(|&v| Rational::from_int(v)).collect();
            let b = m.mul_vec(&x0).unwrap();
            let x = solve_linear(&m, &b).unwrap().unwrap();
            prop_assert_eq!(m.mul_vec(&x).unwrap(), b);
        }
    }
}
