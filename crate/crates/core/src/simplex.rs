//! Exact two-phase tableau simplex.
//!
//! [`solve_standard`] handles `min c·x  s.t.  A·x = b, x ≥ 0` and always
//! returns a certificate: optimal duals, a Farkas ray for infeasibility, or
//! an unbounded verdict. Pricing is Dantzig's most-negative reduced cost
//! until a run of degenerate pivots is seen, after which Bland's
//! smallest-index rule takes over for the remainder of the solve, which
//! rules out cycling.
//!
//! [`LinearProgram`] is a small front end that accepts free variables and
//! `≤`/`≥` rows and lowers them to standard form.

use crate::linalg::{dot, RationalMatrix};
use crate::rational::Rational;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Debug)]
pub enum LpOutcome {
    /// `duals` satisfy `duals·A_j ≤ c_j` for every column and `duals·b = value`.
    Optimal {
        x: Vec<Rational>,
        value: Rational,
        duals: Vec<Rational>,
    },
    /// `ray·A ≤ 0` componentwise and `ray·b > 0`.
    Infeasible {
        ray: Vec<Rational>,
    },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// reduced costs, last entry holds minus the objective value
    obj: Vec<Rational>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
    bland: bool,
    degenerate_run: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.n + self.m]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<Rational>| {
            if row[c].is_zero() {
                return;
            }
            let f = row[c].clone();
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    fn entering(&self, allowed: usize) -> Option<usize> {
        if self.bland {
            (0..allowed).find(|&j| self.obj[j].is_negative())
        } else {
            let mut best: Option<usize> = None;
            for j in 0..allowed {
                if self.obj[j].is_negative() && best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for r in 0..self.m {
            let a = &self.rows[r][c];
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs(r) / a;
            let better = match &best {
                None => true,
                Some((br, bratio)) => ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br]),
            };
            if better {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    /// Runs simplex iterations over columns `0..allowed`. Returns false on unboundedness.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = self.entering(allowed) else {
                return true;
            };
            let Some(r) = self.leaving(c) else {
                return false;
            };
            if self.rhs(r).is_zero() {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_STREAK {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }

    fn reset_objective(&mut self, costs: &[Rational]) {
        let w = self.width();
        let mut obj = vec![Rational::zero(); w];
        obj[..costs.len()].clone_from_slice(costs);
        for r in 0..self.m {
            let cb = &costs[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (o, t) in obj.iter_mut().zip(&self.rows[r]) {
                if !t.is_zero() {
                    *o -= cb * t;
                }
            }
        }
        self.obj = obj;
    }

    /// Simplex multipliers `c_B·B⁻¹` in the sign-normalized row space,
    /// read off the artificial columns of the reduced-cost row.
    fn multipliers(&self, costs: &[Rational]) -> Vec<Rational> {
        (0..self.m)
            .map(|k| &costs[self.n + k] - &self.obj[self.n + k])
            .collect()
    }
}

/// Indices of a maximal linearly independent subset of the rows of `[a | b]`,
/// chosen greedily in row order.
fn independent_rows(a: &RationalMatrix, b: &[Rational]) -> Vec<usize> {
    let n = a.cols();
    // echelon rows with their pivot column, each normalized to 1 at the pivot
    // and zero at every earlier pivot
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut kept = Vec::new();
    for (i, bi) in b.iter().enumerate().take(a.rows()) {
        let mut row: Vec<Rational> = a.row(i).to_vec();
        row.push(bi.clone());
        for (p, brow) in &basis {
            if row[*p].is_zero() {
                continue;
            }
            let f = row[*p].clone();
            for (v, w) in row.iter_mut().zip(brow) {
                if !w.is_zero() {
                    *v -= &f * w;
                }
            }
        }
        if let Some(p) = row.iter().position(|v| !v.is_zero()) {
            let inv = row[p].recip();
            for v in row.iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            debug_assert!(p <= n);
            basis.push((p, row));
            kept.push(i);
        }
    }
    kept
}

/// Solves `min c·x  s.t.  a·x = b, x ≥ 0` exactly.
///
/// Rows implied by others are dropped before pivoting; multipliers for them
/// are reported as zero, so the certificates refer to the full system.
pub fn solve_standard(a: &RationalMatrix, b: &[Rational], c: &[Rational]) -> LpOutcome {
    assert_eq!(b.len(), a.rows(), "rhs length");
    assert_eq!(c.len(), a.cols(), "cost length");
    let kept = independent_rows(a, b);
    if kept.len() == a.rows() {
        return solve_tableau(a, b, c);
    }
    let mut sub = RationalMatrix::zeros(kept.len(), a.cols());
    for (r, &i) in kept.iter().enumerate() {
        for (j, v) in a.row(i).iter().enumerate() {
            if !v.is_zero() {
                sub[(r, j)] = v.clone();
            }
        }
    }
    let sub_b: Vec<Rational> = kept.iter().map(|&i| b[i].clone()).collect();
    let expand = |y: Vec<Rational>| {
        let mut full = vec![Rational::zero(); a.rows()];
        for (v, &i) in y.into_iter().zip(&kept) {
            full[i] = v;
        }
        full
    };
    match solve_tableau(&sub, &sub_b, c) {
        LpOutcome::Optimal { x, value, duals } => LpOutcome::Optimal {
            x,
            value,
            duals: expand(duals),
        },
        LpOutcome::Infeasible { ray } => LpOutcome::Infeasible { ray: expand(ray) },
        LpOutcome::Unbounded => LpOutcome::Unbounded,
    }
}

fn solve_tableau(a: &RationalMatrix, b: &[Rational], c: &[Rational]) -> LpOutcome {
    let (m, n) = (a.rows(), a.cols());

    let flip: Vec<bool> = b.iter().map(Rational::is_negative).collect();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(n + m + 1);
        for v in a.row(i) {
            row.push(if flip[i] { -v } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rational::one() } else { Rational::zero() });
        }
        row.push(b[i].abs());
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis: (n..n + m).collect(),
        n,
        m,
        bland: false,
        degenerate_run: 0,
    };

    // phase 1: minimize the sum of artificials
    let mut phase1 = vec![Rational::zero(); n + m];
    for v in &mut phase1[n..] {
        *v = Rational::one();
    }
    t.reset_objective(&phase1);
    let bounded = t.optimize(n);
    debug_assert!(bounded, "phase 1 is bounded below by zero");
    let infeasibility = -&t.obj[n + m];
    if infeasibility.is_positive() {
        let y = t.multipliers(&phase1);
        let ray = y.into_iter().zip(&flip).map(|(v, &f)| if f { -v } else { v }).collect();
        return LpOutcome::Infeasible { ray };
    }

    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }

    // phase 2
    let mut costs = c.to_vec();
    costs.extend(std::iter::repeat_n(Rational::zero(), m));
    t.reset_objective(&costs);
    t.bland = false;
    t.degenerate_run = 0;
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![Rational::zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).clone();
        }
    }
    let value = dot(c, &x);
    let duals = t
        .multipliers(&costs)
        .into_iter()
        .zip(&flip)
        .map(|(v, &f)| if f { -v } else { v })
        .collect();
    LpOutcome::Optimal { x, value, duals }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// General-form LP builder.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    free: Vec<bool>,
    rows: Vec<(Vec<Rational>, Relation, Rational)>,
    objective: Vec<Rational>,
    sense: Sense,
}

#[derive(Clone, Debug)]
pub enum GeneralOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    /// All variables nonnegative unless marked free.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            free: vec![false; num_vars],
            rows: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
            sense: Sense::Minimize,
        }
    }

    pub fn with_free_vars(num_vars: usize) -> Self {
        let mut lp = Self::new(num_vars);
        lp.free = vec![true; num_vars];
        lp
    }

    pub fn set_free(&mut self, var: usize, free: bool) {
        self.free[var] = free;
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, rel: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push((coeffs, rel, rhs));
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<Rational>) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.sense = sense;
        self.objective = coeffs;
    }

    pub fn solve(&self) -> GeneralOutcome {
        // column layout: one column per variable, a negative twin per free
        // variable, then one slack per inequality row
        let mut col_of = Vec::with_capacity(self.num_vars);
        let mut ncols = 0;
        for &f in &self.free {
            col_of.push((ncols, f.then_some(ncols + 1)));
            ncols += if f { 2 } else { 1 };
        }
        let nslack = self.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let total = ncols + nslack;
        let mut a = RationalMatrix::zeros(self.rows.len(), total);
        let mut b = Vec::with_capacity(self.rows.len());
        let mut slack = ncols;
        for (i, (coeffs, rel, rhs)) in self.rows.iter().enumerate() {
            for (v, coef) in coeffs.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let (pos, neg) = col_of[v];
                a[(i, pos)] = coef.clone();
                if let Some(neg) = neg {
                    a[(i, neg)] = -coef;
                }
            }
            match rel {
                Relation::Eq => {}
                Relation::Ge => {
                    a[(i, slack)] = -Rational::one();
                    slack += 1;
                }
                Relation::Le => {
                    a[(i, slack)] = Rational::one();
                    slack += 1;
                }
            }
            b.push(rhs.clone());
        }
        let mut c = vec![Rational::zero(); total];
        for (v, coef) in self.objective.iter().enumerate() {
            let coef = match self.sense {
                Sense::Minimize => coef.clone(),
                Sense::Maximize => -coef,
            };
            let (pos, neg) = col_of[v];
            if let Some(neg) = neg {
                c[neg] = -&coef;
            }
            c[pos] = coef;
        }
        match solve_standard(&a, &b, &c) {
            LpOutcome::Infeasible { .. } => GeneralOutcome::Infeasible,
            LpOutcome::Unbounded => GeneralOutcome::Unbounded,
            LpOutcome::Optimal { x: xs, .. } => {
                let x: Vec<Rational> = col_of
                    .iter()
                    .map(|&(pos, neg)| match neg {
                        Some(neg) => &xs[pos] - &xs[neg],
                        None => xs[pos].clone(),
                    })
                    .collect();
                let value = dot(&self.objective, &x);
                GeneralOutcome::Optimal { x, value }
            }
        }
    }
}
