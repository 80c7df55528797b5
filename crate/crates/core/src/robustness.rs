//! Noise robustness of a nonclassicality verdict.
//!
//! Along `(1 − r)·data + r·target` the set of feasible `r` is an interval
//! containing 1, because the feasible data tables form a convex set. The
//! threshold is bracketed by exact bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{certify, ProgramSkeleton};
use crate::fragment::DataTable;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub r: Rational,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    /// largest probed mixing weight certified infeasible
    pub r_lo: Rational,
    /// smallest probed mixing weight certified feasible
    pub r_hi: Rational,
    pub probes: Vec<Probe>,
}

impl Bracket {
    pub fn width(&self) -> Rational {
        &self.r_hi - &self.r_lo
    }
}

/// Checks that no infeasible probe lies above a feasible one.
pub fn check_interval_property(probes: &[Probe]) -> Result<()> {
    let lowest_feasible = probes.iter().filter(|p| p.feasible).map(|p| &p.r).min();
    let highest_infeasible = probes.iter().filter(|p| !p.feasible).map(|p| &p.r).max();
    if let (Some(f), Some(i)) = (lowest_feasible, highest_infeasible) {
        if i > f {
            return Err(Error::Inconsistent(format!(
                "feasible at r = {f} but infeasible at larger r = {i}"
            )));
        }
    }
    Ok(())
}

pub fn robustness(sk: &ProgramSkeleton, data: &DataTable, target: &DataTable, precision: &Rational) -> Result<Bracket> {
    if !precision.is_positive() {
        return Err(Error::Precondition("precision must be positive".into()));
    }
    let mut probes = Vec::new();
    let mut probe = |r: Rational| -> Result<bool> {
        let table = data.mix(target, &r)?;
        let feasible = certify(&sk.with_data(&table)?)?.is_feasible();
        probes.push(Probe { r, feasible });
        Ok(feasible)
    };
    if probe(Rational::zero())? {
        return Err(Error::Precondition("the unmixed data are already classical".into()));
    }
    if !probe(Rational::one())? {
        return Err(Error::Precondition("the mixing target is not classical".into()));
    }
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    let half = Rational::new(1, 2);
    while &hi - &lo > *precision {
        let mid = (&lo + &hi) * &half;
        if probe(mid.clone())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    check_interval_property(&probes)?;
    Ok(Bracket {
        r_lo: lo,
        r_hi: hi,
        probes,
    })
}
