//! Candidate ontological models read off a feasible solution.
//!
//! With `p(κ) = Σ_κ′ p(κ′κ|t)` the model is
//! `μ_s(κ) = N [Ψ_κ]_s p(κ)`, `Γ_t(κ′|κ) = p(κ′κ|t) / p(κ)` and
//! `ξ_k(κ′) = [Φ_κ′]_k`, with ontic states restricted to `p(κ) > 0`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragment::{DataKey, DataTable, GptFragment};
use crate::identities::IdentitySet;
use crate::linalg::RationalVector;
use crate::polytope::VRep;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntModel {
    pub ontic_in: Vec<usize>,
    pub ontic_out: Vec<usize>,
    /// `mu[s][κ]`
    pub mu: BTreeMap<String, BTreeMap<usize, Rational>>,
    /// `gamma[t][κ][κ′] = Γ_t(κ′|κ)`
    pub gamma: BTreeMap<String, BTreeMap<usize, BTreeMap<usize, Rational>>>,
    /// `xi[k][κ′]`
    pub xi: BTreeMap<String, BTreeMap<usize, Rational>>,
    pub p_kappa: BTreeMap<usize, Rational>,
}

impl OntModel {
    /// Assembles the model from a solution vector laid out as
    /// `((κ′·|κ|) + κ)·|T| + t`.
    pub fn build(x: &RationalVector, phi: &VRep, psi: &VRep, num_states: usize, t_ids: &[String]) -> Result<OntModel> {
        let (nko, nki, nt) = (phi.vertices.len(), psi.vertices.len(), t_ids.len());
        if x.dim() != nko * nki * nt {
            return Err(Error::Dimension(format!(
                "solution has {} entries, expected {}",
                x.dim(),
                nko * nki * nt
            )));
        }
        if psi.labels.len() != num_states {
            return Err(Error::IndexMismatch(format!(
                "source assignments range over {} states but N = {num_states}",
                psi.labels.len()
            )));
        }
        if x.iter().any(Rational::is_negative) {
            return Err(Error::Precondition("solution has a negative entry".into()));
        }
        let at = |ko: usize, ki: usize, t: usize| &x[(ko * nki + ki) * nt + t];

        let mut p_kappa = BTreeMap::new();
        for ki in 0..nki {
            let marginal = |t: usize| -> Rational { (0..nko).map(|ko| at(ko, ki, t).clone()).sum() };
            let p0 = marginal(0);
            for t in 1..nt {
                if marginal(t) != p0 {
                    return Err(Error::Inconsistent(format!(
                        "p(κ={ki}) depends on the transformation ({} vs {})",
                        t_ids[0], t_ids[t]
                    )));
                }
            }
            p_kappa.insert(ki, p0);
        }
        let ontic_in: Vec<usize> = (0..nki).filter(|ki| p_kappa[ki].is_positive()).collect();
        let ontic_out: Vec<usize> = (0..nko).collect();

        let n = Rational::from(num_states);
        let mu = psi
            .labels
            .iter()
            .enumerate()
            .map(|(s, id)| {
                let dist = ontic_in
                    .iter()
                    .map(|&ki| (ki, &n * &psi.vertices[ki][s] * &p_kappa[&ki]))
                    .collect();
                (id.clone(), dist)
            })
            .collect();
        let gamma = t_ids
            .iter()
            .enumerate()
            .map(|(t, id)| {
                let by_in = ontic_in
                    .iter()
                    .map(|&ki| {
                        let inv = p_kappa[&ki].recip();
                        let column = ontic_out.iter().map(|&ko| (ko, at(ko, ki, t) * &inv)).collect();
                        (ki, column)
                    })
                    .collect();
                (id.clone(), by_in)
            })
            .collect();
        let xi = phi
            .labels
            .iter()
            .enumerate()
            .map(|(k, id)| {
                let resp = ontic_out.iter().map(|&ko| (ko, phi.vertices[ko][k].clone())).collect();
                (id.clone(), resp)
            })
            .collect();
        Ok(OntModel {
            ontic_in,
            ontic_out,
            mu,
            gamma,
            xi,
            p_kappa,
        })
    }

    fn mu(&self, s: &str, ki: usize) -> Rational {
        self.mu.get(s).and_then(|d| d.get(&ki)).cloned().unwrap_or_default()
    }

    fn gamma(&self, t: &str, ko: usize, ki: usize) -> Rational {
        self.gamma
            .get(t)
            .and_then(|g| g.get(&ki))
            .and_then(|c| c.get(&ko))
            .cloned()
            .unwrap_or_default()
    }

    fn xi(&self, k: &str, ko: usize) -> Rational {
        self.xi.get(k).and_then(|r| r.get(&ko)).cloned().unwrap_or_default()
    }

    /// `Σ_{κκ′} ξ_k(κ′) Γ_t(κ′|κ) μ_s(κ)`
    pub fn predict(&self, k: &str, s: &str, t: &str) -> Rational {
        let mut acc = Rational::zero();
        for &ki in &self.ontic_in {
            let m = self.mu(s, ki);
            if m.is_zero() {
                continue;
            }
            for &ko in &self.ontic_out {
                let xi = self.xi(k, ko);
                if !xi.is_zero() {
                    acc += &xi * &self.gamma(t, ko, ki) * &m;
                }
            }
        }
        acc
    }

    pub fn verify(
        &self,
        f: &GptFragment,
        data: &DataTable,
        state_ids: &IdentitySet,
        effect_ids: &IdentitySet,
        t_ids: &IdentitySet,
    ) -> Result<VerificationReport> {
        let mut report = VerificationReport::default();

        for e in &f.effects {
            for s in &f.states {
                for t in &f.transformations {
                    let key = DataKey::new(&e.id, &s.id, &t.id);
                    let model = self.predict(&e.id, &s.id, &t.id);
                    match data.get_key(&key) {
                        Some(p) if *p == model => {}
                        Some(p) => report
                            .data_reproduction
                            .fail(format!("{key}: model gives {model}, data {p}")),
                        None => report.data_reproduction.fail(format!("{key}: absent from data")),
                    }
                }
            }
        }

        for (a, g) in state_ids.generators.iter().enumerate() {
            for &ki in &self.ontic_in {
                let v: Rational = state_ids
                    .ids
                    .iter()
                    .zip(g.iter())
                    .map(|(s, c)| c * &self.mu(s, ki))
                    .sum();
                if !v.is_zero() {
                    report
                        .state_identities
                        .fail(format!("identity {a} at κ={ki} gives {v}"));
                }
            }
        }
        for (b, g) in effect_ids.generators.iter().enumerate() {
            for &ko in &self.ontic_out {
                let v: Rational = effect_ids
                    .ids
                    .iter()
                    .zip(g.iter())
                    .map(|(k, c)| c * &self.xi(k, ko))
                    .sum();
                if !v.is_zero() {
                    report
                        .effect_identities
                        .fail(format!("identity {b} at κ′={ko} gives {v}"));
                }
            }
        }
        for (c, g) in t_ids.generators.iter().enumerate() {
            for &ki in &self.ontic_in {
                for &ko in &self.ontic_out {
                    let v: Rational = t_ids
                        .ids
                        .iter()
                        .zip(g.iter())
                        .map(|(t, a)| a * &self.gamma(t, ko, ki))
                        .sum();
                    if !v.is_zero() {
                        report
                            .transformation_identities
                            .fail(format!("identity {c} at κ′={ko}, κ={ki} gives {v}"));
                    }
                }
            }
        }

        let dist = &mut report.distributions;
        for s in &f.states {
            let mut total = Rational::zero();
            for &ki in &self.ontic_in {
                let m = self.mu(&s.id, ki);
                if m.is_negative() {
                    dist.fail(format!("μ_{}({ki}) = {m} is negative", s.id));
                }
                total += m;
            }
            if !total.is_one() {
                dist.fail(format!("μ_{} sums to {total}", s.id));
            }
        }
        for t in &f.transformations {
            for &ki in &self.ontic_in {
                let mut total = Rational::zero();
                for &ko in &self.ontic_out {
                    let g = self.gamma(&t.id, ko, ki);
                    if g.is_negative() {
                        dist.fail(format!("Γ_{}({ko}|{ki}) = {g} is negative", t.id));
                    }
                    total += g;
                }
                if !total.is_one() {
                    dist.fail(format!("Γ_{}(·|{ki}) sums to {total}", t.id));
                }
            }
        }
        for e in &f.effects {
            for &ko in &self.ontic_out {
                let v = self.xi(&e.id, ko);
                if v.is_negative() || v > Rational::one() {
                    dist.fail(format!("ξ_{}({ko}) = {v} is outside [0, 1]", e.id));
                }
            }
        }
        for (m, ids) in f.measurement_indices()?.iter().zip(&f.measurements) {
            for &ko in &self.ontic_out {
                let total: Rational = m.iter().map(|&k| self.xi(&f.effects[k].id, ko)).sum();
                if !total.is_one() {
                    dist.fail(format!("ξ over measurement {ids:?} sums to {total} at κ′={ko}"));
                }
            }
        }
        Ok(report.finish())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl Check {
    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub data_reproduction: Check,
    pub state_identities: Check,
    pub effect_identities: Check,
    pub transformation_identities: Check,
    pub distributions: Check,
    /// Compositional constraints such as the identity gate being
    /// represented by the identity map are not checked.
    pub diagram_preservation: String,
}

impl Default for VerificationReport {
    fn default() -> Self {
        VerificationReport {
            data_reproduction: Check::default(),
            state_identities: Check::default(),
            effect_identities: Check::default(),
            transformation_identities: Check::default(),
            distributions: Check::default(),
            diagram_preservation: "not verified".into(),
        }
    }
}

impl VerificationReport {
    pub fn checks(&self) -> [(&'static str, &Check); 5] {
        [
            ("data_reproduction", &self.data_reproduction),
            ("state_identities", &self.state_identities),
            ("effect_identities", &self.effect_identities),
            ("transformation_identities", &self.transformation_identities),
            ("distributions", &self.distributions),
        ]
    }

    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.passed)
    }

    fn finish(mut self) -> Self {
        for c in [
            &mut self.data_reproduction,
            &mut self.state_identities,
            &mut self.effect_identities,
            &mut self.transformation_identities,
            &mut self.distributions,
        ] {
            c.passed = c.failures.is_empty();
        }
        self
    }
}

/// Builds and verifies in one step, returning the model and its report.
pub fn build_and_verify(
    x: &RationalVector,
    f: &GptFragment,
    data: &DataTable,
    phi: &VRep,
    psi: &VRep,
    ids: [&IdentitySet; 3],
) -> Result<(OntModel, VerificationReport)> {
    let [state_ids, effect_ids, t_ids] = ids;
    let m = OntModel::build(x, phi, psi, f.num_states(), &t_ids.ids)?;
    let report = m.verify(f, data, state_ids, effect_ids, t_ids)?;
    Ok((m, report))
}
