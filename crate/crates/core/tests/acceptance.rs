//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line together with its runtime bound.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use common::*;
use ncptm::cli::{run, Cli};
use ncptm::elimination::{canonical_set, to_original};
use ncptm::feasibility::{
    certify, check_certificate, evaluate, nc_bound, DataScaling, NcInequality, NcProgram, RowTag, Verdict,
};
use ncptm::fragment::{lump, stabilizer_qubit_fragment, DataKey, DataTable, LabeledMatrix};
use ncptm::identities::IdentitySet;
use ncptm::model::build_and_verify;
use ncptm::robustness::{check_interval_property, Bracket};
use ncptm::sampling::sample_tables;
use ncptm::scenario::Scenario;
use ncptm::{Rational, RationalMatrix, RationalVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same_span(generators: &[RationalVector], expected: &[RationalVector]) -> bool {
    let span = |g: &[RationalVector]| IdentitySet {
        kind: ncptm::identities::ProcessKind::States,
        ids: Vec::new(),
        generators: g.to_vec(),
    };
    let (a, b) = (span(generators), span(expected));
    generators.len() == expected.len() && expected.iter().all(|v| a.spans(v)) && generators.iter().all(|v| b.spans(v))
}

fn quantum() -> (Scenario, DataTable) {
    let sc = stabilizer();
    let data = sc.fragment.predict().unwrap();
    (sc, data)
}

/// Independent check of an infeasibility witness: `0 ≤ yM ≤ 1` and `y·b < 0`.
fn witness_holds(p: &NcProgram, y: &RationalVector) -> Result<Rational, String> {
    let m = p.matrix();
    let zero = Rational::zero();
    let one = Rational::one();
    for j in 0..m.cols() {
        let mut v = Rational::zero();
        for i in 0..m.rows() {
            let a = &m.row(i)[j];
            if !a.is_zero() && !y.0[i].is_zero() {
                v += &y.0[i] * a;
            }
        }
        if v < zero || v > one {
            return Err(format!("(yM)_{j} = {v} outside [0, 1]"));
        }
    }
    let yb = ncptm::linalg::dot(&y.0, &p.rhs.0);
    if !yb.is_negative() {
        return Err(format!("y·b = {yb} is not negative"));
    }
    Ok(yb)
}

fn identities() -> Outcome {
    let sc = stabilizer();
    let expected_t = [RationalVector::from_ints(&[1, 1, -1, -1])];
    let expected = [
        RationalVector::from_ints(&[1, 1, -1, -1, 0, 0]),
        RationalVector::from_ints(&[1, 1, 0, 0, -1, -1]),
    ];
    ensure(same_span(&sc.t_ids.generators, &expected_t), || {
        format!("transformation generators {:?}", sc.t_ids.generators)
    })?;
    ensure(same_span(&sc.state_ids.generators, &expected), || {
        "state identity span differs".into()
    })?;
    ensure(same_span(&sc.effect_ids.generators, &expected), || {
        "effect identity span differs".into()
    })?;
    Ok(format!(
        "{} transformation, {} state, {} effect generators",
        sc.t_ids.len(),
        sc.state_ids.len(),
        sc.effect_ids.len()
    ))
}

fn polytopes() -> Outcome {
    let sc = stabilizer();
    ensure(sc.phi.len() == 8 && sc.psi.len() == 8, || {
        format!("{} measurement and {} source vertices", sc.phi.len(), sc.psi.len())
    })?;
    let mut patterns = Vec::new();
    for v in &sc.phi.vertices {
        ensure(v.0.iter().all(|x| x.is_zero() || x.is_one()), || {
            format!("vertex {v:?} is not 0/1")
        })?;
        for m in &sc.fragment.measurements {
            let ones = m
                .iter()
                .filter(|k| v.0[sc.phi.labels.iter().position(|l| l == *k).unwrap()].is_one())
                .count();
            ensure(ones == 1, || format!("vertex {v:?} is not deterministic on {m:?}"))?;
        }
        patterns.push(v.clone());
    }
    let third = Rational::new(1, 3);
    let mut scaled: Vec<RationalVector> = patterns.iter().map(|v| v.scale(&third)).collect();
    let mut psi = sc.psi.vertices.clone();
    scaled.sort_by_key(|v| v.0.clone());
    psi.sort_by_key(|v| v.0.clone());
    ensure(sc.phi.labels == sc.psi.labels, || "label orders differ".into())?;
    ensure(scaled == psi, || {
        "source vertices are not the measurement patterns over 3".into()
    })?;
    Ok("8 deterministic measurement vertices, 8 source vertices at 1/3".into())
}

fn program_shape() -> Outcome {
    let (sc, data) = quantum();
    let p = sc.program(&data).map_err(|e| e.to_string())?;
    let m = p.matrix();
    let mut counts = [0usize; 4];
    for tag in p.row_tags() {
        counts[match tag {
            RowTag::Normalization { .. } => 0,
            RowTag::CausalIndependence { .. } => 1,
            RowTag::TransformationIdentity { .. } => 2,
            RowTag::Data { .. } => 3,
        }] += 1;
    }
    ensure(m.rows() == 260 && m.cols() == 256, || {
        format!("{}x{}", m.rows(), m.cols())
    })?;
    ensure(counts == [4, 48, 64, 144], || format!("row counts {counts:?}"))?;
    Ok(format!("{}x{} with rows {:?}", m.rows(), m.cols(), counts))
}

fn quantum_infeasible() -> Outcome {
    let (sc, data) = quantum();
    let p = sc.program(&data).map_err(|e| e.to_string())?;
    let r = certify(&p).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Infeasible, || {
        "quantum data certified feasible".into()
    })?;
    check_certificate(&p, &r).map_err(|e| e.to_string())?;
    let y = r.witness.as_ref().ok_or("no witness")?;
    let yb = witness_holds(&p, y)?;
    Ok(format!("infeasible, witness y·b = {yb}"))
}

/// Reference stabilizer inequality fixture: `(coefficient, digits)`
/// for each term of `β`, with the right-hand side -6.
const REFERENCE: &[(i64, [usize; 3])] = &[
    (3, [1, 2, 1]),
    (-3, [2, 1, 2]),
    (3, [6, 4, 4]),
    (3, [2, 3, 4]),
    (3, [3, 3, 5]),
    (-3, [4, 4, 5]),
    (-3, [1, 4, 6]),
    (3, [3, 2, 6]),
    (3, [4, 1, 6]),
    (-2, [3, 1, 1]),
    (2, [3, 2, 2]),
    (-2, [3, 3, 3]),
    (2, [3, 4, 4]),
    (-2, [1, 1, 5]),
    (-2, [1, 2, 5]),
    (-2, [2, 3, 5]),
    (1, [4, 3, 1]),
    (1, [5, 2, 1]),
    (-1, [6, 2, 2]),
    (1, [4, 1, 3]),
    (1, [5, 1, 3]),
    (1, [6, 4, 3]),
    (-1, [5, 2, 4]),
    (-1, [6, 3, 4]),
    (1, [2, 4, 5]),
    (1, [6, 3, 5]),
    (-1, [5, 1, 6]),
    (-1, [5, 2, 6]),
    (1, [5, 4, 6]),
    (5, [4, 4, 2]),
    (-5, [3, 2, 4]),
];

/// Positions of `(s, k, t)` among the three printed digits.
const READINGS: [(&str, [usize; 3]); 6] = [
    ("skt", [0, 1, 2]),
    ("stk", [0, 2, 1]),
    ("kst", [1, 0, 2]),
    ("kts", [2, 0, 1]),
    ("tsk", [1, 2, 0]),
    ("tks", [2, 1, 0]),
];

fn reference_inequality(reading: [usize; 3], sc: &Scenario) -> Option<NcInequality> {
    let states = sc.fragment.state_ids();
    let effects = sc.fragment.effect_ids();
    let ts = sc.fragment.transformation_ids();
    let terms = REFERENCE.iter().map(|(c, d)| {
        let (s, k, t) = (d[reading[0]] - 1, d[reading[1]] - 1, d[reading[2]] - 1);
        let key = DataKey::new(effects.get(k)?, states.get(s)?, ts.get(t)?);
        Some((key, Rational::from_int(*c)))
    });
    let terms: Option<Vec<(DataKey, Rational)>> = terms.collect();
    let mut q = NcInequality::zero();
    for (key, c) in terms? {
        *q.coeffs.entry(key).or_insert_with(Rational::zero) += c;
    }
    Some(NcInequality::new(q.coeffs, Rational::from_int(6)))
}

fn reference_bound() -> Outcome {
    let (sc, data) = quantum();
    let sk = sc.skeleton(DataScaling::Original).map_err(|e| e.to_string())?;
    let target_value = Rational::from_int(-12);
    let target_bound = Rational::from_int(-6);
    let mut report = Vec::new();
    let mut matched = None;
    for (name, reading) in READINGS {
        let Some(q) = reference_inequality(reading, &sc) else {
            report.push(format!("{name}: index out of range"));
            continue;
        };
        let beta = evaluate(&q, &data).map_err(|e| e.to_string())?.value;
        let bound = nc_bound(&q, &sk).map_err(|e| e.to_string())?;
        report.push(format!("{name}: beta = {beta}, bound = {bound}"));
        if beta == target_value && bound == target_bound {
            matched = Some(name);
        }
    }
    match matched {
        Some(name) => Ok(format!(
            "reading {name} gives beta = -12 >= -6 violated; {}",
            report.join("; ")
        )),
        None => Err(format!(
            "no index reading gives beta = -12 with bound -6; {}",
            report.join("; ")
        )),
    }
}

fn depolarized_model() -> Outcome {
    let sc = stabilizer();
    let data = DataTable::constant(&sc.fragment, &Rational::new(1, 2)).map_err(|e| e.to_string())?;
    let p = sc.program(&data).map_err(|e| e.to_string())?;
    let r = certify(&p).map_err(|e| e.to_string())?;
    check_certificate(&p, &r).map_err(|e| e.to_string())?;
    let x = r.x.ok_or("depolarized data certified infeasible")?;
    let (model, report) =
        build_and_verify(&x, &sc.fragment, &data, &sc.phi, &sc.psi, sc.identity_sets()).map_err(|e| e.to_string())?;
    let failed: Vec<&str> = report
        .checks()
        .iter()
        .filter(|(_, c)| !c.passed)
        .map(|(n, _)| *n)
        .collect();
    ensure(failed.is_empty(), || format!("failed checks {failed:?}"))?;
    Ok(format!(
        "feasible; model with {} ontic states passes all {} checks",
        model.ontic_in.len(),
        report.checks().len()
    ))
}

fn elimination_oracle() -> Outcome {
    let sc = square_bit();
    let sk = original_skeleton(&sc);
    let ineqs = eliminate(&sk);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let samples = sample_tables(&sk, &sc.fragment.measurements, 120, &mut rng).map_err(|e| e.to_string())?;
    let mut feasible = 0;
    for (i, s) in samples.iter().enumerate() {
        let verdict = oracle(&sk, &s.table);
        ensure(satisfies_all(&ineqs, &s.table) == verdict, || {
            format!("table {i} ({:?}): oracle says {verdict}", s.kind)
        })?;
        feasible += verdict as usize;
    }
    ensure(feasible > 0 && feasible < samples.len(), || {
        "samples do not cover both verdicts".into()
    })?;
    Ok(format!(
        "{} inequalities agree on {} tables ({} classical)",
        ineqs.len(),
        samples.len(),
        feasible
    ))
}

fn flag_convexified() -> Outcome {
    let sc = square_bit();
    let original = canonical_set(&eliminate(&original_skeleton(&sc)));
    let flag = eliminate(&sc.skeleton(DataScaling::FlagConvexified).map_err(|e| e.to_string())?);
    let mapped = canonical_set(&to_original(&flag, sc.num_states()));
    ensure(mapped == original, || {
        format!("{} mapped vs {} original inequalities", mapped.len(), original.len())
    })?;
    Ok(format!("{} inequalities coincide", original.len()))
}

fn robustness_bracket() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let f = stabilizer_qubit_fragment();
    let scenario = dir.path().join("scenario.json");
    let data = dir.path().join("data.json");
    let out = dir.path().join("bracket.json");
    let table = f.predict().map_err(|e| e.to_string())?;
    fs::write(&scenario, f.to_json().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    fs::write(&data, table.to_json().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let path = |p: &std::path::Path| p.to_str().unwrap().to_string();
    let cli = Cli::try_parse_from([
        "ncptm".to_string(),
        "robustness".into(),
        path(&scenario),
        path(&data),
        "--precision".into(),
        "1/1024".into(),
        "--out".into(),
        path(&out),
    ])
    .map_err(|e| e.to_string())?;
    let outcome = run(&cli).map_err(|e| e.to_string())?;
    ensure(outcome.code == 0, || format!("exit code {}", outcome.code))?;
    let bracket: Bracket = serde_json::from_value(outcome.json).map_err(|e| e.to_string())?;
    ensure(bracket.width() <= Rational::new(1, 1024), || {
        format!("width {}", bracket.width())
    })?;
    check_interval_property(&bracket.probes).map_err(|e| e.to_string())?;

    let sc = Scenario::new(f.clone()).map_err(|e| e.to_string())?;
    let uniform = DataTable::uniform(&f).map_err(|e| e.to_string())?;
    let at = |r: &Rational| -> Result<bool, String> {
        let p = sc
            .program(&table.mix(&uniform, r).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let res = certify(&p).map_err(|e| e.to_string())?;
        check_certificate(&p, &res).map_err(|e| e.to_string())?;
        Ok(res.is_feasible())
    };
    ensure(!at(&bracket.r_lo)?, || format!("r_lo = {} is feasible", bracket.r_lo))?;
    ensure(at(&bracket.r_hi)?, || format!("r_hi = {} is infeasible", bracket.r_hi))?;
    Ok(format!(
        "r in ({}, {}], {} probes",
        bracket.r_lo,
        bracket.r_hi,
        bracket.probes.len()
    ))
}

fn lumping() -> Outcome {
    let base = stabilizer_qubit_fragment();
    let pick = |ids: &[&str]| -> Vec<LabeledMatrix> {
        ids.iter()
            .map(|id| base.transformations.iter().find(|t| t.id == *id).unwrap().clone())
            .collect()
    };
    let lumped = lump(&pick(&["I", "Z"]), &pick(&["I", "S"]), &base).map_err(|e| e.to_string())?;
    let sc = Scenario::new(lumped.fragment).map_err(|e| e.to_string())?;
    let identity = RationalMatrix::identity(4);
    let z = &base.transformations[1].matrix;
    let expected: Vec<i64> = sc
        .fragment
        .transformations
        .iter()
        .map(|t| if t.matrix == identity || t.matrix == *z { 1 } else { -1 })
        .collect();
    ensure(expected.len() == 4, || format!("{} composites", expected.len()))?;
    ensure(
        same_span(&sc.t_ids.generators, &[RationalVector::from_ints(&expected)]),
        || format!("generators {:?}", sc.t_ids.generators),
    )?;
    let data = sc.fragment.predict().map_err(|e| e.to_string())?;
    let p = sc.program(&data).map_err(|e| e.to_string())?;
    let r = certify(&p).map_err(|e| e.to_string())?;
    check_certificate(&p, &r).map_err(|e| e.to_string())?;
    ensure(!r.is_feasible(), || "lumped quantum data certified feasible".into())?;
    Ok(format!(
        "composites {:?}, identity {:?}, infeasible",
        sc.fragment.transformation_ids(),
        expected
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("operational identities of the stabilizer fragment", 1, identities),
        ("assignment polytope vertices", 5, polytopes),
        ("program shape 260x256", 5, program_shape),
        ("quantum stabilizer data are nonclassical", 60, quantum_infeasible),
        ("reference inequality value and bound", 120, reference_bound),
        ("depolarized data admit a verified model", 60, depolarized_model),
        (
            "elimination agrees with the feasibility oracle",
            300,
            elimination_oracle,
        ),
        (
            "flag-convexified elimination maps to the original set",
            300,
            flag_convexified,
        ),
        ("robustness bracket at precision 1/1024", 600, robustness_bracket),
        ("lumped two-stage scenario", 60, lumping),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (ok, detail) = match result {
            Ok(d) if in_time => (true, d),
            Ok(d) => (false, format!("{d}; exceeded the runtime bound")),
            Err(d) => (false, d),
        };
        println!(
            "{} criterion {}: {} ({:.2} s, bound {} s): {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            name,
            elapsed.as_secs_f64(),
            limit,
            detail
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
