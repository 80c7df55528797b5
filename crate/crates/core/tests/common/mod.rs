#![allow(dead_code)]

use ncptm::elimination::{eliminate_all, EliminationOptions, IneqSystem};
use ncptm::feasibility::{certify, evaluate, DataScaling, NcInequality, ProgramSkeleton};
use ncptm::fragment::{square_bit_fragment, stabilizer_qubit_fragment, DataTable};
use ncptm::scenario::Scenario;

pub fn stabilizer() -> Scenario {
    Scenario::new(stabilizer_qubit_fragment()).unwrap()
}

pub fn square_bit() -> Scenario {
    Scenario::new(square_bit_fragment()).unwrap()
}

pub fn eliminate(sk: &ProgramSkeleton) -> Vec<NcInequality> {
    let sys = IneqSystem::from_skeleton(sk);
    eliminate_all(&sys, &EliminationOptions::default())
        .unwrap()
        .require_complete()
        .unwrap()
}

pub fn satisfies_all(ineqs: &[NcInequality], data: &DataTable) -> bool {
    ineqs.iter().all(|q| evaluate(q, data).unwrap().satisfied)
}

pub fn oracle(sk: &ProgramSkeleton, data: &DataTable) -> bool {
    certify(&sk.with_data(data).unwrap()).unwrap().is_feasible()
}

pub fn original_skeleton(sc: &Scenario) -> ProgramSkeleton {
    sc.skeleton(DataScaling::Original).unwrap()
}
