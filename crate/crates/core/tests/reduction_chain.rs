mod common;

use relevance_core::reductions::{
    reduce_emajsat_to_ip1, reduce_ip1_to_ip2, reduce_ip2_to_relevant_input, reduce_sat_to_ip3, verify_reduction,
    ProblemInstance,
};
use relevance_core::rational::ratio;
use relevance_core::Limits;

#[test]
fn every_two_variable_function_survives_the_chain() {
    let lim = Limits::for_verification();
    let half = ratio(1, 2);
    for table in 0..16u64 {
        for k in 1..=2 {
            let f = common::from_table(2, table);
            let e = ProblemInstance::emajsat(f, k).unwrap();
            let ip1 = reduce_emajsat_to_ip1(&e).unwrap();
            let r1 = verify_reduction(&e, &ip1, &lim).unwrap();
            assert!(r1.passed(), "table {table} k {k}: {r1:?}");
            let ip2 = reduce_ip1_to_ip2(&ip1, &half).unwrap().instance;
            let r2 = verify_reduction(&ip1, &ip2, &lim).unwrap();
            assert!(r2.passed(), "table {table} k {k}: {r2:?}");
            let ri = reduce_ip2_to_relevant_input(&ip2).unwrap();
            assert_eq!(ri.arity(), 2 * ip2.k + 3 * (ip2.arity() - ip2.k));
            let r3 = verify_reduction(&ip2, &ri, &lim).unwrap();
            assert!(r3.passed(), "table {table} k {k}: {r3:?}");
        }
    }
}

#[test]
fn satisfiability_is_preserved_on_small_formulas() {
    let lim = Limits::for_verification();
    for d in 1..=2 {
        for table in 0..1u64 << (1 << d) {
            let src = ProblemInstance::sat(common::from_table(d, table)).unwrap();
            let (red, _) = reduce_sat_to_ip3(&src, &ratio(1, 2), &ratio(1, 4), None).unwrap();
            let rep = verify_reduction(&src, &red, &lim).unwrap();
            assert!(rep.passed(), "d {d} table {table}: {rep:?}");
        }
    }
}
