//! The `scsp-flat 1` dump is a real exchange surface: a compiled instance
//! written out, re-parsed, and solved standalone must behave exactly like the
//! in-memory one.

use scsp::compile::{compile, dump_metadata};
use scsp::flat::{parse_flat, write_flat};
use scsp::parser::parse_model;
use scsp::rational::Rational;
use scsp::solver::{check_solution, solve_opt, solve_sat};
use scsp::StochasticModel;

fn m1() -> StochasticModel {
    parse_model(
        "int x in 0..1 stage 1;\n\
         stoch w in {0:1/2, 1:1/2} stage 1;\n\
         chance(1/2) x = w;\n\
         maximize expected x + w;\n",
    )
    .unwrap()
}

#[test]
fn m1_dump_golden() {
    let out = compile(&m1()).unwrap();
    let dump = write_flat(&out.csp, &dump_metadata(&m1(), &out.tree, &out.table));
    let expected = "\
scsp-flat 1
# scenario 0 prob 1/2 w=0
# scenario 1 prob 1/2 w=1
# decision x node - var 0
var 0 0 1
var 1 0 1
var 2 0 1
var 3 0 1
var 4 1 2
var 5 1 3
reif 1 eq 0 1 1 0
reif 2 eq 1 1 1 0
lin le -1 2 -1 1 -1 2
lin eq 0 2 1 3 -1 0
lin eq 1 2 1 4 -1 0
lin eq 0 3 1 5 -1 3 -1 4
objective maximize 5 2
";
    assert_eq!(dump, expected);
}

#[test]
fn standalone_solve_of_dump_matches_in_memory() {
    let model = parse_model(
        "int x1 in 0..2 stage 1;\n\
         stoch w1 in {1:1/3, 2:2/3} stage 1;\n\
         int x2 in 0..2 stage 2;\n\
         x1 + x2 >= w1;\n\
         minimize expected x1 + x2;\n",
    )
    .unwrap();
    let out = compile(&model).unwrap();
    let dump = write_flat(&out.csp, &dump_metadata(&model, &out.tree, &out.table));
    let reparsed = parse_flat(&dump).unwrap();
    assert_eq!(reparsed, out.csp);

    let direct = solve_opt(&out.csp);
    let standalone = solve_opt(&reparsed);
    assert_eq!(direct.solution, standalone.solution);
    assert_eq!(direct.stats.nodes, standalone.stats.nodes);
    let solution = standalone.solution.unwrap();
    assert_eq!(solution.objective, Some(Rational::new(5, 3)));
    assert_eq!(check_solution(&reparsed, &solution.values), Ok(true));
}

#[test]
fn satisfaction_dump_roundtrip() {
    let model = parse_model(
        "int x in 0..3 stage 1;\n\
         stoch w in {0:1/2, 2:1/2} stage 1;\n\
         chance(1/2) x >= w;\n",
    )
    .unwrap();
    let out = compile(&model).unwrap();
    let dump = write_flat(&out.csp, &[]);
    let reparsed = parse_flat(&dump).unwrap();
    let a = solve_sat(&out.csp);
    let b = solve_sat(&reparsed);
    assert_eq!(a.solution, b.solution);
    assert!(a.solution.is_some());
}
