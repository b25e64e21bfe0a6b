//! Small reference instances used across tests, benches, and docs.
//!
//! E1 is the two-term four-qubit instance whose subset-state energies and
//! support expansion are pinned in the acceptance suite; E2-E5 cover the
//! single-term, fully-bad, frustration-free-overlapping, and frustrated
//! cases. The same instances ship as JSON under `fixtures/` at the
//! workspace root.

use std::collections::BTreeSet;

use crate::dits::{Alphabet, DitString};
use crate::instance::{Class, HamiltonianInstance, SetConstraint, SetCspInstance, Term};

fn class(strings: &[&str]) -> Class {
    strings.iter().map(|s| s.parse::<DitString>().unwrap()).collect()
}

fn bell_classes() -> Vec<Class> {
    vec![class(&["00", "11"]), class(&["01", "10"])]
}

fn sets(qudits: &[usize], classes: Vec<Class>) -> Term {
    Term::Sets(SetConstraint { qudits: qudits.to_vec(), classes })
}

/// Four qubits, Bell-pair classes on {0,3} and {1,2}; frustration-free,
/// no bad strings, degree 1.
pub fn e1() -> HamiltonianInstance {
    HamiltonianInstance::new(
        Alphabet::new(2).unwrap(),
        4,
        2,
        1,
        vec![sets(&[0, 3], bell_classes()), sets(&[1, 2], bell_classes())],
    )
    .unwrap()
}

/// E1 with both terms in matrix form (`I - |Phi+><Phi+| - |Psi+><Psi+|`).
pub fn e1_matrix() -> HamiltonianInstance {
    let csp = crate::instance::to_setcsp(&e1()).unwrap();
    crate::instance::from_setcsp(&csp).unwrap()
}

/// Two qubits, a single term with one class {00, 11}.
pub fn e2() -> HamiltonianInstance {
    HamiltonianInstance::new(
        Alphabet::new(2).unwrap(),
        2,
        2,
        1,
        vec![sets(&[0, 1], vec![class(&["00", "11"])])],
    )
    .unwrap()
}

/// Two orthogonal Bell projectors on the same pair: every string is bad,
/// ground energy 1/2.
pub fn e3() -> HamiltonianInstance {
    HamiltonianInstance::new(
        Alphabet::new(2).unwrap(),
        2,
        2,
        2,
        vec![
            sets(&[0, 1], vec![class(&["00", "11"])]),
            sets(&[0, 1], vec![class(&["01", "10"])]),
        ],
    )
    .unwrap()
}

/// Three qubits, overlapping Bell-pair terms on {0,1} and {1,2}:
/// frustration-free, commuting, no bad strings.
pub fn e4() -> HamiltonianInstance {
    HamiltonianInstance::new(
        Alphabet::new(2).unwrap(),
        3,
        2,
        2,
        vec![sets(&[0, 1], bell_classes()), sets(&[1, 2], bell_classes())],
    )
    .unwrap()
}

/// Three-qubit frustrated chain: Bell pairs on {0,1} and {1,2} plus a
/// class-deficient diagonal term on {0,2} that makes x0 = x2 = 1 bad.
pub fn e5() -> HamiltonianInstance {
    HamiltonianInstance::new(
        Alphabet::new(2).unwrap(),
        3,
        2,
        2,
        vec![
            sets(&[0, 1], bell_classes()),
            sets(&[1, 2], bell_classes()),
            sets(&[0, 2], vec![class(&["00"]), class(&["01"]), class(&["10"])]),
        ],
    )
    .unwrap()
}

/// The SetCSP form of E3 (used by the exhaustive UNSAT minimizer tests).
pub fn e3_setcsp() -> SetCspInstance {
    crate::instance::to_setcsp(&e3()).unwrap()
}

/// A term outside the uniform promise: projector onto
/// `sqrt(3)/2 |0> + 1/2 |1>` on one qubit, given as `I - P`.
pub fn nonuniform_instance() -> HamiltonianInstance {
    use nalgebra::DMatrix;
    let a = (0.75f64).sqrt();
    let b = 0.5f64;
    let p = DMatrix::from_row_slice(2, 2, &[a * a, a * b, a * b, b * b]);
    let h = DMatrix::<f64>::identity(2, 2) - p;
    let alphabet = Alphabet::new(2).unwrap();
    let term = crate::decompose::prepare_matrix_term(vec![0], h, None, &alphabet).unwrap();
    HamiltonianInstance::new(alphabet, 1, 1, 1, vec![Term::Matrix(term)]).unwrap()
}

/// The closed component of E1 containing 0000.
pub fn e1_closed_component() -> BTreeSet<DitString> {
    ["0000", "0110", "1001", "1111"].iter().map(|s| s.parse().unwrap()).collect()
}

/// The paper's worked subset S = {0000, 0011, 1100, 1111}.
pub fn e1_worked_subset() -> BTreeSet<DitString> {
    ["0000", "0011", "1100", "1111"].iter().map(|s| s.parse().unwrap()).collect()
}

/// The 8-string support after correcting the {0,3} term on the worked
/// subset.
pub fn e1_expanded_subset() -> BTreeSet<DitString> {
    ["0000", "0110", "0011", "0101", "1100", "1010", "1111", "1001"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}
