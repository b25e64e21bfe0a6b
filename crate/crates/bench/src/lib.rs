//! Instance builders shared by the benchmark targets.

use stoqwalk::dits::Alphabet;
use stoqwalk::instance::{Class, HamiltonianInstance, SetConstraint, Term};

fn bell_classes() -> Vec<Class> {
    let class = |strings: &[&str]| strings.iter().map(|s| s.parse().unwrap()).collect();
    vec![class(&["00", "11"]), class(&["01", "10"])]
}

/// A ring of overlapping Bell-pair terms on `n` qubits with one
/// class-deficient diagonal term, frustrated for n >= 3.
pub fn frustrated_ring(n: usize) -> HamiltonianInstance {
    let class = |strings: &[&str]| strings.iter().map(|s| s.parse().unwrap()).collect();
    let mut terms: Vec<Term> = (0..n)
        .map(|i| {
            Term::Sets(SetConstraint {
                qudits: vec![i, (i + 1) % n],
                classes: bell_classes(),
            })
        })
        .collect();
    terms.push(Term::Sets(SetConstraint {
        qudits: vec![0, n / 2],
        classes: vec![class(&["00"]), class(&["01"]), class(&["10"])],
    }));
    HamiltonianInstance::new(Alphabet::new(2).unwrap(), n, 2, 3, terms).unwrap()
}

/// An open chain of Bell-pair terms: frustration-free at any size.
pub fn bell_chain(n: usize) -> HamiltonianInstance {
    let terms = (0..n - 1)
        .map(|i| {
            Term::Sets(SetConstraint { qudits: vec![i, i + 1], classes: bell_classes() })
        })
        .collect();
    HamiltonianInstance::new(Alphabet::new(2).unwrap(), n, 2, 2, terms).unwrap()
}
