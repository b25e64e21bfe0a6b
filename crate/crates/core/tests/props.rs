//! Property suites: the restrict/splice section-retraction pair, the
//! SetCSP round trip, decomposition reassembly, one-term expansion and
//! retention, hat-composition against dense projections, and the radius
//! bound sanity checks.

mod common;

use std::collections::BTreeSet;

use num::rational::BigRational;
use num::{BigUint, One, ToPrimitive};
use proptest::prelude::*;

use stoqwalk::decompose;
use stoqwalk::dits::{Alphabet, DitString};
use stoqwalk::expansion::{self, SubsetSupport};
use stoqwalk::graph;
use stoqwalk::instance::{from_setcsp, to_setcsp, HamiltonianInstance, SetCspInstance, Term};
use stoqwalk::oracle::{self, Method};
use stoqwalk::CounterRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// splice(x, B, restrict(x, B)) = x, and restrict(splice(x, B, v), B) = v.
    #[test]
    fn restrict_splice_section_retraction(
        symbols in proptest::collection::vec(0u8..3, 1..12),
        picks in proptest::collection::vec(any::<proptest::sample::Index>(), 1..6),
        fill in proptest::collection::vec(0u8..3, 6),
    ) {
        let x = DitString::new(symbols.clone());
        let mut positions: Vec<usize> =
            picks.iter().map(|p| p.index(symbols.len())).collect::<BTreeSet<_>>().into_iter().collect();
        positions.sort_unstable();

        let r = x.restrict(&positions).unwrap();
        prop_assert_eq!(x.splice(&positions, &r).unwrap(), x.clone());

        let v = DitString::new(fill[..positions.len()].to_vec());
        let y = x.splice(&positions, &v).unwrap();
        prop_assert_eq!(y.restrict(&positions).unwrap(), v);
        for (i, &s) in x.symbols().iter().enumerate() {
            if !positions.contains(&i) {
                prop_assert_eq!(y.symbol(i), s);
            }
        }
    }
}

#[test]
fn setcsp_round_trip_on_random_instances() {
    let mut rng = CounterRng::new(101);
    for _ in 0..60 {
        let inst = common::random_instance(&mut rng, 4, 2, 2, 4);
        let csp = to_setcsp(&inst).unwrap();
        let back = from_setcsp(&csp).unwrap();
        let csp2 = to_setcsp(&back).unwrap();
        for (a, b) in csp.constraints.iter().zip(&csp2.constraints) {
            assert_eq!(a.qudits, b.qudits);
            let sa: BTreeSet<_> = a.classes.iter().cloned().collect();
            let sb: BTreeSet<_> = b.classes.iter().cloned().collect();
            assert_eq!(sa, sb, "classes changed across the round trip");
        }
    }
}

#[test]
fn instance_locality_and_degree_invariants() {
    let mut rng = CounterRng::new(7);
    let mut fixtures = vec![
        stoqwalk::fixtures::e1(),
        stoqwalk::fixtures::e2(),
        stoqwalk::fixtures::e3(),
        stoqwalk::fixtures::e4(),
        stoqwalk::fixtures::e5(),
    ];
    for _ in 0..40 {
        fixtures.push(common::random_instance(&mut rng, 5, 2, 3, 6));
    }
    for inst in &fixtures {
        let mut membership_total = 0usize;
        for term in inst.terms() {
            assert!(term.arity() <= inst.locality());
            membership_total += term.arity();
        }
        assert!(membership_total <= inst.degree() * inst.num_dits());
    }
}

#[test]
fn decomposition_reassembles_random_class_projectors() {
    // Build stoquastic projectors from random class structures, then
    // check the constructive decomposition reproduces both the matrix
    // and the classes.
    let mut rng = CounterRng::new(42);
    let alphabet = Alphabet::new(2).unwrap();
    for round in 0..200 {
        let arity = 1 + (round % 3);
        let classes = common::random_classes(&mut rng, &alphabet, arity);
        let csp = SetCspInstance::new(
            alphabet,
            arity,
            arity,
            1,
            vec![stoqwalk::SetConstraint { qudits: (0..arity).collect(), classes: classes.clone() }],
        )
        .unwrap();
        let inst = from_setcsp(&csp).unwrap();
        let Term::Matrix(m) = &inst.terms()[0] else { panic!("expected matrix term") };

        let p = decompose::groundspace_projector(m, decompose::DEFAULT_TOL).unwrap();
        let d = decompose::nonneg_decomposition(&p, decompose::DEFAULT_TOL).unwrap();
        let residual = (d.reassemble(p.nrows()) - &p).norm();
        assert!(residual <= 10.0 * decompose::DEFAULT_TOL, "reassembly residual {residual}");

        let recovered = decompose::uniformize(&d, &alphabet, arity, decompose::DEFAULT_TOL).unwrap();
        let got: BTreeSet<_> = recovered.into_iter().collect();
        let want: BTreeSet<_> = classes.into_iter().collect();
        assert_eq!(got, want);
    }
}

#[test]
fn one_term_expansion_and_retention_fuzz() {
    let mut rng = CounterRng::new(2024);
    let alphabet = Alphabet::new(2).unwrap();
    let mut checked = 0;
    while checked < 500 {
        let n = 3 + rng.below(3) as usize;
        let inst = common::random_instance(&mut rng, n, 2, 2, 3);
        let s = common::random_subset(&mut rng, &inst);
        let term = rng.below(inst.num_terms() as u64) as usize;
        let ground = inst.ground(term).unwrap();

        // Retention holds for any support with at least one good string.
        let good: BTreeSet<DitString> =
            s.iter().filter(|x| !ground.is_bad(x)).cloned().collect();
        if good.is_empty() {
            continue;
        }
        let out = expansion::apply_projector_subset(&s, ground, term).unwrap();
        for x in &good {
            assert!(out.contains(x), "good string {x} dropped by the projector");
        }

        // The expansion bound needs a bad-free support.
        let clean = SubsetSupport::new(good).unwrap();
        let delta = expansion::term_energy_subset(&clean, ground);
        let grown = expansion::apply_projector_subset(&clean, ground, term).unwrap();
        let lhs = BigRational::from_integer(grown.len().into());
        let rhs = (BigRational::one() + delta / BigRational::from_integer(2.into()))
            * BigRational::from_integer(clean.len().into());
        assert!(lhs >= rhs, "one-term expansion violated");
        checked += 1;
    }
    let _ = alphabet;
}

#[test]
fn hat_composition_matches_dense_projection() {
    // Support-level sequential application equals the support of the
    // dense composed projection, including for overlapping terms.
    let mut rng = CounterRng::new(5150);
    for _ in 0..80 {
        let n = 3 + rng.below(2) as usize;
        let inst = common::random_instance(&mut rng, n, 2, 2, 3);
        let s = common::random_subset(&mut rng, &inst);
        let t1 = rng.below(inst.num_terms() as u64) as usize;
        let t2 = rng.below(inst.num_terms() as u64) as usize;

        // Hat route.
        let hat = expansion::apply_projector_subset(&s, inst.ground(t1).unwrap(), t1)
            .and_then(|mid| expansion::apply_projector_subset(&mid, inst.ground(t2).unwrap(), t2));

        // Dense route: P~_{t2} P~_{t1} |S>.
        let alphabet = inst.alphabet();
        let dim = alphabet.dim(n).unwrap();
        let mut v = nalgebra::DVector::<f64>::zeros(dim);
        for x in s.iter() {
            v[alphabet.index_of(x)] = 1.0;
        }
        for &t in &[t1, t2] {
            let ground = inst.ground(t).unwrap();
            let mut next = nalgebra::DVector::<f64>::zeros(dim);
            for idx in 0..dim {
                if v[idx] == 0.0 {
                    continue;
                }
                let x = alphabet.string_at(idx, n);
                if let Some(class) = ground.class_containing(&x) {
                    let amp = 1.0 / class.len() as f64;
                    for u in class {
                        let y = x.splice(&ground.qudits, u).unwrap();
                        next[alphabet.index_of(&y)] += amp * v[idx];
                    }
                }
            }
            v = next;
        }
        let dense_support: BTreeSet<DitString> = (0..dim)
            .filter(|&i| v[i] > 1e-9)
            .map(|i| alphabet.string_at(i, n))
            .collect();

        match hat {
            Ok(out) => assert_eq!(out.strings(), &dense_support),
            Err(_) => assert!(dense_support.is_empty(), "hat annihilated but dense did not"),
        }
    }
}

#[test]
fn walk_reproducibility_across_instances() {
    let mut rng = CounterRng::new(99);
    for _ in 0..20 {
        let inst = common::random_instance(&mut rng, 4, 2, 2, 4);
        if let Some(start) = common::first_good_string(&inst) {
            let a = graph::bt_walk(&start, &inst, 40, 11).unwrap();
            let b = graph::bt_walk(&start, &inst, 40, 11).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn min_bad_distance_within_theoretical_radius() {
    // Trivially satisfied at desk scale, asserted anyway.
    let mut cases: Vec<(HamiltonianInstance, f64)> = vec![
        (stoqwalk::fixtures::e3(), 0.5),
        (stoqwalk::fixtures::e5(), 0.048),
    ];
    for case in common::frustrated_corpus(314, 10, 6) {
        cases.push((case.inst, case.eps));
    }
    for (inst, eps) in cases {
        let report = oracle::ground_energy(&inst, Method::Dense).unwrap();
        assert!(report.lambda_min >= eps - 1e-9, "epsilon not certified");
        let Some(max_dist) = oracle::max_min_bad_distance(&inst).unwrap() else {
            panic!("frustrated instance with an unreachable bad string");
        };
        let bound = graph::theoretical_radius(
            eps,
            inst.locality() as u32,
            inst.degree() as u32,
            inst.alphabet().q(),
        )
        .unwrap();
        assert!(BigUint::from(max_dist) <= bound.path_bound);
    }
}

#[test]
fn union_commutator_matches_dense_on_shared_support() {
    // Two terms on the same 2-qubit support inside a 3-qubit instance:
    // the union-support commutator decision must agree with the full
    // dense commutator.
    let mut rng = CounterRng::new(321);
    for _ in 0..40 {
        let alphabet = Alphabet::new(2).unwrap();
        let c1 = common::random_classes(&mut rng, &alphabet, 2);
        let c2 = common::random_classes(&mut rng, &alphabet, 2);
        let inst = HamiltonianInstance::new(
            alphabet,
            3,
            2,
            2,
            vec![
                Term::Sets(stoqwalk::SetConstraint { qudits: vec![0, 1], classes: c1 }),
                Term::Sets(stoqwalk::SetConstraint { qudits: vec![0, 1], classes: c2 }),
            ],
        )
        .unwrap();
        let union_verdict = stoqwalk::verify::check_commuting(&inst, 1e-9).unwrap();

        // Dense 3-qubit commutator of the I - P embeddings.
        let h = oracle::dense_hamiltonian(&inst).unwrap();
        let _ = h; // terms share support; build projectors directly
        let p = |t: usize| -> nalgebra::DMatrix<f64> {
            let ground = inst.ground(t).unwrap();
            let dim = 8;
            let mut m = nalgebra::DMatrix::<f64>::zeros(dim, dim);
            for idx in 0..dim {
                let x = inst.alphabet().string_at(idx, 3);
                if let Some(class) = ground.class_containing(&x) {
                    let amp = 1.0 / class.len() as f64;
                    for u in class {
                        let y = x.splice(&ground.qudits, u).unwrap();
                        m[(idx, inst.alphabet().index_of(&y))] = amp;
                    }
                }
            }
            m
        };
        let (a, b) = (p(0), p(1));
        let dense_commutes = (&a * &b - &b * &a).norm() < 1e-9;
        assert_eq!(union_verdict, dense_commutes);
    }
}

#[test]
fn variational_bound_on_sampled_subsets() {
    let mut rng = CounterRng::new(808);
    for _ in 0..30 {
        let inst = common::random_instance(&mut rng, 4, 2, 2, 4);
        let ground = oracle::ground_energy(&inst, Method::Dense).unwrap();
        for _ in 0..5 {
            let s = common::random_subset(&mut rng, &inst);
            let energy = expansion::instance_energy_subset(&s, &inst).unwrap();
            assert!(
                ground.lambda_min <= energy.to_f64().unwrap() + 1e-9,
                "subset energy below ground energy"
            );
        }
    }
}

#[test]
fn min_unsat_upper_bounds_ground_energy_e3() {
    let csp = to_setcsp(&stoqwalk::fixtures::e3()).unwrap();
    let min = oracle::min_unsat_over_subsets(&csp).unwrap();
    let ground = oracle::ground_energy(&stoqwalk::fixtures::e3(), Method::Dense).unwrap();
    assert!(min.to_f64().unwrap() >= ground.lambda_min - 1e-9);
}
