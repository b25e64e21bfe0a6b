//! Reversible verification circuits and their compilation into uniform
//! stoquastic local Hamiltonians.
//!
//! Circuits use the {NOT, CNOT, TOFFOLI} gate set over wires with roles:
//! witness bits, workspace ancillas fixed to 0, and random bits prepared
//! in the plus state. Compilation emits a domain-wall-clock instance over
//! the data wires plus `T + 1` clock qubits; every emitted term is
//! matrix-form with entries in `{0, +-1, +-1/2}` and passes the uniform
//! stoquastic pipeline at load.
//!
//! Clock layout: qubits `c_0..c_T` after the data wires; time `t` is the
//! configuration `1^t 0^{T+1-t}`. Adjacent `|01><01|` penalties keep the
//! wall well formed and a `|1><1|` cap on `c_T` pins the final qubit so
//! exactly the `T + 1` time configurations survive.

use nalgebra::DMatrix;
use num::rational::BigRational;
use num::BigInt;
use serde::{Deserialize, Serialize};

use crate::decompose;
use crate::dits::Alphabet;
use crate::error::{Error, Result};
use crate::instance::{HamiltonianInstance, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireRole {
    Witness,
    AncillaZero,
    AncillaPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Not,
    Cnot,
    Toffoli,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Not => 1,
            GateKind::Cnot => 2,
            GateKind::Toffoli => 3,
        }
    }
}

/// One gate; `targets` lists controls first and the flipped wire last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReversibleCircuit {
    pub wires: Vec<WireRole>,
    pub gates: Vec<Gate>,
    pub output: usize,
}

impl ReversibleCircuit {
    pub fn validate(&self) -> Result<()> {
        if self.wires.is_empty() {
            return Err(Error::Circuit("circuit has no wires".into()));
        }
        if self.output >= self.wires.len() {
            return Err(Error::Circuit(format!("output wire {} out of range", self.output)));
        }
        for (i, gate) in self.gates.iter().enumerate() {
            if gate.targets.len() != gate.kind.arity() {
                return Err(Error::Circuit(format!(
                    "gate {i} has {} targets, expected {}",
                    gate.targets.len(),
                    gate.kind.arity()
                )));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &w in &gate.targets {
                if w >= self.wires.len() {
                    return Err(Error::Circuit(format!("gate {i}: wire {w} out of range")));
                }
                if !seen.insert(w) {
                    return Err(Error::Circuit(format!("gate {i}: wire {w} repeated")));
                }
            }
        }
        Ok(())
    }

    pub fn witness_wires(&self) -> Vec<usize> {
        self.role_wires(WireRole::Witness)
    }

    pub fn plus_wires(&self) -> Vec<usize> {
        self.role_wires(WireRole::AncillaPlus)
    }

    fn role_wires(&self, role: WireRole) -> Vec<usize> {
        (0..self.wires.len()).filter(|&w| self.wires[w] == role).collect()
    }
}

pub fn parse_circuit(raw: &[u8]) -> Result<ReversibleCircuit> {
    #[derive(Deserialize)]
    struct RawWire {
        role: WireRole,
    }
    #[derive(Deserialize)]
    struct RawCircuit {
        wires: Vec<RawWire>,
        gates: Vec<Gate>,
        output: usize,
    }
    let raw: RawCircuit = serde_json::from_slice(raw).map_err(|e| Error::Parse(e.to_string()))?;
    let circuit = ReversibleCircuit {
        wires: raw.wires.into_iter().map(|w| w.role).collect(),
        gates: raw.gates,
        output: raw.output,
    };
    circuit.validate()?;
    Ok(circuit)
}

pub fn render_circuit(c: &ReversibleCircuit) -> Result<String> {
    let wires: Vec<serde_json::Value> = c
        .wires
        .iter()
        .map(|r| serde_json::json!({ "role": r }))
        .collect();
    let value = serde_json::json!({
        "wires": wires,
        "gates": c.gates,
        "output": c.output,
    });
    serde_json::to_string_pretty(&value).map_err(|e| Error::Parse(e.to_string()))
}

/// Classical reversible evaluation: accept iff the output wire reads 1.
/// `witness` and `random` fill the witness and plus wires in wire order.
pub fn simulate_circuit(
    c: &ReversibleCircuit,
    witness: &[bool],
    random: &[bool],
) -> Result<bool> {
    c.validate()?;
    let witness_wires = c.witness_wires();
    let plus_wires = c.plus_wires();
    if witness.len() != witness_wires.len() {
        return Err(Error::Circuit(format!(
            "witness has {} bits, circuit has {} witness wires",
            witness.len(),
            witness_wires.len()
        )));
    }
    if random.len() != plus_wires.len() {
        return Err(Error::Circuit(format!(
            "random string has {} bits, circuit has {} plus wires",
            random.len(),
            plus_wires.len()
        )));
    }
    let mut state = vec![false; c.wires.len()];
    for (&w, &b) in witness_wires.iter().zip(witness) {
        state[w] = b;
    }
    for (&w, &b) in plus_wires.iter().zip(random) {
        state[w] = b;
    }
    for gate in &c.gates {
        let flip = match gate.kind {
            GateKind::Not => true,
            GateKind::Cnot => state[gate.targets[0]],
            GateKind::Toffoli => state[gate.targets[0]] && state[gate.targets[1]],
        };
        if flip {
            let t = *gate.targets.last().unwrap();
            state[t] = !state[t];
        }
    }
    Ok(state[c.output])
}

/// Rewrites the circuit so every wire participates in at most 3 gates,
/// by copying a wire to a fresh zero ancilla with a CNOT whenever its
/// current copy has already been consumed by a computation gate. Each
/// copy then appears at most as a CNOT target, in one computation gate,
/// and as the source of the next CNOT.
pub fn degree_reduce(c: &ReversibleCircuit) -> Result<ReversibleCircuit> {
    c.validate()?;
    let mut wires = c.wires.clone();
    let mut gates: Vec<Gate> = Vec::new();
    // live[w]: current physical copy of original wire w.
    let mut live: Vec<usize> = (0..c.wires.len()).collect();
    // consumed[p]: physical wire p has been used in a computation gate.
    let mut consumed = vec![false; c.wires.len()];

    for gate in &c.gates {
        let mut targets = Vec::with_capacity(gate.targets.len());
        for &w in &gate.targets {
            let mut p = live[w];
            if consumed[p] {
                let fresh = wires.len();
                wires.push(WireRole::AncillaZero);
                consumed.push(false);
                gates.push(Gate { kind: GateKind::Cnot, targets: vec![p, fresh] });
                live[w] = fresh;
                p = fresh;
            }
            targets.push(p);
        }
        for &p in &targets {
            consumed[p] = true;
        }
        gates.push(Gate { kind: gate.kind, targets });
    }
    Ok(ReversibleCircuit { wires, gates, output: live[c.output] })
}

/// Maximum number of gates any single wire participates in.
pub fn max_wire_uses(c: &ReversibleCircuit) -> usize {
    let mut uses = vec![0usize; c.wires.len()];
    for gate in &c.gates {
        for &w in &gate.targets {
            uses[w] += 1;
        }
    }
    uses.into_iter().max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompileOptions {
    /// Additionally pin witness wires to 0 at time 0, producing a pinned
    /// instance (the all-zeros configuration is then a valid start).
    pub pinned: bool,
}

/// Local operator under construction: float and exact entries in step.
struct LocalOp {
    dim: usize,
    floats: DMatrix<f64>,
    exact: Vec<BigRational>,
}

impl LocalOp {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            floats: DMatrix::zeros(dim, dim),
            exact: vec![BigRational::from_integer(0.into()); dim * dim],
        }
    }

    fn add(&mut self, row: usize, col: usize, num: i64, den: i64) {
        self.floats[(row, col)] += num as f64 / den as f64;
        self.exact[row * self.dim + col] += BigRational::new(BigInt::from(num), BigInt::from(den));
    }

    fn into_term(self, qudits: Vec<usize>, alphabet: &Alphabet) -> Result<Term> {
        let term = decompose::prepare_matrix_term(qudits, self.floats, Some(self.exact), alphabet)?;
        Ok(Term::Matrix(term))
    }
}

/// Compiles a verification circuit into a uniform stoquastic instance
/// over `wires + T + 1` qubits. See the module docs for the clock layout.
pub fn compile(c: &ReversibleCircuit, opts: CompileOptions) -> Result<HamiltonianInstance> {
    c.validate()?;
    let alphabet = Alphabet::new(2)?;
    let w = c.wires.len();
    let t_count = c.gates.len();
    let clock = |i: usize| w + i; // clock qubit c_i
    let n = w + t_count + 1;
    let mut terms: Vec<Term> = Vec::new();

    // Clock validity: no 01 pattern on adjacent clock pairs.
    for i in 0..t_count {
        let mut op = LocalOp::new(4);
        op.add(1, 1, 1, 1); // |01><01|
        terms.push(op.into_term(vec![clock(i), clock(i + 1)], &alphabet)?);
    }
    // Cap: the last clock qubit stays 0, so exactly times 0..T survive.
    {
        let mut op = LocalOp::new(2);
        op.add(1, 1, 1, 1); // |1><1|
        terms.push(op.into_term(vec![clock(t_count)], &alphabet)?);
    }

    // Input terms, gated on time 0 (c_0 = 0).
    for (wire, role) in c.wires.iter().enumerate() {
        let pin_zero = matches!(role, WireRole::AncillaZero)
            || (opts.pinned && matches!(role, WireRole::Witness));
        if pin_zero {
            // |1><1|_wire (x) |0><0|_{c_0}
            let mut op = LocalOp::new(4);
            op.add(2, 2, 1, 1);
            terms.push(op.into_term(vec![wire, clock(0)], &alphabet)?);
        } else if matches!(role, WireRole::AncillaPlus) {
            // |-><-|_wire (x) |0><0|_{c_0}
            let mut op = LocalOp::new(4);
            op.add(0, 0, 1, 2);
            op.add(2, 2, 1, 2);
            op.add(0, 2, -1, 2);
            op.add(2, 0, -1, 2);
            terms.push(op.into_term(vec![wire, clock(0)], &alphabet)?);
        }
    }

    // Propagation terms, one per gate.
    for (idx, gate) in c.gates.iter().enumerate() {
        let t = idx + 1; // 1-indexed gate time
        // Clock window and the flag configurations for times t-1 and t.
        let (window, flag_before, flag_after): (Vec<usize>, usize, usize) = if t == 1 {
            (vec![clock(0), clock(1)], 0b00, 0b10)
        } else if t == t_count {
            (vec![clock(t - 2), clock(t - 1)], 0b10, 0b11)
        } else {
            (vec![clock(t - 2), clock(t - 1), clock(t)], 0b100, 0b110)
        };
        let wires_dim = 1usize << gate.targets.len();
        let window_dim = 1usize << window.len();
        let dim = wires_dim * window_dim;
        let mut op = LocalOp::new(dim);
        for x in 0..wires_dim {
            let ux = apply_gate_bits(gate.kind, x, gate.targets.len());
            let a = x * window_dim + flag_before;
            let b = ux * window_dim + flag_after;
            op.add(a, a, 1, 2);
            op.add(b, b, 1, 2);
            op.add(a, b, -1, 2);
            op.add(b, a, -1, 2);
        }
        let mut qudits = gate.targets.clone();
        qudits.extend(&window);
        terms.push(op.into_term(qudits, &alphabet)?);
    }

    // Output penalty at time T.
    {
        let mut op = LocalOp::new(4);
        if t_count == 0 {
            // Time T = time 0 is flagged by c_0 = 0.
            op.add(0, 0, 1, 1); // |0><0|_out (x) |0><0|_{c_0}
            terms.push(op.into_term(vec![c.output, clock(0)], &alphabet)?);
        } else {
            op.add(1, 1, 1, 1); // |0><0|_out (x) |1><1|_{c_{T-1}}
            terms.push(op.into_term(vec![c.output, clock(t_count - 1)], &alphabet)?);
        }
    }

    let k = terms.iter().map(|t| t.arity()).max().unwrap();
    let mut degree = vec![0usize; n];
    for term in &terms {
        for &q in term.qudits() {
            degree[q] += 1;
        }
    }
    let d = degree.into_iter().max().unwrap();
    HamiltonianInstance::new(alphabet, n, k, d, terms)
}

/// The gate's permutation on the basis of its own wires (big-endian,
/// controls first).
fn apply_gate_bits(kind: GateKind, x: usize, arity: usize) -> usize {
    let bit = |i: usize| (x >> (arity - 1 - i)) & 1;
    let flip = match kind {
        GateKind::Not => true,
        GateKind::Cnot => bit(0) == 1,
        GateKind::Toffoli => bit(0) == 1 && bit(1) == 1,
    };
    if flip {
        x ^ 1 // the flipped wire is listed last = least significant
    } else {
        x
    }
}

/// The distinct matrix entries emitted by a compiled instance, sorted.
pub fn emitted_entry_set(inst: &HamiltonianInstance) -> Vec<f64> {
    let mut entries: Vec<f64> = Vec::new();
    for term in inst.terms() {
        if let Term::Matrix(m) = term {
            for &v in m.matrix.iter() {
                if !entries.iter().any(|&e| (e - v).abs() < 1e-12) {
                    entries.push(v);
                }
            }
        }
    }
    entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
    entries
}
