//! JSON file formats for instances, SetCSPs, and circuits.
//!
//! Instance files carry `{alphabet_size, num_dits, k, d, terms: [...]}`
//! with each term either set-form (`classes`) or matrix-form (`entries`).
//! Class strings are digit strings when the alphabet has at most 10
//! symbols and arrays of integers otherwise. Matrix entries are decimal
//! floats or exact rationals `{num, den}`; all-rational matrices are kept
//! exact internally. Qudit indexing is 0-based.

use nalgebra::DMatrix;
use num::rational::BigRational;
use num::{BigInt, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::decompose;
use crate::dits::{Alphabet, DitString};
use crate::error::{Error, Result};
use crate::instance::{Class, HamiltonianInstance, SetConstraint, SetCspInstance, Term};

#[derive(Debug, Serialize, Deserialize)]
struct RawInstance {
    alphabet_size: u32,
    num_dits: usize,
    k: usize,
    d: usize,
    terms: Vec<RawTerm>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSetCsp {
    alphabet_size: u32,
    num_dits: usize,
    k: usize,
    d: usize,
    constraints: Vec<RawConstraint>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawTerm {
    qudits: Vec<usize>,
    form: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<Vec<RawString>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<Vec<RawEntry>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawConstraint {
    qudits: Vec<usize>,
    classes: Vec<Vec<RawString>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawString {
    Digits(String),
    Symbols(Vec<u8>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Rational { num: i64, den: i64 },
    Float(f64),
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_instance(raw: &[u8]) -> Result<HamiltonianInstance> {
    let raw: RawInstance = serde_json::from_slice(raw).map_err(json_err)?;
    let alphabet = Alphabet::new(raw.alphabet_size)?;
    let terms = raw
        .terms
        .into_iter()
        .enumerate()
        .map(|(i, t)| build_term(t, &alphabet).map_err(|e| Error::Parse(format!("term {i}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    HamiltonianInstance::new(alphabet, raw.num_dits, raw.k, raw.d, terms)
}

pub fn parse_setcsp(raw: &[u8]) -> Result<SetCspInstance> {
    let raw: RawSetCsp = serde_json::from_slice(raw).map_err(json_err)?;
    let alphabet = Alphabet::new(raw.alphabet_size)?;
    let constraints = raw
        .constraints
        .into_iter()
        .map(|c| {
            Ok(SetConstraint {
                qudits: c.qudits,
                classes: parse_classes(c.classes)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SetCspInstance::new(alphabet, raw.num_dits, raw.k, raw.d, constraints)
}

/// Either file kind, sniffed by the top-level key.
pub enum AnyInstance {
    Hamiltonian(HamiltonianInstance),
    SetCsp(SetCspInstance),
}

pub fn parse_any(raw: &[u8]) -> Result<AnyInstance> {
    let probe: serde_json::Value = serde_json::from_slice(raw).map_err(json_err)?;
    if probe.get("terms").is_some() {
        Ok(AnyInstance::Hamiltonian(parse_instance(raw)?))
    } else if probe.get("constraints").is_some() {
        Ok(AnyInstance::SetCsp(parse_setcsp(raw)?))
    } else {
        Err(Error::Parse("file has neither a 'terms' nor a 'constraints' field".into()))
    }
}

fn build_term(raw: RawTerm, alphabet: &Alphabet) -> Result<Term> {
    match raw.form.as_str() {
        "sets" => {
            let classes = raw
                .classes
                .ok_or_else(|| Error::Parse("set-form term without 'classes'".into()))?;
            Ok(Term::Sets(SetConstraint {
                qudits: raw.qudits,
                classes: parse_classes(classes)?,
            }))
        }
        "matrix" => {
            let rows = raw
                .entries
                .ok_or_else(|| Error::Parse("matrix-form term without 'entries'".into()))?;
            let dim = rows.len();
            let mut floats = Vec::with_capacity(dim * dim);
            let mut exact = Vec::with_capacity(dim * dim);
            let mut all_exact = true;
            for row in &rows {
                if row.len() != dim {
                    return Err(Error::Parse("matrix rows have inconsistent lengths".into()));
                }
                for entry in row {
                    match entry {
                        RawEntry::Float(f) => {
                            floats.push(*f);
                            all_exact = false;
                            exact.push(BigRational::from_integer(0.into()));
                        }
                        RawEntry::Rational { num, den } => {
                            if *den == 0 {
                                return Err(Error::Parse("rational entry with zero denominator".into()));
                            }
                            floats.push(*num as f64 / *den as f64);
                            exact.push(BigRational::new(BigInt::from(*num), BigInt::from(*den)));
                        }
                    }
                }
            }
            let matrix = DMatrix::from_row_slice(dim, dim, &floats);
            let exact = if all_exact { Some(exact) } else { None };
            let term = decompose::prepare_matrix_term(raw.qudits, matrix, exact, alphabet)?;
            Ok(Term::Matrix(term))
        }
        other => Err(Error::Parse(format!("unknown term form {other:?}"))),
    }
}

fn parse_classes(raw: Vec<Vec<RawString>>) -> Result<Vec<Class>> {
    let mut classes = raw
        .into_iter()
        .map(|class| {
            class
                .into_iter()
                .map(|s| match s {
                    RawString::Digits(d) => d.parse::<DitString>(),
                    RawString::Symbols(v) => Ok(DitString::new(v)),
                })
                .collect::<Result<Class>>()
        })
        .collect::<Result<Vec<Class>>>()?;
    // Same canonical order as the decomposition pipeline.
    classes.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
    Ok(classes)
}

fn render_class(class: &Class, q: u32) -> Vec<RawString> {
    class
        .iter()
        .map(|s| {
            if q <= 10 {
                RawString::Digits(s.to_string())
            } else {
                RawString::Symbols(s.symbols().to_vec())
            }
        })
        .collect()
}

/// Serializes an instance back to the file format. Exact-rational
/// matrices re-emit their raw entries; float matrices re-emit the
/// groundshifted values.
pub fn render_instance(inst: &HamiltonianInstance) -> Result<String> {
    let q = inst.alphabet().q();
    let terms = inst
        .terms()
        .iter()
        .map(|term| match term {
            Term::Sets(c) => Ok(RawTerm {
                qudits: c.qudits.clone(),
                form: "sets".into(),
                classes: Some(c.classes.iter().map(|cl| render_class(cl, q)).collect()),
                entries: None,
            }),
            Term::Matrix(m) => {
                let dim = m.matrix.nrows();
                let mut rows = Vec::with_capacity(dim);
                for i in 0..dim {
                    let mut row = Vec::with_capacity(dim);
                    for j in 0..dim {
                        row.push(match &m.exact {
                            Some(exact) => {
                                let r = &exact[i * dim + j];
                                let (num, den) = (
                                    r.numer().to_i64().ok_or_else(|| {
                                        Error::Validation("rational entry overflows i64".into())
                                    })?,
                                    r.denom().to_i64().ok_or_else(|| {
                                        Error::Validation("rational entry overflows i64".into())
                                    })?,
                                );
                                RawEntry::Rational { num, den }
                            }
                            None => RawEntry::Float(m.matrix[(i, j)]),
                        });
                    }
                    rows.push(row);
                }
                Ok(RawTerm {
                    qudits: m.qudits.clone(),
                    form: "matrix".into(),
                    classes: None,
                    entries: Some(rows),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let raw = RawInstance {
        alphabet_size: q,
        num_dits: inst.num_dits(),
        k: inst.locality(),
        d: inst.degree(),
        terms,
    };
    serde_json::to_string_pretty(&raw).map_err(json_err)
}

pub fn render_setcsp(csp: &SetCspInstance) -> Result<String> {
    let q = csp.alphabet.q();
    let raw = RawSetCsp {
        alphabet_size: q,
        num_dits: csp.n,
        k: csp.k,
        d: csp.d,
        constraints: csp
            .constraints
            .iter()
            .map(|c| RawConstraint {
                qudits: c.qudits.clone(),
                classes: c.classes.iter().map(|cl| render_class(cl, q)).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).map_err(json_err)
}
