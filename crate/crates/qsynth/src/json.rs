//! JSON formats for circuits, states, unitaries and amplitude tables.
//!
//! Complex numbers are `[re, im]` pairs. Matrices of one- and two-qubit gates
//! are flat row-major lists; unitaries are nested row-major arrays.

use std::collections::BTreeMap;
use std::sync::Arc;

use qsynth_core::linalg::{c64, Matrix, C64};
use qsynth_core::qram::PermutationXor;
use qsynth_core::sim::{
    expanded_resources, resources, Bindings, BoundCircuit, Circuit, Direction, Gate, GateClass,
    GateKind, OracleAction, OracleId, ResourceReport, StateVector,
};
use qsynth_core::statesynth::{ClassicalBitOracle, LevelOracle};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Core(#[from] qsynth_core::Error),
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        field: field.into(),
        message: message.into(),
    }
}

pub type Complex = [f64; 2];

fn to_pair(z: C64) -> Complex {
    [z.re, z.im]
}

fn from_pair(p: &Complex, field: &str) -> Result<C64, FormatError> {
    if !p[0].is_finite() || !p[1].is_finite() {
        return Err(field_err(field, "non-finite amplitude"));
    }
    Ok(c64(p[0], p[1]))
}

fn default_format() -> u32 {
    FORMAT_VERSION
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDoc {
    #[serde(default = "default_format")]
    pub format: u32,
    pub num_qubits: usize,
    pub gate_class: String,
    #[serde(default)]
    pub registers: BTreeMap<String, [usize; 2]>,
    pub layers: Vec<Vec<GateDoc>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub oracles: BTreeMap<String, OracleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<ReportDoc>,
    /// Implementation distance from the target, when it was measured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDoc {
    pub kind: String,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Complex>>,
    /// Bit string of a basis reflection, one character per target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    /// `forward` or `backward`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub adjoint: bool,
}

/// Oracle bindings. Nested circuits share the top-level `oracles` map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleDoc {
    Unitary {
        matrix: Vec<Vec<Complex>>,
    },
    Circuit {
        circuit: Box<CircuitDoc>,
    },
    /// Level-`level` query of an amplitude table.
    Level {
        table: TableDoc,
        level: usize,
    },
    /// XOR oracle of a permutation.
    Permutation {
        table: Vec<u64>,
    },
}

/// Amplitude table. Addresses are `(index << n) | h`, where `h` is the heap
/// index of a prefix; values are packed fixed-point pairs. Both in hex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDoc {
    pub n: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub index_bits: usize,
    pub precision_bits: u32,
    pub entries: BTreeMap<String, String>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub depth: usize,
    pub size: usize,
    pub ancillae: usize,
    pub forward_queries: usize,
    pub backward_queries: usize,
    pub queries: usize,
}

impl From<ResourceReport> for ReportDoc {
    fn from(r: ResourceReport) -> Self {
        ReportDoc {
            depth: r.depth,
            size: r.size,
            ancillae: r.ancillae,
            forward_queries: r.forward_queries,
            backward_queries: r.backward_queries,
            queries: r.queries(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub num_qubits: usize,
    pub amps: Vec<Complex>,
}

// ---- gates and circuits ----

fn gate_doc(g: &Gate) -> GateDoc {
    let mut d = GateDoc {
        kind: g.kind.name().to_string(),
        targets: g.targets.clone(),
        matrix: None,
        pattern: None,
        oracle: None,
        direction: None,
        precision_bits: None,
        adjoint: false,
    };
    match &g.kind {
        GateKind::OneQubit(m) => {
            d.matrix = Some(m.iter().flatten().copied().map(to_pair).collect())
        }
        GateKind::TwoQubit(m) => {
            d.matrix = Some(m.iter().flatten().copied().map(to_pair).collect())
        }
        GateKind::BasisReflection(p) => {
            d.pattern = Some(p.iter().map(|&b| if b { '1' } else { '0' }).collect())
        }
        GateKind::OracleCall { direction, oracle } => {
            d.oracle = Some(oracle.0.clone());
            d.direction = Some(
                match direction {
                    Direction::Forward => "forward",
                    Direction::Backward => "backward",
                }
                .into(),
            );
        }
        GateKind::PrepFromRegister {
            precision_bits,
            adjoint,
        } => {
            d.precision_bits = Some(*precision_bits);
            d.adjoint = *adjoint;
        }
        GateKind::Toffoli | GateKind::Fanout => {}
    }
    d
}

fn matrix_entries<const N: usize>(d: &GateDoc, field: &str) -> Result<[[C64; N]; N], FormatError> {
    let m = d
        .matrix
        .as_ref()
        .ok_or_else(|| field_err(field, "missing matrix"))?;
    if m.len() != N * N {
        return Err(field_err(
            format!("{field}.matrix"),
            format!("expected {} entries, found {}", N * N, m.len()),
        ));
    }
    let mut out = [[C64::new(0.0, 0.0); N]; N];
    for (i, p) in m.iter().enumerate() {
        out[i / N][i % N] = from_pair(p, &format!("{field}.matrix[{i}]"))?;
    }
    Ok(out)
}

fn parse_gate(d: &GateDoc, num_qubits: usize, field: &str) -> Result<Gate, FormatError> {
    let kind = match d.kind.as_str() {
        "one_qubit" => GateKind::OneQubit(matrix_entries::<2>(d, field)?),
        "two_qubit" => GateKind::TwoQubit(Box::new(matrix_entries::<4>(d, field)?)),
        "toffoli" => GateKind::Toffoli,
        "fanout" => GateKind::Fanout,
        "basis_reflection" => {
            let p = d
                .pattern
                .as_ref()
                .ok_or_else(|| field_err(field, "missing pattern"))?;
            let bits = p
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(field_err(
                        format!("{field}.pattern"),
                        "expected a bit string",
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?;
            GateKind::BasisReflection(bits)
        }
        "oracle_call" => {
            let oracle = d
                .oracle
                .as_ref()
                .ok_or_else(|| field_err(field, "missing oracle"))?;
            let direction = match d.direction.as_deref() {
                None | Some("forward") => Direction::Forward,
                Some("backward") => Direction::Backward,
                Some(other) => {
                    return Err(field_err(
                        format!("{field}.direction"),
                        format!("unknown direction `{other}`"),
                    ))
                }
            };
            GateKind::OracleCall {
                direction,
                oracle: OracleId::new(oracle.clone()),
            }
        }
        "prep_from_register" => GateKind::PrepFromRegister {
            precision_bits: d
                .precision_bits
                .ok_or_else(|| field_err(field, "missing precision_bits"))?,
            adjoint: d.adjoint,
        },
        other => {
            return Err(field_err(
                format!("{field}.kind"),
                format!("unknown gate kind `{other}`"),
            ))
        }
    };
    let g = Gate {
        kind,
        targets: d.targets.clone(),
    };
    g.validate(num_qubits)
        .map_err(|e| field_err(field, e.to_string()))?;
    Ok(g)
}

fn circuit_body(c: &Circuit) -> CircuitDoc {
    CircuitDoc {
        format: FORMAT_VERSION,
        num_qubits: c.num_qubits(),
        gate_class: c.gate_class().name().to_string(),
        registers: c
            .registers()
            .iter()
            .map(|(k, &(s, l))| (k.clone(), [s, l]))
            .collect(),
        layers: c
            .layers()
            .iter()
            .map(|l| l.iter().map(gate_doc).collect())
            .collect(),
        oracles: BTreeMap::new(),
        resources: None,
        distance: None,
    }
}

fn parse_body(d: &CircuitDoc, field: &str) -> Result<Circuit, FormatError> {
    if d.format != FORMAT_VERSION {
        return Err(field_err(
            format!("{field}format"),
            format!("unsupported format {}", d.format),
        ));
    }
    let class = GateClass::parse(&d.gate_class).ok_or_else(|| {
        field_err(
            format!("{field}gate_class"),
            format!("unknown gate class `{}`", d.gate_class),
        )
    })?;
    let mut layers = Vec::with_capacity(d.layers.len());
    for (li, layer) in d.layers.iter().enumerate() {
        let mut gates = Vec::with_capacity(layer.len());
        for (gi, g) in layer.iter().enumerate() {
            gates.push(parse_gate(
                g,
                d.num_qubits,
                &format!("{field}layers[{li}][{gi}]"),
            )?);
        }
        layers.push(gates);
    }
    let registers = d
        .registers
        .iter()
        .map(|(k, &[s, l])| (k.clone(), (s, l)))
        .collect();
    Circuit::new(d.num_qubits, class, registers, layers)
        .map_err(|e| field_err(format!("{field}layers"), e.to_string()))
}

// ---- oracles ----

pub fn table_doc(t: &ClassicalBitOracle) -> TableDoc {
    TableDoc {
        n: t.n,
        index_bits: t.index_bits,
        precision_bits: t.precision_bits,
        entries: t
            .entries
            .iter()
            .map(|(a, v)| (format!("{a:x}"), format!("{v:x}")))
            .collect(),
    }
}

fn parse_hex(s: &str, field: &str) -> Result<u128, FormatError> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    u128::from_str_radix(digits, 16).map_err(|_| field_err(field, format!("`{s}` is not hex")))
}

pub fn parse_table(d: &TableDoc, field: &str) -> Result<ClassicalBitOracle, FormatError> {
    let mut entries = BTreeMap::new();
    for (a, v) in &d.entries {
        let addr = parse_hex(a, &format!("{field}.entries"))?;
        let addr = u64::try_from(addr)
            .map_err(|_| field_err(format!("{field}.entries"), format!("address {a} too wide")))?;
        entries.insert(addr, parse_hex(v, &format!("{field}.entries[{a}]"))?);
    }
    let t = ClassicalBitOracle {
        n: d.n,
        index_bits: d.index_bits,
        precision_bits: d.precision_bits,
        entries,
    };
    t.check().map_err(|e| field_err(field, e.to_string()))?;
    Ok(t)
}

pub fn unitary_doc(u: &Matrix) -> Vec<Vec<Complex>> {
    (0..u.nrows())
        .map(|i| (0..u.ncols()).map(|j| to_pair(u[(i, j)])).collect())
        .collect()
}

pub fn parse_unitary_rows(rows: &[Vec<Complex>], field: &str) -> Result<Matrix, FormatError> {
    let dim = rows.len();
    if dim == 0 || !dim.is_power_of_two() || dim < 2 {
        return Err(field_err(
            field,
            format!("{dim} rows is not a power of two >= 2"),
        ));
    }
    let mut m = Matrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(field_err(
                format!("{field}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        for (j, p) in row.iter().enumerate() {
            m[(i, j)] = from_pair(p, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn oracle_doc(id: &OracleId, action: &OracleAction) -> Result<OracleDoc, FormatError> {
    Ok(match action {
        OracleAction::Unitary(m) => OracleDoc::Unitary {
            matrix: unitary_doc(m),
        },
        OracleAction::Circuit(c) => OracleDoc::Circuit {
            circuit: Box::new(circuit_body(c)),
        },
        OracleAction::Classical(f) => {
            let any = f.as_any();
            if let Some(l) = any.downcast_ref::<LevelOracle>() {
                OracleDoc::Level {
                    table: table_doc(&l.table),
                    level: l.level,
                }
            } else if let Some(p) = any.downcast_ref::<PermutationXor>() {
                OracleDoc::Permutation {
                    table: p.table.clone(),
                }
            } else {
                return Err(field_err(
                    format!("oracles.{id}"),
                    "classical function has no serialized form",
                ));
            }
        }
    })
}

fn parse_oracle(d: &OracleDoc, field: &str) -> Result<OracleAction, FormatError> {
    let action = match d {
        OracleDoc::Unitary { matrix } => {
            OracleAction::Unitary(parse_unitary_rows(matrix, &format!("{field}.matrix"))?)
        }
        OracleDoc::Circuit { circuit } => {
            if !circuit.oracles.is_empty() {
                return Err(field_err(
                    format!("{field}.circuit.oracles"),
                    "nested circuits use the top-level oracle map",
                ));
            }
            OracleAction::Circuit(Box::new(parse_body(circuit, &format!("{field}.circuit."))?))
        }
        OracleDoc::Level { table, level } => {
            let t = parse_table(table, &format!("{field}.table"))?;
            if *level == 0 || *level > t.n {
                return Err(field_err(
                    format!("{field}.level"),
                    format!("level {level} outside 1..={}", t.n),
                ));
            }
            OracleAction::Classical(Arc::new(LevelOracle {
                table: Arc::new(t),
                level: *level,
            }))
        }
        OracleDoc::Permutation { table } => {
            let a = qsynth_core::qram::permutation_qram(table)
                .map_err(|e| field_err(format!("{field}.table"), e.to_string()))?;
            a.action().clone()
        }
    };
    action
        .check()
        .map_err(|e| field_err(field, e.to_string()))?;
    Ok(action)
}

// ---- public entry points ----

/// Serializes a circuit with its oracles and expanded resource counts.
pub fn circuit_to_doc(c: &Circuit, bindings: &Bindings) -> Result<CircuitDoc, FormatError> {
    let mut d = circuit_body(c);
    for (id, action) in bindings.iter() {
        d.oracles.insert(id.0.clone(), oracle_doc(id, action)?);
    }
    let report = expanded_resources(c, bindings).unwrap_or_else(|_| resources(c));
    d.resources = Some(report.into());
    Ok(d)
}

pub fn bound_to_doc(bc: &BoundCircuit) -> Result<CircuitDoc, FormatError> {
    circuit_to_doc(&bc.circuit, &bc.bindings)
}

/// Parses a circuit; `resources` and `distance` are informational and ignored.
pub fn doc_to_circuit(d: &CircuitDoc) -> Result<BoundCircuit, FormatError> {
    let circuit = parse_body(d, "")?;
    let mut bindings = Bindings::new();
    for (id, o) in &d.oracles {
        bindings.bind(
            OracleId::new(id.clone()),
            parse_oracle(o, &format!("oracles.{id}"))?,
        );
    }
    Ok(BoundCircuit { circuit, bindings })
}

pub fn parse_circuit(text: &str) -> Result<BoundCircuit, FormatError> {
    doc_to_circuit(&serde_json::from_str(text)?)
}

pub fn state_doc(s: &StateVector) -> StateDoc {
    StateDoc {
        num_qubits: s.num_qubits(),
        amps: s.amps().iter().copied().map(to_pair).collect(),
    }
}

pub fn doc_to_state(d: &StateDoc) -> Result<StateVector, FormatError> {
    if d.num_qubits == 0 || d.num_qubits > 30 || d.amps.len() != 1usize << d.num_qubits {
        return Err(field_err(
            "amps",
            format!(
                "expected 2^{} amplitudes, found {}",
                d.num_qubits,
                d.amps.len()
            ),
        ));
    }
    let amps = d
        .amps
        .iter()
        .enumerate()
        .map(|(i, p)| from_pair(p, &format!("amps[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    StateVector::from_amps(amps).map_err(|e| field_err("amps", e.to_string()))
}

pub fn parse_state(text: &str) -> Result<StateVector, FormatError> {
    doc_to_state(&serde_json::from_str(text)?)
}

pub fn parse_unitary(text: &str) -> Result<Matrix, FormatError> {
    let rows: Vec<Vec<Complex>> = serde_json::from_str(text)?;
    parse_unitary_rows(&rows, "unitary")
}

/// Serializes with or without indentation.
pub fn to_string<T: Serialize>(value: &T, pretty: bool) -> String {
    let r = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    r.expect("documents contain only finite numbers and string keys")
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsynth_core::grover::{build_exact_grover, MarkedReflectionOracle};
    use qsynth_core::linalg::{hadamard, ry};

    #[test]
    fn gate_round_trip() {
        let gates = vec![
            vec![Gate::one_qubit(0, hadamard()), Gate::toffoli(1, &[2, 3])],
            vec![Gate::fanout(0, &[1, 2]), Gate::controlled(3, 4, &ry(0.3))],
            vec![Gate::reflection(vec![4, 0], vec![true, false])],
        ];
        let c = Circuit::new(5, GateClass::Qacf0, Default::default(), gates).unwrap();
        let d = circuit_to_doc(&c, &Bindings::new()).unwrap();
        let text = to_string(&d, false);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(back.circuit, c);
    }

    #[test]
    fn grover_with_oracle() {
        let c = build_exact_grover(3).unwrap();
        let o = MarkedReflectionOracle::new(3, 5).unwrap();
        let d = circuit_to_doc(&c, &o.bindings()).unwrap();
        let text = to_string(&d, true);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(back.circuit, c);
        assert_eq!(to_string(&bound_to_doc(&back).unwrap(), true), text);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = r#"{"num_qubits":1,"gate_class":"QNC","layers":[[{"kind":"one_qubit","targets":[0],"matrix":[[1,0]]}]]}"#;
        let e = parse_circuit(bad).unwrap_err().to_string();
        assert!(e.contains("layers[0][0].matrix"), "{e}");
        let bad = r#"{"num_qubits":1,"gate_class":"XYZ","layers":[]}"#;
        assert!(parse_circuit(bad)
            .unwrap_err()
            .to_string()
            .contains("gate_class"));
        let bad = r#"{"num_qubits":1,"gate_class":"QNC","layers":[],"bogus":1}"#;
        assert!(parse_circuit(bad)
            .unwrap_err()
            .to_string()
            .contains("bogus"));
    }

    #[test]
    fn state_and_unitary() {
        let s = parse_state(r#"{"num_qubits":1,"amps":[[0.6,0],[0,0.8]]}"#).unwrap();
        assert_eq!(s.amps()[1], c64(0.0, 0.8));
        assert!(parse_state(r#"{"num_qubits":1,"amps":[[1,0],[1,0]]}"#).is_err());
        let u = parse_unitary("[[[0,0],[1,0]],[[1,0],[0,0]]]").unwrap();
        assert_eq!(
            parse_unitary(&to_string(&unitary_doc(&u), false)).unwrap(),
            u
        );
        assert!(parse_unitary("[[[1,0]]]").is_err());
    }

    #[test]
    fn table_hex() {
        let psi = StateVector::zero(2);
        let t = qsynth_core::statesynth::beta_oracle(&psi, 4).unwrap();
        let d = table_doc(&t);
        assert_eq!(parse_table(&d, "t").unwrap(), t);
        let mut bad = d.clone();
        bad.entries.insert("zz".into(), "1".into());
        assert!(parse_table(&bad, "t").is_err());
    }
}
