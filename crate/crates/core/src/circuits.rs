//! Gates and circuits compiled to dense unitaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{c, pauli, qubit_count, ComplexMatrix, UnitaryMatrix, MAX_QUBITS, ZERO};

/// A gate record. Rotations use the half-angle convention
/// `RotX(phi) = exp(-i phi X / 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate {
    PauliX { target: usize },
    PauliY { target: usize },
    PauliZ { target: usize },
    Hadamard { target: usize },
    RotX { target: usize, angle: f64 },
    RotY { target: usize, angle: f64 },
    RotZ { target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    /// Flips `target` when `control` is `|0>`.
    AntiCnot { control: usize, target: usize },
    ControlledU {
        control: usize,
        targets: Vec<usize>,
        u: UnitaryMatrix,
        #[serde(default = "default_active_on")]
        active_on: u8,
    },
    RawUnitary { targets: Vec<usize>, u: UnitaryMatrix },
}

fn default_active_on() -> u8 {
    1
}

pub fn rot_x(angle: f64) -> ComplexMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

pub fn rot_y(angle: f64) -> ComplexMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn rot_z(angle: f64) -> ComplexMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[c(co, -s), ZERO, ZERO, c(co, s)])
}

/// `|0><0| (x) 1 + |1><1| (x) u` (or the complement when `active_on == 0`),
/// control as the most significant qubit.
fn controlled_matrix(u: &ComplexMatrix, active_on: u8) -> ComplexMatrix {
    let d = u.nrows();
    let mut m = ComplexMatrix::identity(2 * d, 2 * d);
    let offset = if active_on == 0 { 0 } else { d };
    m.view_mut((offset, offset), (d, d)).copy_from(u);
    m
}

impl Gate {
    /// Qubits touched, in the order that indexes the local matrix.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::PauliX { target }
            | Gate::PauliY { target }
            | Gate::PauliZ { target }
            | Gate::Hadamard { target }
            | Gate::RotX { target, .. }
            | Gate::RotY { target, .. }
            | Gate::RotZ { target, .. } => vec![*target],
            Gate::Cnot { control, target } | Gate::AntiCnot { control, target } => {
                vec![*control, *target]
            }
            Gate::ControlledU {
                control, targets, ..
            } => std::iter::once(*control).chain(targets.iter().copied()).collect(),
            Gate::RawUnitary { targets, .. } => targets.clone(),
        }
    }

    /// Matrix on the gate's own qubits (see [`Gate::qubits`]).
    pub fn local_matrix(&self) -> ComplexMatrix {
        match self {
            Gate::PauliX { .. } => pauli::x(),
            Gate::PauliY { .. } => pauli::y(),
            Gate::PauliZ { .. } => pauli::z(),
            Gate::Hadamard { .. } => pauli::hadamard(),
            Gate::RotX { angle, .. } => rot_x(*angle),
            Gate::RotY { angle, .. } => rot_y(*angle),
            Gate::RotZ { angle, .. } => rot_z(*angle),
            Gate::Cnot { .. } => controlled_matrix(&pauli::x(), 1),
            Gate::AntiCnot { .. } => controlled_matrix(&pauli::x(), 0),
            Gate::ControlledU { u, active_on, .. } => controlled_matrix(u.matrix(), *active_on),
            Gate::RawUnitary { u, .. } => u.matrix().clone(),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let expected = 1usize << qubits.len();
        let local_dim = match self {
            Gate::ControlledU { u, active_on, .. } => {
                if *active_on > 1 {
                    return Err(Error::InvalidParameter(format!(
                        "active_on must be 0 or 1, got {active_on}"
                    )));
                }
                2 * u.dim()
            }
            Gate::RawUnitary { u, .. } => u.dim(),
            _ => expected,
        };
        if local_dim != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: local_dim,
            });
        }
        Ok(())
    }
}

/// Lift `u` acting on `targets` (targets[0] most significant) to the full
/// `n`-qubit register. Non-adjacent targets are handled by index mapping.
pub fn embed(u: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix> {
    if n > MAX_QUBITS {
        return Err(Error::RegisterTooLarge(n));
    }
    let k = targets.len();
    if u.nrows() != 1 << k || u.ncols() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            found: u.nrows(),
        });
    }
    for (i, &q) in targets.iter().enumerate() {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
        }
        if targets[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    let dim = 1usize << n;
    let target_mask: usize = targets.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    // full-register offset of each local basis index
    let local_offsets: Vec<usize> = (0..1usize << k)
        .map(|local| {
            targets.iter().enumerate().fold(0, |acc, (pos, &q)| {
                let bit = (local >> (k - 1 - pos)) & 1;
                acc | (bit << (n - 1 - q))
            })
        })
        .collect();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for rest in (0..dim).filter(|i| i & target_mask == 0) {
        for (li, &oi) in local_offsets.iter().enumerate() {
            for (lj, &oj) in local_offsets.iter().enumerate() {
                let v = u[(li, lj)];
                if v != ZERO {
                    out[(rest | oi, rest | oj)] = v;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn with(mut self, gate: Gate) -> Self {
        self.gates.push(gate);
        self
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidParameter("circuit needs at least one qubit".into()));
        }
        if self.n_qubits > MAX_QUBITS {
            return Err(Error::RegisterTooLarge(self.n_qubits));
        }
        self.gates.iter().try_for_each(|g| g.validate(self.n_qubits))
    }

    /// Parse a bare JSON array of gate records.
    pub fn from_gates_json(n_qubits: usize, json: &str) -> Result<Self> {
        let gates: Vec<Gate> = serde_json::from_str(json)
            .map_err(|e| Error::InvalidParameter(format!("circuit JSON: {e}")))?;
        let circuit = Circuit { n_qubits, gates };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn to_gates_json(&self) -> String {
        serde_json::to_string(&self.gates).expect("gate records always serialize")
    }
}

/// Product of the gate embeddings; the last gate multiplies on the left.
pub fn compile(circuit: &Circuit) -> Result<UnitaryMatrix> {
    circuit.validate()?;
    let dim = 1usize << circuit.n_qubits;
    let mut u = ComplexMatrix::identity(dim, dim);
    for gate in &circuit.gates {
        let g = embed(&gate.local_matrix(), &gate.qubits(), circuit.n_qubits)?;
        u = g * u;
    }
    Ok(UnitaryMatrix::from_trusted(u))
}

pub fn cnot(control: usize, target: usize, n: usize) -> Result<UnitaryMatrix> {
    compile(&Circuit::new(n).with(Gate::Cnot { control, target }))
}

/// Complement-controlled NOT: flips `target` when `control` is `|0>`.
pub fn anti_cnot(control: usize, target: usize, n: usize) -> Result<UnitaryMatrix> {
    compile(&Circuit::new(n).with(Gate::AntiCnot { control, target }))
}

/// `sum_a U_a (x) |a><a|` with the ancilla register as the least significant
/// qubits; one block per ancilla basis state.
pub fn controlled_block(blocks: &[UnitaryMatrix], n_ancilla: usize) -> Result<UnitaryMatrix> {
    let n_blocks = 1usize << n_ancilla;
    if blocks.len() < n_blocks {
        return Err(Error::MissingBlock(blocks.len()));
    }
    if blocks.len() > n_blocks {
        return Err(Error::DimensionMismatch {
            expected: n_blocks,
            found: blocks.len(),
        });
    }
    let sys = blocks[0].dim();
    if let Some(bad) = blocks.iter().find(|b| b.dim() != sys) {
        return Err(Error::DimensionMismatch {
            expected: sys,
            found: bad.dim(),
        });
    }
    qubit_count(sys * n_blocks)?;
    let dim = sys * n_blocks;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (a, block) in blocks.iter().enumerate() {
        let m = block.matrix();
        for i in 0..sys {
            for j in 0..sys {
                out[(i * n_blocks + a, j * n_blocks + a)] = m[(i, j)];
            }
        }
    }
    Ok(UnitaryMatrix::from_trusted(out))
}
