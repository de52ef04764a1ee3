//! Interferometric (Moussa-type) expectation values.
//!
//! The ancilla is qubit 0, prepared in `|+>` by a Hadamard; the system
//! occupies qubits `1..`. Controlled blocks fire on ancilla `|1>`, and the
//! ancilla readout `<sigma_x> + i <sigma_y>` equals `tr(rho W)` where `W` is
//! the product of the controlled operators in application order
//! (`tr(rho V U)` for `U` then `V`).

use serde::Serialize;

use crate::circuits::{compile, Circuit, Gate};
use crate::error::{Error, Result};
use crate::qcore::{
    c, evolve, max_abs_diff, partial_trace, qubit_count, tensor, ComplexMatrix, DensityMatrix,
    HermitianObservable, StateKind, UnitaryMatrix, C64, ONE,
};
use crate::readout::transverse_expectations;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoussaResult {
    pub value: C64,
    #[serde(skip)]
    pub circuit_used: Circuit,
    /// Ancilla `(<sigma_x>, <sigma_y>)` after the protocol.
    pub ancilla_readout: (f64, f64),
}

fn check_system(rho: &DensityMatrix, dim: usize) -> Result<usize> {
    if rho.kind() != StateKind::Normalized {
        return Err(Error::RequiresNormalized);
    }
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: dim,
        });
    }
    qubit_count(dim)
}

/// Run `ops` as successive ancilla-controlled blocks and read the ancilla.
fn run_controlled(rho: &DensityMatrix, ops: &[&UnitaryMatrix]) -> Result<MoussaResult> {
    let dim = ops.first().map_or(rho.dim(), |u| u.dim());
    let n_sys = check_system(rho, dim)?;
    for u in ops {
        if u.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: u.dim(),
            });
        }
    }
    let targets: Vec<usize> = (1..=n_sys).collect();
    let mut circuit = Circuit::new(n_sys + 1).with(Gate::Hadamard { target: 0 });
    for u in ops {
        circuit.push(Gate::ControlledU {
            control: 0,
            targets: targets.clone(),
            u: (*u).clone(),
            active_on: 1,
        });
    }
    let initial = DensityMatrix::new(
        tensor(DensityMatrix::basis_state(2, 0).matrix(), rho.matrix()),
        StateKind::Normalized,
    )?;
    let out = evolve(&initial, &compile(&circuit)?)?;
    let ancilla = partial_trace(&out, &[0])?;
    let (x, y) = transverse_expectations(&ancilla, 0)?;
    Ok(MoussaResult {
        value: c(x, y),
        circuit_used: circuit,
        ancilla_readout: (x, y),
    })
}

/// `tr(rho U)` from the ancilla readout.
pub fn expect_unitary(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<MoussaResult> {
    run_controlled(rho, &[u])
}

/// `tr(rho V U)`: `U` is applied first, `V` second.
pub fn joint_expect(
    rho: &DensityMatrix,
    u: &UnitaryMatrix,
    v: &UnitaryMatrix,
) -> Result<MoussaResult> {
    run_controlled(rho, &[u, v])
}

fn as_hermitian_unitary(a: &HermitianObservable) -> Result<UnitaryMatrix> {
    let d = a.dim();
    let defect = max_abs_diff(&(a.matrix() * a.matrix()), &ComplexMatrix::identity(d, d));
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    UnitaryMatrix::new(a.matrix().clone())
}

/// `<A>` for Hermitian `A` with `A^2 = 1`.
pub fn expect_hermitian_unitary(rho: &DensityMatrix, a: &HermitianObservable) -> Result<f64> {
    let u = as_hermitian_unitary(a)?;
    let value = expect_unitary(rho, &u)?.value;
    if value.im.abs() > 1e-9 {
        return Err(Error::ComplexExpectation(value.im));
    }
    Ok(value.re)
}

/// `tr(rho P)` for an orthogonal projector, measured through the reflection
/// `2P - 1`.
pub fn expect_projector(rho: &DensityMatrix, p: &HermitianObservable) -> Result<f64> {
    let defect = max_abs_diff(&(p.matrix() * p.matrix()), p.matrix());
    if defect > 1e-10 {
        return Err(Error::NotIdempotent(defect));
    }
    let d = p.dim();
    let reflection = HermitianObservable::new(
        p.matrix() * c(2.0, 0.0) - ComplexMatrix::identity(d, d),
    )?;
    Ok((1.0 + expect_hermitian_unitary(rho, &reflection)?) / 2.0)
}

/// `tr(rho A)` for diagonal `A`, as a weighted sum of basis-projector runs.
pub fn expect_diagonal_hermitian(rho: &DensityMatrix, a: &HermitianObservable) -> Result<f64> {
    let m = a.matrix();
    let d = a.dim();
    let off_diag = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .fold(0.0, |acc: f64, (i, j)| acc.max(m[(i, j)].norm()));
    if off_diag > 1e-12 {
        return Err(Error::NotDiagonal(off_diag));
    }
    let mut total = 0.0;
    for k in 0..d {
        let weight = m[(k, k)].re;
        if weight == 0.0 {
            continue;
        }
        let mut proj = ComplexMatrix::zeros(d, d);
        proj[(k, k)] = ONE;
        total += weight * expect_projector(rho, &HermitianObservable::new(proj)?)?;
    }
    Ok(total)
}
