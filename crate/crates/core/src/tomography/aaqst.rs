//! Ancilla-assisted state tomography.
//!
//! The input register (`n` qubits, most significant) is joined by a
//! maximally mixed ancilla register (`n_hat` qubits). Each experiment applies
//! `sum_b W_b (x) |b><b| . (1 (x) V) . sum_a U_a (x) |a><a|` and records the
//! full single-quantum spectrum, so one acquisition yields
//! `n_tot * 2^n_tot` real equations on the `4^n - 1` real parameters of the
//! deviation matrix.
//!
//! The second controlled layer `W` matters: after the first layer the joint
//! state is block diagonal in the ancilla, and an ancilla-local `V` alone
//! only exposes system populations on the ancilla lines, which leaves the
//! design rank deficient.
//!
//! The deviation part is parametrized as `sum_P c_P P / N` over non-identity
//! Pauli products `P`, with `c_P = tr(rho P)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuits::controlled_block;
use crate::error::{Error, Result};
use crate::qcore::{
    c, evolve, pauli, qubit_count, random_unitary_with, tensor, tensor_all, ComplexMatrix,
    DensityMatrix, StateKind, UnitaryMatrix, MAX_QUBITS,
};
use crate::readout::{add_noise, spectrum, SpectralRecord};
use crate::rng::{derive_seed, stream};

use super::counts::min_experiments;

/// Plans above this condition number are unusable.
pub const MAX_CONDITION: f64 = 1e6;

/// Default number of random candidates tried by [`build_plan`].
pub const DEFAULT_DRAWS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    /// Local unitary on the ancilla register.
    pub v: UnitaryMatrix,
    /// One input-register unitary per ancilla basis state, applied first.
    pub blocks: Vec<UnitaryMatrix>,
    /// Input-register unitaries controlled after `v`.
    pub post: Vec<UnitaryMatrix>,
}

impl Experiment {
    /// The combined-register unitary.
    pub fn unitary(&self, n_hat: usize) -> Result<UnitaryMatrix> {
        let first = controlled_block(&self.blocks, n_hat)?;
        let second = controlled_block(&self.post, n_hat)?;
        let sys_dim = self.blocks[0].dim();
        let local = tensor(&ComplexMatrix::identity(sys_dim, sys_dim), self.v.matrix());
        UnitaryMatrix::new(second.matrix() * local * first.matrix())
    }
}

#[derive(Debug, Clone)]
pub struct TomographyPlan {
    pub n: usize,
    pub n_hat: usize,
    pub experiments: Vec<Experiment>,
    pub seed: u64,
    pub condition_number: f64,
    design: DMatrix<f64>,
}

impl TomographyPlan {
    /// Assemble a plan from explicit experiments; rejects rank-deficient
    /// or ill-conditioned designs.
    pub fn from_experiments(
        n: usize,
        n_hat: usize,
        experiments: Vec<Experiment>,
        seed: u64,
    ) -> Result<Self> {
        let design = design_matrix(n, n_hat, &experiments)?;
        let condition_number = condition_number(&design);
        if !(condition_number <= MAX_CONDITION) {
            return Err(Error::IllConditioned(condition_number));
        }
        Ok(Self {
            n,
            n_hat,
            experiments,
            seed,
            condition_number,
            design,
        })
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn total_qubits(&self) -> usize {
        self.n + self.n_hat
    }
}

/// `sigma_max / sigma_min` of a real matrix; infinite when rank deficient
/// or under-determined.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() < m.ncols() {
        return f64::INFINITY;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= max * 1e-15 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Non-identity Pauli-product coefficients `c_P = Re tr(rho P)`, in
/// lexicographic order starting from index 1.
pub fn pauli_coefficients(rho: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = qubit_count(rho.nrows())?;
    Ok((1..1usize << (2 * n))
        .map(|idx| {
            let p = pauli::product(idx, n);
            (rho * p).trace().re
        })
        .collect())
}

fn check_register(n: usize, n_hat: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one input qubit".into()));
    }
    if n + n_hat > MAX_QUBITS {
        return Err(Error::RegisterTooLarge(n + n_hat));
    }
    Ok(())
}

/// Real design matrix mapping Pauli coefficients to stacked spectra:
/// column `P` is the spectrum of `U_k (P/N (x) 1/N_hat) U_k^dagger`.
pub fn design_matrix(n: usize, n_hat: usize, experiments: &[Experiment]) -> Result<DMatrix<f64>> {
    check_register(n, n_hat)?;
    let sys_dim = 1usize << n;
    let anc_dim = 1usize << n_hat;
    let total = n + n_hat;
    let rows_per = SpectralRecord::line_count(total) * 2;
    let cols = sys_dim * sys_dim - 1;
    for e in experiments {
        for layer in [&e.blocks, &e.post] {
            if layer.len() != anc_dim {
                return Err(Error::MissingBlock(layer.len()));
            }
            if let Some(b) = layer.iter().find(|b| b.dim() != sys_dim) {
                return Err(Error::DimensionMismatch {
                    expected: sys_dim,
                    found: b.dim(),
                });
            }
        }
        if e.v.dim() != anc_dim {
            return Err(Error::DimensionMismatch {
                expected: anc_dim,
                found: e.v.dim(),
            });
        }
    }
    let mut design = DMatrix::zeros(rows_per * experiments.len(), cols);
    let scale = c(1.0 / (sys_dim * anc_dim) as f64, 0.0);
    let anc_id = ComplexMatrix::identity(anc_dim, anc_dim);
    for (k, e) in experiments.iter().enumerate() {
        let u = e.unitary(n_hat)?;
        let u = u.matrix();
        let columns: Vec<Vec<f64>> = (1..sys_dim * sys_dim)
            .into_par_iter()
            .map(|idx| {
                let p = tensor(&pauli::product(idx, n), &anc_id);
                let image = u * p * u.adjoint() * scale;
                let state = DensityMatrix::from_trusted(image, StateKind::Deviation);
                spectrum(&state).map(|r| r.real_vector())
            })
            .collect::<Result<_>>()?;
        for (col, values) in columns.into_iter().enumerate() {
            for (row, v) in values.into_iter().enumerate() {
                design[(k * rows_per + row, col)] = v;
            }
        }
    }
    Ok(design)
}

fn hadamard_register(n_hat: usize) -> UnitaryMatrix {
    let h = pauli::hadamard();
    UnitaryMatrix::from_trusted(tensor_all(std::iter::repeat_n(&h, n_hat)))
}

fn random_experiments(n: usize, n_hat: usize, count: u64, seed: u64) -> Vec<Experiment> {
    let mut rng = stream(seed, 0);
    let v = hadamard_register(n_hat);
    (0..count)
        .map(|_| {
            let mut layer = || -> Vec<UnitaryMatrix> {
                (0..1usize << n_hat)
                    .map(|_| random_unitary_with(1 << n, &mut rng))
                    .collect()
            };
            let blocks = layer();
            let post = layer();
            Experiment {
                v: v.clone(),
                blocks,
                post,
            }
        })
        .collect()
}

/// Best-of-`draws` random plan: Haar blocks in both layers, Hadamard ancilla rotation,
/// selected by smallest design condition number. Deterministic in
/// `(seed, draws)`.
pub fn build_plan(n: usize, n_hat: usize, seed: u64, draws: usize) -> Result<TomographyPlan> {
    check_register(n, n_hat)?;
    if draws == 0 {
        return Err(Error::InvalidParameter("draws must be at least 1".into()));
    }
    let count = min_experiments(n, n_hat);
    let candidates: Vec<(usize, Result<TomographyPlan>)> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let draw_seed = derive_seed(seed, d as u64);
            let exps = random_experiments(n, n_hat, count, draw_seed);
            (d, TomographyPlan::from_experiments(n, n_hat, exps, seed))
        })
        .collect();
    let mut best: Option<TomographyPlan> = None;
    let mut last_err = None;
    for (_, cand) in candidates {
        match cand {
            Ok(plan) => {
                if best
                    .as_ref()
                    .is_none_or(|b| plan.condition_number < b.condition_number)
                {
                    best = Some(plan);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::IllConditioned(f64::INFINITY)))
}

/// Simulated acquisition: one spectrum per experiment of
/// `U_k (rho (x) 1/N_hat) U_k^dagger`, optionally with relative noise.
pub fn acquire(
    plan: &TomographyPlan,
    rho: &DensityMatrix,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<SpectralRecord>> {
    let sys_dim = 1usize << plan.n;
    if rho.dim() != sys_dim {
        return Err(Error::DimensionMismatch {
            expected: sys_dim,
            found: rho.dim(),
        });
    }
    let anc_dim = 1usize << plan.n_hat;
    let input = match rho.kind() {
        StateKind::Normalized => rho.matrix().clone(),
        StateKind::Deviation => rho.deviation().into_matrix(),
    };
    let joint = DensityMatrix::from_trusted(
        tensor(&input, &(ComplexMatrix::identity(anc_dim, anc_dim) / c(anc_dim as f64, 0.0))),
        rho.kind(),
    );
    plan.experiments
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let out = evolve(&joint, &e.unitary(plan.n_hat)?)?;
            let mut record = spectrum(&out)?;
            add_noise(&mut record, noise_sigma, derive_seed(seed, k as u64))?;
            Ok(record)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    #[serde(skip)]
    pub matrix: ComplexMatrix,
    pub kind: StateKind,
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub condition_number: f64,
}

impl Reconstruction {
    /// Validated state; fails when noise pushed an eigenvalue negative.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix.clone(), self.kind)
    }

    /// Nearest physical state by eigenvalue clipping.
    pub fn physical(&self) -> Result<DensityMatrix> {
        if self.kind != StateKind::Normalized {
            return Err(Error::RequiresNormalized);
        }
        crate::qcore::project_physical(&self.matrix)
    }
}

/// Least-squares inversion of the stacked spectra.
pub fn reconstruct(
    plan: &TomographyPlan,
    records: &[SpectralRecord],
    kind: StateKind,
) -> Result<Reconstruction> {
    if plan.condition_number > MAX_CONDITION {
        return Err(Error::IllConditioned(plan.condition_number));
    }
    if records.len() != plan.experiments.len() {
        return Err(Error::DimensionMismatch {
            expected: plan.experiments.len(),
            found: records.len(),
        });
    }
    let total = plan.total_qubits();
    for r in records {
        if r.n_qubits != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: r.n_qubits,
            });
        }
    }
    let observed: Vec<f64> = records.iter().flat_map(|r| r.real_vector()).collect();
    let y = nalgebra::DVector::from_vec(observed);
    let design = plan.design();
    let svd = design.clone().svd(true, true);
    let coeffs = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let residual = (design * &coeffs - &y).norm();
    let noise_abs = records.iter().map(|r| r.noise_abs).fold(0.0, f64::max);
    let limit = 10.0 * noise_abs * (y.len() as f64).sqrt() + 1e-9 * (1.0 + y.norm());
    if residual > limit {
        return Err(Error::InconsistentRecords { residual, limit });
    }

    let n = plan.n;
    let dim = 1usize << n;
    let mut matrix = match kind {
        StateKind::Normalized => ComplexMatrix::identity(dim, dim) / c(dim as f64, 0.0),
        StateKind::Deviation => ComplexMatrix::zeros(dim, dim),
    };
    for (i, &cp) in coeffs.iter().enumerate() {
        matrix += pauli::product(i + 1, n) * c(cp / dim as f64, 0.0);
    }
    crate::qcore::symmetrize(&mut matrix);
    Ok(Reconstruction {
        matrix,
        kind,
        coefficients: coeffs.iter().copied().collect(),
        residual,
        condition_number: plan.condition_number,
    })
}
