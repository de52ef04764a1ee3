//! Single-scan process tomography.
//!
//! A process acts on half of a maximally entangled system/ancilla-A pair; the
//! resulting Choi-type state is read out by one AAQST acquisition with an
//! ancilla-B register, and the process matrix `chi` is solved from the
//! linear relation between the process's action on matrix units and the
//! Pauli-product operator basis.
//!
//! The operator basis is the Pauli products `E_m` in lexicographic order
//! without the `1/sqrt(N)` factor, so `E_0` is the identity and a process
//! equal to a single `E_m` has `chi_mm = 1`.

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qcore::{
    c, hermiticity_defect, max_abs_diff, min_eigenvalue, pauli, symmetrize, tensor, ComplexMatrix,
    ComplexVector, DensityMatrix, MatrixRows, StateKind, UnitaryMatrix, C64, ZERO,
};

use super::aaqst::{acquire, build_plan, reconstruct, DEFAULT_DRAWS};
use super::counts::min_experiments;

/// Completely positive maps below this eigenvalue trigger a warning.
pub const NON_CP_WARNING: f64 = -1e-6;

const TP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessMap {
    Unitary(UnitaryMatrix),
    /// Trace-preserving Kraus decomposition.
    Kraus(Vec<ComplexMatrix>),
}

impl ProcessMap {
    pub fn kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::InvalidParameter("empty Kraus list".into()))?;
        let d = first.nrows();
        crate::qcore::qubit_count(d)?;
        let mut sum = ComplexMatrix::zeros(d, d);
        for k in &ops {
            if k.shape() != (d, d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.nrows(),
                });
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            sum += k.adjoint() * k;
        }
        let defect = max_abs_diff(&sum, &ComplexMatrix::identity(d, d));
        if defect > TP_TOL {
            return Err(Error::BadTrace {
                kind: "Kraus completeness",
                found: defect,
            });
        }
        Ok(Self::Kraus(ops))
    }

    /// Kraus list from JSON `[[[[re, im], ...], ...], ...]`.
    pub fn from_kraus_json(json: &str) -> Result<Self> {
        let rows: Vec<MatrixRows> =
            serde_json::from_str(json).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let ops = rows
            .into_iter()
            .map(ComplexMatrix::try_from)
            .collect::<Result<Vec<_>>>()?;
        Self::kraus(ops)
    }

    /// `identity`, `notx`, `noty`, `hadamard` or `phase(theta)` with theta
    /// in radians; single-qubit.
    pub fn named(name: &str) -> Result<Self> {
        let name = name.trim();
        let m = match name {
            "identity" => pauli::identity(),
            "notx" => pauli::x(),
            "noty" => pauli::y(),
            "hadamard" => pauli::hadamard(),
            _ => {
                let theta = name
                    .strip_prefix("phase(")
                    .and_then(|s| s.strip_suffix(')'))
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .filter(|t| t.is_finite())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown process `{name}`")))?;
                let mut p = pauli::identity();
                p[(1, 1)] = C64::from_polar(1.0, theta);
                p
            }
        };
        Ok(Self::Unitary(UnitaryMatrix::new(m)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Unitary(u) => u.dim(),
            Self::Kraus(ops) => ops[0].nrows(),
        }
    }

    pub fn kraus_ops(&self) -> Vec<ComplexMatrix> {
        match self {
            Self::Unitary(u) => vec![u.matrix().clone()],
            Self::Kraus(ops) => ops.clone(),
        }
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus_ops()
            .iter()
            .fold(ComplexMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
                acc + k * rho * k.adjoint()
            })
    }
}

fn serialize_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixRows::from(m).serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiMatrix {
    pub n: usize,
    #[serde(serialize_with = "serialize_matrix")]
    pub chi: ComplexMatrix,
}

impl ChiMatrix {
    pub fn new(n: usize, chi: ComplexMatrix) -> Result<Self> {
        let size = 1usize << (2 * n);
        if chi.shape() != (size, size) {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: chi.nrows(),
            });
        }
        Ok(Self { n, chi })
    }

    /// Theoretical chi from a Kraus decomposition:
    /// `K_i = sum_m e_im E_m`, `chi_mn = sum_i e_im conj(e_in)`.
    pub fn from_process(process: &ProcessMap) -> Result<Self> {
        let d = process.dim();
        let n = crate::qcore::qubit_count(d)?;
        let size = d * d;
        let basis = operator_basis(n);
        let mut chi = ComplexMatrix::zeros(size, size);
        for k in process.kraus_ops() {
            let e = ComplexVector::from_iterator(
                size,
                basis.iter().map(|b| (b.adjoint() * &k).trace() / c(d as f64, 0.0)),
            );
            chi += &e * e.adjoint();
        }
        Ok(Self { n, chi })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `sum_mn chi_mn E_m rho E_n^dagger`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let basis = operator_basis(self.n);
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (m, em) in basis.iter().enumerate() {
            let left = em * rho;
            for (k, en) in basis.iter().enumerate() {
                let w = self.chi[(m, k)];
                if w != ZERO {
                    out += &left * en.adjoint() * w;
                }
            }
        }
        out
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.chi)
    }

    /// `max |sum_mn chi_mn E_n^dagger E_m - 1|`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let basis = operator_basis(self.n);
        let d = self.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (m, em) in basis.iter().enumerate() {
            for (k, en) in basis.iter().enumerate() {
                sum += en.adjoint() * em * self.chi[(m, k)];
            }
        }
        max_abs_diff(&sum, &ComplexMatrix::identity(d, d))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut h = self.chi.clone();
        symmetrize(&mut h);
        min_eigenvalue(&h)
    }
}

/// Pauli products in lexicographic order.
pub fn operator_basis(n: usize) -> Vec<ComplexMatrix> {
    (0..1usize << (2 * n)).map(|i| pauli::product(i, n)).collect()
}

/// Expansion coefficients of `E_m rho_j E_n^dagger` over the matrix units
/// `rho_k = |i><l|`, `k = i N + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTensor {
    pub n: usize,
    /// Row `j N^2 + k`, column `m N^2 + n`.
    matrix: DMatrix<C64>,
}

impl BetaTensor {
    pub fn get(&self, j: usize, k: usize, m: usize, n: usize) -> C64 {
        let s = 1usize << (2 * self.n);
        self.matrix[(j * s + k, m * s + n)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

/// For `rho_j = |r><s|` the product `E_m |r><s| E_n^dagger` has `(i, l)`
/// entry `(E_m)_ir conj((E_n)_ls)`.
pub fn beta_tensor(n: usize) -> BetaTensor {
    let d = 1usize << n;
    let s = d * d;
    let basis = operator_basis(n);
    let mut matrix = DMatrix::zeros(s * s, s * s);
    for (m, em) in basis.iter().enumerate() {
        for (nn, en) in basis.iter().enumerate() {
            let col = m * s + nn;
            for r in 0..d {
                for sc in 0..d {
                    let j = r * d + sc;
                    for i in 0..d {
                        let a = em[(i, r)];
                        if a == ZERO {
                            continue;
                        }
                        for l in 0..d {
                            let k = i * d + l;
                            matrix[(j * s + k, col)] = a * en[(l, sc)].conj();
                        }
                    }
                }
            }
        }
    }
    BetaTensor { n, matrix }
}

/// `lambda_jk`: coefficient of `rho_k` in the process output for `rho_j`,
/// read from a Choi-type state `(E (x) 1)|Phi><Phi|` (system qubits first).
pub fn lambda_from_choi(choi: &ComplexMatrix, n: usize) -> DMatrix<C64> {
    let d = 1usize << n;
    let s = d * d;
    let mut lambda = DMatrix::zeros(s * s, 1);
    let scale = c(d as f64, 0.0);
    for r in 0..d {
        for sc in 0..d {
            let j = r * d + sc;
            for i in 0..d {
                for l in 0..d {
                    let k = i * d + l;
                    lambda[(j * s + k, 0)] = choi[(i * d + r, l * d + sc)] * scale;
                }
            }
        }
    }
    lambda
}

fn maximally_entangled(n: usize) -> DensityMatrix {
    let d = 1usize << n;
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = ComplexVector::zeros(d * d);
    for m in 0..d {
        psi[m * d + m] = amp;
    }
    DensityMatrix::from_pure(&psi).expect("unit vector")
}

#[derive(Debug, Clone, Serialize)]
pub struct SsptRun {
    pub chi: ChiMatrix,
    pub plan_condition_number: f64,
    pub reconstruction_residual: f64,
    pub min_eigenvalue: f64,
    /// Set when the reconstructed chi is noticeably not completely positive.
    pub non_cp_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsptConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub draws: usize,
}

impl SsptConfig {
    /// Tabulated ancilla sizes for `n` system qubits, noiseless.
    pub fn for_qubits(n: usize, seed: u64) -> Self {
        let (n_a, n_b) = super::counts::SSPT_ANCILLA
            .get(n.wrapping_sub(1))
            .copied()
            .unwrap_or((n, super::counts::minimal_sspt_ancilla(n)));
        Self {
            n_a,
            n_b,
            noise_sigma: 0.0,
            seed,
            draws: DEFAULT_DRAWS,
        }
    }
}

/// One-acquisition reconstruction of the process matrix.
pub fn sspt(process: &ProcessMap, cfg: &SsptConfig) -> Result<SsptRun> {
    let n = crate::qcore::qubit_count(process.dim())?;
    if cfg.n_a != n {
        return Err(Error::InvalidParameter(format!(
            "ancilla A must match the system size ({n}), got {}",
            cfg.n_a
        )));
    }
    if min_experiments(n + cfg.n_a, cfg.n_b) != 1 {
        return Err(Error::InvalidParameter(format!(
            "n_B = {} does not allow a single acquisition for {n} qubits",
            cfg.n_b
        )));
    }
    let d = 1usize << n;
    let phi = maximally_entangled(n);
    let local: Vec<ComplexMatrix> = process
        .kraus_ops()
        .iter()
        .map(|k| tensor(k, &ComplexMatrix::identity(d, d)))
        .collect();
    let choi_matrix = ProcessMap::Kraus(local).apply(phi.matrix());
    let choi = DensityMatrix::new(choi_matrix, StateKind::Normalized)?;

    let plan = build_plan(2 * n, cfg.n_b, cfg.seed, cfg.draws)?;
    let records = acquire(&plan, &choi, cfg.noise_sigma, cfg.seed)?;
    let rec = reconstruct(&plan, &records, StateKind::Normalized)?;

    let lambda = lambda_from_choi(&rec.matrix, n);
    let beta = beta_tensor(n);
    let solution = beta
        .matrix
        .clone()
        .svd(true, true)
        .solve(&lambda, 1e-14)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let s = d * d;
    let mut chi = ComplexMatrix::from_fn(s, s, |m, k| solution[(m * s + k, 0)]);
    symmetrize(&mut chi);
    let chi = ChiMatrix::new(n, chi)?;
    let min_eig = chi.min_eigenvalue();
    Ok(SsptRun {
        chi,
        plan_condition_number: plan.condition_number,
        reconstruction_residual: rec.residual,
        min_eigenvalue: min_eig,
        non_cp_warning: min_eig < NON_CP_WARNING,
    })
}

/// Normalized Hilbert-Schmidt overlap `|tr(a^dagger b)| / (|a| |b|)`.
pub fn process_fidelity(a: &ChiMatrix, b: &ChiMatrix) -> Result<f64> {
    if a.chi.shape() != b.chi.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.chi.nrows(),
            found: b.chi.nrows(),
        });
    }
    let na = a.chi.norm();
    let nb = b.chi.norm();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let overlap = a.chi.iter().zip(b.chi.iter()).map(|(x, y)| x.conj() * y).sum::<C64>();
    Ok((overlap.norm() / (na * nb)).min(1.0))
}
