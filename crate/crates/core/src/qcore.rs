//! Dense complex linear algebra and quantum-state primitives.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so the ket
//! `|q0 q1 ... q(n-1)>` sits at index `q0 * 2^(n-1) + ... + q(n-1)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Largest register the dense representation supports.
pub const MAX_QUBITS: usize = 14;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest elementwise modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max elementwise |a - b|.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &ComplexMatrix::identity(n, n))
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

/// Number of qubits for a register of dimension `dim`.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotQubitRegister(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::RegisterTooLarge(n));
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    /// Unit trace, positive semidefinite.
    Normalized,
    /// Traceless part of an ensemble state.
    Deviation,
}

/// Hermitian density operator, either normalized or a traceless deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    kind: StateKind,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, kind: StateKind) -> Result<Self> {
        check_square(&matrix)?;
        let herm = hermiticity_defect(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        match kind {
            StateKind::Normalized => {
                if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
                    return Err(Error::BadTrace {
                        kind: "unit-trace",
                        found: tr.re,
                    });
                }
                let min = min_eigenvalue(&matrix);
                if min < -POSITIVITY_TOL {
                    return Err(Error::NotPositive(min));
                }
            }
            StateKind::Deviation => {
                if tr.norm() > TRACE_TOL {
                    return Err(Error::BadTrace {
                        kind: "traceless",
                        found: tr.re,
                    });
                }
            }
        }
        Ok(Self { matrix, kind })
    }

    /// Skips validation; callers guarantee the invariants (e.g. results of
    /// unitary evolution of a valid state).
    pub(crate) fn from_trusted(matrix: ComplexMatrix, kind: StateKind) -> Self {
        Self { matrix, kind }
    }

    pub fn from_pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let psi = psi / C64::from(norm);
        Self::new(&psi * psi.adjoint(), StateKind::Normalized)
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self::from_trusted(m, StateKind::Normalized)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim, dim) / C64::from(dim as f64);
        Self::from_trusted(m, StateKind::Normalized)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> Result<usize> {
        qubit_count(self.dim())
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Traceless part `rho - tr(rho) 1/d`.
    pub fn deviation(&self) -> DensityMatrix {
        let d = self.dim();
        let shift = self.trace() / C64::from(d as f64);
        let m = &self.matrix - ComplexMatrix::identity(d, d) * shift;
        Self::from_trusted(m, StateKind::Deviation)
    }
}

/// Row-major JSON form of a complex matrix: `[[[re, im], ...], ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRows(pub Vec<Vec<[f64; 2]>>);

impl From<&ComplexMatrix> for MatrixRows {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixRows(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl TryFrom<MatrixRows> for ComplexMatrix {
    type Error = Error;

    fn try_from(rows: MatrixRows) -> Result<Self> {
        let r = rows.0.len();
        let cols = rows.0.first().map_or(0, Vec::len);
        if r == 0 || cols == 0 {
            return Err(Error::NotSquare { rows: r, cols });
        }
        if let Some(bad) = rows.0.iter().find(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(ComplexMatrix::from_fn(r, cols, |i, j| {
            let [re, im] = rows.0[i][j];
            c(re, im)
        }))
    }
}

/// Matrix asserted unitary to within [`UNITARY_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRows", into = "MatrixRows")]
pub struct UnitaryMatrix(ComplexMatrix);

impl TryFrom<MatrixRows> for UnitaryMatrix {
    type Error = Error;

    fn try_from(rows: MatrixRows) -> Result<Self> {
        UnitaryMatrix::new(ComplexMatrix::try_from(rows)?)
    }
}

impl From<UnitaryMatrix> for MatrixRows {
    fn from(u: UnitaryMatrix) -> Self {
        MatrixRows::from(&u.0)
    }
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let defect = unitarity_defect(&matrix);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self(matrix))
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self(matrix)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self * other`, i.e. `other` acts first.
    pub fn compose(&self, other: &UnitaryMatrix) -> Self {
        Self(&self.0 * &other.0)
    }
}

/// Matrix asserted Hermitian to within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable(ComplexMatrix);

impl HermitianObservable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(matrix))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

/// Kronecker product; `a` occupies the more significant index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list, left to right.
pub fn tensor_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Reduced state on the qubits in `keep`, in ascending qubit order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits()?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    for w in kept.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateQubit(w[0]));
        }
    }
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange {
            index: bad,
            n_qubits: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let kd = 1usize << kept.len();
    let td = 1usize << traced.len();

    let full_index = |k: usize, t: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            let bit = (k >> (kept.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let bit = (t >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        idx
    };

    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(kd, kd, |i, j| {
        (0..td).fold(ZERO, |acc, t| acc + m[(full_index(i, t), full_index(j, t))])
    });
    Ok(DensityMatrix::from_trusted(out, rho.kind()))
}

/// `U rho U^dagger`.
pub fn evolve(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: u.dim(),
        });
    }
    let out = u.matrix() * rho.matrix() * u.matrix().adjoint();
    Ok(DensityMatrix::from_trusted(out, rho.kind()))
}

/// `tr(rho A)` for a normalized state.
pub fn expectation(rho: &DensityMatrix, obs: &HermitianObservable) -> Result<f64> {
    if rho.kind() != StateKind::Normalized {
        return Err(Error::RequiresNormalized);
    }
    let value = trace_product(rho.matrix(), obs.matrix())?;
    if value.im.abs() > 1e-8 {
        return Err(Error::ComplexExpectation(value.im));
    }
    Ok(value.re)
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.ncols() != b.nrows() || a.nrows() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.ncols(),
        });
    }
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    let herm = (m + m.adjoint()) * C64::from(0.5);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Matrix exponential `exp(scale * h)`.
///
/// Hermitian `h` goes through an eigendecomposition, which keeps
/// `exp(-i t h)` unitary to machine precision. Anything else falls back to a
/// scaled-and-squared Taylor series.
pub fn expm(h: &ComplexMatrix, scale: C64) -> ComplexMatrix {
    assert_eq!(h.nrows(), h.ncols(), "expm needs a square matrix");
    let n = h.nrows();
    let norm = max_abs(h);
    if norm == 0.0 {
        return ComplexMatrix::identity(n, n);
    }
    if hermiticity_defect(h) <= HERMITIAN_TOL * norm.max(1.0) {
        let eig = SymmetricEigen::new((h + h.adjoint()) * C64::from(0.5));
        let v = &eig.eigenvectors;
        let phases = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            n,
            eig.eigenvalues.iter().map(|&lam| (scale * lam).exp()),
        ));
        return v * phases * v.adjoint();
    }
    expm_taylor(&(h * scale))
}

fn expm_taylor(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let one_norm = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if one_norm > 0.5 {
        (one_norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / C64::from(2f64.powi(squarings));
    let mut result = ComplexMatrix::identity(n, n);
    let mut term = ComplexMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / C64::from(k as f64);
        result += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> UnitaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_with(dim, &mut rng)
}

pub fn random_unitary_with<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    assert!(dim >= 1, "unitary dimension must be positive");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    });
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::from_trusted(u)
}

/// Random full-rank density matrix `G G^dagger / tr(G G^dagger)`.
pub fn random_density<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    let mut m = m / tr;
    symmetrize(&mut m);
    DensityMatrix::from_trusted(m, StateKind::Normalized)
}

/// Replace `m` with its Hermitian part in place.
pub fn symmetrize(m: &mut ComplexMatrix) {
    let h = (&*m + m.adjoint()) * C64::from(0.5);
    *m = h;
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = SymmetricEigen::new((m + m.adjoint()) * C64::from(0.5));
    let v = &eig.eigenvectors;
    let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        m.nrows(),
        eig.eigenvalues.iter().map(|&l| C64::from(l.max(0.0).sqrt())),
    ));
    v * d * v.adjoint()
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let s = sqrt_psd(rho.matrix());
    let inner = &s * sigma.matrix() * &s;
    let eig = SymmetricEigen::new((&inner + inner.adjoint()) * C64::from(0.5));
    let t: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(t * t)
}

/// Nearest unit-trace PSD matrix: clip negative eigenvalues and renormalize.
pub fn project_physical(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let n = m.nrows();
    let eig = SymmetricEigen::new((m + m.adjoint()) * C64::from(0.5));
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let v = &eig.eigenvectors;
    let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        n,
        clipped.iter().map(|&l| C64::from(l / total)),
    ));
    let mut out = v * d * v.adjoint();
    symmetrize(&mut out);
    Ok(DensityMatrix::from_trusted(out, StateKind::Normalized))
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

/// Pauli matrices and their tensor products.
pub mod pauli {
    use super::{c, ComplexMatrix, ONE, ZERO};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2, 2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
    }

    /// Single-qubit Pauli by label: 0 = I, 1 = X, 2 = Y, 3 = Z.
    pub fn by_label(label: usize) -> ComplexMatrix {
        match label {
            0 => identity(),
            1 => x(),
            2 => y(),
            3 => z(),
            _ => panic!("Pauli label {label} out of range"),
        }
    }

    /// Base-4 digits of `index` over `n` qubits, qubit 0 most significant.
    pub fn labels(index: usize, n: usize) -> Vec<usize> {
        (0..n).map(|q| (index >> (2 * (n - 1 - q))) & 3).collect()
    }

    /// The `index`-th element of the lexicographic (I, X, Y, Z)^{n} basis.
    pub fn product(index: usize, n: usize) -> ComplexMatrix {
        labels(index, n)
            .into_iter()
            .fold(ComplexMatrix::identity(1, 1), |acc, l| acc.kronecker(&by_label(l)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn ket(bits: &[C64]) -> ComplexVector {
        ComplexVector::from_column_slice(bits)
    }

    fn bell() -> DensityMatrix {
        let s = FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&ket(&[c(s, 0.0), ZERO, ZERO, c(s, 0.0)])).unwrap()
    }

    #[test]
    fn tensor_examples() {
        let xi = tensor(&pauli::x(), &pauli::identity());
        let expected = ComplexMatrix::from_fn(4, 4, |i, j| {
            if (i < 2) != (j < 2) && i % 2 == j % 2 {
                ONE
            } else {
                ZERO
            }
        });
        assert_eq!(xi, expected);
        assert_eq!(
            tensor(&pauli::identity(), &pauli::identity()),
            ComplexMatrix::identity(4, 4)
        );
        // z (x) y, row 0 col 1: z00 * y01 = -i
        let zy = tensor(&pauli::z(), &pauli::y());
        assert_eq!(zy[(0, 1)], c(0.0, -1.0));
    }

    #[test]
    fn partial_trace_examples() {
        let zero_zero = DensityMatrix::basis_state(4, 0);
        let r = partial_trace(&zero_zero, &[0]).unwrap();
        assert_eq!(r.matrix(), DensityMatrix::basis_state(2, 0).matrix());

        for keep in [0, 1] {
            let r = partial_trace(&bell(), &[keep]).unwrap();
            assert!(max_abs_diff(r.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(2, &mut rng);
        let joint = DensityMatrix::new(
            tensor(rho.matrix(), DensityMatrix::maximally_mixed(2).matrix()),
            StateKind::Normalized,
        )
        .unwrap();
        let r = partial_trace(&joint, &[0]).unwrap();
        assert!(max_abs_diff(r.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::QubitOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn partial_trace_noncontiguous_keep() {
        // |0> (x) |1> (x) |0>: keep qubits 0 and 2 -> |00>
        let rho = DensityMatrix::basis_state(8, 0b010);
        let r = partial_trace(&rho, &[2, 0]).unwrap();
        assert_eq!(r.matrix(), DensityMatrix::basis_state(4, 0).matrix());
        let r = partial_trace(&rho, &[1]).unwrap();
        assert_eq!(r.matrix(), DensityMatrix::basis_state(2, 1).matrix());
    }

    #[test]
    fn evolve_examples() {
        let x = UnitaryMatrix::new(pauli::x()).unwrap();
        let out = evolve(&DensityMatrix::basis_state(2, 0), &x).unwrap();
        assert_eq!(out.matrix(), DensityMatrix::basis_state(2, 1).matrix());

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density(4, &mut rng);
        let out = evolve(&rho, &UnitaryMatrix::identity(4)).unwrap();
        assert_eq!(out.matrix(), rho.matrix());

        let u = random_unitary(2, 5);
        let mixed = DensityMatrix::maximally_mixed(2);
        let out = evolve(&mixed, &u).unwrap();
        assert!(max_abs_diff(out.matrix(), mixed.matrix()) < 1e-15);

        assert!(matches!(
            evolve(&mixed, &UnitaryMatrix::identity(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let z = HermitianObservable::new(pauli::z()).unwrap();
        let x = HermitianObservable::new(pauli::x()).unwrap();
        assert_eq!(expectation(&DensityMatrix::basis_state(2, 0), &z).unwrap(), 1.0);
        assert_eq!(expectation(&DensityMatrix::maximally_mixed(2), &x).unwrap(), 0.0);
        let xx = HermitianObservable::new(tensor(&pauli::x(), &pauli::x())).unwrap();
        assert_abs_diff_eq!(expectation(&bell(), &xx).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_requires_normalized_state() {
        let dev = DensityMatrix::new(pauli::z() * c(0.5, 0.0), StateKind::Deviation).unwrap();
        let z = HermitianObservable::new(pauli::z()).unwrap();
        assert_eq!(expectation(&dev, &z), Err(Error::RequiresNormalized));
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::new(pauli::x(), StateKind::Normalized),
            Err(Error::BadTrace { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(pauli::y() * I, StateKind::Deviation),
            Err(Error::NotHermitian(_))
        ));
        let neg = ComplexMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(matches!(
            DensityMatrix::new(neg, StateKind::Normalized),
            Err(Error::NotPositive(_))
        ));
        assert!(DensityMatrix::new(pauli::z(), StateKind::Deviation).is_ok());
    }

    #[test]
    fn expm_examples() {
        let out = expm(&pauli::z(), c(0.0, -PI / 2.0));
        let expected = pauli::z() * c(0.0, -1.0);
        assert!(max_abs_diff(&out, &expected) < 1e-15);

        let zero = ComplexMatrix::zeros(3, 3);
        assert_eq!(expm(&zero, c(2.0, 1.0)), ComplexMatrix::identity(3, 3));

        let out = expm(&pauli::x(), c(0.0, -PI / 4.0));
        let closed = pauli::identity() * c((PI / 4.0).cos(), 0.0)
            - pauli::x() * c(0.0, (PI / 4.0).sin());
        assert!(max_abs_diff(&out, &closed) < 1e-14);
        // power series route, independent of the eigendecomposition
        let mut series = ComplexMatrix::identity(2, 2);
        let mut term = ComplexMatrix::identity(2, 2);
        let a = pauli::x() * c(0.0, -PI / 4.0);
        for k in 1..40 {
            term = &term * &a / c(k as f64, 0.0);
            series += &term;
        }
        assert!(max_abs_diff(&out, &series) < 1e-14);
    }

    #[test]
    fn expm_non_hermitian_falls_back_to_taylor() {
        // nilpotent: exp(N) = 1 + N
        let n = ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(3.0, 0.0), ZERO, ZERO]);
        let out = expm(&n, ONE);
        let expected = ComplexMatrix::from_row_slice(2, 2, &[ONE, c(3.0, 0.0), ZERO, ONE]);
        assert!(max_abs_diff(&out, &expected) < 1e-13);
        // large-norm anti-Hermitian generator still exponentiates to a unitary
        let h = pauli::x() * c(0.0, 40.0) + pauli::z() * c(0.0, 25.0);
        let u = expm(&h, ONE);
        assert!(unitarity_defect(&u) < 1e-10);
    }

    #[test]
    fn random_unitary_examples() {
        assert_eq!(random_unitary(4, 11), random_unitary(4, 11));
        assert_ne!(random_unitary(4, 11), random_unitary(4, 12));
        for dim in [1, 2, 5, 16] {
            assert!(unitarity_defect(random_unitary(dim, 7).matrix()) < 1e-10);
        }
    }

    #[test]
    fn haar_first_moment() {
        // Monte-Carlo oracle: E|U00|^2 = 1/d
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let mean = (0..draws)
            .map(|_| random_unitary_with(2, &mut rng).matrix()[(0, 0)].norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn fidelity_and_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(4, &mut rng);
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
        let a = DensityMatrix::basis_state(2, 0);
        let b = DensityMatrix::basis_state(2, 1);
        assert_abs_diff_eq!(fidelity(&a, &b).unwrap(), 0.0, epsilon = 1e-12);
        let bad = ComplexMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), ZERO, ZERO, c(-0.2, 0.0)]);
        let p = project_physical(&bad).unwrap();
        assert!(max_abs_diff(p.matrix(), a.matrix()) < 1e-12);
    }

    #[test]
    fn pauli_products_are_lexicographic() {
        assert_eq!(pauli::product(0, 2), ComplexMatrix::identity(4, 4));
        assert_eq!(pauli::product(1, 2), tensor(&pauli::identity(), &pauli::x()));
        assert_eq!(pauli::product(4 * 3 + 2, 2), tensor(&pauli::z(), &pauli::y()));
        assert_eq!(pauli::labels(0b11_01, 2), vec![3, 1]);
    }
}
