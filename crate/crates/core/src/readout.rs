//! NMR-style readout: transverse expectations, diagonal populations and the
//! single-quantum-coherence spectrum.
//!
//! Spectral amplitude convention: for qubit `j` and configuration `b` of the
//! remaining qubits, the amplitude is `<m'| rho |m>` where `m'` has bit `j`
//! cleared and `m` has it set. Resonance positions are not modeled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuits::embed;
use crate::error::{Error, Result};
use crate::qcore::{pauli, trace_product, DensityMatrix, StateKind, C64};

/// One resolved line: qubit `qubit` with the other qubits in `other_bits`
/// (remaining qubits in ascending order, most significant first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub qubit: usize,
    pub other_bits: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub n_qubits: usize,
    pub lines: Vec<SpectralLine>,
    /// Noise std relative to the largest ideal amplitude; 0 means ideal.
    pub noise_sigma: f64,
    /// Absolute noise std actually applied to each real component.
    pub noise_abs: f64,
    pub seed: Option<u64>,
}

impl SpectralRecord {
    /// Line count `n * 2^(n-1)`.
    pub fn line_count(n_qubits: usize) -> usize {
        n_qubits << (n_qubits - 1)
    }

    pub fn amplitude(&self, qubit: usize, other_bits: usize) -> C64 {
        let line = &self.lines[qubit * (1 << (self.n_qubits - 1)) + other_bits];
        C64::new(line.re, line.im)
    }

    /// Real observation vector: `[re_0, im_0, re_1, im_1, ...]`.
    pub fn real_vector(&self) -> Vec<f64> {
        self.lines.iter().flat_map(|l| [l.re, l.im]).collect()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.lines
            .iter()
            .map(|l| l.re.hypot(l.im))
            .fold(0.0, f64::max)
    }
}

/// Insert `bit` at qubit position `j` of an `n`-qubit index built from the
/// other `n - 1` bits.
pub(crate) fn insert_bit(other_bits: usize, j: usize, bit: usize, n: usize) -> usize {
    let shift = n - 1 - j;
    let high = (other_bits >> shift) << (shift + 1);
    let low = other_bits & ((1 << shift) - 1);
    high | (bit << shift) | low
}

/// `(<sigma_x>, <sigma_y>)` of qubit `j`.
pub fn transverse_expectations(rho: &DensityMatrix, j: usize) -> Result<(f64, f64)> {
    if rho.kind() != StateKind::Normalized {
        return Err(Error::RequiresNormalized);
    }
    let n = rho.n_qubits()?;
    let sx = embed(&pauli::x(), &[j], n)?;
    let sy = embed(&pauli::y(), &[j], n)?;
    Ok((
        trace_product(rho.matrix(), &sx)?.re,
        trace_product(rho.matrix(), &sy)?.re,
    ))
}

/// Ideal spectrum of `rho`.
pub fn spectrum(rho: &DensityMatrix) -> Result<SpectralRecord> {
    let n = rho.n_qubits()?;
    let m = rho.matrix();
    let others = 1usize << (n - 1);
    let mut lines = Vec::with_capacity(n * others);
    for j in 0..n {
        for b in 0..others {
            let lo = insert_bit(b, j, 0, n);
            let hi = insert_bit(b, j, 1, n);
            let amp = m[(lo, hi)];
            lines.push(SpectralLine {
                qubit: j,
                other_bits: b,
                re: amp.re,
                im: amp.im,
            });
        }
    }
    Ok(SpectralRecord {
        n_qubits: n,
        lines,
        noise_sigma: 0.0,
        noise_abs: 0.0,
        seed: None,
    })
}

/// Spectrum with additive Gaussian noise on every real and imaginary part.
/// The std is `noise_sigma` times the largest ideal amplitude.
pub fn noisy_spectrum(rho: &DensityMatrix, noise_sigma: f64, seed: u64) -> Result<SpectralRecord> {
    let mut record = spectrum(rho)?;
    add_noise(&mut record, noise_sigma, seed)?;
    Ok(record)
}

pub(crate) fn add_noise(record: &mut SpectralRecord, noise_sigma: f64, seed: u64) -> Result<()> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise_sigma must be finite and non-negative, got {noise_sigma}"
        )));
    }
    if noise_sigma == 0.0 {
        return Ok(());
    }
    let abs = noise_sigma * record.max_amplitude();
    record.noise_sigma = noise_sigma;
    record.noise_abs = abs;
    record.seed = Some(seed);
    if abs == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, abs).expect("positive finite std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for line in &mut record.lines {
        line.re += normal.sample(&mut rng);
        line.im += normal.sample(&mut rng);
    }
    Ok(())
}

/// Real parts of the diagonal.
pub fn diagonal_populations(rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.kind() != StateKind::Normalized {
        return Err(Error::RequiresNormalized);
    }
    Ok((0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{c, tensor, ComplexMatrix};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::from_element(2, 2, c(0.5, 0.0)), StateKind::Normalized)
            .unwrap()
    }

    #[test]
    fn transverse_examples() {
        let (x, y) = transverse_expectations(&plus(), 0).unwrap();
        assert!((x - 1.0).abs() < 1e-15 && y.abs() < 1e-15);
        let (x, y) = transverse_expectations(&DensityMatrix::basis_state(2, 0), 0).unwrap();
        assert_eq!((x, y), (0.0, 0.0));
        let s = FRAC_1_SQRT_2;
        let m = (ComplexMatrix::identity(2, 2) + (pauli::x() + pauli::y()) * c(s, 0.0)) * c(0.5, 0.0);
        let rho = DensityMatrix::new(m, StateKind::Normalized).unwrap();
        let (x, y) = transverse_expectations(&rho, 0).unwrap();
        assert!((x - s).abs() < 1e-15 && (y - s).abs() < 1e-15);
    }

    #[test]
    fn spectrum_examples() {
        let rec = spectrum(&DensityMatrix::maximally_mixed(8)).unwrap();
        assert_eq!(rec.lines.len(), 12);
        assert!(rec.lines.iter().all(|l| l.re == 0.0 && l.im == 0.0));

        let rec = spectrum(&plus()).unwrap();
        assert_eq!(rec.lines.len(), 1);
        assert_eq!(rec.amplitude(0, 0), c(0.5, 0.0));

        let joint = DensityMatrix::new(
            tensor(plus().matrix(), DensityMatrix::basis_state(2, 0).matrix()),
            StateKind::Normalized,
        )
        .unwrap();
        let rec = spectrum(&joint).unwrap();
        assert_eq!(rec.amplitude(0, 0), c(0.5, 0.0));
        for (q, b) in [(0, 1), (1, 0), (1, 1)] {
            assert_eq!(rec.amplitude(q, b), c(0.0, 0.0), "line ({q},{b})");
        }
    }

    #[test]
    fn spectrum_sign_convention_matches_raising_operator() {
        // sigma_x + i sigma_y = 2|0><1|, so tr(rho (X + iY)) = 2 rho_10
        // and the recorded amplitude rho_01 is its conjugate over two.
        let m = (ComplexMatrix::identity(2, 2) + pauli::y() * c(0.6, 0.0)) * c(0.5, 0.0);
        let rho = DensityMatrix::new(m, StateKind::Normalized).unwrap();
        let (x, y) = transverse_expectations(&rho, 0).unwrap();
        let amp = spectrum(&rho).unwrap().amplitude(0, 0);
        assert!((amp - c(x, y).conj() * 0.5).norm() < 1e-15);
    }

    #[test]
    fn populations_examples() {
        assert_eq!(
            diagonal_populations(&DensityMatrix::basis_state(4, 1)).unwrap(),
            vec![0.0, 1.0, 0.0, 0.0]
        );
        assert_eq!(
            diagonal_populations(&DensityMatrix::maximally_mixed(4)).unwrap(),
            vec![0.25; 4]
        );
        let s = FRAC_1_SQRT_2;
        let bell = DensityMatrix::from_pure(&nalgebra::DVector::from_column_slice(&[
            c(s, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(s, 0.0),
        ]))
        .unwrap();
        let p = diagonal_populations(&bell).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
        assert_eq!((p[1], p[2]), (0.0, 0.0));
    }

    #[test]
    fn noise_is_seeded() {
        let a = noisy_spectrum(&plus(), 0.1, 4).unwrap();
        let b = noisy_spectrum(&plus(), 0.1, 4).unwrap();
        let d = noisy_spectrum(&plus(), 0.1, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
        assert!((a.noise_abs - 0.05).abs() < 1e-15);
        assert!(noisy_spectrum(&plus(), -1.0, 0).is_err());
    }

    #[test]
    fn insert_bit_layout() {
        // n=3, j=1, others (q0,q2)=(1,0) -> |1 b 0>
        assert_eq!(insert_bit(0b10, 1, 0, 3), 0b100);
        assert_eq!(insert_bit(0b10, 1, 1, 3), 0b110);
        assert_eq!(insert_bit(0b11, 0, 1, 3), 0b111);
        assert_eq!(insert_bit(0b01, 2, 0, 3), 0b010);
    }
}
