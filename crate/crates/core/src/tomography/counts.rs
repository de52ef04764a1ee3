//! Experiment counting for standard, ancilla-assisted and single-scan
//! tomography.

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum number of independent acquisitions to fix the `4^n - 1` real
/// parameters of an `n`-qubit deviation matrix when each acquisition yields
/// `n_tot * 2^n_tot` real numbers, `n_tot = n + n_hat`.
pub fn min_experiments(n: usize, n_hat: usize) -> u64 {
    assert!(n >= 1, "need at least one input qubit");
    let total = n + n_hat;
    let unknowns: u128 = (1u128 << (2 * n)) - 1;
    let per_scan: u128 = (total as u128) << total;
    unknowns.div_ceil(per_scan) as u64
}

/// Ancilla sizes `(n_A, n_B)` for single-scan process tomography of `n`
/// qubits, as tabulated for `n = 1..=5`.
pub const SSPT_ANCILLA: [(usize, usize); 5] = [(1, 1), (2, 2), (3, 3), (4, 5), (5, 6)];

/// Smallest `n_B` for which one acquisition suffices with `n_A = n`.
pub fn minimal_sspt_ancilla(n: usize) -> usize {
    (0..).find(|&nb| min_experiments(2 * n, nb) == 1).expect("unbounded search")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub n: usize,
    pub m_qpt: u64,
    pub m_aapt: u64,
    pub aapt_ancilla: usize,
    pub m_sspt: u64,
    pub sspt_ancilla_a: usize,
    pub sspt_ancilla_b: usize,
}

/// Scan counts for QPT, AAPT and SSPT, `n = 1..=n_max`.
pub fn count_table(n_max: usize) -> Result<Vec<CountRow>> {
    if n_max == 0 || n_max > 6 {
        return Err(Error::InvalidParameter(format!("n_max must be in 1..=6, got {n_max}")));
    }
    Ok((1..=n_max)
        .map(|n| {
            let (na, nb) = SSPT_ANCILLA
                .get(n - 1)
                .copied()
                .unwrap_or_else(|| (n, minimal_sspt_ancilla(n)));
            CountRow {
                n,
                m_qpt: (1u64 << (2 * n)) * min_experiments(n, 0),
                m_aapt: min_experiments(2 * n, 0),
                aapt_ancilla: n,
                m_sspt: min_experiments(n + na, nb),
                sspt_ancilla_a: na,
                sspt_ancilla_b: nb,
            }
        })
        .collect())
}
