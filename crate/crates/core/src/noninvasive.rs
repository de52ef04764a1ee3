//! Ancilla-based joint-probability measurement (CNOT and ideal
//! negative-result schemes) and the entropic Leggett-Garg information
//! deficit.
//!
//! The system is qubit 0 and the ancilla qubit 1. The observable is
//! `sigma_z` with outcome `q = 0` for eigenvalue `+1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{compile, rot_x, Circuit, Gate};
use crate::error::{Error, Result};
use crate::qcore::{evolve, tensor, DensityMatrix, StateKind, UnitaryMatrix};
use crate::readout::diagonal_populations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Ancilla records the first outcome through a CNOT.
    Cnot,
    /// CNOT for the `q1 = 0` rows, anti-CNOT for the `q1 = 1` rows; only
    /// unflipped-ancilla populations are used.
    Inrm,
    /// Lueders collapse after the first measurement (invasive reference).
    Projective,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cnot, Method::Inrm, Method::Projective];
}

/// `p[q1][q2]`: joint probability of outcome `q1` then `q2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointProbabilityTable {
    pub p: [[f64; 2]; 2],
    pub method: Method,
}

impl JointProbabilityTable {
    pub fn new(p: [[f64; 2]; 2], method: Method) -> Result<Self> {
        let flat = p.iter().flatten();
        if flat.clone().any(|&v| !(-1e-10..=1.0 + 1e-10).contains(&v)) {
            return Err(Error::InconsistentTable(format!("entry out of [0, 1]: {p:?}")));
        }
        let sum: f64 = flat.sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InconsistentTable(format!("entries sum to {sum}")));
        }
        Ok(Self { p, method })
    }

    /// `P(q1)`.
    pub fn first_marginal(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[0][1], self.p[1][0] + self.p[1][1]]
    }

    /// `P(q2 | q1)` by Bayes; `None` for a row with zero marginal.
    pub fn conditional(&self, q1: usize) -> Option<[f64; 2]> {
        let m = self.first_marginal()[q1];
        (m > 0.0).then(|| [self.p[q1][0] / m, self.p[q1][1] / m])
    }
}

fn system_ancilla_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(
        tensor(rho.matrix(), DensityMatrix::basis_state(2, 0).matrix()),
        StateKind::Normalized,
    )
}

fn populations_after(
    joint: &DensityMatrix,
    record: Gate,
    u: &UnitaryMatrix,
) -> Result<Vec<f64>> {
    let circuit = Circuit::new(2).with(record).with(Gate::RawUnitary {
        targets: vec![0],
        u: u.clone(),
    });
    let out = evolve(joint, &compile(&circuit)?)?;
    diagonal_populations(&out)
}

/// Joint probabilities of `sigma_z` before and after evolution `u`.
pub fn joint_probabilities(
    rho: &DensityMatrix,
    u: &UnitaryMatrix,
    method: Method,
) -> Result<JointProbabilityTable> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    if rho.kind() != StateKind::Normalized {
        return Err(Error::RequiresNormalized);
    }
    // population index = 2 * system + ancilla
    let mut p = [[0.0; 2]; 2];
    match method {
        Method::Cnot => {
            let joint = system_ancilla_state(rho)?;
            let pops = populations_after(&joint, Gate::Cnot { control: 0, target: 1 }, u)?;
            for (q1, row) in p.iter_mut().enumerate() {
                for (q2, v) in row.iter_mut().enumerate() {
                    *v = pops[2 * q2 + q1];
                }
            }
        }
        Method::Inrm => {
            let joint = system_ancilla_state(rho)?;
            let cnot = populations_after(&joint, Gate::Cnot { control: 0, target: 1 }, u)?;
            let anti = populations_after(&joint, Gate::AntiCnot { control: 0, target: 1 }, u)?;
            for q2 in 0..2 {
                p[0][q2] = cnot[2 * q2];
                p[1][q2] = anti[2 * q2];
            }
        }
        Method::Projective => {
            for (q1, row) in p.iter_mut().enumerate() {
                let m = rho.matrix();
                let mut collapsed = nalgebra::DMatrix::zeros(2, 2);
                collapsed[(q1, q1)] = m[(q1, q1)];
                let branch = evolve(
                    &DensityMatrix::from_trusted(collapsed, StateKind::Normalized),
                    u,
                )?;
                for (q2, v) in row.iter_mut().enumerate() {
                    *v = branch.matrix()[(q2, q2)].re;
                }
            }
        }
    }
    JointProbabilityTable::new(p, method)
}

/// `H(Q2 | Q1)` in bits, with `0 log 0 = 0`.
pub fn conditional_entropy(table: &JointProbabilityTable) -> Result<f64> {
    let marginal = table.first_marginal();
    let mut h = 0.0;
    for q1 in 0..2 {
        if marginal[q1] <= 0.0 {
            if table.p[q1].iter().any(|&v| v > 0.0) {
                return Err(Error::InconsistentTable(format!(
                    "P(q1={q1}) = 0 with nonzero joint entries"
                )));
            }
            continue;
        }
        for q2 in 0..2 {
            let joint = table.p[q1][q2];
            if joint > 0.0 {
                let cond = joint / marginal[q1];
                h -= joint * cond.log2();
            }
        }
    }
    Ok(h.max(0.0))
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p]
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElgiConfig {
    /// Number of equidistant measurements.
    pub n: usize,
    /// Total rotation between the first and last measurement (radians).
    pub theta: f64,
    pub initial_state: DensityMatrix,
}

impl ElgiConfig {
    pub fn new(n: usize, theta: f64) -> Self {
        Self {
            n,
            theta,
            initial_state: DensityMatrix::maximally_mixed(2),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("need n >= 2, got {}", self.n)));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, pi], got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Conditional entropy between two measurements separated by `RotX(phi)`.
pub fn pair_entropy(rho: &DensityMatrix, phi: f64, method: Method) -> Result<f64> {
    let u = UnitaryMatrix::new(rot_x(phi))?;
    conditional_entropy(&joint_probabilities(rho, &u, method)?)
}

/// Spin-1/2 information deficit
/// `D_n = (n - 1) H(theta / (n - 1)) - H(theta)` from simulated tables.
pub fn elgi_deficit(cfg: &ElgiConfig, method: Method) -> Result<f64> {
    cfg.validate()?;
    let steps = (cfg.n - 1) as f64;
    let short = pair_entropy(&cfg.initial_state, cfg.theta / steps, method)?;
    let long = pair_entropy(&cfg.initial_state, cfg.theta, method)?;
    // log2(2s + 1) = 1 for s = 1/2
    Ok(steps * short - long)
}

/// Closed-form deficit for `RotX` evolution:
/// `(n - 1) h(cos^2(theta / (2(n - 1)))) - h(cos^2(theta / 2))`.
pub fn deficit_closed_form(n: usize, theta: f64) -> f64 {
    let steps = (n - 1) as f64;
    steps * binary_entropy((theta / (2.0 * steps)).cos().powi(2))
        - binary_entropy((theta / 2.0).cos().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeficitPoint {
    pub theta: f64,
    pub circuit: f64,
    pub closed_form: f64,
}

/// `D_n` on a grid of angles, evaluated in parallel; output follows `thetas`.
pub fn deficit_sweep(n: usize, thetas: &[f64], method: Method) -> Result<Vec<DeficitPoint>> {
    thetas
        .par_iter()
        .map(|&theta| {
            let circuit = elgi_deficit(&ElgiConfig::new(n, theta), method)?;
            Ok(DeficitPoint {
                theta,
                circuit,
                closed_form: deficit_closed_form(n, theta),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::ComplexMatrix;
    use std::f64::consts::PI;

    fn rx(phi: f64) -> UnitaryMatrix {
        UnitaryMatrix::new(rot_x(phi)).unwrap()
    }

    fn assert_table(t: &JointProbabilityTable, expected: [[f64; 2]; 2]) {
        for q1 in 0..2 {
            for q2 in 0..2 {
                assert!(
                    (t.p[q1][q2] - expected[q1][q2]).abs() < 1e-12,
                    "{:?}: {:?} vs {:?}",
                    t.method,
                    t.p,
                    expected
                );
            }
        }
    }

    #[test]
    fn identity_evolution_on_zero() {
        for method in Method::ALL {
            let t = joint_probabilities(
                &DensityMatrix::basis_state(2, 0),
                &UnitaryMatrix::identity(2),
                method,
            )
            .unwrap();
            assert_table(&t, [[1.0, 0.0], [0.0, 0.0]]);
        }
    }

    #[test]
    fn pi_rotation_flips_outcome() {
        let t = joint_probabilities(&DensityMatrix::maximally_mixed(2), &rx(PI), Method::Cnot)
            .unwrap();
        assert_table(&t, [[0.0, 0.5], [0.5, 0.0]]);
    }

    #[test]
    fn half_pi_rotation_is_uniform() {
        for method in Method::ALL {
            let t = joint_probabilities(&DensityMatrix::maximally_mixed(2), &rx(PI / 2.0), method)
                .unwrap();
            assert_table(&t, [[0.25; 2]; 2]);
        }
    }

    #[test]
    fn rejects_wrong_dimensions() {
        let r = joint_probabilities(
            &DensityMatrix::maximally_mixed(4),
            &UnitaryMatrix::identity(2),
            Method::Cnot,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn entropy_examples() {
        let det = JointProbabilityTable::new([[1.0, 0.0], [0.0, 0.0]], Method::Cnot).unwrap();
        assert_eq!(conditional_entropy(&det).unwrap(), 0.0);
        let uni = JointProbabilityTable::new([[0.25; 2]; 2], Method::Cnot).unwrap();
        assert!((conditional_entropy(&uni).unwrap() - 1.0).abs() < 1e-15);
        let t = joint_probabilities(&DensityMatrix::maximally_mixed(2), &rx(PI / 4.0), Method::Cnot)
            .unwrap();
        let h = conditional_entropy(&t).unwrap();
        let p = (PI / 8.0).cos().powi(2);
        let oracle = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((h - oracle).abs() < 1e-12);
        assert!((h - 0.6009).abs() < 1e-4);
    }

    #[test]
    fn entropy_rejects_inconsistent_table() {
        let bad = JointProbabilityTable {
            p: [[0.5, -0.0], [0.5, 0.0]],
            method: Method::Cnot,
        };
        assert!(conditional_entropy(&bad).is_ok());
        let bad = JointProbabilityTable {
            p: [[-0.5, 0.5], [0.5, 0.5]],
            method: Method::Cnot,
        };
        assert!(matches!(conditional_entropy(&bad), Err(Error::InconsistentTable(_))));
        assert!(JointProbabilityTable::new([[0.5, 0.5], [0.5, 0.0]], Method::Cnot).is_err());
    }

    #[test]
    fn deficit_examples() {
        let d = elgi_deficit(&ElgiConfig::new(3, PI / 4.0), Method::Cnot).unwrap();
        assert!((d + 0.134).abs() < 1e-3, "D3(pi/4) = {d}");
        let zero = elgi_deficit(&ElgiConfig::new(3, 0.0), Method::Inrm).unwrap();
        assert_eq!(zero, 0.0);
        // 2 h(cos^2(pi/16)) - h(cos^2(pi/8)), written out independently
        let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let oracle = 2.0 * h((PI / 16.0).cos().powi(2)) - h((PI / 8.0).cos().powi(2));
        assert!((d - oracle).abs() < 1e-10);
        assert!((oracle + 0.1342).abs() < 1e-4);
    }

    #[test]
    fn deficit_validates_config() {
        assert!(elgi_deficit(&ElgiConfig::new(1, 0.3), Method::Cnot).is_err());
        assert!(elgi_deficit(&ElgiConfig::new(3, 4.0), Method::Cnot).is_err());
    }

    #[test]
    fn deficit_is_initial_state_independent_for_diagonal_states() {
        let m = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[
            crate::qcore::c(0.3, 0.0),
            crate::qcore::c(0.7, 0.0),
        ]));
        let mut cfg = ElgiConfig::new(3, 1.1);
        let reference = elgi_deficit(&cfg, Method::Cnot).unwrap();
        cfg.initial_state = DensityMatrix::new(m, StateKind::Normalized).unwrap();
        let shifted = elgi_deficit(&cfg, Method::Cnot).unwrap();
        assert!((reference - shifted).abs() < 1e-12);
    }

    #[test]
    fn sweep_preserves_order() {
        let thetas = [0.0, 0.5, 1.0, 2.0];
        let pts = deficit_sweep(3, &thetas, Method::Inrm).unwrap();
        assert_eq!(pts.iter().map(|p| p.theta).collect::<Vec<_>>(), thetas);
        for p in pts {
            assert!((p.circuit - p.closed_form).abs() < 1e-10);
        }
    }
}
