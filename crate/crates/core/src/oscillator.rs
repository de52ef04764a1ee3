//! Truncated harmonic oscillator on qubits: Franck-Condon factors from a
//! displacement plus projector expectation, and the pseudo-spin
//! contextuality inequality on the lowest four levels.
//!
//! Units are dimensionless (`hbar = omega = mass = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expectation::{expect_projector, joint_expect};
use crate::qcore::{
    c, evolve, expm, pauli, qubit_count, tensor, ComplexMatrix, DensityMatrix,
    HermitianObservable, UnitaryMatrix, ONE,
};

/// Displacements at which the ground-state overlaps `f(0,0')` and
/// `f(0,1')` enter the classically forbidden region.
pub const FORBIDDEN_REGION_MARKERS: [(usize, usize, f64); 2] = [
    (0, 0, 2.0),
    (0, 1, 2.732_050_807_568_877),
];

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOscillator {
    pub d: usize,
    pub x_op: HermitianObservable,
    pub p_op: HermitianObservable,
    /// Energy offset between the two potentials. It only contributes an
    /// overall phase, so overlaps never read it.
    pub delta_e: f64,
}

impl TruncatedOscillator {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 levels, got {d}")));
        }
        let a = lowering(d);
        let ad = a.adjoint();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = (&a + &ad) * c(s, 0.0);
        let p = (&ad - &a) * c(0.0, s);
        Ok(Self {
            d,
            x_op: HermitianObservable::new(x)?,
            p_op: HermitianObservable::new(p)?,
            delta_e: 0.0,
        })
    }

    /// Commutator `[x, p]`; equals `i` on the interior levels only.
    pub fn commutator(&self) -> ComplexMatrix {
        let (x, p) = (self.x_op.matrix(), self.p_op.matrix());
        x * p - p * x
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level >= self.d {
            return Err(Error::LevelOutOfRange { level, d: self.d });
        }
        Ok(())
    }
}

/// Truncated annihilation operator, `a|k> = sqrt(k)|k-1>`.
pub fn lowering(d: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
    }
    a
}

/// Level `k` sits on the qubit basis state with index `k`:
/// `|0> = |up up>`, `|1> = |up down>`, `|2> = |down up>`, `|3> = |down down>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QhoEncoding {
    pub n_qubits: usize,
}

impl QhoEncoding {
    pub fn for_levels(d: usize) -> Result<Self> {
        Ok(Self {
            n_qubits: qubit_count(d)?,
        })
    }

    pub fn qubit_state(&self, level: usize) -> usize {
        level
    }

    pub fn level(&self, qubit_state: usize) -> usize {
        qubit_state
    }

    /// Spin labels (`true` = up) of a level, qubit 0 first.
    pub fn spins(&self, level: usize) -> Vec<bool> {
        (0..self.n_qubits)
            .map(|q| (self.qubit_state(level) >> (self.n_qubits - 1 - q)) & 1 == 0)
            .collect()
    }
}

/// `U_T(b) = exp(-i p b)`.
pub fn translation(osc: &TruncatedOscillator, b: f64) -> Result<UnitaryMatrix> {
    if !b.is_finite() {
        return Err(Error::InvalidParameter(format!("displacement must be finite, got {b}")));
    }
    UnitaryMatrix::new(expm(osc.p_op.matrix(), c(0.0, -b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FcfRoute {
    /// Projector expectation through the ancilla circuit.
    Circuit,
    /// `|<m|U_T(b)|n>|^2` read off the matrix.
    Direct,
}

/// Franck-Condon factor `f(m, n') = |<m|U_T(b)|n>|^2` in the truncated space.
pub fn fcf(osc: &TruncatedOscillator, m: usize, n: usize, b: f64, route: FcfRoute) -> Result<f64> {
    osc.check_level(m)?;
    osc.check_level(n)?;
    let u = translation(osc, b)?;
    match route {
        FcfRoute::Direct => Ok(u.matrix()[(m, n)].norm_sqr()),
        FcfRoute::Circuit => {
            let enc = QhoEncoding::for_levels(osc.d)?;
            let prepared = evolve(&DensityMatrix::basis_state(osc.d, enc.qubit_state(n)), &u)?;
            let mut proj = ComplexMatrix::zeros(osc.d, osc.d);
            proj[(enc.qubit_state(m), enc.qubit_state(m))] = ONE;
            expect_projector(&prepared, &HermitianObservable::new(proj)?)
        }
    }
}

/// Hermite functions `psi_0..=psi_kmax` at `x`, by the stable three-term
/// recurrence.
pub fn hermite_functions(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    out.push(psi0);
    if kmax >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * psi0);
    }
    for k in 1..kmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Infinite-level reference: `(integral psi_m(x) psi_n(x - b) dx)^2` by the
/// trapezoid rule on `[-20, 20 + b]`. The integrand is smooth and decays as
/// a Gaussian, where the trapezoid rule converges exponentially in the step.
pub fn fcf_analytic_oracle(m: usize, n: usize, b: f64) -> f64 {
    const STEP: f64 = 1.0 / 128.0;
    let lo = -20.0 + b.min(0.0);
    let hi = 20.0 + b.max(0.0);
    let steps = ((hi - lo) / STEP).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    let kmax = m.max(n);
    let mut sum = 0.0;
    for i in 0..=steps {
        let x = lo + i as f64 * h;
        let weight = if i == 0 || i == steps { 0.5 } else { 1.0 };
        let left = hermite_functions(kmax, x)[m];
        let right = hermite_functions(kmax, x - b)[n];
        sum += weight * left * right;
    }
    let overlap = sum * h;
    overlap * overlap
}

/// The observables `A, B, C, D` built from the two pseudo-spin sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualityObservables {
    pub beta: f64,
    pub eta: f64,
    pub a: HermitianObservable,
    pub b: HermitianObservable,
    pub c: HermitianObservable,
    pub d: HermitianObservable,
}

impl ContextualityObservables {
    pub fn new(beta: f64, eta: f64) -> Result<Self> {
        let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
        let id = pauli::identity();
        let gamma_x = tensor(&x, &id);
        let gamma_z = -tensor(&y, &y);
        let gamma_xp = tensor(&x, &z);
        let gamma_zp = -tensor(&x, &x);
        let mix = |angle: f64| &gamma_xp * c(angle.cos(), 0.0) + &gamma_zp * c(angle.sin(), 0.0);
        Ok(Self {
            beta,
            eta,
            a: HermitianObservable::new(gamma_x)?,
            b: HermitianObservable::new(mix(beta))?,
            c: HermitianObservable::new(gamma_z)?,
            d: HermitianObservable::new(mix(eta))?,
        })
    }

    /// The compatible pairs `(A,B), (B,C), (C,D), (D,A)`.
    pub fn pairs(&self) -> [(&HermitianObservable, &HermitianObservable); 4] {
        [(&self.a, &self.b), (&self.b, &self.c), (&self.c, &self.d), (&self.d, &self.a)]
    }
}

/// Angle pairs `(beta, eta)` giving the maximal violation for each level.
pub const MAX_VIOLATION_ANGLES: [(f64, f64); 4] = {
    use std::f64::consts::FRAC_PI_4 as Q;
    [(-Q, -3.0 * Q), (3.0 * Q, Q), (Q, 3.0 * Q), (-3.0 * Q, -Q)]
};

/// `<AB> + <BC> + <CD> - <AD>` on level `l`, every pair measured jointly
/// with an ancilla-controlled circuit.
pub fn contextuality_i(level: usize, beta: f64, eta: f64) -> Result<f64> {
    if level > 3 {
        return Err(Error::LevelOutOfRange { level, d: 4 });
    }
    let obs = ContextualityObservables::new(beta, eta)?;
    let enc = QhoEncoding::for_levels(4)?;
    let rho = DensityMatrix::basis_state(4, enc.qubit_state(level));
    let signs = [1.0, 1.0, 1.0, -1.0];
    let mut total = 0.0;
    for ((first, second), sign) in obs.pairs().into_iter().zip(signs) {
        let u = UnitaryMatrix::new(first.matrix().clone())?;
        let v = UnitaryMatrix::new(second.matrix().clone())?;
        let value = joint_expect(&rho, &u, &v)?.value;
        if value.im.abs() > 1e-9 {
            return Err(Error::ComplexExpectation(value.im));
        }
        total += sign * value.re;
    }
    Ok(total)
}
