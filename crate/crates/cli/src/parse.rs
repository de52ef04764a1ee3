//! Parsing of angle expressions, grids, lists, and state/operator inputs.

use std::f64::consts::PI;
use std::path::Path;

use ancilla_core::qcore::{
    c, pauli, random_density, tensor_all, ComplexMatrix, ComplexVector, DensityMatrix, MatrixRows,
    StateKind,
};
use ancilla_core::rng::stream;

use crate::error::CliError;

/// Real number or multiple of pi: `0.3`, `pi`, `-pi/4`, `3pi/4`, `2*pi`.
pub fn angle(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::config(format!("cannot parse angle `{s}`"));
    let t = s.trim().to_ascii_lowercase();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t.as_str()),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (body, 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let k = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        k * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let v = sign * value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Inclusive grid `lo:hi:count`.
pub fn grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!("grid `{s}` must be lo:hi:count")));
    }
    let lo = angle(parts[0])?;
    let hi = angle(parts[1])?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad grid count in `{s}`")))?;
    if count == 0 {
        return Err(CliError::config("grid count must be positive"));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// Comma-separated list of angles or numbers.
pub fn list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(angle).collect()
}

pub fn usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::config(format!("bad integer `{p}` in `{s}`")))
        })
        .collect()
}

pub fn matrix_file(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let rows: MatrixRows = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Ok(ComplexMatrix::try_from(rows)?)
}

/// Named state preset on `n` qubits, or a JSON matrix file.
///
/// Presets: `mixed`, `zero`, `plus`, `ghz`, `random` (seeded Ginibre).
pub fn state(spec: &str, n: usize, seed: u64) -> Result<DensityMatrix, CliError> {
    let d = 1usize << n;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rho = match spec {
        "mixed" => DensityMatrix::maximally_mixed(d),
        "zero" => DensityMatrix::basis_state(d, 0),
        "plus" => {
            let amp = c(1.0 / (d as f64).sqrt(), 0.0);
            DensityMatrix::from_pure(&ComplexVector::from_element(d, amp))?
        }
        "ghz" => {
            let mut psi = ComplexVector::zeros(d);
            psi[0] = c(s, 0.0);
            psi[d - 1] = c(s, 0.0);
            DensityMatrix::from_pure(&psi)?
        }
        "random" => random_density(d, &mut stream(seed, 0)),
        path => {
            let m = matrix_file(Path::new(path))?;
            let kind = if m.trace().norm() < 1e-12 { StateKind::Deviation } else { StateKind::Normalized };
            let rho = DensityMatrix::new(m, kind)?;
            if rho.dim() != d {
                return Err(CliError::config(format!(
                    "state file has dimension {}, expected {d}",
                    rho.dim()
                )));
            }
            rho
        }
    };
    Ok(rho)
}

/// Pauli string such as `XZ` or `H` (letters I, X, Y, Z, H), or a JSON file.
pub fn operator(spec: &str) -> Result<ComplexMatrix, CliError> {
    let letters = !spec.is_empty() && spec.chars().all(|ch| "IXYZH".contains(ch));
    if letters {
        let factors: Vec<ComplexMatrix> = spec
            .chars()
            .map(|ch| match ch {
                'I' => pauli::identity(),
                'X' => pauli::x(),
                'Y' => pauli::y(),
                'Z' => pauli::z(),
                _ => pauli::hadamard(),
            })
            .collect();
        Ok(tensor_all(factors.iter()))
    } else {
        matrix_file(Path::new(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(angle("0").unwrap(), 0.0);
        assert_eq!(angle("pi").unwrap(), PI);
        assert_eq!(angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(angle("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(angle("0.25").unwrap(), 0.25);
        assert!(angle("tau").is_err());
        assert!(angle("1/0").is_err());
    }

    #[test]
    fn grids() {
        let g = grid("0:pi:64").unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 0.0);
        assert!((g[63] - PI).abs() < 1e-15);
        assert_eq!(grid("1:2:1").unwrap(), vec![1.0]);
        assert!(grid("0:1").is_err());
        assert!(grid("0:1:0").is_err());
        assert_eq!(list("0.1, 0.2,pi").unwrap(), vec![0.1, 0.2, PI]);
    }

    #[test]
    fn presets() {
        assert!((state("ghz", 2, 0).unwrap().matrix()[(0, 3)] - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(state("random", 2, 3).unwrap(), state("random", 2, 3).unwrap());
        assert!(state("/nonexistent.json", 1, 0).is_err());
        assert_eq!(operator("XZ").unwrap().nrows(), 4);
        assert!(operator("Q").is_err());
    }
}
