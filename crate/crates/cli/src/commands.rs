//! One parameter struct per subcommand. Every field is optional on the
//! command line and in config files; `defaults()` fills all of them so the
//! resolved struct serializes completely.

use std::f64::consts::SQRT_2;
use std::path::Path;

use clap::Args;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ancilla_core::circuits::{compile, rot_x, Circuit};
use ancilla_core::expectation::{
    expect_diagonal_hermitian, expect_hermitian_unitary, expect_projector, expect_unitary,
    joint_expect,
};
use ancilla_core::noise::{
    noise_spectrum, simulate_decay, NoiseConfig, PulseSequence, SequenceKind,
};
use ancilla_core::noninvasive::{deficit_sweep, joint_probabilities, Method};
use ancilla_core::oscillator::{
    contextuality_i, fcf, fcf_analytic_oracle, FcfRoute, TruncatedOscillator,
    FORBIDDEN_REGION_MARKERS, MAX_VIOLATION_ANGLES,
};
use ancilla_core::qcore::{
    fidelity, frobenius_distance, trace_product, HermitianObservable, MatrixRows, StateKind,
    UnitaryMatrix,
};
use ancilla_core::tomography::aaqst::{acquire, build_plan, reconstruct};
use ancilla_core::tomography::counts::{count_table, min_experiments};
use ancilla_core::tomography::process::{process_fidelity, sspt, ChiMatrix, ProcessMap, SsptConfig};

use crate::error::CliError;
use crate::output::{Cell, CsvTable, Report};
use crate::parse;

pub trait Command: Serialize + DeserializeOwned + Clone {
    const NAME: &'static str;
    fn defaults() -> Self;
    fn run(&self, seed: u64) -> Result<Report, CliError>;
}

fn get<T: Clone>(v: &Option<T>) -> T {
    v.clone().expect("parameters are resolved against complete defaults")
}

fn enum_value<T: DeserializeOwned>(field: &str, value: &str) -> Result<T, CliError> {
    serde_json::from_value(Value::String(value.to_string()))
        .map_err(|_| CliError::config(format!("invalid {field} `{value}`")))
}

fn matrix_json(m: &ancilla_core::qcore::ComplexMatrix) -> Value {
    serde_json::to_value(MatrixRows::from(m)).expect("json")
}

// ---------------------------------------------------------------- elgi

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElgiArgs {
    /// Number of measurements n (count) [default: 3]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Total rotation grid lo:hi:count in radians, `pi` allowed [default: 0:pi:256]
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<String>,
    /// Joint-probability scheme: cnot | inrm | projective [default: cnot]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

impl Command for ElgiArgs {
    const NAME: &'static str = "elgi";

    fn defaults() -> Self {
        Self {
            n: Some(3),
            theta_grid: Some("0:pi:256".into()),
            method: Some("cnot".into()),
        }
    }

    fn run(&self, _seed: u64) -> Result<Report, CliError> {
        let n = get(&self.n);
        let thetas = parse::grid(&get(&self.theta_grid))?;
        let method: Method = enum_value("method", &get(&self.method))?;
        let points = deficit_sweep(n, &thetas, method)?;
        let col_c = format!("D{n}_circuit");
        let col_f = format!("D{n}_closed_form");
        let mut table = CsvTable::new("elgi", &["theta", &col_c, &col_f]);
        for p in &points {
            table.push([p.theta, p.circuit, p.closed_form]);
        }
        let min = points
            .iter()
            .min_by(|a, b| a.circuit.total_cmp(&b.circuit))
            .expect("non-empty grid");
        let max_diff = points
            .iter()
            .map(|p| (p.circuit - p.closed_form).abs())
            .fold(0.0, f64::max);
        Ok(Report {
            tables: vec![table],
            result: json!({
                "min_theta": min.theta,
                "min_value": min.circuit,
                "max_abs_circuit_minus_closed_form": max_diff,
            }),
            recipe: Some(format!(
                "figure: entropic Leggett-Garg deficit\n\
                 x: theta (rad), column `theta`\n\
                 y: D{n} (bits), series `{col_c}` as markers, `{col_f}` as a line\n\
                 reference: horizontal line y = 0 (classical bound)\n\
                 reference: vertical line theta = pi/4, expected minimum -0.134 for n = 3\n"
            )),
        })
    }
}

// ---------------------------------------------------------------- inrm

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InrmArgs {
    /// Rotation about x between the two measurements, radians [default: pi/4]
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    /// Initial qubit state: mixed | zero | plus | random | JSON matrix file [default: mixed]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
}

impl Command for InrmArgs {
    const NAME: &'static str = "inrm";

    fn defaults() -> Self {
        Self {
            theta: Some("pi/4".into()),
            state: Some("mixed".into()),
        }
    }

    fn run(&self, seed: u64) -> Result<Report, CliError> {
        let theta = parse::angle(&get(&self.theta))?;
        let rho = parse::state(&get(&self.state), 1, seed)?;
        let u = UnitaryMatrix::new(rot_x(theta))?;
        let tables = Method::ALL
            .iter()
            .map(|&m| joint_probabilities(&rho, &u, m))
            .collect::<Result<Vec<_>, _>>()?;
        let mut discrepancy: f64 = 0.0;
        for t in &tables[1..] {
            for q1 in 0..2 {
                for q2 in 0..2 {
                    discrepancy = discrepancy.max((t.p[q1][q2] - tables[0].p[q1][q2]).abs());
                }
            }
        }
        let inrm = &tables[1];
        let marginal = inrm.first_marginal();
        let mut bayes: f64 = 0.0;
        for q1 in 0..2 {
            if let Some(cond) = inrm.conditional(q1) {
                for q2 in 0..2 {
                    bayes = bayes.max((marginal[q1] * cond[q2] - inrm.p[q1][q2]).abs());
                }
            }
        }
        Ok(Report::json(json!({
            "theta": theta,
            "tables": {
                "cnot": tables[0].p,
                "inrm": tables[1].p,
                "projective": tables[2].p,
            },
            "first_marginal": marginal,
            "conditional_given_q1": [inrm.conditional(0), inrm.conditional(1)],
            "max_method_discrepancy": discrepancy,
            "bayes_residual": bayes,
        })))
    }
}

// ---------------------------------------------------------------- moussa

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoussaArgs {
    /// Measured quantity: unitary | hermitian | projector | diagonal | joint [default: unitary]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    /// System qubits (count) [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// System state: mixed | zero | plus | ghz | random | JSON matrix file [default: zero]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    /// Operator as a Pauli string (I, X, Y, Z, H per qubit) or JSON matrix file [default: Z]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    /// Second operator V for `joint`, applied after the first [default: Z]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<String>,
    /// Gate-list JSON file whose compiled unitary replaces `operator` for `unitary` and `joint`; empty for none [default: ""]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<String>,
}

impl Command for MoussaArgs {
    const NAME: &'static str = "moussa";

    fn defaults() -> Self {
        Self {
            op: Some("unitary".into()),
            n: Some(1),
            state: Some("zero".into()),
            operator: Some("Z".into()),
            second: Some("Z".into()),
            circuit: Some(String::new()),
        }
    }

    fn run(&self, seed: u64) -> Result<Report, CliError> {
        let n = get(&self.n);
        let rho = parse::state(&get(&self.state), n, seed)?;
        let circuit = get(&self.circuit);
        let first = if circuit.is_empty() {
            parse::operator(&get(&self.operator))?
        } else {
            let text = std::fs::read_to_string(&circuit)
                .map_err(|e| CliError::config(format!("cannot read {circuit}: {e}")))?;
            compile(&Circuit::from_gates_json(n, &text)?)?.into_matrix()
        };
        let op = get(&self.op);
        let result = match op.as_str() {
            "unitary" | "joint" => {
                let u = UnitaryMatrix::new(first)?;
                let (r, oracle) = if op == "unitary" {
                    let oracle = trace_product(rho.matrix(), u.matrix())?;
                    (expect_unitary(&rho, &u)?, oracle)
                } else {
                    let v = UnitaryMatrix::new(parse::operator(&get(&self.second))?)?;
                    let oracle = trace_product(rho.matrix(), &(v.matrix() * u.matrix()))?;
                    (joint_expect(&rho, &u, &v)?, oracle)
                };
                json!({
                    "value": [r.value.re, r.value.im],
                    "ancilla_readout": r.ancilla_readout,
                    "direct_trace": [oracle.re, oracle.im],
                    "abs_error": (r.value - oracle).norm(),
                })
            }
            "hermitian" | "projector" | "diagonal" => {
                let a = HermitianObservable::new(first)?;
                let value = match op.as_str() {
                    "hermitian" => expect_hermitian_unitary(&rho, &a)?,
                    "projector" => expect_projector(&rho, &a)?,
                    _ => expect_diagonal_hermitian(&rho, &a)?,
                };
                let oracle = trace_product(rho.matrix(), a.matrix())?.re;
                json!({
                    "value": value,
                    "direct_trace": oracle,
                    "abs_error": (value - oracle).abs(),
                })
            }
            other => return Err(CliError::config(format!("invalid op `{other}`"))),
        };
        Ok(Report::json(result))
    }
}

// ---------------------------------------------------------------- fcf

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcfArgs {
    /// Truncated oscillator levels d (count, power of two) [default: 4]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Displacement grid lo:hi:count in oscillator length units [default: 0:3:61]
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_grid: Option<String>,
    /// Comma-separated upper-surface levels n [default: 0,1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<String>,
}

impl Command for FcfArgs {
    const NAME: &'static str = "fcf";

    fn defaults() -> Self {
        Self {
            d: Some(4),
            b_grid: Some("0:3:61".into()),
            n_list: Some("0,1".into()),
        }
    }

    fn run(&self, _seed: u64) -> Result<Report, CliError> {
        let d = get(&self.d);
        let osc = TruncatedOscillator::new(d)?;
        let bs = parse::grid(&get(&self.b_grid))?;
        let ns = parse::usize_list(&get(&self.n_list))?;
        let jobs: Vec<(f64, usize, usize)> = bs
            .iter()
            .flat_map(|&b| ns.iter().flat_map(move |&n| (0..d).map(move |m| (b, m, n))))
            .collect();
        let rows = jobs
            .par_iter()
            .map(|&(b, m, n)| {
                let truncated = fcf(&osc, m, n, b, FcfRoute::Circuit)?;
                Ok([b, m as f64, n as f64, truncated, fcf_analytic_oracle(m, n, b)])
            })
            .collect::<Result<Vec<_>, ancilla_core::Error>>()?;
        let mut table = CsvTable::new("fcf", &["b", "m", "n", "fcf_truncated", "fcf_analytic"]);
        for r in rows {
            table.push([r[0].cell(), (r[1] as usize).cell(), (r[2] as usize).cell(), r[3].cell(), r[4].cell()]);
        }
        let markers: Vec<Value> = FORBIDDEN_REGION_MARKERS
            .iter()
            .map(|&(m, n, b)| json!({ "m": m, "n": n, "b": b }))
            .collect();
        let marker_lines: String = FORBIDDEN_REGION_MARKERS
            .iter()
            .map(|&(m, n, b)| format!("reference: vertical line b = {b} on the (m={m}, n={n}) panel\n"))
            .collect();
        Ok(Report {
            tables: vec![table],
            result: json!({ "forbidden_region_markers": markers }),
            recipe: Some(format!(
                "figure: Franck-Condon factors\n\
                 panels: one per (m, n)\n\
                 x: b (oscillator length units), column `b`\n\
                 y: f(m, n) (dimensionless), `fcf_truncated` as markers, `fcf_analytic` as a line\n\
                 {marker_lines}"
            )),
        })
    }
}

// ---------------------------------------------------------------- contextuality

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextualityArgs {
    /// Beta grid lo:hi:count in radians [default: -pi:pi:100]
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<String>,
    /// Eta grid lo:hi:count in radians [default: -pi:pi:100]
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<String>,
    /// Comma-separated oscillator levels l in 0..=3 [default: 0,1,2,3]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<String>,
}

impl Command for ContextualityArgs {
    const NAME: &'static str = "contextuality";

    fn defaults() -> Self {
        Self {
            beta_grid: Some("-pi:pi:100".into()),
            eta_grid: Some("-pi:pi:100".into()),
            levels: Some("0,1,2,3".into()),
        }
    }

    fn run(&self, _seed: u64) -> Result<Report, CliError> {
        let betas = parse::grid(&get(&self.beta_grid))?;
        let etas = parse::grid(&get(&self.eta_grid))?;
        let levels = parse::usize_list(&get(&self.levels))?;
        let mut jobs: Vec<(usize, f64, f64)> = Vec::new();
        for &l in &levels {
            for &b in &betas {
                jobs.extend(etas.iter().map(|&e| (l, b, e)));
            }
        }
        let values = jobs
            .par_iter()
            .map(|&(l, b, e)| contextuality_i(l, b, e))
            .collect::<Result<Vec<_>, _>>()?;
        let mut table = CsvTable::new("contextuality", &["l", "beta", "eta", "I"]);
        for (&(l, b, e), v) in jobs.iter().zip(&values) {
            table.push([l.cell(), b.cell(), e.cell(), v.cell()]);
        }
        let at_max = levels
            .iter()
            .map(|&l| {
                let (b, e) = MAX_VIOLATION_ANGLES[l.min(3)];
                Ok(json!({ "l": l, "beta": b, "eta": e, "I": contextuality_i(l, b, e)? }))
            })
            .collect::<Result<Vec<_>, ancilla_core::Error>>()?;
        Ok(Report {
            tables: vec![table],
            result: json!({
                "max_abs_I": values.iter().fold(0.0f64, |a, v| a.max(v.abs())),
                "quantum_bound": 2.0 * SQRT_2,
                "at_max_violation_angles": at_max,
            }),
            recipe: Some(
                "figure: contextuality witness surfaces\n\
                 panels: one per level `l`\n\
                 x: beta (rad), y: eta (rad), z: I (dimensionless) as a surface\n\
                 reference: planes z = 2 (noncontextual bound) and z = 2*sqrt(2)\n"
                    .into(),
            ),
        })
    }
}

// ---------------------------------------------------------------- aaqst

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AaqstArgs {
    /// Input-register qubits (count) [default: 3]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Ancilla qubits (count) [default: 2]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<usize>,
    /// Random plan candidates; the best-conditioned is kept (count) [default: 20]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    /// Readout noise std, relative to the largest ideal amplitude [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    /// Input state: mixed | zero | plus | ghz | random | JSON matrix file [default: random]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
}

impl Command for AaqstArgs {
    const NAME: &'static str = "aaqst";

    fn defaults() -> Self {
        Self {
            n: Some(3),
            ancilla: Some(2),
            draws: Some(20),
            noise: Some(0.0),
            state: Some("random".into()),
        }
    }

    fn run(&self, seed: u64) -> Result<Report, CliError> {
        let n = get(&self.n);
        let rho = parse::state(&get(&self.state), n, seed)?;
        let plan = build_plan(n, get(&self.ancilla), seed, get(&self.draws))?;
        let records = acquire(&plan, &rho, get(&self.noise), seed)?;
        let rec = reconstruct(&plan, &records, rho.kind())?;
        let error = frobenius_distance(&rec.matrix, rho.matrix());
        let state_fidelity = if rho.kind() == StateKind::Normalized {
            Some(fidelity(&rec.physical()?, &rho)?)
        } else {
            None
        };
        Ok(Report::json(json!({
            "experiments": plan.experiments.len(),
            "condition_number": plan.condition_number,
            "residual": rec.residual,
            "frobenius_error": error,
            "fidelity_after_projection": state_fidelity,
            "reconstructed": matrix_json(&rec.matrix),
            "input": matrix_json(rho.matrix()),
        })))
    }
}

// ---------------------------------------------------------------- sspt

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsptArgs {
    /// identity | notx | noty | hadamard | phase(θ in rad) | Kraus-list JSON file [default: identity]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    /// Readout noise std, relative to the largest ideal amplitude [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    /// Ancilla-A qubits, equal to the process qubits (count) [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_a: Option<usize>,
    /// Ancilla-B qubits for the single-scan readout (count) [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    /// Random plan candidates (count) [default: 20]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
}

impl Command for SsptArgs {
    const NAME: &'static str = "sspt";

    fn defaults() -> Self {
        Self {
            process: Some("identity".into()),
            noise: Some(0.0),
            n_a: Some(1),
            n_b: Some(1),
            draws: Some(20),
        }
    }

    fn run(&self, seed: u64) -> Result<Report, CliError> {
        let spec = get(&self.process);
        let process = if spec.ends_with(".json") || Path::new(&spec).is_file() {
            let text = std::fs::read_to_string(&spec)
                .map_err(|e| CliError::config(format!("cannot read {spec}: {e}")))?;
            ProcessMap::from_kraus_json(&text)?
        } else {
            ProcessMap::named(&spec)?
        };
        let cfg = SsptConfig {
            n_a: get(&self.n_a),
            n_b: get(&self.n_b),
            noise_sigma: get(&self.noise),
            seed,
            draws: get(&self.draws),
        };
        let run = sspt(&process, &cfg)?;
        let theory = ChiMatrix::from_process(&process)?;
        Ok(Report::json(json!({
            "chi": matrix_json(&run.chi.chi),
            "chi_theory": matrix_json(&theory.chi),
            "fidelity_vs_theory": process_fidelity(&run.chi, &theory)?,
            "hermiticity_defect": run.chi.hermiticity_defect(),
            "trace_preservation_defect": run.chi.trace_preservation_defect(),
            "min_eigenvalue": run.min_eigenvalue,
            "non_cp_warning": run.non_cp_warning,
            "plan_condition_number": run.plan_condition_number,
            "reconstruction_residual": run.reconstruction_residual,
        })))
    }
}

// ---------------------------------------------------------------- counts

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsArgs {
    /// Largest register size in the scan-count table, 1..=6 (qubits) [default: 5]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Largest ancilla size in the experiment-count grid (qubits) [default: 8]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla_max: Option<usize>,
}

impl Command for CountsArgs {
    const NAME: &'static str = "counts";

    fn defaults() -> Self {
        Self {
            n_max: Some(5),
            ancilla_max: Some(8),
        }
    }

    fn run(&self, _seed: u64) -> Result<Report, CliError> {
        let n_max = get(&self.n_max);
        let rows = count_table(n_max)?;
        let mut scans = CsvTable::new(
            "scan_counts",
            &["n", "m_qpt", "m_aapt", "aapt_ancilla", "m_sspt", "sspt_n_a", "sspt_n_b"],
        );
        for r in &rows {
            scans.push([r.n, r.m_qpt as usize, r.m_aapt as usize, r.aapt_ancilla, r.m_sspt as usize, r.sspt_ancilla_a, r.sspt_ancilla_b]);
        }
        let mut grid = CsvTable::new("min_experiments", &["n", "n_hat", "k"]);
        for n in 1..=n_max {
            for n_hat in 0..=get(&self.ancilla_max) {
                grid.push([n as u64, n_hat as u64, min_experiments(n, n_hat)]);
            }
        }
        Ok(Report {
            tables: vec![scans, grid],
            result: Value::Null,
            recipe: Some(
                "figure: minimum number of experiments\n\
                 data: min_experiments.csv\n\
                 x: n_hat (ancilla qubits), y: k (count, log scale), one series per n\n"
                    .into(),
            ),
        })
    }
}

// ---------------------------------------------------------------- noise

/// Hamiltonian and kick parameters shared by `noise` and `noise-spectrum`.
macro_rules! kick_fields {
    ($(#[$m:meta])* pub struct $name:ident { $($extra:tt)* }) => {
        $(#[$m])*
        pub struct $name {
            /// Kick rate Γ in kicks per ms [default: 25]
            #[arg(long)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub gamma: Option<f64>,
            /// Lower end of the kick-angle range, degrees [default: 0]
            #[arg(long, allow_negative_numbers = true)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub kick_lo: Option<f64>,
            /// Upper end of the kick-angle range, degrees [default: 1]
            #[arg(long, allow_negative_numbers = true)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub kick_hi: Option<f64>,
            /// Kick axis: x | y | random_transverse [default: x]
            #[arg(long)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub kick_axis: Option<String>,
            /// Kick timing: regular (every 1/Γ) | poisson [default: regular]
            #[arg(long)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub kick_timing: Option<String>,
            /// Total simulated time, ms [default: 100]
            #[arg(long)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub total_time: Option<f64>,
            /// Kick realizations averaged (count) [default: 200]
            #[arg(long)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub trajectories: Option<usize>,
            /// System resonance offset, Hz [default: 0]
            #[arg(long, allow_negative_numbers = true)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub nu_s: Option<f64>,
            /// Environment resonance offset, Hz [default: 0]
            #[arg(long, allow_negative_numbers = true)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub nu_e: Option<f64>,
            /// System-environment coupling J, Hz [default: 209.2]
            #[arg(long)]
            #[serde(skip_serializing_if = "Option::is_none")]
            pub j: Option<f64>,
            $($extra)*
        }

        impl $name {
            fn noise_config(&self, seed: u64) -> Result<NoiseConfig, CliError> {
                let cfg = NoiseConfig {
                    nu_s: get(&self.nu_s),
                    nu_e: get(&self.nu_e),
                    j: get(&self.j),
                    gamma: get(&self.gamma),
                    kick_range: [get(&self.kick_lo), get(&self.kick_hi)],
                    kick_axis: enum_value("kick_axis", &get(&self.kick_axis))?,
                    kick_timing: enum_value("kick_timing", &get(&self.kick_timing))?,
                    seed,
                    total_time: get(&self.total_time),
                    trajectories: get(&self.trajectories),
                };
                cfg.validate()?;
                Ok(cfg)
            }

            fn kick_defaults() -> Self {
                Self {
                    gamma: Some(25.0),
                    kick_lo: Some(0.0),
                    kick_hi: Some(1.0),
                    kick_axis: Some("x".into()),
                    kick_timing: Some("regular".into()),
                    total_time: Some(100.0),
                    trajectories: Some(200),
                    nu_s: Some(0.0),
                    nu_e: Some(0.0),
                    j: Some(ancilla_core::noise::DEFAULT_J_HZ),
                    ..Self::extra_defaults()
                }
            }
        }
    };
}

kick_fields! {
    #[derive(Args, Debug, Clone, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct NoiseArgs {
        /// Decoupling sequence on the system qubit: none | cpmg | udd [default: cpmg]
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        pub seq: Option<String>,
        /// π pulses per cycle (count) [default: 2]
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        pub n_pulses: Option<usize>,
        /// Cycle time t_c, ms; also the sampling interval [default: 6.4]
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        pub tc: Option<f64>,
        /// π pulse axis: x | y [default: x]
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        pub pulse_axis: Option<String>,
    }
}

impl NoiseArgs {
    fn extra_defaults() -> Self {
        Self {
            gamma: None,
            kick_lo: None,
            kick_hi: None,
            kick_axis: None,
            kick_timing: None,
            total_time: None,
            trajectories: None,
            nu_s: None,
            nu_e: None,
            j: None,
            seq: Some("cpmg".into()),
            n_pulses: Some(2),
            tc: Some(6.4),
            pulse_axis: Some("x".into()),
        }
    }
}

impl Command for NoiseArgs {
    const NAME: &'static str = "noise";

    fn defaults() -> Self {
        Self::kick_defaults()
    }

    fn run(&self, seed: u64) -> Result<Report, CliError> {
        let cfg = self.noise_config(seed)?;
        let kind: SequenceKind = enum_value("seq", &get(&self.seq))?;
        let seq = PulseSequence {
            kind,
            n_pulses: get(&self.n_pulses),
            cycle_time: get(&self.tc),
            pulse_axis: enum_value("pulse_axis", &get(&self.pulse_axis))?,
        };
        seq.validate()?;
        let rec = simulate_decay(&cfg, &seq)?;
        let mut table = CsvTable::new("decay", &["t", "Mx"]);
        for (t, m) in rec.times.iter().zip(&rec.mx) {
            table.push([t, m]);
        }
        Ok(Report {
            tables: vec![table],
            result: json!({
                "t2": rec.t2_fit.map(|f| f.t2),
                "rate": rec.t2_fit.map(|f| f.rate),
                "residual": rec.t2_fit.map(|f| f.residual),
                "fit_window_end": rec.t2_fit.map(|f| f.window_end),
            }),
            recipe: Some(
                "figure: transverse magnetization decay\n\
                 x: t (ms), column `t`\n\
                 y: log(Mx) (dimensionless), column `Mx` on a log axis\n\
                 overlay: line exp(-t / t2) using `t2` from result.json\n"
                    .into(),
            ),
        })
    }
}

kick_fields! {
    #[derive(Args, Debug, Clone, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct NoiseSpectrumArgs {
        /// Comma-separated CPMG pulse spacings τ, ms; ω = π/τ [default: 0.1,0.2,0.4,0.8,1.2,1.6,2.4,3.2]
        #[arg(long)]
        #[serde(skip_serializing_if = "Option::is_none")]
        pub tau_list: Option<String>,
    }
}

impl NoiseSpectrumArgs {
    fn extra_defaults() -> Self {
        Self {
            gamma: None,
            kick_lo: None,
            kick_hi: None,
            kick_axis: None,
            kick_timing: None,
            total_time: None,
            trajectories: None,
            nu_s: None,
            nu_e: None,
            j: None,
            tau_list: Some("0.1,0.2,0.4,0.8,1.2,1.6,2.4,3.2".into()),
        }
    }
}

impl Command for NoiseSpectrumArgs {
    const NAME: &'static str = "noise-spectrum";

    fn defaults() -> Self {
        Self::kick_defaults()
    }

    fn run(&self, seed: u64) -> Result<Report, CliError> {
        let cfg = self.noise_config(seed)?;
        let taus = parse::list(&get(&self.tau_list))?;
        let spec = noise_spectrum(&cfg, &taus)?;
        let mut table = CsvTable::new("spectrum", &["omega", "S"]);
        for (w, s) in spec.omegas.iter().zip(&spec.s_values) {
            table.push([w, s]);
        }
        Ok(Report {
            tables: vec![table],
            result: json!({
                "taus": spec.taus,
                "gaps": spec.gaps,
                "area": spec.area(),
            }),
            recipe: Some(
                "figure: noise spectral density\n\
                 x: omega (rad/ms), column `omega`\n\
                 y: S (1/ms), column `S`\n\
                 series: one run per kick range, plus a run with gamma = 0 as baseline\n"
                    .into(),
            ),
        })
    }
}
