use std::f64::consts::{PI, SQRT_2};

use ancilla_core::circuits::{anti_cnot, cnot, compile, Circuit, Gate};
use ancilla_core::expectation::{expect_projector, expect_unitary, joint_expect};
use ancilla_core::noise::{simulate_decay, trajectory, NoiseConfig, PulseSequence, SequenceKind};
use ancilla_core::noninvasive::{
    deficit_closed_form, elgi_deficit, joint_probabilities, ElgiConfig, Method,
};
use ancilla_core::oscillator::{
    contextuality_i, fcf, ContextualityObservables, FcfRoute, TruncatedOscillator,
};
use ancilla_core::qcore::{
    c, evolve, expm, max_abs_diff, partial_trace, random_density, random_unitary_with, tensor,
    trace_product, unitarity_defect, ComplexMatrix, DensityMatrix, HermitianObservable, StateKind,
    UnitaryMatrix, C64,
};
use ancilla_core::readout::{diagonal_populations, spectrum};
use ancilla_core::tomography::aaqst::{acquire, build_plan, reconstruct};
use ancilla_core::tomography::process::{sspt, ProcessMap, SsptConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_hermitian(dim: usize, scale: f64, r: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        c(StandardNormal.sample(&mut *r), StandardNormal.sample(&mut *r))
    });
    let h = (&g + g.adjoint()) * c(0.5, 0.0);
    let norm = h.norm();
    h * c(scale / norm, 0.0)
}

fn random_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(StandardNormal.sample(&mut *r), StandardNormal.sample(&mut *r))
    })
}

fn traceless(m: &ComplexMatrix) -> ComplexMatrix {
    let d = m.nrows();
    m - ComplexMatrix::identity(d, d) * (m.trace() / c(d as f64, 0.0))
}

fn qubits() -> impl Strategy<Value = usize> {
    1usize..=3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_preserves_trace(seed: u64, n in qubits()) {
        let mut r = rng(seed);
        let d = 1 << n;
        let rho = random_density(d, &mut r);
        let u = random_unitary_with(d, &mut r);
        let out = evolve(&rho, &u).unwrap();
        prop_assert!((out.trace() - rho.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_undoes_tensor(seed: u64, na in 1usize..=2, nb in 1usize..=2) {
        let mut r = rng(seed);
        let a = random_density(1 << na, &mut r);
        let b = random_density(1 << nb, &mut r);
        let joint = DensityMatrix::new(tensor(a.matrix(), b.matrix()), StateKind::Normalized).unwrap();
        let keep: Vec<usize> = (0..na).collect();
        let back = partial_trace(&joint, &keep).unwrap();
        prop_assert!(max_abs_diff(back.matrix(), a.matrix()) < 1e-12);
    }

    #[test]
    fn expm_inverse(seed: u64, n in qubits(), scale in 1e-3f64..1e3, t in -1.0f64..1.0) {
        let mut r = rng(seed);
        let d = 1 << n;
        let h = random_hermitian(d, scale, &mut r);
        let prod = expm(&h, c(0.0, -t)) * expm(&h, c(0.0, t));
        prop_assert!(max_abs_diff(&prod, &ComplexMatrix::identity(d, d)) < 1e-10);
    }

    #[test]
    fn tensor_is_associative(seed: u64) {
        let mut r = rng(seed);
        let a = random_matrix(2, 2, &mut r);
        let b = random_matrix(2, 3, &mut r);
        let cc = random_matrix(3, 2, &mut r);
        let left = tensor(&tensor(&a, &b), &cc);
        let right = tensor(&a, &tensor(&b, &cc));
        prop_assert!(max_abs_diff(&left, &right) < 1e-13);
    }

    #[test]
    fn compile_composes_and_stays_unitary(seed: u64, angles in proptest::collection::vec(-PI..PI, 1..6)) {
        let mut r = rng(seed);
        let n = 3;
        let mut first = Circuit::new(n);
        for (i, &a) in angles.iter().enumerate() {
            first.push(Gate::RotY { target: i % n, angle: a });
            first.push(Gate::Cnot { control: i % n, target: (i + 1) % n });
        }
        let second = Circuit::new(n)
            .with(Gate::RawUnitary { targets: vec![2, 0], u: random_unitary_with(4, &mut r) })
            .with(Gate::AntiCnot { control: 1, target: 0 })
            .with(Gate::Hadamard { target: 2 });
        let u1 = compile(&first).unwrap();
        let u2 = compile(&second).unwrap();
        let both = compile(&first.then(&second).unwrap()).unwrap();
        prop_assert!(max_abs_diff(both.matrix(), &(u2.matrix() * u1.matrix())) < 1e-12);
        prop_assert!(unitarity_defect(both.matrix()) < 1e-10);
    }

    #[test]
    fn spectrum_is_linear(seed: u64, n in qubits(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let mut r = rng(seed);
        let d = 1 << n;
        let a = random_density(d, &mut r);
        let b = random_density(d, &mut r);
        let combo = a.matrix() * c(alpha, 0.0) + b.matrix() * c(beta, 0.0);
        let combo = DensityMatrix::new(traceless(&combo), StateKind::Deviation).unwrap();
        let dev_a = a.deviation();
        let dev_b = b.deviation();
        let sa = spectrum(&dev_a).unwrap().real_vector();
        let sb = spectrum(&dev_b).unwrap().real_vector();
        let sc = spectrum(&combo).unwrap().real_vector();
        for i in 0..sc.len() {
            prop_assert!((sc[i] - alpha * sa[i] - beta * sb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_ancilla_is_spectrally_silent(seed: u64, n in 1usize..=2, n_hat in 1usize..=2) {
        let mut r = rng(seed);
        let rho = random_density(1 << n, &mut r);
        let anc = DensityMatrix::maximally_mixed(1 << n_hat);
        let joint = DensityMatrix::new(tensor(rho.matrix(), anc.matrix()), StateKind::Normalized).unwrap();
        let rec = spectrum(&joint).unwrap();
        let base = spectrum(&rho).unwrap();
        let nh = (1usize << n_hat) as f64;
        let n_tot = n + n_hat;
        for q in n..n_tot {
            for b in 0..1usize << (n_tot - 1) {
                prop_assert!(rec.amplitude(q, b).norm() < 1e-12);
            }
        }
        // ancilla bits are the low bits of `other_bits` for input qubits
        for q in 0..n {
            for b in 0..1usize << (n - 1) {
                let summed: C64 = (0..1usize << n_hat).map(|a| rec.amplitude(q, (b << n_hat) | a)).sum();
                prop_assert!((summed - base.amplitude(q, b)).norm() < 1e-12);
                prop_assert!((rec.amplitude(q, b << n_hat) * nh - base.amplitude(q, b)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn populations_sum_to_trace(seed: u64, n in qubits()) {
        let rho = random_density(1 << n, &mut rng(seed));
        let total: f64 = diagonal_populations(&rho).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn joint_methods_agree(seed: u64, theta in 0.0f64..PI) {
        let mut r = rng(seed);
        let rho = random_density(2, &mut r);
        let u = UnitaryMatrix::new(ancilla_core::circuits::rot_x(theta)).unwrap();
        let tables: Vec<_> = Method::ALL.iter()
            .map(|&m| joint_probabilities(&rho, &u, m).unwrap())
            .collect();
        for t in &tables[1..] {
            for q1 in 0..2 {
                for q2 in 0..2 {
                    prop_assert!((t.p[q1][q2] - tables[0].p[q1][q2]).abs() < 1e-12);
                }
            }
        }
        let marg = tables[0].first_marginal();
        prop_assert!((marg[0] - rho.matrix()[(0, 0)].re).abs() < 1e-12);
        prop_assert!((marg[1] - rho.matrix()[(1, 1)].re).abs() < 1e-12);
    }

    #[test]
    fn deficit_is_bounded_and_matches_closed_form(n in 2usize..=6, theta in 0.0f64..=PI) {
        let d = elgi_deficit(&ElgiConfig::new(n, theta), Method::Cnot).unwrap();
        prop_assert!(d >= -1.0 - 1e-12);
        prop_assert!((d - deficit_closed_form(n, theta)).abs() < 1e-10);
    }

    #[test]
    fn moussa_matches_direct_trace(seed: u64, n in qubits()) {
        let mut r = rng(seed);
        let d = 1 << n;
        let rho = random_density(d, &mut r);
        let u = random_unitary_with(d, &mut r);
        let v = random_unitary_with(d, &mut r);
        let single = expect_unitary(&rho, &u).unwrap().value;
        prop_assert!((single - trace_product(rho.matrix(), u.matrix()).unwrap()).norm() < 1e-12);
        let joint = joint_expect(&rho, &u, &v).unwrap().value;
        let oracle = trace_product(rho.matrix(), &(v.matrix() * u.matrix())).unwrap();
        prop_assert!((joint - oracle).norm() < 1e-12);
    }

    #[test]
    fn commuting_hermitian_pair_is_real(seed: u64, n in 1usize..=2) {
        let mut r = rng(seed);
        let d = 1 << n;
        // Hermitian unitaries sharing an eigenbasis
        let w = random_unitary_with(d, &mut r);
        let signs = |r: &mut ChaCha8Rng| {
            let s: Vec<C64> = (0..d).map(|_| if rand::Rng::random::<bool>(r) { c(1.0, 0.0) } else { c(-1.0, 0.0) }).collect();
            let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(s));
            UnitaryMatrix::new(w.matrix() * diag * w.matrix().adjoint()).unwrap()
        };
        let a = signs(&mut r);
        let b = signs(&mut r);
        let rho = random_density(d, &mut r);
        prop_assert!(joint_expect(&rho, &a, &b).unwrap().value.im.abs() < 1e-10);
    }

    #[test]
    fn projectors_are_probabilities(seed: u64, n in qubits()) {
        let mut r = rng(seed);
        let d = 1 << n;
        let rho = random_density(d, &mut r);
        let basis = random_unitary_with(d, &mut r);
        let mut total = 0.0;
        for k in 0..d {
            let col = basis.matrix().column(k).into_owned();
            let p = HermitianObservable::new(&col * col.adjoint()).unwrap();
            let v = expect_projector(&rho, &p).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&v));
            total += v;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contextuality_bound(level in 0usize..4, beta in -PI..PI, eta in -PI..PI) {
        let v = contextuality_i(level, beta, eta).unwrap();
        prop_assert!(v.abs() <= 2.0 * SQRT_2 + 1e-9);
    }

    #[test]
    fn compatible_pairs_commute(beta in -PI..PI, eta in -PI..PI) {
        let obs = ContextualityObservables::new(beta, eta).unwrap();
        for (x, y) in obs.pairs() {
            let comm = x.matrix() * y.matrix() - y.matrix() * x.matrix();
            prop_assert!(comm.iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn fcf_routes_agree(m in 0usize..4, n in 0usize..4, step in 0usize..=12) {
        let osc = TruncatedOscillator::new(4).unwrap();
        let b = step as f64 * 0.25;
        let circ = fcf(&osc, m, n, b, FcfRoute::Circuit).unwrap();
        let direct = fcf(&osc, m, n, b, FcfRoute::Direct).unwrap();
        prop_assert!((circ - direct).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn aaqst_round_trip_on_deviations(seed: u64, size in 0usize..3) {
        let (n, n_hat) = [(1, 1), (2, 2), (3, 2)][size];
        let d = 1 << n;
        let mut r = rng(seed);
        let dev = DensityMatrix::new(traceless(&random_hermitian(d, 0.5, &mut r)), StateKind::Deviation).unwrap();
        let plan = build_plan(n, n_hat, seed, 4).unwrap();
        let records = acquire(&plan, &dev, 0.0, 0).unwrap();
        let rec = reconstruct(&plan, &records, StateKind::Deviation).unwrap();
        prop_assert!(max_abs_diff(&rec.matrix, dev.matrix()) < 1e-8);
    }

    #[test]
    fn noise_trajectories_conserve_norm(seed: u64, gamma in 0.0f64..50.0, width in 0.0f64..45.0) {
        let cfg = NoiseConfig {
            gamma,
            kick_range: [-width, width],
            seed,
            total_time: 20.0,
            trajectories: 4,
            ..NoiseConfig::default()
        };
        let seq = PulseSequence::new(SequenceKind::Udd, 3, 2.5);
        for i in 0..4 {
            prop_assert!(trajectory(&cfg, &seq, i).unwrap().norm_defect < 1e-12);
        }
        let a = simulate_decay(&cfg, &seq).unwrap();
        prop_assert_eq!(&a, &simulate_decay(&cfg, &seq).unwrap());
        prop_assert!((a.mx[0] - 1.0).abs() < 1e-9);
        prop_assert!(a.mx.iter().all(|m| m.abs() <= 1.0 + 1e-9));
    }

    #[test]
    fn gates_self_inverse(control in 0usize..3, offset in 1usize..3) {
        let target = (control + offset) % 3;
        for g in [cnot(control, target, 3).unwrap(), anti_cnot(control, target, 3).unwrap()] {
            let sq = g.matrix() * g.matrix();
            prop_assert_eq!(sq, ComplexMatrix::identity(8, 8));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn sspt_reproduces_unitary_action(seed: u64, n in 1usize..=2) {
        let d = 1 << n;
        let u = random_unitary_with(d, &mut rng(seed));
        let run = sspt(&ProcessMap::Unitary(u.clone()), &SsptConfig::for_qubits(n, seed)).unwrap();
        prop_assert!(run.chi.min_eigenvalue() > -1e-8);
        prop_assert!(run.chi.trace_preservation_defect() < 1e-8);
        for i in 0..d {
            for l in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(i, l)] = c(1.0, 0.0);
                let want = u.matrix() * &e * u.matrix().adjoint();
                prop_assert!(max_abs_diff(&run.chi.apply(&e), &want) < 1e-7);
            }
        }
    }
}
