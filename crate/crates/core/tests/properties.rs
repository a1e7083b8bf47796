use proptest::prelude::*;
use quatlearn::harness::{generate_instance, trial_rng};
use quatlearn::learner::{cost, sgd_step, CircuitWeights, Metric};
use quatlearn::measurement::{canonical_panel, reconstruct_register, register_functionals};
use quatlearn::quat::{
    augment, deaugment, gate_to_involution, real_contraction, real_expansion, rotate,
    rotation_to_augmented_matrix, Involution, QuatMatrix, QuatVector, Quaternion,
};
use quatlearn::qubit::{
    decode_distribution, encode_distribution, HypothesisEncoding, QubitRegister, QubitState,
};

fn quaternion() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-10.0..10.0f64).prop_map(Quaternion::from_array)
}

fn unit_pure() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|[a, b, c]| {
            let n = (a * a + b * b + c * c).sqrt();
            Quaternion::pure(a / n, b / n, c / n)
        })
}

fn register(max_m: usize) -> impl Strategy<Value = QubitRegister> {
    prop::collection::vec(unit_pure(), 1..=max_m).prop_map(|qs| {
        let states: Vec<QubitState> = qs
            .into_iter()
            .map(|q| QubitState::new(q).unwrap())
            .collect();
        QubitRegister::from_qubits(&states).unwrap()
    })
}

fn orthant_register(max_m: usize) -> impl Strategy<Value = QubitRegister> {
    prop::collection::vec(unit_pure(), 1..=max_m).prop_map(|qs| {
        let states: Vec<QubitState> = qs
            .into_iter()
            .map(|q| QubitState::new(Quaternion::pure(q.i.abs(), q.j.abs(), q.k.abs())).unwrap())
            .collect();
        QubitRegister::from_qubits(&states).unwrap()
    })
}

fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn product_norm_is_multiplicative(p in quaternion(), q in quaternion()) {
        prop_assert!(((p * q).norm() - p.norm() * q.norm()).abs() <= 1e-12 * (1.0 + p.norm() * q.norm()));
    }

    #[test]
    fn conjugate_reverses_products(p in quaternion(), q in quaternion()) {
        prop_assert!(close((p * q).conj(), q.conj() * p.conj(), 1e-14));
    }

    #[test]
    fn involutions_compose_like_klein_group(q in quaternion()) {
        let (i, j, k) = (Involution::I, Involution::J, Involution::K);
        prop_assert_eq!(q.involute(i).involute(j), q.involute(k));
        prop_assert_eq!(q.involute(j).involute(k), q.involute(i));
        prop_assert_eq!(q.involute(k).involute(k), q);
    }

    #[test]
    fn rotation_preserves_norm_and_inverts(q in unit_pure(), axis in unit_pure(), angle in -10.0..10.0f64) {
        let r = rotate(q, axis, angle).unwrap();
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
        prop_assert!(close(rotate(r, axis, -angle).unwrap(), q, 1e-12));
        // Axis component is invariant.
        prop_assert!((r.dot(axis) - q.dot(axis)).abs() < 1e-12);
    }

    #[test]
    fn gate_maps_input_to_output(a in unit_pure(), b in unit_pure()) {
        prop_assume!((a + b).norm() > 1e-3);
        let gate = gate_to_involution(a, b).unwrap();
        prop_assert!(close(rotate(a, gate.axis, gate.angle).unwrap(), b, 1e-9));
    }

    #[test]
    fn augmented_rotation_matches_sandwich(q in quaternion(), axis in unit_pure(), angle in -7.0..7.0f64) {
        let z = rotation_to_augmented_matrix(axis, angle).unwrap();
        let out = z.mul_vec(augment(&QuatVector(vec![q])).blocks()).unwrap();
        let xi = Quaternion::real((0.5 * angle).cos()) + axis.scale((0.5 * angle).sin());
        let expected = augment(&QuatVector(vec![xi * q * xi.conj()]));
        prop_assert!(out.max_abs_diff(expected.blocks()) < 1e-11);
    }

    #[test]
    fn real_expansion_is_a_bijection(v in prop::collection::vec(quaternion(), 1..8)) {
        let v = QuatVector(v);
        let r = real_expansion(&v);
        prop_assert!(real_contraction(&r).unwrap().max_abs_diff(&v) < 1e-12);
        prop_assert_eq!(deaugment(augment(&v).blocks()).unwrap(), v);
    }

    #[test]
    fn panel_functionals_sum_to_four(reg in register(6)) {
        let panel = canonical_panel(reg.m()).unwrap();
        let d = register_functionals(&panel, &reg).unwrap();
        prop_assert!((d.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        prop_assert!(d.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn orthant_registers_reconstruct(reg in orthant_register(6)) {
        let panel = canonical_panel(reg.m()).unwrap();
        let d = register_functionals(&panel, &reg).unwrap();
        let back = reconstruct_register(&panel, &d, 1e-9).unwrap();
        prop_assert!(back.vector().max_abs_diff(reg.vector()) < 1e-12);
    }

    #[test]
    fn per_qubit_encoding_round_trips(p in prop::collection::vec(0.0..=1.0f64, 1..10)) {
        let enc = HypothesisEncoding::per_qubit(p.len()).unwrap();
        let back = decode_distribution(&encode_distribution(&p, &enc).unwrap(), &enc).unwrap();
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bitwise_encoding_keeps_marginals(raw in (1u32..5).prop_flat_map(|b| prop::collection::vec(0.01..1.0f64, 1usize << b))) {
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let enc = HypothesisEncoding::bitwise(p.len()).unwrap();
        let back = decode_distribution(&encode_distribution(&p, &enc).unwrap(), &enc).unwrap();
        for b in 0..enc.m() {
            let marginal = |q: &[f64]| q.iter().enumerate().filter(|(h, _)| h >> b & 1 == 1).map(|(_, v)| v).sum::<f64>();
            prop_assert!((marginal(&p) - marginal(&back)).abs() < 1e-10);
        }
        prop_assert!((back.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cost_is_zero_at_the_analytic_inverse(seed in any::<u64>(), m in 1usize..4) {
        let inst = generate_instance(m, 4, &mut trial_rng(seed, 0)).unwrap();
        for metric in [Metric::SqrtDiff, Metric::SquaredDiff] {
            prop_assert!(cost(&inst.w_inverse, &inst.dataset, &inst.panel, metric).unwrap() < 1e-24);
        }
    }

    #[test]
    fn ground_truth_is_an_augmented_isometry(seed in any::<u64>(), m in 1usize..5) {
        let inst = generate_instance(m, 1, &mut trial_rng(seed, 1)).unwrap();
        let w = inst.w_true.matrix();
        let gram = w.hermitian().matmul(w).unwrap();
        prop_assert!(gram.max_abs_diff(&QuatMatrix::identity(4 * m)) < 1e-12);
    }

    #[test]
    fn sgd_steps_add_linearly(seed in any::<u64>(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let inst = generate_instance(1, 1, &mut trial_rng(seed, 2)).unwrap();
        let g = inst.w_true.matrix();
        let w = CircuitWeights::identity(1);
        let two = sgd_step(&sgd_step(&w, g, a).unwrap(), g, b).unwrap();
        let one = sgd_step(&w, g, a + b).unwrap();
        prop_assert!(two.matrix().max_abs_diff(one.matrix()) < 1e-14);
    }
}
