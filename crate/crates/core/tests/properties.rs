use faer::Mat;
use proptest::prelude::*;
use quench_core::ansatz::{init_near_uniform, Ansatz, Network, Shape};
use quench_core::estimators::build_x_matrix;
use quench_core::oracle::{integrate_series, nnqs_to_dense, ratio_and_phase, state_infidelity};
use quench_core::sampling::full_summation;
use quench_core::solvers::{kfac_partition_from_layers, restrict_rows, solve_direct, solve_minsr};
use quench_core::spin::{basis_index, spins_from_index};
use quench_core::{c64, TiltedIsing, TrotterSchedule};

fn complex_matrix(rows: usize, cols: usize, vals: &[(f64, f64)]) -> Mat<c64> {
    Mat::from_fn(rows, cols, |i, j| {
        let (re, im) = vals[(i * cols + j) % vals.len()];
        c64::new(re + 0.1 * (i as f64).sin(), im + 0.1 * (j as f64).cos())
    })
}

fn shape_strategy() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (2usize..6, 1usize..3).prop_map(|(l, a)| Shape::rbm(l, a)),
        (2usize..6, 1usize..8).prop_map(|(l, h)| Shape::Fnn { layers: vec![l, h, 1] }),
        (2usize..5, 1usize..6, 1usize..4).prop_map(|(l, h, g)| Shape::Fnn { layers: vec![l, h, g, 1] }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn basis_index_round_trips(sites in 1usize..16, raw in any::<u64>()) {
        let idx = (raw as usize) & ((1 << sites) - 1);
        let mut spins = vec![0i8; sites];
        spins_from_index(idx, &mut spins);
        prop_assert!(spins.iter().all(|&s| s == 1 || s == -1));
        prop_assert_eq!(basis_index(&spins), idx);
    }

    #[test]
    fn flat_parameters_round_trip(shape in shape_strategy(), seed in any::<u64>()) {
        let net = init_near_uniform(&shape, 0.2, seed).unwrap();
        prop_assert_eq!(net.n_params(), shape.n_params());
        let again = Network::from_flat(&shape, net.params().to_vec()).unwrap();
        prop_assert_eq!(again.params(), net.params());
        let x = vec![1i8; shape.sites()];
        prop_assert_eq!(again.log_amplitude(&x), net.log_amplitude(&x));
    }

    #[test]
    fn dense_states_are_normalized(shape in shape_strategy(), seed in any::<u64>()) {
        let net = init_near_uniform(&shape, 0.3, seed).unwrap();
        let d = nnqs_to_dense(&net).unwrap();
        prop_assert!((d.norm() - 1.0).abs() < 1e-12);
        let w = full_summation(&net).unwrap();
        prop_assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_tensor_is_hermitian_psd(shape in shape_strategy(), seed in any::<u64>()) {
        let net = init_near_uniform(&shape, 0.3, seed).unwrap();
        let set = full_summation(&net).unwrap();
        let s = build_x_matrix(&set, &net).unwrap().geometric_tensor();
        let n = s.nrows();
        for i in 0..n {
            prop_assert!(s[(i, i)].re >= -1e-14);
            for j in 0..n {
                prop_assert!((s[(i, j)] - s[(j, i)].conj()).norm() < 1e-13);
            }
        }
        let eig = s.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let top = (0..n).map(|k| eig.S()[k].re.abs()).fold(0.0, f64::max);
        prop_assert!((0..n).all(|k| eig.S()[k].re >= -1e-12 * top.max(1.0)));
    }

    #[test]
    fn minsr_equals_direct(
        np in 2usize..40,
        ns in 2usize..20,
        vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..64),
        fv in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 20),
        shift in 1e-4f64..1.0,
    ) {
        let x = complex_matrix(np, ns, &vals);
        let f: Vec<c64> = (0..ns).map(|k| c64::new(fv[k].0, fv[k].1)).collect();
        let (a, _) = solve_direct(x.as_ref(), &f, shift).unwrap();
        let (b, _) = solve_minsr(x.as_ref(), &f, shift).unwrap();
        let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        let diff = a.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(diff / scale < 1e-8, "relative error {}", diff / scale);
    }

    #[test]
    fn larger_shift_shrinks_update(
        vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..64),
        fv in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12),
        small in 1e-4f64..1e-1,
        factor in 2.0f64..100.0,
    ) {
        let x = complex_matrix(20, 12, &vals);
        let f: Vec<c64> = fv.iter().map(|&(a, b)| c64::new(a, b)).collect();
        let norm = |shift: f64| {
            let (d, _) = solve_minsr(x.as_ref(), &f, shift).unwrap();
            d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        };
        prop_assert!(norm(small * factor) <= norm(small) * (1.0 + 1e-10));
    }

    #[test]
    fn kfac_blocks_are_principal_submatrices(h in 2usize..8, g in 1usize..5, split in 1usize..3, seed in any::<u64>()) {
        let shape = Shape::Fnn { layers: vec![4, h, g, 1] };
        let split = split.min(h);
        let partition = kfac_partition_from_layers(&shape, &[split, 1, 1]).unwrap();
        let net = init_near_uniform(&shape, 0.3, seed).unwrap();
        let set = full_summation(&net).unwrap();
        let x = build_x_matrix(&set, &net).unwrap();
        let s = x.geometric_tensor();
        let mut covered = 0;
        for b in partition.blocks() {
            let xb = restrict_rows(x.as_ref(), &b.indices);
            let sb = &xb * xb.adjoint();
            for (p, &i) in b.indices.iter().enumerate() {
                for (q, &j) in b.indices.iter().enumerate() {
                    prop_assert!((sb[(p, q)] - s[(i, j)]).norm() <= 1e-12);
                }
            }
            covered += b.indices.len();
        }
        prop_assert_eq!(covered, shape.n_params());
    }

    #[test]
    fn infidelity_is_phase_invariant(shape in shape_strategy(), seed in any::<u64>(), phase in 0.0f64..6.28) {
        let net = init_near_uniform(&shape, 0.3, seed).unwrap();
        let d = nnqs_to_dense(&net).unwrap();
        let rotated: Vec<c64> = d.amplitudes().iter().map(|a| a * c64::from_polar(2.0, phase)).collect();
        let v = state_infidelity(d.amplitudes(), &rotated);
        prop_assert!(v.abs() < 1e-13);
    }

    #[test]
    fn phase_distance_is_bounded(a in (-5.0f64..5.0, -20.0f64..20.0), b in (-5.0f64..5.0, -20.0f64..20.0)) {
        let (ratio, dist) = ratio_and_phase(c64::new(a.0, a.1), c64::new(b.0, b.1));
        prop_assert!(ratio > 0.0);
        prop_assert!((0.0..=std::f64::consts::PI + 1e-12).contains(&dist));
    }

    #[test]
    fn integral_of_nonnegative_series_is_monotone(v in prop::collection::vec(0.0f64..1.0, 1..50), dt in 1e-3f64..1.0) {
        let out = integrate_series(&v, dt);
        prop_assert_eq!(out.len(), v.len());
        prop_assert_eq!(out[0], 0.0);
        prop_assert!(out.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn schedule_touches_every_bond(sites in 2usize..14, span in 2usize..7) {
        let model = TiltedIsing::new(sites, 1.0, 0.5, 0.5).unwrap();
        let span = span.min(sites);
        let schedule = TrotterSchedule::new(&model, span, 0.1).unwrap();
        prop_assert!(schedule.bond_coverage(model.bonds()).iter().all(|&c| c > 0.0));
    }
}
