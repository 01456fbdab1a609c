//! Property tests over random operators and matrices.

use lattice_landscape::landscape::{
    analyze, compare_series, green_direct, landscape_function, NeumannSeries, RegimePolicy,
    BOUND_TOLERANCE, DIRECT_RESIDUAL_TOLERANCE,
};
use lattice_landscape::linalg::{inf_norm, operator_norm, solve_linear, symmetric_eigen};
use lattice_landscape::structure::{
    block_permutation, build_offdiagonal, chebyshev_spectrum, conjugate_by_permutation,
    nearest_neighbor_blocks, predicted_block_sizes,
};
use lattice_landscape::{DenseMatrix, HoppingProfile, LatticeOperator, PotentialVector, Regime};
use proptest::prelude::*;

fn symmetric_matrix(max_n: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |raw| {
            DenseMatrix::from_fn(n, n, |i, j| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                raw[a * n + b]
            })
        })
    })
}

/// Random hopping with roughly a third of the amplitudes forced to zero.
fn hopping(max_n: usize) -> impl Strategy<Value = HoppingProfile> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![1 => Just(0.0), 2 => 0.0..1.0f64], n - 1)
            .prop_map(move |a| HoppingProfile::new(n, a).unwrap())
    })
}

fn strict_operator(max_n: usize) -> impl Strategy<Value = LatticeOperator> {
    hopping(max_n).prop_flat_map(|profile| {
        let n = profile.lattice_size();
        let hop = profile.hop_sum();
        prop::collection::vec(0.05..2.0f64, n).prop_map(move |margins| {
            let v = margins.iter().map(|m| hop + m).collect();
            LatticeOperator::assemble(PotentialVector::new(v).unwrap(), profile.clone()).unwrap()
        })
    })
}

fn soft_operator(max_n: usize) -> impl Strategy<Value = LatticeOperator> {
    hopping(max_n)
        .prop_filter("needs hopping", |p| p.has_hopping())
        .prop_map(|profile| {
            let v = vec![profile.hop_sum(); profile.lattice_size()];
            LatticeOperator::assemble(PotentialVector::new(v).unwrap(), profile).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solve_multiply_round_trip(
        m in symmetric_matrix(32),
        rhs_seed in prop::collection::vec(-10.0..10.0f64, 32),
    ) {
        let n = m.rows();
        // shift to make the system well conditioned
        let shift = DenseMatrix::identity(n).scale(5.0 * n as f64 + 1.0);
        let a = m.add(&shift).unwrap();
        let rhs = &rhs_seed[..n];
        let x = solve_linear(&a, rhs).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let resid: Vec<f64> = ax.iter().zip(rhs).map(|(p, q)| p - q).collect();
        prop_assert!(inf_norm(&resid) <= 1e-9 * (1.0 + inf_norm(rhs)));
    }

    #[test]
    fn eigen_reconstructs_and_is_orthonormal(m in symmetric_matrix(64)) {
        let n = m.rows();
        let eig = symmetric_eigen(&m).unwrap();
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let q = &eig.eigenvectors;
        let gram = q.transpose().matmul(q).unwrap();
        prop_assert!(gram.sub(&DenseMatrix::identity(n)).unwrap().max_abs() <= 1e-10);
        let err = eig.reconstruct().sub(&m).unwrap().max_abs();
        prop_assert!(err <= 1e-9 * (1.0 + m.max_abs()), "reconstruction error {err:e}");
    }

    #[test]
    fn operator_norm_is_submultiplicative(m in symmetric_matrix(24)) {
        let norm = operator_norm(&m).unwrap();
        let sq = operator_norm(&m.matmul(&m).unwrap()).unwrap();
        prop_assert!(sq <= norm * norm + 1e-8);
    }

    #[test]
    fn operator_norm_is_homogeneous(m in symmetric_matrix(24), c in -10.0..10.0f64) {
        let base = operator_norm(&m).unwrap();
        let scaled = operator_norm(&m.scale(c)).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-10 * (1.0 + c.abs() * base));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn landscape_equals_solve_of_ones(op in strict_operator(64)) {
        let green = green_direct(&op, RegimePolicy::Enforce).unwrap();
        prop_assert!(green.residual(&op).unwrap() <= DIRECT_RESIDUAL_TOLERANCE);
        let u = landscape_function(&green);
        let direct = solve_linear(op.h(), &vec![1.0; op.size()]).unwrap();
        let diff: Vec<f64> = u.iter().zip(&direct).map(|(a, b)| a - b).collect();
        prop_assert!(inf_norm(&diff) <= 1e-8);
    }

    #[test]
    fn strict_instances_satisfy_every_conclusion(op in strict_operator(48)) {
        prop_assert_eq!(op.regime(), Regime::Strict);
        let a = analyze(&op, RegimePolicy::Enforce).unwrap();
        prop_assert!(a.green.is_nonnegative());
        prop_assert!(a.report.u.iter().all(|&x| x > 0.0));
        prop_assert!(a.report.bound_ok);
        prop_assert!(a.report.min_margin() >= -BOUND_TOLERANCE);
        prop_assert!(a.report.min_eigenvalue() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn soft_boundary_instances_satisfy_every_conclusion(op in soft_operator(48)) {
        prop_assert_eq!(op.regime(), Regime::SoftBoundary);
        let a = analyze(&op, RegimePolicy::Enforce).unwrap();
        prop_assert!(a.green.is_nonnegative());
        prop_assert!(a.report.positivity_ok);
        prop_assert!(a.report.bound_ok);
        prop_assert!(a.report.min_eigenvalue() > 0.0);
    }

    #[test]
    fn series_within_certificate_and_monotone(op in strict_operator(32)) {
        let direct = green_direct(&op, RegimePolicy::Enforce).unwrap();
        let mut series = NeumannSeries::new(&op, RegimePolicy::Enforce).unwrap();
        prop_assert!(series.certificate().contraction_q < 1.0);
        let mut previous = series.partial_sum().clone();
        for k in 0..=30 {
            series.advance_to(k).unwrap();
            let cmp = compare_series(&series.certificate(), series.partial_sum(), &direct.g).unwrap();
            prop_assert!(cmp.ok, "K={k}: deviation {:e} bound {:e}", cmp.deviation, cmp.error_bound);
            let step = series.partial_sum().sub(&previous).unwrap();
            prop_assert!(step.min_entry() >= 0.0);
            previous = series.partial_sum().clone();
        }
    }

    #[test]
    fn bound_margins_ignore_eigenvector_scaling(op in strict_operator(16), c in 0.1..50.0f64) {
        let a = analyze(&op, RegimePolicy::Enforce).unwrap();
        let eig = &a.report.eigenpairs;
        for k in 0..eig.len() {
            let x = eig.eigenvector(k);
            let scaled: Vec<f64> = x.iter().map(|v| -c * v).collect();
            let m1 = lattice_landscape::landscape::bound_margin(eig.eigenvalues[k], &x, &a.report.u);
            let m2 = lattice_landscape::landscape::bound_margin(eig.eigenvalues[k], &scaled, &a.report.u);
            prop_assert!((m1 - m2).abs() <= 1e-12 * (1.0 + m1.abs()));
        }
    }
}

#[test]
fn block_structure_is_exact_up_to_32() {
    for n in 2..=32 {
        for j in 1..n {
            let a = build_offdiagonal(n, j).unwrap();
            let d = block_permutation(n, j).unwrap();
            assert_eq!(d.block_sizes, predicted_block_sizes(n, j));
            assert_eq!(d.block_sizes.iter().sum::<usize>(), n);
            let c = conjugate_by_permutation(&a, &d.permutation).unwrap();
            assert_eq!(c, nearest_neighbor_blocks(&d.block_sizes), "n={n} j={j}");
            let before = operator_norm(&a).unwrap();
            let after = operator_norm(&c).unwrap();
            assert!((before - after).abs() <= 1e-12, "n={n} j={j}");
        }
    }
}

#[test]
fn path_spectrum_matches_chebyshev_up_to_64() {
    for n in 1..=64 {
        let eig = symmetric_eigen(&build_offdiagonal(n, 1).unwrap()).unwrap();
        let closed = chebyshev_spectrum(n);
        for (got, want) in eig.eigenvalues.iter().zip(&closed) {
            assert!((got - want).abs() <= 1e-10, "n={n}: {got} vs {want}");
        }
        assert!(closed.iter().all(|l| l.abs() < 2.0));
    }
}
