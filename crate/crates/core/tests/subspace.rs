mod common;

use proptest::prelude::*;

use common::subspace_case;
use sparseq::linalg::SparseColumnMatrix;
use sparseq::subspace::{full_objective, full_psi_gradient};
use sparseq::{LossKind, LossModel, Problem, SubspaceView};

fn kind(flag: bool) -> LossKind {
    if flag {
        LossKind::Logistic
    } else {
        LossKind::LeastSquares
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subspace_value_equals_full_objective(seed in any::<u64>(), s in 1usize..15, logistic in any::<bool>()) {
        let case = subspace_case(seed, kind(logistic), 20, s, 6);
        let view = case.view();
        let fs = view.value(&case.problem).unwrap();
        let f = full_objective(&case.x, &case.problem).unwrap();
        prop_assert_eq!(fs.to_bits(), f.to_bits());
    }

    #[test]
    fn subspace_gradient_restricts_full_gradient(seed in any::<u64>(), s in 1usize..15, logistic in any::<bool>()) {
        let case = subspace_case(seed, kind(logistic), 20, s, 6);
        let view = case.view();
        let g = view.gradient(&case.problem).unwrap();
        let psi = full_psi_gradient(&case.x, &case.problem).unwrap();
        let (lam, q) = (case.problem.lam(), case.problem.q());
        for (k, &i) in view.support().indices().iter().enumerate() {
            let x = case.x[i];
            let expected = psi[i] + lam * q * x.abs().powf(q - 1.0) * x.signum();
            prop_assert!((g[k] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn hessian_apply_matches_dense(seed in any::<u64>(), s in 1usize..40, logistic in any::<bool>()) {
        let case = subspace_case(seed, kind(logistic), 25, s, 3);
        let view = case.view();
        let h = view.hessian_dense(&case.problem).unwrap();
        let w: Vec<f64> = (0..s).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let dense = h.mul_vec(&w);
        let applied = view.hessian_apply(&case.problem, &w).unwrap();
        let scale = common::max_abs(&dense).max(1.0);
        prop_assert!(common::max_abs_diff(&dense, &applied) <= 1e-12 * scale);
    }
}

#[test]
fn off_support_columns_are_never_consulted() {
    let case = subspace_case(77, LossKind::LeastSquares, 15, 4, 6);
    let view = case.view();
    let support = view.support().indices().to_vec();
    let a = case.problem.matrix();
    let mut dense = a.to_dense();
    let n = a.cols();
    for i in 0..a.rows() {
        for j in 0..n {
            if !support.contains(&j) {
                dense[i * n + j] = 1e6;
            }
        }
    }
    let altered = Problem::new(
        SparseColumnMatrix::from_dense(a.rows(), n, &dense).unwrap(),
        LossModel::new(
            LossKind::LeastSquares,
            case.problem.loss().targets().unwrap().to_vec(),
        )
        .unwrap(),
        case.problem.lam(),
        case.problem.q(),
    )
    .unwrap();
    let altered_view = SubspaceView::at(&case.x, &altered).unwrap();
    assert_eq!(
        view.value(&case.problem).unwrap(),
        altered_view.value(&altered).unwrap()
    );
    assert_eq!(
        view.gradient(&case.problem).unwrap(),
        altered_view.gradient(&altered).unwrap()
    );
    assert_eq!(
        view.hessian_dense(&case.problem).unwrap(),
        altered_view.hessian_dense(&altered).unwrap()
    );
}
