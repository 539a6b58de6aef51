use approx::assert_abs_diff_eq;
use conic::{svec, ConeDims, ConeProblem, Settings, Status};
use nalgebra::{DMatrix, DVector};

fn no_equalities(n: usize) -> (DMatrix<f64>, DVector<f64>) {
    (DMatrix::zeros(0, n), DVector::zeros(0))
}

#[test]
fn linear_program() {
    // min -x1 - 2 x2  s.t. x1 + x2 <= 4, x1 <= 3, x >= 0  ->  x = (0, 4), value -8
    let (a, b) = no_equalities(2);
    let g = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, 0.0, -1.0, 0.0, 0.0, -1.0]);
    let h = DVector::from_vec(vec![4.0, 3.0, 0.0, 0.0]);
    let pb = ConeProblem { c: DVector::from_vec(vec![-1.0, -2.0]), a, b, g, h, cones: ConeDims::new(4, vec![]) };
    let sol = pb.solve(&Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert_abs_diff_eq!(sol.primal_objective, -8.0, epsilon = 1e-7);
    assert_abs_diff_eq!(sol.x[1], 4.0, epsilon = 1e-6);
}

#[test]
fn lp_with_equality() {
    // min x1 + x2 + x3 s.t. x1 + 2x2 + 3x3 = 6, x >= 0  ->  value 2 at (0,0,2)
    let a = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
    let b = DVector::from_vec(vec![6.0]);
    let g = -DMatrix::identity(3, 3);
    let pb = ConeProblem { c: DVector::from_element(3, 1.0), a, b, g, h: DVector::zeros(3), cones: ConeDims::new(3, vec![]) };
    let sol = pb.solve(&Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert_abs_diff_eq!(sol.primal_objective, 2.0, epsilon = 1e-7);
}

#[test]
fn max_eigenvalue_sdp() {
    // min t s.t. t I - M >= 0; optimum is the largest eigenvalue of M
    let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
    let lmax = m.clone().symmetric_eigen().eigenvalues.max();
    let (a, b) = no_equalities(1);
    let g = DMatrix::from_column_slice(6, 1, (-svec(&DMatrix::identity(3, 3))).as_slice());
    let h = -svec(&m);
    let pb = ConeProblem { c: DVector::from_vec(vec![1.0]), a, b, g, h, cones: ConeDims::new(0, vec![3]) };
    let sol = pb.solve(&Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert_abs_diff_eq!(sol.x[0], lmax, epsilon = 1e-7);
}

#[test]
fn sdp_without_strict_interior() {
    // min -y s.t. [[1, y], [y, 0]] >= 0 forces y = 0; no strictly feasible point
    let (a, b) = no_equalities(1);
    let mut f1 = DMatrix::zeros(2, 2);
    f1[(0, 1)] = 1.0;
    f1[(1, 0)] = 1.0;
    let g = DMatrix::from_column_slice(3, 1, (-svec(&f1)).as_slice());
    let h = svec(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    let pb = ConeProblem { c: DVector::from_vec(vec![-1.0]), a, b, g, h, cones: ConeDims::new(0, vec![2]) };
    let sol = pb.solve(&Settings::with_tolerance(1e-7)).unwrap();
    assert!(matches!(sol.status, Status::Optimal | Status::MaxIterations), "{:?}", sol.status);
    assert_abs_diff_eq!(sol.x[0], 0.0, epsilon = 1e-3);
}

#[test]
fn mixed_cones_with_equalities() {
    // min tr(C X) s.t. tr(X) = 1, X psd  -> smallest eigenvalue of C
    let cm = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.0, 0.5, 0.0, 2.0]);
    let lmin = cm.clone().symmetric_eigen().eigenvalues.min();
    let c = svec(&cm);
    let a = DMatrix::from_row_slice(1, 6, svec(&DMatrix::identity(3, 3)).as_slice());
    let b = DVector::from_vec(vec![1.0]);
    let g = -DMatrix::identity(6, 6);
    let pb = ConeProblem { c, a, b, g, h: DVector::zeros(6), cones: ConeDims::new(0, vec![3]) };
    let sol = pb.solve(&Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert_abs_diff_eq!(sol.primal_objective, lmin, epsilon = 1e-7);
    assert_abs_diff_eq!(sol.dual_objective, lmin, epsilon = 1e-7);
}

#[test]
fn detects_primal_infeasibility() {
    // x >= 1 and x <= -1
    let (a, b) = no_equalities(1);
    let g = DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]);
    let h = DVector::from_vec(vec![-1.0, -1.0]);
    let pb = ConeProblem { c: DVector::from_vec(vec![1.0]), a, b, g, h, cones: ConeDims::new(2, vec![]) };
    let sol = pb.solve(&Settings::default()).unwrap();
    assert_eq!(sol.status, Status::PrimalInfeasible);
}

#[test]
fn detects_unboundedness() {
    // min -x s.t. x >= 0
    let (a, b) = no_equalities(1);
    let g = DMatrix::from_row_slice(1, 1, &[-1.0]);
    let pb = ConeProblem { c: DVector::from_vec(vec![-1.0]), a, b, g, h: DVector::zeros(1), cones: ConeDims::new(1, vec![]) };
    let sol = pb.solve(&Settings::default()).unwrap();
    assert_eq!(sol.status, Status::DualInfeasible);
}

#[test]
fn rejects_bad_shapes() {
    let pb = ConeProblem {
        c: DVector::zeros(2),
        a: DMatrix::zeros(1, 3),
        b: DVector::zeros(1),
        g: DMatrix::zeros(1, 2),
        h: DVector::zeros(1),
        cones: ConeDims::new(1, vec![]),
    };
    assert!(pb.solve(&Settings::default()).is_err());
}
