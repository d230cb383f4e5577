#pragma once

#include <Eigen/Sparse>

#include "igs/common.hpp"

namespace igs {

using SpMat = Eigen::SparseMatrix<double>;

struct CGResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double rel_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients for SPD systems. Throws
// NumericalFailure (carrying the final residual) when max_iter is exceeded.
// max_iter < 0 picks 10 * dimension.
CGResult solve_spd(const SpMat& M, const Eigen::VectorXd& b, double tol = 1e-10,
                   int max_iter = -1, const Eigen::VectorXd* x0 = nullptr);

struct QPResult {
    Eigen::VectorXd x;
    double kkt_residual = 0.0;
    int outer_iterations = 0;
};

// min 1/2 x^T Q x - x^T f subject to x >= 0, Q SPD. Primal active-set with CG
// inner solves, warm-started from the unconstrained solution.
QPResult positivity_step(const SpMat& Q, const Eigen::VectorXd& f, double tol = 1e-10);

} // namespace igs
