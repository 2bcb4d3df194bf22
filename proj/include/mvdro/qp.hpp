#pragma once

/**
 * @file qp.hpp
 * @brief Small dense quadratic programs over the nonnegative orthant.
 *
 *   minimize  0.5 x^T H x + c^T x   subject to  E x = e,  x >= 0
 *
 * H must be positive semidefinite. A primal active-set method is started from
 * the nonnegative least-squares solution of E x = e.
 */

#include <Eigen/Dense>

namespace mvdro {

/// Lawson-Hanson nonnegative least squares: argmin |A x - b| over x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter = 0);

struct QpResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    bool feasible = false;
    int iterations = 0;
};

/// Returns feasible = false when E x = e has no nonnegative solution.
QpResult solve_nonneg_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& c, const Eigen::MatrixXd& e_mat,
                         const Eigen::VectorXd& e_rhs, int max_iter = 500);

}  // namespace mvdro
