#pragma once

/**
 * @file robust.hpp
 * @brief Wasserstein-robust mean-variance problem in coefficient space.
 *
 * For coefficients A and the empirical measure Q of M:
 *
 *   worst-case mean      min_{P in U_delta(Q)} E_P[A^T M] = E_Q[A^T M] - sqrt(delta) |A|
 *   robust objective     sqrt(A^T Var_Q(M) A) + sqrt(delta) |A|
 *
 * The squared objective is the worst-case variance. solve_robust minimizes the
 * objective over the budget equalities and the worst-case-mean floor alpha_bar.
 */

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "mvdro/encoding.hpp"
#include "mvdro/moments.hpp"

namespace mvdro {

// ---------------------------------------------------------------------------
// Expression-level kernels (any Eigen vector/matrix expression, any scalar).

template <typename DA, typename DM>
typename DA::Scalar worst_case_mean(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DM>& mean,
                                    typename DA::Scalar delta) {
    using std::sqrt;
    return a.dot(mean) - sqrt(delta) * a.norm();
}

/// sqrt(a^T V a) + sqrt(delta) |a|. Quadratic forms below -tol * |V| |a|^2 throw NegativeQuadForm.
template <typename DA, typename DV>
typename DA::Scalar dual_objective(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DV>& var,
                                   typename DA::Scalar delta, double tol = 1e-10) {
    using std::sqrt;
    using Scalar = typename DA::Scalar;
    Scalar q = a.dot(var * a);
    if (q < Scalar(0)) {
        const Scalar bound = Scalar(tol) * var.norm() * a.squaredNorm();
        if (-q > bound) throw Error(ErrorCode::NegativeQuadForm, "a^T Var a < 0 beyond tolerance");
        q = Scalar(0);
    }
    return sqrt(q) + sqrt(delta) * a.norm();
}

/// l(A, lambda) - lambda^2 = (sqrt(a^T V a) + sqrt(delta |a|^2 - (lambda - a^T mu)^2))^2.
template <typename DA, typename DM, typename DV>
typename DA::Scalar primal_inner_value(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DM>& mean,
                                       const Eigen::MatrixBase<DV>& var, typename DA::Scalar delta,
                                       typename DA::Scalar lambda) {
    using std::sqrt;
    using Scalar = typename DA::Scalar;
    const Scalar gap = lambda - a.dot(mean);
    const Scalar disc = delta * a.squaredNorm() - gap * gap;
    if (disc < Scalar(0)) {
        throw Error(ErrorCode::InfeasibleLambda, "lambda outside the reachable range of the Wasserstein ball");
    }
    const Scalar s = dual_objective(a, var, Scalar(0)) + sqrt(disc);
    return s * s;
}

// ---------------------------------------------------------------------------
// Coefficient-vector overloads.

double worst_case_mean(const CoefficientVector& a, const EmpiricalMoments& mom, double delta);
double dual_objective(const CoefficientVector& a, const EmpiricalMoments& mom, double delta);
double primal_inner_value(const CoefficientVector& a, const EmpiricalMoments& mom, double delta, double lambda);

/// Symmetrizes and clamps eigenvalues in [-1e-10 |V|, 0) to zero; larger violations throw.
Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& var);

enum class BudgetMode {
    Constant,  // sum_i f_t^i = 1 per period
    Pathwise,  // additionally sum_i of every random coefficient of period t is 0
};

enum class Representation {
    Reduced,  // masked coordinates removed
    Full,     // every covered coordinate kept, mask imposed as equality rows
};

struct RobustProblem {
    MonomialEncoding enc;
    EmpiricalMoments mom;
    double delta = 0.0;
    double alpha_bar = -std::numeric_limits<double>::infinity();
    BudgetMode budget = BudgetMode::Pathwise;
};

struct SolverOptions {
    Representation representation = Representation::Reduced;
    int max_newton_iterations = 200;
    int max_barrier_rounds = 40;
    double smoothing = 1e-12;
    double tolerance = 1e-13;  // relative optimality gap
};

struct RobustSolution {
    CoefficientVector coefficients;
    double objective = 0.0;
    double worst_case_mean = 0.0;
    bool return_constraint_active = false;
    bool budget_active = true;
    int iterations = 0;
    double gradient_norm = 0.0;
};

/// Linear budget equalities over the covered positions of `mom`, rows x positions.
struct BudgetRows {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};
BudgetRows budget_rows(const MonomialEncoding& enc, const std::vector<Index>& positions, BudgetMode mode);

/// Convex core: min sqrt(x^T V x) + sqrt(delta)|x| s.t. E x = e, mu^T x - sqrt(delta)|x| >= alpha_bar.
struct ConicProblem {
    Eigen::MatrixXd var;
    Eigen::VectorXd mean;
    Eigen::MatrixXd eq;
    Eigen::VectorXd eq_rhs;
    double delta = 0.0;
    double alpha_bar = -std::numeric_limits<double>::infinity();
};

struct ConicSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
    bool constraint_active = false;
    int iterations = 0;
    double gradient_norm = 0.0;
};

ConicSolution solve_conic(const ConicProblem& prob, const std::optional<Eigen::VectorXd>& init = std::nullopt,
                          const SolverOptions& options = {});

/// Largest worst-case mean over the affine budget set; +inf when unbounded.
double max_worst_case_mean(const ConicProblem& prob);

/// Zero-component reduction: drops masked coordinates (and restores them as zeros).
struct ReducedProblem {
    RobustProblem problem;                // moments restricted to the free positions
    std::vector<Index> positions;

    Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;
    CoefficientVector embed(const Eigen::VectorXd& local) const;
};
ReducedProblem reduce_zero_components(const RobustProblem& prob);

ConicProblem to_conic(const RobustProblem& prob, Representation representation);

RobustSolution solve_robust(const RobustProblem& prob, const std::optional<CoefficientVector>& init = std::nullopt,
                            const SolverOptions& options = {});

}  // namespace mvdro
