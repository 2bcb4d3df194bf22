#pragma once

/**
 * @file baselines.hpp
 * @brief Single-period comparison strategies: equal-weighted, Markowitz,
 *        maxmin-utility (UM), norm-constrained (NC) and sparse-robust (SP).
 *
 * Every strategy returns fully invested weights (they sum to one).
 */

#include <Eigen/Dense>

#include <optional>

namespace mvdro {

/// Sample moments of one estimation window of daily returns (d rows, n assets).
struct SinglePeriodMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;      // 1/d normalization, symmetrized
    Eigen::Index d = 0;
    Eigen::MatrixXd returns;  // raw rows, needed by SP

    Eigen::Index assets() const { return mean.size(); }
};

SinglePeriodMoments single_period_moments(const Eigen::MatrixXd& returns);

Eigen::VectorXd equal_weighted(Eigen::Index n);

/// argmax w^T mu - gamma/2 w^T K w subject to 1^T w = 1.
Eigen::VectorXd markowitz(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, double gamma = 4.0);
Eigen::VectorXd markowitz(const SinglePeriodMoments& mom, double gamma = 4.0);

/// Minimum-variance weights K^-1 1 / (1^T K^-1 1).
Eigen::VectorXd min_variance(const Eigen::MatrixXd& cov);

/// w^T mu - gamma/2 w^T K w - delta sqrt(w^T K_mu w).
double um_objective(const SinglePeriodMoments& mom, const Eigen::VectorXd& w, double gamma, double delta_um);
/// Maximizes um_objective with K_mu = K / d.
Eigen::VectorXd robust_um(const SinglePeriodMoments& mom, double gamma = 4.0, double delta_um = 1.96);

/// w^T K w + lambda (|w|_1 - 1) + lambda alpha sum_i (rank|w_i| - 1)|w_i|, which equals w^T K_hat w at
/// a self-consistent pattern.
double nc_objective(const Eigen::MatrixXd& cov, const Eigen::VectorXd& w, double lambda, double alpha);

struct NcResult {
    Eigen::VectorXd weights;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool cycle_detected = false;  // pattern cycled; best iterate refined by ADMM
};

NcResult robust_nc(const SinglePeriodMoments& mom, double lambda = 2.0, double alpha = 4.0, int max_iter = 100);
NcResult robust_nc(const Eigen::MatrixXd& cov, double lambda, double alpha, int max_iter = 100);

struct SpOptions {
    double tau = 500.0;
    std::optional<double> rho;             // default: equal-weighted robust mean
    std::optional<Eigen::VectorXd> eps;    // default: 1.96 std_i / sqrt(d)
    int enumerate_up_to = 12;              // sign patterns are enumerated up to this many assets
};

struct SpResult {
    Eigen::VectorXd weights;
    double objective = 0.0;
    double rho = 0.0;
    Eigen::VectorXd eps;
    bool enumerated = true;
};

Eigen::VectorXd sp_default_eps(const SinglePeriodMoments& mom);
double sp_default_rho(const SinglePeriodMoments& mom, const Eigen::VectorXd& eps);

/// |rho 1 - R w|^2 + tau |w|_1.
double sp_objective(const SinglePeriodMoments& mom, const Eigen::VectorXd& w, double rho, double tau);

/// min sp_objective s.t. w^T mu - eps^T |w| = rho, 1^T w = 1.
SpResult robust_sp(const SinglePeriodMoments& mom, const SpOptions& options = {});

}  // namespace mvdro
