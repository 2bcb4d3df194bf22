#pragma once

/**
 * @file calibration.hpp
 * @brief Data-driven choice of the ambiguity radius delta* and the worst
 *        acceptable return alpha_bar* (robust Wasserstein profile inference).
 *
 * Pipeline:
 *   1. solve_nonrobust: min A^T Sigma_N A  s.t.  A^T mu_N = lambda and
 *      sum_i f_t^i = 1 for each t, by the bordered Lagrange system.
 *   2. calibrate_delta: (1 - delta0)-quantile of |Z|^2 / (4 (1 - mu^T Sigma^-1 mu)),
 *      Z ~ N(0, Cov[h(M)]), h(x) = x + 2 x x^T A* / lambda0*, divided by N.
 *   3. calibrate_alpha_bar: alpha_bar* = lambda - sqrt(delta)|A*| max(s0, s0').
 *
 * Masked coordinates are removed before solving. When the order-2 block holds
 * structurally identical monomials (R_b^a R_d^c vs R_d^c R_b^a) their
 * coefficients are tied to a common value, which is the minimum-norm split and
 * keeps the Lagrange system nonsingular.
 */

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

#include "mvdro/encoding.hpp"
#include "mvdro/market_data.hpp"
#include "mvdro/moments.hpp"

namespace mvdro {

struct NonRobustSolution {
    CoefficientVector coefficients;
    double lambda0 = 0.0;             // multiplier of the mean constraint
    Eigen::VectorXd lambda_t;         // multipliers of the per-period budget constraints
    double target = 0.0;              // lambda
    double kkt_residual = 0.0;        // max-norm of the stationarity residual
    double condition_number = 0.0;    // of the equilibrated bordered system
    std::vector<Index> positions;     // coordinates that were solved for (others are 0)
    Eigen::MatrixXd tie;              // positions x groups
};

struct KktOptions {
    /// When false, every covered coordinate is a free variable (predictability ignored).
    bool respect_mask = true;
    /// Bordered systems with a larger equilibrated condition number are rejected.
    double max_condition = 1e13;
};

NonRobustSolution solve_nonrobust(const EmpiricalMoments& mom, const MonomialEncoding& enc, double target,
                                  const KktOptions& options = {});

/// Stationarity residual 2 Sigma A - lambda0 mu - sum_t lambda_t 1_t over the solved coordinates.
Eigen::VectorXd kkt_residual(const EmpiricalMoments& mom, const NonRobustSolution& sol);

struct MonteCarloOptions {
    std::int64_t draws = 200000;
    std::uint64_t seed = 20240101;
};

struct DeltaCalibration {
    double delta = 0.0;
    double denominator = 0.0;   // 1 - mu^T Sigma^-1 mu
    double quantile = 0.0;      // (1 - delta0)-quantile of |Z|^2 / (4 denominator)
    Eigen::MatrixXd upsilon_h;  // covariance of h(M) in tied coordinates
    bool ridge_applied = false;
    double sigma_condition = 0.0;
};

/// Quantile kernel: (1 - delta0)-quantile of |Z|^2/(4 denominator), Z ~ N(0, upsilon), divided by N.
double rwpi_radius(const Eigen::MatrixXd& upsilon, double denominator, Index sample_count, double delta0,
                   const MonteCarloOptions& mc);

DeltaCalibration calibrate_delta(const PathSamples& samples, const NonRobustSolution& nrs,
                                 const EmpiricalMoments& mom, const MonomialEncoding& enc, double delta0,
                                 const MonteCarloOptions& mc = {});

/// Same as above with the realizations m_j given directly (rows over nrs.positions).
DeltaCalibration calibrate_delta(const Eigen::MatrixXd& m_rows, const NonRobustSolution& nrs,
                                 const EmpiricalMoments& mom, double delta0, const MonteCarloOptions& mc = {});

struct AlphaCalibration {
    double alpha_bar = 0.0;
    double s0 = 0.0;
    double s0_prime = 0.0;
    double upsilon_a = 0.0;  // variance of A*^T m / |A*|
    double z_quantile = 0.0; // delta0-quantile of Z~
};

AlphaCalibration calibrate_alpha_bar(const PathSamples& samples, const NonRobustSolution& nrs,
                                     const EmpiricalMoments& mom, const MonomialEncoding& enc, double delta,
                                     double delta0, const MonteCarloOptions& mc = {});

AlphaCalibration calibrate_alpha_bar(const Eigen::MatrixXd& m_rows, const NonRobustSolution& nrs,
                                     const EmpiricalMoments& mom, double delta, double delta0,
                                     const MonteCarloOptions& mc = {});

struct CalibrationResult {
    NonRobustSolution nonrobust;
    DeltaCalibration delta;
    AlphaCalibration alpha;
    double delta0 = 0.05;
};

/// Steps 1-3 on the free coordinates of `enc`.
CalibrationResult calibrate(const PathSamples& samples, const MonomialEncoding& enc, double target, double delta0,
                            const MonteCarloOptions& mc = {});

/// Default target: T times the mean daily return of the equal-weighted portfolio.
double default_target(const Eigen::MatrixXd& daily_returns, int periods);

/// Order statistic used by the calibration quantiles: the ceil(p * size)-th smallest value.
double upper_order_statistic(std::vector<double> values, double p);

}  // namespace mvdro
