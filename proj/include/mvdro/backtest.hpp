#pragma once

/**
 * @file backtest.hpp
 * @brief Staggered-subportfolio targets, drift-triggered rebalancing and
 *        wealth accounting with linear transaction costs.
 *
 * Day s (1-based) is the interval (s-1, s]; row s-1 of every per-day matrix
 * refers to it. Held weights are fractions of current wealth; whatever they
 * do not cover sits in cash at zero interest.
 */

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "mvdro/encoding.hpp"

namespace mvdro {

struct TargetSchedule {
    int periods = 1;
    Eigen::MatrixXd targets;  // days x n
    Eigen::VectorXd initial;  // position taken at time 0

    Eigen::Index days() const { return targets.rows(); }
    Eigen::Index assets() const { return targets.cols(); }
};

/// Average over periods of the constant-term weights f_t.
Eigen::VectorXd initial_position(const CoefficientVector& a);

/// Average of the T staggered subportfolios. Subportfolio i starts on day i and
/// restarts its T-period strategy every T days; only returns realized before
/// day s enter the day-s target.
TargetSchedule target_schedule(const CoefficientVector& a, const Eigen::MatrixXd& returns);
TargetSchedule target_schedule(const CoefficientVector& a, const Eigen::MatrixXd& returns, Eigen::Index days);

/// Static single-period weights held as target every day.
TargetSchedule constant_schedule(const Eigen::VectorXd& weights, Eigen::Index days);

/// rate * sum_i |pre_i - post_i| over position values.
double transaction_cost(const Eigen::VectorXd& pre, const Eigen::VectorXd& post, double rate);

struct BacktestConfig {
    double threshold = 0.05;
    double rate = 0.002;
    bool costs = true;
};

struct RebalanceEvent {
    Eigen::Index day = 0;  // tau_k
    int k = 0;
    double notional = 0.0;
    double cost = 0.0;
};

struct BacktestReport {
    Eigen::VectorXd wealth;           // days + 1 entries, wealth[0] = 1
    Eigen::VectorXd returns;          // net daily returns
    Eigen::MatrixXd held;             // weights held through each day (after any rebalance)
    Eigen::VectorXd deviation;        // pre-trade deviation test value; NaN on day 1
    Eigen::VectorXd cumulative_costs;
    std::vector<RebalanceEvent> events;
    int periods = 1;

    double total_cost() const { return cumulative_costs.size() ? cumulative_costs[cumulative_costs.size() - 1] : 0.0; }
    double final_wealth() const { return wealth[wealth.size() - 1]; }
};

/// max_i |(held_i - target_i) / held_i|, with absolute deviation where |held_i| < 1e-12.
double drift_deviation(const Eigen::VectorXd& held, const Eigen::VectorXd& target);

BacktestReport run_backtest(const TargetSchedule& schedule, const Eigen::MatrixXd& returns,
                            const BacktestConfig& cfg = {});

}  // namespace mvdro
