#include "mvdro/backtest.hpp"

#include <cmath>

namespace mvdro {

Eigen::VectorXd initial_position(const CoefficientVector& a) {
    const int T = a.encoding().periods();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(a.encoding().assets());
    for (int t = 1; t <= T; ++t) w += a.constant_terms(t);
    return w / double(T);
}

TargetSchedule target_schedule(const CoefficientVector& a, const Eigen::MatrixXd& returns) {
    return target_schedule(a, returns, returns.rows());
}

TargetSchedule target_schedule(const CoefficientVector& a, const Eigen::MatrixXd& returns, Index days) {
    const MonomialEncoding& enc = a.encoding();
    const int n = enc.assets();
    const int T = enc.periods();
    if (returns.cols() != n) throw Error(ErrorCode::DimensionMismatch, "returns have the wrong number of assets");
    if (days < 1 || days > returns.rows()) {
        throw Error(ErrorCode::WindowExhausted, "schedule of " + std::to_string(days) + " days over " +
                                                    std::to_string(returns.rows()) + " return rows");
    }
    TargetSchedule out;
    out.periods = T;
    out.initial = initial_position(a);
    out.targets = Eigen::MatrixXd::Zero(days, n);
    // row-major flattening of consecutive return rows is the period-major path layout
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = returns;
    for (Index s = 1; s <= days; ++s) {
        for (int i = 1; i <= T && i <= s; ++i) {
            const int t = int((s - i) % T) + 1;
            const Index start = s - t + 1;
            const Eigen::Map<const Eigen::VectorXd> history(rows.data() + (start - 1) * n, Index(t - 1) * n);
            out.targets.row(s - 1) += strategy_weights(a, history, t).transpose();
        }
    }
    out.targets /= double(T);
    return out;
}

TargetSchedule constant_schedule(const Eigen::VectorXd& weights, Index days) {
    TargetSchedule out;
    out.periods = 1;
    out.initial = weights;
    out.targets = weights.transpose().replicate(days, 1);
    return out;
}

double transaction_cost(const Eigen::VectorXd& pre, const Eigen::VectorXd& post, double rate) {
    if (rate < 0.0) throw Error(ErrorCode::InvalidArgument, "cost rate must be >= 0");
    return rate * (pre - post).cwiseAbs().sum();
}

double drift_deviation(const Eigen::VectorXd& held, const Eigen::VectorXd& target) {
    double dev = 0.0;
    for (Index i = 0; i < held.size(); ++i) {
        const double diff = std::abs(held[i] - target[i]);
        const double d = std::abs(held[i]) < 1e-12 ? diff : diff / std::abs(held[i]);
        dev = std::max(dev, d);
    }
    return dev;
}

BacktestReport run_backtest(const TargetSchedule& schedule, const Eigen::MatrixXd& returns, const BacktestConfig& cfg) {
    if (!(cfg.threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "rebalance threshold must be > 0");
    if (cfg.rate < 0.0) throw Error(ErrorCode::InvalidArgument, "cost rate must be >= 0");
    const Index days = schedule.days();
    const Index n = schedule.assets();
    if (returns.cols() != n || schedule.initial.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "schedule and returns disagree on the asset count");
    }
    if (returns.rows() < days) throw Error(ErrorCode::WindowExhausted, "fewer return rows than scheduled days");

    BacktestReport rep;
    rep.periods = schedule.periods;
    rep.wealth.resize(days + 1);
    rep.returns.resize(days);
    rep.held.resize(days, n);
    rep.deviation.resize(days);
    rep.cumulative_costs.resize(days);

    Eigen::VectorXd held = schedule.initial;
    double wealth = 1.0;
    double paid = 0.0;
    rep.wealth[0] = wealth;
    for (Index s = 1; s <= days; ++s) {
        const Eigen::VectorXd target = schedule.targets.row(s - 1).transpose();
        double cost = 0.0;
        if (s == 1) {
            rep.deviation[0] = std::numeric_limits<double>::quiet_NaN();
        } else {
            const double dev = drift_deviation(held, target);
            rep.deviation[s - 1] = dev;
            if (dev > cfg.threshold) {
                const double notional = (held * wealth - target * wealth).cwiseAbs().sum();
                cost = cfg.costs ? cfg.rate * notional : 0.0;
                held = target;
                rep.events.push_back({s, int(rep.events.size()) + 1, notional, cost});
            }
        }
        rep.held.row(s - 1) = held.transpose();
        const Eigen::VectorXd r = returns.row(s - 1).transpose();
        const double rp = held.dot(r);
        const double next = wealth * (1.0 + rp) - cost;
        if (1.0 + rp != 0.0) held = held.cwiseProduct((Eigen::VectorXd::Ones(n) + r) / (1.0 + rp));
        paid += cost;
        rep.returns[s - 1] = next / wealth - 1.0;
        rep.cumulative_costs[s - 1] = paid;
        wealth = next;
        rep.wealth[s] = wealth;
    }
    return rep;
}

}  // namespace mvdro
