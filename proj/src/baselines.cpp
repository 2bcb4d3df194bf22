#include "mvdro/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "mvdro/error.hpp"
#include "mvdro/newton.hpp"
#include "mvdro/qp.hpp"

namespace mvdro {

using Eigen::Index;

namespace {

/// Solves [q 1; 1^T 0][w; nu] = [r; 1]; throws `code` when the system is numerically singular.
Eigen::VectorXd bordered_solve(const Eigen::MatrixXd& q, const Eigen::VectorXd& r, ErrorCode code) {
    const Index n = q.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
    m.topLeftCorner(n, n) = q;
    m.topRightCorner(n, 1).setOnes();
    m.bottomLeftCorner(1, n).setOnes();
    Eigen::VectorXd rhs(n + 1);
    rhs << r, 1.0;
    // equilibrate the quadratic block so daily-scale covariances are not flagged
    const double s = std::max(q.cwiseAbs().maxCoeff(), 1e-300);
    m.topLeftCorner(n, n) /= s;
    rhs.head(n) /= s;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
        throw Error(code, "bordered system is singular (rcond " + std::to_string(lu.rcond()) + ")");
    }
    return lu.solve(rhs).head(n);
}

/// Asset indices by ascending |w_i|, ties broken by index.
std::vector<Index> magnitude_order(const Eigen::VectorXd& w) {
    std::vector<Index> order(static_cast<std::size_t>(w.size()));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(w[a]) < std::abs(w[b]); });
    return order;
}

Eigen::MatrixXd null_basis_of_ones(Index n) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
    const Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(n - 1);
}

}  // namespace

SinglePeriodMoments single_period_moments(const Eigen::MatrixXd& returns) {
    if (returns.rows() < 2) throw Error(ErrorCode::TooFewSamples, "need d >= 2 return rows");
    SinglePeriodMoments mom;
    mom.d = returns.rows();
    mom.returns = returns;
    mom.mean = returns.colwise().mean().transpose();
    const Eigen::MatrixXd centered = returns.rowwise() - mom.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / double(mom.d);
    mom.cov = 0.5 * (cov + cov.transpose());
    return mom;
}

Eigen::VectorXd equal_weighted(Index n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    return Eigen::VectorXd::Constant(n, 1.0 / double(n));
}

Eigen::VectorXd markowitz(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, double gamma) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw Error(ErrorCode::DimensionMismatch, "covariance shape");
    }
    const Eigen::MatrixXd k = 0.5 * (cov + cov.transpose());
    return bordered_solve(gamma * k, mean, ErrorCode::SingularCovariance);
}

Eigen::VectorXd markowitz(const SinglePeriodMoments& mom, double gamma) { return markowitz(mom.mean, mom.cov, gamma); }

Eigen::VectorXd min_variance(const Eigen::MatrixXd& cov) {
    const Eigen::MatrixXd k = 0.5 * (cov + cov.transpose());
    return bordered_solve(2.0 * k, Eigen::VectorXd::Zero(k.rows()), ErrorCode::SingularCovariance);
}

double um_objective(const SinglePeriodMoments& mom, const Eigen::VectorXd& w, double gamma, double delta_um) {
    const double q = std::max(0.0, w.dot(mom.cov * w));
    return w.dot(mom.mean) - 0.5 * gamma * q - delta_um * std::sqrt(q / double(mom.d));
}

Eigen::VectorXd robust_um(const SinglePeriodMoments& mom, double gamma, double delta_um) {
    if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
    if (delta_um < 0.0) throw Error(ErrorCode::InvalidArgument, "delta_um must be >= 0");
    const Index n = mom.assets();
    const Eigen::VectorXd w0 = markowitz(mom, gamma);
    if (n == 1 || delta_um == 0.0) return w0;

    const Eigen::MatrixXd z = null_basis_of_ones(n);
    const Eigen::MatrixXd kz = mom.cov * z;
    const Eigen::MatrixXd zkz = z.transpose() * kz;
    const double kmu = 1.0 / double(mom.d);
    const double eps2 = 1e-30;
    const double scale = std::max(std::abs(um_objective(mom, w0, gamma, delta_um)), 1e-300);

    auto value = [&](const Eigen::VectorXd& y) {
        return -um_objective(mom, w0 + z * y, gamma, delta_um) / scale;
    };
    auto derivs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
        const Eigen::VectorXd w = w0 + z * y;
        const Eigen::VectorXd kw = z.transpose() * (mom.cov * w);
        const double phi = std::sqrt(kmu * std::max(0.0, w.dot(mom.cov * w)) + eps2);
        g = -z.transpose() * mom.mean + gamma * kw + delta_um * kmu * kw / phi;
        h = gamma * zkz + delta_um * (kmu * zkz / phi - kmu * kmu * (kw * kw.transpose()) / (phi * phi * phi));
        g /= scale;
        h /= scale;
    };
    const NewtonResult r = damped_newton(Eigen::VectorXd::Zero(n - 1), value, derivs, 1e-15, 200);
    return w0 + z * r.y;
}

double nc_objective(const Eigen::MatrixXd& cov, const Eigen::VectorXd& w, double lambda, double alpha) {
    const Index n = w.size();
    const std::vector<Index> order = magnitude_order(w);
    double ranked = 0.0;
    for (Index r = 0; r < n; ++r) ranked += double(r) * std::abs(w[order[std::size_t(r)]]);
    return w.dot(cov * w) + lambda * (w.lpNorm<1>() - 1.0) + lambda * alpha * ranked;
}

namespace {

// (v, o) pattern of a weight vector: v_i = 1{w_i < 0}, o_i = (rank|w_i| - 1) sign(w_i).
std::vector<int> nc_pattern(const Eigen::VectorXd& w) {
    const Index n = w.size();
    const std::vector<Index> order = magnitude_order(w);
    std::vector<int> pat(std::size_t(2 * n));
    for (Index r = 0; r < n; ++r) {
        const Index i = order[std::size_t(r)];
        const int sign = w[i] > 0.0 ? 1 : (w[i] < 0.0 ? -1 : 0);
        pat[std::size_t(i)] = w[i] < 0.0 ? 1 : 0;
        pat[std::size_t(n + i)] = int(r) * sign;
    }
    return pat;
}

/// prox of sum_k c_k |x|_[k] (c nonincreasing, |x|_[1] the largest magnitude) via pool-adjacent-violators.
Eigen::VectorXd sorted_l1_prox(const Eigen::VectorXd& v, const Eigen::VectorXd& c) {
    const Index n = v.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(v[a]) > std::abs(v[b]); });

    std::vector<double> sum, len;
    for (Index k = 0; k < n; ++k) {
        sum.push_back(std::abs(v[order[std::size_t(k)]]) - c[k]);
        len.push_back(1.0);
        while (sum.size() > 1 && sum[sum.size() - 2] / len[len.size() - 2] <= sum.back() / len.back()) {
            sum[sum.size() - 2] += sum.back();
            len[len.size() - 2] += len.back();
            sum.pop_back();
            len.pop_back();
        }
    }
    Eigen::VectorXd out(n);
    Index k = 0;
    for (std::size_t b = 0; b < sum.size(); ++b) {
        const double level = std::max(sum[b] / len[b], 0.0);
        for (int j = 0; j < int(len[b]); ++j, ++k) {
            const Index i = order[std::size_t(k)];
            out[i] = v[i] < 0.0 ? -level : level;
        }
    }
    return out;
}

/// ADMM on w^T K w + sum_k c_k |w|_[k] s.t. 1^T w = 1, started from `w0`.
Eigen::VectorXd nc_admm(const Eigen::MatrixXd& k, const Eigen::VectorXd& c, const Eigen::VectorXd& w0) {
    const Index n = k.rows();
    const double rho = std::max(c.maxCoeff(), 2.0 * k.diagonal().maxCoeff());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
    m.topLeftCorner(n, n) = 2.0 * k / rho + Eigen::MatrixXd::Identity(n, n);
    m.topRightCorner(n, 1).setOnes();
    m.bottomLeftCorner(1, n).setOnes();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const Eigen::VectorXd c_scaled = c / rho;

    Eigen::VectorXd w = w0, z = w0, u = Eigen::VectorXd::Zero(n), rhs(n + 1);
    rhs[n] = 1.0;
    for (int it = 0; it < 200000; ++it) {
        rhs.head(n) = z - u;
        w = lu.solve(rhs).head(n);
        const Eigen::VectorXd z_prev = z;
        z = sorted_l1_prox(w + u, c_scaled);
        u += w - z;
        if ((w - z).lpNorm<Eigen::Infinity>() < 1e-13 && (z - z_prev).lpNorm<Eigen::Infinity>() < 1e-13) break;
    }
    return w;
}

}  // namespace

NcResult robust_nc(const Eigen::MatrixXd& cov, double lambda, double alpha, int max_iter) {
    if (lambda < 0.0 || alpha < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda and alpha must be >= 0");
    const Index n = cov.rows();
    const Eigen::MatrixXd k = 0.5 * (cov + cov.transpose());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    NcResult out;
    out.weights = min_variance(k);
    out.objective = nc_objective(k, out.weights, lambda, alpha);
    if (lambda == 0.0) {
        out.converged = true;
        return out;
    }
    std::set<std::vector<int>> seen;
    std::vector<int> pat = nc_pattern(out.weights);
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        Eigen::VectorXd v(n), o(n);
        for (Index i = 0; i < n; ++i) {
            v[i] = pat[std::size_t(i)];
            o[i] = pat[std::size_t(n + i)];
        }
        const Eigen::MatrixXd khat = k - lambda * (v * ones.transpose() + ones * v.transpose()) +
                                     0.5 * lambda * alpha * (o * ones.transpose() + ones * o.transpose());
        const Eigen::VectorXd w =
            bordered_solve(2.0 * khat, Eigen::VectorXd::Zero(n), ErrorCode::SingularAdjustedCovariance);
        const double j = nc_objective(k, w, lambda, alpha);
        const std::vector<int> next = nc_pattern(w);
        if (next == pat) {
            out.weights = w;
            out.objective = j;
            out.converged = true;
            return out;
        }
        if (j < out.objective) {
            out.weights = w;
            out.objective = j;
        }
        seen.insert(pat);
        if (seen.count(next)) break;
        pat = next;
    }
    // no self-consistent pattern: polish the best iterate on the convex objective
    out.cycle_detected = true;
    Eigen::VectorXd c(n);
    for (Index r = 0; r < n; ++r) c[r] = lambda * (1.0 + alpha * double(n - 1 - r));
    const Eigen::VectorXd polished = nc_admm(k, c, out.weights);
    const double j = nc_objective(k, polished, lambda, alpha);
    if (j < out.objective) {
        out.weights = polished;
        out.objective = j;
    }
    return out;
}

NcResult robust_nc(const SinglePeriodMoments& mom, double lambda, double alpha, int max_iter) {
    return robust_nc(mom.cov, lambda, alpha, max_iter);
}

Eigen::VectorXd sp_default_eps(const SinglePeriodMoments& mom) {
    return 1.96 * mom.cov.diagonal().cwiseMax(0.0).cwiseSqrt() / std::sqrt(double(mom.d));
}

double sp_default_rho(const SinglePeriodMoments& mom, const Eigen::VectorXd& eps) {
    return mom.mean.mean() - eps.mean();
}

double sp_objective(const SinglePeriodMoments& mom, const Eigen::VectorXd& w, double rho, double tau) {
    const Eigen::VectorXd resid = Eigen::VectorXd::Constant(mom.d, rho) - mom.returns * w;
    return resid.squaredNorm() + tau * w.lpNorm<1>();
}

namespace {

struct SpPiece {
    Eigen::MatrixXd gram;  // R^T R
    Eigen::VectorXd r1;    // R^T 1
    double const_term;     // d rho^2
};

/// Best weights inside the orthant given by `sign`; nullopt if the equalities cannot hold there.
std::optional<Eigen::VectorXd> solve_orthant(const SinglePeriodMoments& mom, const SpPiece& piece,
                                             const Eigen::VectorXd& sign, const Eigen::VectorXd& eps, double rho,
                                             double tau) {
    const Index n = mom.assets();
    const Eigen::MatrixXd h = 2.0 * sign.asDiagonal() * piece.gram * sign.asDiagonal();
    const Eigen::VectorXd c = -2.0 * rho * sign.cwiseProduct(piece.r1) + Eigen::VectorXd::Constant(n, tau);
    Eigen::MatrixXd e(2, n);
    e.row(0) = (sign.cwiseProduct(mom.mean) - eps).transpose();
    e.row(1) = sign.transpose();
    Eigen::Vector2d rhs(rho, 1.0);
    const QpResult qp = solve_nonneg_qp(h, c, e, rhs);
    if (!qp.feasible) return std::nullopt;
    return Eigen::VectorXd(sign.cwiseProduct(qp.x));
}

}  // namespace

SpResult robust_sp(const SinglePeriodMoments& mom, const SpOptions& options) {
    if (options.tau < 0.0) throw Error(ErrorCode::InvalidArgument, "tau must be >= 0");
    const Index n = mom.assets();
    SpResult out;
    out.eps = options.eps ? *options.eps : sp_default_eps(mom);
    if (out.eps.size() != n) throw Error(ErrorCode::DimensionMismatch, "eps length");
    if ((out.eps.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "eps must be >= 0");
    out.rho = options.rho ? *options.rho : sp_default_rho(mom, out.eps);
    const double tau = options.tau;

    const SpPiece piece{mom.returns.transpose() * mom.returns, mom.returns.colwise().sum().transpose(),
                        double(mom.d) * out.rho * out.rho};
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](const Eigen::VectorXd& sign) {
        const auto w = solve_orthant(mom, piece, sign, out.eps, out.rho, tau);
        if (!w) return false;
        const double f = sp_objective(mom, *w, out.rho, tau);
        if (f < best) {
            best = f;
            out.weights = *w;
            return true;
        }
        return false;
    };

    if (n <= options.enumerate_up_to) {
        for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << n); ++bits) {
            Eigen::VectorXd sign(n);
            for (Index i = 0; i < n; ++i) sign[i] = (bits >> i) & 1 ? -1.0 : 1.0;
            consider(sign);
        }
    } else {
        // re-linearize |w| around the incumbent sign pattern and flip signs of zeroed assets
        out.enumerated = false;
        Eigen::VectorXd sign = Eigen::VectorXd::Ones(n);
        consider(sign);
        for (int pass = 0; pass < 100; ++pass) {
            bool improved = false;
            for (Index i = 0; i < n; ++i) {
                if (std::isfinite(best) && out.weights[i] != 0.0) continue;
                Eigen::VectorXd trial = sign;
                trial[i] = -trial[i];
                if (consider(trial)) {
                    sign = trial;
                    improved = true;
                }
            }
            if (!improved) break;
        }
    }
    if (!std::isfinite(best)) {
        throw Error(ErrorCode::InfeasibleTarget, "no weights reach the robust return " + std::to_string(out.rho));
    }
    out.objective = best;
    return out;
}

}  // namespace mvdro
