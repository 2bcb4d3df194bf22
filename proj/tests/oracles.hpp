#pragma once

// Independent reference computations for the test suites. None of these call
// the library's closed forms; they search the primal problems directly.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double mean = 0.0,
                         double sd = 1.0) {
    std::normal_distribution<double> nd(mean, sd);
    MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
    return m;
}

inline VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index n, double sd = 1.0) {
    return gaussian(rng, n, 1, 0.0, sd).col(0);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Population variance of the values under equal weights.
inline double population_variance(const VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().mean();
}

/// Golden-section minimum of a unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iterations && b - a > 1e-15 * (1.0 + std::abs(a)); ++k) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    return std::min(fc, fd);
}

/// Worst-case variance sup Var_P(A^T M) over distributions obtained by moving the
/// support points m_j (rows) with mean squared displacement at most delta.
///
/// Displacements orthogonal to A leave A^T M unchanged and only spend budget, so
/// a point is moved by t_j along A / |A|. The t-ball is searched with a zooming
/// grid. Every grid point has some mean lambda and the value E[(A^T M)^2] - lambda^2,
/// so the grid maximum is the maximum over lambda of the mean-pinned suprema.
inline double grid_worst_variance(const MatrixXd& support, const VectorXd& a, double delta, int grid = 41,
                                  int levels = 10) {
    const Eigen::Index n = support.rows();
    const VectorXd y = support * a;
    const double an = a.norm();
    const double radius = std::sqrt(double(n) * delta);
    auto value = [&](const VectorXd& t) { return population_variance(y + an * t); };
    auto clamp = [&](VectorXd t) {
        const double r = t.norm();
        if (r > radius && r > 0) t *= radius / r;
        return t;
    };

    VectorXd best = VectorXd::Zero(n);
    double best_val = value(best);
    VectorXd center = best;
    double half = radius;
    std::vector<int> idx(std::size_t(n), 0);
    for (int level = 0; level < levels; ++level) {
        const double step = 2.0 * half / (grid - 1);
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            VectorXd t(n);
            for (Eigen::Index k = 0; k < n; ++k) t[k] = center[k] - half + step * idx[std::size_t(k)];
            t = clamp(t);
            const double v = value(t);
            if (v > best_val) {
                best_val = v;
                best = t;
            }
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == grid) idx[k++] = 0;
            if (k == idx.size()) break;
        }
        center = best;
        half = 2.0 * step;
    }
    return best_val;
}

/// min over gamma > 0 of gamma delta + |A|^2 / (4 gamma), searched in log gamma.
inline double gamma_penalty(double a_norm, double delta) {
    if (a_norm == 0.0 || delta == 0.0) return 0.0;
    auto f = [&](double u) {
        const double g = std::exp(u);
        return g * delta + a_norm * a_norm / (4.0 * g);
    };
    return golden_min(f, -60.0, 60.0, 400);
}

/// Worst-case mean of A^T M over two-dimensional support points moved by
/// r_j (cos theta_j, sin theta_j) with mean(r_j^2) = delta. The budget split over
/// points and the angles are searched on a zooming grid.
inline double grid_worst_mean_2d(const MatrixXd& support, const VectorXd& a, double delta) {
    const Eigen::Index n = support.rows();
    const double base = (support * a).mean();
    const double budget = double(n) * delta;

    // parameters: n-1 free simplex coordinates followed by n angles
    const Eigen::Index dims = (n - 1) + n;
    auto value = [&](const VectorXd& p) {
        VectorXd w(n);
        double rest = 1.0;
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            w[j] = std::clamp(p[j], 0.0, 1.0);
            rest -= w[j];
        }
        if (rest < -1e-12) return std::numeric_limits<double>::infinity();
        w[n - 1] = std::max(rest, 0.0);
        double shift = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double r = std::sqrt(budget * w[j]);
            const double th = p[(n - 1) + j];
            shift += r * (a[0] * std::cos(th) + a[1] * std::sin(th));
        }
        return base + shift / double(n);
    };

    VectorXd lo = VectorXd::Zero(dims), hi(dims);
    for (Eigen::Index k = 0; k < dims; ++k) hi[k] = k < n - 1 ? 1.0 : 2.0 * M_PI;
    const int grid_first = n <= 2 ? 41 : 21;
    VectorXd best = VectorXd::Zero(dims);
    double best_val = std::numeric_limits<double>::infinity();
    for (int level = 0; level < 12; ++level) {
        const int g = level == 0 ? grid_first : 9;
        std::vector<int> idx(std::size_t(dims), 0);
        VectorXd steps = (hi - lo) / double(g - 1);
        while (true) {
            VectorXd p(dims);
            for (Eigen::Index k = 0; k < dims; ++k) p[k] = lo[k] + steps[k] * idx[std::size_t(k)];
            const double v = value(p);
            if (v < best_val) {
                best_val = v;
                best = p;
            }
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == g) idx[k++] = 0;
            if (k == idx.size()) break;
        }
        lo = best - 2.0 * steps;
        hi = best + 2.0 * steps;
    }
    return best_val;
}

/// Gradient descent with Armijo backtracking on min sqrt(x^T V x) + sqrt(delta)|x|
/// over {x : E x = e}, from random restarts. Returns the best value found.
inline double descent_robust_value(const MatrixXd& var, const MatrixXd& eq, const VectorXd& rhs, double delta,
                                   std::mt19937_64& rng, int restarts = 20, int iterations = 20000) {
    const Eigen::Index dim = var.rows();
    const VectorXd x0 = eq.completeOrthogonalDecomposition().solve(rhs);
    Eigen::FullPivLU<MatrixXd> lu(eq);
    MatrixXd z = lu.kernel();
    if (lu.rank() == eq.cols()) z = MatrixXd::Zero(dim, 0);
    if (z.cols() > 0) z = Eigen::HouseholderQR<MatrixXd>(z).householderQ() * MatrixXd::Identity(dim, z.cols());
    const double sd = std::sqrt(delta);
    auto f = [&](const VectorXd& x) { return std::sqrt(std::max(x.dot(var * x), 0.0)) + sd * x.norm(); };
    auto grad = [&](const VectorXd& x) {
        const VectorXd vx = var * x;
        const double q = std::sqrt(std::max(x.dot(vx), 1e-300));
        VectorXd g = vx / q;
        const double nx = x.norm();
        if (nx > 0) g += sd * x / nx;
        return g;
    };

    double best = f(x0);
    if (z.cols() == 0) return best;
    for (int r = 0; r < restarts; ++r) {
        VectorXd y = r == 0 ? VectorXd::Zero(z.cols()) : gaussian_vector(rng, z.cols(), 1.0);
        double fy = f(x0 + z * y);
        double step = 1.0;
        for (int it = 0; it < iterations; ++it) {
            const VectorXd gy = z.transpose() * grad(x0 + z * y);
            const double gg = gy.squaredNorm();
            if (gg < 1e-30) break;
            step *= 2.0;
            while (step > 1e-20) {
                const VectorXd cand = y - step * gy;
                const double fc = f(x0 + z * cand);
                if (fc <= fy - 0.25 * step * gg) {
                    y = cand;
                    fy = fc;
                    break;
                }
                step *= 0.5;
            }
            if (step <= 1e-20) break;
        }
        best = std::min(best, fy);
    }
    return best;
}

}  // namespace oracle

namespace oracle {

/// The two-asset, three-day ledger written out by hand: targets (0.5, 0.5) every
/// day, start at the target, returns chosen so that day 2 trips the 5% drift
/// rule and day 3 does not. Operations follow the accounting order of the
/// backtest (trade at the open, then the day's return, then the cost).
struct HandLedger {
    double returns[3][2] = {{0.10, -0.05}, {0.01, 0.02}, {0.0, 0.01}};
    double held[3][2];
    double wealth[4];
    double notional = 0.0;
    double cost = 0.0;
    double dev2 = 0.0, dev3 = 0.0;

    explicit HandLedger(double rate = 0.002) {
        wealth[0] = 1.0;
        // day 1
        held[0][0] = 0.5;
        held[0][1] = 0.5;
        const double rp1 = 0.5 * 0.10 + 0.5 * -0.05;
        wealth[1] = 1.0 * (1.0 + rp1) - 0.0;
        const double d1a = 0.5 * ((1.0 + 0.10) / (1.0 + rp1));
        const double d1b = 0.5 * ((1.0 + -0.05) / (1.0 + rp1));
        // day 2: drift exceeds 5% -> back to (0.5, 0.5)
        dev2 = std::max(std::abs(d1a - 0.5) / d1a, std::abs(d1b - 0.5) / d1b);
        notional = std::abs(d1a * wealth[1] - 0.5 * wealth[1]) + std::abs(d1b * wealth[1] - 0.5 * wealth[1]);
        cost = rate * notional;
        held[1][0] = 0.5;
        held[1][1] = 0.5;
        const double rp2 = 0.5 * 0.01 + 0.5 * 0.02;
        wealth[2] = wealth[1] * (1.0 + rp2) - cost;
        const double d2a = 0.5 * ((1.0 + 0.01) / (1.0 + rp2));
        const double d2b = 0.5 * ((1.0 + 0.02) / (1.0 + rp2));
        // day 3: no trade
        dev3 = std::max(std::abs(d2a - 0.5) / d2a, std::abs(d2b - 0.5) / d2b);
        held[2][0] = d2a;
        held[2][1] = d2b;
        const double rp3 = d2a * 0.0 + d2b * 0.01;
        wealth[3] = wealth[2] * (1.0 + rp3) - 0.0;
    }
};

}  // namespace oracle
