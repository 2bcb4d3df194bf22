#pragma once

// Damped Newton minimization shared by the smooth convex solvers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mvdro/error.hpp"

namespace mvdro {

inline Eigen::VectorXd newton_direction(const Eigen::MatrixXd& h, const Eigen::VectorXd& g) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
        Eigen::VectorXd d = -ldlt.solve(g);
        if (d.allFinite() && d.dot(g) < 0.0) return d;
    }
    const double base = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double tau = 1e-12 * base; tau < 1e12 * base; tau *= 10.0) {
        Eigen::MatrixXd reg = h;
        reg.diagonal().array() += tau;
        Eigen::LLT<Eigen::MatrixXd> llt(reg);
        if (llt.info() == Eigen::Success) return -llt.solve(g);
    }
    return -g;
}

struct NewtonResult {
    Eigen::VectorXd y;
    int iterations = 0;
    double gradient_norm = 0.0;
};

// Damped Newton on a smooth convex function; `value` returns +inf outside its domain.
template <typename Value, typename Derivs>
NewtonResult damped_newton(Eigen::VectorXd y, const Value& value, const Derivs& derivs, double tol, int max_iter) {
    NewtonResult out;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    double f = value(y);
    for (int it = 0; it < max_iter; ++it) {
        derivs(y, g, h);
        out.gradient_norm = g.norm();
        const Eigen::VectorXd d = newton_direction(h, g);
        const double dec = -g.dot(d);
        out.iterations = it + 1;
        // a decrement below the rounding noise of f cannot be acted on
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
        if (!(dec > 2.0 * tol) || dec <= noise) {
            out.y = y;
            return out;
        }
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            const Eigen::VectorXd cand = y + step * d;
            const double fc = value(cand);
            if (std::isfinite(fc) && fc <= f - 1e-4 * step * dec) {
                y = cand;
                f = fc;
                moved = true;
                break;
            }
        }
        if (!moved) {
            // no representable decrease: accept as converged when the decrement is tiny
            if (dec < 1e-8) {
                out.y = y;
                return out;
            }
            throw Error(ErrorCode::NonConvergence, "line search failed (decrement " + std::to_string(dec) + ")");
        }
    }
    throw Error(ErrorCode::NonConvergence, "Newton iteration limit reached");
}

}  // namespace mvdro
