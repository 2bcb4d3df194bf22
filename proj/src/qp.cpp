#include "mvdro/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvdro/error.hpp"

namespace mvdro {

using Eigen::Index;

namespace {

std::vector<Index> where(const std::vector<bool>& flags, bool value) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < flags.size(); ++i)
        if (flags[i] == value) out.push_back(Index(i));
    return out;
}

}  // namespace

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter) {
    const Index n = a.cols();
    if (max_iter <= 0) max_iter = int(3 * n + 10);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(std::size_t(n), false);
    const double tol = 1e-12 * (1.0 + a.norm() * b.norm());
    for (int outer = 0; outer < max_iter; ++outer) {
        const Eigen::VectorXd w = a.transpose() * (b - a * x);
        Index best = -1;
        double best_val = tol;
        for (Index j = 0; j < n; ++j) {
            if (!passive[std::size_t(j)] && w[j] > best_val) {
                best_val = w[j];
                best = j;
            }
        }
        if (best < 0) break;
        passive[std::size_t(best)] = true;
        for (int inner = 0; inner < max_iter; ++inner) {
            const std::vector<Index> p = where(passive, true);
            const Eigen::MatrixXd ap = a(Eigen::all, p);
            const Eigen::VectorXd zp = ap.completeOrthogonalDecomposition().solve(b);
            if ((zp.array() > 0.0).all()) {
                x.setZero();
                x(p) = zp;
                break;
            }
            double alpha = 1.0;
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (zp[Index(k)] <= 0.0) {
                    const double xi = x[p[k]];
                    alpha = std::min(alpha, xi / (xi - zp[Index(k)]));
                }
            }
            Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
            z(p) = zp;
            x += alpha * (z - x);
            for (Index j : p) {
                if (x[j] <= 1e-15) {
                    x[j] = 0.0;
                    passive[std::size_t(j)] = false;
                }
            }
        }
    }
    return x;
}

QpResult solve_nonneg_qp(const Eigen::MatrixXd& h_in, const Eigen::VectorXd& c_in, const Eigen::MatrixXd& e_in,
                         const Eigen::VectorXd& rhs_in, int max_iter) {
    const Index n = c_in.size();
    if (h_in.rows() != n || h_in.cols() != n || e_in.cols() != n || e_in.rows() != rhs_in.size()) {
        throw Error(ErrorCode::DimensionMismatch, "QP shapes disagree");
    }
    // equilibrate: unit-norm equality rows, Hessian of unit magnitude
    Eigen::MatrixXd e_mat = e_in;
    Eigen::VectorXd e_rhs = rhs_in;
    for (Index r = 0; r < e_mat.rows(); ++r) {
        const double norm = e_mat.row(r).norm();
        if (norm > 0.0) {
            e_mat.row(r) /= norm;
            e_rhs[r] /= norm;
        }
    }
    const double hs = std::max(h_in.cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::MatrixXd h = h_in / hs;
    const Eigen::VectorXd c = c_in / hs;
    QpResult out;
    out.x = nnls(e_mat, e_rhs);
    const double scale = 1.0 + e_rhs.norm();
    if ((e_mat * out.x - e_rhs).norm() > 1e-9 * scale) return out;
    out.feasible = true;

    Eigen::VectorXd& x = out.x;
    std::vector<bool> bound(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) bound[std::size_t(i)] = x[i] == 0.0;
    const Index m = e_mat.rows();

    // Keep the working bounds independent of the equalities: free variables must span rank(E).
    auto free_rank = [&]() {
        const std::vector<Index> f = where(bound, false);
        if (f.empty()) return Index(0);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e_mat(Eigen::all, f));
        qr.setThreshold(1e-12);
        return qr.rank();
    };
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full_qr(e_mat);
    full_qr.setThreshold(1e-12);
    const Index rank_e = full_qr.rank();
    for (Index r = free_rank(); r < rank_e;) {
        Index pick = -1;
        for (Index i = 0; i < n && pick < 0; ++i) {
            if (!bound[std::size_t(i)]) continue;
            bound[std::size_t(i)] = false;
            const Index trial = free_rank();
            if (trial > r) {
                pick = i;
                r = trial;
            } else {
                bound[std::size_t(i)] = true;
            }
        }
        if (pick < 0) break;
    }

    bool stationary = false;  // an unblocked full step lands on the subspace minimizer
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        const std::vector<Index> f = where(bound, false);
        const Eigen::VectorXd grad = h * x + c;
        const Index nf = Index(f.size());

        // equality-constrained step on the free variables
        Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
        if (nf > 0 && !stationary) {
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + m, nf + m);
            kkt.topLeftCorner(nf, nf) = h(f, f);
            kkt.topRightCorner(nf, m) = e_mat(Eigen::all, f).transpose();
            kkt.bottomLeftCorner(m, nf) = e_mat(Eigen::all, f);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + m);
            rhs.head(nf) = -grad(f);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
            Eigen::VectorXd sol;
            if (lu.isInvertible()) {
                sol = lu.solve(rhs);
            } else {
                Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
                sol = cod.solve(rhs);
            }
            p(f) = sol.head(nf);
        }
        const double xscale = 1.0 + x.cwiseAbs().maxCoeff();
        if (p.cwiseAbs().maxCoeff() <= 1e-12 * xscale) {
            // multipliers of the bound constraints
            Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);
            if (m > 0) {
                if (nf > 0) {
                    nu = e_mat(Eigen::all, f).transpose().completeOrthogonalDecomposition().solve(grad(f));
                }
            }
            const Eigen::VectorXd z = grad - e_mat.transpose() * nu;
            Index worst = -1;
            double worst_val = -1e-11 * (1.0 + grad.cwiseAbs().maxCoeff());
            for (Index i = 0; i < n; ++i) {
                if (bound[std::size_t(i)] && z[i] < worst_val) {
                    worst_val = z[i];
                    worst = i;
                }
            }
            if (worst < 0) {
                out.objective = 0.5 * x.dot(h_in * x) + c_in.dot(x);
                return out;
            }
            bound[std::size_t(worst)] = false;
            stationary = false;
            continue;
        }
        double alpha = 1.0;
        Index block = -1;
        for (Index i : f) {
            if (p[i] < 0.0) {
                const double a = -x[i] / p[i];
                if (a < alpha) {
                    alpha = a;
                    block = i;
                }
            }
        }
        x += alpha * p;
        stationary = block < 0;
        if (block >= 0) {
            x[block] = 0.0;
            bound[std::size_t(block)] = true;
        }
        for (Index i : f)
            if (x[i] < 0.0) x[i] = 0.0;
    }
    throw Error(ErrorCode::NonConvergence, "active-set QP iteration limit reached");
}

}  // namespace mvdro
