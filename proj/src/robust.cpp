#include "mvdro/robust.hpp"

#include "mvdro/newton.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mvdro {

double worst_case_mean(const CoefficientVector& a, const EmpiricalMoments& mom, double delta) {
    const Eigen::VectorXd local = mom.restrict(a.values());
    return local.dot(mom.mean) - std::sqrt(delta) * a.values().norm();
}

double dual_objective(const CoefficientVector& a, const EmpiricalMoments& mom, double delta) {
    const Eigen::VectorXd local = mom.restrict(a.values());
    const Eigen::MatrixXd var = mom.variance();
    return dual_objective(local, var, delta);
}

double primal_inner_value(const CoefficientVector& a, const EmpiricalMoments& mom, double delta, double lambda) {
    const Eigen::VectorXd local = mom.restrict(a.values());
    return primal_inner_value(local, mom.mean, mom.variance(), delta, lambda);
}

Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& var) {
    Eigen::MatrixXd v = 0.5 * (var + var.transpose());
    if (v.size() == 0) return v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double scale = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    if (ev.minCoeff() >= 0.0) return v;
    if (ev.minCoeff() < -1e-10 * scale) {
        throw Error(ErrorCode::NegativeQuadForm, "Var_Q(M) has eigenvalue " + std::to_string(ev.minCoeff()));
    }
    const Eigen::MatrixXd& u = eig.eigenvectors();
    v = u * ev.cwiseMax(0.0).asDiagonal() * u.transpose();
    return 0.5 * (v + v.transpose());
}

BudgetRows budget_rows(const MonomialEncoding& enc, const std::vector<Index>& positions, BudgetMode mode) {
    const int n = enc.assets();
    const Index k = enc.path_dim();
    // group key -> local columns; rhs 1 for constant terms, 0 otherwise
    std::map<std::vector<Index>, std::vector<Index>> rows;
    for (std::size_t j = 0; j < positions.size(); ++j) {
        const Index p = positions[j];
        if (p < k) {
            rows[{0, p / n}].push_back(Index(j));
            continue;
        }
        if (mode == BudgetMode::Constant) continue;
        const MultiIndex idx = enc.unflatten(p);
        if (enc.masked(idx)) continue;
        if (idx.degree == 2) rows[{2, idx.t, idx.c, idx.d}].push_back(Index(j));
        else rows[{3, idx.t, idx.a, idx.b, idx.c, idx.d}].push_back(Index(j));
    }
    BudgetRows out;
    out.matrix = Eigen::MatrixXd::Zero(Index(rows.size()), Index(positions.size()));
    out.rhs = Eigen::VectorXd::Zero(Index(rows.size()));
    Index r = 0;
    for (const auto& [key, cols] : rows) {
        for (Index c : cols) out.matrix(r, c) = 1.0;
        out.rhs[r] = key.front() == 0 ? 1.0 : 0.0;
        ++r;
    }
    return out;
}

namespace {

struct Affine {
    Eigen::VectorXd x0;  // min-norm particular solution, orthogonal to the null space
    Eigen::MatrixXd z;   // orthonormal null-space basis
};

Affine affine_parametrization(const Eigen::MatrixXd& eq, const Eigen::VectorXd& rhs, Index k) {
    Affine out;
    if (eq.rows() == 0) {
        out.x0 = Eigen::VectorXd::Zero(k);
        out.z = Eigen::MatrixXd::Identity(k, k);
        return out;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(eq);
    cod.setThreshold(1e-12);
    out.x0 = cod.solve(rhs);
    const double resid = (eq * out.x0 - rhs).norm();
    if (resid > 1e-9 * (1.0 + rhs.norm())) {
        throw Error(ErrorCode::InfeasibleProblem, "budget equalities are inconsistent");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(eq.transpose());
    qr.setThreshold(1e-12);
    const Index rank = qr.rank();
    const Eigen::MatrixXd q = qr.householderQ();
    out.z = q.rightCols(k - rank);
    if (out.z.cols() > 0) out.x0 -= out.z * (out.z.transpose() * out.x0);
    return out;
}

// Objective, constraint and derivatives in null-space coordinates y (x = x0 + Z y).
class ConicModel {
public:
    ConicModel(const ConicProblem& p, Affine aff, double eps)
        : p_(p), aff_(std::move(aff)), eps_(eps), sd_(std::sqrt(p.delta)) {
        vz_ = p_.var * aff_.z;
        zvz_ = aff_.z.transpose() * vz_;
        zvz_ = 0.5 * (zvz_ + zvz_.transpose());
        vx0_ = p_.var * aff_.x0;
        zvx0_ = aff_.z.transpose() * vx0_;
        x0vx0_ = aff_.x0.dot(vx0_);
        r2_ = aff_.x0.squaredNorm();
        c_ = aff_.z.transpose() * p_.mean;
        base_ = p_.mean.dot(aff_.x0);
    }

    Index dim() const { return aff_.z.cols(); }
    Eigen::VectorXd x(const Eigen::VectorXd& y) const { return aff_.x0 + aff_.z * y; }

    double quad(const Eigen::VectorXd& y) const {
        return std::max(0.0, x0vx0_ + 2.0 * zvx0_.dot(y) + y.dot(zvz_ * y));
    }
    double norm(const Eigen::VectorXd& y) const { return std::sqrt(r2_ + y.squaredNorm()); }

    double objective(const Eigen::VectorXd& y) const { return std::sqrt(quad(y)) + sd_ * norm(y); }
    double worst_mean(const Eigen::VectorXd& y) const { return base_ + c_.dot(y) - sd_ * norm(y); }
    /// <= 0 means feasible.
    double constraint(const Eigen::VectorXd& y) const { return p_.alpha_bar - worst_mean(y); }

    void objective_derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
        const Eigen::VectorXd vq = zvx0_ + zvz_ * y;
        const double phi = std::sqrt(quad(y) + eps_ * eps_);
        g = vq / phi;
        h = zvz_ / phi - (vq * vq.transpose()) / (phi * phi * phi);
        if (sd_ > 0.0) {
            const double psi = std::sqrt(r2_ + y.squaredNorm() + eps_ * eps_);
            g += sd_ * y / psi;
            h += sd_ * (Eigen::MatrixXd::Identity(dim(), dim()) / psi - (y * y.transpose()) / (psi * psi * psi));
        }
    }

    void constraint_derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
        g = -c_;
        h = Eigen::MatrixXd::Zero(dim(), dim());
        if (sd_ > 0.0) {
            const double psi = std::sqrt(r2_ + y.squaredNorm() + eps_ * eps_);
            g += sd_ * y / psi;
            h += sd_ * (Eigen::MatrixXd::Identity(dim(), dim()) / psi - (y * y.transpose()) / (psi * psi * psi));
        }
    }

    /// Maximizer of the worst-case mean over y; value +inf when unbounded.
    std::pair<double, Eigen::VectorXd> best_worst_mean() const {
        const double inf = std::numeric_limits<double>::infinity();
        Eigen::VectorXd y = Eigen::VectorXd::Zero(dim());
        const double cn = c_.norm();
        if (dim() == 0) return {worst_mean(y), y};
        if (p_.delta == 0.0) return {cn > 0.0 ? inf : base_, y};
        if (cn * cn >= p_.delta) return {inf, y};
        const double root = std::sqrt(p_.delta - cn * cn);
        const double r = std::sqrt(r2_);
        if (cn > 0.0) y = c_ * (r / root);
        return {base_ - r * root, y};
    }

    /// A point with worst mean strictly above alpha_bar, along the ascent direction of c.
    Eigen::VectorXd ascend_until_feasible() const {
        const Eigen::VectorXd dir = c_.normalized();
        double s = 1.0;
        for (int it = 0; it < 200; ++it, s *= 2.0) {
            const Eigen::VectorXd y = dir * s;
            if (constraint(y) < 0.0) return y;
        }
        throw Error(ErrorCode::NonConvergence, "could not locate an interior feasible point");
    }

private:
    const ConicProblem& p_;
    Affine aff_;
    double eps_;
    double sd_;
    Eigen::MatrixXd vz_, zvz_;
    Eigen::VectorXd vx0_, zvx0_, c_;
    double x0vx0_ = 0.0, r2_ = 0.0, base_ = 0.0;
};

}  // namespace

double max_worst_case_mean(const ConicProblem& prob) {
    const Affine aff = affine_parametrization(prob.eq, prob.eq_rhs, prob.mean.size());
    const ConicModel model(prob, aff, 0.0);
    return model.best_worst_mean().first;
}

ConicSolution solve_conic(const ConicProblem& prob, const std::optional<Eigen::VectorXd>& init,
                          const SolverOptions& options) {
    const Index k = prob.mean.size();
    if (prob.var.rows() != k || prob.var.cols() != k || prob.eq.cols() != k) {
        throw Error(ErrorCode::DimensionMismatch, "conic problem shapes disagree");
    }
    if (prob.delta < 0.0) throw Error(ErrorCode::InvalidArgument, "delta must be >= 0");
    Affine aff = affine_parametrization(prob.eq, prob.eq_rhs, k);
    const Eigen::MatrixXd z = aff.z;
    const ConicModel model(prob, std::move(aff), options.smoothing);
    const bool constrained = std::isfinite(prob.alpha_bar);

    auto [best, y_best] = model.best_worst_mean();
    if (constrained && best < prob.alpha_bar) {
        throw Error(ErrorCode::InfeasibleProblem, "largest worst-case mean " + std::to_string(best) +
                                                      " is below alpha_bar " + std::to_string(prob.alpha_bar));
    }

    ConicSolution out;
    auto finish = [&](const Eigen::VectorXd& y) {
        out.x = model.x(y);
        out.objective = model.objective(y);
        out.constraint_active = constrained && model.constraint(y) >= -1e-9 * (1.0 + std::abs(prob.alpha_bar));
        return out;
    };
    if (model.dim() == 0) return finish(Eigen::VectorXd::Zero(0));
    if (constrained && best == prob.alpha_bar) return finish(y_best);

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(model.dim());
    if (init) {
        if (init->size() != k) throw Error(ErrorCode::DimensionMismatch, "initial point length");
        y0 = z.transpose() * *init;
    }
    const double scale = std::max(model.objective(y0), 1e-300);
    const double inv = 1.0 / scale;

    auto value = [&](const Eigen::VectorXd& y) { return inv * model.objective(y); };
    auto derivs = [&](const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
        model.objective_derivatives(y, g, h);
        g *= inv;
        h *= inv;
    };
    NewtonResult free = damped_newton(y0, value, derivs, options.tolerance, options.max_newton_iterations);
    out.iterations = free.iterations;
    out.gradient_norm = free.gradient_norm * scale;
    if (!constrained || model.constraint(free.y) <= 0.0) return finish(free.y);

    // The floor binds: log-barrier path from a strictly feasible point.
    Eigen::VectorXd y = std::isfinite(best) ? y_best : model.ascend_until_feasible();
    if (init && model.constraint(y0) < 0.0) y = y0;
    const double cscale = 1.0 / std::max({std::abs(prob.alpha_bar), std::abs(best), 1e-300});
    double t = 1.0;
    for (int round = 0; round < options.max_barrier_rounds; ++round) {
        auto bvalue = [&](const Eigen::VectorXd& v) {
            const double c = model.constraint(v) * cscale;
            if (!(c < 0.0)) return std::numeric_limits<double>::infinity();
            return t * inv * model.objective(v) - std::log(-c);
        };
        auto bderivs = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
            Eigen::VectorXd gc;
            Eigen::MatrixXd hc;
            model.objective_derivatives(v, g, h);
            model.constraint_derivatives(v, gc, hc);
            const double c = model.constraint(v);
            g = t * inv * g - gc / c;
            h = t * inv * h + (gc * gc.transpose()) / (c * c) - hc / c;
        };
        NewtonResult r = damped_newton(y, bvalue, bderivs, 1e-10, options.max_newton_iterations);
        y = r.y;
        out.iterations += r.iterations;
        out.gradient_norm = r.gradient_norm;
        if (1.0 / t < options.tolerance) return finish(y);
        t *= 20.0;
    }
    throw Error(ErrorCode::NonConvergence, "barrier rounds exhausted");
}

ReducedProblem reduce_zero_components(const RobustProblem& prob) {
    const auto mask = predictability_mask(prob.enc);
    std::vector<Index> free;
    for (Index p : prob.mom.positions)
        if (!mask[std::size_t(p)]) free.push_back(p);
    ReducedProblem out{prob, free};
    out.problem.mom = restrict_moments(prob.mom, free);
    return out;
}

Eigen::VectorXd ReducedProblem::reduce(const Eigen::VectorXd& full) const {
    return problem.mom.restrict(full);
}

CoefficientVector ReducedProblem::embed(const Eigen::VectorXd& local) const {
    return CoefficientVector(problem.enc, problem.mom.embed(local));
}

ConicProblem to_conic(const RobustProblem& prob, Representation representation) {
    if (prob.mom.full_dim != prob.enc.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "moments do not belong to this encoding");
    }
    const EmpiricalMoments& mom =
        representation == Representation::Reduced ? reduce_zero_components(prob).problem.mom : prob.mom;
    ConicProblem c;
    c.var = repair_psd(mom.variance());
    c.mean = mom.mean;
    c.delta = prob.delta;
    c.alpha_bar = prob.alpha_bar;
    BudgetRows rows = budget_rows(prob.enc, mom.positions, prob.budget);
    if (representation == Representation::Full) {
        const auto mask = predictability_mask(prob.enc);
        std::vector<Index> masked;
        for (std::size_t j = 0; j < mom.positions.size(); ++j)
            if (mask[std::size_t(mom.positions[j])]) masked.push_back(Index(j));
        const Index r0 = rows.matrix.rows();
        rows.matrix.conservativeResize(r0 + Index(masked.size()), Eigen::NoChange);
        rows.rhs.conservativeResize(r0 + Index(masked.size()));
        rows.matrix.bottomRows(Index(masked.size())).setZero();
        for (std::size_t m = 0; m < masked.size(); ++m) {
            rows.matrix(r0 + Index(m), masked[m]) = 1.0;
            rows.rhs[r0 + Index(m)] = 0.0;
        }
    }
    c.eq = std::move(rows.matrix);
    c.eq_rhs = std::move(rows.rhs);
    return c;
}

RobustSolution solve_robust(const RobustProblem& prob, const std::optional<CoefficientVector>& init,
                            const SolverOptions& options) {
    const ConicProblem conic = to_conic(prob, options.representation);
    const std::vector<Index> positions = options.representation == Representation::Reduced
                                             ? reduce_zero_components(prob).positions
                                             : prob.mom.positions;
    std::optional<Eigen::VectorXd> x0;
    if (init) {
        Eigen::VectorXd local(Index(positions.size()));
        for (std::size_t j = 0; j < positions.size(); ++j) local[Index(j)] = init->values()[positions[j]];
        x0 = local;
    }
    const ConicSolution sol = solve_conic(conic, x0, options);

    Eigen::VectorXd full = Eigen::VectorXd::Zero(prob.enc.dim());
    const auto mask = predictability_mask(prob.enc);
    for (std::size_t j = 0; j < positions.size(); ++j) {
        if (!mask[std::size_t(positions[j])]) full[positions[j]] = sol.x[Index(j)];
    }
    RobustSolution out{CoefficientVector(prob.enc, std::move(full)), sol.objective, 0.0, sol.constraint_active,
                       true, sol.iterations, sol.gradient_norm};
    out.worst_case_mean = conic.mean.dot(sol.x) - std::sqrt(prob.delta) * sol.x.norm();
    return out;
}

}  // namespace mvdro
