#include "mvdro/calibration.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace mvdro {

namespace {

std::vector<Index> solve_positions(const EmpiricalMoments& mom, const MonomialEncoding& enc, bool respect_mask) {
    if (mom.full_dim != enc.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "moments do not belong to this encoding");
    }
    if (!respect_mask) return mom.positions;
    const auto mask = predictability_mask(enc);
    std::vector<Index> out;
    for (Index p : mom.positions)
        if (!mask[std::size_t(p)]) out.push_back(p);
    return out;
}

// Canonical (tied) coefficients from a coefficient vector local to nrs.positions.
Eigen::VectorXd tied_coefficients(const NonRobustSolution& nrs, const EmpiricalMoments& local) {
    const Eigen::VectorXd a = local.restrict(nrs.coefficients.values());
    const Eigen::VectorXd counts = nrs.tie.colwise().sum().transpose();
    return (nrs.tie.transpose() * a).cwiseQuotient(counts);
}

std::vector<double> draw_chi_square_mix(const Eigen::VectorXd& weights, const MonteCarloOptions& mc) {
    std::mt19937_64 rng(mc.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(std::size_t(mc.draws));
    for (auto& v : out) {
        double s = 0.0;
        for (Index i = 0; i < weights.size(); ++i) {
            const double z = normal(rng);
            s += weights[i] * z * z;
        }
        v = s;
    }
    return out;
}

}  // namespace

double upper_order_statistic(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
    const double size = double(values.size());
    auto k = static_cast<std::size_t>(std::ceil(p * size - 1e-9));
    k = std::clamp<std::size_t>(k, 1, values.size());
    std::nth_element(values.begin(), values.begin() + std::ptrdiff_t(k - 1), values.end());
    return values[k - 1];
}

NonRobustSolution solve_nonrobust(const EmpiricalMoments& mom, const MonomialEncoding& enc, double target,
                                  const KktOptions& options) {
    const std::vector<Index> positions = solve_positions(mom, enc, options.respect_mask);
    const EmpiricalMoments local = restrict_moments(mom, positions);
    const auto groups = duplicate_groups(enc, positions);
    const Index k = Index(positions.size());
    const Index g = Index(groups.size());
    const int T = enc.periods();
    const Eigen::MatrixXd tie = tie_matrix(groups, k);

    const Eigen::MatrixXd sigma = tie.transpose() * local.second * tie;
    const Eigen::VectorXd mu = tie.transpose() * local.mean;
    Eigen::MatrixXd budget = Eigen::MatrixXd::Zero(T, g);
    std::vector<int> f_count(std::size_t(T), 0);
    for (Index j = 0; j < g; ++j) {
        const Index p = positions[std::size_t(groups[std::size_t(j)].front())];
        if (p < enc.path_dim()) {
            const int t = int(p / enc.assets());
            budget(t, j) = 1.0;
            ++f_count[std::size_t(t)];
        }
    }
    for (int t = 0; t < T; ++t) {
        if (f_count[std::size_t(t)] != enc.assets()) {
            throw Error(ErrorCode::DimensionMismatch, "moments must cover every constant-term coordinate");
        }
    }

    // Symmetric bordered system [2S -mu -B^T; -mu^T 0 0; -B 0 0] [x; l0; lt] = [0; -lambda; -1].
    const Index m = g + 1 + T;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m, m);
    kkt.topLeftCorner(g, g) = 2.0 * sigma;
    kkt.block(0, g, g, 1) = -mu;
    kkt.block(g, 0, 1, g) = -mu.transpose();
    kkt.block(0, g + 1, g, T) = -budget.transpose();
    kkt.block(g + 1, 0, T, g) = -budget;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs[g] = -target;
    rhs.tail(T).setConstant(-1.0);

    Eigen::VectorXd scale(m);
    for (Index j = 0; j < g; ++j) {
        const double d = sigma(j, j);
        scale[j] = d > 0.0 ? 1.0 / std::sqrt(2.0 * d) : 1.0;
    }
    const Eigen::VectorXd sv = scale.head(g);
    const double mu_norm = mu.cwiseProduct(sv).norm();
    scale[g] = mu_norm > 0.0 ? 1.0 / mu_norm : 1.0;
    for (int t = 0; t < T; ++t) {
        const double bn = budget.row(t).transpose().cwiseProduct(sv).norm();
        scale[g + 1 + t] = bn > 0.0 ? 1.0 / bn : 1.0;
    }
    const Eigen::MatrixXd scaled = scale.asDiagonal() * kkt * scale.asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cond = s[m - 1] > 0.0 ? s[0] / s[m - 1] : std::numeric_limits<double>::infinity();
    if (!(cond <= options.max_condition)) {
        throw Error(ErrorCode::SingularKKT, "bordered Lagrange system is singular (condition number " +
                                                std::to_string(cond) + "); moments are collinear or constraints dependent");
    }
    const Eigen::VectorXd sol = scale.asDiagonal() * svd.solve(scale.asDiagonal() * rhs);

    NonRobustSolution out{CoefficientVector::unchecked(enc, local.embed(tie * sol.head(g))),
                          sol[g],
                          sol.tail(T),
                          target,
                          0.0,
                          cond,
                          positions,
                          tie};
    out.kkt_residual = kkt_residual(mom, out).cwiseAbs().maxCoeff();
    return out;
}

Eigen::VectorXd kkt_residual(const EmpiricalMoments& mom, const NonRobustSolution& sol) {
    const EmpiricalMoments local = restrict_moments(mom, sol.positions);
    const Eigen::VectorXd a = local.restrict(sol.coefficients.values());
    const MonomialEncoding& enc = sol.coefficients.encoding();
    Eigen::VectorXd r = 2.0 * local.second * a - sol.lambda0 * local.mean;
    for (Index j = 0; j < local.dim(); ++j) {
        const Index p = sol.positions[std::size_t(j)];
        if (p < enc.path_dim()) r[j] -= sol.lambda_t[p / enc.assets()];
    }
    return r;
}

double rwpi_radius(const Eigen::MatrixXd& upsilon, double denominator, Index sample_count, double delta0,
                   const MonteCarloOptions& mc) {
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta0 must lie in (0, 1)");
    if (!(denominator > 0.0)) {
        throw Error(ErrorCode::DegenerateDenominator, "1 - mu^T Sigma^-1 mu = " + std::to_string(denominator));
    }
    if (sample_count < 1 || mc.draws < 1) throw Error(ErrorCode::InvalidArgument, "sample and draw counts must be positive");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (upsilon + upsilon.transpose()), Eigen::EigenvaluesOnly);
    // |Z|^2 = sum_i ev_i xi_i^2 for Z = U diag(sqrt(ev)) xi; tiny negative eigenvalues are clamped.
    const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    if (ev.maxCoeff() == 0.0) return 0.0;
    std::vector<double> draws = draw_chi_square_mix(ev / (4.0 * denominator), mc);
    return upper_order_statistic(std::move(draws), 1.0 - delta0) / double(sample_count);
}

DeltaCalibration calibrate_delta(const Eigen::MatrixXd& m_rows, const NonRobustSolution& nrs,
                                 const EmpiricalMoments& mom, double delta0, const MonteCarloOptions& mc) {
    if (nrs.lambda0 == 0.0) throw Error(ErrorCode::ZeroMultiplier, "lambda0* = 0");
    if (m_rows.cols() != Index(nrs.positions.size())) {
        throw Error(ErrorCode::DimensionMismatch, "realization rows do not match the solved coordinates");
    }
    const Index n_samples = m_rows.rows();
    if (n_samples < 2) throw Error(ErrorCode::TooFewSamples, "need N >= 2");
    const EmpiricalMoments local = restrict_moments(mom, nrs.positions);
    const Eigen::MatrixXd mc_rows = m_rows * nrs.tie;
    const Eigen::VectorXd x = tied_coefficients(nrs, local);

    // h(m) = m + (2 / lambda0) m (m^T x)
    const Eigen::VectorXd proj = mc_rows * x;
    const Eigen::MatrixXd h = mc_rows + ((2.0 / nrs.lambda0) * proj).asDiagonal() * mc_rows;
    // first-row shift keeps constant columns exactly zero
    const Eigen::MatrixXd shifted = h.rowwise() - h.row(0);
    const Eigen::MatrixXd centered = shifted.rowwise() - shifted.colwise().mean();
    Eigen::MatrixXd upsilon = (centered.transpose() * centered) / double(n_samples);
    upsilon = 0.5 * (upsilon + upsilon.transpose());

    DeltaCalibration out;
    const Eigen::MatrixXd sigma = nrs.tie.transpose() * local.second * nrs.tie;
    const Eigen::VectorXd mu = nrs.tie.transpose() * local.mean;
    const Eigen::VectorXd d = sigma.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd eq = d.asDiagonal() * sigma * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(eq, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    out.sigma_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    Eigen::MatrixXd reg = sigma;
    if (!(out.sigma_condition <= 1e12)) {
        reg.diagonal().array() += 1e-10 * sigma.trace() / double(sigma.rows());
        out.ridge_applied = true;
    }
    const double quad = mu.dot(reg.ldlt().solve(mu));
    out.denominator = 1.0 - quad;
    out.upsilon_h = upsilon;
    out.delta = rwpi_radius(upsilon, out.denominator, n_samples, delta0, mc);
    out.quantile = out.delta * double(n_samples);
    return out;
}

DeltaCalibration calibrate_delta(const PathSamples& samples, const NonRobustSolution& nrs,
                                 const EmpiricalMoments& mom, const MonomialEncoding& enc, double delta0,
                                 const MonteCarloOptions& mc) {
    return calibrate_delta(monomial_rows(samples, enc, nrs.positions), nrs, mom, delta0, mc);
}

AlphaCalibration calibrate_alpha_bar(const Eigen::MatrixXd& m_rows, const NonRobustSolution& nrs,
                                     const EmpiricalMoments& mom, double delta, double delta0,
                                     const MonteCarloOptions& mc) {
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta0 must lie in (0, 1)");
    if (delta < 0.0) throw Error(ErrorCode::InvalidArgument, "delta must be >= 0");
    if (delta == 0.0) throw Error(ErrorCode::ZeroRadius, "delta = 0 leaves s0 and s0' undefined");
    const double norm = nrs.coefficients.values().norm();
    if (norm == 0.0) throw Error(ErrorCode::ZeroNorm, "|A*| = 0");
    const EmpiricalMoments local = restrict_moments(mom, nrs.positions);
    const Eigen::VectorXd a = local.restrict(nrs.coefficients.values());
    const Index n_samples = m_rows.rows();

    const Eigen::VectorXd proj = m_rows * a / norm;
    const double mean = proj.mean();
    AlphaCalibration out;
    out.upsilon_a = (proj.array() - mean).square().mean();

    std::mt19937_64 rng(mc.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(out.upsilon_a);
    std::vector<double> z(std::size_t(mc.draws));
    for (auto& v : z) v = sd * normal(rng);
    // smallest s with P(Z~ >= sqrt(delta N)(1 - s)) >= 1 - delta0: the threshold is the
    // (floor(mc delta0) + 1)-th smallest draw
    const auto j = std::min<std::size_t>(std::size_t(std::floor(double(mc.draws) * delta0 + 1e-9)), z.size() - 1);
    std::nth_element(z.begin(), z.begin() + std::ptrdiff_t(j), z.end());
    out.z_quantile = z[j];

    const double root = std::sqrt(delta * double(n_samples));
    const double radius = std::sqrt(delta) * norm;
    out.s0 = 1.0 - out.z_quantile / root;
    out.s0_prime = (nrs.target + radius - a.dot(local.mean)) / radius;
    out.alpha_bar = nrs.target - radius * std::max(out.s0, out.s0_prime);
    return out;
}

AlphaCalibration calibrate_alpha_bar(const PathSamples& samples, const NonRobustSolution& nrs,
                                     const EmpiricalMoments& mom, const MonomialEncoding& enc, double delta,
                                     double delta0, const MonteCarloOptions& mc) {
    return calibrate_alpha_bar(monomial_rows(samples, enc, nrs.positions), nrs, mom, delta, delta0, mc);
}

CalibrationResult calibrate(const PathSamples& samples, const MonomialEncoding& enc, double target, double delta0,
                            const MonteCarloOptions& mc) {
    const EmpiricalMoments mom = free_moments(samples, enc);
    CalibrationResult out{solve_nonrobust(mom, enc, target), {}, {}, delta0};
    const Eigen::MatrixXd rows = monomial_rows(samples, enc, out.nonrobust.positions);
    out.delta = calibrate_delta(rows, out.nonrobust, mom, delta0, mc);
    if (out.delta.delta > 0.0) {
        out.alpha = calibrate_alpha_bar(rows, out.nonrobust, mom, out.delta.delta, delta0, mc);
    } else {
        out.alpha.alpha_bar = -std::numeric_limits<double>::infinity();
    }
    return out;
}

double default_target(const Eigen::MatrixXd& daily_returns, int periods) {
    if (daily_returns.rows() == 0) throw Error(ErrorCode::TooFewRows, "empty return window");
    return double(periods) * daily_returns.rowwise().mean().mean();
}

}  // namespace mvdro
