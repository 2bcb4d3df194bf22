// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mvdro/backtest.hpp"
#include "mvdro/baselines.hpp"
#include "mvdro/calibration.hpp"
#include "mvdro/reporting.hpp"
#include "mvdro/robust.hpp"
#include "oracles.hpp"

using namespace mvdro;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CoefficientVector random_coefficients(std::mt19937_64& rng, const MonomialEncoding& enc) {
    VectorXd v = oracle::gaussian_vector(rng, enc.dim());
    for (Index p = 0; p < enc.dim(); ++p)
        if (enc.masked(p)) v[p] = 0.0;
    return CoefficientVector(enc, v);
}

// ---------------------------------------------------------------------------

Outcome sharpe_self_consistency() {
    struct Row { const char* table; double mean, std, sharpe; };
    // published (daily mean, daily std, annualized Sharpe) triples, two or more per table
    const std::vector<Row> rows{
        {"2", 0.000385135, 0.007563152, 0.808371140}, {"2", 0.000560395, 0.014345112, 0.620141254},
        {"2", 0.000566047, 0.014870618, 0.604260345}, {"2", 0.000595641, 0.009098311, 1.039260405},
        {"3", 0.000562507, 0.014862114, 0.600824808}, {"3", 0.000584489, 0.009120416, 1.017330936},
        {"3", 0.000545436, 0.014333250, 0.604086435}, {"4", 0.000521979, 0.009156240, 0.904975460},
        {"4", 0.000548045, 0.013289725, 0.654637011}, {"4", 0.000447016, 0.007866766, 0.902044465},
        {"5", 0.000514421, 0.009149157, 0.892561938}, {"5", 0.000533860, 0.013281575, 0.638084474},
        {"5", 0.000449246, 0.007868584, 0.906335002}, {"6", 0.000647658, 0.009150105, 1.123620969},
        {"6", 0.000552433, 0.009214212, 0.951747573}, {"7", 0.000647608, 0.009162976, 1.121955506},
        {"7", 0.000548167, 0.009224016, 0.943394049},
    };
    double worst = 0.0;
    for (const Row& r : rows) worst = std::max(worst, std::abs(annualized_sharpe(r.mean, r.std) - r.sharpe));
    return {worst <= 2e-3, std::to_string(rows.size()) + " rows, max |diff| " + fmt("%.2e", worst)};
}

Outcome dual_primal_equivalence() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    const int instances = 60;
    for (int k = 0; k < instances; ++k) {
        const Index dim = 1 + k % 3, n = 2 + (k / 3) % 2;
        const MatrixXd support = oracle::gaussian(rng, n, dim);
        const VectorXd a = oracle::gaussian_vector(rng, dim);
        const double delta = std::exp(oracle::uniform(rng, std::log(1e-3), std::log(2.0)));
        const double d = dual_objective(a, moments_from_rows(support).variance(), delta);
        const double grid = oracle::grid_worst_variance(support, a, delta);
        worst = std::max(worst, std::abs(d * d - grid) / (d * d));
    }
    return {worst <= 5e-3, std::to_string(instances) + " instances (dim <= 3, N <= 3), max rel err " +
                               fmt("%.2e", worst)};
}

Outcome worst_case_mean_forms() {
    std::mt19937_64 rng(7);
    double gamma_err = 0.0, grid_err = 0.0;
    for (int k = 0; k < 40; ++k) {
        const Index dim = 1 + k % 4, n = 1 + k % 5;
        const MatrixXd support = oracle::gaussian(rng, n, dim);
        const VectorXd a = oracle::gaussian_vector(rng, dim);
        const double delta = oracle::uniform(rng, 0.0, 1.0);
        const VectorXd mean = support.colwise().mean().transpose();
        const double closed = worst_case_mean(a, mean, delta);
        const double gamma_form = (support * a).mean() - oracle::gamma_penalty(a.norm(), delta);
        gamma_err = std::max(gamma_err, std::abs(closed - gamma_form));
    }
    for (int k = 0; k < 10; ++k) {
        const Index n = 2 + k % 2;
        const MatrixXd support = oracle::gaussian(rng, n, 2);
        const VectorXd a = oracle::gaussian_vector(rng, 2);
        const double delta = oracle::uniform(rng, 0.01, 0.5);
        const double closed = worst_case_mean(a, moments_from_rows(support).mean, delta);
        grid_err = std::max(grid_err, std::abs(closed - oracle::grid_worst_mean_2d(support, a, delta)));
    }
    return {gamma_err <= 1e-10 && grid_err <= 1e-3,
            "gamma form max err " + fmt("%.2e", gamma_err) + ", primal grid max err " + fmt("%.2e", grid_err)};
}

Outcome kkt_contract() {
    std::mt19937_64 rng(11);
    double worst_res = 0.0, worst_budget = 0.0, worst_mean = 0.0;
    int solved = 0;
    while (solved < 100) {
        const int n = 1 + int(rng() % 3), T = 1 + int(rng() % 3);
        if (n == 1 && T == 1) continue;
        const int order = (n * T <= 4 && rng() % 2) ? 2 : 1;
        const MonomialEncoding enc = build_encoding(n, T, order);
        const double sd = solved % 2 ? 0.01 : 0.3;
        const Index rows = 3 * Index(enc.free_positions().size()) + 60;
        const PathSamples s = build_path_samples(oracle::gaussian(rng, rows + T - 1, n, 0.1 * sd, sd), T);
        const EmpiricalMoments mom = free_moments(s, enc);
        const double target = double(T) * 0.1 * sd * oracle::uniform(rng, 0.5, 1.5);
        const NonRobustSolution sol = solve_nonrobust(mom, enc, target);
        worst_res = std::max(worst_res, kkt_residual(mom, sol).cwiseAbs().maxCoeff());
        for (int t = 1; t <= T; ++t)
            worst_budget = std::max(worst_budget, std::abs(sol.coefficients.constant_terms(t).sum() - 1.0));
        worst_mean = std::max(worst_mean, std::abs(mom.restrict(sol.coefficients.values()).dot(mom.mean) - target));
        ++solved;
    }
    return {worst_res <= 1e-8 && worst_budget <= 1e-8 && worst_mean <= 1e-8,
            "100 solves, max residual " + fmt("%.2e", worst_res) + ", budget " + fmt("%.2e", worst_budget) +
                ", mean " + fmt("%.2e", worst_mean)};
}

Outcome rwpi_scaling() {
    const MonomialEncoding enc = build_encoding(2, 1, 1);
    const Index base = 500;
    double ratio = 0.0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        const MatrixXd r1 = oracle::gaussian(rng, base, 2, 5e-4, 0.01);
        const MatrixXd r2 = oracle::gaussian(rng, 2 * base, 2, 5e-4, 0.01);
        const MonteCarloOptions mc{100000, std::uint64_t(seed + 1)};
        const double d1 = calibrate(build_path_samples(r1, 1), enc, 1e-3, 0.05, mc).delta.delta;
        const double d2 = calibrate(build_path_samples(r2, 1), enc, 1e-3, 0.05, mc).delta.delta;
        ratio += d2 / d1;
    }
    ratio /= seeds;

    const double sigma2 = 0.7, den = 0.9, delta0 = 0.05;
    const Index n = 400;
    const double mc_value =
        rwpi_radius(MatrixXd::Constant(1, 1, sigma2), den, n, delta0, MonteCarloOptions{1000000, 5});
    const double exact =
        sigma2 * boost::math::quantile(boost::math::chi_squared(1.0), 1.0 - delta0) / (4.0 * den * double(n));
    const double rel = std::abs(mc_value / exact - 1.0);
    return {ratio >= 0.4 && ratio <= 0.6 && rel <= 0.02,
            "mean ratio " + fmt("%.4f", ratio) + " over 20 seeds, chi-square rel err " + fmt("%.2e", rel)};
}

Outcome zero_reduction_equivalence() {
    std::mt19937_64 rng(31);
    double dual_err = 0.0, value_err = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int n = 1 + k % 3, T = 2 + (k / 3) % 2;
        const int order = n * T <= 4 && k % 2 ? 2 : 1;
        const MonomialEncoding enc = build_encoding(n, T, order);
        const PathSamples s = build_path_samples(oracle::gaussian(rng, 40 + T - 1, n, 0.05, 0.3), T);
        RobustProblem prob{enc, empirical_moments(s, enc), oracle::uniform(rng, 0.01, 0.2),
                           -std::numeric_limits<double>::infinity(), BudgetMode::Pathwise};
        const ReducedProblem red = reduce_zero_components(prob);

        const CoefficientVector a = random_coefficients(rng, enc);
        const double full_d = dual_objective(a, prob.mom, prob.delta);
        const double red_d = dual_objective(a, red.problem.mom, prob.delta);
        dual_err = std::max(dual_err, std::abs(full_d - red_d) / std::max(1.0, full_d));

        if (k % 4 == 3) {
            // a binding floor halfway between the unconstrained and the best worst-case mean
            const RobustSolution free = solve_robust(prob);
            const double best = max_worst_case_mean(to_conic(prob, Representation::Reduced));
            if (std::isfinite(best)) prob.alpha_bar = 0.5 * (free.worst_case_mean + best);
        }
        double v_red = 0.0, v_full = 0.0;
        try {
            v_red = solve_robust(prob).objective;
            v_full = solve_robust(prob, std::nullopt, SolverOptions{Representation::Full}).objective;
        } catch (const Error& e) {
            throw Error(e.code(), "instance " + std::to_string(k) + " (n=" + std::to_string(n) + ", T=" +
                                      std::to_string(T) + ", order " + std::to_string(order) + "): " + e.what());
        }
        value_err = std::max(value_err, std::abs(v_red - v_full) / std::max(1.0, v_red));
    }
    return {dual_err <= 1e-12 && value_err <= 1e-12,
            "100 instances, dual diff " + fmt("%.2e", dual_err) + ", optimal value diff " + fmt("%.2e", value_err)};
}

Outcome predictability() {
    std::mt19937_64 rng(41);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const int n = 1 + int(rng() % 3), T = 2 + int(rng() % 3);
        const int order = 1 + int(rng() % 2);
        const MonomialEncoding enc = build_encoding(n, T, order);
        const CoefficientVector a = random_coefficients(rng, enc);
        const VectorXd path = oracle::gaussian_vector(rng, enc.path_dim(), 0.05);
        const int t = 1 + int(rng() % unsigned(T));
        VectorXd perturbed = path;
        for (int p = t; p <= T; ++p)
            for (int i = 1; i <= n; ++i) perturbed[enc.path_index(i, p)] += oracle::uniform(rng, -1.0, 1.0);
        const VectorXd w0 = strategy_weights(a, path, t);
        const VectorXd w1 = strategy_weights(a, perturbed, t);
        worst = std::max(worst, (w0 - w1).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, "1000 pairs, max change " + fmt("%.2e", worst)};
}

Outcome backtest_ledger() {
    const oracle::HandLedger hand;
    MatrixXd r(3, 2);
    for (int d = 0; d < 3; ++d) r.row(d) << hand.returns[d][0], hand.returns[d][1];
    const BacktestReport rep = run_backtest(constant_schedule(Eigen::Vector2d(0.5, 0.5), 3), r);
    bool exact = rep.events.size() == 1 && rep.events[0].day == 2 && rep.events[0].notional == hand.notional &&
                 rep.events[0].cost == hand.cost && rep.total_cost() == hand.cost;
    for (int d = 0; d < 4; ++d) exact = exact && rep.wealth[d] == hand.wealth[d];
    for (int d = 0; d < 3; ++d) exact = exact && rep.held(d, 0) == hand.held[d][0] && rep.held(d, 1) == hand.held[d][1];

    std::mt19937_64 rng(51);
    double hold_err = 0.0;
    bool monotone = true;
    int with_trades = 0;
    for (int k = 0; k < 100; ++k) {
        const Index n = 2 + k % 4, days = 120;
        const MatrixXd ret = oracle::gaussian(rng, days, n, 3e-4, 0.015);
        TargetSchedule sched;
        if (k % 2) {
            VectorXd w = oracle::gaussian_vector(rng, n).cwiseAbs();
            sched = constant_schedule(w / w.sum(), days);
        } else {
            // a two-period strategy with random history terms around equal weights
            const MonomialEncoding enc = build_encoding(int(n), 2, 1);
            VectorXd v = VectorXd::Zero(enc.dim());
            v.head(enc.path_dim()).setConstant(1.0 / double(n));
            for (Index p = enc.path_dim(); p < enc.dim(); ++p)
                if (!enc.masked(p)) v[p] = oracle::uniform(rng, -2.0, 2.0);
            sched = target_schedule(CoefficientVector(enc, v), ret);
        }
        const BacktestReport hold = run_backtest(sched, ret, BacktestConfig{1e300, 0.002, true});
        const VectorXd growth = (1.0 + ret.array()).colwise().prod().transpose();
        const double expected = sched.initial.dot(growth) + (1.0 - sched.initial.sum());
        hold_err = std::max(hold_err, std::abs(hold.final_wealth() - expected) + (hold.events.empty() ? 0.0 : 1.0));

        const BacktestReport on = run_backtest(sched, ret, BacktestConfig{0.05, 0.002, true});
        const BacktestReport off = run_backtest(sched, ret, BacktestConfig{0.05, 0.002, false});
        if (on.events.empty()) {
            monotone = monotone && on.final_wealth() == off.final_wealth();
        } else {
            ++with_trades;
            monotone = monotone && on.final_wealth() < off.final_wealth();
        }
        for (Index d = 1; d < days; ++d) monotone = monotone && on.cumulative_costs[d] >= on.cumulative_costs[d - 1];
    }
    return {exact && hold_err <= 1e-12 && monotone,
            std::string("hand ledger ") + (exact ? "bit-exact" : "MISMATCH") + ", no-trade err " +
                fmt("%.2e", hold_err) + ", cost monotone on 100 paths (" + std::to_string(with_trades) +
                " with trades): " + (monotone ? "yes" : "no")};
}

Outcome baseline_oracles() {
    std::mt19937_64 rng(61);
    const VectorXd mk = markowitz(Eigen::Vector2d(0.2, 0.1), MatrixXd::Identity(2, 2), 4.0);
    const double mk_err = (mk - Eigen::Vector2d(0.5125, 0.4875)).cwiseAbs().maxCoeff();

    auto window = [&](Index d, Index n, double mean, double sd) {
        MatrixXd r = oracle::gaussian(rng, d, n, mean, sd);
        r.colwise() += oracle::gaussian_vector(rng, d, sd);
        return single_period_moments(r);
    };

    double um_gap = -1.0;
    for (int k = 0; k < 5; ++k) {
        const SinglePeriodMoments m = window(60, 2, 2e-3, 0.02);
        const double got = um_objective(m, robust_um(m), 4.0, 1.96);
        double best = -std::numeric_limits<double>::infinity();
        for (int g = 0; g <= 500000; ++g) {
            const double w1 = -2.0 + 5.0 * g / 500000.0;
            best = std::max(best, um_objective(m, Eigen::Vector2d(w1, 1.0 - w1), 4.0, 1.96));
        }
        um_gap = std::max(um_gap, best - got);
    }

    double nc_gap = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 5; ++k) {
        const MatrixXd b = oracle::gaussian(rng, 5, 3);
        const MatrixXd cov = b.transpose() * b / 5.0;
        const NcResult r = robust_nc(cov, 2.0, 4.0);
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s < 10000; ++s) {
            const double w1 = oracle::uniform(rng, -2, 2), w2 = oracle::uniform(rng, -2, 2);
            best = std::min(best, nc_objective(cov, Eigen::Vector3d(w1, w2, 1 - w1 - w2), 2.0, 4.0));
        }
        nc_gap = std::max(nc_gap, r.objective - best);
    }

    double sp_gap = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 5; ++k) {
        const SinglePeriodMoments m = window(50, 2, 1e-3, 0.02);
        const SpResult r = robust_sp(m);
        auto g = [&](double w1) {
            const Eigen::Vector2d w(w1, 1.0 - w1);
            return w.dot(m.mean) - r.eps.dot(w.cwiseAbs()) - r.rho;
        };
        double best = std::numeric_limits<double>::infinity();
        const int cells = 1000000;
        double x0 = -50.0, g0 = g(x0);
        for (int c = 1; c <= cells; ++c) {
            const double x1 = -50.0 + 100.0 * c / cells, g1 = g(x1);
            if (g0 == 0.0 || g0 * g1 < 0.0) {
                double lo = x0, hi = x1, glo = g0;
                for (int it = 0; it < 200 && g0 != 0.0; ++it) {
                    const double mid = 0.5 * (lo + hi), gm = g(mid);
                    if ((gm < 0) == (glo < 0)) lo = mid, glo = gm;
                    else hi = mid;
                }
                const double w1 = g0 == 0.0 ? x0 : 0.5 * (lo + hi);
                best = std::min(best, sp_objective(m, Eigen::Vector2d(w1, 1.0 - w1), r.rho, 500.0));
            }
            x0 = x1;
            g0 = g1;
        }
        sp_gap = std::max(sp_gap, (r.objective - best) / (1.0 + best));
    }
    const bool pass = mk_err <= 1e-9 && um_gap <= 1e-6 && nc_gap <= 0.0 && sp_gap <= 1e-5;
    return {pass, "markowitz err " + fmt("%.1e", mk_err) + ", UM gap " + fmt("%.1e", um_gap) + ", NC gap " +
                      fmt("%.2e", nc_gap) + ", SP gap " + fmt("%.1e", sp_gap)};
}

Outcome monotonicity() {
    std::mt19937_64 rng(71);
    double worst_drop = 0.0;
    for (int k = 0; k < 10; ++k) {
        const int n = 1 + k % 3, T = 1 + k % 2;
        const MonomialEncoding enc = build_encoding(n, T, 1);
        const PathSamples s = build_path_samples(oracle::gaussian(rng, 60 + T - 1, n, 0.05, 0.3), T);
        RobustProblem prob{enc, free_moments(s, enc), 0.0, -std::numeric_limits<double>::infinity(),
                           BudgetMode::Pathwise};
        double last = -std::numeric_limits<double>::infinity();
        for (int g = 0; g < 10; ++g) {
            prob.delta = 0.05 * g;
            const double v = solve_robust(prob).objective;
            worst_drop = std::max(worst_drop, last - v);
            last = v;
        }
    }
    double homog = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Index dim = 1 + k % 6;
        const MatrixXd rows = oracle::gaussian(rng, 12, dim);
        const MatrixXd var = moments_from_rows(rows).variance();
        const VectorXd a = oracle::gaussian_vector(rng, dim);
        const double c = std::exp(oracle::uniform(rng, -3.0, 3.0));
        const double delta = oracle::uniform(rng, 0.0, 1.0);
        const double lhs = dual_objective(VectorXd(c * a), var, delta);
        const double rhs = c * dual_objective(a, var, delta);
        homog = std::max(homog, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
    return {worst_drop <= 0.0 && homog <= 1e-12,
            "max decrease over delta grid " + fmt("%.2e", worst_drop) + ", homogeneity err " + fmt("%.2e", homog)};
}

Outcome end_to_end() {
    namespace fs = std::filesystem;
    const fs::path out = fs::path(MVDRO_TEST_TMP) / "acceptance_compare";
    fs::remove_all(out);
    const fs::path cfg = fs::path(MVDRO_SOURCE_DIR) / "configs" / "compare_synthetic.cfg";
    const fs::path data = fs::path(MVDRO_SOURCE_DIR) / "data" / "synthetic_10x600.csv";
    const std::string cmd = std::string("\"") + MVDRO_CLI + "\" compare -c \"" + cfg.string() + "\" -s data.path=\"" +
                            data.string() + "\" -o \"" + out.string() + "\" > \"" + (out.string() + ".log") + "\" 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.c_str());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rc != 0) return {false, "compare exited with status " + std::to_string(rc)};

    const auto rows = read_metrics_csv(out / "metrics.csv");
    std::map<std::pair<std::string, bool>, double> std_of;
    bool finite = !rows.empty();
    for (const MetricsRow& m : rows) {
        finite = finite && std::isfinite(m.mean) && std::isfinite(m.std) && std::isfinite(m.sharpe);
        std_of[{m.strategy, m.costs}] = m.std;
    }
    const std::vector<std::string> labels{"robust_T1", "robust_T2", "equal_weighted", "markowitz", "um", "nc", "sp"};
    bool complete = rows.size() == labels.size() * 2;
    for (const auto& l : labels) complete = complete && std_of.count({l, false}) && std_of.count({l, true});

    int rolling_files = 0, returns_files = 0;
    bool parse_ok = true;
    for (const auto& e : fs::directory_iterator(out)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("rolling_", 0) == 0) {
            ++rolling_files;
            parse_ok = parse_ok && read_rolling_csv(e.path()).size() > 0;
        }
        if (name.rfind("returns_", 0) == 0) ++returns_files;
    }
    bool variance = complete;
    std::string ratio;
    for (bool costs : {false, true}) {
        if (!complete) break;
        const double t2 = std_of[{"robust_T2", costs}], ew = std_of[{"equal_weighted", costs}];
        variance = variance && t2 * t2 <= ew * ew;
        ratio += (costs ? ", costs on " : "var(T2)/var(EW): costs off ") + fmt("%.3f", t2 * t2 / (ew * ew));
    }
    const bool pass = secs < 600.0 && finite && complete && parse_ok && rolling_files == 14 && returns_files == 14 &&
                      variance;
    return {pass, fmt("%.1f s", secs) + ", " + std::to_string(rows.size()) + " metric rows, " +
                      std::to_string(rolling_files) + " rolling files, " + ratio};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Sharpe self-consistency with published rows", sharpe_self_consistency},
        {"dual-primal equivalence", dual_primal_equivalence},
        {"worst-case mean closed form", worst_case_mean_forms},
        {"KKT contract", kkt_contract},
        {"RWPI radius scaling and chi-square case", rwpi_scaling},
        {"full vs zero-reduced representation", zero_reduction_equivalence},
        {"predictability", predictability},
        {"backtest ledger oracle", backtest_ledger},
        {"baseline oracles", baseline_oracles},
        {"monotonicity suites", monotonicity},
        {"end-to-end compare on synthetic data", end_to_end},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("[%s] criterion %2zu: %s -- %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", k + 1,
                    criteria[k].first.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - std::size_t(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
