// Command-line front end: calibrate, optimize, backtest, compare, report.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "mvdro/pipeline.hpp"

using json = nlohmann::json;
using namespace mvdro;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
};

Settings load_settings(const Common& c) {
    Config cfg = c.config_path.empty() ? Config{} : Config::load(c.config_path);
    for (const std::string& o : c.overrides) cfg.apply_override(o);
    return settings_from(cfg);
}

ReturnsPanel load_returns(const Settings& s) { return compute_returns(load_prices(s.data_path)); }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void write_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedFile, path + ": " + e.what());
    }
}

json calibration_json(const RobustFit& fit, const ReturnsPanel& r, const Settings& s) {
    const CalibrationResult& c = fit.calibration;
    return {{"periods", fit.periods},
            {"order", s.order},
            {"tickers", r.tickers},
            {"seed", s.seed},
            {"draws", s.mc_draws},
            {"delta0", s.delta0},
            {"target", fit.target},
            {"delta", c.delta.delta},
            {"alpha_bar", c.alpha.alpha_bar},
            {"denominator", c.delta.denominator},
            {"quantile", c.delta.quantile},
            {"s0", c.alpha.s0},
            {"s0_prime", c.alpha.s0_prime},
            {"lambda0", c.nonrobust.lambda0},
            {"kkt_residual", c.nonrobust.kkt_residual},
            {"nonrobust_coefficients", to_std(c.nonrobust.coefficients.values())}};
}

json solution_json(const RobustSolution& sol, int periods, const RobustProblem& prob, const ReturnsPanel& r) {
    return {{"periods", periods},
            {"order", prob.enc.order()},
            {"tickers", r.tickers},
            {"delta", prob.delta},
            {"alpha_bar", prob.alpha_bar},
            {"objective", sol.objective},
            {"worst_case_mean", sol.worst_case_mean},
            {"return_constraint_active", sol.return_constraint_active},
            {"iterations", sol.iterations},
            {"coefficients", to_std(sol.coefficients.values())}};
}

double json_number(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::MalformedFile, std::string("missing field '") + key + "'");
    if (j[key].is_null()) return -std::numeric_limits<double>::infinity();
    return j[key].get<double>();
}

int exit_code(const Error& e) {
    switch (e.code()) {
    case ErrorCode::NonConvergence:
    case ErrorCode::CycleDetected:
        return 2;
    default:
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wasserstein-robust multiperiod mean-variance portfolios"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config_path, "key = value configuration file");
        sub->add_option("-s,--set", common.overrides, "override, key=value")->take_all();
    };

    int horizon = 0;
    std::string out_path, calib_path, coef_path, strategy, input_dir;
    std::string costs_flag;

    auto* calibrate_cmd = app.add_subcommand("calibrate", "data -> delta*, alpha_bar*, A*");
    add_common(calibrate_cmd);
    calibrate_cmd->add_option("-T,--horizon", horizon, "number of periods (default: first of horizon.T)");
    calibrate_cmd->add_option("-o,--out", out_path, "output JSON (stdout when omitted)");

    auto* optimize_cmd = app.add_subcommand("optimize", "moments + delta, alpha_bar -> A");
    add_common(optimize_cmd);
    optimize_cmd->add_option("-T,--horizon", horizon, "number of periods");
    optimize_cmd->add_option("--calibration", calib_path, "JSON written by calibrate (recomputed when omitted)");
    optimize_cmd->add_option("-o,--out", out_path, "output JSON (stdout when omitted)");

    auto* backtest_cmd = app.add_subcommand("backtest", "strategy + data + cost flag -> report");
    add_common(backtest_cmd);
    backtest_cmd->add_option("--strategy", strategy, "robust, equal_weighted, markowitz, um, nc or sp")->required();
    backtest_cmd->add_option("-T,--horizon", horizon, "periods of the robust strategy");
    backtest_cmd->add_option("--coefficients", coef_path, "JSON written by optimize (robust only)");
    backtest_cmd->add_option("--costs", costs_flag, "on or off (default: costs.enabled)");
    backtest_cmd->add_option("-o,--out", out_path, "output directory")->required();

    auto* compare_cmd = app.add_subcommand("compare", "every configured strategy and start date");
    add_common(compare_cmd);
    compare_cmd->add_option("-o,--out", out_path, "output directory (default: output.dir)");

    auto* report_cmd = app.add_subcommand("report", "returns_*.csv -> metrics and rolling Sharpe CSVs");
    report_cmd->add_option("-i,--input", input_dir, "directory holding returns_*.csv")->required();
    report_cmd->add_option("-o,--out", out_path, "output directory (default: the input directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (report_cmd->parsed()) {
            auto [rows, series] = report_from_returns(input_dir);
            write_report(rows, series, out_path.empty() ? input_dir : out_path);
            std::cerr << rows.size() << " metrics rows, " << series.size() << " rolling series\n";
            return 0;
        }

        const Settings s = load_settings(common);
        const ReturnsPanel returns = load_returns(s);
        const int T = horizon > 0 ? horizon : s.horizons.front();
        const RunWindow window = run_windows(returns, s).front();

        if (calibrate_cmd->parsed()) {
            if (s.window_days < 2) throw Error(ErrorCode::ConfigError, "key 'window.days': must be >= 2");
            const MonomialEncoding enc = build_encoding(int(returns.assets()), T, s.order);
            const PathSamples samples = build_path_samples(window.estimation, T, s.windowing);
            const double target = s.target ? *s.target : default_target(window.estimation, T);
            CalibrationResult c = calibrate(samples, enc, target, s.delta0, {s.mc_draws, s.seed});
            const RobustFit fit{T, target, std::move(c),
                                RobustSolution{CoefficientVector(enc), 0, 0, false, true, 0, 0}};
            write_json(calibration_json(fit, returns, s), out_path);
            return 0;
        }

        if (optimize_cmd->parsed()) {
            const MonomialEncoding enc = build_encoding(int(returns.assets()), T, s.order);
            const PathSamples samples = build_path_samples(window.estimation, T, s.windowing);
            double delta = 0.0, alpha_bar = 0.0;
            std::optional<CoefficientVector> init;
            if (!calib_path.empty()) {
                const json c = read_json(calib_path);
                if (c.value("periods", 0) != T) {
                    throw Error(ErrorCode::ConfigError, "key 'horizon.T': calibration file was built for T = " +
                                                            std::to_string(c.value("periods", 0)));
                }
                delta = json_number(c, "delta");
                alpha_bar = json_number(c, "alpha_bar");
            } else {
                const double target = s.target ? *s.target : default_target(window.estimation, T);
                const CalibrationResult c = calibrate(samples, enc, target, s.delta0, {s.mc_draws, s.seed});
                delta = c.delta.delta;
                alpha_bar = c.alpha.alpha_bar;
                init = c.nonrobust.coefficients;
            }
            const RobustProblem prob{enc, free_moments(samples, enc), delta, alpha_bar, s.budget};
            const RobustSolution sol = solve_robust(prob, init);
            write_json(solution_json(sol, T, prob, returns), out_path);
            return 0;
        }

        if (backtest_cmd->parsed()) {
            BacktestConfig cfg{s.threshold, s.cost_rate, s.cost_flags.back()};
            if (costs_flag == "on") cfg.costs = true;
            else if (costs_flag == "off") cfg.costs = false;
            else if (!costs_flag.empty()) throw Error(ErrorCode::ConfigError, "--costs expects on or off");
            TargetSchedule schedule;
            std::string label = strategy;
            if (strategy == "robust") {
                label = "robust_T" + std::to_string(T);
                if (!coef_path.empty()) {
                    const json j = read_json(coef_path);
                    const int periods = j.value("periods", 0);
                    const MonomialEncoding enc =
                        build_encoding(int(returns.assets()), periods, j.value("order", 1));
                    const std::vector<double> v = j.at("coefficients").get<std::vector<double>>();
                    const CoefficientVector a(enc, Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
                    label = "robust_T" + std::to_string(periods);
                    schedule = target_schedule(a, window.test);
                } else {
                    schedule = target_schedule(fit_robust(window.estimation, T, s).solution.coefficients, window.test);
                }
            } else {
                schedule = baseline_schedule(strategy, window.estimation, window.test.rows(), s);
            }
            StrategyRun run{label, window.start, cfg.costs, schedule.periods, run_backtest(schedule, window.test, cfg),
                            window.test_dates};
            CompareOutput out;
            out.metrics.push_back(summary_metrics(run.report.returns, label, window.start, cfg.costs));
            if (run.report.returns.size() >= kTradingDays) {
                out.rolling[run.key()] = rolling_sharpe(run.report.returns, kTradingDays, run.dates);
            }
            if (run.report.returns.size() - run.periods >= 2) {
                out.post_warmup.push_back(summary_metrics(
                    run.report.returns.tail(run.report.returns.size() - run.periods), label, window.start, cfg.costs));
            }
            out.runs.push_back(std::move(run));
            write_compare(out, out_path);
            const StrategyRun& r = out.runs.front();
            std::cerr << label << ": final wealth " << r.report.final_wealth() << ", " << r.report.events.size()
                      << " rebalances, costs " << r.report.total_cost() << '\n';
            return 0;
        }

        if (compare_cmd->parsed()) {
            const auto t0 = std::chrono::steady_clock::now();
            const CompareOutput out = run_compare(returns, s);
            const std::filesystem::path dir = out_path.empty() ? s.output_dir : std::filesystem::path(out_path);
            write_compare(out, dir);
            for (const RobustFit& f : out.fits) {
                std::cerr << "robust_T" << f.periods << ": delta* = " << f.calibration.delta.delta
                          << ", alpha_bar* = " << f.calibration.alpha.alpha_bar
                          << ", objective = " << f.solution.objective << '\n';
            }
            for (const MetricsRow& m : out.metrics) {
                std::fprintf(stderr, "%-16s %s costs=%d mean=%.9f std=%.9f sharpe=%.4f\n", m.strategy.c_str(),
                             m.start.c_str(), int(m.costs), m.mean, m.std, m.sharpe);
            }
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cerr << "wrote " << dir.string() << " in " << secs << " s\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
