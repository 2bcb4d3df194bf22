#include "mvdro/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace mvdro {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "': " + what);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "data.path",         "horizon.T",        "order",           "delta0",          "seed",
        "mc.draws",          "strategy.list",    "strategy.target", "strategy.budget", "strategy.gamma",
        "strategy.delta_um", "strategy.nc_lambda", "strategy.nc_alpha", "strategy.sp_tau", "strategy.sp_rho",
        "costs.rate",        "costs.enabled",    "rebalance.threshold", "window.days", "window.mode",
        "test.days",         "start.dates",      "output.dir"};
    return keys;
}

Settings settings_from(const Config& cfg) {
    const std::set<std::string> known(known_keys().begin(), known_keys().end());
    for (const auto& [key, value] : cfg.entries()) {
        if (!known.count(key)) bad(key, "unknown key");
    }
    Settings s;
    s.data_path = cfg.get_string("data.path");

    s.horizons.clear();
    for (const std::string& t : cfg.get_list("horizon.T", {"1", "2"})) {
        int v = 0;
        try {
            v = std::stoi(t);
        } catch (const std::exception&) {
            bad("horizon.T", "'" + t + "' is not an integer");
        }
        if (v < 1) bad("horizon.T", "periods must be >= 1");
        s.horizons.push_back(v);
    }
    if (s.horizons.empty()) bad("horizon.T", "empty list");

    s.order = int(cfg.get_int("order", 1));
    if (s.order != 1 && s.order != 2) bad("order", "must be 1 or 2");
    s.delta0 = cfg.get_double("delta0", 0.05);
    if (!(s.delta0 > 0.0 && s.delta0 < 1.0)) bad("delta0", "must lie in (0, 1)");
    const long long seed = cfg.get_int("seed", 20240101);
    if (seed < 0) bad("seed", "must be >= 0");
    s.seed = std::uint64_t(seed);
    s.mc_draws = cfg.get_int("mc.draws", 200000);
    if (s.mc_draws < 100) bad("mc.draws", "must be >= 100");
    if (cfg.has("strategy.target")) s.target = cfg.get_double("strategy.target", 0.0);

    const std::string budget = cfg.get_string("strategy.budget", "pathwise");
    if (budget == "pathwise") s.budget = BudgetMode::Pathwise;
    else if (budget == "constant") s.budget = BudgetMode::Constant;
    else bad("strategy.budget", "expected pathwise or constant");

    const std::string mode = cfg.get_string("window.mode", "sliding");
    if (mode == "sliding") s.windowing = WindowMode::Sliding;
    else if (mode == "disjoint") s.windowing = WindowMode::Disjoint;
    else bad("window.mode", "expected sliding or disjoint");

    static const std::set<std::string> names{"robust", "equal_weighted", "markowitz", "um", "nc", "sp"};
    s.strategies = cfg.get_list("strategy.list", s.strategies);
    if (s.strategies.empty()) bad("strategy.list", "empty list");
    for (const std::string& n : s.strategies) {
        if (!names.count(n)) bad("strategy.list", "unknown strategy '" + n + "'");
    }
    s.gamma = cfg.get_double("strategy.gamma", 4.0);
    if (!(s.gamma > 0.0)) bad("strategy.gamma", "must be > 0");
    s.delta_um = cfg.get_double("strategy.delta_um", 1.96);
    if (s.delta_um < 0.0) bad("strategy.delta_um", "must be >= 0");
    s.nc_lambda = cfg.get_double("strategy.nc_lambda", 2.0);
    if (s.nc_lambda < 0.0) bad("strategy.nc_lambda", "must be >= 0");
    s.nc_alpha = cfg.get_double("strategy.nc_alpha", 4.0);
    if (s.nc_alpha < 0.0) bad("strategy.nc_alpha", "must be >= 0");
    s.sp_tau = cfg.get_double("strategy.sp_tau", 500.0);
    if (s.sp_tau < 0.0) bad("strategy.sp_tau", "must be >= 0");
    if (cfg.has("strategy.sp_rho")) s.sp_rho = cfg.get_double("strategy.sp_rho", 0.0);

    s.cost_rate = cfg.get_double("costs.rate", 0.002);
    if (s.cost_rate < 0.0) bad("costs.rate", "must be >= 0");
    const std::string costs = cfg.get_string("costs.enabled", "both");
    if (costs == "both") s.cost_flags = {false, true};
    else s.cost_flags = {cfg.get_bool("costs.enabled", true)};
    s.threshold = cfg.get_double("rebalance.threshold", 0.05);
    if (!(s.threshold > 0.0)) bad("rebalance.threshold", "must be > 0");

    const long long window = cfg.get_int("window.days", 500);
    if (window < 0) bad("window.days", "must be >= 0");
    s.window_days = Eigen::Index(window);
    if (cfg.has("test.days")) {
        const long long t = cfg.get_int("test.days", 0);
        if (t < 2) bad("test.days", "must be >= 2");
        s.test_days = Eigen::Index(t);
    }
    s.start_dates = cfg.get_list("start.dates", {});
    for (const std::string& d : s.start_dates) {
        try {
            parse_date(d);
        } catch (const Error&) {
            bad("start.dates", "'" + d + "' is not an ISO date");
        }
    }
    s.output_dir = cfg.get_string("output.dir", "out");
    return s;
}

RobustFit fit_robust(const Eigen::MatrixXd& estimation, int periods, const Settings& s) {
    const MonomialEncoding enc = build_encoding(int(estimation.cols()), periods, s.order);
    const PathSamples samples = build_path_samples(estimation, periods, s.windowing);
    const double target = s.target ? *s.target : default_target(estimation, periods);
    const MonteCarloOptions mc{s.mc_draws, s.seed};
    CalibrationResult calib = calibrate(samples, enc, target, s.delta0, mc);
    const RobustProblem prob{enc, free_moments(samples, enc), calib.delta.delta, calib.alpha.alpha_bar, s.budget};
    RobustSolution sol = solve_robust(prob, calib.nonrobust.coefficients);
    RobustFit fit{periods, target, std::move(calib), std::move(sol)};
    return fit;
}

std::vector<RunWindow> run_windows(const ReturnsPanel& returns, const Settings& s) {
    std::vector<Eigen::Index> starts;
    std::vector<std::string> labels;
    if (s.start_dates.empty()) {
        starts.push_back(s.window_days);
    } else {
        for (const std::string& d : s.start_dates) starts.push_back(returns.lower_bound(parse_date(d)));
    }
    std::vector<RunWindow> out;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const Eigen::Index first = starts[k];
        const std::string key = s.start_dates.empty() ? "window.days" : "start.dates";
        if (first < s.window_days) {
            bad(key, "only " + std::to_string(first) + " return rows precede the test start, window.days = " +
                         std::to_string(s.window_days));
        }
        const Eigen::Index avail = returns.rows() - first;
        const Eigen::Index days = s.test_days ? *s.test_days : avail;
        if (days < 2 || days > avail) {
            bad(s.test_days ? "test.days" : key,
                std::to_string(avail) + " return rows remain for the test window, need " +
                    std::to_string(std::max<Eigen::Index>(days, 2)));
        }
        RunWindow w;
        w.start = format_date(returns.dates[std::size_t(first)]);
        w.estimation = returns.returns.middleRows(first - s.window_days, s.window_days);
        w.test = returns.returns.middleRows(first, days);
        for (Eigen::Index r = 0; r < days; ++r) w.test_dates.push_back(format_date(returns.dates[std::size_t(first + r)]));
        out.push_back(std::move(w));
    }
    return out;
}

TargetSchedule baseline_schedule(const std::string& name, const Eigen::MatrixXd& estimation, Eigen::Index days,
                                 const Settings& s) {
    const Eigen::Index n = estimation.cols();
    if (name == "equal_weighted") return constant_schedule(equal_weighted(n), days);
    const SinglePeriodMoments mom = single_period_moments(estimation);
    if (name == "markowitz") return constant_schedule(markowitz(mom, s.gamma), days);
    if (name == "um") return constant_schedule(robust_um(mom, s.gamma, s.delta_um), days);
    if (name == "nc") return constant_schedule(robust_nc(mom, s.nc_lambda, s.nc_alpha).weights, days);
    if (name == "sp") {
        SpOptions opt;
        opt.tau = s.sp_tau;
        opt.rho = s.sp_rho;
        return constant_schedule(robust_sp(mom, opt).weights, days);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + name + "'");
}

CompareOutput run_compare(const ReturnsPanel& returns, const Settings& s) {
    CompareOutput out;
    const BacktestConfig base{s.threshold, s.cost_rate, true};
    for (const RunWindow& w : run_windows(returns, s)) {
        std::vector<std::pair<std::string, TargetSchedule>> schedules;
        for (const std::string& name : s.strategies) {
            if (name == "robust") {
                if (s.window_days < 2) bad("window.days", "the robust strategy needs an estimation window");
                for (int T : s.horizons) {
                    RobustFit fit = fit_robust(w.estimation, T, s);
                    schedules.emplace_back("robust_T" + std::to_string(T),
                                           target_schedule(fit.solution.coefficients, w.test));
                    out.fits.push_back(std::move(fit));
                }
            } else {
                if (name != "equal_weighted" && s.window_days < 2) {
                    bad("window.days", "strategy '" + name + "' needs an estimation window");
                }
                schedules.emplace_back(name, baseline_schedule(name, w.estimation, w.test.rows(), s));
            }
        }
        for (const auto& [label, schedule] : schedules) {
            for (bool costs : s.cost_flags) {
                BacktestConfig cfg = base;
                cfg.costs = costs;
                StrategyRun run{label, w.start, costs, schedule.periods, run_backtest(schedule, w.test, cfg),
                                w.test_dates};
                out.metrics.push_back(summary_metrics(run.report.returns, label, w.start, costs));
                const Eigen::Index skip = run.periods;
                if (run.report.returns.size() - skip >= 2) {
                    out.post_warmup.push_back(summary_metrics(
                        run.report.returns.tail(run.report.returns.size() - skip), label, w.start, costs));
                }
                if (run.report.returns.size() >= kTradingDays) {
                    out.rolling[run.key()] = rolling_sharpe(run.report.returns, kTradingDays, run.dates);
                }
                out.runs.push_back(std::move(run));
            }
        }
    }
    return out;
}

void write_returns_csv(const StrategyRun& run, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "# strategy=" << run.label << ",start=" << run.start << ",costs=" << (run.costs ? 1 : 0)
        << ",periods=" << run.periods << '\n';
    out << "date,return,wealth\n";
    char buf[64];
    for (Eigen::Index k = 0; k < run.report.returns.size(); ++k) {
        out << run.dates[std::size_t(k)];
        std::snprintf(buf, sizeof buf, ",%.17g", run.report.returns[k]);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", run.report.wealth[k + 1]);
        out << buf << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

void write_compare(const CompareOutput& out, const std::filesystem::path& dir) {
    write_report(out.metrics, out.rolling, dir);
    write_metrics_csv(out.post_warmup, dir / "metrics_post_warmup.csv");
    for (const StrategyRun& run : out.runs) {
        write_returns_csv(run, dir / ("returns_" + run.key() + ".csv"));
        auto ev = open_out(dir / ("events_" + run.key() + ".csv"));
        ev << "k,day,date,notional,cost\n";
        for (const RebalanceEvent& e : run.report.events) {
            ev << e.k << ',' << e.day << ',' << run.dates[std::size_t(e.day - 1)] << ',' << format_fixed(e.notional)
               << ',' << format_fixed(e.cost) << '\n';
        }
    }
}

std::pair<std::vector<MetricsRow>, std::map<std::string, RollingSeries>> report_from_returns(
    const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, "no such directory '" + dir.string() + "'");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("returns_", 0) == 0 && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::pair<std::vector<MetricsRow>, std::map<std::string, RollingSeries>> out;
    for (const auto& path : files) {
        std::ifstream in(path);
        std::string meta, header, line;
        std::getline(in, meta);
        std::getline(in, header);
        std::map<std::string, std::string> tags;
        if (meta.rfind("# ", 0) == 0) {
            std::stringstream ss(meta.substr(2));
            std::string kv;
            while (std::getline(ss, kv, ',')) {
                const auto eq = kv.find('=');
                if (eq != std::string::npos) tags[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
        }
        if (!tags.count("strategy") || header != "date,return,wealth") {
            throw Error(ErrorCode::MalformedFile, "unexpected header in '" + path.string() + "'");
        }
        std::vector<std::string> dates;
        std::vector<double> values;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos) {
                throw Error(ErrorCode::MalformedFile, "bad row in '" + path.string() + "'");
            }
            dates.push_back(line.substr(0, c1));
            values.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
        }
        const Eigen::VectorXd r = Eigen::Map<Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
        const bool costs = tags["costs"] == "1";
        out.first.push_back(summary_metrics(r, tags["strategy"], tags["start"], costs));
        if (r.size() >= kTradingDays) {
            const std::string key = path.stem().string().substr(std::string("returns_").size());
            out.second[key] = rolling_sharpe(r, kTradingDays, dates);
        }
    }
    return out;
}

}  // namespace mvdro
