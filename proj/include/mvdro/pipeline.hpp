#pragma once

/**
 * @file pipeline.hpp
 * @brief Typed settings and the calibrate -> optimize -> backtest -> report
 *        orchestration behind the command-line tool.
 */

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvdro/backtest.hpp"
#include "mvdro/baselines.hpp"
#include "mvdro/calibration.hpp"
#include "mvdro/config.hpp"
#include "mvdro/market_data.hpp"
#include "mvdro/reporting.hpp"
#include "mvdro/robust.hpp"

namespace mvdro {

struct Settings {
    std::filesystem::path data_path;
    std::vector<int> horizons{1, 2};
    int order = 1;
    double delta0 = 0.05;
    std::uint64_t seed = 20240101;
    std::int64_t mc_draws = 200000;
    std::optional<double> target;  // lambda; default T * mean equal-weighted daily return
    BudgetMode budget = BudgetMode::Pathwise;
    WindowMode windowing = WindowMode::Sliding;

    std::vector<std::string> strategies{"robust", "equal_weighted", "markowitz", "um", "nc", "sp"};
    double gamma = 4.0;
    double delta_um = 1.96;
    double nc_lambda = 2.0;
    double nc_alpha = 4.0;
    double sp_tau = 500.0;
    std::optional<double> sp_rho;

    double cost_rate = 0.002;
    std::vector<bool> cost_flags{false, true};
    double threshold = 0.05;

    Eigen::Index window_days = 500;
    std::optional<Eigen::Index> test_days;
    std::vector<std::string> start_dates;  // first test day of each run; default right after the window
    std::filesystem::path output_dir = "out";
};

/// Reads and validates every known key; errors name the offending key.
Settings settings_from(const Config& cfg);

/// Keys understood by settings_from.
const std::vector<std::string>& known_keys();

struct RobustFit {
    int periods = 1;
    double target = 0.0;
    CalibrationResult calibration;
    RobustSolution solution;
};

RobustFit fit_robust(const Eigen::MatrixXd& estimation, int periods, const Settings& s);

/// Estimation and test windows of one run.
struct RunWindow {
    std::string start;
    Eigen::MatrixXd estimation;
    Eigen::MatrixXd test;
    std::vector<std::string> test_dates;
};

std::vector<RunWindow> run_windows(const ReturnsPanel& returns, const Settings& s);

/// Target schedule of a baseline strategy over `days` test days.
TargetSchedule baseline_schedule(const std::string& name, const Eigen::MatrixXd& estimation, Eigen::Index days,
                                 const Settings& s);

struct StrategyRun {
    std::string label;  // e.g. robust_T2, markowitz
    std::string start;
    bool costs = false;
    int periods = 1;
    BacktestReport report;
    std::vector<std::string> dates;

    std::string key() const { return label + "_" + start + (costs ? "_costs" : "_nocosts"); }
};

struct CompareOutput {
    std::vector<StrategyRun> runs;
    std::vector<MetricsRow> metrics;
    std::vector<MetricsRow> post_warmup;
    std::map<std::string, RollingSeries> rolling;
    std::vector<RobustFit> fits;
};

CompareOutput run_compare(const ReturnsPanel& returns, const Settings& s);

/// metrics.csv, metrics_post_warmup.csv, rolling_<key>.csv, returns_<key>.csv and events_<key>.csv.
void write_compare(const CompareOutput& out, const std::filesystem::path& dir);

/// Daily returns file of one run: date,return,wealth.
void write_returns_csv(const StrategyRun& run, const std::filesystem::path& path);

/// Rebuilds metrics and rolling series from every returns_<key>.csv in `dir`.
std::pair<std::vector<MetricsRow>, std::map<std::string, RollingSeries>> report_from_returns(
    const std::filesystem::path& dir);

}  // namespace mvdro
