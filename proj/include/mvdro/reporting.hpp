#pragma once

/**
 * @file reporting.hpp
 * @brief Performance metrics and CSV output.
 *
 * Sharpe ratios are annualized with sqrt(252), use the population standard
 * deviation and a zero risk-free rate.
 */

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mvdro {

inline constexpr int kTradingDays = 252;

struct MetricsRow {
    std::string strategy;
    std::string start;
    double mean = 0.0;
    double std = 0.0;
    double sharpe = 0.0;
    bool costs = false;
};

/// Arithmetic mean and population standard deviation of `r`.
std::pair<double, double> mean_and_std(const Eigen::Ref<const Eigen::VectorXd>& r);

double annualized_sharpe(double mean, double std);

/// Throws SeriesTooShort below two returns and ZeroVolatility when std = 0.
MetricsRow summary_metrics(const Eigen::VectorXd& returns, const std::string& strategy = "",
                           const std::string& start = "", bool costs = false);

struct RollingSeries {
    std::vector<std::string> dates;  // date closing each window (may be empty)
    Eigen::VectorXd values;          // NaN where undefined
    std::vector<bool> undefined;     // window std = 0

    Eigen::Index size() const { return values.size(); }
};

/// One value per full window; `dates`, when given, label the last day of each window.
RollingSeries rolling_sharpe(const Eigen::VectorXd& returns, Eigen::Index window = kTradingDays,
                             const std::vector<std::string>& dates = {});

std::string format_fixed(double v, int decimals = 9);

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);
void write_rolling_csv(const RollingSeries& series, const std::filesystem::path& path);
RollingSeries read_rolling_csv(const std::filesystem::path& path);

/// metrics.csv plus one rolling_<strategy>.csv per entry of `series`.
void write_report(const std::vector<MetricsRow>& rows, const std::map<std::string, RollingSeries>& series,
                  const std::filesystem::path& out_dir);

}  // namespace mvdro
