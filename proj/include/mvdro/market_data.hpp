#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "mvdro/error.hpp"

namespace mvdro {

using Date = std::chrono::year_month_day;

Date parse_date(const std::string& iso);
std::string format_date(const Date& d);

/// Adjusted closing prices, one row per date and one column per ticker.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd prices;

    Eigen::Index rows() const { return prices.rows(); }
    Eigen::Index assets() const { return prices.cols(); }
};

/// Simple returns. dates[k] is the date at which returns.row(k) is realized.
struct ReturnsPanel {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd returns;

    Eigen::Index rows() const { return returns.rows(); }
    Eigen::Index assets() const { return returns.cols(); }

    /// Rows [first, first + count).
    ReturnsPanel slice(Eigen::Index first, Eigen::Index count) const;
    /// Index of the first row dated on or after `d`; rows() when none.
    Eigen::Index lower_bound(const Date& d) const;
};

/// N realizations of the T-period path, one per row, each period-major (length nT).
struct PathSamples {
    int assets = 0;
    int periods = 0;
    Eigen::MatrixXd samples;

    Eigen::Index count() const { return samples.rows(); }
};

enum class MissingDataPolicy { DropRow, Error };
enum class WindowMode { Sliding, Disjoint };

/// Validates ordering and positivity; throws on violation.
void validate(const PricePanel& panel);

PricePanel load_prices(const std::filesystem::path& path, MissingDataPolicy policy = MissingDataPolicy::DropRow);
PricePanel parse_prices(std::istream& in, MissingDataPolicy policy = MissingDataPolicy::DropRow,
                        const std::string& source = "<stream>");

ReturnsPanel compute_returns(const PricePanel& panel);

PathSamples build_path_samples(const ReturnsPanel& returns, int periods, WindowMode mode = WindowMode::Sliding);
PathSamples build_path_samples(const Eigen::MatrixXd& returns, int periods, WindowMode mode = WindowMode::Sliding);

}  // namespace mvdro
