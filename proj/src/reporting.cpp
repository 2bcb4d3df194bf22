#include "mvdro/reporting.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mvdro/error.hpp"

namespace mvdro {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    return in;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, const std::filesystem::path& path) {
    if (s == "nan" || s == "NaN" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedFile, "bad number '" + s + "' in " + path.string());
    }
}

}  // namespace

std::pair<double, double> mean_and_std(const Eigen::Ref<const Eigen::VectorXd>& r) {
    const double mean = r.mean();
    const double var = (r.array() - mean).square().mean();
    return {mean, std::sqrt(var)};
}

double annualized_sharpe(double mean, double std) { return std::sqrt(double(kTradingDays)) * mean / std; }

MetricsRow summary_metrics(const Eigen::VectorXd& returns, const std::string& strategy, const std::string& start,
                           bool costs) {
    if (returns.size() < 2) throw Error(ErrorCode::SeriesTooShort, "need at least 2 returns");
    const auto [mean, std] = mean_and_std(returns);
    if (std == 0.0) throw Error(ErrorCode::ZeroVolatility, "constant return series");
    return {strategy, start, mean, std, annualized_sharpe(mean, std), costs};
}

RollingSeries rolling_sharpe(const Eigen::VectorXd& returns, Eigen::Index window,
                             const std::vector<std::string>& dates) {
    if (window < 2) throw Error(ErrorCode::InvalidArgument, "window must be >= 2");
    if (returns.size() < window) {
        throw Error(ErrorCode::SeriesTooShort, std::to_string(returns.size()) + " returns for a window of " +
                                                   std::to_string(window));
    }
    if (!dates.empty() && Eigen::Index(dates.size()) != returns.size()) {
        throw Error(ErrorCode::DimensionMismatch, "dates and returns differ in length");
    }
    const Eigen::Index count = returns.size() - window + 1;
    RollingSeries out;
    out.values.resize(count);
    out.undefined.assign(std::size_t(count), false);
    for (Eigen::Index k = 0; k < count; ++k) {
        const auto [mean, std] = mean_and_std(returns.segment(k, window));
        if (std == 0.0) {
            out.values[k] = std::numeric_limits<double>::quiet_NaN();
            out.undefined[std::size_t(k)] = true;
        } else {
            out.values[k] = annualized_sharpe(mean, std);
        }
        if (!dates.empty()) out.dates.push_back(dates[std::size_t(k + window - 1)]);
    }
    return out;
}

std::string format_fixed(double v, int decimals) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "strategy,start,costs,mean,std,sharpe\n";
    for (const MetricsRow& r : rows) {
        out << r.strategy << ',' << r.start << ',' << (r.costs ? 1 : 0) << ',' << format_fixed(r.mean) << ','
            << format_fixed(r.std) << ',' << format_fixed(r.sharpe) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 6) throw Error(ErrorCode::MalformedFile, "metrics row with " +
                                                                         std::to_string(cells.size()) + " fields");
        rows.push_back({cells[0], cells[1], parse_number(cells[3], path), parse_number(cells[4], path),
                        parse_number(cells[5], path), cells[2] == "1"});
    }
    return rows;
}

void write_rolling_csv(const RollingSeries& series, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "date,value,flag\n";
    for (Eigen::Index k = 0; k < series.size(); ++k) {
        const std::string date = series.dates.empty() ? std::to_string(k + 1) : series.dates[std::size_t(k)];
        out << date << ',' << format_fixed(series.values[k]) << ','
            << (series.undefined[std::size_t(k)] ? "undefined" : "ok") << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

RollingSeries read_rolling_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    RollingSeries s;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 3) throw Error(ErrorCode::MalformedFile, "rolling row in " + path.string());
        s.dates.push_back(cells[0]);
        values.push_back(parse_number(cells[1], path));
        s.undefined.push_back(cells[2] == "undefined");
    }
    s.values = Eigen::Map<Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
    return s;
}

void write_report(const std::vector<MetricsRow>& rows, const std::map<std::string, RollingSeries>& series,
                  const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
    write_metrics_csv(rows, out_dir / "metrics.csv");
    for (const auto& [name, s] : series) write_rolling_csv(s, out_dir / ("rolling_" + name + ".csv"));
}

}  // namespace mvdro
