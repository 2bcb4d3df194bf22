#include "mvdro/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvdro {

namespace {

std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Date parse_date(const std::string& iso) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(iso.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3 || iso.size() != 10) {
        throw Error(ErrorCode::MalformedFile, "bad ISO-8601 date '" + iso + "'");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw Error(ErrorCode::MalformedFile, "invalid calendar date '" + iso + "'");
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
    return buf;
}

void validate(const PricePanel& panel) {
    if (panel.prices.rows() != static_cast<Eigen::Index>(panel.dates.size()) ||
        panel.prices.cols() != static_cast<Eigen::Index>(panel.tickers.size())) {
        throw Error(ErrorCode::MalformedFile, "price matrix shape does not match dates/tickers");
    }
    for (std::size_t k = 1; k < panel.dates.size(); ++k) {
        if (!(panel.dates[k - 1] < panel.dates[k])) {
            throw Error(ErrorCode::NonMonotoneDates, "date " + format_date(panel.dates[k]) + " does not follow " +
                                                         format_date(panel.dates[k - 1]));
        }
    }
    for (Eigen::Index r = 0; r < panel.prices.rows(); ++r) {
        for (Eigen::Index c = 0; c < panel.prices.cols(); ++c) {
            const double p = panel.prices(r, c);
            if (!(p > 0.0) || !std::isfinite(p)) {
                throw Error(ErrorCode::NonPositivePrice, panel.tickers[std::size_t(c)] + " on " +
                                                             format_date(panel.dates[std::size_t(r)]));
            }
        }
    }
}

PricePanel parse_prices(std::istream& in, MissingDataPolicy policy, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedFile, source + ": empty file");
    const auto header = split_csv(line);
    if (header.size() < 2) throw Error(ErrorCode::MalformedFile, source + ": header needs date and >= 1 ticker");

    PricePanel panel;
    panel.tickers.assign(header.begin() + 1, header.end());
    const std::size_t n = panel.tickers.size();
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != n + 1) {
            throw Error(ErrorCode::MalformedFile, source + ":" + std::to_string(lineno) + ": expected " +
                                                      std::to_string(n + 1) + " cells, got " +
                                                      std::to_string(cells.size()));
        }
        const Date date = parse_date(cells[0]);
        std::vector<double> row(n);
        bool missing = false;
        for (std::size_t c = 0; c < n; ++c) {
            const std::string& s = cells[c + 1];
            if (s.empty() || s == "NA" || s == "NaN" || s == "nan") {
                missing = true;
                continue;
            }
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row[c]);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                throw Error(ErrorCode::MalformedFile, source + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
            }
        }
        if (missing) {
            if (policy == MissingDataPolicy::Error) {
                throw Error(ErrorCode::MalformedFile, source + ":" + std::to_string(lineno) + ": missing value");
            }
            continue;
        }
        panel.dates.push_back(date);
        values.insert(values.end(), row.begin(), row.end());
    }
    panel.prices = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), Eigen::Index(panel.dates.size()), Eigen::Index(n));
    validate(panel);
    return panel;
}

PricePanel load_prices(const std::filesystem::path& path, MissingDataPolicy policy) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open price file " + path.string());
    return parse_prices(in, policy, path.string());
}

ReturnsPanel compute_returns(const PricePanel& panel) {
    if (panel.rows() < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 price rows");
    ReturnsPanel out;
    out.tickers = panel.tickers;
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    const Eigen::Index m = panel.rows() - 1;
    const auto& s = panel.prices;
    out.returns = (s.bottomRows(m) - s.topRows(m)).cwiseQuotient(s.topRows(m));
    return out;
}

ReturnsPanel ReturnsPanel::slice(Eigen::Index first, Eigen::Index count) const {
    if (first < 0 || count < 0 || first + count > rows()) {
        throw Error(ErrorCode::IndexOutOfRange, "slice [" + std::to_string(first) + ", " +
                                                    std::to_string(first + count) + ") of " + std::to_string(rows()));
    }
    ReturnsPanel out;
    out.tickers = tickers;
    out.dates.assign(dates.begin() + first, dates.begin() + first + count);
    out.returns = returns.middleRows(first, count);
    return out;
}

Eigen::Index ReturnsPanel::lower_bound(const Date& d) const {
    return std::lower_bound(dates.begin(), dates.end(), d) - dates.begin();
}

PathSamples build_path_samples(const Eigen::MatrixXd& returns, int periods, WindowMode mode) {
    if (periods < 1) throw Error(ErrorCode::InvalidArgument, "T must be >= 1");
    const Eigen::Index rows = returns.rows();
    const Eigen::Index n = returns.cols();
    if (rows < periods) {
        throw Error(ErrorCode::HorizonTooLong, "T = " + std::to_string(periods) + " exceeds " +
                                                   std::to_string(rows) + " return rows");
    }
    const Eigen::Index stride = mode == WindowMode::Sliding ? 1 : periods;
    const Eigen::Index count = mode == WindowMode::Sliding ? rows - periods + 1 : rows / periods;
    PathSamples out;
    out.assets = int(n);
    out.periods = periods;
    out.samples.resize(count, n * periods);
    for (Eigen::Index s = 0; s < count; ++s) {
        for (int t = 0; t < periods; ++t) {
            out.samples.row(s).segment(n * t, n) = returns.row(s * stride + t);
        }
    }
    return out;
}

PathSamples build_path_samples(const ReturnsPanel& returns, int periods, WindowMode mode) {
    return build_path_samples(returns.returns, periods, mode);
}

}  // namespace mvdro
