// Deterministic synthetic price panel: one market factor, heterogeneous
// idiosyncratic volatility, weak drift.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

#include "mvdro/market_data.hpp"

int main(int argc, char** argv) {
    CLI::App app{"write a synthetic adjusted-close CSV"};
    int assets = 10;
    int rows = 600;
    std::uint64_t seed = 7;
    std::string out_path;
    std::string first_date = "2016-01-04";
    app.add_option("-n,--assets", assets)->check(CLI::PositiveNumber);
    app.add_option("-d,--days", rows, "price rows")->check(CLI::Range(2, 1000000));
    app.add_option("--seed", seed);
    app.add_option("--start", first_date);
    app.add_option("-o,--out", out_path)->required();
    CLI11_PARSE(app, argc, argv);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> beta(assets), idio(assets), drift(assets), price(assets, 100.0);
    for (int i = 0; i < assets; ++i) {
        beta[i] = 0.6 + 0.8 * unif(rng);
        idio[i] = 0.004 + 0.02 * double(i) / std::max(1, assets - 1);
        drift[i] = 0.0001 + 0.0002 * unif(rng);
    }

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << '\n';
        return 1;
    }
    out << "date";
    for (int i = 0; i < assets; ++i) out << ",S" << (i < 9 ? "0" : "") << i + 1;
    out << '\n';

    using namespace std::chrono;
    sys_days day{mvdro::parse_date(first_date)};
    char buf[32];
    for (int r = 0; r < rows; ++r) {
        while (weekday{day} == Saturday || weekday{day} == Sunday) day += days{1};
        if (r > 0) {
            const double market = 0.008 * gauss(rng);
            for (int i = 0; i < assets; ++i) price[i] *= 1.0 + drift[i] + beta[i] * market + idio[i] * gauss(rng);
        }
        out << mvdro::format_date(year_month_day{day});
        for (int i = 0; i < assets; ++i) {
            std::snprintf(buf, sizeof buf, ",%.6f", price[i]);
            out << buf;
        }
        out << '\n';
        day += days{1};
    }
    return 0;
}
