#include "robo/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace robo {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool looks_like_date(const std::string& s) {
    // Accepts ISO dates (YYYY-MM-DD) and bare ordinal labels of digits.
    if (s.empty()) return false;
    if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
        for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    }
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

PriceTable load_price_table(const std::string& path, MissingPolicy /*policy*/,
                            bool require_strictly_positive) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty input file: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 2 || trim(header[0]) != "date")
        throw std::runtime_error("format error in " + path +
                                 ": header must start with `date` and list at least one asset");

    PriceTable table;
    table.assets.assign(header.begin() + 1, header.end());
    const size_t n = table.assets.size();

    std::vector<std::string> dates;
    std::vector<std::vector<double>> rows;  // NaN marks missing
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != n + 1)
            throw std::runtime_error("format error in " + path + " row " +
                                     std::to_string(line_no) + ": expected " +
                                     std::to_string(n + 1) + " cells, got " +
                                     std::to_string(cells.size()));
        if (!looks_like_date(cells[0]))
            throw std::runtime_error("format error in " + path + " row " +
                                     std::to_string(line_no) + ": unparseable date `" +
                                     cells[0] + "`");
        std::vector<double> row(n, std::numeric_limits<double>::quiet_NaN());
        for (size_t j = 0; j < n; ++j) {
            const std::string& cell = cells[j + 1];
            if (cell.empty()) continue;  // missing
            size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != cell.size())
                throw std::runtime_error("format error in " + path + " row " +
                                         std::to_string(line_no) + " column " +
                                         table.assets[j] + ": unparseable value `" + cell + "`");
            if (!std::isfinite(v) || v < 0.0 ||
                (require_strictly_positive && v == 0.0))
                throw std::runtime_error("format error in " + path + " row " +
                                         std::to_string(line_no) + " column " +
                                         table.assets[j] + ": invalid price " + cell);
            row[j] = v;
        }
        dates.push_back(cells[0]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty input file: " + path);

    // Sort by date, reject duplicates.
    std::vector<size_t> order(rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return dates[a] < dates[b]; });
    for (size_t i = 1; i < order.size(); ++i)
        if (dates[order[i]] == dates[order[i - 1]])
            throw std::runtime_error("duplicate date in " + path + ": " + dates[order[i]]);

    // Forward-fill interior/trailing gaps; drop leading rows with gaps.
    std::vector<double> last(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> kept_dates;
    std::vector<std::vector<double>> kept_rows;
    for (size_t oi : order) {
        auto row = rows[oi];
        bool complete = true;
        for (size_t j = 0; j < n; ++j) {
            if (std::isnan(row[j])) {
                if (std::isnan(last[j])) {
                    complete = false;
                } else {
                    row[j] = last[j];
                }
            }
        }
        if (!complete) continue;  // leading incomplete row
        last = row;
        kept_dates.push_back(dates[oi]);
        kept_rows.push_back(std::move(row));
    }
    if (kept_rows.empty())
        throw std::runtime_error("empty input after dropping incomplete leading rows: " + path);

    table.dates = std::move(kept_dates);
    table.values.resize(static_cast<Eigen::Index>(kept_rows.size()),
                        static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < kept_rows.size(); ++i)
        for (size_t j = 0; j < n; ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kept_rows[i][j];
    return table;
}

ReturnPanel to_returns(const PriceTable& prices) {
    const Eigen::Index T = prices.values.rows();
    if (T < 2) throw std::runtime_error("insufficient data: need at least 2 price rows");
    ReturnPanel panel;
    panel.assets = prices.assets;
    panel.start_date = prices.dates.front();
    panel.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    panel.values = (prices.values.bottomRows(T - 1) - prices.values.topRows(T - 1))
                       .cwiseQuotient(prices.values.topRows(T - 1));
    return panel;
}

RebalanceCalendar build_calendar(int start, int step, int periods, int total_T) {
    if (step < 1 || periods < 1 || start < 0)
        throw std::runtime_error("calendar error: step and periods must be >= 1, start >= 0");
    if (start + step * (periods - 1) >= total_T)
        throw std::runtime_error("calendar error: horizon overflow (last rebalance " +
                                 std::to_string(start + step * (periods - 1)) +
                                 " >= total_T " + std::to_string(total_T) + ")");
    RebalanceCalendar cal;
    cal.horizon_T = total_T;
    cal.step = step;
    cal.periods = periods;
    cal.rebalance_dates.reserve(static_cast<size_t>(periods));
    for (int k = 0; k < periods; ++k) cal.rebalance_dates.push_back(start + k * step);
    size_t r = 0;
    for (int t = 0; t < total_T; ++t) {
        if (r < cal.rebalance_dates.size() && cal.rebalance_dates[r] == t) {
            ++r;
        } else {
            cal.non_rebalance_dates.push_back(t);
        }
    }
    return cal;
}

EquilibriumWeights equilibrium_weights(const PriceTable& aum) {
    EquilibriumWeights eq;
    eq.dates = aum.dates;
    eq.weights.resize(aum.values.rows(), aum.values.cols());
    for (Eigen::Index i = 0; i < aum.values.rows(); ++i) {
        const double s = aum.values.row(i).sum();
        if (s <= 0.0)
            throw std::runtime_error("degenerate AUM row at date " + aum.dates[static_cast<size_t>(i)]);
        eq.weights.row(i) = aum.values.row(i) / s;
    }
    return eq;
}

EquilibriumWeights align_equilibrium_weights(const EquilibriumWeights& src,
                                             const std::vector<std::string>& dates,
                                             int n_assets) {
    std::unordered_map<std::string, Eigen::Index> by_date;
    for (size_t i = 0; i < src.dates.size(); ++i)
        by_date.emplace(src.dates[i], static_cast<Eigen::Index>(i));
    EquilibriumWeights out;
    out.dates = dates;
    out.weights.resize(static_cast<Eigen::Index>(dates.size()), n_assets);
    const Eigen::RowVectorXd equal =
        Eigen::RowVectorXd::Constant(n_assets, 1.0 / static_cast<double>(n_assets));
    for (size_t i = 0; i < dates.size(); ++i) {
        auto it = by_date.find(dates[i]);
        if (it == by_date.end()) {
            out.weights.row(static_cast<Eigen::Index>(i)) = equal;
        } else {
            out.weights.row(static_cast<Eigen::Index>(i)) = src.weights.row(it->second);
        }
    }
    return out;
}

}  // namespace robo
