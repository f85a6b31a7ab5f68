#include "robo/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace robo {

WealthSeries simulate_wealth(const WeightTrajectory& weights, const ReturnPanel& returns,
                             const RebalanceCalendar& calendar) {
    if (weights.weights.rows() < 1) throw std::runtime_error("simulate_wealth: empty trajectory");
    if (weights.weights.cols() != returns.values.cols())
        throw std::runtime_error("simulate_wealth: asset count mismatch");
    if (calendar.horizon_T > returns.values.rows())
        throw std::runtime_error("simulate_wealth: returns do not cover the trading window");

    std::unordered_set<int> rebalance_set(calendar.rebalance_dates.begin(),
                                          calendar.rebalance_dates.end());
    for (int d : weights.day_indices)
        if (!rebalance_set.count(d))
            throw std::runtime_error("simulate_wealth: date misalignment, day " +
                                     std::to_string(d) + " is not a rebalance date");

    const int t0 = weights.day_indices.front();
    const int t_end = calendar.horizon_T;

    WealthSeries ws;
    ws.wealth.reserve(static_cast<size_t>(t_end - t0) + 1);
    ws.daily_returns.reserve(static_cast<size_t>(t_end - t0));
    ws.dates.reserve(static_cast<size_t>(t_end - t0) + 1);
    ws.wealth.push_back(100.0);
    ws.dates.push_back(returns.day_label(t0));

    size_t row = 0;
    for (int d = t0; d < t_end; ++d) {
        while (row + 1 < weights.day_indices.size() && weights.day_indices[row + 1] <= d) ++row;
        const double r = returns.values.row(d).dot(weights.weights.row(static_cast<Eigen::Index>(row)));
        ws.daily_returns.push_back(r);
        ws.wealth.push_back(ws.wealth.back() * (1.0 + r));
        ws.dates.push_back(returns.day_label(d + 1));
    }
    return ws;
}

namespace {

MetricsReport metrics_impl(const WealthSeries& wealth, const WeightTrajectory* weights,
                           int trading_days) {
    if (wealth.wealth.size() < 2)
        throw std::runtime_error("compute_metrics: need at least 2 wealth points");
    const auto& x = wealth.daily_returns;
    const double n = static_cast<double>(x.size());
    const double ann = static_cast<double>(trading_days);

    MetricsReport m;
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean_daily = sum / n;
    m.mean = ann * mean_daily;

    double ss = 0.0;
    for (double v : x) ss += (v - mean_daily) * (v - mean_daily);
    const double std_daily = x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    m.stdev = std::sqrt(ann) * std_daily;
    m.sr = m.stdev > 0.0 ? m.mean / m.stdev : 0.0;

    double peak = wealth.wealth.front();
    double maxdd = 0.0;
    for (double w : wealth.wealth) {
        peak = std::max(peak, w);
        maxdd = std::max(maxdd, (peak - w) / peak);
    }
    m.maxdd = maxdd;

    double loss_sum = 0.0;
    for (double v : x) loss_sum += std::max(-v, 0.0);
    const double mean_loss = loss_sum / n;
    if (mean_loss > 0.0) {
        m.glr = mean_daily / mean_loss;
    } else if (mean_daily > 0.0) {
        m.glr = std::numeric_limits<double>::infinity();
        m.glr_no_losses = true;
    } else {
        m.glr = 0.0;
        m.glr_no_losses = true;
    }

    if (maxdd > 0.0) {
        m.calmar = m.mean / maxdd;
    } else {
        m.calmar = 0.0;
        m.calmar_defined = false;
    }

    if (weights != nullptr) {
        const Eigen::Index rows = weights->weights.rows();
        double l1 = 0.0;
        for (Eigen::Index t = 1; t < rows; ++t)
            l1 += (weights->weights.row(t) - weights->weights.row(t - 1)).lpNorm<1>();
        m.turnover = rows > 1 ? 0.5 * ann * l1 / static_cast<double>(rows - 1) : 0.0;
    } else {
        m.has_turnover = false;
    }
    return m;
}

}  // namespace

MetricsReport compute_metrics(const WealthSeries& wealth, const WeightTrajectory& weights,
                              int trading_days) {
    return metrics_impl(wealth, &weights, trading_days);
}

MetricsReport compute_metrics(const WealthSeries& wealth, int trading_days) {
    return metrics_impl(wealth, nullptr, trading_days);
}

std::map<std::string, BenchmarkResult> run_benchmarks(const ReturnPanel& returns,
                                                      const RebalanceCalendar& calendar,
                                                      const PriceTable* index) {
    std::map<std::string, BenchmarkResult> out;
    const Eigen::Index N = returns.values.cols();

    WeightTrajectory equal;
    equal.assets = returns.assets;
    equal.day_indices = calendar.rebalance_dates;
    equal.weights = Eigen::MatrixXd::Constant(calendar.periods, N, 1.0 / static_cast<double>(N));
    for (int t : calendar.rebalance_dates) equal.dates.push_back(returns.day_label(t));
    BenchmarkResult one_over_n;
    one_over_n.wealth = simulate_wealth(equal, returns, calendar);
    one_over_n.trajectory = std::move(equal);
    out.emplace("1/N", std::move(one_over_n));

    if (index != nullptr) {
        if (index->values.cols() < 1) throw std::runtime_error("index table has no columns");
        ReturnPanel idx = to_returns(*index);
        std::unordered_map<std::string, Eigen::Index> by_date;
        for (size_t i = 0; i < idx.dates.size(); ++i)
            by_date.emplace(idx.dates[i], static_cast<Eigen::Index>(i));

        const int t0 = calendar.rebalance_dates.front();
        WealthSeries ws;
        ws.wealth.push_back(100.0);
        ws.dates.push_back(returns.day_label(t0));
        for (int d = t0; d < calendar.horizon_T; ++d) {
            auto it = by_date.find(returns.dates[static_cast<size_t>(d)]);
            if (it == by_date.end())
                throw std::runtime_error("index is missing date " +
                                         returns.dates[static_cast<size_t>(d)]);
            const double r = idx.values(it->second, 0);
            ws.daily_returns.push_back(r);
            ws.wealth.push_back(ws.wealth.back() * (1.0 + r));
            ws.dates.push_back(returns.day_label(d + 1));
        }
        BenchmarkResult sp;
        sp.wealth = std::move(ws);
        out.emplace("SP500", std::move(sp));
    }
    return out;
}

}  // namespace robo
