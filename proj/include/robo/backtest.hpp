#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robo/engine.hpp"
#include "robo/market_data.hpp"

namespace robo {

// Self-financing wealth simulation from recorded weight trajectories, the
// performance metrics of the backtesting methodology, and the benchmark
// strategies (equal-weight 1/N and an index passthrough).

struct WealthSeries {
    std::vector<std::string> dates;     // dates[0] labels the window start
    std::vector<double> wealth;         // scaled to 100 at the start
    std::vector<double> daily_returns;  // r_tau' pi, one per trading day
};

struct MetricsReport {
    double mean = 0.0;    // annualized mean return
    double stdev = 0.0;   // annualized standard deviation
    double maxdd = 0.0;   // maximum drawdown, fraction of the running peak
    double sr = 0.0;      // Sharpe ratio
    double glr = 0.0;     // gains-to-loss ratio (+inf when losses absent, mean > 0)
    double calmar = 0.0;  // mean / MaxDD, undefined at MaxDD = 0
    double turnover = 0.0;
    bool calmar_defined = true;
    bool glr_no_losses = false;
    bool has_turnover = true;  // false for weight-free benchmarks
};

// Holds the post-rebalance weights constant between rebalances (no drift
// adjustment) and compounds wealth multiplicatively from 100 over the window
// [first trajectory date, calendar.horizon_T).
WealthSeries simulate_wealth(const WeightTrajectory& weights, const ReturnPanel& returns,
                             const RebalanceCalendar& calendar);

// Annualization uses `trading_days` (252). Turnover is
//   1/2 * 252 * sum_t sum_i |pi_{i,t} - pi_{i,t-1}| / (T_w - 1)
// over the recorded rebalance rows.
MetricsReport compute_metrics(const WealthSeries& wealth, const WeightTrajectory& weights,
                              int trading_days = 252);

// Variant for wealth-only series (index benchmarks): turnover is flagged absent.
MetricsReport compute_metrics(const WealthSeries& wealth, int trading_days = 252);

struct BenchmarkResult {
    std::optional<WeightTrajectory> trajectory;  // absent for the index passthrough
    WealthSeries wealth;
};

// "1/N": equal weights re-set on every calendar date. "SP500": the index
// column scaled to 100 over the trading window (requires `index`).
std::map<std::string, BenchmarkResult> run_benchmarks(const ReturnPanel& returns,
                                                      const RebalanceCalendar& calendar,
                                                      const PriceTable* index);

}  // namespace robo
