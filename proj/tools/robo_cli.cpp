// Command-line front end: single backtests, experiment grids, forecast
// diagnostics and metric recomputation from stored CSVs.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "robo/backtest.hpp"
#include "robo/experiment.hpp"
#include "robo/hmm.hpp"

namespace fs = std::filesystem;

namespace {

double parse_delta(const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    return std::stod(s);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

void print_metrics(const std::string& label, const robo::MetricsReport& m) {
    std::printf("%-14s mean %8.4f  stdev %7.4f  maxdd %7.4f  sr %7.4f  glr %7.4f", label.c_str(),
                m.mean, m.stdev, m.maxdd, m.sr, m.glr);
    if (m.calmar_defined) {
        std::printf("  calmar %7.4f", m.calmar);
    } else {
        std::printf("  calmar      --");
    }
    if (m.has_turnover) {
        std::printf("  turnover %7.4f\n", m.turnover);
    } else {
        std::printf("  turnover      --\n");
    }
}

struct BacktestArgs {
    std::string prices, aum, index, out_dir = ".";
    std::string strategy = "MV-BL";
    std::string bonds;
    double gamma = 1.0, gamma_r = 0.5, phi = 0.1, eta = 0.0;
    std::string delta = "inf";
    int horizon = 7, start = 0, step = 22, periods = 1, est_window = 1260;
    std::uint64_t seed = 0;
    std::string profile = "static";
    double gamma_end = 0.0;
    double lambda0 = 1.0, iota_n = 0.03, alpha = 1.0;
    double gamma_target = std::numeric_limits<double>::quiet_NaN();
    bool benchmarks = false;
};

int run_backtest(const BacktestArgs& a) {
    robo::ExperimentConfig cfg;
    cfg.prices_path = a.prices;
    cfg.aum_path = a.aum;
    cfg.index_path = a.index;
    cfg.start = a.start;
    cfg.step = a.step;
    cfg.periods = a.periods;
    cfg.est_window = a.est_window;
    cfg.seed = a.seed;
    cfg.strategies = {a.strategy};
    cfg.horizon_grid = {a.horizon};
    cfg.gamma_grid = {a.gamma};
    cfg.gamma_r_grid = {a.gamma_r};
    cfg.phi_grid = {a.phi};
    cfg.eta_grid = {a.eta};
    cfg.delta_grid = {parse_delta(a.delta)};
    cfg.bond_assets = split_list(a.bonds);
    cfg.bl.lambda_bar_0 = a.lambda0;
    cfg.bl.iota_n = a.iota_n;
    cfg.bl.iota_c = 0.9 * a.iota_n;
    cfg.bl.alpha_n = cfg.bl.alpha_c = a.alpha;
    cfg.profile = a.profile == "lifecycle"
                      ? robo::ProfileKind::Lifecycle
                      : (a.profile == "noisy" ? robo::ProfileKind::Noisy
                                              : robo::ProfileKind::Static);
    cfg.gamma_end = a.gamma_end;
    if (!std::isnan(a.gamma_target)) cfg.gamma_target = a.gamma_target;
    cfg.benchmarks = a.benchmarks;

    robo::ExperimentResult result = robo::run_experiment(cfg, a.out_dir, 1);
    const auto& run = result.runs.front();
    if (!run.ok) {
        std::cerr << "run failed: " << run.error << "\n";
        return 1;
    }
    print_metrics(a.strategy, run.metrics);
    std::printf("outputs in %s (weights_%s.csv, wealth_%s.csv, metrics.csv)\n", a.out_dir.c_str(),
                run.def.id.c_str(), run.def.id.c_str());
    return 0;
}

struct ForecastArgs {
    std::string prices, aum, out_dir = ".";
    int date_index = -1, horizon = 7, step = 22, est_window = 1260;
    std::uint64_t seed = 0;
    double lambda0 = 1.0, iota_n = 0.03, alpha = 1.0;
};

int run_forecast(const ForecastArgs& a) {
    robo::PriceTable prices = robo::load_price_table(a.prices);
    robo::ReturnPanel returns = robo::to_returns(prices);
    const int t = a.date_index >= 0 ? a.date_index : a.est_window;
    if (t < a.est_window || t > returns.values.rows())
        throw std::runtime_error("date index must lie in [est_window, len(returns)]");

    robo::EquilibriumWeights eqw;
    if (!a.aum.empty()) {
        robo::PriceTable aum = robo::load_price_table(a.aum, robo::MissingPolicy::ForwardFill,
                                                      /*require_strictly_positive=*/false);
        eqw = robo::align_equilibrium_weights(robo::equilibrium_weights(aum), prices.dates,
                                              static_cast<int>(prices.assets.size()));
    } else {
        robo::EquilibriumWeights empty;
        eqw = robo::align_equilibrium_weights(empty, prices.dates,
                                              static_cast<int>(prices.assets.size()));
    }

    auto window = returns.values.middleRows(t - a.est_window, a.est_window);
    robo::HmmParams params = robo::fit_hmm(window, a.seed);
    params.fitted_at = t;

    robo::BlConfig bl;
    bl.lambda_bar_0 = a.lambda0;
    bl.iota_n = a.iota_n;
    bl.iota_c = 0.9 * a.iota_n;
    bl.alpha_n = bl.alpha_c = a.alpha;

    const double q_t = robo::filter_normal_probability(params, window);
    robo::ForecastSet fc = robo::build_forecast_set(
        params, q_t, eqw.weights.row(t).transpose(), bl, a.horizon, a.step);

    fs::create_directories(a.out_dir);
    char buf[32];

    // Per-period blended means and covariance diagonal.
    {
        std::ofstream out(fs::path(a.out_dir) / "forecast.csv", std::ios::binary);
        out << "period";
        for (const auto& asset : prices.assets) out << ",r_hat_" << asset;
        for (const auto& asset : prices.assets) out << ",var_" << asset;
        out << '\n';
        for (int p = 0; p < a.horizon; ++p) {
            out << (p + 1);
            for (Eigen::Index i = 0; i < fc.r_hat[static_cast<size_t>(p)].size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.10g", fc.r_hat[static_cast<size_t>(p)](i));
                out << ',' << buf;
            }
            for (Eigen::Index i = 0; i < fc.r_hat[static_cast<size_t>(p)].size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.10g", fc.sigma_hat[static_cast<size_t>(p)](i, i));
                out << ',' << buf;
            }
            out << '\n';
        }
    }

    // Filtered regime path over the estimation window.
    {
        std::ofstream out(fs::path(a.out_dir) / "regimes.csv", std::ios::binary);
        out << "date,q_t,regime_label\n";
        for (int d = t - a.est_window + 1; d <= t; ++d) {
            const double q = robo::filter_normal_probability(
                params, returns.values.middleRows(t - a.est_window, d - (t - a.est_window)));
            std::snprintf(buf, sizeof(buf), "%.10g", q);
            out << returns.day_label(d) << ',' << buf << ',' << (q >= 0.5 ? 'n' : 'c') << '\n';
        }
    }

    std::printf("fitted at %s: p_nn %.4f  p_cc %.4f  q_t %.4f  (%d EM iterations)\n",
                returns.day_label(t).c_str(), params.p_nn, params.p_cc, q_t,
                static_cast<int>(params.ll_history.size()));
    std::printf("outputs in %s (forecast.csv, regimes.csv)\n", a.out_dir.c_str());
    return 0;
}

struct ReportArgs {
    std::string weights, wealth;
    int trading_days = 252;
};

int run_report(const ReportArgs& a) {
    robo::WealthSeries ws;
    {
        std::ifstream in(a.wealth);
        if (!in) throw std::runtime_error("cannot open " + a.wealth);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string date, wealth, ret;
            std::getline(ss, date, ',');
            std::getline(ss, wealth, ',');
            std::getline(ss, ret, ',');
            ws.dates.push_back(date);
            ws.wealth.push_back(std::stod(wealth));
            if (!ret.empty()) ws.daily_returns.push_back(std::stod(ret));
        }
    }
    robo::MetricsReport m;
    if (!a.weights.empty()) {
        robo::WeightTrajectory traj;
        std::ifstream in(a.weights);
        if (!in) throw std::runtime_error("cannot open " + a.weights);
        std::string line;
        std::getline(in, line);
        std::vector<std::vector<double>> rows;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            traj.dates.push_back(cell);
            std::vector<double> row;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw std::runtime_error("weights file has no rows");
        traj.weights.resize(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(rows.front().size()));
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t j = 0; j < rows[i].size(); ++j)
                traj.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    rows[i][j];
        m = robo::compute_metrics(ws, traj, a.trading_days);
    } else {
        m = robo::compute_metrics(ws, a.trading_days);
    }
    print_metrics("report", m);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Receding-horizon robo-advising backtests"};
    app.require_subcommand(1);

    BacktestArgs bt;
    auto* backtest = app.add_subcommand("backtest", "Run one strategy and write its CSVs");
    backtest->add_option("--prices", bt.prices, "price CSV")->required();
    backtest->add_option("--aum", bt.aum, "assets-under-management CSV");
    backtest->add_option("--index", bt.index, "index CSV (enables the SP500 benchmark)");
    backtest->add_option("--out-dir", bt.out_dir, "output directory");
    backtest->add_option("--strategy", bt.strategy, "MV-BL | MRB-BL | MV-Est-myopic | MV-Est-MPC");
    backtest->add_option("--bonds", bt.bonds, "comma-separated bond-class tickers")->required();
    backtest->add_option("--gamma", bt.gamma, "MV risk aversion");
    backtest->add_option("--gamma-r", bt.gamma_r, "MRB risk attitude");
    backtest->add_option("--phi", bt.phi, "MRB enforcement strength");
    backtest->add_option("--eta", bt.eta, "transaction-cost penalty scale");
    backtest->add_option("--delta", bt.delta, "per-step turnover bound (number or `inf`)");
    backtest->add_option("--horizon", bt.horizon, "planning horizon H");
    backtest->add_option("--start", bt.start, "first rebalance day index");
    backtest->add_option("--step", bt.step, "days between rebalances");
    backtest->add_option("--periods", bt.periods, "number of rebalances");
    backtest->add_option("--est-window", bt.est_window, "trailing estimation rows");
    backtest->add_option("--seed", bt.seed, "run seed");
    backtest->add_option("--profile", bt.profile, "static | lifecycle | noisy");
    backtest->add_option("--gamma-end", bt.gamma_end, "lifecycle endpoint");
    backtest->add_option("--lambda0", bt.lambda0, "base market risk aversion");
    backtest->add_option("--iota-n", bt.iota_n, "prior uncertainty scale");
    backtest->add_option("--alpha", bt.alpha, "view confidence scale");
    backtest->add_option("--gamma-target", bt.gamma_target, "terminal target coefficient");
    backtest->add_flag("--benchmarks", bt.benchmarks, "also run 1/N and SP500");

    std::string grid_config, grid_out = ".";
    int grid_jobs = 0;
    auto* grid = app.add_subcommand("grid", "Run an experiment config");
    grid->add_option("--config", grid_config, "experiment JSON")->required();
    grid->add_option("--out-dir", grid_out, "output directory");
    grid->add_option("--jobs", grid_jobs, "worker threads (0 = hardware)");

    ForecastArgs fc;
    auto* forecast = app.add_subcommand("forecast", "Emit forecast diagnostics for one date");
    forecast->add_option("--prices", fc.prices, "price CSV")->required();
    forecast->add_option("--aum", fc.aum, "AUM CSV");
    forecast->add_option("--out-dir", fc.out_dir, "output directory");
    forecast->add_option("--date-index", fc.date_index, "day index (default: est-window)");
    forecast->add_option("--horizon", fc.horizon, "periods to forecast");
    forecast->add_option("--step", fc.step, "days per period");
    forecast->add_option("--est-window", fc.est_window, "trailing estimation rows");
    forecast->add_option("--seed", fc.seed, "fit seed");
    forecast->add_option("--lambda0", fc.lambda0, "base market risk aversion");
    forecast->add_option("--iota-n", fc.iota_n, "prior uncertainty scale");
    forecast->add_option("--alpha", fc.alpha, "view confidence scale");

    ReportArgs rp;
    auto* report = app.add_subcommand("report", "Recompute metrics from stored CSVs");
    report->add_option("--wealth", rp.wealth, "wealth CSV")->required();
    report->add_option("--weights", rp.weights, "weights CSV (optional)");
    report->add_option("--trading-days", rp.trading_days, "annualization constant");

    CLI11_PARSE(app, argc, argv);

    try {
        if (backtest->parsed()) return run_backtest(bt);
        if (grid->parsed()) {
            robo::ExperimentConfig cfg = robo::load_experiment_config(grid_config);
            robo::ExperimentResult result = robo::run_experiment(cfg, grid_out, grid_jobs);
            int failures = 0;
            for (const auto& run : result.runs) {
                if (!run.ok) {
                    ++failures;
                    std::fprintf(stderr, "run %s (%s) failed: %s\n", run.def.id.c_str(),
                                 run.def.strategy.c_str(), run.error.c_str());
                } else {
                    print_metrics(run.def.strategy + "/" + run.def.id, run.metrics);
                }
            }
            std::printf("%zu runs, %d failed; metrics at %s\n", result.runs.size(), failures,
                        result.metrics_path.c_str());
            return 0;  // per-run failures are recorded in metrics.csv
        }
        if (forecast->parsed()) return run_forecast(fc);
        if (report->parsed()) return run_report(rp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
