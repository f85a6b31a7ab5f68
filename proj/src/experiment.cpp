#include "robo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace robo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double parse_maybe_inf(const json& v, const std::string& key) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
        throw std::runtime_error("config key " + key + ": unrecognized value `" + s + "`");
    }
    return v.get<double>();
}

std::vector<double> number_list(const json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& e : v) out.push_back(parse_maybe_inf(e, key));
    } else {
        out.push_back(parse_maybe_inf(v, key));
    }
    if (out.empty()) throw std::runtime_error("config key " + key + ": empty list");
    return out;
}

std::string format_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_param(double v) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    fs::rename(tmp, path);
}

std::vector<int> bond_indices_for(const std::vector<std::string>& bond_assets,
                                  const std::vector<std::string>& assets) {
    std::vector<int> idx;
    for (const auto& name : bond_assets) {
        auto it = std::find(assets.begin(), assets.end(), name);
        if (it == assets.end())
            throw std::runtime_error("bond asset `" + name + "` not found in the price table");
        idx.push_back(static_cast<int>(it - assets.begin()));
    }
    return idx;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }

    ExperimentConfig cfg;
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        return p.empty() || fs::path(p).is_absolute() ? p : (base / p).string();
    };

    if (!j.contains("prices")) throw std::runtime_error("config is missing `prices`");
    cfg.prices_path = resolve(j.at("prices").get<std::string>());
    if (j.contains("aum")) cfg.aum_path = resolve(j.at("aum").get<std::string>());
    if (j.contains("index")) cfg.index_path = resolve(j.at("index").get<std::string>());

    cfg.start = j.value("start", 0);
    cfg.step = j.value("step", 1);
    cfg.periods = j.value("periods", 1);
    cfg.est_window = j.value("est_window", 1260);
    cfg.seed = j.value("seed", 0ULL);
    cfg.trading_days = j.value("trading_days", 252);

    if (!j.contains("strategies")) throw std::runtime_error("config is missing `strategies`");
    cfg.strategies = j.at("strategies").get<std::vector<std::string>>();

    if (j.contains("H")) {
        cfg.horizon_grid.clear();
        for (double h : number_list(j.at("H"), "H"))
            cfg.horizon_grid.push_back(static_cast<int>(h));
    }
    if (j.contains("gamma")) cfg.gamma_grid = number_list(j.at("gamma"), "gamma");
    if (j.contains("gamma_R")) cfg.gamma_r_grid = number_list(j.at("gamma_R"), "gamma_R");
    if (j.contains("phi")) cfg.phi_grid = number_list(j.at("phi"), "phi");
    if (j.contains("eta")) cfg.eta_grid = number_list(j.at("eta"), "eta");
    if (j.contains("delta")) cfg.delta_grid = number_list(j.at("delta"), "delta");

    if (j.contains("bond_assets"))
        cfg.bond_assets = j.at("bond_assets").get<std::vector<std::string>>();

    cfg.bl.lambda_bar_0 = j.value("lambda0", 1.0);
    cfg.bl.iota_n = j.value("iota_n", 0.03);
    cfg.bl.iota_c = j.value("iota_c", 0.9 * cfg.bl.iota_n);
    if (j.contains("alpha")) {
        cfg.bl.alpha_n = parse_maybe_inf(j.at("alpha"), "alpha");
        cfg.bl.alpha_c = cfg.bl.alpha_n;
    }

    const std::string profile = j.value("profile", std::string("static"));
    if (profile == "static") {
        cfg.profile = ProfileKind::Static;
    } else if (profile == "lifecycle") {
        cfg.profile = ProfileKind::Lifecycle;
    } else if (profile == "noisy") {
        cfg.profile = ProfileKind::Noisy;
    } else {
        throw std::runtime_error("config: unknown profile `" + profile + "`");
    }
    cfg.gamma_end = j.value("gamma_end", 0.0);
    if (j.contains("noisy_gamma_grid"))
        cfg.noisy_gamma_grid = number_list(j.at("noisy_gamma_grid"), "noisy_gamma_grid");
    if (j.contains("noisy_gamma_R_grid"))
        cfg.noisy_gamma_r_grid = number_list(j.at("noisy_gamma_R_grid"), "noisy_gamma_R_grid");
    if (j.contains("gamma_target")) cfg.gamma_target = j.at("gamma_target").get<double>();
    cfg.benchmarks = j.value("benchmarks", false);

    for (const auto& s : cfg.strategies)
        if (s != "MV-BL" && s != "MRB-BL" && s != "MV-Est-myopic" && s != "MV-Est-MPC")
            throw std::runtime_error("config: unknown strategy `" + s + "`");
    return cfg;
}

StrategySpec make_strategy_spec(const ExperimentConfig& config, const RunDefinition& def,
                                const std::vector<std::string>& assets) {
    StrategySpec spec;
    spec.seed = config.seed;
    spec.est_window = config.est_window;
    spec.horizon_H = def.horizon;
    spec.constraints.tc_eta = def.eta;
    spec.constraints.turnover_delta = def.delta;
    spec.bl = config.bl;
    spec.gamma_target = config.gamma_target;

    if (config.bond_assets.empty())
        throw std::runtime_error("config needs `bond_assets` (budget weights and the initial "
                                 "portfolio are class-based)");
    spec.bond_group = bond_indices_for(config.bond_assets, assets);
    for (int i = 0; i < static_cast<int>(assets.size()); ++i)
        if (std::find(spec.bond_group.begin(), spec.bond_group.end(), i) == spec.bond_group.end())
            spec.risky_group.push_back(i);

    const bool is_mrb = def.strategy == "MRB-BL";
    spec.criterion = is_mrb ? Criterion::RiskBudgeting : Criterion::MeanVariance;
    spec.forecaster = (def.strategy == "MV-Est-myopic" || def.strategy == "MV-Est-MPC")
                          ? Forecaster::SampleMoments
                          : Forecaster::HmmBl;
    if (is_mrb) spec.phi = def.phi.value_or(0.1);

    const double coeff = is_mrb ? def.gamma_r.value_or(0.5) : def.gamma.value_or(1.0);
    std::vector<double> grid = is_mrb ? config.noisy_gamma_r_grid : config.noisy_gamma_grid;
    if (grid.empty()) grid = is_mrb ? config.gamma_r_grid : config.gamma_grid;
    spec.profile = risk_profile_path(config.profile, coeff,
                                     config.profile == ProfileKind::Lifecycle ? config.gamma_end
                                                                              : coeff,
                                     grid, config.periods, config.seed);
    return spec;
}

namespace {

std::vector<RunDefinition> enumerate_runs(const ExperimentConfig& cfg) {
    std::vector<RunDefinition> defs;
    int counter = 0;
    auto next_id = [&counter] {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%03d", counter++);
        return std::string(buf);
    };
    for (const auto& strategy : cfg.strategies) {
        const bool is_mrb = strategy == "MRB-BL";
        const bool myopic = strategy == "MV-Est-myopic";
        const std::vector<int> horizons = myopic ? std::vector<int>{1} : cfg.horizon_grid;
        if (is_mrb) {
            for (double gr : cfg.gamma_r_grid)
                for (double phi : cfg.phi_grid)
                    for (double eta : cfg.eta_grid)
                        for (double delta : cfg.delta_grid)
                            for (int h : horizons) {
                                RunDefinition def;
                                def.id = next_id();
                                def.strategy = strategy;
                                def.gamma_r = gr;
                                def.phi = phi;
                                def.eta = eta;
                                def.delta = delta;
                                def.horizon = h;
                                defs.push_back(std::move(def));
                            }
        } else {
            for (double g : cfg.gamma_grid)
                for (double eta : cfg.eta_grid)
                    for (double delta : cfg.delta_grid)
                        for (int h : horizons) {
                            RunDefinition def;
                            def.id = next_id();
                            def.strategy = strategy;
                            def.gamma = g;
                            def.eta = eta;
                            def.delta = delta;
                            def.horizon = h;
                            defs.push_back(std::move(def));
                        }
        }
    }
    return defs;
}

}  // namespace

void write_weights_csv(const WeightTrajectory& traj, const std::string& path) {
    std::ostringstream out;
    out << "date";
    for (const auto& a : traj.assets) out << ',' << a;
    out << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < traj.weights.rows(); ++i) {
        out << traj.dates[static_cast<size_t>(i)];
        for (Eigen::Index j = 0; j < traj.weights.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", traj.weights(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    atomic_write(path, out.str());
}

void write_wealth_csv(const WealthSeries& wealth, const std::string& path) {
    std::ostringstream out;
    out << "date,wealth,daily_return\n";
    char buf[32];
    for (size_t i = 0; i < wealth.wealth.size(); ++i) {
        out << wealth.dates[i];
        std::snprintf(buf, sizeof(buf), "%.10g", wealth.wealth[i]);
        out << ',' << buf << ',';
        if (i > 0) {
            std::snprintf(buf, sizeof(buf), "%.10g", wealth.daily_returns[i - 1]);
            out << buf;
        }
        out << '\n';
    }
    atomic_write(path, out.str());
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                int jobs) {
    fs::create_directories(out_dir);

    PriceTable prices = load_price_table(config.prices_path);
    ReturnPanel returns = to_returns(prices);
    const int total_T = static_cast<int>(returns.values.rows());
    RebalanceCalendar calendar = build_calendar(config.start, config.step, config.periods, total_T);

    EquilibriumWeights eqw;
    if (!config.aum_path.empty()) {
        PriceTable aum = load_price_table(config.aum_path, MissingPolicy::ForwardFill,
                                          /*require_strictly_positive=*/false);
        eqw = align_equilibrium_weights(equilibrium_weights(aum), prices.dates,
                                        static_cast<int>(prices.assets.size()));
    } else {
        EquilibriumWeights empty;
        eqw = align_equilibrium_weights(empty, prices.dates,
                                        static_cast<int>(prices.assets.size()));
    }

    std::optional<PriceTable> index;
    if (!config.index_path.empty()) index = load_price_table(config.index_path);

    std::vector<RunDefinition> defs = enumerate_runs(config);
    std::vector<RunOutcome> outcomes(defs.size());

    std::atomic<size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= defs.size()) return;
            RunOutcome& res = outcomes[i];
            res.def = defs[i];
            try {
                StrategySpec spec = make_strategy_spec(config, defs[i], prices.assets);
                WeightTrajectory traj = run_receding_horizon(spec, returns, calendar, eqw);
                WealthSeries wealth = simulate_wealth(traj, returns, calendar);
                res.metrics = compute_metrics(wealth, traj, config.trading_days);
                write_weights_csv(traj, (fs::path(out_dir) / ("weights_" + defs[i].id + ".csv")).string());
                write_wealth_csv(wealth, (fs::path(out_dir) / ("wealth_" + defs[i].id + ".csv")).string());
                res.ok = true;
            } catch (const std::exception& e) {
                res.ok = false;
                res.error = e.what();
            }
        }
    };
    int n_workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(defs.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // Benchmarks run once, after the grid, with ids continuing the sequence.
    std::vector<std::pair<std::string, MetricsReport>> bench_rows;
    if (config.benchmarks) {
        auto bench = run_benchmarks(returns, calendar, index ? &*index : nullptr);
        for (auto& [name, result] : bench) {
            MetricsReport m = result.trajectory
                                  ? compute_metrics(result.wealth, *result.trajectory,
                                                    config.trading_days)
                                  : compute_metrics(result.wealth, config.trading_days);
            std::string id_name = name == "1/N" ? "1overN" : name;
            if (result.trajectory)
                write_weights_csv(*result.trajectory,
                                  (fs::path(out_dir) / ("weights_" + id_name + ".csv")).string());
            write_wealth_csv(result.wealth,
                             (fs::path(out_dir) / ("wealth_" + id_name + ".csv")).string());
            bench_rows.emplace_back(name, m);
        }
    }

    // Consolidated metrics, assembled in grid order.
    std::ostringstream out;
    out << "run,strategy,gamma,gamma_R,phi,eta,delta,H,mean,stdev,maxdd,sr,glr,calmar,turnover,status\n";
    auto metric_cells = [&](const MetricsReport& m) {
        std::string row;
        row += format_metric(m.mean) + "," + format_metric(m.stdev) + "," +
               format_metric(m.maxdd) + "," + format_metric(m.sr) + "," + format_metric(m.glr) +
               ",";
        row += m.calmar_defined ? format_metric(m.calmar) : std::string();
        row += ",";
        row += m.has_turnover ? format_metric(m.turnover) : std::string();
        return row;
    };
    for (const auto& res : outcomes) {
        out << res.def.id << ',' << res.def.strategy << ',';
        if (res.def.gamma) out << format_param(*res.def.gamma);
        out << ',';
        if (res.def.gamma_r) out << format_param(*res.def.gamma_r);
        out << ',';
        if (res.def.phi) out << format_param(*res.def.phi);
        out << ',' << format_param(res.def.eta) << ',' << format_param(res.def.delta) << ','
            << res.def.horizon << ',';
        if (res.ok) {
            out << metric_cells(res.metrics) << ",ok\n";
        } else {
            std::string msg = res.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            out << ",,,,,,,error: " << msg << "\n";
        }
    }
    int bench_counter = static_cast<int>(outcomes.size());
    for (const auto& [name, m] : bench_rows) {
        char idbuf[8];
        std::snprintf(idbuf, sizeof(idbuf), "%03d", bench_counter++);
        out << idbuf << ',' << name << ",,,,,,," << metric_cells(m) << ",ok\n";
    }
    const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    atomic_write(metrics_path, out.str());

    ExperimentResult result;
    result.runs = std::move(outcomes);
    result.metrics_path = metrics_path;
    return result;
}

}  // namespace robo
