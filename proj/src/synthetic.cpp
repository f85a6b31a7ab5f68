#include "robo/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "robo/hmm.hpp"

namespace robo::synth {

namespace {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() {  // (0, 1)
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }
    double gaussian() {  // Box-Muller, no caching so draw order stays obvious
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

constexpr double kDaysPerYear = 252.0;

Eigen::MatrixXd covariance_from(const Eigen::VectorXd& ann_vol, double within_bond,
                                double within_risky, double cross, int n_bonds) {
    const Eigen::Index n = ann_vol.size();
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double corr = 1.0;
            if (i != j) {
                const bool bi = i < n_bonds;
                const bool bj = j < n_bonds;
                corr = bi && bj ? within_bond : (!bi && !bj ? within_risky : cross);
            }
            cov(i, j) = corr * ann_vol(i) * ann_vol(j) / kDaysPerYear;
        }
    }
    return cov;
}

// Simple synthetic business calendar: YYYY-MM-DD labels skipping weekends,
// months of 28 days so no civil-calendar tables are needed.
std::vector<std::string> business_dates(int count) {
    std::vector<std::string> dates;
    dates.reserve(static_cast<size_t>(count));
    int year = 2010, month = 1, day = 4, weekday = 0;  // Monday
    char buf[16];
    while (static_cast<int>(dates.size()) < count) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        dates.emplace_back(buf);
        // advance one business day
        ++day;
        ++weekday;
        if (weekday == 5) {  // skip the weekend
            day += 2;
            weekday = 0;
        }
        if (day > 28) {
            day -= 28;
            if (++month > 12) {
                month = 1;
                ++year;
            }
        }
    }
    return dates;
}

}  // namespace

std::pair<Eigen::MatrixXd, std::vector<int>> sample_regime_panel(const RegimeModel& model,
                                                                 int days, std::uint64_t seed) {
    if (days < 1) throw std::runtime_error("sample_regime_panel: days must be >= 1");
    const Eigen::Index n = model.mu_n.size();
    Eigen::LLT<Eigen::MatrixXd> llt_n(model.sigma_n);
    Eigen::LLT<Eigen::MatrixXd> llt_c(model.sigma_c);
    if (llt_n.info() != Eigen::Success || llt_c.info() != Eigen::Success)
        throw std::runtime_error("sample_regime_panel: covariance not positive definite");
    Eigen::MatrixXd ln = llt_n.matrixL();
    Eigen::MatrixXd lc = llt_c.matrixL();

    Rng rng(seed);
    std::vector<int> regimes(static_cast<size_t>(days));
    Eigen::MatrixXd panel(days, n);
    int state = rng.uniform() < stationary_normal_probability(model.p_nn, model.p_cc) ? 0 : 1;
    Eigen::VectorXd z(n);
    for (int d = 0; d < days; ++d) {
        regimes[static_cast<size_t>(d)] = state;
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.gaussian();
        if (state == 0) {
            panel.row(d) = (model.mu_n + ln * z).transpose();
        } else {
            panel.row(d) = (model.mu_c + lc * z).transpose();
        }
        const double stay = state == 0 ? model.p_nn : model.p_cc;
        if (rng.uniform() >= stay) state = 1 - state;
    }
    return {panel, regimes};
}

const std::vector<std::string>& default_assets() {
    static const std::vector<std::string> assets = {"BND", "EMB", "LQD", "MUB",
                                                    "VEA", "VNQ", "VTI", "VWO"};
    return assets;
}

const std::vector<int>& default_bond_indices() {
    static const std::vector<int> bonds = {0, 1, 2, 3};
    return bonds;
}

RegimeModel default_model() {
    RegimeModel m;
    const int n_bonds = 4;
    Eigen::VectorXd mu_n_ann(8), mu_c_ann(8), vol_n_ann(8);
    //         BND     EMB     LQD     MUB     VEA     VNQ     VTI     VWO
    mu_n_ann << 0.020, 0.028, 0.024, 0.018, 0.130, 0.140, 0.180, 0.110;
    vol_n_ann << 0.045, 0.085, 0.065, 0.042, 0.165, 0.190, 0.150, 0.200;
    mu_c_ann << -0.010, -0.030, -0.020, -0.005, -0.280, -0.320, -0.240, -0.300;

    m.mu_n = mu_n_ann / kDaysPerYear;
    m.mu_c = mu_c_ann / kDaysPerYear;
    m.sigma_n = covariance_from(vol_n_ann, 0.45, 0.65, 0.15, n_bonds);
    // Contractions scale volatility across the board; correlations and the
    // relative risk structure stay put, so Sigma_c is proportional to Sigma_n.
    m.sigma_c = 2.2 * 2.2 * m.sigma_n;
    m.p_nn = 0.995;
    m.p_cc = 0.955;
    return m;
}

Dataset generate(const RegimeModel& model, int days, std::uint64_t seed) {
    const Eigen::Index n = model.mu_n.size();
    auto [panel, regimes] = sample_regime_panel(model, days, seed);

    Dataset ds;
    ds.regimes = std::move(regimes);
    std::vector<std::string> dates = business_dates(days + 1);

    ds.prices.dates = dates;
    ds.prices.assets = static_cast<size_t>(n) == default_assets().size()
                           ? default_assets()
                           : std::vector<std::string>();
    if (ds.prices.assets.empty())
        for (Eigen::Index i = 0; i < n; ++i) ds.prices.assets.push_back("A" + std::to_string(i));
    ds.prices.values.resize(days + 1, n);
    ds.prices.values.row(0).setConstant(100.0);
    for (int d = 0; d < days; ++d)
        ds.prices.values.row(d + 1) =
            ds.prices.values.row(d).cwiseProduct((1.0 + panel.row(d).array()).matrix());

    // AUM: constant share counts, so market weights drift with prices.
    Eigen::VectorXd base(n);
    if (n == 8) {
        base << 90.0, 20.0, 35.0, 30.0, 100.0, 40.0, 300.0, 80.0;
    } else {
        base.setConstant(100.0);
    }
    ds.aum.dates = dates;
    ds.aum.assets = ds.prices.assets;
    ds.aum.values = ds.prices.values.array().rowwise() *
                    (base.transpose().array() / 100.0);

    // Index: the risky-class average plus a little idiosyncratic noise.
    Rng idx_rng(seed ^ 0xabcdef1234567890ULL);
    ds.index.dates = dates;
    ds.index.assets = {"SPX"};
    ds.index.values.resize(days + 1, 1);
    ds.index.values(0, 0) = 100.0;
    const Eigen::Index n_bonds = static_cast<Eigen::Index>(default_bond_indices().size());
    for (int d = 0; d < days; ++d) {
        double r = 0.0;
        if (n > n_bonds) {
            r = panel.row(d).tail(n - n_bonds).mean();
        } else {
            r = panel.row(d).mean();
        }
        r += 0.002 / std::sqrt(kDaysPerYear) * idx_rng.gaussian();
        ds.index.values(d + 1, 0) = ds.index.values(d, 0) * (1.0 + r);
    }
    return ds;
}

Dataset generate_default(int days, std::uint64_t seed) {
    return generate(default_model(), days, seed);
}

void write_table_csv(const PriceTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "date";
    for (const auto& a : table.assets) out << ',' << a;
    out << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        out << table.dates[static_cast<size_t>(i)];
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", table.values(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace robo::synth
