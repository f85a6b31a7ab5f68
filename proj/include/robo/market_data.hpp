#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace robo {

// Dated tables of prices / assets-under-management and the derived return
// panel. Dates are opaque ordinal labels (ISO strings sort chronologically);
// all day arithmetic is done on row indices.

struct PriceTable {
    std::vector<std::string> dates;   // strictly increasing, no duplicates
    std::vector<std::string> assets;  // column order as in the file
    Eigen::MatrixXd values;           // one row per date
};

struct ReturnPanel {
    // Row t holds the simple return earned between price rows t and t+1 and
    // is labelled with the period's end date. start_date keeps the dropped
    // first price date so consumers can label the start of a window.
    std::string start_date;
    std::vector<std::string> dates;
    std::vector<std::string> assets;
    Eigen::MatrixXd values;

    // Date label of decision day t (the price date at row index t).
    const std::string& day_label(int t) const {
        return t == 0 ? start_date : dates[static_cast<size_t>(t) - 1];
    }
};

struct RebalanceCalendar {
    int horizon_T = 0;  // decision days 0..T-1
    std::vector<int> rebalance_dates;      // R(0)
    std::vector<int> non_rebalance_dates;  // NR(0) = complement
    int step = 0;
    int periods = 0;
};

struct EquilibriumWeights {
    std::vector<std::string> dates;
    Eigen::MatrixXd weights;  // each row nonnegative, sums to 1
};

enum class MissingPolicy { ForwardFill };

// Loads a dated CSV (first column header `date`, remaining columns tickers,
// empty cell = missing). Interior/trailing gaps are forward-filled from the
// last observed value; leading rows with any missing value are dropped.
// Set require_strictly_positive=false for AUM tables (zeros allowed).
PriceTable load_price_table(const std::string& path,
                            MissingPolicy policy = MissingPolicy::ForwardFill,
                            bool require_strictly_positive = true);

ReturnPanel to_returns(const PriceTable& prices);

// R(0) = {start, start+step, ...} with `periods` entries inside [0, total_T).
RebalanceCalendar build_calendar(int start, int step, int periods, int total_T);

// Row-normalized AUM; throws on an all-zero row.
EquilibriumWeights equilibrium_weights(const PriceTable& aum);

// Resamples equilibrium weights onto `dates`; dates absent from the source
// fall back to the equal-weight vector.
EquilibriumWeights align_equilibrium_weights(const EquilibriumWeights& src,
                                             const std::vector<std::string>& dates,
                                             int n_assets);

}  // namespace robo
