// Writes the bundled synthetic market dataset (prices, AUM, index CSVs).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>

#include "robo/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic reference dataset"};
    std::string out_dir = "data";
    int days = 2492;  // 1260 estimation rows + 56 monthly rebalances * 22 days
    std::uint64_t seed = 7;
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--days", days, "number of return days");
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);
    robo::synth::Dataset ds = robo::synth::generate_default(days, seed);
    const auto dir = std::filesystem::path(out_dir);
    robo::synth::write_table_csv(ds.prices, (dir / "prices.csv").string());
    robo::synth::write_table_csv(ds.aum, (dir / "aum.csv").string());
    robo::synth::write_table_csv(ds.index, (dir / "index.csv").string());
    std::printf("wrote %d days of prices/aum/index to %s\n", days, out_dir.c_str());
    return 0;
}
