#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "robo/market_data.hpp"

namespace fs = std::filesystem;
using namespace robo;

namespace {

fs::path write_temp_csv(const std::string& name, const std::string& content) {
    fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("full csv loads bit-equal") {
    auto p = write_temp_csv("md_full.csv",
                            "date,A,B\n"
                            "2020-01-01,100,50\n"
                            "2020-01-02,101,49.5\n"
                            "2020-01-03,99,51\n");
    PriceTable t = load_price_table(p.string());
    REQUIRE(t.dates.size() == 3);
    CHECK(t.assets == std::vector<std::string>{"A", "B"});
    CHECK(t.values(0, 0) == 100.0);
    CHECK(t.values(1, 1) == 49.5);
    CHECK(t.values(2, 0) == 99.0);
}

TEST_CASE("interior gap forward-fills from the prior price") {
    auto p = write_temp_csv("md_gap.csv",
                            "date,A,B\n"
                            "2020-01-01,100,50\n"
                            "2020-01-02,101,\n"
                            "2020-01-03,99,51\n");
    PriceTable t = load_price_table(p.string());
    CHECK(t.values(1, 1) == 50.0);
}

TEST_CASE("leading incomplete rows are dropped") {
    auto p = write_temp_csv("md_lead.csv",
                            "date,A,B\n"
                            "2020-01-01,,50\n"
                            "2020-01-02,101,51\n"
                            "2020-01-03,99,52\n");
    PriceTable t = load_price_table(p.string());
    REQUIRE(t.dates.size() == 2);
    CHECK(t.dates.front() == "2020-01-02");
}

TEST_CASE("duplicate date is rejected") {
    auto p = write_temp_csv("md_dup.csv",
                            "date,A\n"
                            "2020-01-01,100\n"
                            "2020-01-01,101\n");
    CHECK_THROWS_WITH_AS(load_price_table(p.string()),
                         doctest::Contains("duplicate date"), std::runtime_error);
}

TEST_CASE("bad values name row and column") {
    auto p = write_temp_csv("md_neg.csv",
                            "date,A\n"
                            "2020-01-01,100\n"
                            "2020-01-02,-5\n");
    CHECK_THROWS_WITH_AS(load_price_table(p.string()), doctest::Contains("row 3"),
                         std::runtime_error);

    auto p2 = write_temp_csv("md_text.csv",
                             "date,A\n"
                             "2020-01-01,abc\n");
    CHECK_THROWS_WITH_AS(load_price_table(p2.string()), doctest::Contains("column A"),
                         std::runtime_error);

    auto p3 = write_temp_csv("md_date.csv",
                             "date,A\n"
                             "not-a-date,100\n");
    CHECK_THROWS_WITH_AS(load_price_table(p3.string()), doctest::Contains("unparseable date"),
                         std::runtime_error);
}

TEST_CASE("empty file errors") {
    auto p = write_temp_csv("md_empty.csv", "");
    CHECK_THROWS_WITH_AS(load_price_table(p.string()), doctest::Contains("empty"),
                         std::runtime_error);
    auto p2 = write_temp_csv("md_header_only.csv", "date,A\n");
    CHECK_THROWS_WITH_AS(load_price_table(p2.string()), doctest::Contains("empty"),
                         std::runtime_error);
}

TEST_CASE("forward-fill idempotence") {
    auto base = write_temp_csv("md_ff1.csv",
                               "date,A,B\n"
                               "2020-01-01,100,50\n"
                               "2020-01-02,101,50\n"
                               "2020-01-03,99,51\n");
    auto gapped = write_temp_csv("md_ff2.csv",
                                 "date,A,B\n"
                                 "2020-01-01,100,50\n"
                                 "2020-01-02,101,\n"
                                 "2020-01-03,99,51\n");
    PriceTable a = load_price_table(base.string());
    PriceTable b = load_price_table(gapped.string());
    CHECK(a.values == b.values);
    CHECK(a.dates == b.dates);
}

TEST_CASE("to_returns applies the simple-return formula") {
    PriceTable t;
    t.dates = {"d1", "d2"};
    t.assets = {"A"};
    t.values.resize(2, 1);
    t.values << 100.0, 110.0;

    SUBCASE("single asset up move") {
        ReturnPanel r = to_returns(t);
        REQUIRE(r.values.rows() == 1);
        CHECK(r.values(0, 0) == doctest::Approx(0.10).epsilon(1e-14));
        CHECK(r.start_date == "d1");
        CHECK(r.dates == std::vector<std::string>{"d2"});
    }
    SUBCASE("constant prices give zero returns") {
        t.dates = {"d1", "d2", "d3"};
        t.values.resize(3, 1);
        t.values << 50.0, 50.0, 50.0;
        ReturnPanel r = to_returns(t);
        CHECK(r.values(0, 0) == 0.0);
        CHECK(r.values(1, 0) == 0.0);
    }
    SUBCASE("halving gives -0.5") {
        t.values << 100.0, 50.0;
        ReturnPanel r = to_returns(t);
        CHECK(r.values(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
    }
    SUBCASE("single row is insufficient") {
        t.dates = {"d1"};
        t.values.resize(1, 1);
        t.values << 100.0;
        CHECK_THROWS_AS(to_returns(t), std::runtime_error);
    }
}

TEST_CASE("round trip: returns length is dates minus one") {
    auto p = write_temp_csv("md_rt.csv",
                            "date,A,B\n"
                            "2020-01-01,100,50\n"
                            "2020-01-02,101,49\n"
                            "2020-01-03,99,51\n"
                            "2020-01-06,98,52\n");
    PriceTable t = load_price_table(p.string());
    ReturnPanel r = to_returns(t);
    CHECK(r.values.rows() == static_cast<Eigen::Index>(t.dates.size()) - 1);
    CHECK((r.values.array() > -1.0).all());
}

TEST_CASE("build_calendar lays out R(0) and its complement") {
    SUBCASE("weekly example") {
        RebalanceCalendar cal = build_calendar(0, 7, 4, 28);
        CHECK(cal.rebalance_dates == std::vector<int>{0, 7, 14, 21});
        CHECK(cal.non_rebalance_dates.size() == 24);
        CHECK(cal.non_rebalance_dates.front() == 1);
        CHECK(cal.non_rebalance_dates.back() == 27);
    }
    SUBCASE("monthly schedule over 56 periods") {
        RebalanceCalendar cal = build_calendar(0, 22, 56, 1232);
        REQUIRE(cal.rebalance_dates.size() == 56);
        CHECK(cal.rebalance_dates.front() == 0);
        CHECK(cal.rebalance_dates.back() == 1210);
    }
    SUBCASE("daily rebalancing leaves no complement") {
        RebalanceCalendar cal = build_calendar(0, 1, 5, 5);
        CHECK(cal.non_rebalance_dates.empty());
    }
    SUBCASE("partition property") {
        for (int step : {1, 3, 5}) {
            for (int periods : {1, 2, 4}) {
                const int total = 1 + step * periods;
                RebalanceCalendar cal = build_calendar(0, step, periods, total);
                CHECK(static_cast<int>(cal.rebalance_dates.size() +
                                       cal.non_rebalance_dates.size()) == total);
            }
        }
    }
    SUBCASE("overflow errors") {
        CHECK_THROWS_WITH_AS(build_calendar(0, 22, 56, 1210), doctest::Contains("overflow"),
                             std::runtime_error);
    }
}

TEST_CASE("equilibrium weights normalize rows") {
    PriceTable aum;
    aum.dates = {"d1", "d2"};
    aum.assets = {"A", "B", "C"};
    aum.values.resize(2, 3);
    aum.values << 2.0, 1.0, 1.0, 5.0, 5.0, 5.0;

    EquilibriumWeights eq = equilibrium_weights(aum);
    CHECK(eq.weights(0, 0) == doctest::Approx(0.5));
    CHECK(eq.weights(0, 1) == doctest::Approx(0.25));
    CHECK(eq.weights(1, 0) == doctest::Approx(1.0 / 3));
    for (int i = 0; i < 2; ++i) CHECK(eq.weights.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("all-zero row is degenerate") {
        aum.values.row(1).setZero();
        CHECK_THROWS_WITH_AS(equilibrium_weights(aum), doctest::Contains("degenerate"),
                             std::runtime_error);
    }
    SUBCASE("missing dates fall back to equal weight") {
        EquilibriumWeights aligned = align_equilibrium_weights(eq, {"d1", "dX", "d2"}, 3);
        CHECK(aligned.weights(1, 0) == doctest::Approx(1.0 / 3));
        CHECK(aligned.weights(1, 2) == doctest::Approx(1.0 / 3));
        CHECK(aligned.weights(0, 0) == doctest::Approx(0.5));
        CHECK(aligned.weights.row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}
