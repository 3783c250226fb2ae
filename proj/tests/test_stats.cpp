#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dynacc/stats.hpp"
#include "dynacc/util.hpp"
#include "support/helpers.hpp"

using namespace dynacc;
using testsupport::TempDir;

namespace {

TimeGrid grid_of(std::size_t slots) {
    TimeGrid g;
    g.start_s = 7 * 3600;
    g.step_s = 900;
    g.end_s = g.start_s + int(slots) * 900;
    g.validate();
    return g;
}

/// Field with hand-set values: two zones, `slots` slots, one scenario
/// series per entry of `per_scenario` laid out [zone * slots + slot].
AccessibilityField make_field(std::size_t slots,
                              std::map<Scenario, std::vector<double>> per_scenario) {
    AccessibilityField f;
    f.grid = grid_of(slots);
    f.values = std::move(per_scenario);
    const std::size_t total = f.values.begin()->second.size();
    f.n_zones = total / slots;
    for (std::size_t z = 0; z < f.n_zones; ++z) f.zone_ids.push_back("z" + std::to_string(z));
    if (f.has(Scenario::Reference)) {
        f.reference.resize(f.n_zones);
        for (std::size_t z = 0; z < f.n_zones; ++z)
            f.reference[z] = f.at(Scenario::Reference, z, 0);
    }
    return f;
}

}  // namespace

TEST_SUITE("stats") {
    TEST_CASE("summarize_values: two-point arithmetic") {
        const auto row = summarize_values("pair", {2.0, 4.0});
        CHECK(row.n == 2);
        CHECK(row.min == 2.0);
        CHECK(row.max == 4.0);
        CHECK(row.mean == 3.0);
        CHECK(row.sd == 1.0);  // population convention
        REQUIRE(row.cv_defined);
        CHECK(row.cv == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("summarize_values: constant values have zero spread") {
        const auto row = summarize_values("flat", {5.0, 5.0, 5.0});
        CHECK(row.sd == 0.0);
        REQUIRE(row.cv_defined);
        CHECK(row.cv == 0.0);
    }

    TEST_CASE("cv convention reproduces the published coefficient") {
        // A two-point set {m - s, m + s} has mean m and population sd s, so
        // it pins the cv formula to any published (mean, sd, cv) triple.
        const double mean = 6771.15, sd = 2772.49;
        const auto row = summarize_values("check", {mean - sd, mean + sd});
        CHECK(row.mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(row.sd == doctest::Approx(sd).epsilon(1e-9));
        CHECK(std::abs(row.cv - 40.95) < 0.01);
    }

    TEST_CASE("ratio convention reproduces the published comparisons") {
        SummaryRow dyn, ref;
        dyn.n = ref.n = 1010;
        dyn.cv = 46.39;
        ref.cv = 40.95;
        dyn.cv_defined = ref.cv_defined = true;
        dyn.mean = 6235.76;
        ref.mean = 6771.15;
        dyn.min = ref.min = 1.0;
        dyn.max = ref.max = 1.0;
        dyn.sd = ref.sd = 1.0;
        const auto r = ratios_vs_reference(dyn, ref);
        REQUIRE(r.cv_defined);
        CHECK(std::abs(r.cv - 1.13) < 0.005);
        REQUIRE(r.mean_defined);
        CHECK(std::abs(r.mean - 0.92) < 0.005);
    }

    TEST_CASE("ratios of a row with itself are exactly one") {
        const auto row = summarize_values("self", {3.0, 8.0, 1.5, 12.0});
        const auto r = ratios_vs_reference(row, row);
        CHECK(r.min == 1.0);
        CHECK(r.max == 1.0);
        CHECK(r.mean == 1.0);
        CHECK(r.sd == 1.0);
        CHECK(r.cv == 1.0);
        CHECK(r.cv_defined);
    }

    TEST_CASE("ratios: undefined entries are flagged, not fabricated") {
        SummaryRow dyn, ref;
        dyn.n = ref.n = 3;
        dyn.min = 1.0;
        ref.min = 0.0;  // zero reference
        dyn.max = ref.max = 2.0;
        dyn.mean = ref.mean = 2.0;
        dyn.sd = ref.sd = 0.5;
        dyn.cv_defined = true;
        ref.cv_defined = false;  // undefined reference cv
        dyn.cv = 25.0;
        ref.cv = std::numeric_limits<double>::quiet_NaN();
        const auto r = ratios_vs_reference(dyn, ref);
        CHECK_FALSE(r.min_defined);
        CHECK(std::isnan(r.min));
        CHECK(r.max_defined);
        CHECK_FALSE(r.cv_defined);
        CHECK(std::isnan(r.cv));

        SummaryRow other = ref;
        other.n = 4;
        CHECK_THROWS_WITH_AS(ratios_vs_reference(dyn, other),
                             doctest::Contains("different zone populations (3 vs 4)"), Error);
    }

    TEST_CASE("summarize_values: cv undefined for zero or negative mean") {
        const auto zero = summarize_values("zero", {0.0, 0.0});
        CHECK_FALSE(zero.cv_defined);
        CHECK(std::isnan(zero.cv));
        const auto neg = summarize_values("neg", {-2.0, -4.0});
        CHECK_FALSE(neg.cv_defined);
    }

    TEST_CASE("summarize_values: input validation") {
        CHECK_THROWS_WITH_AS(summarize_values("e", {}), doctest::Contains("empty value set"),
                             Error);
        CHECK_THROWS_WITH_AS(
            summarize_values("n", {1.0, std::numeric_limits<double>::quiet_NaN()}),
            doctest::Contains("non-finite value"), Error);
        CHECK_THROWS_WITH_AS(summarize_values("i", {std::numeric_limits<double>::infinity()}),
                             doctest::Contains("non-finite value"), Error);
    }

    TEST_CASE("summary is exactly permutation invariant and cv scale invariant") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> dist(10.0, 5000.0);
        std::vector<double> vals(37);
        for (double& v : vals) v = dist(rng);

        auto shuffled = vals;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto a = summarize_values("x", vals);
        const auto b = summarize_values("x", shuffled);
        CHECK(a.min == b.min);
        CHECK(a.max == b.max);
        CHECK(a.mean == b.mean);  // sorted accumulation makes this exact
        CHECK(a.sd == b.sd);
        CHECK(a.cv == b.cv);

        auto scaled = vals;
        for (double& v : scaled) v *= 3.7;
        const auto c = summarize_values("x", scaled);
        CHECK(c.cv == doctest::Approx(a.cv).epsilon(1e-12));
    }

    TEST_CASE("cv_over_time") {
        // zone 0 flat at 7, zone 1 is the {100, 300} example
        auto f = make_field(2, {{Scenario::DynamicCongestion, {7.0, 7.0, 100.0, 300.0}}});
        CHECK(cv_over_time(f, Scenario::DynamicCongestion, 0) == 0.0);
        CHECK(cv_over_time(f, Scenario::DynamicCongestion, 1) ==
              doctest::Approx(50.0).epsilon(1e-12));

        SUBCASE("matches a brute-force recomputation") {
            std::mt19937_64 rng(99);
            std::uniform_real_distribution<double> dist(500.0, 9000.0);
            std::vector<double> series(24);
            for (double& v : series) v = dist(rng);
            auto g = make_field(24, {{Scenario::DynamicAccessibility, series}});
            double sum = 0.0;
            for (double v : series) sum += v;
            const double mean = sum / 24.0;
            double ss = 0.0;
            for (double v : series) ss += (v - mean) * (v - mean);
            const double expected = 100.0 * std::sqrt(ss / 24.0) / mean;
            CHECK(cv_over_time(g, Scenario::DynamicAccessibility, 0) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
        SUBCASE("zero mean is NaN") {
            auto g = make_field(2, {{Scenario::Reference, {0.0, 0.0}}});
            CHECK(std::isnan(cv_over_time(g, Scenario::Reference, 0)));
        }
        SUBCASE("needs two slots") {
            auto g = make_field(1, {{Scenario::Reference, {1.0}}});
            CHECK_THROWS_WITH_AS(cv_over_time(g, Scenario::Reference, 0),
                                 doctest::Contains("at least two slots"), Error);
        }
        SUBCASE("bad scenario and zone") {
            CHECK_THROWS_WITH_AS(cv_over_time(f, Scenario::Reference, 0),
                                 doctest::Contains("no scenario reference"), Error);
            CHECK_THROWS_WITH_AS(cv_over_time(f, Scenario::DynamicCongestion, 2),
                                 doctest::Contains("zone index out of range"), Error);
        }
    }

    TEST_CASE("zone_cv_series covers every zone") {
        auto f = make_field(2, {{Scenario::Reference, {7.0, 7.0, 0.0, 0.0, 100.0, 300.0}}});
        const auto cvs = zone_cv_series(f, Scenario::Reference);
        REQUIRE(cvs.size() == 3);
        CHECK(cvs[0] == 0.0);
        CHECK(std::isnan(cvs[1]));
        CHECK(cvs[2] == doctest::Approx(50.0).epsilon(1e-12));
    }

    TEST_CASE("summarize_across_zones slices one slot") {
        auto f = make_field(2, {{Scenario::Reference, {2.0, 9.0, 4.0, 9.0}}});
        const auto row = summarize_across_zones(f, Scenario::Reference, 0);
        CHECK(row.n == 2);
        CHECK(row.mean == 3.0);
        CHECK(row.sd == 1.0);
        CHECK(row.label == "reference@0700");
        CHECK_THROWS_WITH_AS(summarize_across_zones(f, Scenario::DynamicCongestion, 0),
                             doctest::Contains("no scenario dynamic_congestion"), Error);
        CHECK_THROWS_WITH_AS(summarize_across_zones(f, Scenario::Reference, 2),
                             doctest::Contains("slot out of range"), Error);
    }

    TEST_CASE("write_summary_csv: reference row plus per-slot scenario rows") {
        // reference flat per zone; congestion varies by slot
        auto f = make_field(2, {{Scenario::Reference, {2.0, 2.0, 4.0, 4.0}},
                                {Scenario::DynamicCongestion, {2.0, 3.0, 4.0, 5.0}}});
        TempDir dir;
        write_summary_csv(dir.file("summary.csv"), f);
        const std::string text = read_file(dir.file("summary.csv"));
        auto lines = [](const std::string& s) {
            std::vector<std::string> out;
            std::size_t pos = 0;
            while (pos < s.size()) {
                const auto nl = s.find('\n', pos);
                out.push_back(s.substr(pos, nl - pos));
                pos = nl + 1;
            }
            return out;
        }(text);
        REQUIRE(lines.size() == 4);
        CHECK(lines[0] ==
              "scenario,slot_start_hhmm,n,min,max,mean,sd,cv,"
              "ratio_min,ratio_max,ratio_mean,ratio_sd,ratio_cv");
        // mean 3, sd 1, cv 33.33...; ratio cells empty for the reference
        CHECK(lines[1] ==
              "reference,all,2,2,4,3,1,33.333333333333336,,,,,");
        // slot 0 equals the reference, so every ratio is exactly 1
        CHECK(lines[2] == "dynamic_congestion,0700,2,2,4,3,1,33.333333333333336,1,1,1,1,1");
        // slot 1: {3, 5} -> mean 4, sd 1, cv 25
        CHECK(lines[3] ==
              "dynamic_congestion,0715,2,3,5,4,1,25,1.5,1.25,1.3333333333333333,1,0.75");

        SUBCASE("requires the reference scenario") {
            auto g = make_field(2, {{Scenario::DynamicCongestion, {1.0, 2.0, 3.0, 4.0}}});
            CHECK_THROWS_WITH_AS(write_summary_csv(dir.file("bad.csv"), g),
                                 doctest::Contains("must contain the reference"), Error);
        }
    }

    TEST_CASE("write_zone_cv_csv leaves undefined cells empty") {
        auto f = make_field(2, {{Scenario::Reference, {7.0, 7.0, 0.0, 0.0}}});
        TempDir dir;
        write_zone_cv_csv(dir.file("cv.csv"), f);
        CHECK(read_file(dir.file("cv.csv")) ==
              "zone_id,scenario,cv_percent\n"
              "z0,reference,0\n"
              "z1,reference,\n");
    }
}
