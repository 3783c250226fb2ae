#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dynacc/network.hpp"
#include "dynacc/synth.hpp"
#include "support/helpers.hpp"

using namespace dynacc;
using testsupport::NetBuilder;
using testsupport::TempDir;
using testsupport::write_text;

namespace {

constexpr double kT0800 = 8 * 3600;

/// Two junctions joined by one arc; the arc optionally carries a profile
/// with `factor` on [from_s, to_s) and 1.0 elsewhere.
RoadNetwork one_arc(double length_m, double kmh, double factor = 1.0, int from_s = 0,
                    int to_s = 0) {
    NetBuilder b;
    b.junction("a", 0, 0).junction("b", length_m, 0);
    if (to_s > from_s) {
        b.profile("p", 1.0, factor, from_s, to_s);
        b.arc("e", "a", "b", length_m, kmh, 6, "p");
    } else {
        b.arc("e", "a", "b", length_m, kmh);
    }
    return b.build();
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("two nodes one arc and an empty profile file load at free flow") {
    TempDir dir;
    write_text(dir.file("nodes.csv"), "node_id,x,y\nn1,0,0\nn2,1000,0\n");
    write_text(dir.file("arcs.csv"),
               "arc_id,from,to,length_m,freeflow_kmh,frc,profile_id\ne1,n1,n2,1000,60,6,\n");
    write_text(dir.file("profiles.csv"), "profile_id,slot,factor\n");
    RoadNetwork net = load_network(dir.file("nodes.csv"), dir.file("arcs.csv"),
                                   dir.file("profiles.csv"));
    REQUIRE(net.junctions.size() == 2);
    REQUIRE(net.arcs.size() == 1);
    CHECK(net.arcs[0].profile == -1);
    CHECK(net.arc_speed(0, kT0800) == doctest::Approx(60.0));
    CHECK(net.traverse(0, 0.0) == doctest::Approx(60.0));
}

TEST_CASE("arc referencing a missing node fails naming the arc") {
    TempDir dir;
    write_text(dir.file("nodes.csv"), "node_id,x,y\nn1,0,0\n");
    write_text(dir.file("arcs.csv"),
               "arc_id,from,to,length_m,freeflow_kmh,frc,profile_id\ne9,n1,ghost,1000,60,6,\n");
    write_text(dir.file("profiles.csv"), "profile_id,slot,factor\n");
    try {
        load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv"));
        FAIL("expected load error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("e9") != std::string::npos);
        CHECK(msg.find("ghost") != std::string::npos);
    }
}

TEST_CASE("loader validations carry line numbers and reasons") {
    TempDir dir;
    const std::string nodes = "node_id,x,y\nn1,0,0\nn2,1000,0\n";
    const std::string arcs =
        "arc_id,from,to,length_m,freeflow_kmh,frc,profile_id\ne1,n1,n2,1000,60,6,\n";
    write_text(dir.file("nodes.csv"), nodes);
    write_text(dir.file("arcs.csv"), arcs);

    SUBCASE("profile slot out of range") {
        write_text(dir.file("profiles.csv"), "profile_id,slot,factor\np,288,1.0\n");
        try {
            load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv"));
            FAIL("expected error");
        } catch (const Error& e) {
            const std::string msg = e.what();
            CHECK(msg.find(":2:") != std::string::npos);  // offending line
            CHECK(msg.find("[0,287]") != std::string::npos);
        }
    }
    SUBCASE("factor above 2.0 flagged as unit error") {
        write_text(dir.file("profiles.csv"), "profile_id,slot,factor\np,0,35\n");
        CHECK_THROWS_WITH_AS(
            load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv")),
            doctest::Contains("unit error"), Error);
    }
    SUBCASE("incomplete profile rejected with slot count") {
        std::string p = "profile_id,slot,factor\n";
        for (int s = 0; s < 287; ++s) p += "p," + std::to_string(s) + ",1.0\n";
        write_text(dir.file("profiles.csv"), p);
        CHECK_THROWS_WITH_AS(
            load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv")),
            doctest::Contains("287 slots, expected 288"), Error);
    }
    SUBCASE("malformed number names the line") {
        write_text(dir.file("profiles.csv"), "profile_id,slot,factor\n");
        write_text(dir.file("nodes.csv"), "node_id,x,y\nn1,0,zero\n");
        CHECK_THROWS_WITH_AS(
            load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv")),
            doctest::Contains(":2:"), Error);
    }
    SUBCASE("duplicate node id rejected") {
        write_text(dir.file("profiles.csv"), "profile_id,slot,factor\n");
        write_text(dir.file("nodes.csv"), "node_id,x,y\nn1,0,0\nn1,5,5\nn2,1000,0\n");
        CHECK_THROWS_WITH_AS(
            load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv")),
            doctest::Contains("duplicate node_id n1"), Error);
    }
    SUBCASE("nonpositive length rejected") {
        write_text(dir.file("profiles.csv"), "profile_id,slot,factor\n");
        write_text(dir.file("arcs.csv"),
                   "arc_id,from,to,length_m,freeflow_kmh,frc,profile_id\ne1,n1,n2,0,60,6,\n");
        CHECK_THROWS_WITH_AS(
            load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv")),
            doctest::Contains("length_m must be > 0"), Error);
    }
}

TEST_CASE("grid fixture loads with 100 junctions and 360 arcs") {
    TempDir dir;
    write_grid_city(dir.path, GridCityParams{});
    RoadNetwork net =
        load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv"));
    CHECK(net.junctions.size() == 100);
    CHECK(net.arcs.size() == 360);
}

TEST_CASE("arc_speed reads the slot factor directly") {
    SUBCASE("no profile") {
        RoadNetwork net = one_arc(1000, 60);
        CHECK(net.arc_speed(0, kT0800) == doctest::Approx(60.0));
    }
    SUBCASE("factor 0.5 during [08:00,08:05)") {
        RoadNetwork net = one_arc(1000, 100, 0.5, 8 * 3600, 8 * 3600 + 300);
        CHECK(net.arc_speed(0, 8 * 3600 + 120) == doctest::Approx(50.0));   // 08:02
        CHECK(net.arc_speed(0, 8 * 3600 - 1) == doctest::Approx(100.0));    // 07:59:59
        CHECK(net.arc_speed(0, 8 * 3600 + 300) == doctest::Approx(100.0));  // 08:05
    }
    SUBCASE("23:59:59 reads slot 287") {
        NetBuilder b;
        b.junction("a", 0, 0).junction("b", 100, 0);
        std::vector<double> factors(kProfileSlots, 1.0);
        factors[287] = 0.25;
        b.profile_slots("p", factors);
        b.arc("e", "a", "b", 100, 80, 6, "p");
        RoadNetwork net = b.build();
        CHECK(net.arc_speed(0, 86399.0) == doctest::Approx(20.0));
        CHECK(net.arc_speed(0, 86100.0) == doctest::Approx(20.0));  // 23:55, slot start
        CHECK(net.arc_speed(0, 86099.0) == doctest::Approx(80.0));
    }
}

TEST_CASE("traverse integrates piecewise-constant speeds") {
    SUBCASE("1 km at 60 km/h, no profile: one minute") {
        RoadNetwork net = one_arc(1000, 60);
        CHECK(net.traverse(0, kT0800) == doctest::Approx(kT0800 + 60.0).epsilon(1e-12));
    }
    SUBCASE("2 km, factor 0.5 in slot: finishes inside the slot at 08:04:00") {
        RoadNetwork net = one_arc(2000, 60, 0.5, 8 * 3600, 8 * 3600 + 300);
        CHECK(net.traverse(0, kT0800) ==
              doctest::Approx(8 * 3600 + 4 * 60).epsilon(1e-12));
    }
    SUBCASE("3 km entered mid-slot at 08:02:30 crosses the boundary: exit 08:06:45") {
        RoadNetwork net = one_arc(3000, 60, 0.5, 8 * 3600, 8 * 3600 + 300);
        const double entry = 8 * 3600 + 150;
        const double expect = 8 * 3600 + 6 * 60 + 45;
        CHECK(net.traverse(0, entry) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("entries past midnight wrap onto the daily profile") {
        RoadNetwork net = one_arc(2000, 60, 0.5, 8 * 3600, 8 * 3600 + 300);
        const double entry = kSecondsPerDay + kT0800;
        CHECK(net.traverse(0, entry) - entry == doctest::Approx(240.0).epsilon(1e-12));
    }
}

TEST_CASE("FIFO holds over ten thousand random entry pairs") {
    std::mt19937_64 rng(20130101);
    NetBuilder b;
    b.junction("a", 0, 0).junction("b", 2500, 0);
    std::vector<double> factors(kProfileSlots);
    for (double& f : factors) f = 0.3 + 0.005 * double(bounded_rand(rng, 241));
    b.profile_slots("p", factors);
    b.arc("e", "a", "b", 2500, 45, 6, "p");
    RoadNetwork net = b.build();

    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        double t1 = double(bounded_rand(rng, 2 * kSecondsPerDay * 10)) / 10.0;
        double t2 = double(bounded_rand(rng, 2 * kSecondsPerDay * 10)) / 10.0;
        if (t1 > t2) std::swap(t1, t2);
        if (net.traverse(0, t1) > net.traverse(0, t2) + 1e-9) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("free-flow consistency: all-ones profile behaves like no profile") {
    NetBuilder b;
    b.junction("a", 0, 0).junction("b", 1234, 0);
    b.profile("ones", 1.0);
    b.arc("e", "a", "b", 1234.5, 37.0, 6, "ones");
    RoadNetwork net = b.build();
    const double expect = 1234.5 / (37.0 * 1000.0 / 3600.0);
    for (double entry : {0.0, 150.0, 29999.0, 43200.0, 86399.5, 100000.0}) {
        CHECK(std::abs((net.traverse(0, entry) - entry) - expect) < 1e-9);
    }
}

TEST_CASE("lowering profile factors never shortens a traversal") {
    std::mt19937_64 rng(77);
    std::vector<double> fast(kProfileSlots), slow(kProfileSlots);
    for (int s = 0; s < kProfileSlots; ++s) {
        fast[s] = 0.5 + 0.005 * double(bounded_rand(rng, 200));
        slow[s] = fast[s] * (0.4 + 0.006 * double(bounded_rand(rng, 100)));
    }
    NetBuilder b;
    b.junction("a", 0, 0).junction("b", 3000, 0);
    b.profile_slots("fast", fast).profile_slots("slow", slow);
    b.arc("ef", "a", "b", 3000, 50, 6, "fast");
    b.arc("es", "a", "b", 3000, 50, 6, "slow");
    RoadNetwork net = b.build();
    bool ok = true;
    for (int i = 0; i < 500; ++i) {
        const double entry = double(bounded_rand(rng, kSecondsPerDay));
        const double d_fast = net.traverse(0, entry) - entry;
        const double d_slow = net.traverse(1, entry) - entry;
        if (d_slow < d_fast - 1e-9) ok = false;
    }
    CHECK(ok);
}

TEST_CASE("splitting an arc into collinear halves does not change the journey") {
    std::mt19937_64 rng(11);
    std::vector<double> factors(kProfileSlots);
    for (double& f : factors) f = 0.3 + 0.005 * double(bounded_rand(rng, 241));

    NetBuilder b;
    b.junction("a", 0, 0).junction("m", 1400, 0).junction("b", 2800, 0);
    b.profile_slots("p", factors);
    b.arc("whole", "a", "b", 2800, 42, 6, "p");
    b.arc("h1", "a", "m", 1400, 42, 6, "p");
    b.arc("h2", "m", "b", 1400, 42, 6, "p");
    RoadNetwork net = b.build();

    bool ok = true;
    for (int i = 0; i < 2000; ++i) {
        const double entry = double(bounded_rand(rng, kSecondsPerDay * 10)) / 10.0;
        const double direct = net.traverse(0, entry);
        const double via_mid = net.traverse(2, net.traverse(1, entry));
        if (std::abs(direct - via_mid) >= 1e-9) ok = false;
    }
    CHECK(ok);
}

TEST_CASE("filter_by_frc keeps arcs at or below the threshold") {
    NetBuilder b;
    b.junction("a", 0, 0).junction("b", 1000, 0).junction("c", 2000, 0);
    b.arc("ring", "a", "b", 1000, 90, 0);
    b.arc("street", "b", "c", 1000, 50, 6);
    b.arc("alley", "c", "a", 1000, 20, 7);
    RoadNetwork net = b.build();

    SUBCASE("max_frc 7 is a no-op on the arc set") {
        RoadNetwork f = net.filter_by_frc(7);
        CHECK(f.arcs.size() == 3);
        CHECK(f.junctions.size() == 3);
    }
    SUBCASE("max_frc 6 drops the alley") {
        RoadNetwork f = net.filter_by_frc(6);
        REQUIRE(f.arcs.size() == 2);
        for (const Arc& a : f.arcs) CHECK(a.frc <= 6);
    }
    SUBCASE("isolated junctions disappear with their arcs") {
        RoadNetwork f = net.filter_by_frc(0);
        CHECK(f.arcs.size() == 1);
        CHECK(f.junctions.size() == 2);
        CHECK_FALSE(f.has_junction("c"));
    }
    SUBCASE("filtering everything away is an error") {
        NetBuilder only7;
        only7.junction("a", 0, 0).junction("b", 1, 0);
        only7.arc("x", "a", "b", 100, 30, 7);
        RoadNetwork n7 = only7.build();
        CHECK_THROWS_WITH_AS(n7.filter_by_frc(6), doctest::Contains("removed every arc"), Error);
    }
    SUBCASE("source network is untouched") {
        RoadNetwork f = net.filter_by_frc(0);
        CHECK(net.arcs.size() == 3);
        CHECK(f.arcs.size() == 1);
    }
}

TEST_CASE("grid fixture stays strongly connected without its alleys") {
    TempDir dir;
    write_grid_city(dir.path, GridCityParams{});
    RoadNetwork net =
        load_network(dir.file("nodes.csv"), dir.file("arcs.csv"), dir.file("profiles.csv"));
    RoadNetwork filtered = net.filter_by_frc(6);
    CHECK(filtered.arcs.size() == 356);  // two two-way alleys removed
    CHECK(filtered.junctions.size() == 100);

    const auto fwd = freeflow_seconds(filtered, 0, false);
    const auto bwd = freeflow_seconds(filtered, 0, true);
    bool strongly_connected = true;
    for (std::size_t j = 0; j < filtered.junctions.size(); ++j) {
        if (fwd[j] == kUnreachableSeconds || bwd[j] == kUnreachableSeconds)
            strongly_connected = false;
    }
    CHECK(strongly_connected);
}

TEST_CASE("freeflow_seconds matches hand-computed times, reverse transposes") {
    // a --600s--> b --300s--> c and a 450 s shortcut a -> c
    NetBuilder b;
    b.junction("a", 0, 0).junction("b", 10000, 0).junction("c", 15000, 0);
    b.arc("ab", "a", "b", 10000, 60);   // 600 s
    b.arc("bc", "b", "c", 5000, 60);    // 300 s
    b.arc("ac", "a", "c", 7500, 60);    // 450 s, beats ab+bc
    RoadNetwork net = b.build();
    const auto from_a = freeflow_seconds(net, net.junction_index("a"));
    CHECK(from_a[net.junction_index("b")] == doctest::Approx(600.0));
    CHECK(from_a[net.junction_index("c")] == doctest::Approx(450.0));

    const auto to_a = freeflow_seconds(net, net.junction_index("a"), true);
    CHECK(to_a[net.junction_index("b")] == kUnreachableSeconds);  // no arc back

    const auto to_c = freeflow_seconds(net, net.junction_index("c"), true);
    CHECK(to_c[net.junction_index("a")] == doctest::Approx(450.0));
}

}  // TEST_SUITE
