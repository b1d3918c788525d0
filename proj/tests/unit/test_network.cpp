#include <random>

#include "doctest.h"
#include "dynamap/errors.hpp"
#include "dynamap/network.hpp"
#include "dynamap/network_io.hpp"
#include "test_util.hpp"

using namespace dynamap;
using testutil::EdgeSpec;

TEST_CASE("weekday names round-trip") {
    for (int d = 0; d < 7; ++d)
        CHECK(parse_weekday(weekday_name(static_cast<Weekday>(d))) == static_cast<Weekday>(d));
    CHECK_THROWS_AS(parse_weekday("Funday"), ValidationError);
}

TEST_CASE("instant wraps and bins") {
    CHECK(Instant(-10.0).seconds() == doctest::Approx(86390.0));
    CHECK(Instant(86400.0).seconds() == 0.0);
    CHECK(Instant::from_hms(8, 2).bin() == 96);     // 08:02 sits in the 08:00 bin
    CHECK(Instant::from_hms(23, 58).bin() == 287);  // 23:58 sits in the 23:55 bin
    CHECK(Instant::from_hms(0, 0).bin() == 0);
}

TEST_CASE("edge speed lookup") {
    auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
    prof.bins[96] = 0.5;
    RoadNetwork net = testutil::make_net(
        2, {{0, 1, 1000.0, 50.0, 1}, {0, 1, 1000.0, 50.0, -1}}, {prof});

    const Edge& profiled = net.edges[0];
    const Edge& plain = net.edges[1];
    CHECK(edge_speed_at(net, plain, Instant::from_hms(8, 2)) == 50.0);
    CHECK(edge_speed_at(net, profiled, Instant::from_hms(7, 0)) == 50.0);
    CHECK(edge_speed_at(net, profiled, Instant::from_hms(8, 2)) == 25.0);

    // piecewise constant: same value across the bin, switch at the boundary
    CHECK(edge_speed_at(net, profiled, Instant(96 * 300.0)) == 25.0);
    CHECK(edge_speed_at(net, profiled, Instant(97 * 300.0 - 1e-3)) == 25.0);
    CHECK(edge_speed_at(net, profiled, Instant(97 * 300.0)) == 50.0);
}

TEST_CASE("frozen-entry traversal minutes") {
    auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
    prof.bins[96] = 0.5;
    RoadNetwork net = testutil::make_net(2, {{0, 1, 1000.0, 50.0, 1}}, {prof});

    CHECK(edge_traversal_time(net, net.edges[0], Instant::from_hms(3, 0)) ==
          doctest::Approx(1.2).epsilon(1e-12));
    CHECK(edge_traversal_time(net, net.edges[0], Instant::from_hms(8, 2)) ==
          doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("network validation rejects bad input") {
    SUBCASE("unknown node") {
        RoadNetwork net;
        net.weekday = Weekday::Wed;
        net.nodes.push_back({0, {0.0, 0.0}});
        Edge e;
        e.id = 7;
        e.from_node = 0;
        e.to_node = 99;
        e.length_m = 10.0;
        e.freeflow_kmh = 50.0;
        net.edges.push_back(e);
        CHECK_THROWS_WITH_AS(net.finalize(), "edge 7: unknown node 99", ValidationError);
    }
    SUBCASE("profile bin above cap") {
        auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
        prof.bins[10] = 1.6;
        CHECK_THROWS_AS(testutil::make_net(2, {{0, 1, 1000.0, 50.0, 1}}, {prof}), ValidationError);
    }
    SUBCASE("profile bin zero") {
        auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
        prof.bins[10] = 0.0;
        CHECK_THROWS_AS(testutil::make_net(2, {{0, 1, 1000.0, 50.0, 1}}, {prof}), ValidationError);
    }
    SUBCASE("non-positive length") {
        CHECK_THROWS_AS(testutil::make_net(2, {{0, 1, 0.0, 50.0, -1}}), ValidationError);
    }
    SUBCASE("weekday mismatch") {
        auto prof = testutil::flat_profile(1, Weekday::Mon, 1.0);
        CHECK_THROWS_AS(testutil::make_net(2, {{0, 1, 100.0, 50.0, 1}}, {prof}), ValidationError);
    }
}

TEST_CASE("fifoize keeps constant profiles intact") {
    auto prof = testutil::flat_profile(1, Weekday::Wed, 0.8);
    RoadNetwork net = testutil::make_net(2, {{0, 1, 1000.0, 60.0, 1}}, {prof});
    RoadNetwork fifo = fifoize(net);
    for (double t : {0.0, 299.9, 300.0, 43200.0, 86100.0, 86399.5})
        CHECK(fifo.traversal_seconds(0, t) == net.traversal_seconds(0, t));
}

TEST_CASE("fifoize removes overtaking at a bin boundary") {
    // Slow first bin: entering at 299 s would arrive after the 300 s entrant.
    auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
    prof.bins[0] = 0.5;
    RoadNetwork raw = testutil::make_net(2, {{0, 1, 1000.0, 60.0, 1}}, {prof});

    double a_before = 299.0 + raw.traversal_seconds(0, 299.0);
    double a_after = 300.0 + raw.traversal_seconds(0, 300.0);
    REQUIRE(a_before > a_after);  // the raw model does overtake

    RoadNetwork fifo = fifoize(raw);
    double f_before = 299.0 + fifo.traversal_seconds(0, 299.0);
    double f_after = 300.0 + fifo.traversal_seconds(0, 300.0);
    CHECK(f_before <= f_after);
    // waiting envelope: the early entrant waits for the fast bin
    CHECK(f_before == doctest::Approx(360.0).epsilon(1e-12));
}

// Independent fixpoint of the cyclic backward recurrence, iterated to
// convergence rather than swept twice.
static std::array<double, kBinsPerDay> envelope_fixpoint(const RoadNetwork& raw, int edge) {
    std::array<double, kBinsPerDay> a;
    for (int k = 0; k < kBinsPerDay; ++k)
        a[static_cast<size_t>(k)] = k * kSecondsPerBin + raw.raw_traversal_seconds(edge, k);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int k = kBinsPerDay - 1; k >= 0; --k) {
            double next = (k + 1 < kBinsPerDay) ? a[static_cast<size_t>(k) + 1] : a[0] + kSecondsPerDay;
            if (next < a[static_cast<size_t>(k)]) {
                a[static_cast<size_t>(k)] = next;
                changed = true;
            }
        }
    }
    return a;
}

TEST_CASE("fifoize equals the envelope fixpoint on random profiles") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        SpeedProfile prof;
        prof.id = 1;
        prof.weekday = Weekday::Wed;
        for (int k = 0; k < kBinsPerDay; ++k)
            prof.bins[static_cast<size_t>(k)] = 0.2 + 1.3 * testutil::unit_draw(rng);
        RoadNetwork raw = testutil::make_net(2, {{0, 1, 2000.0, 40.0, 1}}, {prof});
        RoadNetwork fifo = fifoize(raw);

        auto oracle = envelope_fixpoint(raw, 0);
        for (int k = 0; k < kBinsPerDay; ++k) {
            double got = k * kSecondsPerBin + fifo.traversal_seconds(0, k * kSecondsPerBin);
            CHECK(got == doctest::Approx(oracle[static_cast<size_t>(k)]).epsilon(1e-13));
        }
        // bin-start arrivals non-decreasing across the day
        for (int k = 0; k + 1 < kBinsPerDay; ++k) {
            double a0 = k * kSecondsPerBin + fifo.traversal_seconds(0, k * kSecondsPerBin);
            double a1 = (k + 1) * kSecondsPerBin + fifo.traversal_seconds(0, (k + 1) * kSecondsPerBin);
            CHECK(a0 <= a1);
        }
    }
}

TEST_CASE("arrival is non-decreasing in departure after fifoize") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        SpeedProfile prof;
        prof.id = 1;
        prof.weekday = Weekday::Wed;
        for (int k = 0; k < kBinsPerDay; ++k)
            prof.bins[static_cast<size_t>(k)] = 0.3 + 1.1 * testutil::unit_draw(rng);
        RoadNetwork fifo =
            fifoize(testutil::make_net(2, {{0, 1, 1500.0, 30.0, 1}}, {prof}));
        double prev = -1.0;
        for (int s = 0; s < 2880; ++s) {  // every 30 s across the day
            double t = s * 30.0;
            double arr = t + fifo.traversal_seconds(0, t);
            if (s > 0) CHECK(arr >= prev);
            prev = arr;
        }
    }
}

TEST_CASE("traversal wraps across midnight onto the same weekday") {
    auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
    prof.bins[287] = 0.5;
    prof.bins[0] = 0.25;
    RoadNetwork net = fifoize(testutil::make_net(2, {{0, 1, 500.0, 60.0, 1}}, {prof}));

    // 23:58 uses the 23:55 bin
    double t2358 = 23 * 3600.0 + 58 * 60.0;
    CHECK(net.traversal_seconds(0, t2358) ==
          doctest::Approx(net.raw_traversal_seconds(0, 287)).epsilon(1e-12));
    // next-day entries see the same profile cyclically
    CHECK(net.traversal_seconds(0, kSecondsPerDay + 100.0) ==
          net.traversal_seconds(0, 100.0));
    CHECK(net.traversal_seconds(0, 2 * kSecondsPerDay + t2358) ==
          net.traversal_seconds(0, t2358));
}

TEST_CASE("freeflow copy drops every profile") {
    auto prof = testutil::flat_profile(1, Weekday::Wed, 0.5);
    RoadNetwork net = testutil::make_net(2, {{0, 1, 1000.0, 50.0, 1}}, {prof});
    RoadNetwork ff = freeflow_copy(net);
    CHECK(ff.fifoized());
    CHECK(ff.traversal_seconds(0, 8 * 3600.0) == doctest::Approx(72.0).epsilon(1e-12));
    CHECK(net.traversal_seconds(0, 8 * 3600.0) == doctest::Approx(144.0).epsilon(1e-12));
}

TEST_CASE("network file round-trip is exact") {
    std::mt19937_64 rng(11);
    RoadNetwork net = testutil::random_network(rng);

    testutil::TempDir tmp;
    write_network(net, tmp.file("nodes.csv"), tmp.file("edges.csv"), tmp.file("profiles.csv"));
    RoadNetwork back = load_network(tmp.file("nodes.csv"), tmp.file("edges.csv"),
                                    tmp.file("profiles.csv"), net.weekday);

    REQUIRE(back.nodes.size() == net.nodes.size());
    REQUIRE(back.edges.size() == net.edges.size());
    REQUIRE(back.profiles.size() == net.profiles.size());
    for (size_t i = 0; i < net.nodes.size(); ++i) {
        CHECK(back.nodes[i].id == net.nodes[i].id);
        CHECK(back.nodes[i].pos == net.nodes[i].pos);
    }
    for (size_t i = 0; i < net.edges.size(); ++i) {
        CHECK(back.edges[i].id == net.edges[i].id);
        CHECK(back.edges[i].from_node == net.edges[i].from_node);
        CHECK(back.edges[i].to_node == net.edges[i].to_node);
        CHECK(back.edges[i].length_m == net.edges[i].length_m);
        CHECK(back.edges[i].frc == net.edges[i].frc);
        CHECK(back.edges[i].freeflow_kmh == net.edges[i].freeflow_kmh);
        CHECK(back.edges[i].profile_id == net.edges[i].profile_id);
    }
    for (size_t i = 0; i < net.profiles.size(); ++i) {
        CHECK(back.profiles[i].id == net.profiles[i].id);
        CHECK(back.profiles[i].bins == net.profiles[i].bins);
    }
}

TEST_CASE("load_network validation messages") {
    testutil::TempDir tmp;
    testutil::spit(tmp.file("nodes.csv"), "node_id,x_m,y_m\n0,0,0\n1,1000,0\n");
    testutil::spit(tmp.file("profiles.csv"), "");

    SUBCASE("edge names the missing node") {
        testutil::spit(tmp.file("edges.csv"),
                       "edge_id,from_node,to_node,length_m,frc,freeflow_kmh,profile_id\n"
                       "0,0,99,1000,3,50,\n");
        testutil::spit(tmp.file("profiles.csv"), testutil::profile_header() + "\n");
        CHECK_THROWS_WITH_AS(load_network(tmp.file("nodes.csv"), tmp.file("edges.csv"),
                                          tmp.file("profiles.csv"), Weekday::Wed),
                             "edge 0: unknown node 99", ValidationError);
    }
    SUBCASE("short profile row is rejected") {
        testutil::spit(tmp.file("edges.csv"),
                       "edge_id,from_node,to_node,length_m,frc,freeflow_kmh,profile_id\n"
                       "0,0,1,1000,3,50,1\n");
        std::string header = "profile_id,weekday";
        std::string row = "1,Wed";
        for (int b = 0; b < 287; ++b) {
            header += testutil::bin_col(b);
            row += ",1.0";
        }
        testutil::spit(tmp.file("profiles.csv"), header + "\n" + row + "\n");
        try {
            load_network(tmp.file("nodes.csv"), tmp.file("edges.csv"), tmp.file("profiles.csv"),
                         Weekday::Wed);
            FAIL("expected a bin-count error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("287") != std::string::npos);
            CHECK(std::string(e.what()).find("288") != std::string::npos);
        }
    }
}

TEST_CASE("network statistics") {
    SUBCASE("single profiled edge") {
        auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
        RoadNetwork net = testutil::make_net(2, {{0, 1, 2000.0, 50.0, 1}}, {prof});
        NetworkStats s = network_stats(net);
        CHECK(s.km_by_frc[3] == doctest::Approx(2.0));
        CHECK(s.total_km == doctest::Approx(2.0));
        CHECK(s.profiled_pct == doctest::Approx(100.0));
    }
    SUBCASE("half profiled") {
        auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
        RoadNetwork net =
            testutil::make_net(2, {{0, 1, 1000.0, 50.0, 1}, {1, 0, 1000.0, 50.0, -1}}, {prof});
        NetworkStats s = network_stats(net);
        CHECK(s.profiled_pct == doctest::Approx(50.0));
    }
    SUBCASE("two directions count double") {
        RoadNetwork net =
            testutil::make_net(2, {{0, 1, 1500.0, 50.0, -1}, {1, 0, 1500.0, 50.0, -1}});
        NetworkStats s = network_stats(net);
        CHECK(s.total_km == doctest::Approx(3.0));
    }
}
