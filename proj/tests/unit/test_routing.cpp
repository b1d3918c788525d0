#include <cmath>
#include <random>

#include "doctest.h"
#include "dynamap/errors.hpp"
#include "dynamap/routing.hpp"
#include "test_util.hpp"

using namespace dynamap;

TEST_CASE("departure slot construction") {
    DepartureSlots def = make_slots(15.0);
    CHECK(def.count == 96);
    CHECK(def.interval_sec == 900.0);
    CHECK(def.depart_sec(4) == 3600.0);

    CHECK(make_slots(180.0).count == 8);
    CHECK(make_slots(1440.0).count == 1);
    CHECK_THROWS_AS(make_slots(7.0), ValidationError);
    CHECK_THROWS_AS(make_slots(0.0), ValidationError);
    CHECK_THROWS_AS(make_slots(-15.0), ValidationError);
}

TEST_CASE("single-edge earliest arrival") {
    auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
    RoadNetwork net = fifoize(testutil::make_net(2, {{0, 1, 1000.0, 50.0, 1}}, {prof}));

    for (double depart : {0.0, 8 * 3600.0, 86100.0}) {
        SearchLabels labels = one_to_all_td(net, 0, depart);
        CHECK(labels.arrival[0] == 0.0);  // source to itself
        CHECK(labels.arrival[1] / 60.0 == doctest::Approx(1.2).epsilon(1e-12));
        CHECK(labels.pred_edge[1] == 0);
        CHECK(labels.pred_edge[0] == -1);
    }
    CHECK_THROWS_AS(one_to_all_td(testutil::make_net(2, {{0, 1}}), 0, 0.0), ValidationError);
}

TEST_CASE("diamond route flips with the morning slowdown") {
    // 0 -> 1 -> 3 is fast until 08:00, then drops to quarter speed;
    // 0 -> 2 -> 3 is steady but slower at free flow.
    auto prof = testutil::step_profile(1, Weekday::Wed, 96, 1.0, 0.25);
    RoadNetwork net = fifoize(testutil::make_net(4,
                                                 {{0, 1, 1000.0, 60.0, 1},
                                                  {1, 3, 1000.0, 60.0, 1},
                                                  {0, 2, 1000.0, 20.0, -1},
                                                  {2, 3, 1000.0, 20.0, -1}},
                                                 {prof}));

    SearchLabels early = one_to_all_td(net, 0, 3 * 3600.0);
    SearchLabels peak = one_to_all_td(net, 0, 8 * 3600.0);

    CHECK(early.arrival[3] / 60.0 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(peak.arrival[3] / 60.0 == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(early.pred_edge[3] == 1);  // via node 1
    CHECK(peak.pred_edge[3] == 3);   // via node 2
    CHECK(peak.arrival[3] > early.arrival[3]);

    // both departures agree with exhaustive path enumeration
    for (double depart : {3 * 3600.0, 8 * 3600.0}) {
        SearchLabels got = one_to_all_td(net, 0, depart);
        std::vector<double> want = testutil::enumerate_arrivals(net, 0, depart);
        for (size_t v = 0; v < want.size(); ++v) CHECK(got.arrival[v] == want[v]);
    }
}

TEST_CASE("label-setting matches path enumeration on random networks") {
    std::mt19937_64 rng(4242);
    const DepartureSlots slots = make_slots(180.0);
    for (int trial = 0; trial < 25; ++trial) {
        RoadNetwork net = fifoize(testutil::random_network(rng));
        for (int s = 0; s < slots.count; ++s) {
            const double depart = slots.depart_sec(s);
            for (size_t src = 0; src < net.nodes.size(); ++src) {
                SearchLabels got = one_to_all_td(net, static_cast<int>(src), depart);
                std::vector<double> want =
                    testutil::enumerate_arrivals(net, static_cast<int>(src), depart);
                for (size_t v = 0; v < want.size(); ++v) {
                    if (std::isinf(want[v])) {
                        CHECK(std::isinf(got.arrival[v]));
                    } else {
                        CHECK(std::abs(got.arrival[v] - want[v]) / 60.0 <= 1e-9);
                    }
                }
            }
        }
    }
}

TEST_CASE("departing later never yields an earlier arrival") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 10; ++trial) {
        RoadNetwork net = fifoize(testutil::random_network(rng));
        std::vector<double> prev;  // absolute arrival instants of the previous slot
        for (int s = 0; s < 16; ++s) {
            const double depart = s * 5400.0;
            SearchLabels labels = one_to_all_td(net, 0, depart);
            std::vector<double> abs_arrival(labels.arrival.size());
            for (size_t v = 0; v < labels.arrival.size(); ++v)
                abs_arrival[v] = depart + labels.arrival[v];
            if (s > 0) {
                for (size_t v = 0; v < abs_arrival.size(); ++v) {
                    if (std::isinf(prev[v])) {
                        CHECK(std::isinf(abs_arrival[v]));
                    } else {
                        // allow sub-nanosecond fold noise; a real FIFO
                        // violation would be on the order of seconds
                        CHECK(abs_arrival[v] >= prev[v] - 1e-9);
                    }
                }
            }
            prev = abs_arrival;
        }
    }
}

TEST_CASE("flat profiles reduce to static free-flow search") {
    std::mt19937_64 rng(808);
    for (int trial = 0; trial < 10; ++trial) {
        RoadNetwork net = testutil::random_network(rng);
        for (SpeedProfile& p : net.profiles) p.bins.fill(1.0);
        net.finalize();
        RoadNetwork flat = fifoize(net);
        RoadNetwork ff = freeflow_copy(net);

        for (double depart : {0.0, 30000.0, 61234.5}) {
            SearchLabels a = one_to_all_td(flat, 0, depart);
            SearchLabels b = one_to_all_td(ff, 0, 0.0);
            for (size_t v = 0; v < a.arrival.size(); ++v) {
                if (std::isinf(a.arrival[v])) {
                    CHECK(std::isinf(b.arrival[v]));
                } else {
                    CHECK(a.arrival[v] == b.arrival[v]);  // bit-identical folds
                }
            }
        }
    }
}

TEST_CASE("cost cube basics") {
    // chain 0 -> 1 -> 2, zone per node, middle zone internal only
    RoadNetwork net = fifoize(testutil::make_net(3, {{0, 1}, {1, 2}}));
    ZoneGrid grid = testutil::grid_on_nodes(net);
    grid.zones[0].is_external = true;
    grid.zones[2].is_external = true;

    CostCube cube = build_cost_cube(net, grid, make_slots(720.0));
    CHECK(cube.slot_count == 2);
    CHECK(cube.origin_ids == std::vector<long long>{1});
    CHECK(cube.dest_ids == std::vector<long long>{0, 1, 2});
    CHECK(cube.at(0, 0, cube.dest_index(1)) == 0.0f);  // forced diagonal
    CHECK(cube.at(0, 0, cube.dest_index(2)) == 1.0f);  // 1 km at 60 km/h
    CHECK(std::isinf(cube.at(0, 0, cube.dest_index(0))));
    CHECK(cube.unreachable_count == 2);  // zone 0 in both slots
}

TEST_CASE("cube is identical across slots for flat profiles") {
    auto prof = testutil::flat_profile(1, Weekday::Wed, 1.0);
    RoadNetwork net = fifoize(testutil::make_net(
        4, {{0, 1, 800.0, 45.0, 1}, {1, 2, 1200.0, 55.0, 1}, {2, 3, 700.0, 35.0, -1}, {3, 0, 900.0, 30.0, 1}},
        {prof}));
    ZoneGrid grid = testutil::grid_on_nodes(net);
    CostCube cube = build_cost_cube(net, grid, make_slots(180.0));
    for (int s = 1; s < cube.slot_count; ++s)
        CHECK((cube.slices[s].array() == cube.slices[0].array()).all());
}

TEST_CASE("cube bytes do not depend on worker count") {
    std::mt19937_64 rng(31337);
    RoadNetwork net = fifoize(testutil::random_network(rng));
    ZoneGrid grid = testutil::grid_on_nodes(net);
    const DepartureSlots slots = make_slots(360.0);

    CostCube one = build_cost_cube(net, grid, slots, 1);
    for (int workers : {3, 8}) {
        CostCube many = build_cost_cube(net, grid, slots, workers);
        REQUIRE(many.slot_count == one.slot_count);
        for (int s = 0; s < one.slot_count; ++s)  // inf == inf holds, NaN never occurs
            CHECK((many.slices[s].array() == one.slices[s].array()).all());
    }
}

TEST_CASE("centre columns") {
    SUBCASE("asymmetric one-way pair") {
        RoadNetwork net =
            fifoize(testutil::make_net(2, {{0, 1, 1000.0, 60.0, -1}, {1, 0, 2000.0, 60.0, -1}}));
        ZoneGrid grid = testutil::grid_on_nodes(net);
        CostCube cube = build_cost_cube(net, grid, make_slots(720.0));
        CenterColumns cc = to_center_columns(cube, 0);

        CHECK(cc.zone_ids == std::vector<long long>{0, 1});
        CHECK(cc.from(0, 0) == 0.0);  // centre to centre
        CHECK(cc.to(0, 0) == 0.0);
        CHECK(cc.from(0, 1) == 1.0);  // centre -> zone 1
        CHECK(cc.to(0, 1) == 2.0);    // zone 1 -> centre

        // each matches an independent single search
        SearchLabels out = one_to_all_td(net, 0, 0.0);
        SearchLabels back = one_to_all_td(net, 1, 0.0);
        CHECK(cc.from(0, 1) == static_cast<float>(out.arrival[1] / 60.0));
        CHECK(cc.to(0, 1) == static_cast<float>(back.arrival[0] / 60.0));

        CHECK_THROWS_AS(to_center_columns(cube, 77), ValidationError);
    }
    SUBCASE("symmetric network gives from == to") {
        RoadNetwork net = fifoize(testutil::make_net(
            3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}}));
        ZoneGrid grid = testutil::grid_on_nodes(net);
        CostCube cube = build_cost_cube(net, grid, make_slots(720.0));
        CenterColumns cc = to_center_columns(cube, 1);
        CHECK((cc.from.array() == cc.to.array()).all());
    }
}

TEST_CASE("cube file round-trip") {
    std::mt19937_64 rng(99);
    RoadNetwork net = fifoize(testutil::random_network(rng));
    ZoneGrid grid = testutil::grid_on_nodes(net);
    CostCube cube = build_cost_cube(net, grid, make_slots(480.0));

    testutil::TempDir tmp;
    write_cube(cube, tmp.file("cube.bin"));

    SUBCASE("header layout") {
        std::string bytes = testutil::slurp(tmp.file("cube.bin"));
        REQUIRE(bytes.size() >= 16);
        CHECK(bytes.substr(0, 4) == "TDC1");
        auto u32 = [&](size_t off) {
            return static_cast<uint32_t>(static_cast<unsigned char>(bytes[off])) |
                   static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 1])) << 8 |
                   static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 2])) << 16 |
                   static_cast<uint32_t>(static_cast<unsigned char>(bytes[off + 3])) << 24;
        };
        CHECK(u32(4) == static_cast<uint32_t>(cube.slot_count));
        CHECK(u32(8) == cube.origin_ids.size());
        CHECK(u32(12) == cube.dest_ids.size());
        CHECK(bytes.size() == 16 + 4 * cube.slot_count * cube.origin_ids.size() * cube.dest_ids.size());
    }
    SUBCASE("values round-trip bitwise, ids travel separately") {
        CostCube back = read_cube(tmp.file("cube.bin"));
        CHECK(back.slot_count == cube.slot_count);
        CHECK(back.origin_ids.empty());
        CHECK(back.dest_ids.empty());
        CHECK(back.unreachable_count == cube.unreachable_count);
        for (int s = 0; s < cube.slot_count; ++s)
            for (int o = 0; o < cube.slices[s].rows(); ++o)
                for (int d = 0; d < cube.slices[s].cols(); ++d) {
                    float a = cube.slices[s](o, d), b = back.slices[s](o, d);
                    CHECK(std::memcmp(&a, &b, 4) == 0);
                }
    }
    SUBCASE("corrupt and truncated files are rejected") {
        testutil::spit(tmp.file("bad.bin"), "NOPE....");
        CHECK_THROWS_AS(read_cube(tmp.file("bad.bin")), ValidationError);
        std::string bytes = testutil::slurp(tmp.file("cube.bin"));
        testutil::spit(tmp.file("short.bin"), bytes.substr(0, bytes.size() - 2));
        CHECK_THROWS_AS(read_cube(tmp.file("short.bin")), ValidationError);
        testutil::spit(tmp.file("empty.bin"),
                       std::string("TDC1") + std::string(12, '\0'));
        CHECK_THROWS_AS(read_cube(tmp.file("empty.bin")), ValidationError);
    }
}

TEST_CASE("cube CSV export") {
    RoadNetwork net = fifoize(testutil::make_net(2, {{0, 1}}));
    ZoneGrid grid = testutil::grid_on_nodes(net);
    grid.zones[1].is_external = true;
    CostCube cube = build_cost_cube(net, grid, make_slots(1440.0));

    testutil::TempDir tmp;
    write_cube_csv(cube, tmp.file("cube.csv"));
    std::string text = testutil::slurp(tmp.file("cube.csv"));
    CHECK(text == "slot,origin,destination,minutes\n"
                  "0,0,0,0.000000\n"
                  "0,0,1,1.000000\n");
}
