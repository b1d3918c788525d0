#include "dynamap/routing.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <thread>

#include "dynamap/errors.hpp"
#include "dynamap/instant.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

static_assert(std::endian::native == std::endian::little, "cube format assumes little-endian host");

DepartureSlots make_slots(double interval_min) {
    if (!(interval_min > 0.0)) throw ValidationError("slot interval must be positive");
    const double interval_sec = interval_min * 60.0;
    const double count = kSecondsPerDay / interval_sec;
    if (count != std::floor(count))
        throw ValidationError(strprintf("slot interval %g min does not divide the day", interval_min));
    DepartureSlots s;
    s.count = static_cast<int>(count);
    s.interval_sec = interval_sec;
    return s;
}

SearchLabels one_to_all_td(const RoadNetwork& net, int source, double depart_sec) {
    return one_to_all_td_multi(net, std::vector<int>{source}, depart_sec);
}

SearchLabels one_to_all_td_multi(const RoadNetwork& net, const std::vector<int>& sources,
                                 double depart_sec) {
    if (!net.fifoized())
        throw ValidationError("earliest-arrival search requires a fifoized network");
    const size_t n = net.nodes.size();
    SearchLabels labels;
    labels.arrival.assign(n, std::numeric_limits<double>::infinity());
    labels.pred_edge.assign(n, -1);

    using Item = std::pair<double, int>;  // (elapsed, node index); ties by node index
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (int s : sources) {
        if (s < 0 || static_cast<size_t>(s) >= n) throw ValidationError("search source out of range");
        if (labels.arrival[s] > 0.0) {
            labels.arrival[s] = 0.0;
            heap.emplace(0.0, s);
        }
    }

    while (!heap.empty()) {
        const auto [dist, u] = heap.top();
        heap.pop();
        if (dist > labels.arrival[u]) continue;  // stale entry
        for (const int* it = net.out_begin(u); it != net.out_end(u); ++it) {
            const int e = *it;
            const Edge& edge = net.edges[e];
            const double t = dist + net.traversal_seconds(e, depart_sec + dist);
            const int v = edge.to_idx;
            if (t < labels.arrival[v]) {
                labels.arrival[v] = t;
                labels.pred_edge[v] = e;
                heap.emplace(t, v);
            }
        }
    }
    return labels;
}

int CostCube::origin_index(long long zone_id) const {
    auto it = std::lower_bound(origin_ids.begin(), origin_ids.end(), zone_id);
    if (it == origin_ids.end() || *it != zone_id) return -1;
    return static_cast<int>(it - origin_ids.begin());
}

int CostCube::dest_index(long long zone_id) const {
    auto it = std::lower_bound(dest_ids.begin(), dest_ids.end(), zone_id);
    if (it == dest_ids.end() || *it != zone_id) return -1;
    return static_cast<int>(it - dest_ids.begin());
}

CostCube build_cost_cube(const RoadNetwork& net, const ZoneGrid& grid,
                         const DepartureSlots& slots, int workers) {
    if (!grid.snapped()) throw ValidationError("cost cube: zones are not snapped to the network");
    if (slots.count <= 0) throw ValidationError("cost cube: no departure slots");

    std::vector<int> origin_rows;  // zone index in grid per cube origin row
    CostCube cube;
    cube.slot_count = slots.count;
    cube.interval_sec = slots.interval_sec;
    for (size_t i = 0; i < grid.zones.size(); ++i) {
        const Zone& z = grid.zones[i];
        cube.dest_ids.push_back(z.zone_id);
        if (!z.is_external) {
            cube.origin_ids.push_back(z.zone_id);
            origin_rows.push_back(static_cast<int>(i));
        }
    }
    if (cube.origin_ids.empty()) throw ValidationError("cost cube: no internal origin zones");

    const int O = static_cast<int>(cube.origin_ids.size());
    const int D = static_cast<int>(cube.dest_ids.size());
    cube.slices.assign(slots.count, Eigen::MatrixXf(O, D));

    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
    const long long total = static_cast<long long>(slots.count) * O;
    workers = static_cast<int>(std::min<long long>(workers, total));

    std::atomic<long long> next{0};
    auto run = [&]() {
        for (;;) {
            const long long task = next.fetch_add(1, std::memory_order_relaxed);
            if (task >= total) break;
            const int slot = static_cast<int>(task / O);
            const int row = static_cast<int>(task % O);
            const double depart = slots.depart_sec(slot);
            const SearchLabels labels = one_to_all_td(net, grid.zones[origin_rows[row]].snap_node, depart);
            Eigen::MatrixXf& slice = cube.slices[slot];
            for (int d = 0; d < D; ++d) {
                const double elapsed = labels.arrival[grid.zones[d].snap_node];
                slice(row, d) = static_cast<float>(elapsed / 60.0);
            }
        }
    };

    if (workers == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (std::thread& t : pool) t.join();
    }

    // Intra-zonal cost is zero by definition.
    for (int s = 0; s < slots.count; ++s)
        for (int o = 0; o < O; ++o) cube.slices[s](o, cube.dest_index(cube.origin_ids[o])) = 0.0f;

    long long unreachable = 0;
    for (const Eigen::MatrixXf& slice : cube.slices)
        unreachable += (slice.array() == std::numeric_limits<float>::infinity()).count();
    cube.unreachable_count = unreachable;
    return cube;
}

CenterColumns to_center_columns(const CostCube& cube, long long center_zone_id) {
    const int co = cube.origin_index(center_zone_id);
    const int cd = cube.dest_index(center_zone_id);
    if (co < 0 || cd < 0)
        throw ValidationError(strprintf("centre zone %lld is not an internal zone of the cube", center_zone_id));

    CenterColumns cc;
    cc.zone_ids = cube.origin_ids;
    const int O = static_cast<int>(cube.origin_ids.size());
    cc.from.resize(cube.slot_count, O);
    cc.to.resize(cube.slot_count, O);
    for (int s = 0; s < cube.slot_count; ++s) {
        const Eigen::MatrixXf& slice = cube.slices[s];
        for (int j = 0; j < O; ++j) {
            cc.from(s, j) = slice(co, cube.dest_index(cube.origin_ids[j]));
            cc.to(s, j) = slice(j, cd);
        }
    }
    return cc;
}

namespace {

constexpr char kCubeMagic[4] = {'T', 'D', 'C', '1'};

void put_u32(std::ofstream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t get_u32(std::ifstream& in, const std::string& path) {
    uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 4)) throw ValidationError(path + ": truncated cube header");
    return v;
}

}  // namespace

void write_cube(const CostCube& cube, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out.write(kCubeMagic, 4);
    put_u32(out, static_cast<uint32_t>(cube.slot_count));
    put_u32(out, static_cast<uint32_t>(cube.origin_ids.size()));
    put_u32(out, static_cast<uint32_t>(cube.dest_ids.size()));
    for (const Eigen::MatrixXf& slice : cube.slices) {
        // Row by row: slice is column-major, the file is destination-minor.
        for (int o = 0; o < slice.rows(); ++o) {
            for (int d = 0; d < slice.cols(); ++d) {
                const float v = slice(o, d);
                out.write(reinterpret_cast<const char*>(&v), 4);
            }
        }
    }
    if (!out) throw ValidationError("write failed: " + path);
}

CostCube read_cube(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCubeMagic, 4) != 0)
        throw ValidationError(path + ": not a travel-time cube (bad magic)");
    const uint32_t S = get_u32(in, path);
    const uint32_t O = get_u32(in, path);
    const uint32_t D = get_u32(in, path);
    if (S == 0 || O == 0 || D == 0) throw ValidationError(path + ": empty cube");

    CostCube cube;
    cube.slot_count = static_cast<int>(S);
    cube.interval_sec = kSecondsPerDay / S;
    cube.slices.assign(S, Eigen::MatrixXf(O, D));
    std::vector<float> row(D);
    for (uint32_t s = 0; s < S; ++s) {
        for (uint32_t o = 0; o < O; ++o) {
            if (!in.read(reinterpret_cast<char*>(row.data()), std::streamsize(4) * D))
                throw ValidationError(path + ": truncated cube payload");
            for (uint32_t d = 0; d < D; ++d) cube.slices[s](o, d) = row[d];
        }
    }
    long long unreachable = 0;
    for (const Eigen::MatrixXf& slice : cube.slices)
        unreachable += (slice.array() == std::numeric_limits<float>::infinity()).count();
    cube.unreachable_count = unreachable;
    return cube;
}

void write_cube_csv(const CostCube& cube, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "slot,origin,destination,minutes\n";
    const bool named = !cube.origin_ids.empty();
    for (int s = 0; s < cube.slot_count; ++s) {
        const Eigen::MatrixXf& slice = cube.slices[s];
        for (int o = 0; o < slice.rows(); ++o) {
            for (int d = 0; d < slice.cols(); ++d) {
                const long long oid = named ? cube.origin_ids[o] : o;
                const long long did = named ? cube.dest_ids[d] : d;
                const float v = slice(o, d);
                char buf[64];
                if (std::isinf(v))
                    std::snprintf(buf, sizeof buf, "inf");
                else
                    std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(v));
                out << s << ',' << oid << ',' << did << ',' << buf << '\n';
            }
        }
    }
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace dynamap
