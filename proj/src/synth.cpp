#include "dynamap/synth.hpp"

#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include "dynamap/errors.hpp"
#include "dynamap/network_io.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

namespace {

double unit_draw(std::mt19937_64& rng) {
    // 53-bit mantissa uniform in [0, 1); avoids distribution objects so the
    // stream is identical on every standard library.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// Trapezoid window: 0 outside [start, end], 1 on [start+ramp, end-ramp],
// linear in between. Times in seconds.
double trapezoid(double t, double start, double end, double ramp) {
    if (t <= start || t >= end) return 0.0;
    if (t < start + ramp) return (t - start) / ramp;
    if (t > end - ramp) return (end - t) / ramp;
    return 1.0;
}

struct LatticeLink {
    int a = 0;
    int b = 0;
    int line = 0;  // shared street line index (row or column)
};

}  // namespace

SynthResult generate_synthetic(const SynthSpec& spec, uint64_t seed) {
    if (!(spec.extent_km > 0.0)) throw ValidationError("synthetic spec: extent_km must be positive");
    if (!(spec.spacing_m > 0.0)) throw ValidationError("synthetic spec: spacing_m must be positive");
    if (!(spec.thin >= 0.0 && spec.thin <= 1.0)) throw ValidationError("synthetic spec: thin must be in [0, 1]");
    if (!(spec.am_depth >= 0.0 && spec.am_depth <= 0.9) || !(spec.pm_depth >= 0.0 && spec.pm_depth <= 0.9))
        throw ValidationError("synthetic spec: congestion depth must be in [0, 0.9]");
    if (!(spec.coverage >= 0.0 && spec.coverage <= 1.0))
        throw ValidationError("synthetic spec: coverage must be in [0, 1]");
    if (!(spec.mask_km > 0.0) || spec.mask_km > spec.extent_km)
        throw ValidationError("synthetic spec: mask_km must be in (0, extent_km]");
    if (!(spec.cell_size_m > 0.0)) throw ValidationError("synthetic spec: cell_size_m must be positive");
    if (spec.profile_count < 1) throw ValidationError("synthetic spec: profile_count must be at least 1");

    const double extent_m = spec.extent_km * 1000.0;
    const int per_side = static_cast<int>(std::round(extent_m / spec.spacing_m)) + 1;
    if (per_side < 2) throw ValidationError("synthetic spec: grid collapses to fewer than 2 nodes per side");

    std::mt19937_64 rng(seed);
    SynthResult out;
    out.net.weekday = spec.weekday;

    // Jittered lattice nodes, row-major ids.
    const double jitter = 0.25 * spec.spacing_m;
    out.net.nodes.reserve(static_cast<size_t>(per_side) * per_side);
    for (int r = 0; r < per_side; ++r) {
        for (int c = 0; c < per_side; ++c) {
            Node n;
            n.id = static_cast<NodeId>(r) * per_side + c;
            n.pos = {round_to(c * spec.spacing_m + (2.0 * unit_draw(rng) - 1.0) * jitter, 0.1),
                     round_to(r * spec.spacing_m + (2.0 * unit_draw(rng) - 1.0) * jitter, 0.1)};
            out.net.nodes.push_back(n);
        }
    }
    const int n_nodes = per_side * per_side;

    // Undirected lattice links: horizontal (line = row), then vertical
    // (line = column).
    std::vector<LatticeLink> links;
    for (int r = 0; r < per_side; ++r)
        for (int c = 0; c + 1 < per_side; ++c)
            links.push_back({r * per_side + c, r * per_side + c + 1, r});
    for (int r = 0; r + 1 < per_side; ++r)
        for (int c = 0; c < per_side; ++c)
            links.push_back({r * per_side + c, (r + 1) * per_side + c, c});

    // BFS spanning tree; tree links are never removed, so the kept core
    // stays connected (and strongly connected once edges go both ways).
    std::vector<std::vector<int>> adj(static_cast<size_t>(n_nodes));
    for (size_t l = 0; l < links.size(); ++l) {
        adj[static_cast<size_t>(links[l].a)].push_back(static_cast<int>(l));
        adj[static_cast<size_t>(links[l].b)].push_back(static_cast<int>(l));
    }
    std::vector<char> in_tree(links.size(), 0);
    std::vector<char> seen(static_cast<size_t>(n_nodes), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int l : adj[static_cast<size_t>(u)]) {
            const int v = links[static_cast<size_t>(l)].a == u ? links[static_cast<size_t>(l)].b
                                                               : links[static_cast<size_t>(l)].a;
            if (seen[static_cast<size_t>(v)]) continue;
            seen[static_cast<size_t>(v)] = 1;
            in_tree[static_cast<size_t>(l)] = 1;
            frontier.push(v);
        }
    }

    std::vector<char> keep(links.size(), 1);
    for (size_t l = 0; l < links.size(); ++l)
        if (!in_tree[l] && unit_draw(rng) < spec.thin) keep[l] = 0;

    // Congestion profiles: trapezoid dips around the AM and PM peaks.
    // Profile 1 gets multiplier 1.0 so its deepest bin is exactly 1 - depth.
    std::vector<double> depth_multiplier(static_cast<size_t>(spec.profile_count));
    depth_multiplier[0] = 1.0;
    for (int p = 1; p < spec.profile_count; ++p) depth_multiplier[static_cast<size_t>(p)] = 0.55 + 0.45 * unit_draw(rng);
    for (int p = 0; p < spec.profile_count; ++p) {
        SpeedProfile prof;
        prof.id = p + 1;
        prof.weekday = spec.weekday;
        for (int k = 0; k < kBinsPerDay; ++k) {
            const double t = k * kSecondsPerBin;
            const double dip = spec.am_depth * trapezoid(t, 7 * 3600.0, 10 * 3600.0, 3600.0) +
                               spec.pm_depth * trapezoid(t, 16 * 3600.0, 19 * 3600.0, 3600.0);
            prof.bins[static_cast<size_t>(k)] = round_to(1.0 - dip * depth_multiplier[static_cast<size_t>(p)], 1e-6);
        }
        out.net.profiles.push_back(prof);
    }

    // Road class per street line: a sparse fast hierarchy over local streets.
    auto line_class = [&](int line, std::mt19937_64& r) -> std::pair<int, double> {
        if (line % 12 == 0) return {0, 100.0};
        if (line % 6 == 0) return {1, 80.0};
        if (line % 3 == 0) return {2, 60.0};
        switch (r() % 4) {
            case 0: return {3, 50.0};
            case 1: return {4, 45.0};
            case 2: return {5, 40.0};
            default: return {6, 30.0};
        }
    };

    EdgeId next_edge = 1;
    for (size_t l = 0; l < links.size(); ++l) {
        if (!keep[l]) continue;
        const auto [frc, kmh] = line_class(links[l].line, rng);
        const Eigen::Vector2d a = out.net.nodes[static_cast<size_t>(links[l].a)].pos;
        const Eigen::Vector2d b = out.net.nodes[static_cast<size_t>(links[l].b)].pos;
        const double length = round_to((b - a).norm(), 0.001);
        for (int dir = 0; dir < 2; ++dir) {
            Edge e;
            e.id = next_edge++;
            e.from_node = dir == 0 ? links[l].a : links[l].b;
            e.to_node = dir == 0 ? links[l].b : links[l].a;
            e.length_m = length;
            e.frc = frc;
            e.freeflow_kmh = kmh;
            if (unit_draw(rng) < spec.coverage)
                e.profile_id = 1 + static_cast<int>(rng() % static_cast<uint64_t>(spec.profile_count));
            out.net.edges.push_back(e);
        }
    }
    out.net.finalize();

    // Opportunity hill centred on the map, with a noise floor.
    BBox bbox;
    bbox.lo = {0.0, 0.0};
    bbox.hi = {extent_m, extent_m};
    out.grid = build_grid(bbox, spec.cell_size_m, 0.0);
    const Eigen::Vector2d center(extent_m / 2.0, extent_m / 2.0);
    const double sigma = extent_m / 6.0;
    for (Zone& z : out.grid.zones) {
        const double r2 = (z.centroid - center).squaredNorm();
        z.opportunities = round_to(1000.0 * std::exp(-r2 / (2.0 * sigma * sigma)) + 50.0 * unit_draw(rng), 0.1);
    }

    // Square study-area mask, centred.
    const double half_mask = spec.mask_km * 500.0;
    out.mask = {center + Eigen::Vector2d(-half_mask, -half_mask),
                center + Eigen::Vector2d(half_mask, -half_mask),
                center + Eigen::Vector2d(half_mask, half_mask),
                center + Eigen::Vector2d(-half_mask, half_mask)};
    apply_mask(out.grid, out.mask);
    if (out.grid.internal_count() == 0)
        throw ValidationError("synthetic spec: study-area mask contains no zone centroids");

    // Reference layers: boundary, district quadrants, a river, airports and
    // the centre marker.
    LayerPart study;
    study.layer = "study_area";
    study.kind = GeomKind::Polygon;
    study.pts = out.mask;
    out.layers.parts.push_back(study);

    const Eigen::Vector2d q[4] = {{-half_mask, -half_mask}, {0.0, -half_mask}, {-half_mask, 0.0}, {0.0, 0.0}};
    for (int i = 0; i < 4; ++i) {
        LayerPart district;
        district.layer = "districts";
        district.part = i;
        district.kind = GeomKind::Polygon;
        const Eigen::Vector2d lo = center + q[i];
        district.pts = {lo, lo + Eigen::Vector2d(half_mask, 0.0), lo + Eigen::Vector2d(half_mask, half_mask),
                        lo + Eigen::Vector2d(0.0, half_mask)};
        out.layers.parts.push_back(district);
    }

    LayerPart river;
    river.layer = "river";
    river.kind = GeomKind::Line;
    for (double x = 0.0; x <= extent_m; x += 500.0) {
        const double y = center.y() + 2000.0 * std::sin(3.0 * std::numbers::pi * x / extent_m);
        river.pts.emplace_back(round_to(x, 0.1), round_to(y, 0.1));
    }
    out.layers.parts.push_back(river);

    const std::pair<const char*, Eigen::Vector2d> airports[] = {
        {"LHR", {0.25, 0.48}}, {"LGW", {0.52, 0.20}}, {"LTN", {0.45, 0.85}},
        {"SEN", {0.90, 0.55}}, {"LCY", {0.58, 0.52}},
    };
    for (const auto& [name, rel] : airports) {
        LayerPart pt;
        pt.layer = name;
        pt.kind = GeomKind::Point;
        pt.pts = {Eigen::Vector2d(round_to(rel.x() * extent_m, 0.1), round_to(rel.y() * extent_m, 0.1))};
        out.layers.parts.push_back(pt);
    }

    LayerPart centre;
    centre.layer = "center";
    centre.kind = GeomKind::Point;
    centre.pts = {center};
    out.layers.parts.push_back(centre);

    return out;
}

void write_synthetic(const SynthResult& result, const SynthPaths& paths) {
    write_network(result.net, paths.nodes, paths.edges, paths.profiles);
    write_zones(result.grid, paths.zones);
    write_mask(result.mask, paths.mask);
    write_layers(result.layers, paths.layers);
}

}  // namespace dynamap
