#include "dynamap/zoning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dynamap/csv.hpp"
#include "dynamap/errors.hpp"
#include "dynamap/numfmt.hpp"
#include "dynamap/routing.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

int ZoneGrid::zone_index(long long zone_id) const {
    auto it = std::lower_bound(zones.begin(), zones.end(), zone_id,
                               [](const Zone& z, long long id) { return z.zone_id < id; });
    if (it == zones.end() || it->zone_id != zone_id) return -1;
    return static_cast<int>(it - zones.begin());
}

int ZoneGrid::internal_count() const {
    int n = 0;
    for (const Zone& z : zones)
        if (!z.is_external) ++n;
    return n;
}

bool ZoneGrid::snapped() const {
    for (const Zone& z : zones)
        if (z.snap_node < 0) return false;
    return !zones.empty();
}

ZoneGrid build_grid(const BBox& bbox, double cell_size_m, double opportunities) {
    if (!(cell_size_m > 0.0)) throw ValidationError("zone grid: cell size must be positive");
    if (!(bbox.hi.x() > bbox.lo.x()) || !(bbox.hi.y() > bbox.lo.y()))
        throw ValidationError("zone grid: empty bounding box");

    const double ox = std::floor(bbox.lo.x() / cell_size_m) * cell_size_m;
    const double oy = std::floor(bbox.lo.y() / cell_size_m) * cell_size_m;
    const int ncols = static_cast<int>(std::ceil((bbox.hi.x() - ox) / cell_size_m));
    const int nrows = static_cast<int>(std::ceil((bbox.hi.y() - oy) / cell_size_m));
    if (ncols <= 0 || nrows <= 0) throw ValidationError("zone grid: empty bounding box");

    ZoneGrid grid;
    grid.cell_size_m = cell_size_m;
    grid.zones.reserve(static_cast<size_t>(nrows) * ncols);
    for (int r = 0; r < nrows; ++r) {
        for (int c = 0; c < ncols; ++c) {
            Zone z;
            z.zone_id = static_cast<long long>(r) * ncols + c;
            z.row = r;
            z.col = c;
            z.centroid = {ox + (c + 0.5) * cell_size_m, oy + (r + 0.5) * cell_size_m};
            z.opportunities = opportunities;
            grid.zones.push_back(z);
        }
    }
    return grid;
}

bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& polygon) {
    // Even-odd crossing rule over the closed ring.
    bool inside = false;
    const size_t n = polygon.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Eigen::Vector2d& a = polygon[i];
        const Eigen::Vector2d& b = polygon[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x_cross) inside = !inside;
        }
    }
    return inside;
}

void apply_mask(ZoneGrid& grid, const std::vector<Eigen::Vector2d>& mask_polygon) {
    if (mask_polygon.size() < 3) throw ValidationError("mask polygon needs at least 3 vertices");
    for (Zone& z : grid.zones) z.is_external = !point_in_polygon(z.centroid, mask_polygon);
}

ZoneGrid snap_centroids(const ZoneGrid& grid, const RoadNetwork& net,
                        std::vector<std::string>& warnings, double max_snap_radius_m) {
    if (net.nodes.empty()) throw ValidationError("centroid snapping: network has no nodes");
    if (max_snap_radius_m < 0.0) max_snap_radius_m = 2.0 * grid.cell_size_m;

    ZoneGrid out;
    out.cell_size_m = grid.cell_size_m;
    for (const Zone& z : grid.zones) {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < net.nodes.size(); ++i) {
            const double d2 = (net.nodes[i].pos - z.centroid).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && best >= 0 && net.nodes[i].id < net.nodes[best].id)) {
                best_d2 = d2;
                best = static_cast<int>(i);
            }
        }
        const double dist = std::sqrt(best_d2);
        if (dist > max_snap_radius_m) {
            warnings.push_back(strprintf("zone %lld: nearest node %lld is %.1f m away (radius %.1f m); zone dropped",
                                         z.zone_id, net.nodes[best].id, dist, max_snap_radius_m));
            continue;
        }
        Zone s = z;
        s.snap_node = best;
        s.snap_node_id = net.nodes[best].id;
        out.zones.push_back(s);
    }
    if (out.zones.empty()) throw ValidationError("centroid snapping: every zone fell outside the snap radius");
    return out;
}

ZoneGrid mark_external_buffer(const ZoneGrid& grid, const RoadNetwork& net, double threshold_min) {
    if (!(threshold_min >= 0.0)) throw ValidationError("buffer threshold must be non-negative");
    std::vector<int> sources;
    for (const Zone& z : grid.zones)
        if (!z.is_external && z.snap_node >= 0) sources.push_back(z.snap_node);
    if (sources.empty()) throw ValidationError("buffer pruning: no internal zones with snapped centroids");

    const SearchLabels labels = one_to_all_td_multi(net, sources, 0.0);
    ZoneGrid out;
    out.cell_size_m = grid.cell_size_m;
    for (const Zone& z : grid.zones) {
        if (z.is_external) {
            const double arr = labels.arrival[static_cast<size_t>(z.snap_node)];
            if (!(arr / 60.0 <= threshold_min)) continue;
        }
        out.zones.push_back(z);
    }
    return out;
}

ZoneGrid load_zones(const std::string& path, double cell_size_m) {
    const CsvTable t = read_csv(path);
    const int c_id = t.require("zone_id");
    const int c_row = t.require("row");
    const int c_col = t.require("col");
    const int c_x = t.require("centroid_x");
    const int c_y = t.require("centroid_y");
    const int c_opp = t.require("opportunities");
    const int c_ext = t.require("is_external");

    ZoneGrid grid;
    grid.cell_size_m = cell_size_m;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        Zone z;
        z.zone_id = t.integer(r, c_id);
        z.row = static_cast<int>(t.integer(r, c_row));
        z.col = static_cast<int>(t.integer(r, c_col));
        z.centroid = {t.number(r, c_x), t.number(r, c_y)};
        z.opportunities = t.number(r, c_opp);
        const long long ext = t.integer(r, c_ext);
        if (ext != 0 && ext != 1) t.fail(r, "is_external must be 0 or 1");
        z.is_external = ext == 1;
        if (!(z.opportunities >= 0.0)) t.fail(r, "opportunities must be non-negative");
        if (!z.centroid.allFinite()) t.fail(r, "centroid must be finite");
        grid.zones.push_back(z);
    }
    if (grid.zones.empty()) throw ValidationError(path + ": no zones");
    std::sort(grid.zones.begin(), grid.zones.end(),
              [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
    for (size_t i = 1; i < grid.zones.size(); ++i)
        if (grid.zones[i].zone_id == grid.zones[i - 1].zone_id)
            throw ValidationError(strprintf("%s: duplicate zone id %lld", path.c_str(), grid.zones[i].zone_id));
    return grid;
}

void write_zones(const ZoneGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "zone_id,row,col,centroid_x,centroid_y,opportunities,is_external\n";
    for (const Zone& z : grid.zones) {
        out << z.zone_id << ',' << z.row << ',' << z.col << ','
            << format_shortest(z.centroid.x()) << ',' << format_shortest(z.centroid.y()) << ','
            << format_shortest(z.opportunities) << ',' << (z.is_external ? 1 : 0) << '\n';
    }
    if (!out) throw ValidationError("write failed: " + path);
}

std::vector<Eigen::Vector2d> load_mask(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_x = t.require("x");
    const int c_y = t.require("y");
    std::vector<Eigen::Vector2d> poly;
    for (size_t r = 0; r < t.rows.size(); ++r) poly.emplace_back(t.number(r, c_x), t.number(r, c_y));
    if (poly.size() >= 2 && poly.front() == poly.back()) poly.pop_back();
    if (poly.size() < 3) throw ValidationError(path + ": mask polygon needs at least 3 vertices");
    return poly;
}

void write_mask(const std::vector<Eigen::Vector2d>& polygon, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "x,y\n";
    for (const Eigen::Vector2d& p : polygon)
        out << format_shortest(p.x()) << ',' << format_shortest(p.y()) << '\n';
    if (!out) throw ValidationError("write failed: " + path);
}

long long auto_center_zone(const ZoneGrid& grid) {
    Eigen::Vector2d lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (const Zone& z : grid.zones) {
        lo = lo.cwiseMin(z.centroid);
        hi = hi.cwiseMax(z.centroid);
    }
    const Eigen::Vector2d mid = 0.5 * (lo + hi);
    long long best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const Zone& z : grid.zones) {
        if (z.is_external) continue;
        const double d2 = (z.centroid - mid).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = z.zone_id;
        }
    }
    if (best < 0) throw ValidationError("centre zone: no internal zones");
    return best;
}

}  // namespace dynamap
