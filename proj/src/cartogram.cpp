#include "dynamap/cartogram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "dynamap/csv.hpp"
#include "dynamap/errors.hpp"
#include "dynamap/numfmt.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

const char* geom_kind_name(GeomKind k) {
    switch (k) {
        case GeomKind::Line: return "line";
        case GeomKind::Polygon: return "polygon";
        case GeomKind::Point: return "point";
    }
    return "line";
}

GeomKind parse_geom_kind(const std::string& name) {
    if (name == "line") return GeomKind::Line;
    if (name == "polygon") return GeomKind::Polygon;
    if (name == "point") return GeomKind::Point;
    throw ValidationError("unknown geometry kind '" + name + "'");
}

int LayerSet::find_part(const std::string& layer, int part) const {
    for (size_t i = 0; i < parts.size(); ++i)
        if (parts[i].layer == layer && parts[i].part == part) return static_cast<int>(i);
    return -1;
}

namespace {

LayerSet parse_layer_rows(const CsvTable& t, int c_layer, int c_part, int c_seq, int c_x, int c_y,
                          int c_kind, const std::vector<size_t>& row_subset) {
    // (layer, part) -> seq -> vertex; map keys give a stable output order.
    std::map<std::pair<std::string, int>, std::map<long long, Eigen::Vector2d>> groups;
    std::map<std::pair<std::string, int>, GeomKind> kinds;
    for (size_t r : row_subset) {
        const std::pair<std::string, int> key{t.cell(r, c_layer), static_cast<int>(t.integer(r, c_part))};
        const GeomKind kind = parse_geom_kind(t.cell(r, c_kind));
        auto [it, inserted] = kinds.emplace(key, kind);
        if (!inserted && it->second != kind) t.fail(r, "geometry kind changes within a part");
        if (!groups[key].emplace(t.integer(r, c_seq), Eigen::Vector2d(t.number(r, c_x), t.number(r, c_y))).second)
            t.fail(r, "duplicate seq within a part");
    }
    LayerSet set;
    for (const auto& [key, verts] : groups) {
        LayerPart part;
        part.layer = key.first;
        part.part = key.second;
        part.kind = kinds.at(key);
        for (const auto& [seq, v] : verts) part.pts.push_back(v);
        if (part.kind == GeomKind::Polygon && part.pts.size() >= 2 && part.pts.front() == part.pts.back())
            part.pts.pop_back();
        if (part.kind == GeomKind::Point && part.pts.size() != 1)
            throw ValidationError(strprintf("layer %s part %d: a point part needs exactly one vertex",
                                            part.layer.c_str(), part.part));
        if (part.kind == GeomKind::Line && part.pts.size() < 2)
            throw ValidationError(strprintf("layer %s part %d: a line needs at least 2 vertices",
                                            part.layer.c_str(), part.part));
        if (part.kind == GeomKind::Polygon && part.pts.size() < 3)
            throw ValidationError(strprintf("layer %s part %d: a polygon needs at least 3 vertices",
                                            part.layer.c_str(), part.part));
        set.parts.push_back(std::move(part));
    }
    return set;
}

void write_layer_rows(std::ofstream& out, const LayerSet& set, const std::string* scenario) {
    for (const LayerPart& part : set.parts) {
        for (size_t i = 0; i < part.pts.size(); ++i) {
            out << part.layer << ',' << part.part << ',' << i << ','
                << format_shortest(part.pts[i].x()) << ',' << format_shortest(part.pts[i].y()) << ','
                << geom_kind_name(part.kind);
            if (scenario) out << ',' << *scenario;
            out << '\n';
        }
    }
}

}  // namespace

LayerSet load_layers(const std::string& path) {
    const CsvTable t = read_csv(path);
    std::vector<size_t> all(t.rows.size());
    for (size_t r = 0; r < all.size(); ++r) all[r] = r;
    LayerSet set = parse_layer_rows(t, t.require("layer"), t.require("part"), t.require("seq"),
                                    t.require("x"), t.require("y"), t.require("kind"), all);
    if (set.parts.empty()) throw ValidationError(path + ": no layer geometry");
    return set;
}

void write_layers(const LayerSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "layer,part,seq,x,y,kind\n";
    write_layer_rows(out, set, nullptr);
    if (!out) throw ValidationError("write failed: " + path);
}

void write_scenario_layers(const std::vector<std::pair<std::string, LayerSet>>& scenarios,
                           const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "layer,part,seq,x,y,kind,scenario\n";
    for (const auto& [name, set] : scenarios) write_layer_rows(out, set, &name);
    if (!out) throw ValidationError("write failed: " + path);
}

std::vector<std::pair<std::string, LayerSet>> load_scenario_layers(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_layer = t.require("layer");
    const int c_part = t.require("part");
    const int c_seq = t.require("seq");
    const int c_x = t.require("x");
    const int c_y = t.require("y");
    const int c_kind = t.require("kind");
    const int c_scn = t.require("scenario");

    std::vector<std::string> order;  // first-appearance order
    std::map<std::string, std::vector<size_t>> rows_by_scenario;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& scn = t.cell(r, c_scn);
        auto [it, inserted] = rows_by_scenario.emplace(scn, std::vector<size_t>{});
        if (inserted) order.push_back(scn);
        it->second.push_back(r);
    }
    std::vector<std::pair<std::string, LayerSet>> out;
    for (const std::string& scn : order)
        out.emplace_back(scn, parse_layer_rows(t, c_layer, c_part, c_seq, c_x, c_y, c_kind,
                                               rows_by_scenario.at(scn)));
    if (out.empty()) throw ValidationError(path + ": no scenarios");
    return out;
}

std::vector<Eigen::Vector2d> densify_polyline(const std::vector<Eigen::Vector2d>& pts,
                                              bool closed, double max_spacing_m) {
    if (!(max_spacing_m > 0.0)) throw ValidationError("densify spacing must be positive");
    if (pts.size() < 2) return pts;
    std::vector<Eigen::Vector2d> out;
    const size_t n = pts.size();
    const size_t segs = closed ? n : n - 1;
    for (size_t i = 0; i < segs; ++i) {
        const Eigen::Vector2d& a = pts[i];
        const Eigen::Vector2d& b = pts[(i + 1) % n];
        out.push_back(a);
        const double len = (b - a).norm();
        const int pieces = static_cast<int>(std::ceil(len / max_spacing_m));
        for (int k = 1; k < pieces; ++k)
            out.push_back(a + (static_cast<double>(k) / pieces) * (b - a));
    }
    if (!closed) out.push_back(pts.back());
    return out;
}

std::vector<Eigen::Vector2d> unit_vectors(const std::vector<Eigen::Vector2d>& pts,
                                          const Eigen::Vector2d& center) {
    std::vector<Eigen::Vector2d> units;
    units.reserve(pts.size());
    for (const Eigen::Vector2d& p : pts) {
        const Eigen::Vector2d d = p - center;
        const double len = d.norm();
        units.push_back(len < 1e-9 ? Eigen::Vector2d(0.0, 0.0) : Eigen::Vector2d(d / len));
    }
    return units;
}

DenseLayers densify_layers(const LayerSet& set, const Eigen::Vector2d& center,
                           double max_spacing_m) {
    DenseLayers dense;
    dense.structure.parts.reserve(set.parts.size());
    for (const LayerPart& part : set.parts) {
        LayerPart d = part;
        if (part.kind != GeomKind::Point)
            d.pts = densify_polyline(part.pts, part.kind == GeomKind::Polygon, max_spacing_m);
        dense.offset.push_back(dense.points.size());
        dense.points.insert(dense.points.end(), d.pts.begin(), d.pts.end());
        dense.structure.parts.push_back(std::move(d));
    }
    dense.units = unit_vectors(dense.points, center);
    return dense;
}

ImpedanceSurface make_surface(const ZoneGrid& grid, const Eigen::VectorXd& minutes_per_internal_zone,
                              double power) {
    if (!(power > 0.0)) throw ValidationError("idw power must be positive");
    if (minutes_per_internal_zone.size() != grid.internal_count())
        throw ValidationError("impedance surface: sample count does not match internal zones");
    std::vector<std::pair<Eigen::Vector2d, double>> samples;
    Eigen::Index i = 0;
    for (const Zone& z : grid.zones) {
        if (z.is_external) continue;
        const double v = minutes_per_internal_zone(i++);
        if (std::isfinite(v)) samples.emplace_back(z.centroid, v);
    }
    if (samples.empty()) throw ValidationError("impedance surface: no finite samples");
    ImpedanceSurface s;
    s.power = power;
    s.xy.resize(static_cast<Eigen::Index>(samples.size()), 2);
    s.minutes.resize(static_cast<Eigen::Index>(samples.size()));
    for (size_t k = 0; k < samples.size(); ++k) {
        s.xy.row(static_cast<Eigen::Index>(k)) = samples[k].first.transpose();
        s.minutes(static_cast<Eigen::Index>(k)) = samples[k].second;
    }
    return s;
}

double idw_at(const ImpedanceSurface& surface, const Eigen::Vector2d& q) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index k = 0; k < surface.minutes.size(); ++k) {
        const double dx = q.x() - surface.xy(k, 0);
        const double dy = q.y() - surface.xy(k, 1);
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d < 1e-9) return surface.minutes(k);  // exact at samples
        const double w = std::pow(d, -surface.power);
        num += w * surface.minutes(k);
        den += w;
    }
    return num / den;
}

std::vector<Eigen::Vector2d> distort(const DenseLayers& dense, const ImpedanceSurface& surface,
                                     const Eigen::Vector2d& center, double scale_km_per_min) {
    if (!(scale_km_per_min > 0.0)) throw ValidationError("cartogram scale must be positive");
    std::vector<Eigen::Vector2d> out;
    out.reserve(dense.points.size());
    for (size_t i = 0; i < dense.points.size(); ++i) {
        const double radius_m = idw_at(surface, dense.points[i]) * scale_km_per_min * 1000.0;
        out.push_back(center + radius_m * dense.units[i]);
    }
    return out;
}

LayerSet rebuild(const DenseLayers& dense, const std::vector<Eigen::Vector2d>& distorted) {
    if (distorted.size() != dense.points.size())
        throw ValidationError("rebuild: distorted point count does not match the dense set");
    LayerSet out = dense.structure;
    for (size_t p = 0; p < out.parts.size(); ++p) {
        const size_t begin = dense.offset[p];
        for (size_t i = 0; i < out.parts[p].pts.size(); ++i)
            out.parts[p].pts[i] = distorted[begin + i];
    }
    return out;
}

double shoelace_area(const std::vector<Eigen::Vector2d>& ring) {
    if (ring.size() < 3) throw ValidationError("shoelace area needs at least 3 vertices");
    double twice = 0.0;
    for (size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
        twice += ring[j].x() * ring[i].y() - ring[i].x() * ring[j].y();
    return 0.5 * twice;
}

double relative_area_pct(double scenario_area, double reference_area) {
    if (std::abs(reference_area) == 0.0)
        throw ValidationError("relative area: reference polygon has zero area");
    return 100.0 * std::abs(scenario_area) / std::abs(reference_area);
}

int find_boundary(const LayerSet& set, const std::string& preferred) {
    int first_polygon = -1;
    for (size_t i = 0; i < set.parts.size(); ++i) {
        if (set.parts[i].kind != GeomKind::Polygon) continue;
        if (set.parts[i].layer == preferred) return static_cast<int>(i);
        if (first_polygon < 0) first_polygon = static_cast<int>(i);
    }
    if (first_polygon < 0) throw ValidationError("no polygon layer to use as the study-area boundary");
    return first_polygon;
}

double auto_scale_km_per_min(const DenseLayers& dense, int boundary_part,
                             const ImpedanceSurface& ff_surface, const Eigen::Vector2d& center) {
    if (boundary_part < 0 || static_cast<size_t>(boundary_part) >= dense.structure.parts.size())
        throw ValidationError("auto scale: boundary part out of range");
    const size_t begin = dense.offset[static_cast<size_t>(boundary_part)];
    const size_t count = dense.structure.parts[static_cast<size_t>(boundary_part)].pts.size();
    if (count == 0) throw ValidationError("auto scale: empty boundary");
    double sum_km = 0.0;
    double sum_min = 0.0;
    for (size_t i = begin; i < begin + count; ++i) {
        sum_km += (dense.points[i] - center).norm() / 1000.0;
        sum_min += idw_at(ff_surface, dense.points[i]);
    }
    if (!(sum_min > 0.0))
        throw ValidationError("auto scale: free-flow impedance is zero along the boundary");
    return sum_km / sum_min;
}

void write_area_report(const std::vector<AreaRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "scenario,direction,relative_area_pct\n";
    for (const AreaRow& r : rows)
        out << r.scenario << ',' << r.direction << ',' << strprintf("%.2f", r.relative_area_pct) << '\n';
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace dynamap
