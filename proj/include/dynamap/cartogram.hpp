#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynamap/zoning.hpp"

namespace dynamap {

enum class GeomKind { Line, Polygon, Point };

const char* geom_kind_name(GeomKind k);
GeomKind parse_geom_kind(const std::string& name);

// One polyline/ring/point of a named map layer. Polygon rings are stored
// open (no repeated closing vertex).
struct LayerPart {
    std::string layer;
    int part = 0;
    GeomKind kind = GeomKind::Line;
    std::vector<Eigen::Vector2d> pts;
};

struct LayerSet {
    std::vector<LayerPart> parts;

    int find_part(const std::string& layer, int part) const;  // -1 if absent
};

// layers file: layer,part,seq,x,y,kind — one vertex per row, seq ordering
// the vertices within (layer, part).
LayerSet load_layers(const std::string& path);
void write_layers(const LayerSet& set, const std::string& path);

// Same schema plus a trailing scenario column; scenarios are written in
// the given order ("ff" first by convention, then slot indexes).
void write_scenario_layers(const std::vector<std::pair<std::string, LayerSet>>& scenarios,
                           const std::string& path);
std::vector<std::pair<std::string, LayerSet>> load_scenario_layers(const std::string& path);

// Splits every segment longer than max_spacing_m into equal parts of
// ceil(len/max_spacing) pieces. Points pass through; polygon rings also
// densify the closing segment.
std::vector<Eigen::Vector2d> densify_polyline(const std::vector<Eigen::Vector2d>& pts,
                                              bool closed, double max_spacing_m);

// Direction from the centre to each point; a point within 1e-9 m of the
// centre keeps a zero vector (it stays pinned at the centre).
std::vector<Eigen::Vector2d> unit_vectors(const std::vector<Eigen::Vector2d>& pts,
                                          const Eigen::Vector2d& center);

// All layer geometry densified into one flat point list; part p owns
// points [offset[p], offset[p]+count).
struct DenseLayers {
    LayerSet structure;  // same parts, pts replaced with densified ones
    std::vector<size_t> offset;
    std::vector<Eigen::Vector2d> points;  // flattened
    std::vector<Eigen::Vector2d> units;   // parallel to points
};

DenseLayers densify_layers(const LayerSet& set, const Eigen::Vector2d& center,
                           double max_spacing_m = 250.0);

// Scattered impedance samples (minutes at map positions); non-finite
// samples are skipped at construction.
struct ImpedanceSurface {
    Eigen::Matrix<double, Eigen::Dynamic, 2> xy;
    Eigen::VectorXd minutes;
    double power = 2.0;
};

ImpedanceSurface make_surface(const ZoneGrid& grid, const Eigen::VectorXd& minutes_per_internal_zone,
                              double power = 2.0);

// Inverse-distance-weighted interpolation; a query within 1e-9 m of a
// sample returns that sample's value exactly.
double idw_at(const ImpedanceSurface& surface, const Eigen::Vector2d& q);

// Radial displacement: each point moves to
// center + idw(point) * scale_km_per_min * 1000 * unit(point).
std::vector<Eigen::Vector2d> distort(const DenseLayers& dense, const ImpedanceSurface& surface,
                                     const Eigen::Vector2d& center, double scale_km_per_min);

// DenseLayers structure with its vertices replaced by distorted positions.
LayerSet rebuild(const DenseLayers& dense, const std::vector<Eigen::Vector2d>& distorted);

// Signed area of a closed ring (positive when counter-clockwise).
double shoelace_area(const std::vector<Eigen::Vector2d>& ring);

// 100 * |area(scenario)| / |area(reference)|; zero reference is an error.
double relative_area_pct(double scenario_area, double reference_area);

// Index of the boundary polygon: the part named `preferred` if present,
// else the first polygon part.
int find_boundary(const LayerSet& set, const std::string& preferred = "study_area");

// Map scale that renders the mean free-flow travel time of the boundary
// at the boundary's mean geographic radius: mean(|p - center|) in km over
// the densified boundary divided by mean free-flow minutes at those points.
double auto_scale_km_per_min(const DenseLayers& dense, int boundary_part,
                             const ImpedanceSurface& ff_surface, const Eigen::Vector2d& center);

// area_report.csv rows
struct AreaRow {
    std::string scenario;
    std::string direction;
    double relative_area_pct = 0.0;
};
void write_area_report(const std::vector<AreaRow>& rows, const std::string& path);

}  // namespace dynamap
