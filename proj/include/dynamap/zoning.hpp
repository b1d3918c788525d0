#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynamap/network.hpp"

namespace dynamap {

// One origin/destination grid cell. Cell geometry is the square
// centroid +/- cell_size/2.
struct Zone {
    long long zone_id = 0;
    int row = 0;
    int col = 0;
    Eigen::Vector2d centroid{0.0, 0.0};
    double opportunities = 0.0;  // D_j, opaque non-negative mass
    bool is_external = false;    // destination-only buffer cell
    int snap_node = -1;          // node index in the snapped network
    NodeId snap_node_id = -1;
};

struct ZoneGrid {
    double cell_size_m = 2000.0;
    std::vector<Zone> zones;  // ascending zone_id

    int zone_index(long long zone_id) const;  // -1 if unknown
    int internal_count() const;
    bool snapped() const;
};

struct BBox {
    Eigen::Vector2d lo{0.0, 0.0};
    Eigen::Vector2d hi{0.0, 0.0};
};

// Tiles `bbox` with axis-aligned cells whose origin is snapped down to a
// multiple of cell_size. Every zone gets `opportunities` as a constant mass;
// callers overwrite per-cell masses afterwards if they have a source.
ZoneGrid build_grid(const BBox& bbox, double cell_size_m, double opportunities);

// Sets is_external on every zone: internal iff the centroid lies inside
// the mask polygon.
void apply_mask(ZoneGrid& grid, const std::vector<Eigen::Vector2d>& mask_polygon);

// Nearest-node centroid snapping, ties to the lowest node id. Zones whose
// nearest node is farther than max_snap_radius_m (default 2 x cell size)
// are dropped with a warning line appended to `warnings`.
ZoneGrid snap_centroids(const ZoneGrid& grid, const RoadNetwork& net,
                        std::vector<std::string>& warnings, double max_snap_radius_m = -1.0);

// Keeps an external zone only if its snap node is reachable from at least
// one internal snap node within threshold_min, departing at midnight on
// the (fifoized) profiled network. Internal zones are never touched.
ZoneGrid mark_external_buffer(const ZoneGrid& grid, const RoadNetwork& net,
                              double threshold_min = 15.0);

bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& polygon);

// zones.csv: zone_id,row,col,centroid_x,centroid_y,opportunities,is_external
ZoneGrid load_zones(const std::string& path, double cell_size_m);
void write_zones(const ZoneGrid& grid, const std::string& path);

// mask file: header x,y then one vertex per line, closed polygon
std::vector<Eigen::Vector2d> load_mask(const std::string& path);
void write_mask(const std::vector<Eigen::Vector2d>& polygon, const std::string& path);

// Default rule for an unset centre zone: internal zone whose centroid is
// nearest the zone-set bounding-box centre, ties to the lower id.
long long auto_center_zone(const ZoneGrid& grid);

}  // namespace dynamap
