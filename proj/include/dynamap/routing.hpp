#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynamap/network.hpp"
#include "dynamap/zoning.hpp"

namespace dynamap {

// Departure timetable: count samples spread evenly over one day.
struct DepartureSlots {
    int count = 96;
    double interval_sec = 900.0;

    double depart_sec(int slot) const { return slot * interval_sec; }
};

// interval_min must divide the day evenly.
DepartureSlots make_slots(double interval_min);

// Earliest-arrival labels as seconds elapsed since the departure instant
// (0 at the sources, +inf when unreached). Keeping labels relative makes a
// search over time-invariant speeds produce bit-identical results for
// every departure time; the absolute instant only enters bin lookups.
struct SearchLabels {
    std::vector<double> arrival;
    std::vector<int> pred_edge;  // edge index into net.edges, -1 at sources
};

// Time-dependent one-to-all earliest arrival from `source` (node index),
// departing at depart_sec. The network must be fifoized; entry times are
// taken at the head of each edge (no waiting is ever beneficial).
SearchLabels one_to_all_td(const RoadNetwork& net, int source, double depart_sec);
SearchLabels one_to_all_td_multi(const RoadNetwork& net, const std::vector<int>& sources,
                                 double depart_sec);

// Travel-time cube in minutes: slices[slot](origin, destination).
// Origins are the internal zones; destinations every retained zone.
struct CostCube {
    int slot_count = 0;
    double interval_sec = 0.0;
    std::vector<long long> origin_ids;
    std::vector<long long> dest_ids;
    std::vector<Eigen::MatrixXf> slices;
    long long unreachable_count = 0;

    float at(int slot, int origin, int dest) const { return slices[slot](origin, dest); }
    int origin_index(long long zone_id) const;
    int dest_index(long long zone_id) const;
};

// One search per (slot, origin); work is sharded over `workers` threads on
// an atomic task counter, and every thread writes disjoint cube rows, so
// the result is byte-identical for any worker count. Intra-zonal cells are
// forced to 0.
CostCube build_cost_cube(const RoadNetwork& net, const ZoneGrid& grid,
                         const DepartureSlots& slots, int workers = 1);

// Row/column extraction for the centre zone: from(slot, j) is centre ->
// zone j, to(slot, j) is zone j -> centre, over internal zones only.
struct CenterColumns {
    std::vector<long long> zone_ids;
    Eigen::MatrixXd from;  // slot_count x zones
    Eigen::MatrixXd to;
};
CenterColumns to_center_columns(const CostCube& cube, long long center_zone_id);

// Binary cube format: magic "TDC1", then u32 slot/origin/destination
// counts (little endian), then float32 minutes laid out slot-major.
// Zone ids travel separately (zones file); read_cube leaves them empty.
void write_cube(const CostCube& cube, const std::string& path);
CostCube read_cube(const std::string& path);

// Long-form CSV export: slot,origin,destination,minutes.
void write_cube_csv(const CostCube& cube, const std::string& path);

}  // namespace dynamap
