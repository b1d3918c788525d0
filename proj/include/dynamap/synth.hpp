#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynamap/cartogram.hpp"
#include "dynamap/network.hpp"
#include "dynamap/zoning.hpp"

namespace dynamap {

// Parameters of the synthetic dataset generator. Defaults give a desk-scale
// instance: ~5,000 nodes, ~12,000 directed edges, a 20 km square study area
// holding 100 internal 2 km zones.
struct SynthSpec {
    double extent_km = 35.0;   // square map side
    double spacing_m = 500.0;  // lattice spacing before jitter
    double thin = 0.8;         // removal probability for non-tree lattice links
    double mask_km = 20.0;     // study-area square side, centred
    double cell_size_m = 2000.0;
    double am_depth = 0.45;  // morning congestion: min multiplier = 1 - depth
    double pm_depth = 0.35;
    double coverage = 0.9;  // share of directed edges carrying a profile
    int profile_count = 12;
    Weekday weekday = Weekday::Wed;
};

struct SynthResult {
    RoadNetwork net;
    ZoneGrid grid;  // is_external set from the mask, centroids unsnapped
    std::vector<Eigen::Vector2d> mask;
    LayerSet layers;
};

// Deterministic for a fixed (spec, seed): jittered lattice thinned to a
// connected core, two-way edges, road classes along shared street lines,
// AM/PM trapezoid congestion profiles (profile 1 at full depth so the
// deepest bin equals exactly 1 - depth), a Gaussian opportunity hill, and
// reference layers (study area, districts, a river, airports, the centre).
SynthResult generate_synthetic(const SynthSpec& spec, uint64_t seed);

struct SynthPaths {
    std::string nodes, edges, profiles, zones, mask, layers;
};

void write_synthetic(const SynthResult& result, const SynthPaths& paths);

}  // namespace dynamap
