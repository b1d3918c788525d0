#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynamap/network.hpp"

namespace dynamap {

// Full run configuration: plain-text "key = value" file, CLI overrides on
// top. Empty path fields fall back to <out_dir>/data/<name>.csv.
struct RunConfig {
    // dataset paths
    std::string nodes_path, edges_path, profiles_path, zones_path, mask_path, layers_path;
    std::string out_dir = "out";

    // analysis parameters
    Weekday weekday = Weekday::Wed;
    double beta = -0.065;           // decay per minute, < 0
    double slot_interval_min = 15;  // must divide the day
    double floor_pct = 50.0;
    double idw_power = 2.0;
    double densify_spacing_m = 250.0;
    double buffer_min = 15.0;
    double cell_size_m = 2000.0;
    double snap_radius_m = -1.0;  // auto: 2 x cell size
    long long center_zone = -1;   // auto: internal zone nearest the grid centre
    std::string carto_scale = "auto";  // km per minute, or "auto"
    std::string carto_direction = "both";  // from | to | both

    // rendering
    std::vector<std::string> render_modes = {"choropleth", "extrusion", "cartogram"};
    std::vector<double> ramp_breaks;        // empty: 6 equal classes over [floor, 100]
    std::vector<std::string> ramp_colors;   // must be breaks + 1 when given
    int canvas_w = 1280;
    int canvas_h = 960;
    double height_scale = 2.0;  // extrusion px per pct point
    double isoline_interval_min = 15.0;
    int isoline_count = 4;
    bool side_by_side = true;
    double fps = 4.0;

    // run control
    int workers = 0;  // 0: hardware concurrency
    uint64_t seed = 42;
    bool cube_csv = false;

    // synthetic generator
    double synth_extent_km = 35.0;
    double synth_spacing_m = 500.0;
    double synth_thin = 0.8;
    double synth_mask_km = 20.0;
    double synth_am_depth = 0.45;
    double synth_pm_depth = 0.35;
    double synth_coverage = 0.9;
    int synth_profiles = 12;
};

RunConfig load_config(const std::string& path);

// Applies the "key = value" assignment to cfg; rejects unknown keys and
// out-of-range values with a message naming the field.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// Cross-field checks (ramp shape, slot divisibility, ...).
void validate_config(const RunConfig& cfg);

// Dataset paths with defaults resolved against out_dir.
struct DataPaths {
    std::string nodes, edges, profiles, zones, mask, layers;
};
DataPaths resolve_paths(const RunConfig& cfg);

// Derived artifact paths under out_dir.
std::string cube_path(const RunConfig& cfg);
std::string cube_ff_path(const RunConfig& cfg);
std::string zones_used_path(const RunConfig& cfg);
std::string access_path(const RunConfig& cfg);
std::string baseline_path(const RunConfig& cfg);
std::string distorted_path(const RunConfig& cfg, const std::string& direction);
std::string area_report_path(const RunConfig& cfg);
std::string frames_dir(const RunConfig& cfg, const std::string& mode);

// Pipeline stages. Each stage validates its inputs, writes its artifacts,
// and records content hashes in <out_dir>/run_manifest.json; a stage whose
// input hashes and existing outputs all match is skipped.
void cmd_synth(const RunConfig& cfg);
void cmd_matrix(const RunConfig& cfg);
void cmd_access(const RunConfig& cfg);
void cmd_cartogram(const RunConfig& cfg);
void cmd_render(const RunConfig& cfg);
void cmd_stats(const RunConfig& cfg);
void cmd_all(const RunConfig& cfg);  // matrix, access, cartogram, render

// FNV-1a 64-bit content hash, exposed for manifest tests.
uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull);
uint64_t fnv1a64_file(const std::string& path);

}  // namespace dynamap
