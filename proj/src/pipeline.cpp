#include "dynamap/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "dynamap/accessibility.hpp"
#include "dynamap/cartogram.hpp"
#include "dynamap/errors.hpp"
#include "dynamap/network_io.hpp"
#include "dynamap/render.hpp"
#include "dynamap/routing.hpp"
#include "dynamap/strutil.hpp"
#include "dynamap/synth.hpp"
#include "dynamap/zoning.hpp"

namespace fs = std::filesystem;

namespace dynamap {

uint64_t fnv1a64(const void* data, size_t len, uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    return h;
}

namespace {

double parse_number(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ValidationError("config: " + key + " is not a number: '" + value + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& value) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        throw ValidationError("config: " + key + " is not an integer: '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw ValidationError("config: " + key + " must be 0/1/true/false");
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> items;
    for (const std::string& piece : split(value, ',')) {
        const std::string t = trim(piece);
        if (!t.empty()) items.push_back(t);
    }
    return items;
}

double positive(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    if (!(v > 0.0)) throw ValidationError("config: " + key + " must be positive");
    return v;
}

double non_negative(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    if (!(v >= 0.0)) throw ValidationError("config: " + key + " must be non-negative");
    return v;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "nodes") cfg.nodes_path = value;
    else if (key == "edges") cfg.edges_path = value;
    else if (key == "profiles") cfg.profiles_path = value;
    else if (key == "zones") cfg.zones_path = value;
    else if (key == "mask") cfg.mask_path = value;
    else if (key == "layers") cfg.layers_path = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "weekday") cfg.weekday = parse_weekday(value);
    else if (key == "beta") {
        cfg.beta = parse_number(key, value);
        if (!(cfg.beta < 0.0)) throw ValidationError("config: beta must be negative");
    } else if (key == "slot_interval_min") {
        cfg.slot_interval_min = positive(key, value);
    } else if (key == "floor_pct") {
        cfg.floor_pct = parse_number(key, value);
        if (!(cfg.floor_pct >= 0.0 && cfg.floor_pct < 100.0))
            throw ValidationError("config: floor_pct must be in [0, 100)");
    } else if (key == "idw_power") {
        cfg.idw_power = positive(key, value);
    } else if (key == "densify_spacing_m") {
        cfg.densify_spacing_m = positive(key, value);
    } else if (key == "buffer_min") {
        cfg.buffer_min = non_negative(key, value);
    } else if (key == "cell_size_m") {
        cfg.cell_size_m = positive(key, value);
    } else if (key == "snap_radius_m") {
        cfg.snap_radius_m = value == "auto" ? -1.0 : positive(key, value);
    } else if (key == "center_zone") {
        cfg.center_zone = value == "auto" ? -1 : parse_int(key, value);
    } else if (key == "carto_scale") {
        if (value != "auto") positive(key, value);
        cfg.carto_scale = value;
    } else if (key == "carto_direction") {
        if (value != "from" && value != "to" && value != "both")
            throw ValidationError("config: carto_direction must be from, to or both");
        cfg.carto_direction = value;
    } else if (key == "render_modes") {
        cfg.render_modes = parse_list(value);
        if (cfg.render_modes.empty()) throw ValidationError("config: render_modes is empty");
        for (const std::string& m : cfg.render_modes)
            if (m != "choropleth" && m != "extrusion" && m != "cartogram")
                throw ValidationError("config: render_modes entry '" + m + "' is not a renderer");
    } else if (key == "ramp_breaks") {
        cfg.ramp_breaks.clear();
        for (const std::string& b : parse_list(value)) cfg.ramp_breaks.push_back(parse_number(key, b));
    } else if (key == "ramp_colors") {
        cfg.ramp_colors = parse_list(value);
    } else if (key == "canvas_w") {
        cfg.canvas_w = static_cast<int>(parse_int(key, value));
        if (cfg.canvas_w <= 0) throw ValidationError("config: canvas_w must be positive");
    } else if (key == "canvas_h") {
        cfg.canvas_h = static_cast<int>(parse_int(key, value));
        if (cfg.canvas_h <= 0) throw ValidationError("config: canvas_h must be positive");
    } else if (key == "height_scale") {
        cfg.height_scale = positive(key, value);
    } else if (key == "isoline_interval_min") {
        cfg.isoline_interval_min = positive(key, value);
    } else if (key == "isoline_count") {
        cfg.isoline_count = static_cast<int>(parse_int(key, value));
        if (cfg.isoline_count < 0) throw ValidationError("config: isoline_count must be non-negative");
    } else if (key == "side_by_side") {
        cfg.side_by_side = parse_bool(key, value);
    } else if (key == "fps") {
        cfg.fps = positive(key, value);
    } else if (key == "workers") {
        cfg.workers = static_cast<int>(parse_int(key, value));
        if (cfg.workers < 0) throw ValidationError("config: workers must be non-negative");
    } else if (key == "seed") {
        cfg.seed = static_cast<uint64_t>(parse_int(key, value));
    } else if (key == "cube_csv") {
        cfg.cube_csv = parse_bool(key, value);
    } else if (key == "synth_extent_km") {
        cfg.synth_extent_km = positive(key, value);
    } else if (key == "synth_spacing_m") {
        cfg.synth_spacing_m = positive(key, value);
    } else if (key == "synth_thin") {
        cfg.synth_thin = parse_number(key, value);
        if (!(cfg.synth_thin >= 0.0 && cfg.synth_thin <= 1.0))
            throw ValidationError("config: synth_thin must be in [0, 1]");
    } else if (key == "synth_mask_km") {
        cfg.synth_mask_km = positive(key, value);
    } else if (key == "synth_am_depth" || key == "synth_pm_depth") {
        const double v = parse_number(key, value);
        if (!(v >= 0.0 && v <= 0.9)) throw ValidationError("config: " + key + " must be in [0, 0.9]");
        (key == "synth_am_depth" ? cfg.synth_am_depth : cfg.synth_pm_depth) = v;
    } else if (key == "synth_coverage") {
        cfg.synth_coverage = parse_number(key, value);
        if (!(cfg.synth_coverage >= 0.0 && cfg.synth_coverage <= 1.0))
            throw ValidationError("config: synth_coverage must be in [0, 1]");
    } else if (key == "synth_profiles") {
        cfg.synth_profiles = static_cast<int>(parse_int(key, value));
        if (cfg.synth_profiles < 1) throw ValidationError("config: synth_profiles must be at least 1");
    } else {
        throw ValidationError("config: unknown key '" + key + "'");
    }
}

void validate_config(const RunConfig& cfg) {
    make_slots(cfg.slot_interval_min);  // throws naming the problem
    if (!(cfg.beta < 0.0)) throw ValidationError("config: beta must be negative");
    if (!cfg.ramp_breaks.empty() || !cfg.ramp_colors.empty()) {
        ColorRamp ramp;
        ramp.breaks = cfg.ramp_breaks;
        ramp.colors = cfg.ramp_colors;
        ramp.validate();
    }
    if (cfg.synth_mask_km > cfg.synth_extent_km)
        throw ValidationError("config: synth_mask_km exceeds synth_extent_km");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path);
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw ValidationError(strprintf("%s:%d: expected key = value", path.c_str(), line_no));
        try {
            apply_config_entry(cfg, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
        } catch (const ValidationError& e) {
            throw ValidationError(strprintf("%s:%d: %s", path.c_str(), line_no, e.what()));
        }
    }
    validate_config(cfg);
    return cfg;
}

DataPaths resolve_paths(const RunConfig& cfg) {
    const fs::path data = fs::path(cfg.out_dir) / "data";
    auto pick = [&](const std::string& given, const char* name) {
        return given.empty() ? (data / name).string() : given;
    };
    DataPaths p;
    p.nodes = pick(cfg.nodes_path, "nodes.csv");
    p.edges = pick(cfg.edges_path, "edges.csv");
    p.profiles = pick(cfg.profiles_path, "profiles.csv");
    p.zones = pick(cfg.zones_path, "zones.csv");
    p.mask = pick(cfg.mask_path, "mask.csv");
    p.layers = pick(cfg.layers_path, "layers.csv");
    return p;
}

std::string cube_path(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / "cube.bin").string(); }
std::string cube_ff_path(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / "cube_ff.bin").string(); }
std::string zones_used_path(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / "zones_used.csv").string(); }
std::string access_path(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / "access.csv").string(); }
std::string baseline_path(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / "baseline.csv").string(); }
std::string distorted_path(const RunConfig& cfg, const std::string& direction) {
    return (fs::path(cfg.out_dir) / ("distorted_" + direction + ".csv")).string();
}
std::string area_report_path(const RunConfig& cfg) { return (fs::path(cfg.out_dir) / "area_report.csv").string(); }
std::string frames_dir(const RunConfig& cfg, const std::string& mode) {
    return (fs::path(cfg.out_dir) / ("frames_" + mode)).string();
}

namespace {

std::string hex64(uint64_t v) { return strprintf("%016llx", static_cast<unsigned long long>(v)); }

// Accumulates the stage fingerprint: parameters as text, inputs as
// path + content hash.
class Fingerprint {
public:
    void add(const std::string& s) {
        h_ = fnv1a64(s.data(), s.size(), h_);
        h_ = fnv1a64("|", 1, h_);
    }
    void add_number(double v) { add(strprintf("%.17g", v)); }
    void add_file(const std::string& path) {
        add(path);
        const uint64_t fh = fnv1a64_file(path);
        h_ = fnv1a64(&fh, sizeof fh, h_);
    }
    uint64_t value() const { return h_; }

private:
    uint64_t h_ = 0xcbf29ce484222325ull;
};

class Manifest {
public:
    explicit Manifest(const RunConfig& cfg) : path_(fs::path(cfg.out_dir) / "run_manifest.json") {
        std::ifstream in(path_);
        if (in) {
            try {
                in >> doc_;
            } catch (const nlohmann::json::exception&) {
                doc_ = nlohmann::json::object();  // corrupt manifest: rebuild
            }
        }
        if (!doc_.is_object()) doc_ = nlohmann::json::object();
        if (!doc_.contains("stages") || !doc_["stages"].is_object())
            doc_["stages"] = nlohmann::json::object();
    }

    // True (and marks the stage skipped) when the fingerprint matches and
    // every recorded output still exists with an unchanged hash.
    bool try_skip(const std::string& stage, uint64_t fingerprint) {
        if (!doc_["stages"].contains(stage)) return false;
        nlohmann::json& rec = doc_["stages"][stage];
        if (rec.value("fingerprint", "") != hex64(fingerprint)) return false;
        if (!rec.contains("outputs") || !rec["outputs"].is_object()) return false;
        for (const auto& [path, hash] : rec["outputs"].items()) {
            if (!fs::exists(path)) return false;
            if (hex64(fnv1a64_file(path)) != hash.get<std::string>()) return false;
        }
        rec["last_action"] = "skipped";
        save();
        return true;
    }

    void record(const std::string& stage, uint64_t fingerprint,
                const std::vector<std::string>& outputs, long long wall_ms) {
        nlohmann::json out = nlohmann::json::object();
        for (const std::string& p : outputs) out[p] = hex64(fnv1a64_file(p));
        doc_["stages"][stage] = {{"fingerprint", hex64(fingerprint)},
                                 {"outputs", out},
                                 {"last_action", "run"},
                                 {"wall_ms", wall_ms}};
        save();
    }

private:
    void save() {
        fs::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + path_.string());
        out << doc_.dump(2) << '\n';
    }

    fs::path path_;
    nlohmann::json doc_;
};

long long ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
        .count();
}

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw ValidationError(what + " not found: " + path);
}

int effective_workers(const RunConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ColorRamp config_ramp(const RunConfig& cfg) {
    if (cfg.ramp_breaks.empty() && cfg.ramp_colors.empty()) return default_ramp(cfg.floor_pct);
    ColorRamp ramp;
    ramp.breaks = cfg.ramp_breaks;
    ramp.colors = cfg.ramp_colors;
    ramp.validate();
    return ramp;
}

std::string slot_label(const RunConfig& cfg, int slot) {
    const int sec = static_cast<int>(slot * cfg.slot_interval_min * 60.0);
    return strprintf("%s %02d:%02d", weekday_name(cfg.weekday), sec / 3600, (sec % 3600) / 60);
}

std::vector<std::string> carto_directions(const RunConfig& cfg) {
    if (cfg.carto_direction == "both") return {"from", "to"};
    return {cfg.carto_direction};
}

ZoneGrid load_zones_used(const RunConfig& cfg) {
    require_file(zones_used_path(cfg), "snapped zone table (run the matrix stage first)");
    return load_zones(zones_used_path(cfg), cfg.cell_size_m);
}

// Cube files carry no ids; re-attach them from the snapped zone table.
void attach_zone_ids(CostCube& cube, const ZoneGrid& grid, const std::string& which) {
    std::vector<long long> origins, dests;
    for (const Zone& z : grid.zones) {
        dests.push_back(z.zone_id);
        if (!z.is_external) origins.push_back(z.zone_id);
    }
    if (cube.slices.empty() || cube.slices[0].rows() != static_cast<Eigen::Index>(origins.size()) ||
        cube.slices[0].cols() != static_cast<Eigen::Index>(dests.size()))
        throw ValidationError(strprintf(
            "%s: cube shape %lldx%lld does not match the zone table (%zu origins, %zu destinations)",
            which.c_str(), cube.slices.empty() ? 0LL : static_cast<long long>(cube.slices[0].rows()),
            cube.slices.empty() ? 0LL : static_cast<long long>(cube.slices[0].cols()), origins.size(),
            dests.size()));
    cube.origin_ids = std::move(origins);
    cube.dest_ids = std::move(dests);
}

long long resolve_center(const RunConfig& cfg, const ZoneGrid& grid) {
    if (cfg.center_zone < 0) return auto_center_zone(grid);
    const int idx = grid.zone_index(cfg.center_zone);
    if (idx < 0) throw ValidationError(strprintf("centre zone %lld is not in the zone table", cfg.center_zone));
    if (grid.zones[static_cast<size_t>(idx)].is_external)
        throw ValidationError(strprintf("centre zone %lld is external", cfg.center_zone));
    return cfg.center_zone;
}

// Everything the cartogram construction shares with cartogram-frame
// rendering: snapped zones, layers, densified geometry, the centre, and a
// free-flow surface + resolved scale per direction.
struct CartoContext {
    ZoneGrid grid;
    LayerSet layers;
    DenseLayers dense;
    int boundary = -1;
    long long center_id = -1;
    Eigen::Vector2d center_pos{0.0, 0.0};
    std::vector<std::string> directions;
    std::vector<ImpedanceSurface> ff_surface;  // parallel to directions
    std::vector<double> scale_km_per_min;      // parallel to directions
};

CartoContext build_carto_context(const RunConfig& cfg) {
    const DataPaths paths = resolve_paths(cfg);
    require_file(paths.layers, "layers file");
    require_file(cube_ff_path(cfg), "free-flow cube (run the matrix stage first)");

    CartoContext ctx;
    ctx.grid = load_zones_used(cfg);
    ctx.layers = load_layers(paths.layers);
    ctx.center_id = resolve_center(cfg, ctx.grid);
    ctx.center_pos = ctx.grid.zones[static_cast<size_t>(ctx.grid.zone_index(ctx.center_id))].centroid;
    ctx.dense = densify_layers(ctx.layers, ctx.center_pos, cfg.densify_spacing_m);
    ctx.boundary = find_boundary(ctx.layers);
    ctx.directions = carto_directions(cfg);

    CostCube ff = read_cube(cube_ff_path(cfg));
    attach_zone_ids(ff, ctx.grid, cube_ff_path(cfg));
    const CenterColumns ffcc = to_center_columns(ff, ctx.center_id);

    for (const std::string& dir : ctx.directions) {
        const Eigen::VectorXd minutes =
            (dir == "from" ? ffcc.from : ffcc.to).row(0).transpose();
        ctx.ff_surface.push_back(make_surface(ctx.grid, minutes, cfg.idw_power));
        double scale;
        if (cfg.carto_scale == "auto")
            scale = auto_scale_km_per_min(ctx.dense, ctx.boundary, ctx.ff_surface.back(), ctx.center_pos);
        else
            scale = parse_number("carto_scale", cfg.carto_scale);
        ctx.scale_km_per_min.push_back(scale);
    }
    return ctx;
}

MapExtent padded_union(std::initializer_list<MapExtent> extents) {
    MapExtent u;
    u.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    u.hi = -u.lo;
    for (const MapExtent& e : extents) {
        u.lo = u.lo.cwiseMin(e.lo);
        u.hi = u.hi.cwiseMax(e.hi);
    }
    u.pad_fraction(0.02);
    if (!u.valid()) throw ValidationError("map extent is degenerate");
    return u;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
    const DataPaths paths = resolve_paths(cfg);
    Fingerprint fp;
    fp.add("synth");
    fp.add_number(cfg.synth_extent_km);
    fp.add_number(cfg.synth_spacing_m);
    fp.add_number(cfg.synth_thin);
    fp.add_number(cfg.synth_mask_km);
    fp.add_number(cfg.synth_am_depth);
    fp.add_number(cfg.synth_pm_depth);
    fp.add_number(cfg.synth_coverage);
    fp.add_number(cfg.synth_profiles);
    fp.add_number(cfg.cell_size_m);
    fp.add_number(static_cast<double>(cfg.seed));
    fp.add(weekday_name(cfg.weekday));
    for (const std::string& p : {paths.nodes, paths.edges, paths.profiles, paths.zones, paths.mask, paths.layers})
        fp.add(p);

    Manifest manifest(cfg);
    if (manifest.try_skip("synth", fp.value())) {
        std::printf("synth: up to date, skipped\n");
        return;
    }
    const auto t0 = std::chrono::steady_clock::now();

    SynthSpec spec;
    spec.extent_km = cfg.synth_extent_km;
    spec.spacing_m = cfg.synth_spacing_m;
    spec.thin = cfg.synth_thin;
    spec.mask_km = cfg.synth_mask_km;
    spec.cell_size_m = cfg.cell_size_m;
    spec.am_depth = cfg.synth_am_depth;
    spec.pm_depth = cfg.synth_pm_depth;
    spec.coverage = cfg.synth_coverage;
    spec.profile_count = cfg.synth_profiles;
    spec.weekday = cfg.weekday;
    const SynthResult result = generate_synthetic(spec, cfg.seed);

    for (const std::string& p : {paths.nodes, paths.edges, paths.profiles, paths.zones, paths.mask, paths.layers})
        fs::create_directories(fs::path(p).parent_path());
    SynthPaths sp{paths.nodes, paths.edges, paths.profiles, paths.zones, paths.mask, paths.layers};
    write_synthetic(result, sp);

    manifest.record("synth", fp.value(),
                    {paths.nodes, paths.edges, paths.profiles, paths.zones, paths.mask, paths.layers},
                    ms_since(t0));
    std::printf("synth: %zu nodes, %zu edges, %zu profiles, %zu zones (%d internal)\n",
                result.net.nodes.size(), result.net.edges.size(), result.net.profiles.size(),
                result.grid.zones.size(), result.grid.internal_count());
}

void cmd_matrix(const RunConfig& cfg) {
    const DataPaths paths = resolve_paths(cfg);
    require_file(paths.nodes, "nodes file");
    require_file(paths.edges, "edges file");
    require_file(paths.profiles, "profiles file");
    require_file(paths.zones, "zones file");
    const bool have_mask = fs::exists(paths.mask);

    Fingerprint fp;
    fp.add("matrix");
    fp.add(weekday_name(cfg.weekday));
    fp.add_number(cfg.slot_interval_min);
    fp.add_number(cfg.buffer_min);
    fp.add_number(cfg.cell_size_m);
    fp.add_number(cfg.snap_radius_m);
    fp.add_number(cfg.cube_csv ? 1 : 0);
    fp.add_file(paths.nodes);
    fp.add_file(paths.edges);
    fp.add_file(paths.profiles);
    fp.add_file(paths.zones);
    if (have_mask) fp.add_file(paths.mask);

    Manifest manifest(cfg);
    if (manifest.try_skip("matrix", fp.value())) {
        std::printf("matrix: up to date, skipped\n");
        return;
    }
    const auto t0 = std::chrono::steady_clock::now();

    const RoadNetwork raw = load_network(paths.nodes, paths.edges, paths.profiles, cfg.weekday);
    const RoadNetwork net = fifoize(raw);

    ZoneGrid grid = load_zones(paths.zones, cfg.cell_size_m);
    if (have_mask) apply_mask(grid, load_mask(paths.mask));
    std::vector<std::string> warnings;
    grid = snap_centroids(grid, net, warnings, cfg.snap_radius_m);
    for (const std::string& w : warnings) std::fprintf(stderr, "WARN: %s\n", w.c_str());
    grid = mark_external_buffer(grid, net, cfg.buffer_min);

    const DepartureSlots slots = make_slots(cfg.slot_interval_min);
    const CostCube cube = build_cost_cube(net, grid, slots, effective_workers(cfg));

    const RoadNetwork ff = freeflow_copy(net);
    DepartureSlots one;
    one.count = 1;
    one.interval_sec = kSecondsPerDay;
    const CostCube ff_cube = build_cost_cube(ff, grid, one, effective_workers(cfg));

    fs::create_directories(cfg.out_dir);
    write_zones(grid, zones_used_path(cfg));
    write_cube(cube, cube_path(cfg));
    write_cube(ff_cube, cube_ff_path(cfg));
    std::vector<std::string> outputs = {zones_used_path(cfg), cube_path(cfg), cube_ff_path(cfg)};
    if (cfg.cube_csv) {
        const std::string csv = (fs::path(cfg.out_dir) / "cube.csv").string();
        write_cube_csv(cube, csv);
        outputs.push_back(csv);
    }

    manifest.record("matrix", fp.value(), outputs, ms_since(t0));
    std::printf("matrix: %d slots x %zu origins x %zu destinations, %lld unreachable pairs\n",
                cube.slot_count, cube.origin_ids.size(), cube.dest_ids.size(), cube.unreachable_count);
}

void cmd_access(const RunConfig& cfg) {
    require_file(cube_path(cfg), "travel-time cube (run the matrix stage first)");
    require_file(cube_ff_path(cfg), "free-flow cube (run the matrix stage first)");

    Fingerprint fp;
    fp.add("access");
    fp.add_number(cfg.beta);
    fp.add_number(cfg.floor_pct);
    fp.add_file(cube_path(cfg));
    fp.add_file(cube_ff_path(cfg));
    fp.add_file(zones_used_path(cfg));

    Manifest manifest(cfg);
    if (manifest.try_skip("access", fp.value())) {
        std::printf("access: up to date, skipped\n");
        return;
    }
    const auto t0 = std::chrono::steady_clock::now();

    const ZoneGrid grid = load_zones_used(cfg);
    CostCube cube = read_cube(cube_path(cfg));
    attach_zone_ids(cube, grid, cube_path(cfg));
    CostCube ff_cube = read_cube(cube_ff_path(cfg));
    attach_zone_ids(ff_cube, grid, cube_ff_path(cfg));

    Eigen::VectorXd opportunities(static_cast<Eigen::Index>(grid.zones.size()));
    for (size_t i = 0; i < grid.zones.size(); ++i)
        opportunities(static_cast<Eigen::Index>(i)) = grid.zones[i].opportunities;

    const AccessibilityField field =
        build_field(cube, ff_cube, opportunities, DecayParams{cfg.beta}, cfg.floor_pct);
    write_access_csv(field, access_path(cfg));
    write_baseline_csv(field, baseline_path(cfg));

    long long gaps = 0;
    for (uint8_t g : field.gap) gaps += g;
    manifest.record("access", fp.value(), {access_path(cfg), baseline_path(cfg)}, ms_since(t0));
    std::printf("access: %zu zones x %d slots, %lld zero-baseline zones\n", field.zone_ids.size(),
                field.slot_count, gaps);
}

void cmd_cartogram(const RunConfig& cfg) {
    const DataPaths paths = resolve_paths(cfg);
    require_file(cube_path(cfg), "travel-time cube (run the matrix stage first)");
    require_file(cube_ff_path(cfg), "free-flow cube (run the matrix stage first)");
    require_file(paths.layers, "layers file");

    Fingerprint fp;
    fp.add("cartogram");
    fp.add(cfg.carto_direction);
    fp.add(cfg.carto_scale);
    fp.add_number(cfg.idw_power);
    fp.add_number(cfg.densify_spacing_m);
    fp.add_number(static_cast<double>(cfg.center_zone));
    fp.add_file(cube_path(cfg));
    fp.add_file(cube_ff_path(cfg));
    fp.add_file(zones_used_path(cfg));
    fp.add_file(paths.layers);

    Manifest manifest(cfg);
    if (manifest.try_skip("cartogram", fp.value())) {
        std::printf("cartogram: up to date, skipped\n");
        return;
    }
    const auto t0 = std::chrono::steady_clock::now();

    const CartoContext ctx = build_carto_context(cfg);
    CostCube cube = read_cube(cube_path(cfg));
    attach_zone_ids(cube, ctx.grid, cube_path(cfg));
    const CenterColumns cc = to_center_columns(cube, ctx.center_id);

    std::vector<AreaRow> report;
    std::vector<std::string> outputs;
    for (size_t di = 0; di < ctx.directions.size(); ++di) {
        const std::string& dir = ctx.directions[di];
        const double scale = ctx.scale_km_per_min[di];

        std::vector<std::pair<std::string, LayerSet>> scenarios;
        const std::vector<Eigen::Vector2d> ref_pts =
            distort(ctx.dense, ctx.ff_surface[di], ctx.center_pos, scale);
        LayerSet ref = rebuild(ctx.dense, ref_pts);
        const double ref_area = shoelace_area(ref.parts[static_cast<size_t>(ctx.boundary)].pts);
        report.push_back({"ff", dir, relative_area_pct(ref_area, ref_area)});
        scenarios.emplace_back("ff", std::move(ref));

        const Eigen::MatrixXd& minutes = dir == "from" ? cc.from : cc.to;
        for (int s = 0; s < cube.slot_count; ++s) {
            const ImpedanceSurface surface =
                make_surface(ctx.grid, minutes.row(s).transpose(), cfg.idw_power);
            LayerSet distorted = rebuild(ctx.dense, distort(ctx.dense, surface, ctx.center_pos, scale));
            const double area = shoelace_area(distorted.parts[static_cast<size_t>(ctx.boundary)].pts);
            report.push_back({std::to_string(s), dir, relative_area_pct(area, ref_area)});
            scenarios.emplace_back(std::to_string(s), std::move(distorted));
        }
        write_scenario_layers(scenarios, distorted_path(cfg, dir));
        outputs.push_back(distorted_path(cfg, dir));
        std::printf("cartogram/%s: scale %.4f km/min, %d scenarios\n", dir.c_str(), scale,
                    cube.slot_count + 1);
    }
    write_area_report(report, area_report_path(cfg));
    outputs.push_back(area_report_path(cfg));

    manifest.record("cartogram", fp.value(), outputs, ms_since(t0));
}

void cmd_render(const RunConfig& cfg) {
    const DataPaths paths = resolve_paths(cfg);
    const DepartureSlots slots = make_slots(cfg.slot_interval_min);
    const bool have_layers = fs::exists(paths.layers);

    Fingerprint fp;
    fp.add("render");
    for (const std::string& m : cfg.render_modes) fp.add(m);
    fp.add_number(cfg.canvas_w);
    fp.add_number(cfg.canvas_h);
    fp.add_number(cfg.floor_pct);
    fp.add_number(cfg.height_scale);
    fp.add_number(cfg.fps);
    fp.add_number(cfg.isoline_interval_min);
    fp.add_number(cfg.isoline_count);
    fp.add_number(cfg.side_by_side ? 1 : 0);
    fp.add_number(cfg.slot_interval_min);
    fp.add(weekday_name(cfg.weekday));
    fp.add(cfg.carto_direction);
    fp.add(cfg.carto_scale);
    fp.add_number(cfg.idw_power);
    fp.add_number(cfg.densify_spacing_m);
    fp.add_number(static_cast<double>(cfg.center_zone));
    for (double b : cfg.ramp_breaks) fp.add_number(b);
    for (const std::string& c : cfg.ramp_colors) fp.add(c);

    const bool wants_field = std::any_of(cfg.render_modes.begin(), cfg.render_modes.end(),
                                         [](const std::string& m) { return m != "cartogram"; });
    const bool wants_carto = std::any_of(cfg.render_modes.begin(), cfg.render_modes.end(),
                                         [](const std::string& m) { return m == "cartogram"; });
    if (wants_field) {
        require_file(access_path(cfg), "accessibility field (run the access stage first)");
        fp.add_file(access_path(cfg));
        fp.add_file(zones_used_path(cfg));
        if (have_layers) fp.add_file(paths.layers);
    }
    if (wants_carto) {
        for (const std::string& dir : carto_directions(cfg)) {
            require_file(distorted_path(cfg, dir), "distorted geometry (run the cartogram stage first)");
            fp.add_file(distorted_path(cfg, dir));
        }
        fp.add_file(zones_used_path(cfg));
        fp.add_file(cube_ff_path(cfg));
        if (have_layers) fp.add_file(paths.layers);
    }

    Manifest manifest(cfg);
    if (manifest.try_skip("render", fp.value())) {
        std::printf("render: up to date, skipped\n");
        return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> outputs;

    ZoneGrid grid;
    AccessibilityField field;
    if (wants_field) {
        grid = load_zones_used(cfg);
        field = read_access_csv(access_path(cfg));
        if (field.slot_count != slots.count)
            throw ValidationError(strprintf("access field has %d slots but the run is configured for %d",
                                            field.slot_count, slots.count));
        std::vector<long long> internal_ids;
        for (const Zone& z : grid.zones)
            if (!z.is_external) internal_ids.push_back(z.zone_id);
        if (field.zone_ids != internal_ids)
            throw ValidationError("access field zones do not match the snapped zone table");
    }
    const ColorRamp ramp = config_ramp(cfg);

    for (const std::string& mode : cfg.render_modes) {
        if (mode == "cartogram") continue;
        const std::string dir = frames_dir(cfg, mode);
        fs::create_directories(dir);
        MapExtent extent = extent_of_zones(grid);
        if (mode == "choropleth" && have_layers)
            extent = padded_union({extent, extent_of(load_layers(paths.layers))});
        else
            extent = padded_union({extent});

        const LayerSet overlay = mode == "choropleth" && have_layers ? load_layers(paths.layers) : LayerSet{};
        for (int s = 0; s < slots.count; ++s) {
            FrameSpec frame;
            frame.width_px = cfg.canvas_w;
            frame.height_px = cfg.canvas_h;
            frame.extent = extent;
            frame.scenario_index = s;
            frame.label = slot_label(cfg, s);

            ZoneValues values;
            values.pct = field.pct.col(s);
            values.gap = field.gap;
            std::string svg;
            if (mode == "choropleth")
                svg = render_choropleth(frame, grid, values, ramp, have_layers ? &overlay : nullptr);
            else
                svg = render_extrusion(frame, grid, values, ramp,
                                       ExtrusionView{cfg.height_scale, cfg.floor_pct});
            const std::string path = (fs::path(dir) / frame_filename(s)).string();
            write_text_file(path, svg);
            outputs.push_back(path);
        }
        emit_animation(dir, slots.count, cfg.fps);
        outputs.push_back((fs::path(dir) / "animation.manifest").string());
        std::printf("render/%s: %d frames\n", mode.c_str(), slots.count);
    }

    if (wants_carto) {
        const CartoContext ctx = build_carto_context(cfg);
        const LayerSet* geographic = cfg.side_by_side ? &ctx.layers : nullptr;
        for (size_t di = 0; di < ctx.directions.size(); ++di) {
            const std::string& direction = ctx.directions[di];
            const auto scenarios = load_scenario_layers(distorted_path(cfg, direction));
            if (static_cast<int>(scenarios.size()) != slots.count + 1)
                throw ValidationError(strprintf(
                    "%s holds %zu scenarios but the run is configured for %d slots + free flow",
                    distorted_path(cfg, direction).c_str(), scenarios.size(), slots.count));

            MapExtent extent = extent_of(scenarios.front().second);
            for (const auto& [name, set] : scenarios)
                extent = padded_union({extent, extent_of(set)});
            if (geographic) extent = padded_union({extent, extent_of(*geographic)});

            IsolineSpec iso;
            iso.interval_min = cfg.isoline_interval_min;
            iso.scale_km_per_min = ctx.scale_km_per_min[di];
            iso.count = cfg.isoline_count;

            const std::string dir = frames_dir(cfg, "cartogram_" + direction);
            fs::create_directories(dir);
            for (int s = 0; s < slots.count; ++s) {
                const std::string key = std::to_string(s);
                const auto it = std::find_if(scenarios.begin(), scenarios.end(),
                                             [&](const auto& p) { return p.first == key; });
                if (it == scenarios.end())
                    throw ValidationError(strprintf("%s: scenario %s missing",
                                                    distorted_path(cfg, direction).c_str(), key.c_str()));
                FrameSpec frame;
                frame.width_px = cfg.canvas_w;
                frame.height_px = cfg.canvas_h;
                frame.extent = extent;
                frame.scenario_index = s;
                frame.label = strprintf("%s (%s centre)", slot_label(cfg, s).c_str(), direction.c_str());
                const std::string svg =
                    render_cartogram(frame, it->second, iso, ctx.center_pos, geographic);
                const std::string path = (fs::path(dir) / frame_filename(s)).string();
                write_text_file(path, svg);
                outputs.push_back(path);
            }
            emit_animation(dir, slots.count, cfg.fps);
            outputs.push_back((fs::path(dir) / "animation.manifest").string());
            std::printf("render/cartogram_%s: %d frames\n", direction.c_str(), slots.count);
        }
    }

    manifest.record("render", fp.value(), outputs, ms_since(t0));
}

void cmd_stats(const RunConfig& cfg) {
    const DataPaths paths = resolve_paths(cfg);
    require_file(paths.nodes, "nodes file");
    require_file(paths.edges, "edges file");
    require_file(paths.profiles, "profiles file");
    const RoadNetwork net = load_network(paths.nodes, paths.edges, paths.profiles, cfg.weekday);
    std::printf("%s", format_stats(network_stats(net)).c_str());
}

void cmd_all(const RunConfig& cfg) {
    cmd_matrix(cfg);
    cmd_access(cfg);
    cmd_cartogram(cfg);
    cmd_render(cfg);
}

}  // namespace dynamap
