#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynamap/cartogram.hpp"
#include "dynamap/zoning.hpp"

namespace dynamap {

// Global classing shared by every frame of an animation: `breaks` are the
// interior class boundaries (strictly increasing), `colors` one RGB hex
// fill per class — exactly breaks.size() + 1 entries. Intervals are
// half-open: a value on a break belongs to the upper class.
struct ColorRamp {
    std::vector<double> breaks;
    std::vector<std::string> colors;

    int class_of(double v) const;
    void validate() const;
};

// 6 equal classes over [floor_pct, 100].
ColorRamp default_ramp(double floor_pct);

struct MapExtent {
    Eigen::Vector2d lo{0.0, 0.0};
    Eigen::Vector2d hi{0.0, 0.0};

    void expand(const Eigen::Vector2d& p);
    void pad_fraction(double f);
    bool valid() const;
};

MapExtent extent_of(const LayerSet& set);
MapExtent extent_of_zones(const ZoneGrid& grid);

// Fixed per-animation frame geometry plus the per-frame label.
struct FrameSpec {
    int width_px = 1280;
    int height_px = 960;
    double margin_px = 48.0;
    MapExtent extent;
    int scenario_index = 0;
    std::string label;
};

// Uniform meters->pixels affine with the Y axis flipped.
struct Projection {
    double scale = 1.0;               // px per m
    Eigen::Vector2d origin{0.0, 0.0};  // map coords of pixel (offset_x, offset_y)
    double offset_x = 0.0;
    double offset_y = 0.0;

    Eigen::Vector2d to_px(const Eigen::Vector2d& p) const {
        return {offset_x + (p.x() - origin.x()) * scale,
                offset_y - (p.y() - origin.y()) * scale};
    }
};

Projection make_projection(const FrameSpec& frame);

// Per-zone values aligned with the internal zones of `grid` in id order.
struct ZoneValues {
    Eigen::VectorXd pct;
    std::vector<uint8_t> gap;  // gap zones are left unfilled
};

std::string render_choropleth(const FrameSpec& frame, const ZoneGrid& grid,
                              const ZoneValues& values, const ColorRamp& ramp,
                              const LayerSet* reference_layers);

struct ExtrusionView {
    double height_scale_px_per_pct = 2.0;  // column px per pct point above floor
    double floor_pct = 50.0;
};

std::string render_extrusion(const FrameSpec& frame, const ZoneGrid& grid,
                             const ZoneValues& values, const ColorRamp& ramp,
                             const ExtrusionView& view);

struct IsolineSpec {
    double interval_min = 15.0;
    double scale_km_per_min = 1.0;
    int count = 4;
};

// Distorted line-work with concentric travel-time circles; when
// `geographic` is given the canvas splits into geographic (left) and
// cartogram (right) panels sharing one scale.
std::string render_cartogram(const FrameSpec& frame, const LayerSet& distorted,
                             const IsolineSpec& isolines, const Eigen::Vector2d& center,
                             const LayerSet* geographic);

// Writes <frames_dir>/animation.manifest: "index<TAB>filename<TAB>duration_s"
// for frame_0000.svg .. frame_<slots-1>.svg. Every frame file must exist.
void emit_animation(const std::string& frames_dir, int slots, double fps_scenarios = 4.0);

std::string frame_filename(int slot);
std::string xml_escape(const std::string& text);

}  // namespace dynamap
