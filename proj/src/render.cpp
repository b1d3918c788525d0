#include "dynamap/render.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "dynamap/errors.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

int ColorRamp::class_of(double v) const {
    // Half-open intervals: a value sitting on a break joins the upper class.
    int c = 0;
    for (double b : breaks)
        if (v >= b) ++c;
    return c;
}

void ColorRamp::validate() const {
    if (colors.size() != breaks.size() + 1)
        throw ValidationError(strprintf("color ramp: %zu colors for %zu breaks (need breaks + 1)",
                                        colors.size(), breaks.size()));
    for (size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i] > breaks[i - 1]))
            throw ValidationError("color ramp: breaks must be strictly increasing");
    for (const std::string& c : colors) {
        if (c.size() != 7 || c[0] != '#' || c.find_first_not_of("0123456789abcdefABCDEF", 1) != std::string::npos)
            throw ValidationError("color ramp: colors must be #rrggbb hex");
    }
}

ColorRamp default_ramp(double floor_pct) {
    ColorRamp ramp;
    ramp.colors = {"#440154", "#414487", "#2a788e", "#22a884", "#7ad151", "#fde725"};
    const int classes = static_cast<int>(ramp.colors.size());
    for (int k = 1; k < classes; ++k)
        ramp.breaks.push_back(floor_pct + k * (100.0 - floor_pct) / classes);
    ramp.validate();
    return ramp;
}

void MapExtent::expand(const Eigen::Vector2d& p) {
    if (!valid()) {
        lo = p;
        hi = p;
        return;
    }
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
}

void MapExtent::pad_fraction(double f) {
    const Eigen::Vector2d pad = f * (hi - lo);
    lo -= pad;
    hi += pad;
}

bool MapExtent::valid() const { return hi.x() > lo.x() && hi.y() > lo.y(); }

MapExtent extent_of(const LayerSet& set) {
    MapExtent e;
    e.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    e.hi = -e.lo;
    for (const LayerPart& part : set.parts)
        for (const Eigen::Vector2d& p : part.pts) {
            e.lo = e.lo.cwiseMin(p);
            e.hi = e.hi.cwiseMax(p);
        }
    return e;
}

MapExtent extent_of_zones(const ZoneGrid& grid) {
    MapExtent e;
    e.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    e.hi = -e.lo;
    const double half = grid.cell_size_m / 2.0;
    for (const Zone& z : grid.zones) {
        e.lo = e.lo.cwiseMin(z.centroid - Eigen::Vector2d(half, half));
        e.hi = e.hi.cwiseMax(z.centroid + Eigen::Vector2d(half, half));
    }
    return e;
}

Projection make_projection(const FrameSpec& frame) {
    if (!frame.extent.valid()) throw ValidationError("frame extent is degenerate");
    const double usable_w = frame.width_px - 2.0 * frame.margin_px;
    const double usable_h = frame.height_px - 2.0 * frame.margin_px;
    if (!(usable_w > 0.0) || !(usable_h > 0.0)) throw ValidationError("frame margin exceeds canvas");
    const Eigen::Vector2d span = frame.extent.hi - frame.extent.lo;
    Projection proj;
    proj.scale = std::min(usable_w / span.x(), usable_h / span.y());
    proj.origin = 0.5 * (frame.extent.lo + frame.extent.hi);
    proj.offset_x = frame.width_px / 2.0;
    proj.offset_y = frame.height_px / 2.0;
    return proj;
}

namespace {

std::string px(double v) { return strprintf("%.2f", v); }

std::string darken(const std::string& hex, double factor) {
    int rgb[3];
    for (int i = 0; i < 3; ++i) rgb[i] = std::stoi(hex.substr(1 + 2 * i, 2), nullptr, 16);
    return strprintf("#%02x%02x%02x", static_cast<int>(rgb[0] * factor),
                     static_cast<int>(rgb[1] * factor), static_cast<int>(rgb[2] * factor));
}

std::string svg_open(const FrameSpec& frame) {
    std::string s = strprintf(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%d\" height=\"%d\" "
        "viewBox=\"0 0 %d %d\">\n",
        frame.width_px, frame.height_px, frame.width_px, frame.height_px);
    s += strprintf("<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"#ffffff\"/>\n",
                   frame.width_px, frame.height_px);
    return s;
}

std::string svg_label(const FrameSpec& frame) {
    return strprintf(
        "<text x=\"%s\" y=\"%s\" font-family=\"sans-serif\" font-size=\"22\" fill=\"#111111\">%s</text>\n",
        px(frame.margin_px).c_str(), px(frame.margin_px * 0.75).c_str(),
        xml_escape(frame.label).c_str());
}

std::string svg_legend(const FrameSpec& frame, const ColorRamp& ramp) {
    std::string s = "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#111111\">\n";
    const double x = frame.margin_px;
    double y = frame.height_px - frame.margin_px * 0.5 - 16.0 * ramp.colors.size();
    for (size_t c = 0; c < ramp.colors.size(); ++c) {
        std::string range;
        if (ramp.breaks.empty())
            range = "all";
        else if (c == 0)
            range = strprintf("&lt; %.1f", ramp.breaks.front());
        else if (c == ramp.colors.size() - 1)
            range = strprintf("&#8805; %.1f", ramp.breaks.back());
        else
            range = strprintf("[%.1f, %.1f)", ramp.breaks[c - 1], ramp.breaks[c]);
        s += strprintf("<rect x=\"%s\" y=\"%s\" width=\"14\" height=\"12\" fill=\"%s\" stroke=\"#333333\"/>\n",
                       px(x).c_str(), px(y).c_str(), ramp.colors[c].c_str());
        s += strprintf("<text x=\"%s\" y=\"%s\">%s</text>\n", px(x + 20.0).c_str(), px(y + 10.0).c_str(),
                       range.c_str());
        y += 16.0;
    }
    s += "</g>\n";
    return s;
}

std::string polyline_path(const std::vector<Eigen::Vector2d>& pts, const Projection& proj, bool close) {
    std::string d;
    for (size_t i = 0; i < pts.size(); ++i) {
        const Eigen::Vector2d p = proj.to_px(pts[i]);
        d += (i == 0 ? "M" : "L");
        d += px(p.x()) + " " + px(p.y());
    }
    if (close) d += "Z";
    return d;
}

std::string svg_layers(const LayerSet& set, const Projection& proj) {
    std::string s = "<g>\n";
    for (const LayerPart& part : set.parts) {
        switch (part.kind) {
            case GeomKind::Polygon:
                s += strprintf("<path d=\"%s\" fill=\"none\" stroke=\"#555555\" stroke-width=\"1.5\"/>\n",
                               polyline_path(part.pts, proj, true).c_str());
                break;
            case GeomKind::Line:
                s += strprintf("<path d=\"%s\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n",
                               polyline_path(part.pts, proj, false).c_str());
                break;
            case GeomKind::Point: {
                const Eigen::Vector2d p = proj.to_px(part.pts[0]);
                s += strprintf("<circle cx=\"%s\" cy=\"%s\" r=\"3.5\" fill=\"#222222\"/>\n",
                               px(p.x()).c_str(), px(p.y()).c_str());
                s += strprintf(
                    "<text x=\"%s\" y=\"%s\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\">%s</text>\n",
                    px(p.x() + 6.0).c_str(), px(p.y() - 4.0).c_str(), xml_escape(part.layer).c_str());
                break;
            }
        }
    }
    s += "</g>\n";
    return s;
}

std::vector<int> internal_zone_rows(const ZoneGrid& grid) {
    std::vector<int> rows;
    for (size_t i = 0; i < grid.zones.size(); ++i)
        if (!grid.zones[i].is_external) rows.push_back(static_cast<int>(i));
    return rows;
}

}  // namespace

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string frame_filename(int slot) { return strprintf("frame_%04d.svg", slot); }

std::string render_choropleth(const FrameSpec& frame, const ZoneGrid& grid,
                              const ZoneValues& values, const ColorRamp& ramp,
                              const LayerSet* reference_layers) {
    ramp.validate();
    const std::vector<int> rows = internal_zone_rows(grid);
    if (values.pct.size() != static_cast<Eigen::Index>(rows.size()))
        throw ValidationError("choropleth: pct length does not match internal zone count");
    const Projection proj = make_projection(frame);
    const double half = grid.cell_size_m / 2.0;

    std::string s = svg_open(frame);
    s += "<g stroke=\"#ffffff\" stroke-width=\"0.5\">\n";
    for (size_t k = 0; k < rows.size(); ++k) {  // grid order = zone_id ascending
        if (!values.gap.empty() && values.gap[k]) continue;
        const Zone& z = grid.zones[static_cast<size_t>(rows[k])];
        const Eigen::Vector2d tl = proj.to_px(z.centroid + Eigen::Vector2d(-half, half));
        const double side = 2.0 * half * proj.scale;
        s += strprintf("<rect x=\"%s\" y=\"%s\" width=\"%s\" height=\"%s\" fill=\"%s\"/>\n",
                       px(tl.x()).c_str(), px(tl.y()).c_str(), px(side).c_str(), px(side).c_str(),
                       ramp.colors[static_cast<size_t>(ramp.class_of(values.pct(static_cast<Eigen::Index>(k))))].c_str());
    }
    s += "</g>\n";
    if (reference_layers) s += svg_layers(*reference_layers, proj);
    s += svg_label(frame);
    s += svg_legend(frame, ramp);
    s += "</svg>\n";
    return s;
}

std::string render_extrusion(const FrameSpec& frame, const ZoneGrid& grid,
                             const ZoneValues& values, const ColorRamp& ramp,
                             const ExtrusionView& view) {
    ramp.validate();
    const std::vector<int> rows = internal_zone_rows(grid);
    if (values.pct.size() != static_cast<Eigen::Index>(rows.size()))
        throw ValidationError("extrusion: pct length does not match internal zone count");
    const Projection proj = make_projection(frame);
    const double half = grid.cell_size_m / 2.0;
    const double k_off = 0.5 * std::cos(std::numbers::pi / 4.0);  // cabinet projection, 45 degrees

    // Painter's order: back-to-front along the oblique axis, i.e. descending
    // (x_px - y_px); ties resolved by ascending zone id.
    struct Col {
        size_t value_row;
        const Zone* zone;
        double depth;
    };
    std::vector<Col> order;
    for (size_t k = 0; k < rows.size(); ++k) {
        if (!values.gap.empty() && values.gap[k]) continue;
        const Zone& z = grid.zones[static_cast<size_t>(rows[k])];
        const Eigen::Vector2d c = proj.to_px(z.centroid);
        order.push_back({k, &z, c.x() - c.y()});
    }
    std::sort(order.begin(), order.end(), [](const Col& a, const Col& b) {
        if (a.depth != b.depth) return a.depth > b.depth;
        return a.zone->zone_id < b.zone->zone_id;
    });

    std::string s = svg_open(frame);
    s += "<g stroke=\"#333333\" stroke-width=\"0.6\" stroke-linejoin=\"round\">\n";
    for (const Col& col : order) {
        const double pct = values.pct(static_cast<Eigen::Index>(col.value_row));
        const double h = std::max(0.0, pct - view.floor_pct) * view.height_scale_px_per_pct;
        const std::string fill = ramp.colors[static_cast<size_t>(ramp.class_of(pct))];
        const Eigen::Vector2d tl = proj.to_px(col.zone->centroid + Eigen::Vector2d(-half, half));
        const double side = 2.0 * half * proj.scale;
        const double x0 = tl.x(), y0 = tl.y();           // base square top-left
        const double x1 = x0 + side, y1 = y0 + side;     // base square bottom-right
        const double dx = h * k_off, dy = -h * k_off;    // oblique top offset

        if (h > 0.0) {
            // Left and bottom side faces are the ones facing the viewer.
            s += strprintf("<path d=\"M%s %sL%s %sL%s %sL%s %sZ\" fill=\"%s\"/>\n",
                           px(x0).c_str(), px(y0).c_str(), px(x0).c_str(), px(y1).c_str(),
                           px(x0 + dx).c_str(), px(y1 + dy).c_str(), px(x0 + dx).c_str(), px(y0 + dy).c_str(),
                           darken(fill, 0.62).c_str());
            s += strprintf("<path d=\"M%s %sL%s %sL%s %sL%s %sZ\" fill=\"%s\"/>\n",
                           px(x0).c_str(), px(y1).c_str(), px(x1).c_str(), px(y1).c_str(),
                           px(x1 + dx).c_str(), px(y1 + dy).c_str(), px(x0 + dx).c_str(), px(y1 + dy).c_str(),
                           darken(fill, 0.78).c_str());
        }
        s += strprintf("<rect x=\"%s\" y=\"%s\" width=\"%s\" height=\"%s\" fill=\"%s\"/>\n",
                       px(x0 + dx).c_str(), px(y0 + dy).c_str(), px(side).c_str(), px(side).c_str(),
                       fill.c_str());
        if (h > 0.0) {
            // Vertical corner edges keep adjoining columns visually separate.
            for (const auto& [cx, cy] : {std::pair{x0, y0}, {x0, y1}, {x1, y1}}) {
                s += strprintf("<line x1=\"%s\" y1=\"%s\" x2=\"%s\" y2=\"%s\" stroke=\"#222222\"/>\n",
                               px(cx).c_str(), px(cy).c_str(), px(cx + dx).c_str(), px(cy + dy).c_str());
            }
        }
    }
    s += "</g>\n";
    s += svg_label(frame);
    s += svg_legend(frame, ramp);
    s += "</svg>\n";
    return s;
}

std::string render_cartogram(const FrameSpec& frame, const LayerSet& distorted,
                             const IsolineSpec& isolines, const Eigen::Vector2d& center,
                             const LayerSet* geographic) {
    if (!(isolines.scale_km_per_min > 0.0)) throw ValidationError("isolines need a positive scale");
    std::string s = svg_open(frame);

    const bool split = geographic != nullptr;
    FrameSpec panel = frame;
    if (split) panel.width_px = frame.width_px / 2;

    auto draw_panel = [&](const LayerSet& set, double shift_px, bool with_isolines) {
        Projection proj = make_projection(panel);
        proj.offset_x += shift_px;
        std::string g = "<g>\n";
        if (with_isolines) {
            const Eigen::Vector2d c = proj.to_px(center);
            for (int k = 1; k <= isolines.count; ++k) {
                const double r_m = k * isolines.interval_min * isolines.scale_km_per_min * 1000.0;
                g += strprintf("<circle cx=\"%s\" cy=\"%s\" r=\"%s\" fill=\"none\" stroke=\"#bbbbbb\" "
                               "stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
                               px(c.x()).c_str(), px(c.y()).c_str(), px(r_m * proj.scale).c_str());
                g += strprintf(
                    "<text x=\"%s\" y=\"%s\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#999999\">%d min</text>\n",
                    px(c.x() + r_m * proj.scale + 3.0).c_str(), px(c.y()).c_str(),
                    static_cast<int>(k * isolines.interval_min));
            }
            g += strprintf("<circle cx=\"%s\" cy=\"%s\" r=\"3\" fill=\"#cc2222\"/>\n", px(c.x()).c_str(),
                           px(c.y()).c_str());
        }
        g += svg_layers(set, proj);
        g += "</g>\n";
        return g;
    };

    if (split) {
        // Panels share frame.extent and therefore one scale, so an identity
        // distortion yields twin panels.
        s += draw_panel(*geographic, 0.0, false);
        s += draw_panel(distorted, frame.width_px / 2.0, true);
        s += strprintf("<line x1=\"%s\" y1=\"0\" x2=\"%s\" y2=\"%d\" stroke=\"#dddddd\"/>\n",
                       px(frame.width_px / 2.0).c_str(), px(frame.width_px / 2.0).c_str(), frame.height_px);
    } else {
        s += draw_panel(distorted, 0.0, true);
    }
    s += svg_label(frame);
    s += "</svg>\n";
    return s;
}

void emit_animation(const std::string& frames_dir, int slots, double fps_scenarios) {
    if (slots <= 0) throw ValidationError("animation needs at least one slot");
    if (!(fps_scenarios > 0.0)) throw ValidationError("fps must be positive");
    std::string manifest;
    for (int i = 0; i < slots; ++i) {
        const std::string name = frame_filename(i);
        const std::filesystem::path p = std::filesystem::path(frames_dir) / name;
        if (!std::filesystem::exists(p))
            throw ValidationError("animation frame missing: " + name);
        manifest += strprintf("%d\t%s\t%.6f\n", i, name.c_str(), 1.0 / fps_scenarios);
    }
    const std::filesystem::path out_path = std::filesystem::path(frames_dir) / "animation.manifest";
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + out_path.string());
    out << manifest;
    if (!out) throw ValidationError("write failed: " + out_path.string());
}

}  // namespace dynamap
