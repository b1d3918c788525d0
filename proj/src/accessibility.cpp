#include "dynamap/accessibility.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "dynamap/csv.hpp"
#include "dynamap/errors.hpp"
#include "dynamap/numfmt.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

double decay_weight(double cost_min, const DecayParams& params) {
    if (!(params.beta_per_min < 0.0)) throw ValidationError("decay beta must be negative");
    if (std::isinf(cost_min) && cost_min > 0.0) return 0.0;
    if (!(cost_min >= 0.0)) throw ValidationError("decay weight: cost must be non-negative");
    return std::exp(params.beta_per_min * cost_min);
}

double potential_accessibility(const Eigen::VectorXd& cost_min,
                               const Eigen::VectorXd& opportunities,
                               const DecayParams& params) {
    if (!(params.beta_per_min < 0.0)) throw ValidationError("decay beta must be negative");
    if (cost_min.size() != opportunities.size())
        throw ValidationError(strprintf("accessibility: %lld costs vs %lld opportunity masses",
                                        static_cast<long long>(cost_min.size()),
                                        static_cast<long long>(opportunities.size())));
    if ((cost_min.array() < 0.0).any())
        throw ValidationError("accessibility: negative travel cost");
    // exp(beta * inf) underflows to exactly 0, so unreachable cells drop out.
    return ((params.beta_per_min * cost_min.array()).exp() * opportunities.array()).sum();
}

Eigen::MatrixXd relative_field(const Eigen::MatrixXd& abs_value, const Eigen::VectorXd& baseline,
                               double floor_pct, std::vector<uint8_t>& gap) {
    if (abs_value.rows() != baseline.size())
        throw ValidationError("relative field: row count does not match baseline length");
    gap.assign(static_cast<size_t>(baseline.size()), 0);
    Eigen::MatrixXd pct(abs_value.rows(), abs_value.cols());
    for (Eigen::Index i = 0; i < abs_value.rows(); ++i) {
        if (baseline(i) == 0.0) {
            gap[static_cast<size_t>(i)] = 1;
            pct.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        for (Eigen::Index s = 0; s < abs_value.cols(); ++s)
            pct(i, s) = std::max(floor_pct, 100.0 * (abs_value(i, s) / baseline(i)));
    }
    return pct;
}

AccessibilityField build_field(const CostCube& cube, const CostCube& ff_cube,
                               const Eigen::VectorXd& opportunities,
                               const DecayParams& params, double floor_pct) {
    if (ff_cube.slot_count != 1)
        throw ValidationError("free-flow cube must have exactly one slot");
    const Eigen::Index O = cube.slices.empty() ? 0 : cube.slices[0].rows();
    const Eigen::Index D = cube.slices.empty() ? 0 : cube.slices[0].cols();
    if (O == 0 || D == 0) throw ValidationError("accessibility: empty cube");
    if (ff_cube.slices[0].rows() != O || ff_cube.slices[0].cols() != D)
        throw ValidationError("free-flow cube shape does not match the slot cube");
    if (opportunities.size() != D)
        throw ValidationError(strprintf("accessibility: %lld opportunity masses for %lld destinations",
                                        static_cast<long long>(opportunities.size()),
                                        static_cast<long long>(D)));
    if ((opportunities.array() < 0.0).any())
        throw ValidationError("accessibility: negative opportunity mass");

    AccessibilityField field;
    field.zone_ids = cube.origin_ids;
    field.slot_count = cube.slot_count;
    field.floor_pct = floor_pct;
    field.abs_value.resize(O, cube.slot_count);
    for (int s = 0; s < cube.slot_count; ++s) {
        const Eigen::MatrixXd costs = cube.slices[s].cast<double>();
        for (Eigen::Index o = 0; o < O; ++o)
            field.abs_value(o, s) = potential_accessibility(costs.row(o).transpose(), opportunities, params);
    }
    const Eigen::MatrixXd ff_costs = ff_cube.slices[0].cast<double>();
    field.baseline.resize(O);
    for (Eigen::Index o = 0; o < O; ++o)
        field.baseline(o) = potential_accessibility(ff_costs.row(o).transpose(), opportunities, params);

    field.pct = relative_field(field.abs_value, field.baseline, floor_pct, field.gap);
    return field;
}

Eigen::VectorXd free_flow_baseline(const RoadNetwork& net, const ZoneGrid& grid,
                                   const DecayParams& params, int workers) {
    const RoadNetwork ff = freeflow_copy(net);
    DepartureSlots one;
    one.count = 1;
    one.interval_sec = kSecondsPerDay;
    const CostCube cube = build_cost_cube(ff, grid, one, workers);

    Eigen::VectorXd opp(cube.dest_ids.size());
    for (size_t d = 0; d < cube.dest_ids.size(); ++d)
        opp(static_cast<Eigen::Index>(d)) = grid.zones[grid.zone_index(cube.dest_ids[d])].opportunities;

    const Eigen::MatrixXd costs = cube.slices[0].cast<double>();
    Eigen::VectorXd base(costs.rows());
    for (Eigen::Index o = 0; o < costs.rows(); ++o)
        base(o) = potential_accessibility(costs.row(o).transpose(), opp, params);
    return base;
}

void write_access_csv(const AccessibilityField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "zone_id,slot,abs_value,pct\n";
    for (size_t i = 0; i < field.zone_ids.size(); ++i) {
        for (int s = 0; s < field.slot_count; ++s) {
            out << field.zone_ids[i] << ',' << s << ','
                << format_shortest(field.abs_value(static_cast<Eigen::Index>(i), s)) << ',';
            if (field.gap[i])
                out << "nan";
            else
                out << format_shortest(field.pct(static_cast<Eigen::Index>(i), s));
            out << '\n';
        }
    }
    if (!out) throw ValidationError("write failed: " + path);
}

AccessibilityField read_access_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_zone = t.require("zone_id");
    const int c_slot = t.require("slot");
    const int c_abs = t.require("abs_value");
    const int c_pct = t.require("pct");

    std::map<long long, std::map<int, std::pair<double, double>>> table;
    int max_slot = -1;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const long long zone = t.integer(r, c_zone);
        const int slot = static_cast<int>(t.integer(r, c_slot));
        const std::string& pct_text = t.cell(r, c_pct);
        const double pct = pct_text == "nan" ? std::numeric_limits<double>::quiet_NaN()
                                             : t.number(r, c_pct);
        if (!table[zone].emplace(slot, std::make_pair(t.number(r, c_abs), pct)).second)
            t.fail(r, "duplicate (zone_id, slot) pair");
        max_slot = std::max(max_slot, slot);
    }
    if (table.empty()) throw ValidationError(path + ": no rows");

    AccessibilityField field;
    field.slot_count = max_slot + 1;
    field.abs_value.resize(static_cast<Eigen::Index>(table.size()), field.slot_count);
    field.pct.resize(static_cast<Eigen::Index>(table.size()), field.slot_count);
    field.gap.assign(table.size(), 0);
    Eigen::Index i = 0;
    for (const auto& [zone, slots] : table) {
        if (static_cast<int>(slots.size()) != field.slot_count)
            throw ValidationError(strprintf("%s: zone %lld has %d slots, expected %d", path.c_str(), zone,
                                            static_cast<int>(slots.size()), field.slot_count));
        field.zone_ids.push_back(zone);
        bool gap = true;
        for (const auto& [slot, vals] : slots) {
            field.abs_value(i, slot) = vals.first;
            field.pct(i, slot) = vals.second;
            if (!std::isnan(vals.second)) gap = false;
        }
        field.gap[static_cast<size_t>(i)] = gap ? 1 : 0;
        ++i;
    }
    field.baseline = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.size()));
    return field;
}

void write_baseline_csv(const AccessibilityField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "zone_id,baseline_value\n";
    for (size_t i = 0; i < field.zone_ids.size(); ++i)
        out << field.zone_ids[i] << ',' << format_shortest(field.baseline(static_cast<Eigen::Index>(i))) << '\n';
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace dynamap
