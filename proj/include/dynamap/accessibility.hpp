#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynamap/routing.hpp"

namespace dynamap {

// Negative-exponential impedance e^(beta * minutes).
struct DecayParams {
    double beta_per_min = -0.065;
};

// Weight of one destination at the given cost. Infinite cost weighs
// exactly zero; negative cost is rejected.
double decay_weight(double cost_min, const DecayParams& params);

// Opportunity-weighted reachable mass of one origin:
// sum_j D_j * e^(beta * c_j), including the intra-zonal j with c = 0.
double potential_accessibility(const Eigen::VectorXd& cost_min,
                               const Eigen::VectorXd& opportunities,
                               const DecayParams& params);

// Per-origin absolute and relative accessibility over all slots.
struct AccessibilityField {
    std::vector<long long> zone_ids;  // internal origins, ascending
    Eigen::MatrixXd abs_value;        // origins x slots
    Eigen::VectorXd baseline;         // free-flow absolute value per origin
    Eigen::MatrixXd pct;              // 100 * abs/baseline, floored; NaN where gap
    std::vector<uint8_t> gap;         // 1 when baseline == 0 (pct undefined)
    double floor_pct = 50.0;
    int slot_count = 0;
};

// Evaluates the decay sum for every (origin, slot) of `cube` and for the
// single slot of `ff_cube`, then derives the relative field. The
// opportunity vector is aligned with the cube destination axis.
AccessibilityField build_field(const CostCube& cube, const CostCube& ff_cube,
                               const Eigen::VectorXd& opportunities,
                               const DecayParams& params, double floor_pct = 50.0);

// Absolute accessibility of every internal zone on the free-flow network
// (single departure time; the network is static so any instant works).
Eigen::VectorXd free_flow_baseline(const RoadNetwork& net, const ZoneGrid& grid,
                                   const DecayParams& params, int workers = 1);

// pct_i = max(floor, 100 * abs_i / baseline_i); zones with zero baseline
// get NaN and a gap flag instead of an error.
Eigen::MatrixXd relative_field(const Eigen::MatrixXd& abs_value, const Eigen::VectorXd& baseline,
                               double floor_pct, std::vector<uint8_t>& gap);

// access.csv: zone_id,slot,abs_value,pct (long form, slot-major within zone)
void write_access_csv(const AccessibilityField& field, const std::string& path);
AccessibilityField read_access_csv(const std::string& path);

// baseline.csv: zone_id,baseline_value
void write_baseline_csv(const AccessibilityField& field, const std::string& path);

}  // namespace dynamap
