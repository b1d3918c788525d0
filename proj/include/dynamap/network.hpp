#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynamap/instant.hpp"

namespace dynamap {

enum class Weekday { Mon = 0, Tue, Wed, Thu, Fri, Sat, Sun };

Weekday parse_weekday(const std::string& name);
const char* weekday_name(Weekday d);

using NodeId = long long;
using EdgeId = long long;

struct Node {
    NodeId id = 0;
    Eigen::Vector2d pos{0.0, 0.0};  // projected meters, equal-area assumed
};

// Per-weekday schedule of speed as a fraction of free-flow speed in
// 5-minute bins. Fractions are validated into (0, 1.5] on ingest.
struct SpeedProfile {
    int id = 0;
    Weekday weekday = Weekday::Mon;
    std::array<double, kBinsPerDay> bins{};
};

struct Edge {
    EdgeId id = 0;
    NodeId from_node = 0;
    NodeId to_node = 0;
    double length_m = 0.0;
    int frc = 0;  // functional road classification, 0..6
    double freeflow_kmh = 0.0;
    std::optional<int> profile_id;  // empty = free flow at all instants

    // resolved indexes, set by RoadNetwork::finalize()
    int from_idx = -1;
    int to_idx = -1;
    int profile_idx = -1;
};

// One weekday of a directed road network. Immutable after finalize();
// safe for concurrent reads.
struct RoadNetwork {
    Weekday weekday = Weekday::Mon;
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::vector<SpeedProfile> profiles;  // only rows for `weekday`

    // Validates invariants, resolves ids to indexes, builds adjacency.
    // Throws ValidationError on dangling references or out-of-range values.
    void finalize();

    int node_index(NodeId id) const;  // -1 if unknown

    // Outgoing edge indexes of a node.
    const int* out_begin(int node_idx) const { return adj_edges_.data() + adj_offset_[static_cast<size_t>(node_idx)]; }
    const int* out_end(int node_idx) const { return adj_edges_.data() + adj_offset_[static_cast<size_t>(node_idx) + 1]; }

    bool fifoized() const { return fifoized_; }

    // Raw frozen-entry traversal of edge `e` entered at bin `bin`, seconds.
    double raw_traversal_seconds(int e, int bin) const;

    // Traversal time in seconds for entry at absolute second `entry_abs`
    // (may exceed one day; profile lookup wraps). On a fifoized network
    // this is the waiting envelope and is non-overtaking everywhere.
    double traversal_seconds(int e, double entry_abs) const;

    friend RoadNetwork fifoize(const RoadNetwork& net);
    friend RoadNetwork freeflow_copy(const RoadNetwork& net);

private:
    bool finalized_ = false;
    bool fifoized_ = false;
    std::vector<NodeId> sorted_node_ids_;
    std::vector<int> sorted_node_pos_;
    std::vector<size_t> adj_offset_;
    std::vector<int> adj_edges_;
    // swept bin-start traversal per profiled edge, 288 values; empty offset = -1
    std::vector<double> fifo_tau_;
    std::vector<long long> fifo_offset_;
};

// Speed of an edge for a traversal beginning at `entry`, km/h. Piecewise
// constant with breakpoints at multiples of 300 s.
double edge_speed_at(const RoadNetwork& net, const Edge& edge, Instant entry);

// Frozen-entry traversal time in minutes: the whole link is crossed at the
// speed of the entry bin.
double edge_traversal_time(const RoadNetwork& net, const Edge& edge, Instant entry);

// Returns a copy whose per-edge arrival functions are non-overtaking.
// Bin-start arrivals a(m) = m + tau(m) are swept backward with
// a'(m_k) = min(a(m_k), a'(m_k+1)), cyclically anchored; queries between
// bin starts take the waiting envelope min(tau_k, a'(next) - m). Must be
// applied before any routing.
RoadNetwork fifoize(const RoadNetwork& net);

// Copy with every profile reference removed: free-flow speed at all
// instants. Already non-overtaking, returned fifoized.
RoadNetwork freeflow_copy(const RoadNetwork& net);

struct NetworkStats {
    std::array<double, 7> km_by_frc{};        // directed-edge km per FRC class
    std::array<double, 7> profiled_km_by_frc{};
    double total_km = 0.0;
    double profiled_km = 0.0;
    double profiled_pct = 0.0;  // share of directed-edge km carrying a profile
    int node_count = 0;
    int edge_count = 0;
    int profile_count = 0;
};

NetworkStats network_stats(const RoadNetwork& net);
std::string format_stats(const NetworkStats& s);

}  // namespace dynamap
