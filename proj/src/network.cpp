#include "dynamap/network.hpp"

#include <algorithm>
#include <cmath>

#include "dynamap/errors.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

namespace {
const char* kWeekdayNames[7] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
}

Weekday parse_weekday(const std::string& name) {
    for (int i = 0; i < 7; ++i)
        if (name == kWeekdayNames[i]) return static_cast<Weekday>(i);
    throw ValidationError("unknown weekday '" + name + "' (expected Mon..Sun)");
}

const char* weekday_name(Weekday d) { return kWeekdayNames[static_cast<int>(d)]; }

void RoadNetwork::finalize() {
    // node id -> index, sorted for binary search
    sorted_node_ids_.resize(nodes.size());
    sorted_node_pos_.resize(nodes.size());
    std::vector<int> order(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return nodes[static_cast<size_t>(a)].id < nodes[static_cast<size_t>(b)].id; });
    for (size_t i = 0; i < order.size(); ++i) {
        sorted_node_ids_[i] = nodes[static_cast<size_t>(order[i])].id;
        sorted_node_pos_[i] = order[i];
        if (i > 0 && sorted_node_ids_[i] == sorted_node_ids_[i - 1])
            throw ValidationError(strprintf("duplicate node id %lld", sorted_node_ids_[i]));
    }
    for (const Node& n : nodes) {
        if (!std::isfinite(n.pos.x()) || !std::isfinite(n.pos.y()))
            throw ValidationError(strprintf("node %lld: non-finite coordinates", n.id));
    }

    std::vector<int> profile_idx_by_id;
    auto profile_index = [&](int id) -> int {
        for (size_t i = 0; i < profiles.size(); ++i)
            if (profiles[i].id == id) return static_cast<int>(i);
        return -1;
    };
    for (size_t i = 0; i < profiles.size(); ++i) {
        const SpeedProfile& p = profiles[i];
        if (p.weekday != weekday)
            throw ValidationError(strprintf("profile %d: weekday %s does not match network weekday %s",
                                            p.id, weekday_name(p.weekday), weekday_name(weekday)));
        for (int b = 0; b < kBinsPerDay; ++b) {
            if (!(p.bins[static_cast<size_t>(b)] > 0.0))
                throw ValidationError(strprintf("profile %d: bin %d value must be > 0", p.id, b));
            if (p.bins[static_cast<size_t>(b)] > 1.5)
                throw ValidationError(strprintf("profile %d: bin %d value %.4f exceeds cap 1.5", p.id, b,
                                                p.bins[static_cast<size_t>(b)]));
        }
        for (size_t j = 0; j < i; ++j)
            if (profiles[j].id == p.id)
                throw ValidationError(strprintf("duplicate profile id %d for weekday %s", p.id,
                                                weekday_name(weekday)));
    }

    std::vector<size_t> counts(nodes.size() + 1, 0);
    for (Edge& e : edges) {
        e.from_idx = node_index(e.from_node);
        e.to_idx = node_index(e.to_node);
        if (e.from_idx < 0)
            throw ValidationError(strprintf("edge %lld: unknown node %lld", e.id, e.from_node));
        if (e.to_idx < 0)
            throw ValidationError(strprintf("edge %lld: unknown node %lld", e.id, e.to_node));
        if (!(e.length_m > 0.0))
            throw ValidationError(strprintf("edge %lld: non-positive length %.3f", e.id, e.length_m));
        if (!(e.freeflow_kmh > 0.0))
            throw ValidationError(strprintf("edge %lld: non-positive free-flow speed %.3f", e.id, e.freeflow_kmh));
        if (e.frc < 0 || e.frc > 6)
            throw ValidationError(strprintf("edge %lld: frc %d outside [0,6]", e.id, e.frc));
        if (e.profile_id) {
            e.profile_idx = profile_index(*e.profile_id);
            if (e.profile_idx < 0)
                throw ValidationError(strprintf("edge %lld: unknown profile id %d", e.id, *e.profile_id));
        } else {
            e.profile_idx = -1;
        }
        counts[static_cast<size_t>(e.from_idx) + 1]++;
    }

    adj_offset_.assign(nodes.size() + 1, 0);
    for (size_t i = 1; i <= nodes.size(); ++i) adj_offset_[i] = adj_offset_[i - 1] + counts[i];
    adj_edges_.assign(edges.size(), -1);
    std::vector<size_t> cursor(adj_offset_.begin(), adj_offset_.end() - 1);
    for (size_t e = 0; e < edges.size(); ++e)
        adj_edges_[cursor[static_cast<size_t>(edges[e].from_idx)]++] = static_cast<int>(e);

    fifoized_ = false;
    fifo_tau_.clear();
    fifo_offset_.clear();
    finalized_ = true;
}

int RoadNetwork::node_index(NodeId id) const {
    auto it = std::lower_bound(sorted_node_ids_.begin(), sorted_node_ids_.end(), id);
    if (it == sorted_node_ids_.end() || *it != id) return -1;
    return sorted_node_pos_[static_cast<size_t>(it - sorted_node_ids_.begin())];
}

double RoadNetwork::raw_traversal_seconds(int e, int bin) const {
    const Edge& ed = edges[static_cast<size_t>(e)];
    double speed = ed.freeflow_kmh;
    if (ed.profile_idx >= 0)
        speed = ed.freeflow_kmh * profiles[static_cast<size_t>(ed.profile_idx)].bins[static_cast<size_t>(bin)];
    return (ed.length_m / 1000.0) / speed * 3600.0;
}

double RoadNetwork::traversal_seconds(int e, double entry_abs) const {
    double day = std::floor(entry_abs / kSecondsPerDay);
    double r = entry_abs - day * kSecondsPerDay;
    int bin = bin_of_seconds(r);
    const Edge& ed = edges[static_cast<size_t>(e)];
    if (ed.profile_idx < 0) return raw_traversal_seconds(e, bin);
    double tau_now = raw_traversal_seconds(e, bin);
    if (!fifoized_) return tau_now;
    const double* swept = fifo_tau_.data() + fifo_offset_[static_cast<size_t>(e)];
    // waiting envelope: leave now frozen, or hold for the next bin's arrival
    double next_arrival = (bin + 1 < kBinsPerDay) ? (bin + 1) * kSecondsPerBin + swept[bin + 1]
                                                  : kSecondsPerDay + swept[0];
    return std::min(tau_now, next_arrival - r);
}

double edge_speed_at(const RoadNetwork& net, const Edge& edge, Instant entry) {
    if (edge.profile_idx < 0) return edge.freeflow_kmh;
    return edge.freeflow_kmh * net.profiles[static_cast<size_t>(edge.profile_idx)].bins[static_cast<size_t>(entry.bin())];
}

double edge_traversal_time(const RoadNetwork& net, const Edge& edge, Instant entry) {
    return (edge.length_m / 1000.0) / edge_speed_at(net, edge, entry) * 60.0;
}

RoadNetwork fifoize(const RoadNetwork& net) {
    RoadNetwork out = net;
    out.fifo_offset_.assign(out.edges.size(), -1);
    size_t profiled = 0;
    for (const Edge& e : out.edges)
        if (e.profile_idx >= 0) ++profiled;
    out.fifo_tau_.assign(profiled * static_cast<size_t>(kBinsPerDay), 0.0);

    size_t next = 0;
    std::array<double, kBinsPerDay> arrival;
    for (size_t e = 0; e < out.edges.size(); ++e) {
        if (out.edges[e].profile_idx < 0) continue;
        for (int k = 0; k < kBinsPerDay; ++k)
            arrival[static_cast<size_t>(k)] =
                k * kSecondsPerBin + out.raw_traversal_seconds(static_cast<int>(e), k);
        // two backward laps around the day; the second lap carries the
        // settled wrap anchor through the whole ring
        for (int lap = 0; lap < 2; ++lap) {
            for (int k = kBinsPerDay - 1; k >= 0; --k) {
                double next_arr = (k + 1 < kBinsPerDay) ? arrival[static_cast<size_t>(k) + 1]
                                                        : arrival[0] + kSecondsPerDay;
                arrival[static_cast<size_t>(k)] = std::min(arrival[static_cast<size_t>(k)], next_arr);
            }
        }
        double* tau = out.fifo_tau_.data() + next * static_cast<size_t>(kBinsPerDay);
        for (int k = 0; k < kBinsPerDay; ++k)
            tau[k] = arrival[static_cast<size_t>(k)] - k * kSecondsPerBin;
        out.fifo_offset_[e] = static_cast<long long>(next * static_cast<size_t>(kBinsPerDay));
        ++next;
    }
    out.fifoized_ = true;
    return out;
}

RoadNetwork freeflow_copy(const RoadNetwork& net) {
    RoadNetwork out = net;
    out.profiles.clear();
    for (Edge& e : out.edges) {
        e.profile_id.reset();
        e.profile_idx = -1;
    }
    out.fifo_tau_.clear();
    out.fifo_offset_.assign(out.edges.size(), -1);
    out.fifoized_ = true;  // constant traversal times are already non-overtaking
    return out;
}

NetworkStats network_stats(const RoadNetwork& net) {
    NetworkStats s;
    s.node_count = static_cast<int>(net.nodes.size());
    s.edge_count = static_cast<int>(net.edges.size());
    s.profile_count = static_cast<int>(net.profiles.size());
    for (const Edge& e : net.edges) {
        double km = e.length_m / 1000.0;
        s.km_by_frc[static_cast<size_t>(e.frc)] += km;
        s.total_km += km;
        if (e.profile_idx >= 0) {
            s.profiled_km_by_frc[static_cast<size_t>(e.frc)] += km;
            s.profiled_km += km;
        }
    }
    s.profiled_pct = s.total_km > 0.0 ? 100.0 * s.profiled_km / s.total_km : 0.0;
    return s;
}

std::string format_stats(const NetworkStats& s) {
    std::string out;
    out += strprintf("nodes: %d  directed edges: %d  profiles: %d\n", s.node_count, s.edge_count,
                     s.profile_count);
    out += "frc   km          profiled_km  profiled_pct\n";
    for (int frc = 0; frc <= 6; ++frc) {
        double km = s.km_by_frc[static_cast<size_t>(frc)];
        double pkm = s.profiled_km_by_frc[static_cast<size_t>(frc)];
        out += strprintf("%-5d %-11.2f %-12.2f %.2f\n", frc, km, pkm, km > 0.0 ? 100.0 * pkm / km : 0.0);
    }
    out += strprintf("total %-11.2f %-12.2f %.2f\n", s.total_km, s.profiled_km, s.profiled_pct);
    return out;
}

}  // namespace dynamap
