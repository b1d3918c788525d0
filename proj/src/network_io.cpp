#include "dynamap/network_io.hpp"

#include <fstream>

#include "dynamap/csv.hpp"
#include "dynamap/errors.hpp"
#include "dynamap/numfmt.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

RoadNetwork load_network(const std::string& node_file, const std::string& edge_file,
                         const std::string& profile_file, Weekday weekday) {
    RoadNetwork net;
    net.weekday = weekday;

    {
        CsvTable t = read_csv(node_file);
        int c_id = t.require("node_id"), c_x = t.require("x_m"), c_y = t.require("y_m");
        net.nodes.reserve(t.rows.size());
        for (size_t r = 0; r < t.rows.size(); ++r) {
            Node n;
            n.id = t.integer(r, c_id);
            n.pos = Eigen::Vector2d(t.number(r, c_x), t.number(r, c_y));
            net.nodes.push_back(n);
        }
    }

    {
        CsvTable t = read_csv(profile_file);
        int c_id = t.require("profile_id"), c_day = t.require("weekday");
        // bin columns must be exactly b000..b287
        int bins = 0;
        while (t.column(strprintf("b%03d", bins)) >= 0) ++bins;
        if (bins != kBinsPerDay)
            throw ValidationError(strprintf("%s: profile bin count %d != %d", profile_file.c_str(),
                                            bins, kBinsPerDay));
        std::vector<int> bin_col(static_cast<size_t>(kBinsPerDay));
        for (int b = 0; b < kBinsPerDay; ++b)
            bin_col[static_cast<size_t>(b)] = t.require(strprintf("b%03d", b));
        for (size_t r = 0; r < t.rows.size(); ++r) {
            Weekday day;
            try {
                day = parse_weekday(t.cell(r, c_day));
            } catch (const ValidationError& e) {
                t.fail(r, e.what());
            }
            if (day != weekday) continue;
            SpeedProfile p;
            p.id = static_cast<int>(t.integer(r, c_id));
            p.weekday = day;
            for (int b = 0; b < kBinsPerDay; ++b)
                p.bins[static_cast<size_t>(b)] = t.number(r, bin_col[static_cast<size_t>(b)]);
            net.profiles.push_back(p);
        }
    }

    {
        CsvTable t = read_csv(edge_file);
        int c_id = t.require("edge_id"), c_from = t.require("from_node"), c_to = t.require("to_node");
        int c_len = t.require("length_m"), c_frc = t.require("frc"), c_ff = t.require("freeflow_kmh");
        int c_prof = t.require("profile_id");
        net.edges.reserve(t.rows.size());
        for (size_t r = 0; r < t.rows.size(); ++r) {
            Edge e;
            e.id = t.integer(r, c_id);
            e.from_node = t.integer(r, c_from);
            e.to_node = t.integer(r, c_to);
            e.length_m = t.number(r, c_len);
            e.frc = static_cast<int>(t.integer(r, c_frc));
            e.freeflow_kmh = t.number(r, c_ff);
            if (!t.cell(r, c_prof).empty()) e.profile_id = static_cast<int>(t.integer(r, c_prof));
            net.edges.push_back(e);
        }
    }

    net.finalize();
    return net;
}

void write_network(const RoadNetwork& net, const std::string& node_file,
                   const std::string& edge_file, const std::string& profile_file) {
    {
        std::ofstream out(node_file);
        if (!out) throw ValidationError(node_file + ": cannot write");
        out << "node_id,x_m,y_m\n";
        for (const Node& n : net.nodes)
            out << n.id << ',' << format_shortest(n.pos.x()) << ',' << format_shortest(n.pos.y())
                << '\n';
    }
    {
        std::ofstream out(edge_file);
        if (!out) throw ValidationError(edge_file + ": cannot write");
        out << "edge_id,from_node,to_node,length_m,frc,freeflow_kmh,profile_id\n";
        for (const Edge& e : net.edges) {
            out << e.id << ',' << e.from_node << ',' << e.to_node << ','
                << format_shortest(e.length_m) << ',' << e.frc << ','
                << format_shortest(e.freeflow_kmh) << ',';
            if (e.profile_id) out << *e.profile_id;
            out << '\n';
        }
    }
    {
        std::ofstream out(profile_file);
        if (!out) throw ValidationError(profile_file + ": cannot write");
        out << "profile_id,weekday";
        for (int b = 0; b < kBinsPerDay; ++b) out << ',' << strprintf("b%03d", b);
        out << '\n';
        for (const SpeedProfile& p : net.profiles) {
            out << p.id << ',' << weekday_name(p.weekday);
            for (int b = 0; b < kBinsPerDay; ++b)
                out << ',' << format_shortest(p.bins[static_cast<size_t>(b)]);
            out << '\n';
        }
    }
}

}  // namespace dynamap
