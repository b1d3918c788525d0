#pragma once

#include <string>

#include "dynamap/network.hpp"

namespace dynamap {

// Loads and validates one weekday of a network from the three CSV files.
// profiles.csv may hold several weekdays; only rows matching `weekday`
// are kept. Throws ValidationError naming file and line on bad input.
RoadNetwork load_network(const std::string& node_file, const std::string& edge_file,
                         const std::string& profile_file, Weekday weekday);

// Writes the three CSV files. Numbers are written with shortest
// round-trip formatting, so load_network(write(net)) reproduces the
// network exactly.
void write_network(const RoadNetwork& net, const std::string& node_file,
                   const std::string& edge_file, const std::string& profile_file);

}  // namespace dynamap
