#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dime/netcore/network.hpp"

namespace dime {

inline constexpr int kNetworkFormatVersion = 1;

// JSON document:
//   { "version": 1, "n_nodes": N, "name": "...", "generator": "...",
//     "node_labels": ["A", ...],
//     "certain_edges":   [ {"id": 2, "src": 0, "dst": 1, "p": 0.5}, ... ],
//     "uncertain_edges": [ {"id": 1, "src": 1, "dst": 2, "p": 0.5, "u": 0.75}, ... ] }
// "id" is optional (defaults to the running position over certain then
// uncertain entries). An entry with "undirected": true expands into the two
// directed edges src->dst, dst->src and may not carry an id.
UncertainNetwork parse_network(std::string_view text);
std::string serialize_network(const UncertainNetwork& net);

UncertainNetwork load_network(const std::filesystem::path& path);
void save_network(const UncertainNetwork& net, const std::filesystem::path& path);

}  // namespace dime
