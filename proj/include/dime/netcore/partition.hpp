#pragma once

#include <cstdint>
#include <vector>

#include "dime/netcore/network.hpp"

namespace dime {

struct Partitioning {
    int k = 0;
    std::vector<int> part;  // node -> part index in [0, k)

    std::vector<std::vector<NodeId>> members() const;
    std::vector<int> sizes() const;
};

// Largest part size allowed for N nodes in k parts at the given tolerance.
int max_part_size(int n, int k, double imbalance_tolerance);

// Undirected cut objective: a certain edge weighs p(e), an uncertain edge
// u(e) * p(e); both directions of a tie count.
double edge_weight(const Edge& e);
double cut_weight(const UncertainNetwork& net, const Partitioning& parts);
double total_edge_weight(const UncertainNetwork& net);

// Balanced k-way partitioning minimising cut_weight: heavy-edge matching
// coarsening, greedy graph growing on the coarsest graph, and
// Kernighan-Lin/Fiduccia-Mattheyses boundary refinement while uncoarsening.
// Deterministic for a fixed seed. Throws ValidationError if k < 1 or k > N.
Partitioning partition(const UncertainNetwork& net, int k, double imbalance_tolerance = 0.05,
                       std::uint64_t seed = 0);

}  // namespace dime
