#pragma once

#include <cstdint>
#include <utility>

#include "dime/netcore/network.hpp"

namespace dime {

// How generated edges get propagation / existence probabilities.
struct UncertaintyParams {
    double uncertain_frac = 0.0;                 // share of edges marked uncertain (rounded)
    std::pair<double, double> p_range{0.1, 0.1};  // uniform p(e)
    std::pair<double, double> u_range{0.5, 0.5};  // uniform u(e)
};

// Each ordered pair (i, j), i != j, is an edge with probability edge_p.
UncertainNetwork generate_er(int n, double edge_p, const UncertaintyParams& unc, std::uint64_t seed);

// Watts-Strogatz small world; each undirected tie becomes two directed edges.
UncertainNetwork generate_ws(int n, int k_ring, double rewire_p, const UncertaintyParams& unc, std::uint64_t seed);

// Stochastic block model with `blocks` contiguous, equal-size blocks
// (sizes differ by at most one). With blocks == 1 the result has the same
// edges as generate_er(n, p_in, ...) for the same seed.
UncertainNetwork generate_community(int n, int blocks, double p_in, double p_out, const UncertaintyParams& unc,
                                    std::uint64_t seed);

// Block of node v under generate_community's layout.
int community_block(int n, int blocks, NodeId v);

}  // namespace dime
