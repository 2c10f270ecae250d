#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dime/core/random.hpp"

namespace dime {

using NodeId = std::int32_t;
using EdgeId = std::int64_t;

struct Edge {
    EdgeId id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    double p = 0.0;               // propagation probability
    std::optional<double> u;      // existence probability, uncertain edges only

    bool uncertain() const { return u.has_value(); }
    bool operator==(const Edge&) const = default;
};

struct NetworkMeta {
    std::string name;
    std::string generator;                 // provenance, e.g. "community n=30 blocks=3 seed=4"
    std::vector<std::string> node_labels;  // empty, or one per node

    bool operator==(const NetworkMeta&) const = default;
};

// Directed graph with disjoint certain / uncertain edge sets. The order of
// uncertain_edges() defines F-bit indexing everywhere. Immutable.
//
// Kernel edge order: certain edges first (in order), then uncertain edges.
// "Global index" below refers to a position in that order.
class UncertainNetwork {
public:
    UncertainNetwork() = default;
    // Validates; throws ValidationError on out-of-range probabilities,
    // dangling ids, self-loops, duplicate (src,dst) pairs or duplicate ids.
    UncertainNetwork(int n_nodes, std::vector<Edge> certain, std::vector<Edge> uncertain,
                     NetworkMeta meta = {});

    int size() const { return n_; }
    std::span<const Edge> certain_edges() const { return certain_; }
    std::span<const Edge> uncertain_edges() const { return uncertain_; }
    std::size_t edge_count() const { return certain_.size() + uncertain_.size(); }
    std::size_t uncertain_count() const { return uncertain_.size(); }
    const NetworkMeta& meta() const { return meta_; }

    // Edge at a global kernel index.
    const Edge& edge(std::size_t global) const;
    std::size_t global_index_of_uncertain(std::size_t u_index) const { return certain_.size() + u_index; }

    std::span<const std::int32_t> edge_src() const { return src_; }
    std::span<const std::int32_t> edge_dst() const { return dst_; }
    // Activation limits for every edge, uncertain edges treated as present.
    std::span<const std::int32_t> present_limits() const { return limits_; }

    // Uncertain-edge indices with the given source, ascending.
    std::span<const std::size_t> uncertain_out(NodeId v) const { return uncertain_out_[static_cast<std::size_t>(v)]; }
    // Global indices of all out-edges of v.
    std::span<const std::size_t> out_edges(NodeId v) const { return out_[static_cast<std::size_t>(v)]; }

    std::optional<std::size_t> uncertain_index_of(EdgeId id) const;
    std::optional<std::size_t> global_index_of(EdgeId id) const;

    std::string label(NodeId v) const;

    bool operator==(const UncertainNetwork& o) const {
        return n_ == o.n_ && certain_ == o.certain_ && uncertain_ == o.uncertain_ && meta_ == o.meta_;
    }

private:
    void build_index();

    int n_ = 0;
    std::vector<Edge> certain_;
    std::vector<Edge> uncertain_;
    NetworkMeta meta_;

    std::vector<std::int32_t> src_, dst_, limits_;
    std::vector<std::vector<std::size_t>> uncertain_out_;
    std::vector<std::vector<std::size_t>> out_;
    std::unordered_map<EdgeId, std::size_t> by_id_;  // id -> global index
};

// Known state of each uncertain edge: -1 unknown, 0 absent, 1 present.
using EdgeKnowledge = std::vector<std::int8_t>;

// An uncertain network with every uncertain edge resolved. Holds a reference;
// the base network must outlive it.
class InstantiatedNetwork {
public:
    InstantiatedNetwork(const UncertainNetwork& base, std::vector<std::uint8_t> kept);

    const UncertainNetwork& base() const { return *base_; }
    std::span<const std::uint8_t> kept() const { return kept_; }
    bool has_edge(std::size_t global) const;
    // Per-edge activation limits with removed uncertain edges disabled.
    std::vector<std::int32_t> limits() const;

private:
    const UncertainNetwork* base_;
    std::vector<std::uint8_t> kept_;
};

// Keeps each uncertain edge independently with probability u(e).
InstantiatedNetwork sample_instance(const UncertainNetwork& net, Rng& rng);
// As above, but bits fixed in `known` (>= 0) are copied instead of drawn.
InstantiatedNetwork sample_instance(const UncertainNetwork& net, const EdgeKnowledge& known, Rng& rng);

double log_instance_probability(const UncertainNetwork& net, std::span<const std::uint8_t> kept);
double instance_probability(const UncertainNetwork& net, std::span<const std::uint8_t> kept);

// Out-degree where an uncertain edge contributes u(e).
std::vector<double> dc_scores(const UncertainNetwork& net);

// Network with observed uncertain edges resolved: present ones become certain,
// absent ones are dropped. Edge ids are preserved.
UncertainNetwork apply_knowledge(const UncertainNetwork& net, const EdgeKnowledge& known);

// Subnetwork induced on `nodes` (local ids follow the order of `nodes`).
// Cross edges are dropped; edge ids are preserved.
UncertainNetwork induced_subnetwork(const UncertainNetwork& net, std::span<const NodeId> nodes);

}  // namespace dime
