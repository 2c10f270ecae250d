#include "dime/netcore/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "dime/core/error.hpp"
#include "dime/kernels/cascade_kernels.hpp"

namespace dime {
namespace {

void check_edge(const Edge& e, int n, bool uncertain, std::string_view kind, std::size_t pos) {
    auto where = [&] { return fmt::format("{}[{}] (id {})", kind, pos, e.id); };
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
        throw ValidationError(fmt::format("{}: node id out of range [0, {})", where(), n));
    }
    if (e.src == e.dst) throw ValidationError(fmt::format("{}: self-loop on node {}", where(), e.src));
    if (!(e.p >= 0.0 && e.p <= 1.0)) {
        throw ValidationError(fmt::format("{}: propagation probability {} outside [0, 1]", where(), e.p));
    }
    if (uncertain) {
        if (!e.u) throw ValidationError(fmt::format("{}: uncertain edge without existence probability", where()));
        if (!(*e.u >= 0.0 && *e.u <= 1.0)) {
            throw ValidationError(fmt::format("{}: existence probability {} outside [0, 1]", where(), *e.u));
        }
    } else if (e.u) {
        throw ValidationError(fmt::format("{}: certain edge carries an existence probability", where()));
    }
}

}  // namespace

UncertainNetwork::UncertainNetwork(int n_nodes, std::vector<Edge> certain, std::vector<Edge> uncertain,
                                   NetworkMeta meta)
    : n_(n_nodes), certain_(std::move(certain)), uncertain_(std::move(uncertain)), meta_(std::move(meta)) {
    if (n_ < 1) throw ValidationError(fmt::format("network needs at least one node, got {}", n_));
    if (!meta_.node_labels.empty() && meta_.node_labels.size() != static_cast<std::size_t>(n_)) {
        throw ValidationError(fmt::format("node_labels has {} entries for {} nodes", meta_.node_labels.size(), n_));
    }
    std::set<std::pair<NodeId, NodeId>> pairs;
    auto visit = [&](const std::vector<Edge>& edges, bool unc, std::string_view kind) {
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const Edge& e = edges[i];
            check_edge(e, n_, unc, kind, i);
            if (!pairs.emplace(e.src, e.dst).second) {
                throw ValidationError(fmt::format("{}[{}]: duplicate directed edge ({}, {})", kind, i, e.src, e.dst));
            }
        }
    };
    visit(certain_, false, "certain_edges");
    visit(uncertain_, true, "uncertain_edges");
    build_index();
}

void UncertainNetwork::build_index() {
    const std::size_t m = edge_count();
    src_.resize(m);
    dst_.resize(m);
    limits_.resize(m);
    uncertain_out_.assign(static_cast<std::size_t>(n_), {});
    out_.assign(static_cast<std::size_t>(n_), {});
    by_id_.clear();
    for (std::size_t g = 0; g < m; ++g) {
        const Edge& e = edge(g);
        src_[g] = e.src;
        dst_[g] = e.dst;
        limits_[g] = kernels::activation_limit(e.p);
        out_[static_cast<std::size_t>(e.src)].push_back(g);
        if (g >= certain_.size()) uncertain_out_[static_cast<std::size_t>(e.src)].push_back(g - certain_.size());
        if (!by_id_.emplace(e.id, g).second) throw ValidationError(fmt::format("duplicate edge id {}", e.id));
    }
}

const Edge& UncertainNetwork::edge(std::size_t global) const {
    return global < certain_.size() ? certain_[global] : uncertain_[global - certain_.size()];
}

std::optional<std::size_t> UncertainNetwork::global_index_of(EdgeId id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> UncertainNetwork::uncertain_index_of(EdgeId id) const {
    auto g = global_index_of(id);
    if (!g || *g < certain_.size()) return std::nullopt;
    return *g - certain_.size();
}

std::string UncertainNetwork::label(NodeId v) const {
    if (!meta_.node_labels.empty()) return meta_.node_labels[static_cast<std::size_t>(v)];
    return std::to_string(v);
}

InstantiatedNetwork::InstantiatedNetwork(const UncertainNetwork& base, std::vector<std::uint8_t> kept)
    : base_(&base), kept_(std::move(kept)) {
    if (kept_.size() != base.uncertain_count()) {
        throw ValidationError(fmt::format("instance has {} F bits, network has {} uncertain edges", kept_.size(),
                                          base.uncertain_count()));
    }
}

bool InstantiatedNetwork::has_edge(std::size_t global) const {
    const std::size_t nc = base_->certain_edges().size();
    return global < nc || kept_[global - nc] != 0;
}

std::vector<std::int32_t> InstantiatedNetwork::limits() const {
    auto present = base_->present_limits();
    std::vector<std::int32_t> out(present.begin(), present.end());
    const std::size_t nc = base_->certain_edges().size();
    for (std::size_t i = 0; i < kept_.size(); ++i) {
        if (!kept_[i]) out[nc + i] = kernels::kEdgeDisabled;
    }
    return out;
}

InstantiatedNetwork sample_instance(const UncertainNetwork& net, Rng& rng) {
    std::vector<std::uint8_t> kept(net.uncertain_count());
    auto unc = net.uncertain_edges();
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = bernoulli(rng, *unc[i].u) ? 1 : 0;
    return InstantiatedNetwork(net, std::move(kept));
}

InstantiatedNetwork sample_instance(const UncertainNetwork& net, const EdgeKnowledge& known, Rng& rng) {
    if (known.size() != net.uncertain_count()) throw ValidationError("edge knowledge size mismatch");
    std::vector<std::uint8_t> kept(net.uncertain_count());
    auto unc = net.uncertain_edges();
    for (std::size_t i = 0; i < kept.size(); ++i) {
        kept[i] = known[i] >= 0 ? static_cast<std::uint8_t>(known[i]) : (bernoulli(rng, *unc[i].u) ? 1 : 0);
    }
    return InstantiatedNetwork(net, std::move(kept));
}

double log_instance_probability(const UncertainNetwork& net, std::span<const std::uint8_t> kept) {
    if (kept.size() != net.uncertain_count()) throw ValidationError("F vector length does not match |E_u|");
    double logp = 0.0;
    auto unc = net.uncertain_edges();
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const double u = *unc[i].u;
        logp += std::log(kept[i] ? u : 1.0 - u);
    }
    return logp;
}

double instance_probability(const UncertainNetwork& net, std::span<const std::uint8_t> kept) {
    return std::exp(log_instance_probability(net, kept));
}

std::vector<double> dc_scores(const UncertainNetwork& net) {
    std::vector<double> score(static_cast<std::size_t>(net.size()), 0.0);
    for (const Edge& e : net.certain_edges()) score[static_cast<std::size_t>(e.src)] += 1.0;
    for (const Edge& e : net.uncertain_edges()) score[static_cast<std::size_t>(e.src)] += *e.u;
    return score;
}

UncertainNetwork apply_knowledge(const UncertainNetwork& net, const EdgeKnowledge& known) {
    if (known.size() != net.uncertain_count()) throw ValidationError("edge knowledge size mismatch");
    std::vector<Edge> certain(net.certain_edges().begin(), net.certain_edges().end());
    std::vector<Edge> uncertain;
    auto unc = net.uncertain_edges();
    for (std::size_t i = 0; i < unc.size(); ++i) {
        if (known[i] < 0) {
            uncertain.push_back(unc[i]);
        } else if (known[i] == 1) {
            Edge e = unc[i];
            e.u.reset();
            certain.push_back(e);
        }
    }
    return UncertainNetwork(net.size(), std::move(certain), std::move(uncertain), net.meta());
}

UncertainNetwork induced_subnetwork(const UncertainNetwork& net, std::span<const NodeId> nodes) {
    std::vector<NodeId> local(static_cast<std::size_t>(net.size()), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) local[static_cast<std::size_t>(nodes[i])] = static_cast<NodeId>(i);
    auto keep = [&](const Edge& e) { return local[static_cast<std::size_t>(e.src)] >= 0 && local[static_cast<std::size_t>(e.dst)] >= 0; };
    auto remap = [&](Edge e) {
        e.src = local[static_cast<std::size_t>(e.src)];
        e.dst = local[static_cast<std::size_t>(e.dst)];
        return e;
    };
    std::vector<Edge> certain, uncertain;
    for (const Edge& e : net.certain_edges()) if (keep(e)) certain.push_back(remap(e));
    for (const Edge& e : net.uncertain_edges()) if (keep(e)) uncertain.push_back(remap(e));
    NetworkMeta meta;
    meta.name = net.meta().name + "/part";
    if (!net.meta().node_labels.empty()) {
        for (NodeId v : nodes) meta.node_labels.push_back(net.meta().node_labels[static_cast<std::size_t>(v)]);
    }
    return UncertainNetwork(static_cast<int>(nodes.size()), std::move(certain), std::move(uncertain), std::move(meta));
}

}  // namespace dime
