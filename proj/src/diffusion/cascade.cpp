#include "dime/diffusion/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "dime/core/error.hpp"
#include "dime/kernels/cascade_kernels.hpp"

namespace dime {

int NodeMask::count() const {
    return static_cast<int>(std::accumulate(bits_.begin(), bits_.end(), std::uint64_t{0}));
}

std::vector<NodeId> NodeMask::nodes() const {
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < bits_.size(); ++v) {
        if (bits_[v]) out.push_back(static_cast<NodeId>(v));
    }
    return out;
}

NodeMask mask_of(int n, std::span<const NodeId> nodes) {
    NodeMask m(n);
    for (NodeId v : nodes) {
        if (v < 0 || v >= n) throw ValidationError("node id out of range");
        m.set(v);
    }
    return m;
}

CascadeModel::CascadeModel(const InstantiatedNetwork& inst)
    : n_(inst.base().size()), src_(inst.base().edge_src()), dst_(inst.base().edge_dst()), limits_(inst.limits()) {}

CascadeModel::CascadeModel(const UncertainNetwork& net, std::span<const std::uint8_t> kept)
    : CascadeModel(InstantiatedNetwork(net, std::vector<std::uint8_t>(kept.begin(), kept.end()))) {}

bool CascadeModel::step(NodeMask& w, std::uint64_t key) const {
    thread_local std::vector<std::uint32_t> next;
    next.assign(w.data(), w.data() + w.size());
    const kernels::EdgeSpan edges{src_.data(), dst_.data(), limits_.data(), limits_.size()};
    const std::size_t frontier = kernels::active().cascade_round(edges, key, w.data(), next.data());
    std::memcpy(w.data(), next.data(), next.size() * sizeof(std::uint32_t));
    return frontier > 0;
}

void CascadeModel::run(NodeMask& w, int steps, std::uint64_t stream) const {
    for (int r = 0; r < steps; ++r) {
        if (!step(w, round_key(stream, r))) break;
    }
}

NodeMask diffuse_round(const InstantiatedNetwork& inst, const NodeMask& w, std::uint64_t key) {
    if (w.size() != inst.base().size()) throw ValidationError("influence vector length does not match network");
    NodeMask out = w;
    CascadeModel(inst).step(out, key);
    return out;
}

NodeMask diffuse_round(const InstantiatedNetwork& inst, const NodeMask& w, Rng& rng) {
    return diffuse_round(inst, w, rng());
}

NodeMask simulate_cascade(const InstantiatedNetwork& inst, const NodeMask& w0, int steps, std::uint64_t stream) {
    if (steps < 0) throw ValidationError("cascade length must be >= 0");
    if (w0.size() != inst.base().size()) throw ValidationError("influence vector length does not match network");
    NodeMask w = w0;
    CascadeModel(inst).run(w, steps, stream);
    return w;
}

NodeMask simulate_cascade(const InstantiatedNetwork& inst, const NodeMask& w0, int steps, Rng& rng) {
    return simulate_cascade(inst, w0, steps, rng());
}

SpreadEstimate estimate_spread(const UncertainNetwork& net, std::span<const NodeId> seeds, int steps, int n_sims,
                               Rng& rng) {
    if (n_sims < 1) throw ValidationError("estimate_spread: n_sims must be >= 1");
    const std::uint64_t root = rng();
    const NodeMask w0 = mask_of(net.size(), seeds);
    RunningStats stats;
    for (int i = 0; i < n_sims; ++i) {
        Rng sim_rng = make_rng(derive_seed(root, static_cast<std::uint64_t>(i)));
        const InstantiatedNetwork inst = sample_instance(net, sim_rng);
        NodeMask w = w0;
        CascadeModel(inst).run(w, steps, sim_rng());
        stats.add(static_cast<double>(w.count()));
    }
    return {stats.mean(), stats.std_error(), n_sims};
}

void RunningStats::add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / n_;
    m2_ += d * (x - mean_);
}

double RunningStats::std_error() const { return n_ > 1 ? std::sqrt(variance() / n_) : 0.0; }

}  // namespace dime
