#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dime/core/random.hpp"
#include "dime/netcore/network.hpp"

namespace dime {

// Influence vector W: one 0/1 word per node (word-sized so the vector kernels
// can gather it directly). Bits only ever go 0 -> 1 under simulation.
class NodeMask {
public:
    NodeMask() = default;
    explicit NodeMask(int n) : bits_(static_cast<std::size_t>(n), 0) {}

    int size() const { return static_cast<int>(bits_.size()); }
    bool test(NodeId v) const { return bits_[static_cast<std::size_t>(v)] != 0; }
    void set(NodeId v) { bits_[static_cast<std::size_t>(v)] = 1; }
    int count() const;

    std::uint32_t* data() { return bits_.data(); }
    const std::uint32_t* data() const { return bits_.data(); }
    std::vector<NodeId> nodes() const;

    bool operator==(const NodeMask&) const = default;

private:
    std::vector<std::uint32_t> bits_;
};

NodeMask mask_of(int n, std::span<const NodeId> nodes);

struct SpreadEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int n_sims = 0;
};

// Key of cascade round r within a stream.
constexpr std::uint64_t round_key(std::uint64_t stream, int round) noexcept {
    return derive_seed(stream, 0x5eed0000ULL + static_cast<std::uint64_t>(round));
}

// Edge arrays of one instance, ready for the active kernel table. Keeps
// pointers into the base network, which must outlive it.
class CascadeModel {
public:
    explicit CascadeModel(const InstantiatedNetwork& inst);
    CascadeModel(const UncertainNetwork& net, std::span<const std::uint8_t> kept);

    int nodes() const { return n_; }

    // One synchronous round in place. Returns false when no frontier edge
    // remains (nothing can change in any later round either).
    bool step(NodeMask& w, std::uint64_t key) const;
    // `steps` rounds with keys round_key(stream, 0..steps-1).
    void run(NodeMask& w, int steps, std::uint64_t stream) const;

private:
    int n_ = 0;
    std::span<const std::int32_t> src_, dst_;
    std::vector<std::int32_t> limits_;
};

// Repeated-activation independent cascade, one round: every un-influenced
// node v becomes influenced with probability 1 - prod(1 - p(u,v)) over
// influenced in-neighbours u present in the instance.
NodeMask diffuse_round(const InstantiatedNetwork& inst, const NodeMask& w, std::uint64_t key);
NodeMask diffuse_round(const InstantiatedNetwork& inst, const NodeMask& w, Rng& rng);

// `steps` rounds; steps == 0 returns w0.
NodeMask simulate_cascade(const InstantiatedNetwork& inst, const NodeMask& w0, int steps, std::uint64_t stream);
NodeMask simulate_cascade(const InstantiatedNetwork& inst, const NodeMask& w0, int steps, Rng& rng);

// Monte Carlo spread: each simulation samples an instance, then cascades
// from the seeds for `steps` rounds. Simulation i uses the sub-seed
// derive_seed(root, i) with root drawn once from rng.
SpreadEstimate estimate_spread(const UncertainNetwork& net, std::span<const NodeId> seeds, int steps, int n_sims,
                               Rng& rng);

// Running mean / variance (Welford).
class RunningStats {
public:
    void add(double x);
    int count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
    double std_error() const;

private:
    int n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace dime
