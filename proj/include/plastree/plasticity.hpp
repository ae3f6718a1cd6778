#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "plastree/octree.hpp"
#include "plastree/rng.hpp"

namespace plastree {

struct SearchConfig {
    Theta theta = Theta(0.25);
    double kernel_sigma = 750.0;
    std::uint64_t rng_seed = 0;
    // Treat theta as zero: virtual nodes are never accepted, every search
    // expands down to the leaves. Used for oracle comparisons.
    bool oracle_mode = false;
    std::uint32_t step = 0;
};

struct DescentStats {
    ExpansionCounter first_descent;
    std::vector<ExpansionCounter> subsequent_descents;
    std::uint32_t chosen_path_length = 0; // = 1 + subsequent_descents.size()

    std::uint64_t total_work() const {
        std::uint64_t work = first_descent.total();
        for (const ExpansionCounter& counter : subsequent_descents) {
            work += counter.total();
        }
        return work;
    }
};

struct SynapseProposal {
    NeuronId source_id = kInvalidNeuron; // axon side
    NeuronId target_id = kInvalidNeuron; // dendrite side

    bool operator==(const SynapseProposal& o) const {
        return source_id == o.source_id && target_id == o.target_id;
    }
    bool operator<(const SynapseProposal& o) const {
        return source_id != o.source_id ? source_id < o.source_id : target_id < o.target_id;
    }
};

// Vacant-element count scaled by a Gaussian of the distance. Stands in for
// the growth model's attraction term; every complexity claim is independent
// of the kernel shape.
inline double attraction_weight(const Vec3& q, const Vec3& candidate_centroid,
                                std::uint64_t candidate_weight, double kernel_sigma) {
    if (candidate_weight == 0) {
        return 0.0;
    }
    const double d2 = (q - candidate_centroid).norm_squared();
    return static_cast<double>(candidate_weight)
        * std::exp(-d2 / (kernel_sigma * kernel_sigma));
}

// Index i with probability weights[i] / sum(weights), driven by one uniform
// draw in [0, 1). Empty when no weight is positive (no-partner signal).
std::optional<std::size_t> choose_index(std::span<const double> weights, double unit_draw);

// Read-only adapter over a monolithic octree. The distributed module provides
// the same interface over (upper tree + local subtrees + fetched nodes), and
// both run the identical search code below.
class MonolithicView {
public:
    using NodeRef = Octree::NodeIndex;

    explicit MonolithicView(const Octree& tree) : tree_(&tree) {}

    NodeRef root() const { return tree_->root(); }
    bool is_leaf(NodeRef n) const { return tree_->node(n).is_leaf(); }
    NeuronId neuron_id(NodeRef n) const { return tree_->node(n).neuron; }
    std::uint64_t kind_weight(NodeRef n, ElementKind kind) const {
        return tree_->kind_weight(n, kind);
    }
    Vec3 centroid(NodeRef n, ElementKind kind) const { return tree_->centroid(n, kind); }
    double box_max_side(NodeRef n) const { return tree_->node(n).box.max_side(); }
    void children(NodeRef n, ElementKind kind, ExpansionCounter& counter,
                  std::vector<NodeRef>& out) {
        tree_->expand(n, kind, counter, out);
    }

private:
    const Octree* tree_;
};

template <typename View>
struct SearchScratch {
    std::vector<typename View::NodeRef> stack;
    std::vector<typename View::NodeRef> children;
    std::vector<typename View::NodeRef> candidates;
    std::vector<double> weights;
};

// Stack-driven candidate gathering from `root` (whose own acceptance status is
// never rechecked). A child enters the candidate list iff it satisfies the AC
// or is an actual neuron; otherwise it is pushed and expanded. The searcher's
// own leaf is excluded by id. Every returned virtual node satisfies the AC and
// every returned leaf has positive weight for `kind`.
template <typename View>
void gather_candidates(View& view, typename View::NodeRef root, const Vec3& q,
                       NeuronId searcher, ElementKind kind, Theta theta, bool oracle_mode,
                       ExpansionCounter& counter,
                       std::vector<typename View::NodeRef>& candidates,
                       SearchScratch<View>& scratch) {
    candidates.clear();
    if (view.is_leaf(root)) {
        if (view.neuron_id(root) != searcher && view.kind_weight(root, kind) > 0) {
            candidates.push_back(root);
        }
        return;
    }

    const double theta_value = theta.value();
    auto& stack = scratch.stack;
    auto& children = scratch.children;
    stack.clear();
    stack.push_back(root);
    while (!stack.empty()) {
        const auto node = stack.back();
        stack.pop_back();
        children.clear();
        view.children(node, kind, counter, children);

        typename View::NodeRef rejected[8];
        std::size_t rejected_count = 0;
        for (const auto& child : children) {
            if (view.is_leaf(child)) {
                if (view.neuron_id(child) != searcher) {
                    candidates.push_back(child);
                }
                continue;
            }
            bool accepted = false;
            if (!oracle_mode) {
                // Zero distance means the centroid coincides with the query;
                // such a node is never acceptable and gets expanded.
                const double d = distance(view.centroid(child, kind), q);
                accepted = d > 0.0 && view.box_max_side(child) / d < theta_value;
            }
            if (accepted) {
                candidates.push_back(child);
            } else {
                rejected[rejected_count++] = child;
            }
        }
        // Reverse push so expansion proceeds in child order.
        for (std::size_t i = rejected_count; i > 0; --i) {
            stack.push_back(rejected[i - 1]);
            ++counter.stack_pushes;
        }
    }
}

// Convenience overload matching the one-shot use in tests.
template <typename View>
std::vector<typename View::NodeRef> gather_candidates(View& view, typename View::NodeRef root,
                                                      const Vec3& q, NeuronId searcher,
                                                      ElementKind kind, Theta theta,
                                                      bool oracle_mode,
                                                      ExpansionCounter& counter) {
    SearchScratch<View> scratch;
    std::vector<typename View::NodeRef> candidates;
    gather_candidates(view, root, q, searcher, kind, theta, oracle_mode, counter, candidates,
                      scratch);
    return candidates;
}

// Repeated Barnes-Hut descents: gather candidates from the current root,
// pick one by attraction weight, re-root at a chosen virtual node, stop when
// a leaf is chosen or no candidate exists. The partner draw is keyed by
// (seed, step, neuron, search index, descent), so the outcome is independent
// of iteration order and of how the tree is distributed.
template <typename View>
std::optional<SynapseProposal> find_target(View& view, const Neuron& searcher,
                                           const SearchConfig& config,
                                           std::uint32_t search_index, DescentStats& stats,
                                           SearchScratch<View>& scratch) {
    check(config.kernel_sigma > 0.0, "find_target: kernel_sigma must be positive");
    check(search_index < 0x10000u, "find_target: search index exceeds the draw-key range");
    stats = DescentStats{};

    const ElementKind target_kind = ElementKind::Dendrite;
    auto current = view.root();

    if (view.is_leaf(current)) {
        stats.chosen_path_length = 1;
        const NeuronId id = view.neuron_id(current);
        if (id != searcher.id && view.kind_weight(current, target_kind) > 0) {
            return SynapseProposal{ searcher.id, id };
        }
        return std::nullopt;
    }

    auto& candidates = scratch.candidates;
    auto& weights = scratch.weights;
    for (std::uint32_t descent = 0;; ++descent) {
        check(descent < 0x10000u, "find_target: descent did not terminate");
        ExpansionCounter counter;
        gather_candidates(view, current, searcher.position, searcher.id, target_kind,
                          config.theta, config.oracle_mode, counter, candidates, scratch);
        if (descent == 0) {
            stats.first_descent = counter;
        } else {
            stats.subsequent_descents.push_back(counter);
        }
        stats.chosen_path_length = descent + 1;

        if (candidates.empty()) {
            return std::nullopt;
        }

        weights.clear();
        double total = 0.0;
        for (const auto& candidate : candidates) {
            const double w = attraction_weight(searcher.position,
                                               view.centroid(candidate, target_kind),
                                               view.kind_weight(candidate, target_kind),
                                               config.kernel_sigma);
            weights.push_back(w);
            total += w;
        }
        if (!(total > 0.0)) {
            return std::nullopt; // all attractions vanished: no partner this step
        }

        const double draw = keyed_uniform(config.rng_seed, RngDomain::Choose, config.step,
                                          searcher.id, (search_index << 16) | descent);
        const auto picked = choose_index(weights, draw);
        const auto chosen = candidates[*picked];
        if (view.is_leaf(chosen)) {
            return SynapseProposal{ searcher.id, view.neuron_id(chosen) };
        }
        current = chosen;
    }
}

template <typename View>
std::optional<SynapseProposal> find_target(View& view, const Neuron& searcher,
                                           const SearchConfig& config, DescentStats& stats) {
    SearchScratch<View> scratch;
    return find_target(view, searcher, config, 0, stats, scratch);
}

// Exact per-target selection probabilities of the search process above,
// computed by recursion over the choice tree instead of sampling.
struct TargetDistribution {
    std::vector<std::pair<NeuronId, double>> probabilities; // sorted by id
    double no_partner_mass = 0.0;

    double probability_of(NeuronId id) const;
};

template <typename View>
void accumulate_target_distribution(View& view, typename View::NodeRef root,
                                    const Neuron& searcher, const SearchConfig& config,
                                    double mass, std::map<NeuronId, double>& out,
                                    double& no_partner) {
    const ElementKind target_kind = ElementKind::Dendrite;
    SearchScratch<View> scratch;
    std::vector<typename View::NodeRef> candidates;
    ExpansionCounter counter;
    gather_candidates(view, root, searcher.position, searcher.id, target_kind, config.theta,
                      config.oracle_mode, counter, candidates, scratch);

    double total = 0.0;
    std::vector<double> weights;
    weights.reserve(candidates.size());
    for (const auto& candidate : candidates) {
        const double w = attraction_weight(searcher.position,
                                           view.centroid(candidate, target_kind),
                                           view.kind_weight(candidate, target_kind),
                                           config.kernel_sigma);
        weights.push_back(w);
        total += w;
    }
    if (candidates.empty() || !(total > 0.0)) {
        no_partner += mass;
        return;
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double share = mass * (weights[i] / total);
        if (share == 0.0) {
            continue;
        }
        if (view.is_leaf(candidates[i])) {
            out[view.neuron_id(candidates[i])] += share;
        } else {
            accumulate_target_distribution(view, candidates[i], searcher, config, share, out,
                                           no_partner);
        }
    }
}

template <typename View>
TargetDistribution bh_target_distribution(View& view, const Neuron& searcher,
                                          const SearchConfig& config) {
    std::map<NeuronId, double> accumulated;
    TargetDistribution result;
    if (view.is_leaf(view.root())) {
        const NeuronId id = view.neuron_id(view.root());
        if (id != searcher.id && view.kind_weight(view.root(), ElementKind::Dendrite) > 0) {
            accumulated[id] = 1.0;
        } else {
            result.no_partner_mass = 1.0;
        }
    } else {
        accumulate_target_distribution(view, view.root(), searcher, config, 1.0, accumulated,
                                       result.no_partner_mass);
    }
    result.probabilities.assign(accumulated.begin(), accumulated.end());
    return result;
}

struct AggregateStats {
    std::uint64_t searches = 0;
    std::uint64_t proposals = 0;
    std::uint64_t no_partner = 0;
    std::uint64_t first_count = 0;
    std::uint64_t first_inspected = 0;
    std::uint64_t first_pushes = 0;
    std::uint64_t subsequent_count = 0;
    std::uint64_t subsequent_inspected = 0;
    std::uint64_t subsequent_pushes = 0;
    std::uint64_t subsequent_inspected_max = 0;
    std::uint64_t subsequent_pushes_max = 0;
    std::uint64_t path_length_max = 0;
    std::uint64_t total_work = 0;

    void add(const DescentStats& stats);
    void merge(const AggregateStats& other);
    double mean_first_inspected() const;
    double mean_subsequent_inspected() const;
};

using DescentSink =
    std::function<void(NeuronId neuron, std::uint32_t search_index, const DescentStats&)>;

struct UpdateResult {
    std::vector<SynapseProposal> proposals;
    AggregateStats stats;
};

// One full search phase: refresh the tree, then run one target search per
// vacant axonal element of every neuron. Proposals keep population order.
UpdateResult connectivity_update(std::span<const Neuron> population, Octree& tree,
                                 const SearchConfig& config,
                                 const DescentSink* sink = nullptr);

struct ResolveResult {
    std::vector<SynapseProposal> formed;
    std::vector<SynapseProposal> unmatched;
};

// Proposals per dendrite target are granted in keyed-uniform random order
// until the target's vacant dendrites are exhausted; grants decrement both
// sides' vacant counts. The rest are returned unmatched.
ResolveResult resolve_proposals(std::span<const SynapseProposal> proposals,
                                std::span<Neuron> population, std::uint64_t seed,
                                std::uint32_t step);

// Shared granting core: shuffles `group` (proposals for one target, pre-sorted
// by source) with the resolve stream for (seed, step, target) and grants the
// first `capacity` entries.
void grant_target_group(std::vector<SynapseProposal>& group, std::uint32_t capacity,
                        std::uint64_t seed, std::uint32_t step, NeuronId target,
                        std::vector<SynapseProposal>& formed,
                        std::vector<SynapseProposal>& unmatched);

} // namespace plastree
