#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "plastree/neuron.hpp"

namespace plastree {

// Weight and centroid bookkeeping for one element kind. The weighted position
// sum is stored instead of the centroid so that aggregation stays a pure
// fixed-order summation; the centroid is derived on demand.
struct KindSummary {
    std::uint64_t weight = 0;
    Vec3 weighted_position;

    bool operator==(const KindSummary& o) const {
        return weight == o.weight && weighted_position == o.weighted_position;
    }

    bool has_centroid() const { return weight > 0; }
    Vec3 centroid() const {
        check(weight > 0, "KindSummary: centroid undefined for zero weight");
        const double w = static_cast<double>(weight);
        return { weighted_position.x / w, weighted_position.y / w, weighted_position.z / w };
    }
};

struct ExpansionCounter {
    std::uint64_t nodes_inspected = 0;
    std::uint64_t stack_pushes = 0;

    std::uint64_t total() const { return nodes_inspected + stack_pushes; }
};

// Spatial octree over a fixed population. Children partition each box by
// halving every axis; child slots follow Morton order (x, y, z bits). Empty
// octants store no node. Subdivision stops at one neuron per box, so leaves
// are in bijection with neurons.
class Octree {
public:
    using NodeIndex = std::int32_t;
    static constexpr NodeIndex kNone = -1;

    struct Node {
        Box3 box;
        std::array<NodeIndex, 8> children = { kNone, kNone, kNone, kNone,
                                              kNone, kNone, kNone, kNone };
        NodeIndex parent = kNone;
        std::uint16_t depth = 0;
        NeuronId neuron = kInvalidNeuron; // set iff leaf
        Vec3 position;                    // leaf: the neuron's position
        std::uint32_t neuron_count = 0;   // neurons in this subtree
        std::array<KindSummary, 2> kinds;

        bool is_leaf() const { return neuron != kInvalidNeuron; }
    };

    // Rejects duplicate positions (subdivision would not terminate) and
    // positions outside bounds.
    static Octree build(std::span<const Neuron> neurons, const Box3& bounds);

    // Refreshes leaf weights from the current vacant counts and recomputes
    // every inner summary bottom-up. Positions and structure are fixed.
    void update_leaves_and_subtree(std::span<const Neuron> neurons);

    // Appends the children of an inner node that carry positive weight for
    // `kind` (zero-weight subtrees exert no attraction and are skipped).
    // Every expansion considers the node's 8 child slots, so the counter
    // advances by 8 regardless of occupancy; this is what makes a
    // subsequent descent cost exactly 8 inspections when the acceptance
    // criterion propagates to all children.
    void expand(NodeIndex index, ElementKind kind, ExpansionCounter& counter,
                std::vector<NodeIndex>& out) const;

    NodeIndex root() const { return root_; }
    const Node& node(NodeIndex index) const { return nodes_[static_cast<std::size_t>(index)]; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const { return leaf_of_.size(); }
    int height() const { return height_; }
    const Box3& bounds() const { return bounds_; }
    bool empty() const { return root_ == kNone; }

    NodeIndex leaf_of(NeuronId id) const;

    std::uint64_t kind_weight(NodeIndex index, ElementKind kind) const {
        return node(index).kinds[kind_index(kind)].weight;
    }
    // Leaf centroids are the stored neuron position, exact; inner centroids
    // are the weighted average of contained positions.
    Vec3 centroid(NodeIndex index, ElementKind kind) const {
        const Node& n = node(index);
        return n.is_leaf() ? n.position : n.kinds[kind_index(kind)].centroid();
    }

private:
    NodeIndex build_recursive(std::span<const Neuron> neurons, std::vector<std::uint32_t>& items,
                              const Box3& box, int depth, NodeIndex parent);
    void refresh_leaf(Node& leaf, const Neuron& neuron);
    void recompute_inner(Node& inner);

    std::vector<Node> nodes_;
    NodeIndex root_ = kNone;
    std::unordered_map<NeuronId, NodeIndex> leaf_of_;
    Box3 bounds_;
    int height_ = 0;
};

} // namespace plastree
