#include "plastree/octree.hpp"

#include <algorithm>

namespace plastree {

namespace {

constexpr int kMaxDepth = 200;

bool same_position(const Vec3& a, const Vec3& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
}

} // namespace

Octree Octree::build(std::span<const Neuron> neurons, const Box3& bounds) {
    check(bounds.valid(), "Octree::build: invalid bounds");
    check(!neurons.empty(), "Octree::build: empty population");

    Octree tree;
    tree.bounds_ = bounds;
    tree.nodes_.reserve(neurons.size() * 2);
    tree.leaf_of_.reserve(neurons.size());

    std::vector<std::uint32_t> items(neurons.size());
    for (std::uint32_t i = 0; i < neurons.size(); ++i) {
        items[i] = i;
        const Neuron& neuron = neurons[i];
        check(neuron.position.finite(), "Octree::build: non-finite position");
        check(bounds.contains(neuron.position), "Octree::build: position outside bounds");
    }

    // Duplicate ids or bit-identical positions are construction errors.
    {
        std::vector<std::uint32_t> sorted = items;
        std::sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
            const Vec3& pa = neurons[a].position;
            const Vec3& pb = neurons[b].position;
            if (pa.x != pb.x) return pa.x < pb.x;
            if (pa.y != pb.y) return pa.y < pb.y;
            return pa.z < pb.z;
        });
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            check(!same_position(neurons[sorted[i - 1]].position, neurons[sorted[i]].position),
                  "Octree::build: duplicate neuron position");
        }
        std::vector<std::uint32_t> by_id = items;
        std::sort(by_id.begin(), by_id.end(), [&](std::uint32_t a, std::uint32_t b) {
            return neurons[a].id < neurons[b].id;
        });
        for (std::size_t i = 1; i < by_id.size(); ++i) {
            check(neurons[by_id[i - 1]].id != neurons[by_id[i]].id,
                  "Octree::build: duplicate neuron id");
        }
    }

    tree.root_ = tree.build_recursive(neurons, items, bounds, 0, kNone);
    return tree;
}

Octree::NodeIndex Octree::build_recursive(std::span<const Neuron> neurons,
                                          std::vector<std::uint32_t>& items, const Box3& box,
                                          int depth, NodeIndex parent) {
    check(depth < kMaxDepth, "Octree::build: subdivision did not terminate");
    height_ = std::max(height_, depth);

    if (items.size() == 1) {
        const Neuron& neuron = neurons[items.front()];
        Node leaf;
        leaf.box = box;
        leaf.parent = parent;
        leaf.depth = static_cast<std::uint16_t>(depth);
        leaf.neuron = neuron.id;
        leaf.position = neuron.position;
        leaf.neuron_count = 1;
        refresh_leaf(leaf, neuron);
        nodes_.push_back(leaf);
        const auto index = static_cast<NodeIndex>(nodes_.size() - 1);
        leaf_of_.emplace(neuron.id, index);
        return index;
    }

    std::array<std::vector<std::uint32_t>, 8> buckets;
    for (std::uint32_t item : items) {
        buckets[static_cast<std::size_t>(box.octant_index(neurons[item].position))].push_back(item);
    }
    items.clear();
    items.shrink_to_fit();

    std::array<NodeIndex, 8> children = { kNone, kNone, kNone, kNone,
                                          kNone, kNone, kNone, kNone };
    for (int o = 0; o < 8; ++o) {
        if (!buckets[static_cast<std::size_t>(o)].empty()) {
            children[static_cast<std::size_t>(o)] =
                build_recursive(neurons, buckets[static_cast<std::size_t>(o)], box.octant(o),
                                depth + 1, kNone);
        }
    }

    Node inner;
    inner.box = box;
    inner.parent = parent;
    inner.depth = static_cast<std::uint16_t>(depth);
    inner.children = children;
    nodes_.push_back(inner);
    const auto index = static_cast<NodeIndex>(nodes_.size() - 1);
    for (NodeIndex child : children) {
        if (child != kNone) {
            nodes_[static_cast<std::size_t>(child)].parent = index;
        }
    }
    recompute_inner(nodes_[static_cast<std::size_t>(index)]);
    return index;
}

void Octree::refresh_leaf(Node& leaf, const Neuron& neuron) {
    for (std::size_t k = 0; k < 2; ++k) {
        const auto count = neuron.vacant[k];
        leaf.kinds[k].weight = count;
        leaf.kinds[k].weighted_position = leaf.position * static_cast<double>(count);
    }
}

void Octree::recompute_inner(Node& inner) {
    inner.neuron_count = 0;
    for (std::size_t k = 0; k < 2; ++k) {
        inner.kinds[k] = KindSummary{};
    }
    for (NodeIndex child_index : inner.children) {
        if (child_index == kNone) {
            continue;
        }
        const Node& child = nodes_[static_cast<std::size_t>(child_index)];
        inner.neuron_count += child.neuron_count;
        for (std::size_t k = 0; k < 2; ++k) {
            inner.kinds[k].weight += child.kinds[k].weight;
            inner.kinds[k].weighted_position += child.kinds[k].weighted_position;
        }
    }
}

void Octree::update_leaves_and_subtree(std::span<const Neuron> neurons) {
    check(neurons.size() == leaf_of_.size(),
          "Octree::update_leaves_and_subtree: population size changed");
    for (const Neuron& neuron : neurons) {
        const auto it = leaf_of_.find(neuron.id);
        check(it != leaf_of_.end(), "Octree::update_leaves_and_subtree: unknown neuron id");
        Node& leaf = nodes_[static_cast<std::size_t>(it->second)];
        check(same_position(leaf.position, neuron.position),
              "Octree::update_leaves_and_subtree: neuron position changed");
        refresh_leaf(leaf, neuron);
    }
    // Children are always created before their parent, so one ascending pass
    // recomputes bottom-up in exactly the order build used.
    for (Node& node : nodes_) {
        if (!node.is_leaf()) {
            recompute_inner(node);
        }
    }
}

void Octree::expand(NodeIndex index, ElementKind kind, ExpansionCounter& counter,
                    std::vector<NodeIndex>& out) const {
    const Node& parent = node(index);
    check(!parent.is_leaf(), "Octree::expand: cannot expand a leaf");
    for (NodeIndex child : parent.children) {
        if (child != kNone && kind_weight(child, kind) > 0) {
            out.push_back(child);
        }
    }
    counter.nodes_inspected += 8;
}

Octree::NodeIndex Octree::leaf_of(NeuronId id) const {
    const auto it = leaf_of_.find(id);
    check(it != leaf_of_.end(), "Octree::leaf_of: unknown neuron id");
    return it->second;
}

} // namespace plastree
