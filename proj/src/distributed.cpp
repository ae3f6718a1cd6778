#include "plastree/distributed.hpp"

#include <algorithm>
#include <bit>
#include <memory>

namespace plastree {

namespace {

NodeSummary summarize(const Octree& tree, std::uint32_t branch, Octree::NodeIndex index) {
    const Octree::Node& node = tree.node(index);
    NodeSummary summary;
    summary.box = node.box;
    summary.leaf = node.is_leaf();
    summary.neuron = node.neuron;
    summary.position = node.position;
    summary.kinds = node.kinds;
    summary.neuron_count = node.neuron_count;
    summary.branch = branch;
    summary.node_index = index;
    return summary;
}

std::uint32_t branch_morton_of(const Box3& bounds, const Vec3& position, int levels) {
    Box3 box = bounds;
    std::uint32_t morton = 0;
    for (int level = 0; level < levels; ++level) {
        const int octant = box.octant_index(position);
        morton = morton * 8 + static_cast<std::uint32_t>(octant);
        box = box.octant(octant);
    }
    return morton;
}

struct TempUpper {
    UpperTree::Node data;
    std::array<std::unique_ptr<TempUpper>, 8> children;
};

std::unique_ptr<TempUpper> assemble_upper(std::span<const BranchRootMessage> messages,
                                          const Box3& box, int depth, std::uint32_t prefix,
                                          int branch_level) {
    if (depth == branch_level) {
        const auto it = std::lower_bound(messages.begin(), messages.end(), prefix,
                                         [](const BranchRootMessage& m, std::uint32_t key) {
                                             return m.branch < key;
                                         });
        if (it == messages.end() || it->branch != prefix) {
            return nullptr; // empty branch box
        }
        const NodeSummary& summary = it->summary;
        auto node = std::make_unique<TempUpper>();
        node->data.box = summary.box;
        node->data.depth = depth;
        node->data.leaf = summary.leaf;
        node->data.neuron = summary.neuron;
        node->data.position = summary.position;
        node->data.kinds = summary.kinds;
        node->data.neuron_count = summary.neuron_count;
        node->data.branch_root = !summary.leaf;
        node->data.branch = prefix;
        node->data.owner_node = summary.node_index;
        return node;
    }

    auto node = std::make_unique<TempUpper>();
    node->data.box = box;
    node->data.depth = depth;
    std::uint64_t count = 0;
    int only_child = -1;
    for (int o = 0; o < 8; ++o) {
        auto child = assemble_upper(messages, box.octant(o), depth + 1, prefix * 8u + o,
                                    branch_level);
        if (child != nullptr) {
            count += child->data.neuron_count;
            only_child = o;
            node->children[static_cast<std::size_t>(o)] = std::move(child);
        }
    }
    if (count == 0) {
        return nullptr;
    }
    node->data.neuron_count = count;
    if (count == 1) {
        // A box holding a single neuron is a leaf in the monolithic tree; the
        // chain below it is never materialized.
        const TempUpper& child = *node->children[static_cast<std::size_t>(only_child)];
        node->data.leaf = true;
        node->data.neuron = child.data.neuron;
        node->data.position = child.data.position;
        node->data.kinds = child.data.kinds;
        node->children = {};
        return node;
    }
    for (const auto& child : node->children) {
        if (child != nullptr) {
            for (std::size_t k = 0; k < 2; ++k) {
                node->data.kinds[k].weight += child->data.kinds[k].weight;
                node->data.kinds[k].weighted_position += child->data.kinds[k].weighted_position;
            }
        }
    }
    return node;
}

std::int32_t flatten_upper(TempUpper& node, UpperTree& tree) {
    std::array<std::int32_t, 8> children = { -1, -1, -1, -1, -1, -1, -1, -1 };
    for (int o = 0; o < 8; ++o) {
        if (node.children[static_cast<std::size_t>(o)] != nullptr) {
            children[static_cast<std::size_t>(o)] =
                flatten_upper(*node.children[static_cast<std::size_t>(o)], tree);
        }
    }
    node.data.children = children;
    tree.nodes.push_back(node.data);
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
}

UpperTree build_upper_tree(std::span<const BranchRootMessage> messages, const Box3& bounds,
                           int branch_level) {
    UpperTree tree;
    tree.branch_level = branch_level;
    auto temp = assemble_upper(messages, bounds, 0, 0, branch_level);
    check(temp != nullptr, "build_upper_tree: no neurons");
    tree.root = flatten_upper(*temp, tree);
    return tree;
}

} // namespace

Box3 morton_prefix_box(const Box3& bounds, std::uint64_t prefix, int prefix_bits) {
    Box3 box = bounds;
    for (int j = 0; j < prefix_bits; ++j) {
        const bool high = ((prefix >> (prefix_bits - 1 - j)) & 1u) != 0;
        double* min = nullptr;
        double* side = nullptr;
        switch (j % 3) {
        case 0: min = &box.min.z; side = &box.side.z; break;
        case 1: min = &box.min.y; side = &box.side.y; break;
        default: min = &box.min.x; side = &box.side.x; break;
        }
        const double center = *min + *side * 0.5;
        *side *= 0.5;
        if (high) {
            *min = center;
        }
    }
    return box;
}

Cluster partition(std::span<const Neuron> neurons, const Box3& bounds,
                  std::uint32_t rank_count) {
    check(bounds.valid(), "partition: invalid bounds");
    check(rank_count > 0 && std::has_single_bit(rank_count),
          "partition: rank count must be a power of two (1, 2, 4, 8, 16, ...)");
    check(neurons.size() >= rank_count, "partition: need at least one neuron per rank");

    const int log2_p = std::countr_zero(rank_count);
    const int branch_level = (log2_p + 2) / 3;
    const std::uint32_t branch_count = 1u << (3 * branch_level);
    const std::uint32_t branches_per_rank = branch_count / rank_count;

    Cluster cluster;
    cluster.bounds = bounds;
    cluster.rank_count = rank_count;
    cluster.branch_level = branch_level;
    cluster.branches_per_rank = branches_per_rank;
    cluster.branch_owner.resize(branch_count);
    for (std::uint32_t m = 0; m < branch_count; ++m) {
        cluster.branch_owner[m] = m / branches_per_rank;
    }

    std::vector<std::vector<Neuron>> per_rank(rank_count);
    std::vector<std::vector<std::uint32_t>> mortons(rank_count);
    for (const Neuron& neuron : neurons) {
        check(bounds.contains(neuron.position), "partition: position outside bounds");
        const std::uint32_t morton = branch_morton_of(bounds, neuron.position, branch_level);
        const std::uint32_t owner = cluster.branch_owner[morton];
        per_rank[owner].push_back(neuron);
        mortons[owner].push_back(morton);
        const bool inserted = cluster.neuron_owner.emplace(neuron.id, owner).second;
        check(inserted, "partition: duplicate neuron id");
    }

    cluster.ranks.resize(rank_count);
    for (std::uint32_t r = 0; r < rank_count; ++r) {
        RankState& rank = cluster.ranks[r];
        rank.rank_id = r;
        rank.subdomain = morton_prefix_box(bounds, r, log2_p);

        // Sort local neurons by (branch, id) so each branch box owns a
        // contiguous range.
        std::vector<std::uint32_t> order(per_rank[r].size());
        for (std::uint32_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (mortons[r][a] != mortons[r][b]) {
                return mortons[r][a] < mortons[r][b];
            }
            return per_rank[r][a].id < per_rank[r][b].id;
        });
        rank.local_neurons.reserve(order.size());
        std::vector<std::uint32_t> sorted_mortons;
        sorted_mortons.reserve(order.size());
        for (std::uint32_t i : order) {
            rank.local_neurons.push_back(per_rank[r][i]);
            sorted_mortons.push_back(mortons[r][i]);
        }
        for (std::uint32_t i = 0; i < rank.local_neurons.size(); ++i) {
            rank.local_index.emplace(rank.local_neurons[i].id, i);
        }

        const std::uint32_t first_branch = r * branches_per_rank;
        for (std::uint32_t b = 0; b < branches_per_rank; ++b) {
            RankState::BranchRange range;
            range.morton = first_branch + b;
            const auto lo = std::lower_bound(sorted_mortons.begin(), sorted_mortons.end(),
                                             range.morton);
            const auto hi = std::upper_bound(sorted_mortons.begin(), sorted_mortons.end(),
                                             range.morton);
            range.begin = static_cast<std::uint32_t>(lo - sorted_mortons.begin());
            range.end = static_cast<std::uint32_t>(hi - sorted_mortons.begin());
            if (range.end > range.begin) {
                const Box3 branch_box =
                    morton_prefix_box(bounds, range.morton, 3 * branch_level);
                range.tree = Octree::build(
                    std::span<const Neuron>(rank.local_neurons)
                        .subspan(range.begin, range.end - range.begin),
                    branch_box);
            }
            rank.branches.push_back(std::move(range));
        }
    }
    return cluster;
}

void exchange_and_build_upper(Cluster& cluster) {
    std::vector<BranchRootMessage> messages;
    for (RankState& rank : cluster.ranks) {
        for (const RankState::BranchRange& range : rank.branches) {
            if (!range.tree.empty()) {
                messages.push_back({ rank.rank_id, range.morton,
                                     summarize(range.tree, range.morton, range.tree.root()) });
            }
        }
        rank.messages_sent += cluster.rank_count - 1;
    }
    cluster.exchange_messages_pairwise +=
        static_cast<std::uint64_t>(cluster.rank_count) * (cluster.rank_count - 1);
    cluster.exchange_messages_broadcast += cluster.rank_count;

    std::sort(messages.begin(), messages.end(),
              [](const BranchRootMessage& a, const BranchRootMessage& b) {
                  return a.branch < b.branch;
              });
    const std::uint32_t branch_count = 1u << (3 * cluster.branch_level);
    for (std::size_t i = 0; i < messages.size(); ++i) {
        check(messages[i].branch < branch_count,
              "exchange_and_build_upper: branch index outside tiling");
        check(cluster.branch_owner[messages[i].branch] == messages[i].rank,
              "exchange_and_build_upper: inconsistent subdomain tiling");
        check(i == 0 || messages[i - 1].branch != messages[i].branch,
              "exchange_and_build_upper: branch box claimed twice");
    }

    // Every rank assembles independently from its own copy of the messages.
    for (RankState& rank : cluster.ranks) {
        rank.upper = build_upper_tree(messages, cluster.bounds, cluster.branch_level);
    }
    for (const RankState& rank : cluster.ranks) {
        check(rank.upper == cluster.ranks.front().upper,
              "exchange_and_build_upper: assembled upper trees diverged");
    }
}

std::span<const NodeSummary> fetch_children(RankState& requester, const RankState& owner,
                                            std::uint64_t handle) {
    const auto cached = requester.remote_cache.find(handle);
    if (cached != requester.remote_cache.end()) {
        return std::span<const NodeSummary>(requester.remote_pool)
            .subspan(cached->second.first, cached->second.second);
    }

    const auto branch = static_cast<std::uint32_t>(handle >> 32);
    const auto node_index = static_cast<Octree::NodeIndex>(handle & 0xFFFFFFFFu);
    const auto range_it = std::lower_bound(
        owner.branches.begin(), owner.branches.end(), branch,
        [](const RankState::BranchRange& r, std::uint32_t key) { return r.morton < key; });
    check(range_it != owner.branches.end() && range_it->morton == branch
              && !range_it->tree.empty(),
          "fetch_children: stale handle (unknown branch)");
    const Octree& tree = range_it->tree;
    check(node_index >= 0 && static_cast<std::size_t>(node_index) < tree.node_count(),
          "fetch_children: stale handle (no such node)");
    check(!tree.node(node_index).is_leaf(), "fetch_children: handle refers to a leaf");

    const auto first = static_cast<std::uint32_t>(requester.remote_pool.size());
    for (const Octree::NodeIndex child : tree.node(node_index).children) {
        if (child != Octree::kNone) {
            requester.remote_pool.push_back(summarize(tree, branch, child));
        }
    }
    const auto count = static_cast<std::uint32_t>(requester.remote_pool.size()) - first;
    requester.remote_cache.emplace(handle, std::make_pair(first, count));
    requester.messages_sent += 1;
    requester.nodes_downloaded += count;
    return std::span<const NodeSummary>(requester.remote_pool).subspan(first, count);
}

void end_of_step_discard(std::span<RankState> ranks) {
    for (RankState& rank : ranks) {
        rank.remote_cache.clear();
        rank.remote_pool.clear();
    }
}

DistributedView::DistributedView(Cluster& cluster, std::uint32_t rank)
    : cluster_(&cluster), me_(&cluster.ranks.at(rank)) {}

DistributedView::NodeRef DistributedView::root() const {
    return { NodeRef::Tag::Upper, static_cast<std::uint32_t>(me_->upper.root), 0 };
}

const Octree& DistributedView::own_branch_tree(std::uint32_t morton) const {
    const auto it = std::lower_bound(
        me_->branches.begin(), me_->branches.end(), morton,
        [](const RankState::BranchRange& r, std::uint32_t key) { return r.morton < key; });
    check(it != me_->branches.end() && it->morton == morton && !it->tree.empty(),
          "DistributedView: missing local branch subtree");
    return it->tree;
}

bool DistributedView::is_leaf(NodeRef ref) const {
    switch (ref.tag) {
    case NodeRef::Tag::Upper: return me_->upper.node(static_cast<std::int32_t>(ref.index)).leaf;
    case NodeRef::Tag::Local:
        return own_branch_tree(ref.branch).node(static_cast<Octree::NodeIndex>(ref.index)).is_leaf();
    default: return me_->remote_pool[ref.index].leaf;
    }
}

NeuronId DistributedView::neuron_id(NodeRef ref) const {
    switch (ref.tag) {
    case NodeRef::Tag::Upper: return me_->upper.node(static_cast<std::int32_t>(ref.index)).neuron;
    case NodeRef::Tag::Local:
        return own_branch_tree(ref.branch).node(static_cast<Octree::NodeIndex>(ref.index)).neuron;
    default: return me_->remote_pool[ref.index].neuron;
    }
}

std::uint64_t DistributedView::kind_weight(NodeRef ref, ElementKind kind) const {
    switch (ref.tag) {
    case NodeRef::Tag::Upper:
        return me_->upper.node(static_cast<std::int32_t>(ref.index)).kinds[kind_index(kind)].weight;
    case NodeRef::Tag::Local:
        return own_branch_tree(ref.branch).kind_weight(static_cast<Octree::NodeIndex>(ref.index),
                                                       kind);
    default: return me_->remote_pool[ref.index].kinds[kind_index(kind)].weight;
    }
}

Vec3 DistributedView::centroid(NodeRef ref, ElementKind kind) const {
    switch (ref.tag) {
    case NodeRef::Tag::Upper: {
        const UpperTree::Node& node = me_->upper.node(static_cast<std::int32_t>(ref.index));
        return node.leaf ? node.position : node.kinds[kind_index(kind)].centroid();
    }
    case NodeRef::Tag::Local:
        return own_branch_tree(ref.branch).centroid(static_cast<Octree::NodeIndex>(ref.index),
                                                    kind);
    default: {
        const NodeSummary& summary = me_->remote_pool[ref.index];
        return summary.leaf ? summary.position : summary.kinds[kind_index(kind)].centroid();
    }
    }
}

double DistributedView::box_max_side(NodeRef ref) const {
    switch (ref.tag) {
    case NodeRef::Tag::Upper:
        return me_->upper.node(static_cast<std::int32_t>(ref.index)).box.max_side();
    case NodeRef::Tag::Local:
        return own_branch_tree(ref.branch).node(static_cast<Octree::NodeIndex>(ref.index))
            .box.max_side();
    default: return me_->remote_pool[ref.index].box.max_side();
    }
}

void DistributedView::remote_children(std::uint32_t branch, std::int32_t node_index,
                                      ElementKind kind, ExpansionCounter& counter,
                                      std::vector<NodeRef>& out) {
    const std::uint32_t owner = cluster_->branch_owner[branch];
    const auto summaries =
        fetch_children(*me_, cluster_->ranks[owner], node_handle(branch, node_index));
    const auto first = static_cast<std::uint32_t>(summaries.data() - me_->remote_pool.data());
    for (std::uint32_t i = 0; i < summaries.size(); ++i) {
        if (summaries[i].kinds[kind_index(kind)].weight > 0) {
            out.push_back({ NodeRef::Tag::Remote, first + i, 0 });
        }
    }
    counter.nodes_inspected += 8;
}

void DistributedView::local_children(const Octree& tree, Octree::NodeIndex index,
                                     std::uint32_t branch, ElementKind kind,
                                     ExpansionCounter& counter, std::vector<NodeRef>& out) {
    local_scratch_.clear();
    tree.expand(index, kind, counter, local_scratch_);
    for (const Octree::NodeIndex local : local_scratch_) {
        out.push_back({ NodeRef::Tag::Local, static_cast<std::uint32_t>(local), branch });
    }
}

void DistributedView::children(NodeRef ref, ElementKind kind, ExpansionCounter& counter,
                               std::vector<NodeRef>& out) {
    switch (ref.tag) {
    case NodeRef::Tag::Upper: {
        const UpperTree::Node& node = me_->upper.node(static_cast<std::int32_t>(ref.index));
        check(!node.leaf, "DistributedView: cannot expand a leaf");
        if (node.branch_root) {
            if (cluster_->branch_owner[node.branch] == me_->rank_id) {
                const Octree& tree = own_branch_tree(node.branch);
                local_children(tree, tree.root(), node.branch, kind, counter, out);
            } else {
                remote_children(node.branch, node.owner_node, kind, counter, out);
            }
            return;
        }
        for (const std::int32_t child : node.children) {
            if (child >= 0 && me_->upper.node(child).kinds[kind_index(kind)].weight > 0) {
                out.push_back({ NodeRef::Tag::Upper, static_cast<std::uint32_t>(child), 0 });
            }
        }
        counter.nodes_inspected += 8;
        return;
    }
    case NodeRef::Tag::Local:
        local_children(own_branch_tree(ref.branch), static_cast<Octree::NodeIndex>(ref.index),
                       ref.branch, kind, counter, out);
        return;
    default: {
        const NodeSummary& summary = me_->remote_pool[ref.index];
        check(!summary.leaf, "DistributedView: cannot expand a leaf");
        remote_children(summary.branch, summary.node_index, kind, counter, out);
        return;
    }
    }
}

DistributedUpdateResult distributed_connectivity_update(Cluster& cluster,
                                                        const SearchConfig& config,
                                                        const PreDiscardHook* hook) {
    for (RankState& rank : cluster.ranks) {
        check(rank.remote_cache.empty(),
              "distributed_connectivity_update: remote cache not empty at step start");
        for (RankState::BranchRange& range : rank.branches) {
            if (!range.tree.empty()) {
                range.tree.update_leaves_and_subtree(
                    std::span<const Neuron>(rank.local_neurons)
                        .subspan(range.begin, range.end - range.begin));
            }
        }
    }

    exchange_and_build_upper(cluster);

    DistributedUpdateResult result;
    std::vector<std::vector<SynapseProposal>> rank_proposals(cluster.rank_count);
    for (std::uint32_t r = 0; r < cluster.rank_count; ++r) {
        RankState& rank = cluster.ranks[r];
        DistributedView view(cluster, r);
        SearchScratch<DistributedView> scratch;
        AggregateStats stats;
        DescentStats descents;
        for (const Neuron& neuron : rank.local_neurons) {
            const std::uint32_t vacant_axons = neuron.vacant_count(ElementKind::Axon);
            for (std::uint32_t search = 0; search < vacant_axons; ++search) {
                const auto proposal = find_target(view, neuron, config, search, descents, scratch);
                stats.add(descents);
                rank.local_work += descents.total_work();
                if (proposal.has_value()) {
                    rank_proposals[r].push_back(*proposal);
                    ++stats.proposals;
                } else {
                    ++stats.no_partner;
                }
            }
        }
        result.stats.merge(stats);
    }

    // Route proposals to the owner of the target; one message per remote peer.
    std::vector<std::vector<SynapseProposal>> owner_inbox(cluster.rank_count);
    for (std::uint32_t r = 0; r < cluster.rank_count; ++r) {
        std::vector<std::uint64_t> peers_messaged;
        for (const SynapseProposal& proposal : rank_proposals[r]) {
            const auto owner_it = cluster.neuron_owner.find(proposal.target_id);
            check(owner_it != cluster.neuron_owner.end(),
                  "distributed_connectivity_update: proposal targets unknown neuron");
            owner_inbox[owner_it->second].push_back(proposal);
            if (owner_it->second != r) {
                peers_messaged.push_back(owner_it->second);
            }
            result.proposals.push_back(proposal);
        }
        std::sort(peers_messaged.begin(), peers_messaged.end());
        peers_messaged.erase(std::unique(peers_messaged.begin(), peers_messaged.end()),
                             peers_messaged.end());
        cluster.ranks[r].messages_sent += peers_messaged.size();
    }

    // Owner-side resolution, then grant delivery back to the source ranks.
    std::vector<std::vector<SynapseProposal>> grants_for_rank(cluster.rank_count);
    for (std::uint32_t o = 0; o < cluster.rank_count; ++o) {
        RankState& owner = cluster.ranks[o];
        auto& inbox = owner_inbox[o];
        std::sort(inbox.begin(), inbox.end(),
                  [](const SynapseProposal& a, const SynapseProposal& b) {
                      if (a.target_id != b.target_id) return a.target_id < b.target_id;
                      return a.source_id < b.source_id;
                  });
        std::size_t i = 0;
        std::vector<std::uint64_t> peers_messaged;
        while (i < inbox.size()) {
            std::size_t j = i;
            while (j < inbox.size() && inbox[j].target_id == inbox[i].target_id) {
                ++j;
            }
            std::vector<SynapseProposal> group(inbox.begin() + i, inbox.begin() + j);
            const NeuronId target = inbox[i].target_id;
            const auto slot = owner.local_index.find(target);
            check(slot != owner.local_index.end(),
                  "distributed_connectivity_update: routed proposal to wrong owner");
            Neuron& target_neuron = owner.local_neurons[slot->second];

            const std::size_t formed_before = result.formed.size();
            grant_target_group(group, target_neuron.vacant_count(ElementKind::Dendrite),
                               config.rng_seed, config.step, target, result.formed,
                               result.unmatched);
            for (std::size_t g = formed_before; g < result.formed.size(); ++g) {
                target_neuron.vacant[kind_index(ElementKind::Dendrite)] -= 1;
                const std::uint32_t source_rank =
                    cluster.neuron_owner.at(result.formed[g].source_id);
                grants_for_rank[source_rank].push_back(result.formed[g]);
                if (source_rank != o) {
                    peers_messaged.push_back(source_rank);
                }
            }
            i = j;
        }
        std::sort(peers_messaged.begin(), peers_messaged.end());
        peers_messaged.erase(std::unique(peers_messaged.begin(), peers_messaged.end()),
                             peers_messaged.end());
        owner.messages_sent += peers_messaged.size();
    }
    for (std::uint32_t r = 0; r < cluster.rank_count; ++r) {
        RankState& rank = cluster.ranks[r];
        for (const SynapseProposal& grant : grants_for_rank[r]) {
            const auto slot = rank.local_index.find(grant.source_id);
            check(slot != rank.local_index.end(),
                  "distributed_connectivity_update: grant delivered to wrong rank");
            Neuron& source = rank.local_neurons[slot->second];
            check(source.vacant_count(ElementKind::Axon) > 0,
                  "distributed_connectivity_update: source axon oversubscribed");
            source.vacant[kind_index(ElementKind::Axon)] -= 1;
        }
    }

    if (hook != nullptr && *hook) {
        (*hook)(cluster);
    }
    end_of_step_discard(cluster);

    std::sort(result.proposals.begin(), result.proposals.end());
    std::sort(result.formed.begin(), result.formed.end());
    std::sort(result.unmatched.begin(), result.unmatched.end());
    return result;
}

} // namespace plastree
