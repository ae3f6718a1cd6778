#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "plastree/plasticity.hpp"

namespace plastree {

// Simulated parallel version: p ranks in one process, bulk-synchronous per
// update step. Ranks own Morton-contiguous blocks of "branch" boxes at level
// ceil(log8 p); every rank sees the identical octree the monolithic build
// would produce, assembled from the exchanged branch roots plus on-demand
// downloads of remote children.

// Wire representation of one octree node.
struct NodeSummary {
    Box3 box;
    bool leaf = false;
    NeuronId neuron = kInvalidNeuron;
    Vec3 position; // leaf payload
    std::array<KindSummary, 2> kinds;
    std::uint32_t neuron_count = 0;
    std::uint32_t branch = 0;     // branch box (Morton index at branch level)
    std::int32_t node_index = -1; // node index within the owner's branch subtree
};

inline std::uint64_t node_handle(std::uint32_t branch, std::int32_t node_index) {
    return (static_cast<std::uint64_t>(branch) << 32)
        | static_cast<std::uint32_t>(node_index);
}

struct BranchRootMessage {
    std::uint32_t rank = 0;
    std::uint32_t branch = 0;
    NodeSummary summary; // equals the sender's branch subtree root exactly
};

// Common upper portion of the octree, identical on every rank. Its deepest
// entries are the exchanged branch roots; boxes whose whole subtree holds a
// single neuron collapse to leaves, exactly as the monolithic build does.
struct UpperTree {
    struct Node {
        Box3 box;
        int depth = 0;
        std::array<std::int32_t, 8> children = { -1, -1, -1, -1, -1, -1, -1, -1 };
        bool leaf = false;
        NeuronId neuron = kInvalidNeuron;
        Vec3 position;
        std::array<KindSummary, 2> kinds;
        std::uint64_t neuron_count = 0;
        bool branch_root = false;
        std::uint32_t branch = 0;
        std::int32_t owner_node = -1;

        bool operator==(const Node& o) const = default;
    };

    std::vector<Node> nodes;
    std::int32_t root = -1;
    int branch_level = 0;

    bool operator==(const UpperTree& o) const = default;
    const Node& node(std::int32_t index) const {
        return nodes[static_cast<std::size_t>(index)];
    }
};

struct RankState {
    struct BranchRange {
        std::uint32_t morton = 0;
        std::uint32_t begin = 0; // [begin, end) into local_neurons
        std::uint32_t end = 0;
        Octree tree; // empty() when the branch box holds no neuron
    };

    std::uint32_t rank_id = 0;
    Box3 subdomain;
    std::vector<Neuron> local_neurons; // sorted by (branch, id)
    std::vector<BranchRange> branches; // all owned branch boxes, sorted by morton
    UpperTree upper;                   // assembled each step

    // Downloaded remote nodes, discarded at the end of every update step.
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> remote_cache;
    std::vector<NodeSummary> remote_pool;

    std::unordered_map<NeuronId, std::uint32_t> local_index; // id -> local_neurons slot

    std::uint64_t messages_sent = 0;
    std::uint64_t nodes_downloaded = 0;
    std::uint64_t local_work = 0;
};

struct Cluster {
    Box3 bounds;
    std::uint32_t rank_count = 0;
    int branch_level = 0;
    std::uint32_t branches_per_rank = 1;
    std::vector<RankState> ranks;
    std::vector<std::uint32_t> branch_owner; // size 8^branch_level
    std::unordered_map<NeuronId, std::uint32_t> neuron_owner;

    // Root-exchange cost under both counting abstractions (per step).
    std::uint64_t exchange_messages_pairwise = 0; // p * (p - 1)
    std::uint64_t exchange_messages_broadcast = 0; // p
};

// The box covered by the aligned Morton range [prefix * 2^(3L - prefix_bits), ...):
// each leading bit halves one axis, in z, y, x order per level.
Box3 morton_prefix_box(const Box3& bounds, std::uint64_t prefix, int prefix_bits);

// Recursive axis-halving partition. rank_count must be a power of two;
// every neuron is assigned to the rank whose subdomain contains it, and the
// per-branch subtrees are built immediately.
Cluster partition(std::span<const Neuron> neurons, const Box3& bounds,
                  std::uint32_t rank_count);

// All-to-all of the branch roots, then every rank independently assembles the
// identical common upper tree. Counts p*(p-1) pairwise messages and p
// broadcast messages.
void exchange_and_build_upper(Cluster& cluster);

// Downloads the children of a remote node into the requester's cache. A
// repeated fetch of the same handle within a step is served from the cache
// with no new message. The returned span is valid until the next fetch.
std::span<const NodeSummary> fetch_children(RankState& requester, const RankState& owner,
                                            std::uint64_t handle);

void end_of_step_discard(std::span<RankState> ranks);
inline void end_of_step_discard(Cluster& cluster) {
    end_of_step_discard(std::span<RankState>(cluster.ranks));
}

// Search-facing adapter over (upper tree + own subtrees + fetched nodes) for
// one rank. Presents exactly the monolithic octree, so the shared search code
// consumes identical draws and yields identical proposals for every p.
class DistributedView {
public:
    struct NodeRef {
        enum class Tag : std::uint8_t { Upper, Local, Remote };
        Tag tag = Tag::Upper;
        std::uint32_t index = 0;
        std::uint32_t branch = 0; // Local only
    };

    DistributedView(Cluster& cluster, std::uint32_t rank);

    NodeRef root() const;
    bool is_leaf(NodeRef ref) const;
    NeuronId neuron_id(NodeRef ref) const;
    std::uint64_t kind_weight(NodeRef ref, ElementKind kind) const;
    Vec3 centroid(NodeRef ref, ElementKind kind) const;
    double box_max_side(NodeRef ref) const;
    void children(NodeRef ref, ElementKind kind, ExpansionCounter& counter,
                  std::vector<NodeRef>& out);

private:
    const Octree& own_branch_tree(std::uint32_t morton) const;
    void remote_children(std::uint32_t branch, std::int32_t node_index, ElementKind kind,
                         ExpansionCounter& counter, std::vector<NodeRef>& out);
    void local_children(const Octree& tree, Octree::NodeIndex index, std::uint32_t branch,
                        ElementKind kind, ExpansionCounter& counter,
                        std::vector<NodeRef>& out);

    Cluster* cluster_;
    RankState* me_;
    std::vector<Octree::NodeIndex> local_scratch_;
};

struct DistributedUpdateResult {
    std::vector<SynapseProposal> proposals; // sorted by (source, target)
    std::vector<SynapseProposal> formed;    // after owner-side resolution
    std::vector<SynapseProposal> unmatched;
    AggregateStats stats; // merged over ranks
};

// Called after the search phase while the caches are still populated
// (the verifier for fetched summaries hooks in here).
using PreDiscardHook = std::function<void(const Cluster&)>;

// One bulk-synchronous update step: local tree updates, root exchange,
// per-rank searches, proposal routing to target owners, owner-side
// resolution, grant delivery, cache discard.
DistributedUpdateResult distributed_connectivity_update(Cluster& cluster,
                                                        const SearchConfig& config,
                                                        const PreDiscardHook* hook = nullptr);

} // namespace plastree
