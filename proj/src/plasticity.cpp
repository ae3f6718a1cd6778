#include "plastree/plasticity.hpp"

#include <algorithm>

namespace plastree {

std::optional<std::size_t> choose_index(std::span<const double> weights, double unit_draw) {
    double total = 0.0;
    for (const double w : weights) {
        check(w >= 0.0 && std::isfinite(w), "choose_index: weights must be finite and nonnegative");
        total += w;
    }
    if (!(total > 0.0)) {
        return std::nullopt;
    }
    check(unit_draw >= 0.0 && unit_draw < 1.0, "choose_index: draw must lie in [0, 1)");

    const double target = unit_draw * total;
    double cumulative = 0.0;
    std::optional<std::size_t> last_positive;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        cumulative += weights[i];
        last_positive = i;
        if (cumulative > target) {
            return i;
        }
    }
    // Rounding can leave the accumulated sum a hair below the target.
    return last_positive;
}

double TargetDistribution::probability_of(NeuronId id) const {
    const auto it = std::lower_bound(probabilities.begin(), probabilities.end(), id,
                                     [](const auto& entry, NeuronId key) {
                                         return entry.first < key;
                                     });
    return (it != probabilities.end() && it->first == id) ? it->second : 0.0;
}

void AggregateStats::add(const DescentStats& stats) {
    check(stats.chosen_path_length == 1 + stats.subsequent_descents.size(),
          "DescentStats: path length does not match descent count");
    ++searches;
    ++first_count;
    first_inspected += stats.first_descent.nodes_inspected;
    first_pushes += stats.first_descent.stack_pushes;
    for (const ExpansionCounter& counter : stats.subsequent_descents) {
        ++subsequent_count;
        subsequent_inspected += counter.nodes_inspected;
        subsequent_pushes += counter.stack_pushes;
        subsequent_inspected_max = std::max(subsequent_inspected_max, counter.nodes_inspected);
        subsequent_pushes_max = std::max(subsequent_pushes_max, counter.stack_pushes);
    }
    path_length_max = std::max<std::uint64_t>(path_length_max, stats.chosen_path_length);
    total_work += stats.total_work();
}

void AggregateStats::merge(const AggregateStats& other) {
    searches += other.searches;
    proposals += other.proposals;
    no_partner += other.no_partner;
    first_count += other.first_count;
    first_inspected += other.first_inspected;
    first_pushes += other.first_pushes;
    subsequent_count += other.subsequent_count;
    subsequent_inspected += other.subsequent_inspected;
    subsequent_pushes += other.subsequent_pushes;
    subsequent_inspected_max = std::max(subsequent_inspected_max, other.subsequent_inspected_max);
    subsequent_pushes_max = std::max(subsequent_pushes_max, other.subsequent_pushes_max);
    path_length_max = std::max(path_length_max, other.path_length_max);
    total_work += other.total_work;
}

double AggregateStats::mean_first_inspected() const {
    return first_count == 0 ? 0.0
                            : static_cast<double>(first_inspected)
            / static_cast<double>(first_count);
}

double AggregateStats::mean_subsequent_inspected() const {
    return subsequent_count == 0 ? 0.0
                                 : static_cast<double>(subsequent_inspected)
            / static_cast<double>(subsequent_count);
}

UpdateResult connectivity_update(std::span<const Neuron> population, Octree& tree,
                                 const SearchConfig& config, const DescentSink* sink) {
    tree.update_leaves_and_subtree(population);

    MonolithicView view(tree);
    SearchScratch<MonolithicView> scratch;
    UpdateResult result;
    DescentStats stats;
    for (const Neuron& neuron : population) {
        const std::uint32_t vacant_axons = neuron.vacant_count(ElementKind::Axon);
        check(vacant_axons < 0x10000u, "connectivity_update: vacant axon count too large");
        for (std::uint32_t search = 0; search < vacant_axons; ++search) {
            const auto proposal = find_target(view, neuron, config, search, stats, scratch);
            result.stats.add(stats);
            if (proposal.has_value()) {
                check(proposal->source_id != proposal->target_id,
                      "connectivity_update: autapse proposed");
                result.proposals.push_back(*proposal);
                ++result.stats.proposals;
            } else {
                ++result.stats.no_partner;
            }
            if (sink != nullptr && *sink) {
                (*sink)(neuron.id, search, stats);
            }
        }
    }
    return result;
}

void grant_target_group(std::vector<SynapseProposal>& group, std::uint32_t capacity,
                        std::uint64_t seed, std::uint32_t step, NeuronId target,
                        std::vector<SynapseProposal>& formed,
                        std::vector<SynapseProposal>& unmatched) {
    std::sort(group.begin(), group.end());
    KeyedStream stream(seed, RngDomain::Resolve, step, target);
    for (std::size_t i = group.size(); i > 1; --i) {
        const std::uint32_t j = stream.next_index(static_cast<std::uint32_t>(i));
        std::swap(group[i - 1], group[j]);
    }
    const std::size_t granted = std::min<std::size_t>(capacity, group.size());
    formed.insert(formed.end(), group.begin(), group.begin() + granted);
    unmatched.insert(unmatched.end(), group.begin() + granted, group.end());
}

ResolveResult resolve_proposals(std::span<const SynapseProposal> proposals,
                                std::span<Neuron> population, std::uint64_t seed,
                                std::uint32_t step) {
    std::unordered_map<NeuronId, std::size_t> index_of;
    index_of.reserve(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        index_of.emplace(population[i].id, i);
    }

    std::map<NeuronId, std::vector<SynapseProposal>> by_target;
    for (const SynapseProposal& proposal : proposals) {
        check(proposal.source_id != proposal.target_id, "resolve_proposals: autapse proposal");
        by_target[proposal.target_id].push_back(proposal);
    }

    ResolveResult result;
    for (auto& [target, group] : by_target) {
        const auto target_it = index_of.find(target);
        check(target_it != index_of.end(), "resolve_proposals: unknown target neuron");
        Neuron& target_neuron = population[target_it->second];

        const std::size_t formed_before = result.formed.size();
        grant_target_group(group, target_neuron.vacant_count(ElementKind::Dendrite), seed, step,
                           target, result.formed, result.unmatched);

        for (std::size_t i = formed_before; i < result.formed.size(); ++i) {
            const SynapseProposal& synapse = result.formed[i];
            const auto source_it = index_of.find(synapse.source_id);
            check(source_it != index_of.end(), "resolve_proposals: unknown source neuron");
            Neuron& source_neuron = population[source_it->second];
            check(source_neuron.vacant_count(ElementKind::Axon) > 0,
                  "resolve_proposals: source axon oversubscribed");
            source_neuron.vacant[kind_index(ElementKind::Axon)] -= 1;
            target_neuron.vacant[kind_index(ElementKind::Dendrite)] -= 1;
        }
    }
    return result;
}

} // namespace plastree
