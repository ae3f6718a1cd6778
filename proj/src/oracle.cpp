#include "plastree/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "plastree/check.hpp"
#include "plastree/plasticity.hpp"

namespace plastree {

double CandidateDistribution::probability_of(NeuronId id) const {
    const auto it = std::lower_bound(probabilities.begin(), probabilities.end(), id,
                                     [](const auto& entry, NeuronId key) {
                                         return entry.first < key;
                                     });
    return (it != probabilities.end() && it->first == id) ? it->second : 0.0;
}

CandidateDistribution naive_distribution(const Neuron& searcher,
                                         std::span<const Neuron> population, ElementKind kind,
                                         double kernel_sigma) {
    check(kernel_sigma > 0.0, "naive_distribution: kernel_sigma must be positive");

    CandidateDistribution distribution;
    distribution.probabilities.reserve(population.size());
    double total = 0.0;
    for (const Neuron& candidate : population) {
        if (candidate.id == searcher.id) {
            continue;
        }
        const double w = attraction_weight(searcher.position, candidate.position,
                                           candidate.vacant_count(kind), kernel_sigma);
        if (w > 0.0) {
            distribution.probabilities.emplace_back(candidate.id, w);
            total += w;
        }
    }
    if (!(total > 0.0)) {
        distribution.probabilities.clear();
        return distribution;
    }
    for (auto& [id, p] : distribution.probabilities) {
        p /= total;
    }
    std::sort(distribution.probabilities.begin(), distribution.probabilities.end());
    return distribution;
}

std::optional<NeuronId> naive_pick(const Neuron& searcher, std::span<const Neuron> population,
                                   ElementKind kind, double kernel_sigma, double unit_draw) {
    const CandidateDistribution distribution =
        naive_distribution(searcher, population, kind, kernel_sigma);
    if (distribution.empty()) {
        return std::nullopt;
    }
    double cumulative = 0.0;
    NeuronId last = distribution.probabilities.back().first;
    for (const auto& [id, p] : distribution.probabilities) {
        cumulative += p;
        if (cumulative > unit_draw) {
            return id;
        }
    }
    return last;
}

double tv_distance(std::span<const std::pair<NeuronId, double>> a,
                   std::span<const std::pair<NeuronId, double>> b) {
    double sum = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            sum += std::abs(a[i].second);
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            sum += std::abs(b[j].second);
            ++j;
        } else {
            sum += std::abs(a[i].second - b[j].second);
            ++i;
            ++j;
        }
    }
    return 0.5 * sum;
}

} // namespace plastree
