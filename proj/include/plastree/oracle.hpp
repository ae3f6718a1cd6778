#pragma once

#include <optional>
#include <span>
#include <vector>

#include "plastree/neuron.hpp"

namespace plastree {

// Reference partner-selection distribution, recomputed from the flat
// population list and never touching the octree.
struct CandidateDistribution {
    std::vector<std::pair<NeuronId, double>> probabilities; // sorted by id, sums to 1
    bool empty() const { return probabilities.empty(); }
    double probability_of(NeuronId id) const;
};

// Probability of neuron j proportional to vacant_j(kind) * exp(-d^2/sigma^2),
// searcher excluded. Empty when every weight is zero.
CandidateDistribution naive_distribution(const Neuron& searcher,
                                         std::span<const Neuron> population, ElementKind kind,
                                         double kernel_sigma);

// Samples naive_distribution with a single uniform draw.
std::optional<NeuronId> naive_pick(const Neuron& searcher, std::span<const Neuron> population,
                                   ElementKind kind, double kernel_sigma, double unit_draw);

// Total-variation distance between two id -> probability maps (both sorted).
double tv_distance(std::span<const std::pair<NeuronId, double>> a,
                   std::span<const std::pair<NeuronId, double>> b);

} // namespace plastree
