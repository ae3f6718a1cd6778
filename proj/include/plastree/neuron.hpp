#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plastree/geometry.hpp"

namespace plastree {

using NeuronId = std::uint32_t;
inline constexpr NeuronId kInvalidNeuron = 0xFFFFFFFFu;

// A synapse is always formed from an axon to a dendrite, so a search by an
// axon targets dendrite weights and vice versa.
enum class ElementKind : std::uint8_t { Axon = 0, Dendrite = 1 };

inline constexpr std::size_t kind_index(ElementKind kind) {
    return static_cast<std::size_t>(kind);
}

inline constexpr ElementKind opposite(ElementKind kind) {
    return kind == ElementKind::Axon ? ElementKind::Dendrite : ElementKind::Axon;
}

struct Neuron {
    NeuronId id = kInvalidNeuron;
    Vec3 position;
    std::array<std::uint32_t, 2> vacant = { 0, 0 }; // [Axon], [Dendrite]

    std::uint32_t vacant_count(ElementKind kind) const { return vacant[kind_index(kind)]; }
    void set_vacant(ElementKind kind, std::uint32_t count) { vacant[kind_index(kind)] = count; }
};

using Population = std::vector<Neuron>;

struct VacancyProfile {
    std::uint32_t axons = 1;
    std::uint32_t dendrites = 1;
};

// Simulation domain used by the generators: a cube of side 1000 length units.
Box3 default_bounds();

// Uniform positions inside bounds, fixed vacancy profile, ids 0..n-1.
// Positions are keyed by (seed, neuron id), not by generation order.
Population generate_uniform_population(std::size_t n, std::uint64_t seed,
                                       const VacancyProfile& profile = {},
                                       const Box3& bounds = default_bounds());

// Text format, one neuron per line:
//   id x y z vacant_axons vacant_dendrites
// Lines starting with '#' are ignored.
Population load_population(const std::string& path);
void save_population(const Population& population, const std::string& path);

} // namespace plastree
