#include "plastree/neuron.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "plastree/check.hpp"
#include "plastree/rng.hpp"

namespace plastree {

Box3 default_bounds() {
    return { { 0.0, 0.0, 0.0 }, { 1000.0, 1000.0, 1000.0 } };
}

Population generate_uniform_population(std::size_t n, std::uint64_t seed,
                                       const VacancyProfile& profile, const Box3& bounds) {
    check(bounds.valid(), "generate_uniform_population: invalid bounds");
    Population population;
    population.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<NeuronId>(i);
        KeyedStream stream(seed, RngDomain::Position, id);
        Neuron neuron;
        neuron.id = id;
        neuron.position = { bounds.min.x + bounds.side.x * stream.next_double(),
                            bounds.min.y + bounds.side.y * stream.next_double(),
                            bounds.min.z + bounds.side.z * stream.next_double() };
        neuron.vacant = { profile.axons, profile.dendrites };
        population.push_back(neuron);
    }
    return population;
}

Population load_population(const std::string& path) {
    std::ifstream in(path);
    check(in.good(), "load_population: cannot open " + path);

    Population population;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        Neuron neuron;
        unsigned long long id = 0;
        if (!(fields >> id >> neuron.position.x >> neuron.position.y >> neuron.position.z
                     >> neuron.vacant[0] >> neuron.vacant[1])) {
            fail("load_population: malformed record at " + path + ":" + std::to_string(line_number));
        }
        check(id <= 0xFFFFFFFEull,
              "load_population: neuron id out of range at line " + std::to_string(line_number));
        neuron.id = static_cast<NeuronId>(id);
        check(neuron.position.finite(),
              "load_population: non-finite position at line " + std::to_string(line_number));
        population.push_back(neuron);
    }
    return population;
}

void save_population(const Population& population, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    check(out != nullptr, "save_population: cannot open " + path);
    std::fputs("# id x y z vacant_axons vacant_dendrites\n", out);
    for (const Neuron& neuron : population) {
        std::fprintf(out, "%" PRIu32 " %.17g %.17g %.17g %" PRIu32 " %" PRIu32 "\n",
                     neuron.id, neuron.position.x, neuron.position.y, neuron.position.z,
                     neuron.vacant[0], neuron.vacant[1]);
    }
    std::fclose(out);
}

} // namespace plastree
