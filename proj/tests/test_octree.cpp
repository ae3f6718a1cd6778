#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "plastree/octree.hpp"
#include "plastree/rng.hpp"

using namespace plastree;

namespace {

Neuron make_neuron(NeuronId id, double x, double y, double z, std::uint32_t axons = 1,
                   std::uint32_t dendrites = 1) {
    return Neuron{ id, { x, y, z }, { axons, dendrites } };
}

Population eight_octant_population(std::uint32_t dendrites_step = 0) {
    Population population;
    for (NeuronId i = 0; i < 8; ++i) {
        const double x = (i & 1) ? 750.0 : 250.0;
        const double y = (i & 2) ? 750.0 : 250.0;
        const double z = (i & 4) ? 750.0 : 250.0;
        population.push_back(make_neuron(i, x, y, z, 1, 1 + i * dendrites_step));
    }
    return population;
}

// Exhaustive traversal: weights as sums over contained neurons, centroids
// inside boxes, every neuron in exactly one leaf.
void check_invariants(const Octree& tree, const Population& population) {
    std::map<NeuronId, const Neuron*> by_id;
    for (const Neuron& neuron : population) {
        by_id[neuron.id] = &neuron;
    }

    std::set<NeuronId> seen;
    std::uint64_t leaves = 0;
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const auto index = static_cast<Octree::NodeIndex>(i);
        const Octree::Node& node = tree.node(index);
        if (node.is_leaf()) {
            ++leaves;
            REQUIRE(by_id.count(node.neuron) == 1);
            CHECK(seen.insert(node.neuron).second);
            const Neuron& neuron = *by_id[node.neuron];
            CHECK(node.position == neuron.position);
            CHECK(node.neuron_count == 1);
            for (int k = 0; k < 2; ++k) {
                CHECK(node.kinds[k].weight == neuron.vacant[k]);
            }
        } else {
            std::uint32_t count = 0;
            std::array<std::uint64_t, 2> weights = { 0, 0 };
            int child_count = 0;
            for (const auto child : node.children) {
                if (child == Octree::kNone) {
                    continue;
                }
                ++child_count;
                const Octree::Node& child_node = tree.node(child);
                CHECK(child_node.parent == index);
                count += child_node.neuron_count;
                for (int k = 0; k < 2; ++k) {
                    weights[k] += child_node.kinds[k].weight;
                }
            }
            CHECK(child_count >= 1);
            CHECK(node.neuron_count == count);
            CHECK(node.neuron_count >= 2); // single-neuron boxes are leaves
            for (int k = 0; k < 2; ++k) {
                CHECK(node.kinds[k].weight == weights[k]);
                if (node.kinds[k].weight > 0) {
                    const Vec3 c = node.kinds[k].centroid();
                    const double slack = 1e-12 * node.box.max_side();
                    CHECK(c.x >= node.box.min.x - slack);
                    CHECK(c.x <= node.box.min.x + node.box.side.x + slack);
                    CHECK(c.y >= node.box.min.y - slack);
                    CHECK(c.y <= node.box.min.y + node.box.side.y + slack);
                    CHECK(c.z >= node.box.min.z - slack);
                    CHECK(c.z <= node.box.min.z + node.box.side.z + slack);
                }
            }
        }
    }
    CHECK(leaves == population.size());
    CHECK(tree.leaf_count() == population.size());
}

} // namespace

TEST_CASE("single neuron yields a single leaf") {
    const Population population = { make_neuron(7, 100, 200, 300, 2, 5) };
    const Octree tree = Octree::build(population, default_bounds());
    CHECK(tree.node_count() == 1);
    const Octree::Node& root = tree.node(tree.root());
    CHECK(root.is_leaf());
    CHECK(root.neuron == 7);
    CHECK(tree.kind_weight(tree.root(), ElementKind::Axon) == 2);
    CHECK(tree.kind_weight(tree.root(), ElementKind::Dendrite) == 5);
}

TEST_CASE("eight octants produce one root with eight leaf children") {
    const Population population = eight_octant_population(1);
    const Octree tree = Octree::build(population, default_bounds());
    const Octree::Node& root = tree.node(tree.root());
    CHECK_FALSE(root.is_leaf());
    int children = 0;
    for (const auto child : root.children) {
        if (child != Octree::kNone) {
            ++children;
            CHECK(tree.node(child).is_leaf());
        }
    }
    CHECK(children == 8);

    // root centroid per kind = weighted mean of positions, computed directly
    for (const ElementKind kind : { ElementKind::Axon, ElementKind::Dendrite }) {
        double weight = 0.0;
        Vec3 sum{};
        for (const Neuron& neuron : population) {
            weight += neuron.vacant_count(kind);
            sum += neuron.position * static_cast<double>(neuron.vacant_count(kind));
        }
        const Vec3 expected = sum * (1.0 / weight);
        const Vec3 actual = tree.centroid(tree.root(), kind);
        CHECK(actual.x == doctest::Approx(expected.x).epsilon(1e-12));
        CHECK(actual.y == doctest::Approx(expected.y).epsilon(1e-12));
        CHECK(actual.z == doctest::Approx(expected.z).epsilon(1e-12));
    }
}

TEST_CASE("build rejects bad input") {
    Population duplicate_position = { make_neuron(0, 1, 2, 3), make_neuron(1, 1, 2, 3) };
    CHECK_THROWS_AS(Octree::build(duplicate_position, default_bounds()), SimError);

    Population duplicate_id = { make_neuron(0, 1, 2, 3), make_neuron(0, 4, 5, 6) };
    CHECK_THROWS_AS(Octree::build(duplicate_id, default_bounds()), SimError);

    Population outside = { make_neuron(0, -1, 2, 3) };
    CHECK_THROWS_AS(Octree::build(outside, default_bounds()), SimError);

    Population on_upper_face = { make_neuron(0, 1000.0, 2, 3) }; // half-open boxes
    CHECK_THROWS_AS(Octree::build(on_upper_face, default_bounds()), SimError);
}

TEST_CASE("random population invariants and root sums") {
    const Population population = generate_uniform_population(1000, 31);
    const Octree tree = Octree::build(population, default_bounds());
    check_invariants(tree, population);

    std::uint64_t expected = 0;
    for (const Neuron& neuron : population) {
        expected += neuron.vacant_count(ElementKind::Dendrite);
    }
    CHECK(tree.kind_weight(tree.root(), ElementKind::Dendrite) == expected);
}

TEST_CASE("update: zeroed counts flag centroids undefined") {
    Population population = eight_octant_population();
    Octree tree = Octree::build(population, default_bounds());
    for (Neuron& neuron : population) {
        neuron.vacant = { 0, 0 };
    }
    tree.update_leaves_and_subtree(population);
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const auto& node = tree.node(static_cast<Octree::NodeIndex>(i));
        for (int k = 0; k < 2; ++k) {
            CHECK(node.kinds[k].weight == 0);
            CHECK_FALSE(node.kinds[k].has_centroid());
        }
    }
    CHECK_THROWS_AS(tree.node(tree.root()).kinds[0].centroid(), SimError);
}

TEST_CASE("update: single count increment touches exactly the root-to-leaf path") {
    Population population = generate_uniform_population(256, 5);
    Octree tree = Octree::build(population, default_bounds());

    std::vector<std::uint64_t> before(tree.node_count());
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        before[i] = tree.kind_weight(static_cast<Octree::NodeIndex>(i), ElementKind::Dendrite);
    }

    const NeuronId target = population[100].id;
    population[100].vacant[kind_index(ElementKind::Dendrite)] += 1;
    tree.update_leaves_and_subtree(population);

    // expected path: leaf up to root
    std::set<Octree::NodeIndex> path;
    for (Octree::NodeIndex i = tree.leaf_of(target); i != Octree::kNone;
         i = tree.node(i).parent) {
        path.insert(i);
    }
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const auto index = static_cast<Octree::NodeIndex>(i);
        const std::uint64_t now = tree.kind_weight(index, ElementKind::Dendrite);
        if (path.count(index) == 1) {
            CHECK(now == before[i] + 1);
        } else {
            CHECK(now == before[i]);
        }
    }
}

TEST_CASE("update equals rebuild after random perturbation") {
    Population population = generate_uniform_population(512, 8);
    Octree tree = Octree::build(population, default_bounds());

    KeyedStream stream(77, RngDomain::Scenario, 3);
    for (Neuron& neuron : population) {
        neuron.set_vacant(ElementKind::Axon, stream.next_index(4));
        neuron.set_vacant(ElementKind::Dendrite, stream.next_index(4));
    }
    tree.update_leaves_and_subtree(population);
    const Octree rebuilt = Octree::build(population, default_bounds());

    REQUIRE(tree.node_count() == rebuilt.node_count());
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const auto& a = tree.node(static_cast<Octree::NodeIndex>(i));
        const auto& b = rebuilt.node(static_cast<Octree::NodeIndex>(i));
        CHECK(a.box == b.box);
        CHECK(a.neuron == b.neuron);
        for (int k = 0; k < 2; ++k) {
            CHECK(a.kinds[k].weight == b.kinds[k].weight);
            CHECK(std::abs(a.kinds[k].weighted_position.x - b.kinds[k].weighted_position.x)
                  <= 1e-12);
            CHECK(std::abs(a.kinds[k].weighted_position.y - b.kinds[k].weighted_position.y)
                  <= 1e-12);
            CHECK(std::abs(a.kinds[k].weighted_position.z - b.kinds[k].weighted_position.z)
                  <= 1e-12);
        }
    }

    // root weight equals a fresh summation over the perturbed population
    std::uint64_t expected = 0;
    for (const Neuron& neuron : population) {
        expected += neuron.vacant_count(ElementKind::Axon);
    }
    CHECK(tree.kind_weight(tree.root(), ElementKind::Axon) == expected);
}

TEST_CASE("update validates its input") {
    Population population = generate_uniform_population(16, 9);
    Octree tree = Octree::build(population, default_bounds());

    Population wrong_id = population;
    wrong_id[3].id = 999;
    CHECK_THROWS_AS(tree.update_leaves_and_subtree(wrong_id), SimError);

    Population moved = population;
    moved[3].position.x += 1.0;
    CHECK_THROWS_AS(tree.update_leaves_and_subtree(moved), SimError);
}

TEST_CASE("expand returns positive-weight children and counts 8 slots") {
    const Population population = eight_octant_population();
    const Octree tree = Octree::build(population, default_bounds());

    ExpansionCounter counter;
    std::vector<Octree::NodeIndex> children;
    tree.expand(tree.root(), ElementKind::Dendrite, counter, children);
    CHECK(children.size() == 8);
    CHECK(counter.nodes_inspected == 8);

    // counter contract: every expansion considers the 8 child slots
    ExpansionCounter offset;
    offset.nodes_inspected = 1000;
    children.clear();
    tree.expand(tree.root(), ElementKind::Dendrite, offset, children);
    CHECK(offset.nodes_inspected == 1008);

    CHECK_THROWS_AS(tree.expand(tree.leaf_of(0), ElementKind::Dendrite, counter, children),
                    SimError);
}

TEST_CASE("expand skips empty octants and zero-weight subtrees") {
    // five neurons in five distinct octants
    Population population;
    for (NeuronId i = 0; i < 5; ++i) {
        const double x = (i & 1) ? 900.0 : 100.0;
        const double y = (i & 2) ? 900.0 : 100.0;
        const double z = (i & 4) ? 900.0 : 100.0;
        population.push_back(make_neuron(i, x, y, z));
    }
    Octree tree = Octree::build(population, default_bounds());

    ExpansionCounter counter;
    std::vector<Octree::NodeIndex> children;
    tree.expand(tree.root(), ElementKind::Dendrite, counter, children);
    CHECK(children.size() == 5);

    // zero out one neuron's dendrites: its leaf is skipped for that kind
    population[0].set_vacant(ElementKind::Dendrite, 0);
    tree.update_leaves_and_subtree(population);
    children.clear();
    tree.expand(tree.root(), ElementKind::Dendrite, counter, children);
    CHECK(children.size() == 4);
    children.clear();
    tree.expand(tree.root(), ElementKind::Axon, counter, children);
    CHECK(children.size() == 5);
}

TEST_CASE("height stays logarithmic for uniform populations") {
    const Population population = generate_uniform_population(4096, 12);
    const Octree tree = Octree::build(population, default_bounds());
    // log8(4096) = 4; uniform points leave a couple of extra levels
    CHECK(tree.height() >= 4);
    CHECK(tree.height() <= 12);

    // explicit bound: ceil(log2(max_side / min pairwise separation))
    double min_sep = 1e300;
    for (std::size_t i = 0; i < population.size(); ++i) {
        for (std::size_t j = i + 1; j < population.size(); ++j) {
            min_sep = std::min(min_sep,
                               distance(population[i].position, population[j].position));
        }
    }
    CHECK(tree.height()
          <= static_cast<int>(std::ceil(std::log2(1000.0 / min_sep))) + 1);
}

TEST_CASE("population file round-trip") {
    const Population population = generate_uniform_population(64, 21);
    const std::string path = "population_roundtrip_test.txt";
    save_population(population, path);
    const Population loaded = load_population(path);
    REQUIRE(loaded.size() == population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        CHECK(loaded[i].id == population[i].id);
        CHECK(loaded[i].position == population[i].position);
        CHECK(loaded[i].vacant == population[i].vacant);
    }
    std::remove(path.c_str());
}
