#include <doctest.h>

#include <cmath>

#include "plastree/geometry.hpp"
#include "plastree/rng.hpp"

using namespace plastree;

TEST_CASE("acceptance criterion is strict") {
    CHECK(acceptance(1.0, 10.0, Theta(0.2)));         // 0.1 < 0.2
    CHECK_FALSE(acceptance(1.0, 5.0, Theta(0.2)));    // tie rejected
    // independent arithmetic: 2.5 / 9.0 = 0.2777... >= 0.27735
    const double ratio = 2.5 / 9.0;
    const double theta = 0.27735;
    CHECK(acceptance(2.5, 9.0, Theta(theta)) == (ratio < theta));
    CHECK_FALSE(acceptance(2.5, 9.0, Theta(theta)));
}

TEST_CASE("acceptance rejects degenerate geometry") {
    CHECK_THROWS_AS(acceptance(1.0, 0.0, Theta(0.2)), SimError);
    CHECK_THROWS_AS(acceptance(0.0, 1.0, Theta(0.2)), SimError);
    CHECK_THROWS_AS(acceptance(1.0, -2.0, Theta(0.2)), SimError);
}

TEST_CASE("theta range is validated") {
    CHECK_NOTHROW(Theta{ 0.0001 });
    CHECK_NOTHROW(Theta{ theta_max() }); // boundary included
    CHECK_THROWS_AS(Theta(0.0), SimError);
    CHECK_THROWS_AS(Theta(-0.1), SimError);
    CHECK_THROWS_AS(Theta(0.6), SimError);
}

TEST_CASE("child guarantee threshold") {
    CHECK(child_ac_guaranteed(Theta(0.2)));
    CHECK_FALSE(child_ac_guaranteed(Theta(0.3)));
    CHECK(child_ac_guaranteed(Theta(1.0 / (2.0 * std::sqrt(3.0)))));
}

TEST_CASE("required_m reproduces the published table") {
    CHECK(std::abs(required_m(Theta(0.1)) - 1.20949) <= 1e-5);
    CHECK(std::abs(required_m(Theta(0.2)) - 1.53001) <= 1e-5);
    CHECK(std::abs(required_m(Theta(0.3)) - 2.08166) <= 1e-5);
    CHECK(std::abs(required_m(Theta(0.4)) - 3.25542) <= 1e-5);
    CHECK(std::abs(required_m(Theta(0.5)) - 7.46410) <= 1e-5);
}

TEST_CASE("required_m is singular at the cap") {
    CHECK_THROWS_AS(required_m(Theta(theta_max())), SimError);
}

TEST_CASE("required_m grows monotonically and tends to 1") {
    double previous = 0.0;
    for (double theta = 0.01; theta < 0.57; theta += 0.01) {
        const double m = required_m(Theta(theta));
        CHECK(m > previous);
        previous = m;
    }
    CHECK(required_m(Theta(1e-9)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("subdivision guarantee depths and node bounds") {
    const SubdivisionGuarantee g02 = subdivision_guarantee(Theta(0.2));
    CHECK(g02.depth == 1);
    CHECK(g02.node_bound == 8);
    const SubdivisionGuarantee g04 = subdivision_guarantee(Theta(0.4));
    CHECK(g04.depth == 2);
    CHECK(g04.node_bound == 64);
    const SubdivisionGuarantee g05 = subdivision_guarantee(Theta(0.5));
    CHECK(g05.depth == 3);
    CHECK(g05.node_bound == 512);
}

TEST_CASE("epsilon bound") {
    const Box3 cube{ { 0, 0, 0 }, { 1, 1, 1 } };
    CHECK(epsilon_bound(cube, false) == doctest::Approx(std::sqrt(3.0)));
    CHECK(epsilon_bound(cube, true) == doctest::Approx(0.25 * std::sqrt(3.0)));
    const Box3 box{ { -1, 2, 0 }, { 3, 4, 12 } };
    CHECK(epsilon_bound(box, false) == doctest::Approx(13.0));
    // both variants bounded by factor * sqrt(3) * max_side
    CHECK(epsilon_bound(box, false) <= std::sqrt(3.0) * box.max_side() + 1e-12);
    CHECK(epsilon_bound(box, true) <= 0.25 * std::sqrt(3.0) * box.max_side() + 1e-12);
}

TEST_CASE("AC propagation holds below the guarantee threshold") {
    const std::uint64_t trials = 200000;
    CHECK_FALSE(find_ac_counterexample(0.25, trials, 2024, CentroidPlacement::Anywhere)
                    .has_value());
    CHECK_FALSE(find_ac_counterexample(theta_child_guarantee(), trials, 2025,
                                       CentroidPlacement::Anywhere)
                    .has_value());
}

TEST_CASE("centered-quarter propagation holds up to theta = 1") {
    const std::uint64_t trials = 200000;
    CHECK_FALSE(find_ac_counterexample(0.9, trials, 7, CentroidPlacement::CenteredQuarter)
                    .has_value());
    CHECK_FALSE(find_ac_counterexample(1.0, trials, 8, CentroidPlacement::CenteredQuarter)
                    .has_value());
}

TEST_CASE("theta = 0.5 with free centroids has counterexamples") {
    // Explicit adversarial construction: centroids at opposite corners of a
    // unit cube, query just beyond the parent acceptance radius.
    const Box3 cube{ { 0, 0, 0 }, { 1, 1, 1 } };
    const Vec3 parent{ 0, 0, 0 };
    const Vec3 child{ 1, 1, 1 };
    const double theta = 0.5;
    const Vec3 direction = child * (1.0 / std::sqrt(3.0));
    const Vec3 query = parent + direction * (1.0 / theta * 1.001);
    const Theta t(theta);
    CHECK(acceptance(cube.max_side(), distance(parent, query), t));
    CHECK_FALSE(acceptance(cube.max_side() * 0.5, distance(child, query), t));

    // and the randomized search finds one too
    const auto found =
        find_ac_counterexample(0.5, 1000000, 99, CentroidPlacement::Anywhere);
    REQUIRE(found.has_value());
    // replay: the recorded configuration must violate the child AC
    CHECK(acceptance(found->box.max_side(), distance(found->parent_centroid, found->query),
                     t));
    CHECK_FALSE(acceptance(found->box.max_side() * 0.5,
                           distance(found->child_centroid, found->query), t));
}

TEST_CASE("fault injection: unhalved child sides break propagation") {
    AcSearchConfig faulty;
    faulty.theta = 0.25;
    faulty.placement = CentroidPlacement::Anywhere;
    faulty.child_side_scale = 1.0;
    CHECK(find_ac_counterexample(faulty, 1000000, 5).has_value());
}

TEST_CASE("m-subdivision bound holds at the guaranteed depth") {
    for (const double theta : { 0.3, 0.4, 0.5 }) {
        CHECK_FALSE(find_subdivision_counterexample(Theta(theta), 20000, 3).has_value());
    }
}

TEST_CASE("a box containing the searcher never satisfies the AC") {
    // l/d >= 1/sqrt(3) >= theta whenever both points lie inside the box.
    KeyedStream stream(17, RngDomain::Scenario, 0x5e);
    const Theta theta(theta_max());
    for (int i = 0; i < 20000; ++i) {
        const Box3 box{ { stream.uniform(-5, 5), stream.uniform(-5, 5),
                          stream.uniform(-5, 5) },
                        { stream.uniform(0.1, 10), stream.uniform(0.1, 10),
                          stream.uniform(0.1, 10) } };
        const Vec3 p = { box.min.x + box.side.x * stream.next_double(),
                         box.min.y + box.side.y * stream.next_double(),
                         box.min.z + box.side.z * stream.next_double() };
        const Vec3 q = { box.min.x + box.side.x * stream.next_double(),
                         box.min.y + box.side.y * stream.next_double(),
                         box.min.z + box.side.z * stream.next_double() };
        const double d = distance(p, q);
        if (d == 0.0) {
            continue;
        }
        CHECK(d <= box.diagonal());
        CHECK_FALSE(acceptance(box.max_side(), d, theta));
    }
}

TEST_CASE("box octants tile and classify consistently") {
    const Box3 box{ { 0, 0, 0 }, { 8, 4, 2 } };
    double volume = 0.0;
    for (int o = 0; o < 8; ++o) {
        const Box3 child = box.octant(o);
        volume += child.side.x * child.side.y * child.side.z;
        const Vec3 c = child.center();
        CHECK(box.octant_index(c) == o);
        CHECK(child.contains(c));
    }
    CHECK(volume == doctest::Approx(8.0 * 4.0 * 2.0));
}
