#include "plastree/geometry.hpp"

#include <cmath>
#include <limits>

#include "plastree/rng.hpp"

namespace plastree {

namespace {

// Raw form used by the randomized trials; theta may exceed the Theta cap there.
bool accepts_raw(double max_side, double dist, double theta) {
    return max_side / dist < theta;
}

Vec3 sample_point_in_box(const Box3& box, KeyedStream& stream) {
    return { box.min.x + box.side.x * stream.next_double(),
             box.min.y + box.side.y * stream.next_double(),
             box.min.z + box.side.z * stream.next_double() };
}

Vec3 sample_unit_direction(KeyedStream& stream) {
    const double z = 2.0 * stream.next_double() - 1.0;
    const double phi = 2.0 * M_PI * stream.next_double();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return { r * std::cos(phi), r * std::sin(phi), z };
}

// Uniform point in the ball of the given radius around the origin.
Vec3 sample_in_ball(double radius, KeyedStream& stream) {
    for (;;) {
        const Vec3 v = { stream.uniform(-radius, radius),
                         stream.uniform(-radius, radius),
                         stream.uniform(-radius, radius) };
        if (v.norm_squared() <= radius * radius) {
            return v;
        }
    }
}

// Box with side lengths in [0.1, 10] (aspect ratios up to 100) at a random
// offset. Offsets do not matter for the theorems; they guard against
// translation bugs in the checker itself.
Box3 sample_box(KeyedStream& stream) {
    const Vec3 side = { stream.uniform(0.1, 10.0), stream.uniform(0.1, 10.0),
                        stream.uniform(0.1, 10.0) };
    const Vec3 min = { stream.uniform(-5.0, 5.0), stream.uniform(-5.0, 5.0),
                       stream.uniform(-5.0, 5.0) };
    return { min, side };
}

// Query on a sphere of radius (l/theta)*u around the parent centroid with
// u in (1, 3], so the parent AC holds by construction and trials concentrate
// near the boundary where violations would live.
Vec3 sample_query(const Vec3& parent, double max_side, double theta, KeyedStream& stream) {
    const double u = 3.0 - 2.0 * stream.next_double();
    const double radius = (max_side / theta) * u;
    return parent + sample_unit_direction(stream) * radius;
}

} // namespace

bool acceptance(double max_side, double dist, Theta theta) {
    check(max_side > 0.0, "acceptance: max_side must be positive");
    check(dist != 0.0, "acceptance: degenerate geometry, query coincides with centroid");
    check(dist > 0.0, "acceptance: distance must be positive");
    return accepts_raw(max_side, dist, theta.value());
}

bool child_ac_guaranteed(Theta theta) {
    return theta.value() <= theta_child_guarantee();
}

double required_m(Theta theta) {
    const double denom = 1.0 - theta.value() * std::sqrt(3.0);
    check(denom > 0.0, "required_m: singular for theta >= 1/sqrt(3)");
    return 1.0 / denom;
}

SubdivisionGuarantee subdivision_guarantee(Theta theta) {
    const double m = required_m(theta);
    const int depth = static_cast<int>(std::ceil(std::log2(m)));
    check(depth >= 0 && depth <= 20, "subdivision_guarantee: depth out of representable range");
    return { m, depth, std::uint64_t{ 1 } << (3 * depth) };
}

double epsilon_bound(const Box3& box, bool centered) {
    check(box.valid(), "epsilon_bound: invalid box");
    const double diag = box.diagonal();
    return centered ? 0.25 * diag : diag;
}

std::optional<AcCounterexample> find_ac_counterexample(const AcSearchConfig& config,
                                                       std::uint64_t trials,
                                                       std::uint64_t seed) {
    check(trials > 0, "find_ac_counterexample: trials must be positive");
    check(std::isfinite(config.theta) && config.theta > 0.0 && config.theta <= 1.0,
          "find_ac_counterexample: theta must lie in (0, 1]");
    check(config.child_side_scale > 0.0, "find_ac_counterexample: invalid child side scale");

    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        KeyedStream stream(seed, RngDomain::GeometryTrial,
                           static_cast<std::uint32_t>(trial),
                           static_cast<std::uint32_t>(trial >> 32), 0);

        const Box3 box = sample_box(stream);
        const double l = box.max_side();

        Vec3 parent;
        Vec3 child;
        if (config.placement == CentroidPlacement::Anywhere) {
            parent = sample_point_in_box(box, stream);
            child = sample_point_in_box(box, stream);
        } else {
            // Centered variant: the child centroid stays within a quarter of
            // the box diagonal of the parent centroid (and inside the box).
            const double radius = 0.25 * box.diagonal();
            bool placed = false;
            for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
                parent = sample_point_in_box(box, stream);
                child = parent + sample_in_ball(radius, stream);
                placed = box.contains(child);
            }
            if (!placed) {
                continue;
            }
        }

        const Vec3 q = sample_query(parent, l, config.theta, stream);
        const double parent_dist = distance(parent, q);
        if (!accepts_raw(l, parent_dist, config.theta)) {
            continue; // rounding pushed the sample onto the boundary
        }

        const double child_side = l * config.child_side_scale;
        const double child_dist = distance(child, q);
        if (child_dist <= 0.0 || !accepts_raw(child_side, child_dist, config.theta)) {
            return AcCounterexample{ box, parent, child, q, config.theta,
                                     config.child_side_scale, trial,
                                     l / parent_dist,
                                     child_dist > 0.0 ? child_side / child_dist
                                                      : std::numeric_limits<double>::infinity() };
        }
    }
    return std::nullopt;
}

std::optional<SubdivisionCounterexample> find_subdivision_counterexample(Theta theta,
                                                                         std::uint64_t trials,
                                                                         std::uint64_t seed) {
    check(trials > 0, "find_subdivision_counterexample: trials must be positive");
    const SubdivisionGuarantee guarantee = subdivision_guarantee(theta);
    const double scale = std::ldexp(1.0, -guarantee.depth);

    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        KeyedStream stream(seed, RngDomain::GeometryTrial,
                           static_cast<std::uint32_t>(trial),
                           static_cast<std::uint32_t>(trial >> 32), 1);

        const Box3 box = sample_box(stream);
        const double l = box.max_side();
        const Vec3 parent = sample_point_in_box(box, stream);
        const Vec3 q = sample_query(parent, l, theta.value(), stream);
        if (!accepts_raw(l, distance(parent, q), theta.value())) {
            continue;
        }

        const Vec3 descendant = sample_point_in_box(box, stream);
        const double descendant_dist = distance(descendant, q);
        if (descendant_dist <= 0.0
            || !accepts_raw(l * scale, descendant_dist, theta.value())) {
            return SubdivisionCounterexample{ box, parent, descendant, q, theta.value(),
                                              guarantee.depth, trial,
                                              descendant_dist > 0.0
                                                  ? (l * scale) / descendant_dist
                                                  : std::numeric_limits<double>::infinity() };
        }
    }
    return std::nullopt;
}

} // namespace plastree
