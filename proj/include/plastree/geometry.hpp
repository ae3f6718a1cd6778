#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "plastree/check.hpp"

namespace plastree {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return { x + o.x, y + o.y, z + o.z }; }
    Vec3 operator-(const Vec3& o) const { return { x - o.x, y - o.y, z - o.z }; }
    Vec3 operator*(double s) const { return { x * s, y * s, z * s }; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double norm_squared() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm_squared()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Axis-aligned box, half-open along each axis: [min, min + side).
struct Box3 {
    Vec3 min;
    Vec3 side;

    bool valid() const {
        return min.finite() && side.finite() && side.x > 0.0 && side.y > 0.0 && side.z > 0.0;
    }
    double max_side() const { return std::max(side.x, std::max(side.y, side.z)); }
    double diagonal() const { return side.norm(); }
    Vec3 center() const { return { min.x + side.x * 0.5, min.y + side.y * 0.5, min.z + side.z * 0.5 }; }

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x < min.x + side.x
            && p.y >= min.y && p.y < min.y + side.y
            && p.z >= min.z && p.z < min.z + side.z;
    }

    // Octant index of a point: bit 0 = upper x half, bit 1 = y, bit 2 = z.
    int octant_index(const Vec3& p) const {
        const Vec3 c = center();
        return (p.x >= c.x ? 1 : 0) | (p.y >= c.y ? 2 : 0) | (p.z >= c.z ? 4 : 0);
    }

    Box3 octant(int index) const {
        const Vec3 c = center();
        return { { (index & 1) ? c.x : min.x,
                   (index & 2) ? c.y : min.y,
                   (index & 4) ? c.z : min.z },
                 side * 0.5 };
    }

    bool operator==(const Box3& o) const { return min == o.min && side == o.side; }
};

inline double theta_max() { return 1.0 / std::sqrt(3.0); }

// Threshold below which an accepted node's children are accepted as well.
inline double theta_child_guarantee() { return 1.0 / (2.0 * std::sqrt(3.0)); }

// Acceptance-criterion parameter. The admitted range (0, 1/sqrt(3)] keeps a
// box containing the searching neuron from ever being accepted, which is what
// rules out autapses during the search.
class Theta {
public:
    explicit Theta(double value) : value_(value) {
        check(std::isfinite(value) && value > 0.0 && value <= theta_max(),
              "Theta must lie in (0, 1/sqrt(3)]");
    }
    double value() const { return value_; }

private:
    double value_;
};

struct SubdivisionGuarantee {
    double m;                // minimum per-axis refinement factor
    int depth;               // ceil(log2(m)) octree levels below the accepted node
    std::uint64_t node_bound; // 8^depth
};

// l/d < theta, strict. Ties are rejected (the node gets expanded).
bool acceptance(double max_side, double dist, Theta theta);

// True iff every child of an accepted node is guaranteed to satisfy the AC.
bool child_ac_guaranteed(Theta theta);

// Minimum number of per-axis subdivisions of an accepted node so that every
// resulting subdomain satisfies the AC no matter where its centroid lies.
double required_m(Theta theta);

SubdivisionGuarantee subdivision_guarantee(Theta theta);

// Bound on how far a child centroid can stray from its parent's centroid:
// the box diagonal, or a quarter of it when centroids stay near box centers.
double epsilon_bound(const Box3& box, bool centered);

enum class CentroidPlacement {
    Anywhere,       // parent and child centroids independently uniform in the box
    CenteredQuarter // child centroid within a quarter diagonal of the parent's
};

struct AcCounterexample {
    Box3 box;
    Vec3 parent_centroid;
    Vec3 child_centroid;
    Vec3 query;
    double theta = 0.0;
    double child_side_scale = 0.5;
    std::uint64_t trial = 0;
    double parent_ratio = 0.0; // l / ||p - q||
    double child_ratio = 0.0;  // l' / ||p' - q||
};

struct AcSearchConfig {
    double theta = 0.0;
    CentroidPlacement placement = CentroidPlacement::Anywhere;
    // Scale of the child box sides relative to the parent. 0.5 is the octree
    // halving; other values exist for fault injection in the checker's tests.
    double child_side_scale = 0.5;
};

// Randomized search for a configuration where the parent satisfies the AC but
// a child does not. Returns the first violating sample, or nullopt.
//
// theta is taken as a raw value up to 1.0 (not a Theta): the centered-quarter
// theorem covers theta <= 2/sqrt(3), beyond the simulation cap.
std::optional<AcCounterexample> find_ac_counterexample(const AcSearchConfig& config,
                                                       std::uint64_t trials,
                                                       std::uint64_t seed);

inline std::optional<AcCounterexample> find_ac_counterexample(double theta,
                                                              std::uint64_t trials,
                                                              std::uint64_t seed,
                                                              CentroidPlacement placement) {
    return find_ac_counterexample(AcSearchConfig{ theta, placement, 0.5 }, trials, seed);
}

struct SubdivisionCounterexample {
    Box3 box;
    Vec3 parent_centroid;
    Vec3 descendant_centroid;
    Vec3 query;
    double theta = 0.0;
    int depth = 0;
    std::uint64_t trial = 0;
    double descendant_ratio = 0.0;
};

// Randomized check of the m-subdivision bound: for an accepted parent, every
// descendant box at the guaranteed depth must satisfy the AC with its centroid
// anywhere in the parent box.
std::optional<SubdivisionCounterexample> find_subdivision_counterexample(Theta theta,
                                                                         std::uint64_t trials,
                                                                         std::uint64_t seed);

} // namespace plastree
