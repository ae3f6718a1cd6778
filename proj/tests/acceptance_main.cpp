// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "plastree/experiments.hpp"

using namespace plastree;

namespace {

struct Criterion {
    int id;
    const char* name;
    bool pass;
    std::string detail;
    double seconds;
};

std::vector<Criterion> g_results;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
    g_results.push_back({ id, name, pass, detail, seconds });
    std::printf("[%s] criterion %d: %s (%.2fs) %s\n", pass ? "PASS" : "FAIL", id, name,
                seconds, detail.c_str());
    std::fflush(stdout);
}

std::string format(const char* fmt, ...) {
    char buffer[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buffer, sizeof(buffer), fmt, args);
    va_end(args);
    return buffer;
}

// 1. Table reproduction within 1e-5, depths 1,1,2,2,3, bounds 8,8,64,64,512,
//    in under a second.
void criterion_1() {
    Timer timer;
    const double thetas[] = { 0.1, 0.2, 0.3, 0.4, 0.5 };
    const double expected_m[] = { 1.20949, 1.53001, 2.08166, 3.25542, 7.46410 };
    const int expected_depth[] = { 1, 1, 2, 2, 3 };
    const std::uint64_t expected_bound[] = { 8, 8, 64, 64, 512 };

    bool pass = true;
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        const Theta theta(thetas[i]);
        const double m = required_m(theta);
        const SubdivisionGuarantee guarantee = subdivision_guarantee(theta);
        worst = std::max(worst, std::abs(m - expected_m[i]));
        if (std::abs(m - expected_m[i]) > 1e-5 || guarantee.depth != expected_depth[i]
            || guarantee.node_bound != expected_bound[i]) {
            pass = false;
        }
    }
    const double elapsed = timer.seconds();
    pass = pass && elapsed < 1.0;
    report(1, "Table 1 reproduction", pass,
           format("max |m - reference| = %.2e, depths/bounds exact", worst), elapsed);
}

// 2. Zero AC-propagation counterexamples: 1e6 trials per theta, centroids
//    anywhere for theta <= 1/(2*sqrt(3)), centered-quarter up to theta = 1.
void criterion_2() {
    Timer timer;
    const std::uint64_t trials = 1000000;
    bool pass = true;
    std::string detail;

    const double anywhere[] = { 0.05, 0.15, 0.25, theta_child_guarantee() };
    for (const double theta : anywhere) {
        const auto ce = find_ac_counterexample(theta, trials, 20260808,
                                               CentroidPlacement::Anywhere);
        if (ce.has_value()) {
            pass = false;
            detail += format(" counterexample at theta=%.6f (anywhere, trial %" PRIu64 ")",
                             theta, ce->trial);
        }
    }
    const double centered[] = { 0.5, 0.9, 1.0 };
    for (const double theta : centered) {
        const auto ce = find_ac_counterexample(theta, trials, 20260809,
                                               CentroidPlacement::CenteredQuarter);
        if (ce.has_value()) {
            pass = false;
            detail += format(" counterexample at theta=%.6f (centered, trial %" PRIu64 ")",
                             theta, ce->trial);
        }
    }
    const double elapsed = timer.seconds();
    pass = pass && elapsed < 60.0;
    if (detail.empty()) {
        detail = format("0 violations over 7 x %" PRIu64 " trials", trials);
    }
    report(2, "AC-propagation theorem", pass, detail, elapsed);
}

// 3. m-subdivision: all descendants at the guaranteed depth satisfy the AC,
//    1e5 accepted-parent configurations per theta.
void criterion_3() {
    Timer timer;
    const std::uint64_t trials = 100000;
    bool pass = true;
    std::string detail;
    for (const double theta : { 0.3, 0.4, 0.5 }) {
        const auto ce = find_subdivision_counterexample(Theta(theta), trials, 20260810);
        if (ce.has_value()) {
            pass = false;
            detail += format(" violation at theta=%.2f trial %" PRIu64, theta, ce->trial);
        }
    }
    if (detail.empty()) {
        detail = format("0 violations over 3 x %" PRIu64 " trials", trials);
    }
    report(3, "m-subdivision theorem", pass, detail, timer.seconds());
}

ScalingReport g_sweep_025;

// 4. Constant subsequent work across n = 2^10..2^17: at theta 0.25 every
//    subsequent descent has no pushes and <= 8 inspections with a flat mean;
//    at theta 0.4 the per-descent bound is 64.
void criterion_4() {
    Timer timer;
    ScalingSpec spec;
    spec.sizes = { 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072 };
    spec.seed = 20260811;

    spec.theta = 0.25;
    g_sweep_025 = run_scaling(spec);
    bool pass = true;
    std::uint64_t max_inspected = 0;
    std::uint64_t max_pushes = 0;
    for (const ScalingRow& row : g_sweep_025.rows) {
        max_inspected = std::max(max_inspected, row.subsequent_max_inspected);
        max_pushes = std::max(max_pushes, row.subsequent_max_pushes);
    }
    pass = pass && max_pushes == 0 && max_inspected <= 8;
    pass = pass && std::abs(g_sweep_025.subsequent_fit.slope) <= 0.05;

    spec.theta = 0.4;
    const ScalingReport sweep_04 = run_scaling(spec);
    std::uint64_t max_inspected_04 = 0;
    for (const ScalingRow& row : sweep_04.rows) {
        max_inspected_04 = std::max(max_inspected_04, row.subsequent_max_inspected);
    }
    pass = pass && max_inspected_04 <= 64;

    const double elapsed = timer.seconds();
    pass = pass && elapsed < 600.0;
    report(4, "constant subsequent work", pass,
           format("theta=0.25: max inspected %" PRIu64 ", max pushes %" PRIu64
                  ", mean slope %.4f; theta=0.4: max inspected %" PRIu64 " (bound 64)",
                  max_inspected, max_pushes, g_sweep_025.subsequent_fit.slope,
                  max_inspected_04),
           elapsed);
}

// 5. Theta(n log n) signature on the criterion-4 sweep: W(n)/(n log2 n) within
//    a 1.25 max/min band and W(n)/(n log2^2 n) monotonically decreasing.
void criterion_5() {
    Timer timer;
    const ScalingReport& sweep = g_sweep_025;
    const bool band = sweep.work_logn_ratio <= 1.25;
    const bool monotone = sweep.work_log2n_monotone_down;

    std::string detail = format("max/min W/(n log2 n) = %.3f (bound 1.25), "
                                "W/(n log2^2 n) monotone down: %s; values:",
                                sweep.work_logn_ratio, monotone ? "yes" : "no");
    for (const ScalingRow& row : sweep.rows) {
        detail += format(" %.1f", row.work_per_n_logn);
    }
    report(5, "Theta(n log n) signature", band && monotone, detail, timer.seconds());
}

// 6. Oracle exactness within 1e-12 on 100 random populations and TV <= 0.02
//    for the theta = 0.25 approximation over 1e5 draws at n = 1e3.
void criterion_6() {
    Timer timer;
    OracleSpec spec;
    spec.n = 1000;
    spec.populations = 100;
    spec.draws = 100000;
    spec.sigma = 750.0;
    spec.tv_sigma = 150.0;
    spec.seed = 20260812;
    const OracleReport report_data = run_compare_oracle(spec);

    const bool pass =
        report_data.exactness_ok() && report_data.tv_empirical_theta025 <= 0.02;
    report(6, "oracle exactness and TV", pass,
           format("max |dp| = %.2e (bound 1e-12); TV = %.4f over %" PRIu64
                  " draws (bound 0.02, exact %.4f)",
                  report_data.max_abs_probability_error, report_data.tv_empirical_theta025,
                  report_data.draws, report_data.tv_exact_theta025),
           timer.seconds());
}

// 7. Distributed equivalence at n = 2^12: identical proposal multisets for
//    p in {1, 8, 64}, fetched summaries exact, exchange counts exactly linear.
void criterion_7() {
    Timer timer;
    DistributedSpec spec;
    spec.n = 4096;
    spec.ranks = { 1, 8, 64 };
    spec.seed = 20260813;
    spec.steps = 1;
    spec.verify_summaries = true;
    const DistributedReport report_data = run_distributed(spec);

    const bool pass = report_data.proposals_invariant && report_data.exchange_counts_exact
        && report_data.weight_mismatches == 0 && report_data.max_centroid_error <= 1e-9;
    report(7, "distributed equivalence", pass,
           format("proposals %s; %" PRIu64 " summaries compared, %" PRIu64
                  " weight mismatches, max centroid err %.2e; exchange counts %s",
                  report_data.proposals_invariant ? "invariant" : "DIFFER",
                  report_data.summaries_compared, report_data.weight_mismatches,
                  report_data.max_centroid_error,
                  report_data.exchange_counts_exact ? "exact" : "WRONG"),
           timer.seconds());
}

// 8. Per-rank work decomposition at n = 2^15: mean local work halves within
//    20% with each doubling of p in {1, 2, 4, 8}.
void criterion_8() {
    Timer timer;
    DistributedSpec spec;
    spec.n = 32768;
    spec.ranks = { 1, 2, 4, 8 };
    spec.seed = 20260814;
    spec.steps = 1;
    spec.verify_summaries = false;
    const DistributedReport report_data = run_distributed(spec);

    bool pass = report_data.proposals_invariant;
    std::string detail = "mean local work:";
    for (const auto& per : report_data.per_p) {
        detail += format(" p=%u:%.0f", per.p, per.mean_local_work);
    }
    for (std::size_t i = 1; i < report_data.per_p.size(); ++i) {
        const double ratio =
            report_data.per_p[i].mean_local_work / report_data.per_p[i - 1].mean_local_work;
        detail += format(" ratio=%.3f", ratio);
        if (ratio < 0.4 || ratio > 0.6) {
            pass = false;
        }
    }
    report(8, "per-rank work decomposition", pass, detail, timer.seconds());
}

// 9. Full octree invariant suite on 1000 random populations up to n = 1e4:
//    weights as sums, centroids inside boxes, leaf bijection, rebuild equals
//    update.
void criterion_9() {
    Timer timer;
    bool pass = true;
    std::string failure;
    std::uint64_t total_neurons = 0;

    for (std::uint32_t trial = 0; trial < 1000 && pass; ++trial) {
        KeyedStream stream(20260815, RngDomain::Scenario, trial);
        const std::uint32_t n = trial < 5
            ? 10000
            : static_cast<std::uint32_t>(std::exp(stream.uniform(0.0, std::log(10000.0))));
        Population population = generate_uniform_population(std::max(1u, n), 9000 + trial);
        for (Neuron& neuron : population) {
            neuron.set_vacant(ElementKind::Axon, stream.next_index(4));
            neuron.set_vacant(ElementKind::Dendrite, stream.next_index(4));
        }
        total_neurons += population.size();

        Octree tree = Octree::build(population, default_bounds());

        // leaf bijection + weight sums + centroid containment
        std::map<NeuronId, int> leaf_hits;
        for (std::size_t i = 0; i < tree.node_count() && pass; ++i) {
            const auto& node = tree.node(static_cast<Octree::NodeIndex>(i));
            if (node.is_leaf()) {
                ++leaf_hits[node.neuron];
                continue;
            }
            std::array<std::uint64_t, 2> sums = { 0, 0 };
            for (const auto child : node.children) {
                if (child >= 0) {
                    for (int k = 0; k < 2; ++k) {
                        sums[k] += tree.node(child).kinds[k].weight;
                    }
                }
            }
            for (int k = 0; k < 2 && pass; ++k) {
                if (node.kinds[k].weight != sums[k]) {
                    pass = false;
                    failure = format("weight sum mismatch, trial %u", trial);
                }
                if (node.kinds[k].weight > 0) {
                    const Vec3 c = node.kinds[k].centroid();
                    const double slack = 1e-12 * node.box.max_side();
                    if (c.x < node.box.min.x - slack
                        || c.x > node.box.min.x + node.box.side.x + slack
                        || c.y < node.box.min.y - slack
                        || c.y > node.box.min.y + node.box.side.y + slack
                        || c.z < node.box.min.z - slack
                        || c.z > node.box.min.z + node.box.side.z + slack) {
                        pass = false;
                        failure = format("centroid outside box, trial %u", trial);
                    }
                }
            }
        }
        if (pass
            && (leaf_hits.size() != population.size()
                || tree.leaf_count() != population.size())) {
            pass = false;
            failure = format("leaf bijection broken, trial %u", trial);
        }

        // rebuild equals update after a random perturbation
        if (pass) {
            for (Neuron& neuron : population) {
                neuron.set_vacant(ElementKind::Axon, stream.next_index(4));
                neuron.set_vacant(ElementKind::Dendrite, stream.next_index(4));
            }
            tree.update_leaves_and_subtree(population);
            const Octree rebuilt = Octree::build(population, default_bounds());
            if (rebuilt.node_count() != tree.node_count()) {
                pass = false;
                failure = format("rebuild changed structure, trial %u", trial);
            }
            for (std::size_t i = 0; i < tree.node_count() && pass; ++i) {
                const auto& a = tree.node(static_cast<Octree::NodeIndex>(i));
                const auto& b = rebuilt.node(static_cast<Octree::NodeIndex>(i));
                for (int k = 0; k < 2; ++k) {
                    if (a.kinds[k].weight != b.kinds[k].weight
                        || std::abs(a.kinds[k].weighted_position.x
                                    - b.kinds[k].weighted_position.x) > 1e-12
                        || std::abs(a.kinds[k].weighted_position.y
                                    - b.kinds[k].weighted_position.y) > 1e-12
                        || std::abs(a.kinds[k].weighted_position.z
                                    - b.kinds[k].weighted_position.z) > 1e-12) {
                        pass = false;
                        failure = format("rebuild != update, trial %u", trial);
                    }
                }
            }
        }
    }
    report(9, "octree structural invariants", pass,
           pass ? format("1000 populations, %" PRIu64 " neurons total", total_neurons)
                : failure,
           timer.seconds());
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();

    int failed = 0;
    for (const Criterion& c : g_results) {
        if (!c.pass) {
            ++failed;
        }
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failed,
                g_results.size());
    return failed == 0 ? 0 : 1;
}
