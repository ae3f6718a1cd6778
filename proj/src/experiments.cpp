#include "plastree/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>

namespace plastree {

namespace {

// Expected subdivision-bound values, rounded to six significant digits.
struct ReferenceRow {
    double theta;
    double m;
    double log2_m;
    int depth;
    std::uint64_t node_bound;
};

constexpr ReferenceRow kReferenceTable[] = {
    { 0.1, 1.20949, 0.274399, 1, 8 },
    { 0.2, 1.53001, 0.613541, 1, 8 },
    { 0.3, 2.08166, 1.057734, 2, 64 },
    { 0.4, 3.25542, 1.702844, 2, 64 },
    { 0.5, 7.46410, 2.899968, 3, 512 },
};

constexpr double kTableTolerance = 1e-5;

struct CsvFile {
    std::FILE* handle = nullptr;

    explicit CsvFile(const std::string& path) {
        const std::filesystem::path parent = std::filesystem::path(path).parent_path();
        if (!parent.empty()) {
            std::filesystem::create_directories(parent);
        }
        handle = std::fopen(path.c_str(), "w");
        check(handle != nullptr, "cannot open output file " + path);
    }
    ~CsvFile() {
        if (handle != nullptr) {
            std::fclose(handle);
        }
    }
    CsvFile(const CsvFile&) = delete;
    CsvFile& operator=(const CsvFile&) = delete;
};

double max_abs_probability_diff(std::span<const std::pair<NeuronId, double>> a,
                                std::span<const std::pair<NeuronId, double>> b) {
    double worst = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            worst = std::max(worst, std::abs(a[i].second));
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            worst = std::max(worst, std::abs(b[j].second));
            ++j;
        } else {
            worst = std::max(worst, std::abs(a[i].second - b[j].second));
            ++i;
            ++j;
        }
    }
    return worst;
}

// First few proposals present in exactly one of the two sorted multisets.
std::string proposal_diff(std::span<const SynapseProposal> got,
                          std::span<const SynapseProposal> expected, std::size_t limit = 4) {
    std::string diff;
    std::size_t shown = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    char entry[64];
    while ((i < got.size() || j < expected.size()) && shown < limit) {
        if (j == expected.size() || (i < got.size() && got[i] < expected[j])) {
            std::snprintf(entry, sizeof(entry), " +(%u->%u)", got[i].source_id,
                          got[i].target_id);
            diff += entry;
            ++i;
            ++shown;
        } else if (i == got.size() || expected[j] < got[i]) {
            std::snprintf(entry, sizeof(entry), " -(%u->%u)", expected[j].source_id,
                          expected[j].target_id);
            diff += entry;
            ++j;
            ++shown;
        } else {
            ++i;
            ++j;
        }
    }
    return diff;
}

Octree::NodeIndex locate_by_box(const Octree& tree, const Box3& box) {
    Octree::NodeIndex index = tree.root();
    for (;;) {
        const Octree::Node& node = tree.node(index);
        if (node.box == box) {
            return index;
        }
        check(!node.is_leaf(), "locate_by_box: box not present in tree");
        const int octant = node.box.octant_index(box.center());
        const Octree::NodeIndex child = node.children[static_cast<std::size_t>(octant)];
        check(child != Octree::kNone, "locate_by_box: box not present in tree");
        index = child;
    }
}

struct SummaryComparison {
    std::uint64_t compared = 0;
    std::uint64_t weight_mismatches = 0;
    double max_centroid_error = 0.0;

    void compare(const Octree& mono, const Box3& box, bool leaf, NeuronId neuron,
                 std::uint64_t count, const std::array<KindSummary, 2>& kinds) {
        const Octree::Node& reference = mono.node(locate_by_box(mono, box));
        ++compared;
        if (reference.is_leaf() != leaf || (leaf && reference.neuron != neuron)
            || reference.neuron_count != count) {
            ++weight_mismatches;
            return;
        }
        for (std::size_t k = 0; k < 2; ++k) {
            if (reference.kinds[k].weight != kinds[k].weight) {
                ++weight_mismatches;
                continue;
            }
            if (kinds[k].weight > 0) {
                const double err =
                    (reference.kinds[k].centroid() - kinds[k].centroid()).norm();
                max_centroid_error = std::max(max_centroid_error, err);
            }
        }
    }
};

void verify_cluster_against_monolithic(const Cluster& cluster, const Octree& mono,
                                       SummaryComparison& comparison) {
    for (const RankState& rank : cluster.ranks) {
        for (const UpperTree::Node& node : rank.upper.nodes) {
            comparison.compare(mono, node.box, node.leaf, node.neuron, node.neuron_count,
                               node.kinds);
        }
        for (const NodeSummary& summary : rank.remote_pool) {
            comparison.compare(mono, summary.box, summary.leaf, summary.neuron,
                               summary.neuron_count, summary.kinds);
        }
    }
}

} // namespace

// ---- verify-theorems -------------------------------------------------------

std::string depth_label(int depth) {
    switch (depth) {
    case 1: return "Children";
    case 2: return "Grandchildren";
    case 3: return "Great-Grandchildren";
    default: return "depth-" + std::to_string(depth) + " descendants";
    }
}

bool TheoremReport::ok() const {
    for (const TheoremTableRow& row : table) {
        if (!row.ok) {
            return false;
        }
    }
    for (const PropagationCheck& c : propagation) {
        if (c.counterexample.has_value()) {
            return false;
        }
    }
    for (const SubdivisionCheck& c : subdivision) {
        if (c.counterexample.has_value()) {
            return false;
        }
    }
    return true;
}

TheoremReport verify_theorems(std::uint64_t trials, std::uint64_t seed) {
    check(trials > 0, "verify_theorems: trials must be positive");
    TheoremReport report;

    for (const ReferenceRow& reference : kReferenceTable) {
        const Theta theta(reference.theta);
        TheoremTableRow row;
        row.theta = reference.theta;
        row.m = required_m(theta);
        row.log2_m = std::log2(row.m);
        const SubdivisionGuarantee guarantee = subdivision_guarantee(theta);
        row.depth = guarantee.depth;
        row.node_bound = guarantee.node_bound;
        row.m_reference = reference.m;
        row.log2_m_reference = reference.log2_m;
        row.depth_reference = reference.depth;
        row.node_bound_reference = reference.node_bound;
        row.ok = std::abs(row.m - reference.m) <= kTableTolerance
            && std::abs(row.log2_m - reference.log2_m) <= kTableTolerance
            && row.depth == reference.depth && row.node_bound == reference.node_bound;
        report.table.push_back(row);
    }

    const double anywhere_thetas[] = { 0.05, 0.15, 0.25, theta_child_guarantee() };
    for (const double theta : anywhere_thetas) {
        report.propagation.push_back(
            { theta, CentroidPlacement::Anywhere, trials,
              find_ac_counterexample(theta, trials, seed, CentroidPlacement::Anywhere) });
    }
    const double centered_thetas[] = { 0.5, 0.9, 1.0 };
    for (const double theta : centered_thetas) {
        report.propagation.push_back(
            { theta, CentroidPlacement::CenteredQuarter, trials,
              find_ac_counterexample(theta, trials, seed, CentroidPlacement::CenteredQuarter) });
    }

    const std::uint64_t subdivision_trials = std::max<std::uint64_t>(trials / 10, 1);
    const double subdivision_thetas[] = { 0.3, 0.4, 0.5 };
    for (const double theta_value : subdivision_thetas) {
        const Theta theta(theta_value);
        report.subdivision.push_back(
            { theta_value, subdivision_guarantee(theta).depth, subdivision_trials,
              find_subdivision_counterexample(theta, subdivision_trials, seed) });
    }
    return report;
}

void write_theorem_table_csv(const TheoremReport& report, const std::string& path) {
    CsvFile csv(path);
    std::fputs("theta,m,log2_m,guaranteed_depth,node_bound,guaranteed_level\n", csv.handle);
    for (const TheoremTableRow& row : report.table) {
        std::fprintf(csv.handle, "%.2f,%.6f,%.6f,%d,%" PRIu64 ",%s\n", row.theta, row.m,
                     row.log2_m, row.depth, row.node_bound, depth_label(row.depth).c_str());
    }
}

// ---- scaling ---------------------------------------------------------------

ScalingReport run_scaling(const ScalingSpec& spec) {
    check(!spec.sizes.empty(), "run_scaling: need at least one population size");
    std::vector<std::uint32_t> sizes = spec.sizes;
    std::sort(sizes.begin(), sizes.end());
    const Theta theta(spec.theta);

    ScalingReport report;
    for (const std::uint32_t n : sizes) {
        check(n >= 2, "run_scaling: population sizes must be at least 2");
        const Population population = generate_uniform_population(n, spec.seed, spec.profile);
        Octree tree = Octree::build(population, default_bounds());

        SearchConfig config;
        config.theta = theta;
        config.kernel_sigma = spec.sigma;
        config.rng_seed = spec.seed;
        const UpdateResult result = connectivity_update(population, tree, config);

        ScalingRow row;
        row.n = n;
        row.theta = spec.theta;
        row.mean_first = result.stats.mean_first_inspected();
        row.mean_subsequent = result.stats.mean_subsequent_inspected();
        row.subsequent_max_inspected = result.stats.subsequent_inspected_max;
        row.subsequent_max_pushes = result.stats.subsequent_pushes_max;
        row.total_work = result.stats.total_work;
        const double log2n = std::log2(static_cast<double>(n));
        row.work_per_n_logn = static_cast<double>(row.total_work) / (n * log2n);
        row.work_per_n_log2n = static_cast<double>(row.total_work) / (n * log2n * log2n);
        report.rows.push_back(row);
    }

    if (report.rows.size() >= 2) {
        std::vector<double> x;
        std::vector<double> first;
        std::vector<double> subsequent;
        std::vector<double> work_per_n;
        for (const ScalingRow& row : report.rows) {
            x.push_back(std::log2(static_cast<double>(row.n)));
            first.push_back(row.mean_first);
            subsequent.push_back(row.mean_subsequent);
            work_per_n.push_back(static_cast<double>(row.total_work) / row.n);
        }
        report.first_fit = fit_line(x, first);
        report.subsequent_fit = fit_line(x, subsequent);
        report.work_fit = fit_line(x, work_per_n);

        double lo = report.rows.front().work_per_n_logn;
        double hi = lo;
        bool monotone = true;
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            lo = std::min(lo, report.rows[i].work_per_n_logn);
            hi = std::max(hi, report.rows[i].work_per_n_logn);
            if (i > 0
                && report.rows[i].work_per_n_log2n >= report.rows[i - 1].work_per_n_log2n) {
                monotone = false;
            }
        }
        report.work_logn_ratio = hi / lo;
        report.work_log2n_monotone_down = monotone;
    }
    return report;
}

void write_scaling_csv(std::span<const ScalingReport> reports, const std::string& path) {
    CsvFile csv(path);
    std::fputs("n,theta,mean_first_descent,mean_subsequent_descent,total_work,"
               "work_fit_slope,work_fit_intercept,work_fit_r2\n",
               csv.handle);
    for (const ScalingReport& report : reports) {
        for (const ScalingRow& row : report.rows) {
            std::fprintf(csv.handle, "%u,%.6g,%.9g,%.9g,%" PRIu64 ",%.9g,%.9g,%.9g\n", row.n,
                         row.theta, row.mean_first, row.mean_subsequent, row.total_work,
                         report.work_fit.slope, report.work_fit.intercept,
                         report.work_fit.r2);
        }
    }
}

void write_scaling_csv(const ScalingReport& report, const std::string& path) {
    write_scaling_csv(std::span<const ScalingReport>(&report, 1), path);
}

// ---- distributed -----------------------------------------------------------

bool DistributedReport::ok() const {
    return proposals_invariant && exchange_counts_exact && weight_mismatches == 0
        && max_centroid_error <= 1e-9;
}

DistributedReport run_distributed(const DistributedSpec& spec) {
    check(!spec.ranks.empty(), "run_distributed: need at least one rank count");
    check(spec.steps >= 1, "run_distributed: need at least one step");

    const Population base_population = spec.population_file.empty()
        ? generate_uniform_population(spec.n, spec.seed)
        : load_population(spec.population_file);

    SearchConfig config;
    config.theta = Theta(spec.theta);
    config.kernel_sigma = spec.sigma;
    config.rng_seed = spec.seed;

    // Monolithic mirror, one tree snapshot per step for summary verification.
    std::vector<std::vector<SynapseProposal>> mono_proposals(spec.steps);
    std::vector<std::vector<SynapseProposal>> mono_formed(spec.steps);
    std::vector<Octree> mono_trees;
    {
        Population population = base_population;
        Octree tree = Octree::build(population, default_bounds());
        for (std::uint32_t step = 0; step < spec.steps; ++step) {
            config.step = step;
            UpdateResult result = connectivity_update(population, tree, config);
            mono_trees.push_back(tree); // state the searches of this step saw
            std::sort(result.proposals.begin(), result.proposals.end());
            ResolveResult resolved =
                resolve_proposals(result.proposals, population, spec.seed, step);
            std::sort(resolved.formed.begin(), resolved.formed.end());
            mono_proposals[step] = std::move(result.proposals);
            mono_formed[step] = std::move(resolved.formed);
        }
    }

    DistributedReport report;
    report.proposals_invariant = true;
    report.exchange_counts_exact = true;
    SummaryComparison comparison;

    for (const std::uint32_t p : spec.ranks) {
        Cluster cluster = partition(base_population, default_bounds(), p);
        DistributedReport::PerP per_p;
        per_p.p = p;
        per_p.proposals_match_monolithic = true;

        std::vector<std::uint64_t> messages_before(p, 0);
        std::vector<std::uint64_t> downloads_before(p, 0);
        std::vector<std::uint64_t> work_before(p, 0);

        for (std::uint32_t step = 0; step < spec.steps; ++step) {
            config.step = step;
            const Octree& mono_tree = mono_trees[step];
            PreDiscardHook hook = [&](const Cluster& state) {
                if (spec.verify_summaries) {
                    verify_cluster_against_monolithic(state, mono_tree, comparison);
                }
            };
            const std::uint64_t pairwise_before = cluster.exchange_messages_pairwise;
            const std::uint64_t broadcast_before = cluster.exchange_messages_broadcast;

            DistributedUpdateResult result =
                distributed_connectivity_update(cluster, config, &hook);

            if (result.proposals != mono_proposals[step]
                || result.formed != mono_formed[step]) {
                report.proposals_invariant = false;
                per_p.proposals_match_monolithic = false;
                if (per_p.mismatch_diff.empty()) {
                    per_p.mismatch_diff =
                        proposal_diff(result.proposals, mono_proposals[step]);
                }
            }
            const std::uint64_t pairwise =
                cluster.exchange_messages_pairwise - pairwise_before;
            const std::uint64_t broadcast =
                cluster.exchange_messages_broadcast - broadcast_before;
            if (pairwise != static_cast<std::uint64_t>(p) * (p - 1)
                || broadcast != p) {
                report.exchange_counts_exact = false;
            }

            for (std::uint32_t r = 0; r < p; ++r) {
                const RankState& rank = cluster.ranks[r];
                report.rows.push_back({ p, r, step,
                                        rank.messages_sent - messages_before[r],
                                        rank.nodes_downloaded - downloads_before[r],
                                        rank.local_work - work_before[r] });
                messages_before[r] = rank.messages_sent;
                downloads_before[r] = rank.nodes_downloaded;
                work_before[r] = rank.local_work;
            }
        }

        per_p.exchange_pairwise = cluster.exchange_messages_pairwise;
        per_p.exchange_broadcast = cluster.exchange_messages_broadcast;
        std::uint64_t total_work = 0;
        for (const RankState& rank : cluster.ranks) {
            total_work += rank.local_work;
            per_p.nodes_downloaded += rank.nodes_downloaded;
        }
        per_p.mean_local_work = static_cast<double>(total_work) / p;
        report.per_p.push_back(per_p);
    }

    report.summaries_compared = comparison.compared;
    report.weight_mismatches = comparison.weight_mismatches;
    report.max_centroid_error = comparison.max_centroid_error;
    return report;
}

void write_rank_counter_csv(const DistributedReport& report, const std::string& path) {
    CsvFile csv(path);
    std::fputs("p,rank,step,messages_sent,nodes_downloaded,local_work\n", csv.handle);
    for (const RankCounterRow& row : report.rows) {
        std::fprintf(csv.handle, "%u,%u,%u,%" PRIu64 ",%" PRIu64 ",%" PRIu64 "\n", row.p,
                     row.rank, row.step, row.messages_sent, row.nodes_downloaded,
                     row.local_work);
    }
}

// ---- compare-oracle --------------------------------------------------------

OracleReport run_compare_oracle(const OracleSpec& spec) {
    check(spec.n >= 2, "run_compare_oracle: population too small");
    OracleReport report;
    report.draws = spec.draws;

    KeyedStream meta(spec.seed, RngDomain::Scenario, 0xE0);
    for (std::uint32_t i = 0; i < spec.populations; ++i) {
        const std::uint64_t sub_seed = meta.next_bits();
        KeyedStream sizer(sub_seed, RngDomain::Scenario, 1);
        const std::uint32_t size = 2 + sizer.next_index(spec.n - 1);

        Population population = generate_uniform_population(size, sub_seed);
        for (Neuron& neuron : population) {
            KeyedStream vacancies(sub_seed, RngDomain::Scenario, 2, neuron.id);
            neuron.set_vacant(ElementKind::Axon, vacancies.next_index(3));
            neuron.set_vacant(ElementKind::Dendrite, vacancies.next_index(4));
        }
        Octree tree = Octree::build(population, default_bounds());
        const Neuron& searcher = population[sizer.next_index(size)];

        SearchConfig config;
        config.oracle_mode = true;
        config.kernel_sigma = spec.sigma;
        config.rng_seed = sub_seed;
        MonolithicView view(tree);
        const TargetDistribution bh = bh_target_distribution(view, searcher, config);
        const CandidateDistribution naive =
            naive_distribution(searcher, population, ElementKind::Dendrite, spec.sigma);
        report.max_abs_probability_error =
            std::max(report.max_abs_probability_error,
                     max_abs_probability_diff(bh.probabilities, naive.probabilities));
        ++report.populations_checked;
    }

    // Approximation quality at theta 0.25 against the exact reference, both as
    // the noise-free recursive distribution and as an empirical sample.
    const Population population = generate_uniform_population(spec.n, spec.seed);
    Octree tree = Octree::build(population, default_bounds());
    const Neuron& searcher = population[spec.n / 2];
    const CandidateDistribution naive =
        naive_distribution(searcher, population, ElementKind::Dendrite, spec.tv_sigma);

    SearchConfig config;
    config.kernel_sigma = spec.tv_sigma;
    config.rng_seed = spec.seed;
    MonolithicView view(tree);

    config.theta = Theta(0.25);
    report.tv_exact_theta025 = tv_distance(
        bh_target_distribution(view, searcher, config).probabilities, naive.probabilities);
    config.theta = Theta(0.5);
    report.tv_exact_theta05 = tv_distance(
        bh_target_distribution(view, searcher, config).probabilities, naive.probabilities);

    config.theta = Theta(0.25);
    std::map<NeuronId, std::uint64_t> counts;
    SearchScratch<MonolithicView> scratch;
    DescentStats stats;
    for (std::uint64_t draw = 0; draw < spec.draws; ++draw) {
        config.step = static_cast<std::uint32_t>(draw);
        const auto proposal = find_target(view, searcher, config, 0, stats, scratch);
        if (proposal.has_value()) {
            ++counts[proposal->target_id];
        }
    }
    std::vector<std::pair<NeuronId, double>> empirical;
    empirical.reserve(counts.size());
    for (const auto& [id, count] : counts) {
        empirical.emplace_back(id,
                               static_cast<double>(count) / static_cast<double>(spec.draws));
    }
    report.tv_empirical_theta025 = tv_distance(empirical, naive.probabilities);
    return report;
}

void write_oracle_csv(const OracleReport& report, const std::string& path) {
    CsvFile csv(path);
    std::fputs("populations_checked,max_abs_probability_error,draws,"
               "tv_empirical_theta025,tv_exact_theta025,tv_exact_theta05\n",
               csv.handle);
    std::fprintf(csv.handle, "%u,%.6e,%" PRIu64 ",%.9g,%.9g,%.9g\n",
                 report.populations_checked, report.max_abs_probability_error, report.draws,
                 report.tv_empirical_theta025, report.tv_exact_theta025,
                 report.tv_exact_theta05);
}

// ---- simulate --------------------------------------------------------------

SimulateSummary run_simulate(const SimulateSpec& spec) {
    check(spec.steps >= 1, "run_simulate: need at least one step");
    Population population = spec.population_file.empty()
        ? generate_uniform_population(spec.n, spec.seed)
        : load_population(spec.population_file);
    check(population.size() >= 2, "run_simulate: population must hold at least 2 neurons");
    const std::uint32_t n = static_cast<std::uint32_t>(population.size());

    SearchConfig config;
    config.theta = Theta(spec.theta);
    config.kernel_sigma = spec.sigma;
    config.rng_seed = spec.seed;

    std::unique_ptr<CsvFile> stats_csv;
    std::unique_ptr<CsvFile> aggregate_csv;
    std::unique_ptr<CsvFile> rank_csv;
    if (!spec.out_dir.empty()) {
        const std::filesystem::path out(spec.out_dir);
        std::filesystem::create_directories(out);
        aggregate_csv = std::make_unique<CsvFile>((out / "aggregate.csv").string());
        std::fputs("n,theta,mean_first,mean_subsequent,total_work\n", aggregate_csv->handle);
        if (spec.ranks == 1) {
            stats_csv = std::make_unique<CsvFile>((out / "stats.csv").string());
            std::fputs("step,neuron_id,descent_index,nodes_inspected,stack_pushes\n",
                       stats_csv->handle);
        } else {
            rank_csv = std::make_unique<CsvFile>((out / "rank_counters.csv").string());
            std::fputs("p,rank,step,messages_sent,nodes_downloaded,local_work\n",
                       rank_csv->handle);
        }
    }

    SimulateSummary summary;
    const auto write_aggregate = [&](const AggregateStats& stats) {
        if (aggregate_csv != nullptr) {
            std::fprintf(aggregate_csv->handle, "%u,%.6g,%.9g,%.9g,%" PRIu64 "\n", n,
                         spec.theta, stats.mean_first_inspected(),
                         stats.mean_subsequent_inspected(), stats.total_work);
        }
        summary.total_work += stats.total_work;
    };

    if (spec.ranks == 1) {
        Octree tree = Octree::build(population, default_bounds());
        for (std::uint32_t step = 0; step < spec.steps; ++step) {
            config.step = step;
            DescentSink sink = [&](NeuronId neuron, std::uint32_t, const DescentStats& d) {
                if (stats_csv == nullptr) {
                    return;
                }
                std::fprintf(stats_csv->handle, "%u,%u,0,%" PRIu64 ",%" PRIu64 "\n", step,
                             neuron, d.first_descent.nodes_inspected,
                             d.first_descent.stack_pushes);
                for (std::size_t i = 0; i < d.subsequent_descents.size(); ++i) {
                    std::fprintf(stats_csv->handle,
                                 "%u,%u,%zu,%" PRIu64 ",%" PRIu64 "\n", step, neuron, i + 1,
                                 d.subsequent_descents[i].nodes_inspected,
                                 d.subsequent_descents[i].stack_pushes);
                }
            };
            const UpdateResult result = connectivity_update(population, tree, config, &sink);
            const ResolveResult resolved =
                resolve_proposals(result.proposals, population, spec.seed, step);
            summary.proposals += result.proposals.size();
            summary.formed += resolved.formed.size();
            summary.unmatched += resolved.unmatched.size();
            write_aggregate(result.stats);
        }
        return summary;
    }

    Cluster cluster = partition(population, default_bounds(), spec.ranks);
    std::vector<std::uint64_t> messages_before(spec.ranks, 0);
    std::vector<std::uint64_t> downloads_before(spec.ranks, 0);
    std::vector<std::uint64_t> work_before(spec.ranks, 0);
    for (std::uint32_t step = 0; step < spec.steps; ++step) {
        config.step = step;
        const DistributedUpdateResult result = distributed_connectivity_update(cluster, config);
        summary.proposals += result.proposals.size();
        summary.formed += result.formed.size();
        summary.unmatched += result.unmatched.size();
        write_aggregate(result.stats);
        if (rank_csv != nullptr) {
            for (std::uint32_t r = 0; r < spec.ranks; ++r) {
                const RankState& rank = cluster.ranks[r];
                std::fprintf(rank_csv->handle,
                             "%u,%u,%u,%" PRIu64 ",%" PRIu64 ",%" PRIu64 "\n", spec.ranks, r,
                             step, rank.messages_sent - messages_before[r],
                             rank.nodes_downloaded - downloads_before[r],
                             rank.local_work - work_before[r]);
                messages_before[r] = rank.messages_sent;
                downloads_before[r] = rank.nodes_downloaded;
                work_before[r] = rank.local_work;
            }
        }
    }
    return summary;
}

} // namespace plastree
