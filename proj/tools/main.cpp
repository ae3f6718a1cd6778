// Command-line harness: theorem checks, complexity experiments, distributed
// equivalence runs, oracle comparisons, and plain simulation with CSV output.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plastree/experiments.hpp"

namespace {

using namespace plastree;

std::string join_out(const std::string& dir, const char* file) {
    return (std::filesystem::path(dir) / file).string();
}

int cmd_verify_theorems(std::uint64_t trials, std::uint64_t seed, const std::string& out) {
    const TheoremReport report = verify_theorems(trials, seed);

    std::printf("theta      m         log2(m)   guaranteed              nodes\n");
    for (const TheoremTableRow& row : report.table) {
        std::printf("%-10.2f %-9.5f %-9.6f %-23s %-6" PRIu64 "%s\n", row.theta, row.m,
                    row.log2_m, depth_label(row.depth).c_str(), row.node_bound,
                    row.ok ? "" : "  MISMATCH");
    }
    for (const PropagationCheck& c : report.propagation) {
        const char* placement =
            c.placement == CentroidPlacement::Anywhere ? "anywhere" : "centered-quarter";
        if (c.counterexample.has_value()) {
            const AcCounterexample& ce = *c.counterexample;
            std::printf("ac-propagation theta=%.6f %s: COUNTEREXAMPLE at trial %" PRIu64 "\n"
                        "  box min=(%.17g,%.17g,%.17g) side=(%.17g,%.17g,%.17g)\n"
                        "  p=(%.17g,%.17g,%.17g) p'=(%.17g,%.17g,%.17g)\n"
                        "  q=(%.17g,%.17g,%.17g) parent_ratio=%.17g child_ratio=%.17g\n",
                        c.theta, placement, ce.trial, ce.box.min.x, ce.box.min.y, ce.box.min.z,
                        ce.box.side.x, ce.box.side.y, ce.box.side.z, ce.parent_centroid.x,
                        ce.parent_centroid.y, ce.parent_centroid.z, ce.child_centroid.x,
                        ce.child_centroid.y, ce.child_centroid.z, ce.query.x, ce.query.y,
                        ce.query.z, ce.parent_ratio, ce.child_ratio);
        } else {
            std::printf("ac-propagation theta=%.6f %s: no counterexample in %" PRIu64
                        " trials\n",
                        c.theta, placement, c.trials);
        }
    }
    for (const SubdivisionCheck& c : report.subdivision) {
        if (c.counterexample.has_value()) {
            const SubdivisionCounterexample& ce = *c.counterexample;
            std::printf("m-subdivision theta=%.2f depth=%d: COUNTEREXAMPLE at trial %" PRIu64
                        " (ratio %.17g)\n",
                        c.theta, c.depth, ce.trial, ce.descendant_ratio);
        } else {
            std::printf("m-subdivision theta=%.2f depth=%d: no counterexample in %" PRIu64
                        " trials\n",
                        c.theta, c.depth, c.trials);
        }
    }
    if (!out.empty()) {
        write_theorem_table_csv(report, join_out(out, "theorem_table.csv"));
    }
    std::printf("verify-theorems: %s\n", report.ok() ? "OK" : "FAILED");
    return report.ok() ? 0 : 1;
}

int cmd_scaling(ScalingSpec spec, const std::vector<double>& thetas, const std::string& out) {
    std::vector<ScalingReport> reports;
    bool ok = true;
    for (const double theta : thetas) {
        spec.theta = theta;
        const ScalingReport report = run_scaling(spec);
        std::printf("theta=%.4g\n", theta);
        std::printf("n        mean_first  mean_subseq  max_subseq  max_push  total_work"
                    "  w/nlogn\n");
        for (const ScalingRow& row : report.rows) {
            std::printf("%-8u %-11.3f %-12.4f %-11" PRIu64 " %-9" PRIu64 " %-11" PRIu64
                        " %.3f\n",
                        row.n, row.mean_first, row.mean_subsequent,
                        row.subsequent_max_inspected, row.subsequent_max_pushes,
                        row.total_work, row.work_per_n_logn);
        }
        std::printf("first-descent fit vs log2(n): slope=%.4f intercept=%.4f r2=%.4f\n",
                    report.first_fit.slope, report.first_fit.intercept, report.first_fit.r2);
        std::printf("subsequent fit vs log2(n):    slope=%.4f\n",
                    report.subsequent_fit.slope);
        std::printf("work/(n log2 n) max/min:      %.4f\n", report.work_logn_ratio);

        const std::uint64_t bound = subdivision_guarantee(Theta(theta)).node_bound;
        for (const ScalingRow& row : report.rows) {
            if (row.subsequent_max_inspected > bound) {
                std::printf("FAIL: n=%u subsequent descent inspected %" PRIu64
                            " > bound %" PRIu64 "\n",
                            row.n, row.subsequent_max_inspected, bound);
                ok = false;
            }
            if (theta <= theta_child_guarantee() && row.subsequent_max_pushes != 0) {
                std::printf("FAIL: n=%u subsequent descent pushed %" PRIu64 " nodes\n", row.n,
                            row.subsequent_max_pushes);
                ok = false;
            }
        }
        if (report.rows.size() >= 4) {
            if (std::abs(report.subsequent_fit.slope) > 0.05) {
                std::printf("FAIL: subsequent-descent slope %.4f exceeds 0.05\n",
                            report.subsequent_fit.slope);
                ok = false;
            }
            if (report.first_fit.r2 < 0.9) {
                std::printf("FAIL: first-descent log fit r2=%.4f below 0.9\n",
                            report.first_fit.r2);
                ok = false;
            }
        }
        reports.push_back(report);
    }
    if (!out.empty()) {
        write_scaling_csv(reports, join_out(out, "scaling.csv"));
    }
    std::printf("scaling: %s\n", ok ? "OK" : "FAILED");
    return ok ? 0 : 1;
}

int cmd_distributed(const DistributedSpec& spec, const std::string& out) {
    const DistributedReport report = run_distributed(spec);
    for (const DistributedReport::PerP& per : report.per_p) {
        std::printf("p=%-4u exchange pairwise=%-8" PRIu64 " broadcast=%-6" PRIu64
                    " mean_local_work=%-12.1f downloads=%-8" PRIu64 " proposals %s%s\n",
                    per.p, per.exchange_pairwise, per.exchange_broadcast, per.mean_local_work,
                    per.nodes_downloaded,
                    per.proposals_match_monolithic ? "match" : "DIFFER:",
                    per.mismatch_diff.c_str());
    }
    std::printf("fetched summaries compared: %" PRIu64 " (weight mismatches %" PRIu64
                ", max centroid error %.3g)\n",
                report.summaries_compared, report.weight_mismatches,
                report.max_centroid_error);
    if (!out.empty()) {
        write_rank_counter_csv(report, join_out(out, "rank_counters.csv"));
    }
    std::printf("distributed: %s\n", report.ok() ? "OK" : "FAILED");
    return report.ok() ? 0 : 1;
}

int cmd_compare_oracle(const OracleSpec& spec, const std::string& out) {
    const OracleReport report = run_compare_oracle(spec);
    std::printf("oracle exactness: %u populations, max |dp| = %.3e\n",
                report.populations_checked, report.max_abs_probability_error);
    std::printf("theta=0.25: TV(empirical %" PRIu64 " draws) = %.5f, TV(exact) = %.5f\n",
                report.draws, report.tv_empirical_theta025, report.tv_exact_theta025);
    std::printf("theta=0.50: TV(exact) = %.5f\n", report.tv_exact_theta05);
    if (!out.empty()) {
        write_oracle_csv(report, join_out(out, "oracle.csv"));
    }
    std::printf("compare-oracle: %s\n", report.exactness_ok() ? "OK" : "FAILED");
    return report.exactness_ok() ? 0 : 1;
}

int cmd_simulate(const SimulateSpec& spec) {
    const SimulateSummary summary = run_simulate(spec);
    std::printf("proposals=%" PRIu64 " formed=%" PRIu64 " unmatched=%" PRIu64
                " total_work=%" PRIu64 "\n",
                summary.proposals, summary.formed, summary.unmatched, summary.total_work);
    return 0;
}

// Flat key=value config file: '#' comments and blank lines ignored. Values
// are applied before flag parsing, so flags of the same name override them.
std::map<std::string, std::string> load_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) {
        throw plastree::SimError("cannot open config file " + path);
    }
    std::map<std::string, std::string> values;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw plastree::SimError("config line is not key=value: " + line);
        }
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return values;
}

std::vector<std::uint32_t> parse_u32_list(const std::string& text) {
    std::vector<std::uint32_t> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        values.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    }
    return values;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app("synapse-target search simulator (Barnes-Hut structural plasticity)");
    app.require_subcommand(1);

    std::string out;
    std::uint64_t seed = 1;
    std::string config_path;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out, "output directory for CSV files")
            ->envname("PLASTREE_OUT_DIR");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--config", config_path,
                        "flat key=value config file; flags override");
    };

    // verify-theorems
    auto* verify = app.add_subcommand("verify-theorems",
                                      "check the acceptance-criterion theorems and the "
                                      "subdivision table");
    add_common(verify);
    std::uint64_t trials = 1000000;
    verify->add_option("--trials", trials, "randomized trials per theta");

    // scaling
    auto* scaling = app.add_subcommand("scaling", "work-counter sweep over population sizes");
    add_common(scaling);
    ScalingSpec scaling_spec;
    scaling_spec.sizes = { 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072 };
    std::vector<double> scaling_thetas = { 0.25 };
    scaling->add_option("--n", scaling_spec.sizes, "population sizes")->delimiter(',');
    scaling->add_option("--theta", scaling_thetas, "acceptance criteria")->delimiter(',');
    scaling->add_option("--sigma", scaling_spec.sigma, "attraction kernel width");

    // distributed
    auto* distributed = app.add_subcommand("distributed",
                                           "simulated-rank equivalence and counters");
    add_common(distributed);
    DistributedSpec dist_spec;
    dist_spec.ranks = { 1, 8, 64 };
    distributed->add_option("--n", dist_spec.n, "population size");
    distributed->add_option("--ranks", dist_spec.ranks, "rank counts")->delimiter(',');
    distributed->add_option("--theta", dist_spec.theta, "acceptance criterion");
    distributed->add_option("--sigma", dist_spec.sigma, "attraction kernel width");
    distributed->add_option("--steps", dist_spec.steps, "update steps");
    distributed->add_option("--population,--population_file", dist_spec.population_file,
                            "population file (overrides --n)");

    // compare-oracle
    auto* oracle = app.add_subcommand("compare-oracle",
                                      "naive-reference exactness and TV distances");
    add_common(oracle);
    OracleSpec oracle_spec;
    oracle->add_option("--n", oracle_spec.n, "population size cap");
    oracle->add_option("--trials", oracle_spec.populations, "random populations to check");
    oracle->add_option("--draws", oracle_spec.draws, "empirical draws for the TV estimate");
    oracle->add_option("--sigma", oracle_spec.sigma, "kernel width for the exactness sweep");
    oracle->add_option("--tv-sigma", oracle_spec.tv_sigma,
                       "kernel width for the TV measurement");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run update steps and emit CSV stats");
    add_common(simulate);
    SimulateSpec sim_spec;
    simulate->add_option("--n", sim_spec.n, "population size");
    simulate->add_option("--population,--population_file", sim_spec.population_file,
                         "population file (overrides --n)");
    simulate->add_option("--ranks", sim_spec.ranks, "simulated rank count");
    simulate->add_option("--theta", sim_spec.theta, "acceptance criterion");
    simulate->add_option("--sigma", sim_spec.sigma, "attraction kernel width");
    simulate->add_option("--steps", sim_spec.steps, "update steps");

    // Apply config-file values as defaults before flags are parsed.
    try {
        std::string pre_config;
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc) {
                pre_config = argv[i + 1];
            } else if (arg.rfind("--config=", 0) == 0) {
                pre_config = arg.substr(9);
            }
        }
        if (!pre_config.empty()) {
            for (const auto& [key, value] : load_flat_config(pre_config)) {
                if (key == "seed") {
                    seed = std::stoull(value);
                } else if (key == "out") {
                    out = value;
                } else if (key == "trials") {
                    trials = std::stoull(value);
                    oracle_spec.populations = static_cast<std::uint32_t>(trials);
                } else if (key == "theta") {
                    dist_spec.theta = sim_spec.theta = std::stod(value);
                    scaling_thetas.clear();
                    std::stringstream thetas(value);
                    std::string item;
                    while (std::getline(thetas, item, ',')) {
                        scaling_thetas.push_back(std::stod(item));
                    }
                } else if (key == "sigma") {
                    scaling_spec.sigma = dist_spec.sigma = sim_spec.sigma =
                        oracle_spec.sigma = std::stod(value);
                } else if (key == "tv_sigma") {
                    oracle_spec.tv_sigma = std::stod(value);
                } else if (key == "n") {
                    const auto sizes = parse_u32_list(value);
                    scaling_spec.sizes = sizes;
                    dist_spec.n = oracle_spec.n = sim_spec.n = sizes.front();
                } else if (key == "ranks") {
                    dist_spec.ranks = parse_u32_list(value);
                    sim_spec.ranks = dist_spec.ranks.front();
                } else if (key == "steps") {
                    dist_spec.steps = sim_spec.steps =
                        static_cast<std::uint32_t>(std::stoul(value));
                } else if (key == "draws") {
                    oracle_spec.draws = std::stoull(value);
                } else if (key == "population" || key == "population_file") {
                    dist_spec.population_file = sim_spec.population_file = value;
                } else {
                    std::fprintf(stderr, "error: unknown config key '%s'\n", key.c_str());
                    return 2;
                }
            }
        }
    } catch (const std::exception& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 2;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            return cmd_verify_theorems(trials, seed, out);
        }
        if (scaling->parsed()) {
            scaling_spec.seed = seed;
            return cmd_scaling(scaling_spec, scaling_thetas, out);
        }
        if (distributed->parsed()) {
            dist_spec.seed = seed;
            return cmd_distributed(dist_spec, out);
        }
        if (oracle->parsed()) {
            oracle_spec.seed = seed;
            return cmd_compare_oracle(oracle_spec, out);
        }
        if (simulate->parsed()) {
            sim_spec.seed = seed;
            sim_spec.out_dir = out;
            return cmd_simulate(sim_spec);
        }
    } catch (const plastree::SimError& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 2;
    }
    return 0;
}
