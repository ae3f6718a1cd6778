#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plastree/distributed.hpp"
#include "plastree/oracle.hpp"
#include "plastree/stats.hpp"

namespace plastree {

// Desk-scale experiments behind the CLI; the acceptance suite drives the same
// runners with its pinned parameters.

// ---- verify-theorems -------------------------------------------------------

struct TheoremTableRow {
    double theta = 0.0;
    double m = 0.0;
    double log2_m = 0.0;
    int depth = 0;
    std::uint64_t node_bound = 0;
    double m_reference = 0.0; // expected value, six significant digits
    double log2_m_reference = 0.0;
    int depth_reference = 0;
    std::uint64_t node_bound_reference = 0;
    bool ok = false;
};

struct PropagationCheck {
    double theta = 0.0;
    CentroidPlacement placement = CentroidPlacement::Anywhere;
    std::uint64_t trials = 0;
    std::optional<AcCounterexample> counterexample;
};

struct SubdivisionCheck {
    double theta = 0.0;
    int depth = 0;
    std::uint64_t trials = 0;
    std::optional<SubdivisionCounterexample> counterexample;
};

struct TheoremReport {
    std::vector<TheoremTableRow> table;
    std::vector<PropagationCheck> propagation;
    std::vector<SubdivisionCheck> subdivision;
    bool ok() const;
};

TheoremReport verify_theorems(std::uint64_t trials, std::uint64_t seed);
void write_theorem_table_csv(const TheoremReport& report, const std::string& path);
std::string depth_label(int depth);

// ---- scaling ---------------------------------------------------------------

struct ScalingSpec {
    std::vector<std::uint32_t> sizes;
    double theta = 0.25;
    double sigma = 750.0;
    std::uint64_t seed = 1;
    VacancyProfile profile;
};

struct ScalingRow {
    std::uint32_t n = 0;
    double theta = 0.0;
    double mean_first = 0.0;
    double mean_subsequent = 0.0;
    std::uint64_t subsequent_max_inspected = 0;
    std::uint64_t subsequent_max_pushes = 0;
    std::uint64_t total_work = 0;
    double work_per_n_logn = 0.0;
    double work_per_n_log2n = 0.0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows; // sorted by n
    LinearFit first_fit;          // mean_first vs log2 n
    LinearFit subsequent_fit;     // mean_subsequent vs log2 n
    LinearFit work_fit;           // total_work / n vs log2 n
    double work_logn_ratio = 0.0; // max/min of total_work/(n log2 n)
    bool work_log2n_monotone_down = false;
};

ScalingReport run_scaling(const ScalingSpec& spec);
void write_scaling_csv(const ScalingReport& report, const std::string& path);
// One file for a whole theta sweep; each row carries its own theta's fit.
void write_scaling_csv(std::span<const ScalingReport> reports, const std::string& path);

// ---- distributed -----------------------------------------------------------

struct DistributedSpec {
    std::uint32_t n = 4096;
    std::string population_file; // overrides n when set
    std::vector<std::uint32_t> ranks = { 1, 8 };
    double theta = 0.25;
    double sigma = 750.0;
    std::uint64_t seed = 1;
    std::uint32_t steps = 1;
    bool verify_summaries = true;
};

struct RankCounterRow {
    std::uint32_t p = 0;
    std::uint32_t rank = 0;
    std::uint32_t step = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t nodes_downloaded = 0;
    std::uint64_t local_work = 0;
};

struct DistributedReport {
    struct PerP {
        std::uint32_t p = 0;
        std::uint64_t exchange_pairwise = 0;   // summed over steps
        std::uint64_t exchange_broadcast = 0;
        double mean_local_work = 0.0;          // per rank, summed over steps
        std::uint64_t nodes_downloaded = 0;
        bool proposals_match_monolithic = false;
        std::string mismatch_diff; // first differing proposals, when any
    };

    std::vector<RankCounterRow> rows;
    std::vector<PerP> per_p;
    bool proposals_invariant = false;  // identical multiset for every p
    bool exchange_counts_exact = false; // pairwise p(p-1), broadcast p, per step
    std::uint64_t summaries_compared = 0;
    std::uint64_t weight_mismatches = 0;
    double max_centroid_error = 0.0;
    bool ok() const;
};

DistributedReport run_distributed(const DistributedSpec& spec);
void write_rank_counter_csv(const DistributedReport& report, const std::string& path);

// ---- compare-oracle --------------------------------------------------------

struct OracleSpec {
    std::uint32_t n = 1000;
    std::uint32_t populations = 100; // for the exactness sweep
    std::uint64_t draws = 100000;
    double sigma = 750.0;    // exactness sweep kernel
    double tv_sigma = 150.0; // kernel for the empirical TV measurement
    std::uint64_t seed = 1;
};

struct OracleReport {
    double max_abs_probability_error = 0.0; // oracle_mode vs naive
    std::uint32_t populations_checked = 0;
    double tv_empirical_theta025 = 0.0; // draws sampled at theta = 0.25
    double tv_exact_theta025 = 0.0;     // recursion vs naive, no sampling noise
    double tv_exact_theta05 = 0.0;      // reported only; coarser approximation
    std::uint64_t draws = 0;

    bool exactness_ok() const { return max_abs_probability_error <= 1e-12; }
};

OracleReport run_compare_oracle(const OracleSpec& spec);
void write_oracle_csv(const OracleReport& report, const std::string& path);

// ---- simulate --------------------------------------------------------------

struct SimulateSpec {
    std::uint32_t n = 1000;
    std::string population_file;
    std::uint32_t ranks = 1;
    double theta = 0.25;
    double sigma = 750.0;
    std::uint64_t seed = 1;
    std::uint32_t steps = 1;
    std::string out_dir; // stats.csv, aggregate.csv, rank_counters.csv
};

struct SimulateSummary {
    std::uint64_t proposals = 0;
    std::uint64_t formed = 0;
    std::uint64_t unmatched = 0;
    std::uint64_t total_work = 0;
};

SimulateSummary run_simulate(const SimulateSpec& spec);

} // namespace plastree
