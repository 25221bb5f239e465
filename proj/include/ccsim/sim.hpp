#ifndef CCSIM_SIM_HPP
#define CCSIM_SIM_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "ccsim/analysis.hpp"
#include "ccsim/delivery.hpp"
#include "ccsim/model.hpp"
#include "ccsim/placement.hpp"

namespace ccsim {

enum class Policy {
    Rap,            // bound-optimized caching distribution
    RandomLfu,      // uniform over a popular-file cutoff (explicit or searched)
    Lfu,            // cutoff = ceil(M)
    Uniform,        // cutoff = m
    NaiveMulticast, // no caching at all
};

enum class PlacementMode {
    FreshPerTrial,      // re-run the placement for every demand draw
    FixedPerExperiment, // place once, vary only the demands
};

inline constexpr std::size_t kDefaultVertexGuard = 2'000'000;

struct ExperimentSpec {
    SystemParams sys;
    std::optional<double> zipf_alpha;                 // exactly one of these two
    std::optional<std::vector<double>> explicit_probs;

    Policy policy = Policy::RandomLfu;
    std::optional<int> top_files; // RandomLfu cutoff; empty = 1-D search

    int trials = 200;
    PlacementMode placement = PlacementMode::FreshPerTrial;
    ColoringPolicy coloring;
    bool verify_decode = true;
    std::size_t symbol_bytes = 32;
    std::size_t vertex_guard = kDefaultVertexGuard;
    int threads = 0; // 0 = hardware concurrency
    long rap_budget = 50000;
    bool keep_trial_rates = true;

    void validate() const;
    PopularityDist popularity() const;
};

struct ExperimentResult {
    double mean_rate = 0.0;
    double stddev = 0.0;
    // 95% halfwidth, normal approximation from the sample stddev. Under
    // FixedPerExperiment the trials are i.i.d. conditioned on the one
    // placement, so the interval covers the demand randomness only.
    double ci95 = 0.0;
    std::vector<double> trial_rates;
    double mean_colors = -1.0; // average codeword count; -1 when no graph was built

    RateBound analytic;      // bound for the same policy
    int top_files_used = 0;  // resolved cutoff, 0 when not applicable
    int decode_checked = 0;  // trials with verification on
    int decode_passed = 0;
    int trials = 0;
    double wall_seconds = 0.0;
};

// One Monte-Carlo experiment: per trial, place caches, draw demands, build
// the conflict graph, color it, take the min with the naive-multicast
// fallback, and optionally round-trip random payloads through
// encode/decode at every user. Fully reproducible from sys.seed; trials
// run on per-trial substreams so any schedule gives identical output.
ExperimentResult run_experiment(const ExperimentSpec& spec);

enum class SweepAxis { CacheSize, Users, Files, Alpha, PacketsPerFile };

struct SweepRow {
    double axis_value = 0.0;
    ExperimentResult result;
};

// Runs the experiment across one swept parameter, rederiving the policy
// (including cutoff searches) per point.
std::vector<SweepRow> sweep(const ExperimentSpec& base, SweepAxis axis,
                            const std::vector<double>& values);

// Analytic part of a sweep row; shared with the CLI's analyze command.
struct AnalyticPoint {
    RateBound policy_bound;
    int top_files = 0;              // chosen cutoff when the policy has one
    std::vector<double> rap_probs;  // filled for Policy::Rap
    double coded = 0.0;             // the coded-rate expression by itself
    double naive = 0.0;
    double lfu = 0.0;
    double uniform_bound = 0.0;
};

AnalyticPoint analytic_point(const PopularityDist& q, int users, double cache_size, Policy policy,
                             std::optional<int> top_files, long rap_budget);

} // namespace ccsim

#endif
