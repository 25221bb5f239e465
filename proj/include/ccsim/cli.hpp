#ifndef CCSIM_CLI_HPP
#define CCSIM_CLI_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsim/sim.hpp"

namespace ccsim::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kVerifyFailure = 3;
inline constexpr int kResourceGuard = 4;

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*
 * A run configuration parsed from the JSON config file. The schema is
 * strict: unknown keys anywhere are rejected, and the sweep axis names
 * follow the CSV column conventions (M, n, m, alpha, B). Without a sweep
 * section the run degenerates to a single point on the M axis.
 */
struct RunConfig {
    ExperimentSpec spec;
    SweepAxis axis = SweepAxis::CacheSize;
    std::vector<double> values;
    std::string csv_name = "out.csv";
    std::string json_name = "out.json";
};

RunConfig load_config(const std::string& path); // throws config_error

struct Options {
    std::string config_path;
    std::string outdir = ".";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
};

// Applies one axis value to a spec (shared by sweeps and the commands).
void apply_axis(ExperimentSpec& spec, SweepAxis axis, double value);

// Analytic sweep: per point, the policy's rate bound plus the baseline
// columns. CSV schema: axis,policy,m_tilde,rub,psi,mbar,lfu_rate,
// uniform_rub. The JSON twin carries full precision and, for the rap
// policy, the optimized caching distribution per point.
int cmd_analyze(const Options& options);

// Monte-Carlo sweep: analyze's columns plus
// mean_rate,ci95,decode_pass_rate,trials,B.
int cmd_simulate(const Options& options);

struct VerifyOptions {
    int seeds = 25;
    long mc_samples = 200000;
    std::uint64_t base_seed = 1;
    // test fixture: corrupt one edge before the comparison so the harness
    // can prove the edge-rule check actually bites
    bool inject_edge_fault = false;
};

// Cross-checks the production paths against the independent oracles:
// conflict edge rule vs a naive pair loop, greedy vs exact coloring,
// closed-form leader probabilities vs Monte-Carlo, log-domain rate sums
// vs exact rationals. Returns kVerifyFailure on the first broken suite.
int cmd_verify(const VerifyOptions& options);

std::string policy_name(Policy policy);

} // namespace ccsim::cli

#endif
