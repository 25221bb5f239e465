#include "ccsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include "ccsim/errors.hpp"

namespace ccsim {

void ExperimentSpec::validate() const {
    sys.validate();
    if (zipf_alpha.has_value() == explicit_probs.has_value())
        throw invalid_parameter("ExperimentSpec: provide exactly one of zipf_alpha / explicit_probs");
    if (explicit_probs && static_cast<int>(explicit_probs->size()) != sys.files)
        throw invalid_parameter("ExperimentSpec: explicit popularity must list every file");
    if (trials < 1)
        throw invalid_parameter("ExperimentSpec: trials must be >= 1");
    if (top_files && (policy != Policy::RandomLfu))
        throw invalid_parameter("ExperimentSpec: top_files only applies to the random_lfu policy");
    if (symbol_bytes < 1)
        throw invalid_parameter("ExperimentSpec: symbol_bytes must be >= 1");
    if (threads < 0)
        throw invalid_parameter("ExperimentSpec: threads must be >= 0");
}

PopularityDist ExperimentSpec::popularity() const {
    if (zipf_alpha)
        return PopularityDist::zipf(sys.files, *zipf_alpha);
    return PopularityDist::from_probs(*explicit_probs);
}

AnalyticPoint analytic_point(const PopularityDist& q, int users, double cache_size, Policy policy,
                             std::optional<int> top_files, long rap_budget) {
    AnalyticPoint out;
    const int m = q.files();

    out.naive = naive_multicast_rate(q, users);
    out.lfu = lfu_rate(q, users, cache_size);
    out.uniform_bound =
        cache_size > 0.0 ? random_lfu_bound(q, users, cache_size, m).value : out.naive;

    if (cache_size <= 0.0 || policy == Policy::NaiveMulticast) {
        out.policy_bound = no_cache_bound(q, users);
        out.coded = out.policy_bound.coded;
        return out;
    }

    switch (policy) {
    case Policy::Rap: {
        RapOptions opt;
        opt.budget = rap_budget;
        const RapResult rap = optimize_caching(q, users, cache_size, opt);
        out.policy_bound = rap.bound;
        out.rap_probs = rap.dist.probs;
        break;
    }
    case Policy::RandomLfu: {
        if (top_files) {
            out.top_files = *top_files;
            out.policy_bound = random_lfu_bound(q, users, cache_size, *top_files);
        } else {
            const CutoffSearch found = search_cutoff(q, users, cache_size);
            out.top_files = found.top_files;
            out.policy_bound = found.bound;
        }
        break;
    }
    case Policy::Lfu: {
        out.top_files = std::max(1, static_cast<int>(std::ceil(cache_size - 1e-9)));
        out.policy_bound = random_lfu_bound(q, users, cache_size, out.top_files);
        break;
    }
    case Policy::Uniform: {
        out.top_files = m;
        out.policy_bound = random_lfu_bound(q, users, cache_size, m);
        break;
    }
    case Policy::NaiveMulticast:
        break; // handled above
    }
    out.coded = out.policy_bound.coded;
    return out;
}

namespace {

struct TrialOutcome {
    double rate = 0.0;
    int colors = -1; // codewords sent; -1 when the trial skipped the graph
    bool decode_checked = false;
    bool decode_ok = false;
};

TrialOutcome run_trial(const ExperimentSpec& spec, const PopularityDist& q,
                       const CachingDist* dist, const CacheConfig* fixed_caches, int trial) {
    const SystemParams& sys = spec.sys;

    Rng demand_rng(derive_seed(sys.seed, {kStreamDemands, static_cast<std::uint64_t>(trial)}));
    const DemandRealization demands = sample_demands(q, sys.users, demand_rng);
    const int distinct = distinct_file_count(demands);

    TrialOutcome out;
    const bool cached = dist != nullptr && sys.cache_size > 0.0;
    if (!cached && !spec.verify_decode) {
        out.rate = distinct;
        return out;
    }

    CacheConfig local = CacheConfig::empty(sys);
    const CacheConfig* caches = &local;
    if (cached) {
        if (fixed_caches != nullptr)
            caches = fixed_caches;
        else
            local = fill_caches(*dist, sys,
                                derive_seed(sys.seed, {kStreamPlacement, static_cast<std::uint64_t>(trial)}));
    }

    const ConflictGraph graph = build_conflict_graph(*caches, demands);
    const Coloring coloring = greedy_color(graph, spec.coloring);
    out.colors = coloring.num_colors;
    out.rate = delivery_rate(graph, coloring, demands, sys.packets_per_file);

    if (spec.verify_decode) {
        out.decode_checked = true;
        out.decode_ok = true;
        const PayloadStore store(derive_seed(sys.seed, {kStreamPayload, static_cast<std::uint64_t>(trial)}),
                                 spec.symbol_bytes);
        const PayloadMap payloads = store.materialize(graph);
        const MulticastCode code = encode(graph, coloring, payloads);
        for (int u = 1; u <= sys.users && out.decode_ok; ++u) {
            try {
                const PayloadMap got =
                    decode(static_cast<UserId>(u), code, *caches, demands, payloads);
                const FileId want = demands.request(static_cast<UserId>(u));
                for (int b = 1; b <= sys.packets_per_file && out.decode_ok; ++b) {
                    if (caches->contains(static_cast<UserId>(u), want, static_cast<std::uint32_t>(b)))
                        continue;
                    const auto it = got.find(packet_key({want, static_cast<std::uint32_t>(b)}));
                    if (it == got.end() ||
                        it->second != store.packet_payload({want, static_cast<std::uint32_t>(b)}))
                        out.decode_ok = false;
                }
            } catch (const decode_failure&) {
                out.decode_ok = false;
            }
        }
    }
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();

    const SystemParams& sys = spec.sys;
    const PopularityDist q = spec.popularity();

    const std::size_t projected =
        static_cast<std::size_t>(sys.users) * static_cast<std::size_t>(sys.packets_per_file);
    if (projected > spec.vertex_guard)
        throw sizing_error("run_experiment: projected conflict graph of " +
                           std::to_string(projected) + " vertices (users=" +
                           std::to_string(sys.users) + ", packets_per_file=" +
                           std::to_string(sys.packets_per_file) + ") exceeds the guard of " +
                           std::to_string(spec.vertex_guard));

    ExperimentResult result;
    const AnalyticPoint analytic = analytic_point(q, sys.users, sys.cache_size, spec.policy,
                                                  spec.top_files, spec.rap_budget);
    result.analytic = analytic.policy_bound;
    result.top_files_used = analytic.top_files;
    result.trials = spec.trials;

    // resolve the caching distribution once per experiment
    CachingDist dist;
    bool have_dist = false;
    if (sys.cache_size > 0.0 && spec.policy != Policy::NaiveMulticast) {
        switch (spec.policy) {
        case Policy::Rap:
            dist.probs = analytic.rap_probs;
            dist.cache_size = sys.cache_size;
            break;
        case Policy::RandomLfu:
        case Policy::Lfu:
        case Policy::Uniform:
            dist = random_lfu_dist(sys.files, sys.cache_size, analytic.top_files);
            break;
        case Policy::NaiveMulticast:
            break;
        }
        have_dist = true;
    }

    CacheConfig fixed = CacheConfig::empty(sys);
    const bool use_fixed = have_dist && spec.placement == PlacementMode::FixedPerExperiment;
    if (use_fixed)
        fixed = fill_caches(dist, sys, derive_seed(sys.seed, {kStreamPlacement, 0}));

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(spec.trials));
    auto worker_body = [&](int trial) {
        outcomes[static_cast<std::size_t>(trial)] =
            run_trial(spec, q, have_dist ? &dist : nullptr, use_fixed ? &fixed : nullptr, trial);
    };

    int threads = spec.threads > 0 ? spec.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, spec.trials));
    if (threads == 1) {
        for (int t = 0; t < spec.trials; ++t)
            worker_body(t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < spec.trials; t = next.fetch_add(1))
                    worker_body(t);
            });
        for (auto& th : pool)
            th.join();
    }

    // aggregate in trial order so the result is schedule-invariant
    KahanSum mean_acc;
    for (const TrialOutcome& o : outcomes)
        mean_acc.add(o.rate);
    result.mean_rate = mean_acc.value() / spec.trials;

    KahanSum var_acc;
    for (const TrialOutcome& o : outcomes) {
        const double d = o.rate - result.mean_rate;
        var_acc.add(d * d);
    }
    result.stddev = spec.trials > 1 ? std::sqrt(var_acc.value() / (spec.trials - 1)) : 0.0;
    result.ci95 = 1.96 * result.stddev / std::sqrt(static_cast<double>(spec.trials));

    for (const TrialOutcome& o : outcomes) {
        if (o.decode_checked) {
            ++result.decode_checked;
            if (o.decode_ok)
                ++result.decode_passed;
        }
    }

    KahanSum color_acc;
    int colored_trials = 0;
    for (const TrialOutcome& o : outcomes) {
        if (o.colors >= 0) {
            color_acc.add(o.colors);
            ++colored_trials;
        }
    }
    if (colored_trials > 0)
        result.mean_colors = color_acc.value() / colored_trials;
    if (spec.keep_trial_rates) {
        result.trial_rates.reserve(outcomes.size());
        for (const TrialOutcome& o : outcomes)
            result.trial_rates.push_back(o.rate);
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<SweepRow> sweep(const ExperimentSpec& base, SweepAxis axis,
                            const std::vector<double>& values) {
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        ExperimentSpec spec = base;
        switch (axis) {
        case SweepAxis::CacheSize:
            spec.sys.cache_size = v;
            break;
        case SweepAxis::Users:
            spec.sys.users = static_cast<int>(std::lround(v));
            break;
        case SweepAxis::Files:
            spec.sys.files = static_cast<int>(std::lround(v));
            break;
        case SweepAxis::Alpha:
            if (!base.zipf_alpha)
                throw invalid_parameter("sweep: alpha axis needs a Zipf popularity");
            spec.zipf_alpha = v;
            break;
        case SweepAxis::PacketsPerFile:
            spec.sys.packets_per_file = static_cast<int>(std::lround(v));
            break;
        }
        rows.push_back({v, run_experiment(spec)});
    }
    return rows;
}

} // namespace ccsim
