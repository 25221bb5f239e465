#include "ccsim/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "ccsim/errors.hpp"
#include "ccsim/oracles.hpp"

namespace ccsim::cli {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object())
        throw config_error(where + ": expected an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw config_error(where + ": unknown key '" + item.key() + "'");
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number())
        throw config_error(where + ": expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer())
        throw config_error(where + ": expected an integer");
    return v.get<int>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean())
        throw config_error(where + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string())
        throw config_error(where + ": expected a string");
    return v.get<std::string>();
}

Policy parse_policy(const std::string& s) {
    if (s == "rap")
        return Policy::Rap;
    if (s == "random_lfu")
        return Policy::RandomLfu;
    if (s == "lfu")
        return Policy::Lfu;
    if (s == "uniform")
        return Policy::Uniform;
    if (s == "naive")
        return Policy::NaiveMulticast;
    throw config_error("experiment.policy: unknown policy '" + s + "'");
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "M")
        return SweepAxis::CacheSize;
    if (s == "n")
        return SweepAxis::Users;
    if (s == "m")
        return SweepAxis::Files;
    if (s == "alpha")
        return SweepAxis::Alpha;
    if (s == "B")
        return SweepAxis::PacketsPerFile;
    throw config_error("sweep.axis: expected one of M, n, m, alpha, B");
}

std::string axis_name(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::CacheSize:
        return "M";
    case SweepAxis::Users:
        return "n";
    case SweepAxis::Files:
        return "m";
    case SweepAxis::Alpha:
        return "alpha";
    case SweepAxis::PacketsPerFile:
        return "B";
    }
    return "?";
}

ColoringPolicy parse_coloring(const json& v) {
    require_keys(v, {"order", "restarts", "seed"}, "experiment.coloring");
    ColoringPolicy out;
    if (v.count("order")) {
        const std::string s = as_string(v.at("order"), "experiment.coloring.order");
        if (s == "degree")
            out.order = ColorOrder::DegreeDesc;
        else if (s == "dsatur")
            out.order = ColorOrder::Saturation;
        else if (s == "restarts")
            out.order = ColorOrder::RandomRestarts;
        else
            throw config_error("experiment.coloring.order: expected degree, dsatur or restarts");
    }
    if (v.count("restarts"))
        out.restarts = as_int(v.at("restarts"), "experiment.coloring.restarts");
    if (v.count("seed"))
        out.seed = v.at("seed").get<std::uint64_t>();
    return out;
}

std::size_t guard_from_env() {
    const char* raw = std::getenv("CCSIM_VERTEX_GUARD");
    if (raw == nullptr)
        return kDefaultVertexGuard;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0' || v == 0)
        throw config_error("CCSIM_VERTEX_GUARD: expected a positive integer, got '" +
                           std::string(raw) + "'");
    return static_cast<std::size_t>(v);
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

std::string policy_name(Policy policy) {
    switch (policy) {
    case Policy::Rap:
        return "rap";
    case Policy::RandomLfu:
        return "random_lfu";
    case Policy::Lfu:
        return "lfu";
    case Policy::Uniform:
        return "uniform";
    case Policy::NaiveMulticast:
        return "naive";
    }
    return "?";
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config file '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw config_error("config is not valid JSON: " + std::string(e.what()));
    }

    require_keys(root, {"experiment", "sweep", "output"}, "config");
    if (!root.count("experiment"))
        throw config_error("config: missing 'experiment' section");

    const json& exp = root.at("experiment");
    require_keys(exp,
                 {"users", "files", "cache_size", "packets_per_file", "seed", "popularity",
                  "policy", "top_files", "trials", "placement", "coloring", "verify_decode",
                  "symbol_bytes", "rap_budget", "threads"},
                 "experiment");

    RunConfig cfg;
    ExperimentSpec& spec = cfg.spec;
    for (const char* key : {"users", "files", "cache_size", "popularity", "policy"})
        if (!exp.count(key))
            throw config_error(std::string("experiment: missing required key '") + key + "'");

    spec.sys.users = as_int(exp.at("users"), "experiment.users");
    spec.sys.files = as_int(exp.at("files"), "experiment.files");
    spec.sys.cache_size = as_number(exp.at("cache_size"), "experiment.cache_size");
    if (exp.count("packets_per_file"))
        spec.sys.packets_per_file = as_int(exp.at("packets_per_file"), "experiment.packets_per_file");
    if (exp.count("seed"))
        spec.sys.seed = exp.at("seed").get<std::uint64_t>();

    const json& pop = exp.at("popularity");
    require_keys(pop, {"zipf_alpha", "probs"}, "experiment.popularity");
    if (pop.count("zipf_alpha") == pop.count("probs"))
        throw config_error("experiment.popularity: provide exactly one of zipf_alpha / probs");
    if (pop.count("zipf_alpha"))
        spec.zipf_alpha = as_number(pop.at("zipf_alpha"), "experiment.popularity.zipf_alpha");
    else {
        if (!pop.at("probs").is_array())
            throw config_error("experiment.popularity.probs: expected an array");
        std::vector<double> probs;
        for (const auto& v : pop.at("probs"))
            probs.push_back(as_number(v, "experiment.popularity.probs[]"));
        spec.explicit_probs = std::move(probs);
    }

    spec.policy = parse_policy(as_string(exp.at("policy"), "experiment.policy"));
    if (exp.count("top_files")) {
        const json& tf = exp.at("top_files");
        if (tf.is_string()) {
            if (tf.get<std::string>() != "auto")
                throw config_error("experiment.top_files: expected 'auto' or an integer");
        } else {
            spec.top_files = as_int(tf, "experiment.top_files");
        }
    }
    if (exp.count("trials"))
        spec.trials = as_int(exp.at("trials"), "experiment.trials");
    if (exp.count("placement")) {
        const std::string s = as_string(exp.at("placement"), "experiment.placement");
        if (s == "fresh")
            spec.placement = PlacementMode::FreshPerTrial;
        else if (s == "fixed")
            spec.placement = PlacementMode::FixedPerExperiment;
        else
            throw config_error("experiment.placement: expected 'fresh' or 'fixed'");
    }
    if (exp.count("coloring"))
        spec.coloring = parse_coloring(exp.at("coloring"));
    if (exp.count("verify_decode"))
        spec.verify_decode = as_bool(exp.at("verify_decode"), "experiment.verify_decode");
    if (exp.count("symbol_bytes"))
        spec.symbol_bytes = static_cast<std::size_t>(as_int(exp.at("symbol_bytes"), "experiment.symbol_bytes"));
    if (exp.count("rap_budget"))
        spec.rap_budget = as_int(exp.at("rap_budget"), "experiment.rap_budget");
    if (exp.count("threads"))
        spec.threads = as_int(exp.at("threads"), "experiment.threads");
    spec.vertex_guard = guard_from_env();

    if (root.count("sweep")) {
        const json& sw = root.at("sweep");
        require_keys(sw, {"axis", "values"}, "sweep");
        if (!sw.count("axis") || !sw.count("values"))
            throw config_error("sweep: both 'axis' and 'values' are required");
        cfg.axis = parse_axis(as_string(sw.at("axis"), "sweep.axis"));
        if (!sw.at("values").is_array())
            throw config_error("sweep.values: expected an array");
        for (const auto& v : sw.at("values"))
            cfg.values.push_back(as_number(v, "sweep.values[]"));
        const bool integral_axis = cfg.axis == SweepAxis::Users || cfg.axis == SweepAxis::Files ||
                                   cfg.axis == SweepAxis::PacketsPerFile;
        if (integral_axis)
            for (double v : cfg.values)
                if (std::abs(v - std::lround(v)) > 1e-9)
                    throw config_error("sweep.values: axis '" + axis_name(cfg.axis) +
                                       "' takes integer values");
    } else {
        cfg.axis = SweepAxis::CacheSize;
        cfg.values = {spec.sys.cache_size};
    }

    if (root.count("output")) {
        const json& out = root.at("output");
        require_keys(out, {"csv", "json"}, "output");
        if (out.count("csv"))
            cfg.csv_name = as_string(out.at("csv"), "output.csv");
        if (out.count("json"))
            cfg.json_name = as_string(out.at("json"), "output.json");
    }
    return cfg;
}

void apply_axis(ExperimentSpec& spec, SweepAxis axis, double value) {
    switch (axis) {
    case SweepAxis::CacheSize:
        spec.sys.cache_size = value;
        break;
    case SweepAxis::Users:
        spec.sys.users = static_cast<int>(std::lround(value));
        break;
    case SweepAxis::Files:
        spec.sys.files = static_cast<int>(std::lround(value));
        break;
    case SweepAxis::Alpha:
        if (!spec.zipf_alpha)
            throw invalid_parameter("sweep over alpha needs a Zipf popularity");
        spec.zipf_alpha = value;
        break;
    case SweepAxis::PacketsPerFile:
        spec.sys.packets_per_file = static_cast<int>(std::lround(value));
        break;
    }
}

namespace {

struct OutputFiles {
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
    std::ofstream csv;
    json summary;
    bool committed = false;

    OutputFiles(const Options& opt, const RunConfig& cfg) {
        std::filesystem::create_directories(opt.outdir);
        csv_path = std::filesystem::path(opt.outdir) / cfg.csv_name;
        json_path = std::filesystem::path(opt.outdir) / cfg.json_name;
        csv.open(csv_path, std::ios::trunc);
        if (!csv)
            throw config_error("cannot write CSV output '" + csv_path.string() + "'");
    }

    void commit() {
        csv.close();
        std::ofstream js(json_path, std::ios::trunc);
        if (!js)
            throw config_error("cannot write JSON output '" + json_path.string() + "'");
        js << summary.dump(2) << "\n";
        committed = true;
    }

    ~OutputFiles() {
        if (committed)
            return;
        // never leave partial results behind
        csv.close();
        std::error_code ec;
        std::filesystem::remove(csv_path, ec);
        std::filesystem::remove(json_path, ec);
    }
};

void apply_overrides(RunConfig& cfg, const Options& opt) {
    if (opt.seed_override)
        cfg.spec.sys.seed = *opt.seed_override;
    if (opt.threads_override)
        cfg.spec.threads = *opt.threads_override;
}

int run_command(const Options& options, bool simulate) {
    RunConfig cfg;
    try {
        cfg = load_config(options.config_path);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    apply_overrides(cfg, options);

    try {
        OutputFiles out(options, cfg);
        out.csv << "axis,policy,m_tilde,rub,psi,mbar,lfu_rate,uniform_rub";
        if (simulate)
            out.csv << ",mean_rate,ci95,decode_pass_rate,trials,B";
        out.csv << "\n";

        out.summary["command"] = simulate ? "simulate" : "analyze";
        out.summary["axis"] = axis_name(cfg.axis);
        out.summary["policy"] = policy_name(cfg.spec.policy);
        out.summary["seed"] = cfg.spec.sys.seed;
        out.summary["rows"] = json::array();

        for (double value : cfg.values) {
            ExperimentSpec spec = cfg.spec;
            apply_axis(spec, cfg.axis, value);
            spec.sys.validate();

            const PopularityDist q = spec.popularity();
            const AnalyticPoint point =
                analytic_point(q, spec.sys.users, spec.sys.cache_size, spec.policy,
                               spec.top_files, spec.rap_budget);

            const bool has_cutoff = point.top_files > 0;
            out.csv << fmt6(value) << "," << policy_name(spec.policy) << ","
                    << (has_cutoff ? std::to_string(point.top_files) : std::string{}) << ","
                    << fmt6(point.policy_bound.value) << "," << fmt6(point.coded) << ","
                    << fmt6(point.naive) << "," << fmt6(point.lfu) << ","
                    << fmt6(point.uniform_bound);

            json row;
            row["axis"] = value;
            row["m_tilde"] = point.top_files;
            row["rub"] = point.policy_bound.value;
            row["psi"] = point.coded;
            row["mbar"] = point.naive;
            row["lfu_rate"] = point.lfu;
            row["uniform_rub"] = point.uniform_bound;
            if (!point.rap_probs.empty())
                row["p_star"] = point.rap_probs;

            if (simulate) {
                const ExperimentResult res = run_experiment(spec);
                const double pass_rate =
                    res.decode_checked > 0
                        ? static_cast<double>(res.decode_passed) / res.decode_checked
                        : 1.0;
                out.csv << "," << fmt6(res.mean_rate) << "," << fmt6(res.ci95) << ","
                        << fmt6(pass_rate) << "," << res.trials << ","
                        << spec.sys.packets_per_file;
                row["mean_rate"] = res.mean_rate;
                row["ci95"] = res.ci95;
                row["stddev"] = res.stddev;
                row["decode_pass_rate"] = pass_rate;
                row["decode_checked"] = res.decode_checked;
                row["trials"] = res.trials;
                row["B"] = spec.sys.packets_per_file;
                if (res.mean_colors >= 0.0)
                    row["mean_colors"] = res.mean_colors; // codewords per trial
            }
            out.csv << "\n";
            out.summary["rows"].push_back(std::move(row));
        }
        out.commit();
        return kOk;
    } catch (const sizing_error& e) {
        std::cerr << "resource guard: " << e.what() << "\n";
        return kResourceGuard;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const invalid_parameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace

int cmd_analyze(const Options& options) {
    return run_command(options, false);
}

int cmd_simulate(const Options& options) {
    return run_command(options, true);
}

namespace {

bool verify_edge_rule(const VerifyOptions& opt) {
    for (int s = 0; s < opt.seeds; ++s) {
        const std::uint64_t seed = derive_seed(opt.base_seed, {101, static_cast<std::uint64_t>(s)});
        const oracles::SmallInstance inst = oracles::random_small_instance(seed, 4, 3, 3);
        const ConflictGraph g = build_conflict_graph(inst.caches, inst.demands);
        std::set<oracles::EdgeKey> impl = oracles::edge_set(g);
        const std::set<oracles::EdgeKey> naive = oracles::naive_edge_set(inst.caches, inst.demands);

        if (opt.inject_edge_fault && s == 0) {
            if (!impl.empty())
                impl.erase(impl.begin());
            else
                impl.insert({{1, 1, 1}, {1, 2, 1}});
        }

        if (impl != naive) {
            std::set<oracles::EdgeKey> diff;
            std::set_symmetric_difference(impl.begin(), impl.end(), naive.begin(), naive.end(),
                                          std::inserter(diff, diff.begin()));
            const auto& e = *diff.begin();
            const auto& [a, b] = e;
            std::cout << "[FAIL] edge-rule: seed " << seed << ", edge ((file "
                      << std::get<0>(a) << ", pkt " << std::get<1>(a) << ", user "
                      << std::get<2>(a) << "), (file " << std::get<0>(b) << ", pkt "
                      << std::get<1>(b) << ", user " << std::get<2>(b) << ")) disagrees ("
                      << diff.size() << " total)\n";
            return false;
        }
    }
    std::cout << "[pass] edge-rule: " << opt.seeds << " random instances match the naive rule\n";
    return true;
}

bool verify_coloring(const VerifyOptions& opt) {
    for (int s = 0; s < opt.seeds; ++s) {
        const std::uint64_t seed = derive_seed(opt.base_seed, {102, static_cast<std::uint64_t>(s)});
        Rng rng(seed);
        const int order = 4 + static_cast<int>(rng.next_below(10));
        const int density_pct = 20 + static_cast<int>(rng.next_below(61));
        std::vector<std::pair<int, int>> edges;
        for (int a = 0; a < order; ++a)
            for (int b = a + 1; b < order; ++b)
                if (rng.next_below(100) < static_cast<std::uint64_t>(density_pct))
                    edges.emplace_back(a, b);
        const ConflictGraph g = graph_from_edges(order, edges);

        const Coloring greedy = greedy_color(g, {ColorOrder::RandomRestarts, 16, seed});
        if (!is_proper(g, greedy)) {
            std::cout << "[FAIL] coloring: seed " << seed << " produced an improper coloring\n";
            return false;
        }
        const int exact = exact_chromatic(g);
        if (greedy.num_colors < exact) {
            std::cout << "[FAIL] coloring: seed " << seed << " greedy " << greedy.num_colors
                      << " colors below the chromatic number " << exact << "\n";
            return false;
        }
    }
    std::cout << "[pass] coloring: " << opt.seeds
              << " random graphs proper and never below the chromatic number\n";
    return true;
}

bool verify_leader_probs(const VerifyOptions& opt) {
    const int instances = std::max(3, opt.seeds / 4);
    for (int s = 0; s < instances; ++s) {
        const std::uint64_t seed = derive_seed(opt.base_seed, {103, static_cast<std::uint64_t>(s)});
        const oracles::RationalInstance inst = oracles::random_rational_instance(seed, 8, 6);

        std::vector<double> qd, pd;
        for (const auto& r : inst.popularity)
            qd.push_back(r.to_double());
        for (const auto& r : inst.caching)
            pd.push_back(r.to_double());
        const PopularityDist q = PopularityDist::from_probs(qd);
        CachingDist p;
        p.probs = pd;
        p.cache_size = inst.cache_size;

        Rng rng(seed);
        const int ell = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(inst.users)));
        const LeaderProbs exact = leader_probabilities(p, q, inst.users);
        const std::vector<double> mc =
            oracles::leader_probabilities_mc(p, q, inst.users, ell, opt.mc_samples, seed);

        for (int f = 1; f <= q.files(); ++f) {
            const double want = exact.at(ell, static_cast<FileId>(f));
            const double got = mc[static_cast<std::size_t>(f) - 1];
            const double sigma = std::sqrt(std::max(want * (1 - want), got * (1 - got)) /
                                           static_cast<double>(opt.mc_samples));
            const double tol = 3.0 * sigma + 1.0 / static_cast<double>(opt.mc_samples);
            if (std::abs(want - got) > tol) {
                std::cout << "[FAIL] leader-probs: seed " << seed << " file " << f << " subset "
                          << ell << ": closed form " << want << " vs Monte-Carlo " << got << "\n";
                return false;
            }
        }
    }
    std::cout << "[pass] leader-probs: " << instances
              << " instances match Monte-Carlo within 3 sigma\n";
    return true;
}

bool verify_rate_sums(const VerifyOptions& opt) {
    const int instances = std::max(5, opt.seeds / 2);
    for (int s = 0; s < instances; ++s) {
        const std::uint64_t seed = derive_seed(opt.base_seed, {104, static_cast<std::uint64_t>(s)});
        const oracles::RationalInstance inst = oracles::random_rational_instance(seed, 10, 6);

        std::vector<double> qd, pd;
        for (const auto& r : inst.popularity)
            qd.push_back(r.to_double());
        for (const auto& r : inst.caching)
            pd.push_back(r.to_double());
        const PopularityDist q = PopularityDist::from_probs(qd);
        CachingDist p;
        p.probs = pd;
        p.cache_size = inst.cache_size;

        const double coded = coded_rate_bound(p, q, inst.users);
        const double coded_exact = oracles::coded_rate_bound_exact(inst).to_double();
        const double naive = naive_multicast_rate(q, inst.users);
        const double naive_exact = oracles::naive_multicast_rate_exact(inst).to_double();

        const double tol_coded = 1e-9 * std::max(1.0, std::abs(coded_exact));
        const double tol_naive = 1e-9 * std::max(1.0, std::abs(naive_exact));
        if (std::abs(coded - coded_exact) > tol_coded) {
            std::cout << "[FAIL] rate-sums: seed " << seed << " coded bound " << coded
                      << " vs exact " << coded_exact << "\n";
            return false;
        }
        if (std::abs(naive - naive_exact) > tol_naive) {
            std::cout << "[FAIL] rate-sums: seed " << seed << " naive rate " << naive
                      << " vs exact " << naive_exact << "\n";
            return false;
        }
    }
    std::cout << "[pass] rate-sums: " << instances << " instances match exact rationals\n";
    return true;
}

} // namespace

int cmd_verify(const VerifyOptions& options) {
    bool ok = true;
    ok = verify_edge_rule(options) && ok;
    ok = verify_coloring(options) && ok;
    ok = verify_leader_probs(options) && ok;
    ok = verify_rate_sums(options) && ok;
    std::cout << (ok ? "verification passed" : "verification FAILED") << "\n";
    return ok ? kOk : kVerifyFailure;
}

} // namespace ccsim::cli
