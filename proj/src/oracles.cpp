#include "ccsim/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ccsim/errors.hpp"
#include "ccsim/rng.hpp"

namespace ccsim::oracles {

namespace {

VertexKey key_of(const Vertex& v) {
    return {v.packet.file, v.packet.index, v.user};
}

EdgeKey make_edge(VertexKey a, VertexKey b) {
    if (b < a)
        std::swap(a, b);
    return {a, b};
}

} // namespace

std::set<EdgeKey> edge_set(const ConflictGraph& g) {
    std::set<EdgeKey> out;
    for (int a = 0; a < g.order(); ++a)
        for (int b = a + 1; b < g.order(); ++b)
            if (g.adjacent(a, b))
                out.insert(make_edge(key_of(g.vertex(a)), key_of(g.vertex(b))));
    return out;
}

std::set<EdgeKey> naive_edge_set(const CacheConfig& caches, const DemandRealization& demands) {
    const SystemParams& sys = caches.params();

    struct NaiveVertex {
        FileId file;
        std::uint32_t index;
        UserId user;
    };
    std::vector<NaiveVertex> verts;
    for (int u = 1; u <= sys.users; ++u) {
        const FileId f = demands.request(static_cast<UserId>(u));
        for (int b = 1; b <= sys.packets_per_file; ++b) {
            if (caches.contains(static_cast<UserId>(u), f, static_cast<std::uint32_t>(b)))
                continue;
            verts.push_back({f, static_cast<std::uint32_t>(b), static_cast<UserId>(u)});
        }
    }

    std::set<EdgeKey> out;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        for (std::size_t j = i + 1; j < verts.size(); ++j) {
            const NaiveVertex& a = verts[i];
            const NaiveVertex& b = verts[j];
            const bool same_packet = a.file == b.file && a.index == b.index;
            if (same_packet)
                continue;
            const bool a_cached_at_b = caches.contains(b.user, a.file, a.index);
            const bool b_cached_at_a = caches.contains(a.user, b.file, b.index);
            if (!a_cached_at_b || !b_cached_at_a)
                out.insert(make_edge({a.file, a.index, a.user}, {b.file, b.index, b.user}));
        }
    }
    return out;
}

namespace {

bool assign(const ConflictGraph& g, std::vector<int>& color, int v, int k, int used) {
    if (v == g.order())
        return true;
    // canonical enumeration: a fresh color may only be opened in order
    const int limit = std::min(k, used + 1);
    for (int c = 1; c <= limit; ++c) {
        bool ok = true;
        for (int u = 0; u < v; ++u)
            if (color[static_cast<std::size_t>(u)] == c && g.adjacent(u, v)) {
                ok = false;
                break;
            }
        if (!ok)
            continue;
        color[static_cast<std::size_t>(v)] = c;
        if (assign(g, color, v + 1, k, std::max(used, c)))
            return true;
        color[static_cast<std::size_t>(v)] = 0;
    }
    return false;
}

} // namespace

int brute_force_chromatic(const ConflictGraph& g, int vertex_cap) {
    if (g.order() > vertex_cap)
        throw size_limit_error("brute_force_chromatic: graph above the oracle cap");
    if (g.order() == 0)
        return 0;
    std::vector<int> color(static_cast<std::size_t>(g.order()), 0);
    for (int k = 1;; ++k) {
        std::fill(color.begin(), color.end(), 0);
        if (assign(g, color, 0, k, 0))
            return k;
    }
}

std::vector<double> leader_probabilities_mc(const CachingDist& p, const PopularityDist& q,
                                            int users, int subset_size, long samples,
                                            std::uint64_t seed) {
    if (subset_size < 1 || subset_size > users)
        throw invalid_parameter("leader_probabilities_mc: subset size out of range");
    const int m = q.files();

    std::vector<double> cdf(static_cast<std::size_t>(m));
    KahanSum acc;
    for (int f = 0; f < m; ++f) {
        acc.add(q.prob(static_cast<FileId>(f + 1)));
        cdf[static_cast<std::size_t>(f)] = acc.value();
    }
    cdf.back() = 1.0;

    // per-file term of the defining argmax, straight from the definition
    std::vector<double> term(static_cast<std::size_t>(m));
    for (int f = 0; f < m; ++f) {
        const double share = p.probs[static_cast<std::size_t>(f)] * p.cache_size;
        term[static_cast<std::size_t>(f)] =
            std::pow(share, subset_size - 1) * std::pow(1.0 - share, users - subset_size + 1);
    }

    Rng rng(seed);
    std::vector<long> wins(static_cast<std::size_t>(m), 0);
    std::vector<char> requested(static_cast<std::size_t>(m), 0);
    std::vector<int> drawn;
    drawn.reserve(static_cast<std::size_t>(subset_size));
    for (long s = 0; s < samples; ++s) {
        drawn.clear();
        for (int i = 0; i < subset_size; ++i) {
            const double x = rng.next_unit();
            const int f =
                static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
            if (!requested[static_cast<std::size_t>(f)]) {
                requested[static_cast<std::size_t>(f)] = 1;
                drawn.push_back(f);
            }
        }
        int winner = -1;
        for (int f : drawn)
            if (winner < 0 || term[static_cast<std::size_t>(f)] > term[static_cast<std::size_t>(winner)] ||
                (term[static_cast<std::size_t>(f)] == term[static_cast<std::size_t>(winner)] && f < winner))
                winner = f;
        ++wins[static_cast<std::size_t>(winner)];
        for (int f : drawn)
            requested[static_cast<std::size_t>(f)] = 0;
    }

    std::vector<double> freq(static_cast<std::size_t>(m));
    for (int f = 0; f < m; ++f)
        freq[static_cast<std::size_t>(f)] = static_cast<double>(wins[static_cast<std::size_t>(f)]) / samples;
    return freq;
}

namespace {

Rational binomial_exact(int n, int k) {
    // n stays small in oracle instances, so u64 intermediates suffice
    std::uint64_t num = 1;
    for (int i = 1; i <= k; ++i) {
        num = num * static_cast<std::uint64_t>(n - k + i);
        num /= static_cast<std::uint64_t>(i); // exact at every step
    }
    return Rational(num);
}

Rational one_minus(const Rational& r) {
    return Rational(1) - r;
}

} // namespace

Rational naive_multicast_rate_exact(const RationalInstance& inst) {
    Rational total(0);
    for (const Rational& qf : inst.popularity)
        total = total + (Rational(1) - one_minus(qf).pow(inst.users));
    return total;
}

Rational coded_rate_bound_exact(const RationalInstance& inst) {
    const int n = inst.users;
    const int m = static_cast<int>(inst.popularity.size());

    std::vector<Rational> share(static_cast<std::size_t>(m));
    for (int f = 0; f < m; ++f)
        share[static_cast<std::size_t>(f)] =
            inst.caching[static_cast<std::size_t>(f)] * Rational(static_cast<std::uint64_t>(inst.cache_size));

    Rational total(0);
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int ell = 1; ell <= n; ++ell) {
        // exact per-file ranking term, 0^0 = 1
        std::vector<Rational> g(static_cast<std::size_t>(m));
        for (int f = 0; f < m; ++f)
            g[static_cast<std::size_t>(f)] = share[static_cast<std::size_t>(f)].pow(ell - 1) *
                                             one_minus(share[static_cast<std::size_t>(f)]).pow(n - ell + 1);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const Rational& ga = g[static_cast<std::size_t>(a)];
            const Rational& gb = g[static_cast<std::size_t>(b)];
            if (ga == gb)
                return a < b;
            return gb < ga;
        });

        Rational mass_above(0);
        const Rational choose = binomial_exact(n, ell);
        for (int f : order) {
            const Rational& qf = inst.popularity[static_cast<std::size_t>(f)];
            const Rational leader =
                one_minus(mass_above).pow(ell) - one_minus(mass_above + qf).pow(ell);
            total = total + choose * leader * g[static_cast<std::size_t>(f)];
            mass_above = mass_above + qf;
        }
    }
    return total;
}

SmallInstance random_small_instance(std::uint64_t seed, int max_users, int max_files,
                                    int max_packets) {
    Rng rng(seed);
    SystemParams sys;
    sys.users = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_users)));
    sys.files = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_files)));
    sys.packets_per_file = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_packets)));
    sys.cache_size = sys.files; // budget is irrelevant for hand-built contents
    sys.seed = seed;

    SmallInstance inst{sys, CacheConfig::empty(sys), DemandRealization{}};
    for (int u = 1; u <= sys.users; ++u)
        for (int f = 1; f <= sys.files; ++f)
            for (int b = 1; b <= sys.packets_per_file; ++b)
                if (rng.next_below(2) == 0)
                    inst.caches.insert(static_cast<UserId>(u), static_cast<FileId>(f),
                                       static_cast<std::uint32_t>(b));

    inst.demands.requests.resize(static_cast<std::size_t>(sys.users));
    for (int u = 0; u < sys.users; ++u)
        inst.demands.requests[static_cast<std::size_t>(u)] =
            1 + static_cast<FileId>(rng.next_below(static_cast<std::uint64_t>(sys.files)));
    return inst;
}

RationalInstance random_rational_instance(std::uint64_t seed, int max_users, int max_files) {
    Rng rng(seed);
    RationalInstance inst;
    inst.users = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_users)));
    const int m = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_files)));
    inst.cache_size = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(std::min(2, m))));

    auto random_simplex = [&](std::uint64_t cap_num, std::uint64_t cap_den) {
        // integer weights, renormalized exactly; rejected until the cap holds
        std::vector<Rational> out;
        for (int attempt = 0; attempt < 64; ++attempt) {
            std::vector<std::uint64_t> w(static_cast<std::size_t>(m));
            std::uint64_t total = 0;
            for (auto& x : w) {
                x = rng.next_below(9);
                total += x;
            }
            if (total == 0)
                continue;
            out.clear();
            bool feasible = true;
            const Rational cap(cap_num, cap_den);
            for (std::uint64_t x : w) {
                Rational r(x, total);
                if (cap < r) {
                    feasible = false;
                    break;
                }
                out.push_back(r);
            }
            if (feasible)
                return out;
        }
        // uniform fallback is always feasible since m >= cache_size
        out.assign(static_cast<std::size_t>(m), Rational(1, static_cast<std::uint64_t>(m)));
        return out;
    };

    inst.popularity = random_simplex(1, 1);
    inst.caching = random_simplex(1, static_cast<std::uint64_t>(inst.cache_size));
    return inst;
}

} // namespace ccsim::oracles
