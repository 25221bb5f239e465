#ifndef CCSIM_ORACLES_HPP
#define CCSIM_ORACLES_HPP

/*
 * Independent reference implementations used by the verification command
 * and the test suites. Each one re-derives its quantity straight from the
 * defining rule (naive pair loops, exhaustive search, Monte-Carlo
 * sampling, exact rational arithmetic) and deliberately shares no code
 * with the production path it cross-checks.
 */

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "ccsim/delivery.hpp"
#include "ccsim/model.hpp"
#include "ccsim/placement.hpp"
#include "ccsim/rational.hpp"

namespace ccsim::oracles {

// Key identifying a vertex by value rather than by index, so edge sets
// from different vertex enumerations can be compared.
using VertexKey = std::tuple<FileId, std::uint32_t, UserId>;
using EdgeKey = std::pair<VertexKey, VertexKey>;

// Edge set of a graph, keyed by vertex values.
std::set<EdgeKey> edge_set(const ConflictGraph& g);

// The conflict edge rule applied literally with nested loops over every
// requested-packet pair.
std::set<EdgeKey> naive_edge_set(const CacheConfig& caches, const DemandRealization& demands);

// Chromatic number by chronological backtracking in natural vertex order,
// trying k = 1, 2, ... until a proper assignment exists. No ordering
// heuristics, no bounds beyond properness.
int brute_force_chromatic(const ConflictGraph& g, int vertex_cap = 14);

// Monte-Carlo estimate of the probability that each file attains the
// maximum per-file term among the files requested by a random
// subset_size-user group (ties to the smaller file id). Returns per-file
// frequencies over `samples` draws.
std::vector<double> leader_probabilities_mc(const CachingDist& p, const PopularityDist& q,
                                            int users, int subset_size, long samples,
                                            std::uint64_t seed);

// Exact-rational instance of the analytic expressions. cache_size must be
// a (small) integer here; probabilities are exact fractions.
struct RationalInstance {
    int users = 0;
    int cache_size = 0;
    std::vector<Rational> popularity; // sums to exactly 1
    std::vector<Rational> caching;    // sums to exactly 1, each <= 1/cache_size
};

Rational naive_multicast_rate_exact(const RationalInstance& inst);
Rational coded_rate_bound_exact(const RationalInstance& inst);

// Randomized small instances for the verification suites.
struct SmallInstance {
    SystemParams sys;
    CacheConfig caches;
    DemandRealization demands;
};

// Arbitrary (not quota-constrained) cache contents plus random demands;
// exercises the edge rule and the end-to-end decode path.
SmallInstance random_small_instance(std::uint64_t seed, int max_users, int max_files,
                                    int max_packets);

// Random rational (p, q) pair with denominators small enough for exact
// arithmetic to stay quick.
RationalInstance random_rational_instance(std::uint64_t seed, int max_users, int max_files);

} // namespace ccsim::oracles

#endif
