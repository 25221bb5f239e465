#ifndef CCSIM_MODEL_HPP
#define CCSIM_MODEL_HPP

#include <cstdint>
#include <vector>

#include "ccsim/rng.hpp"

namespace ccsim {

using FileId = std::uint32_t; // 1-based
using UserId = std::uint32_t; // 1-based

/*
 * Global parameters of one broadcast-caching instance: a library of
 * `files` equal-size files split into `packets_per_file` packets each, a
 * population of `users` behind a shared link, and a per-user cache of
 * `cache_size` files. Caches are packet granular: each user stores at most
 * floor(cache_size * packets_per_file) packets.
 */
struct SystemParams {
    int users = 1;
    int files = 1;
    double cache_size = 0.0;
    int packets_per_file = 1;
    std::uint64_t seed = 0;

    void validate() const;

    // floor(cache_size * packets_per_file), robust to representation slop
    // in cache_size (0.3 * 10 must budget 3 packets, not 2).
    long packet_budget() const;
};

/*
 * Per-file request probabilities, 1-based file ids, most popular first when
 * built from a Zipf law.
 */
class PopularityDist {
public:
    // q_f proportional to f^-alpha, normalized by direct compensated
    // summation. alpha = 0 is uniform. alpha = 1 is accepted; only the
    // optimality arguments elsewhere exclude it, not the distribution.
    static PopularityDist zipf(int files, double alpha);

    static PopularityDist from_probs(std::vector<double> probs);

    int files() const { return static_cast<int>(probs_.size()); }
    double prob(FileId f) const { return probs_[f - 1]; }
    const std::vector<double>& probs() const { return probs_; }

private:
    explicit PopularityDist(std::vector<double> probs);

    std::vector<double> probs_;
};

// One i.i.d. demand draw: requests[u-1] is the file requested by user u.
struct DemandRealization {
    std::vector<FileId> requests;

    UserId users() const { return static_cast<UserId>(requests.size()); }
    FileId request(UserId u) const { return requests[u - 1]; }
};

// Number of distinct files in a demand vector; the size of a naive
// multicast that sends every requested file once.
int distinct_file_count(const DemandRealization& demands);

// Draws `users` i.i.d. requests from q. Deterministic given the stream.
DemandRealization sample_demands(const PopularityDist& q, int users, Rng& rng);

} // namespace ccsim

#endif
