#ifndef CCSIM_PLACEMENT_HPP
#define CCSIM_PLACEMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ccsim/model.hpp"

namespace ccsim {

/*
 * A caching distribution: probs[f-1] is the fraction of every user's cache
 * devoted to file f. Feasibility requires the probabilities to live on the
 * simplex with each entry at most 1/cache_size, which rules out caching
 * duplicate packets of one file.
 */
struct CachingDist {
    std::vector<double> probs;
    double cache_size = 0.0;

    int files() const { return static_cast<int>(probs.size()); }
    double prob(FileId f) const { return probs[f - 1]; }

    void validate() const;
};

// The Random-LFU family: cache uniformly over the `top_files` most popular
// files, nothing below the cutoff. Requires ceil(cache_size) <= top_files
// <= files so the per-file share stays feasible.
CachingDist random_lfu_dist(int files, double cache_size, int top_files);

// Corner cases of the family: LFU pins the cache to the ceil(M) most
// popular files; uniform caching spreads it over the whole library.
CachingDist lfu_dist(int files, double cache_size);
CachingDist uniform_dist(int files, double cache_size);

// Largest-remainder apportionment of the per-user packet budget
// floor(M*B) across files proportionally to probs, capped at B per file.
// Matches p_f*M*B exactly whenever those targets are integral.
std::vector<int> packet_quotas(const CachingDist& p, const SystemParams& sys);

/*
 * Packet-level cache contents for every user, stored as per-(user, file)
 * packet bitsets. Built by fill_caches; the insert hook is public so tests
 * and the verification suites can assemble explicit configurations.
 */
class CacheConfig {
public:
    static CacheConfig empty(const SystemParams& sys);

    const SystemParams& params() const { return sys_; }

    bool contains(UserId u, FileId f, std::uint32_t packet) const {
        const std::size_t base = word_base(u, f);
        return (bits_[base + (packet - 1) / 64] >> ((packet - 1) % 64)) & 1u;
    }

    int count(UserId u, FileId f) const { return counts_[slot(u, f)]; }
    long user_total(UserId u) const;

    // Sorted packet indices of file f cached at user u.
    std::vector<std::uint32_t> packets(UserId u, FileId f) const;

    void insert(UserId u, FileId f, std::uint32_t packet);

    // Plain-text dump, one `user file: packets...` line per non-empty set.
    void dump_text(std::ostream& os) const;

private:
    explicit CacheConfig(const SystemParams& sys);

    std::size_t slot(UserId u, FileId f) const {
        return (static_cast<std::size_t>(u) - 1) * sys_.files + (f - 1);
    }
    std::size_t word_base(UserId u, FileId f) const { return slot(u, f) * words_per_file_; }

    SystemParams sys_;
    std::size_t words_per_file_ = 0;
    std::vector<std::uint64_t> bits_;
    std::vector<int> counts_;
};

// Algorithm: every user independently caches, for each file, a uniform
// random subset of quota(f) distinct packets. Substreams are derived from
// (seed, user id), so one user's cache never depends on the others.
// cache_size = 0 yields the empty configuration.
CacheConfig fill_caches(const CachingDist& p, const SystemParams& sys, std::uint64_t seed);

} // namespace ccsim

#endif
