#include "ccsim/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "ccsim/errors.hpp"

namespace ccsim {

void CachingDist::validate() const {
    if (probs.empty())
        throw invalid_parameter("CachingDist: need at least one file");
    if (!(cache_size > 0.0) || !std::isfinite(cache_size))
        throw invalid_parameter("CachingDist: cache_size must be finite and > 0");
    const double cap = 1.0 / cache_size;
    KahanSum total;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw invalid_parameter("CachingDist: probabilities must be finite and >= 0");
        if (p > cap + 1e-9)
            throw invalid_parameter("CachingDist: p_f must not exceed 1/cache_size");
        total.add(p);
    }
    if (std::abs(total.value() - 1.0) > 1e-9)
        throw invalid_parameter("CachingDist: probabilities must sum to 1 (got " +
                                std::to_string(total.value()) + ")");
}

namespace {

int cutoff_floor(double cache_size) {
    return std::max(1, static_cast<int>(std::ceil(cache_size - 1e-9)));
}

} // namespace

CachingDist random_lfu_dist(int files, double cache_size, int top_files) {
    if (files < 1)
        throw invalid_parameter("random_lfu_dist: need at least one file");
    if (!(cache_size > 0.0))
        throw invalid_parameter("random_lfu_dist: cache_size must be > 0");
    if (cache_size > static_cast<double>(files))
        throw invalid_parameter("random_lfu_dist: cache_size must not exceed the library size");
    if (top_files < cutoff_floor(cache_size) || top_files > files)
        throw invalid_parameter("random_lfu_dist: top_files must lie in [ceil(cache_size), files]");

    CachingDist dist;
    dist.cache_size = cache_size;
    dist.probs.assign(static_cast<std::size_t>(files), 0.0);
    for (int f = 0; f < top_files; ++f)
        dist.probs[f] = 1.0 / top_files;
    return dist;
}

CachingDist lfu_dist(int files, double cache_size) {
    return random_lfu_dist(files, cache_size, cutoff_floor(cache_size));
}

CachingDist uniform_dist(int files, double cache_size) {
    return random_lfu_dist(files, cache_size, files);
}

std::vector<int> packet_quotas(const CachingDist& p, const SystemParams& sys) {
    sys.validate();
    p.validate();
    if (p.files() != sys.files)
        throw invalid_parameter("packet_quotas: distribution and system disagree on the library size");
    if (std::abs(p.cache_size - sys.cache_size) > 1e-12)
        throw invalid_parameter("packet_quotas: distribution was built for a different cache size");

    const long budget = sys.packet_budget();
    const int B = sys.packets_per_file;
    std::vector<int> quotas(static_cast<std::size_t>(sys.files), 0);

    struct Slack {
        double frac;
        int file;
    };
    std::vector<Slack> slack;
    slack.reserve(quotas.size());

    long assigned = 0;
    for (int f = 0; f < sys.files; ++f) {
        const double target = p.probs[f] * static_cast<double>(budget);
        int base = static_cast<int>(std::floor(target + 1e-9));
        base = std::min(base, B);
        quotas[f] = base;
        assigned += base;
        slack.push_back({target - base, f});
    }

    long leftover = budget - assigned;
    std::sort(slack.begin(), slack.end(), [](const Slack& a, const Slack& b) {
        if (a.frac != b.frac)
            return a.frac > b.frac;
        return a.file < b.file;
    });
    for (std::size_t i = 0; leftover > 0 && i < slack.size(); ++i) {
        if (quotas[slack[i].file] >= B)
            continue;
        ++quotas[slack[i].file];
        --leftover;
    }
    if (leftover > 0)
        throw contract_violation("packet_quotas: budget not placeable under the per-file cap");
    return quotas;
}

CacheConfig::CacheConfig(const SystemParams& sys)
    : sys_(sys),
      words_per_file_((static_cast<std::size_t>(sys.packets_per_file) + 63) / 64),
      bits_(static_cast<std::size_t>(sys.users) * sys.files * words_per_file_, 0),
      counts_(static_cast<std::size_t>(sys.users) * sys.files, 0) {}

CacheConfig CacheConfig::empty(const SystemParams& sys) {
    sys.validate();
    return CacheConfig(sys);
}

long CacheConfig::user_total(UserId u) const {
    long total = 0;
    for (int f = 1; f <= sys_.files; ++f)
        total += count(u, static_cast<FileId>(f));
    return total;
}

std::vector<std::uint32_t> CacheConfig::packets(UserId u, FileId f) const {
    std::vector<std::uint32_t> out;
    out.reserve(static_cast<std::size_t>(count(u, f)));
    for (int b = 1; b <= sys_.packets_per_file; ++b)
        if (contains(u, f, static_cast<std::uint32_t>(b)))
            out.push_back(static_cast<std::uint32_t>(b));
    return out;
}

void CacheConfig::insert(UserId u, FileId f, std::uint32_t packet) {
    if (u < 1 || static_cast<int>(u) > sys_.users || f < 1 || static_cast<int>(f) > sys_.files ||
        packet < 1 || static_cast<int>(packet) > sys_.packets_per_file)
        throw invalid_parameter("CacheConfig::insert: index out of range");
    const std::size_t base = word_base(u, f);
    std::uint64_t& word = bits_[base + (packet - 1) / 64];
    const std::uint64_t mask = 1ULL << ((packet - 1) % 64);
    if (!(word & mask)) {
        word |= mask;
        ++counts_[slot(u, f)];
    }
}

void CacheConfig::dump_text(std::ostream& os) const {
    os << "users " << sys_.users << " files " << sys_.files << " packets_per_file "
       << sys_.packets_per_file << "\n";
    for (int u = 1; u <= sys_.users; ++u) {
        for (int f = 1; f <= sys_.files; ++f) {
            if (count(static_cast<UserId>(u), static_cast<FileId>(f)) == 0)
                continue;
            os << u << " " << f << ":";
            for (std::uint32_t b : packets(static_cast<UserId>(u), static_cast<FileId>(f)))
                os << " " << b;
            os << "\n";
        }
    }
}

CacheConfig fill_caches(const CachingDist& p, const SystemParams& sys, std::uint64_t seed) {
    sys.validate();
    if (sys.cache_size == 0.0)
        return CacheConfig::empty(sys);

    const std::vector<int> quotas = packet_quotas(p, sys);
    CacheConfig config = CacheConfig::empty(sys);
    const int B = sys.packets_per_file;
    std::vector<std::uint32_t> scratch(static_cast<std::size_t>(B));

    for (int u = 1; u <= sys.users; ++u) {
        Rng rng(derive_seed(seed, {kStreamPlacement, static_cast<std::uint64_t>(u)}));
        for (int f = 1; f <= sys.files; ++f) {
            const int quota = quotas[f - 1];
            if (quota == 0)
                continue;
            // partial Fisher-Yates: first `quota` entries are a uniform
            // random subset of {1..B}
            std::iota(scratch.begin(), scratch.end(), 1u);
            for (int i = 0; i < quota; ++i) {
                const std::uint64_t j = i + rng.next_below(static_cast<std::uint64_t>(B - i));
                std::swap(scratch[static_cast<std::size_t>(i)], scratch[j]);
                config.insert(static_cast<UserId>(u), static_cast<FileId>(f), scratch[i]);
            }
        }
    }
    return config;
}

} // namespace ccsim
