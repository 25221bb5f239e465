#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ccsim/errors.hpp"
#include "ccsim/placement.hpp"

using namespace ccsim;

TEST_CASE("random-lfu family corners") {
    const CachingDist lfu_corner = random_lfu_dist(5, 1.0, 1);
    CHECK(lfu_corner.prob(1) == doctest::Approx(1.0));
    for (FileId f = 2; f <= 5; ++f)
        CHECK(lfu_corner.prob(f) == 0.0);

    const CachingDist uniform_corner = random_lfu_dist(5, 1.0, 5);
    for (FileId f = 1; f <= 5; ++f)
        CHECK(uniform_corner.prob(f) == doctest::Approx(0.2));

    CHECK_THROWS_AS(random_lfu_dist(4, 2.0, 1), invalid_parameter);
    CHECK_THROWS_AS(random_lfu_dist(4, 2.0, 5), invalid_parameter);
    CHECK_THROWS_AS(random_lfu_dist(4, 0.0, 2), invalid_parameter);
}

TEST_CASE("lfu and uniform conveniences") {
    const CachingDist lfu = lfu_dist(10, 3.0);
    for (FileId f = 1; f <= 3; ++f)
        CHECK(lfu.prob(f) == doctest::Approx(1.0 / 3.0));
    for (FileId f = 4; f <= 10; ++f)
        CHECK(lfu.prob(f) == 0.0);

    const CachingDist uni = uniform_dist(10, 3.0);
    for (FileId f = 1; f <= 10; ++f)
        CHECK(uni.prob(f) == doctest::Approx(0.1));

    // corners coincide at full cache
    const CachingDist full = lfu_dist(10, 10.0);
    for (FileId f = 1; f <= 10; ++f)
        CHECK(full.prob(f) == doctest::Approx(0.1));

    // fractional cache sizes round the cutoff up
    const CachingDist frac = lfu_dist(10, 2.5);
    CHECK(frac.prob(1) == doctest::Approx(1.0 / 3.0));
    CHECK(frac.prob(3) == doctest::Approx(1.0 / 3.0));
    CHECK(frac.prob(4) == 0.0);
}

TEST_CASE("caching dist validation") {
    CachingDist bad;
    bad.cache_size = 2.0;
    bad.probs = {0.9, 0.1};
    CHECK_THROWS_AS(bad.validate(), invalid_parameter); // 0.9 > 1/2

    CachingDist sum_off;
    sum_off.cache_size = 1.0;
    sum_off.probs = {0.6, 0.6};
    CHECK_THROWS_AS(sum_off.validate(), invalid_parameter);
}

TEST_CASE("full-file quota pins every packet") {
    SystemParams sys{2, 2, 1.0, 4, 7};
    CachingDist p;
    p.cache_size = 1.0;
    p.probs = {1.0, 0.0};
    const CacheConfig cfg = fill_caches(p, sys, sys.seed);
    for (UserId u = 1; u <= 2; ++u) {
        CHECK(cfg.count(u, 1) == 4);
        CHECK(cfg.count(u, 2) == 0);
        CHECK(cfg.user_total(u) == 4);
    }
}

TEST_CASE("split quota caches two packets of each file") {
    SystemParams sys{1, 2, 1.0, 4, 9};
    CachingDist p;
    p.cache_size = 1.0;
    p.probs = {0.5, 0.5};
    const CacheConfig cfg = fill_caches(p, sys, sys.seed);
    CHECK(cfg.count(1, 1) == 2);
    CHECK(cfg.count(1, 2) == 2);
    CHECK(cfg.packets(1, 1).size() == 2);
}

TEST_CASE("quota apportionment conserves the budget under the cap") {
    Rng rng(555);
    for (int i = 0; i < 60; ++i) {
        const int files = 1 + static_cast<int>(rng.next_below(8));
        const int B = 1 + static_cast<int>(rng.next_below(12));
        const double M = (1 + rng.next_below(static_cast<std::uint64_t>(files) * 4)) / 4.0;

        // random feasible caching distribution
        std::vector<double> w(static_cast<std::size_t>(files));
        const double cap = 1.0 / M;
        for (int attempt = 0;; ++attempt) {
            double total = 0;
            for (auto& x : w) {
                x = rng.next_unit();
                total += x;
            }
            bool ok = true;
            for (auto& x : w) {
                x /= total;
                if (x > cap)
                    ok = false;
            }
            if (ok || attempt > 50)
                break;
        }
        bool feasible = true;
        for (double x : w)
            if (x > cap)
                feasible = false;
        if (!feasible)
            for (auto& x : w)
                x = 1.0 / files;

        SystemParams sys{1, files, M, B, 1};
        CachingDist p;
        p.cache_size = M;
        p.probs = w;
        const std::vector<int> quotas = packet_quotas(p, sys);

        long total = 0;
        for (int fq : quotas) {
            CHECK(fq >= 0);
            CHECK(fq <= B);
            total += fq;
        }
        CHECK(total == sys.packet_budget());
    }
}

TEST_CASE("integral targets reproduce exactly") {
    SystemParams sys{1, 4, 2.0, 10, 1};
    CachingDist p;
    p.cache_size = 2.0;
    p.probs = {0.4, 0.3, 0.2, 0.1};
    // targets 8, 6, 4, 2
    const std::vector<int> quotas = packet_quotas(p, sys);
    CHECK(quotas == std::vector<int>{8, 6, 4, 2});
}

TEST_CASE("cache fill respects quotas and stays deterministic") {
    SystemParams sys{5, 6, 2.0, 16, 31337};
    const CachingDist p = random_lfu_dist(6, 2.0, 4);
    const std::vector<int> quotas = packet_quotas(p, sys);
    const CacheConfig a = fill_caches(p, sys, sys.seed);
    const CacheConfig b = fill_caches(p, sys, sys.seed);

    for (UserId u = 1; u <= 5; ++u) {
        long total = 0;
        for (FileId f = 1; f <= 6; ++f) {
            CHECK(a.count(u, f) == quotas[f - 1]);
            CHECK(a.packets(u, f) == b.packets(u, f));
            const auto pkts = a.packets(u, f);
            CHECK(static_cast<int>(pkts.size()) == a.count(u, f)); // bitset: no duplicates
            total += a.count(u, f);
        }
        CHECK(total <= sys.packet_budget());
    }
}

TEST_CASE("a user's cache ignores the rest of the population") {
    const CachingDist p = random_lfu_dist(4, 1.0, 3);
    SystemParams small{2, 4, 1.0, 8, 99};
    SystemParams big{7, 4, 1.0, 8, 99};
    const CacheConfig a = fill_caches(p, small, 99);
    const CacheConfig b = fill_caches(p, big, 99);
    for (UserId u = 1; u <= 2; ++u)
        for (FileId f = 1; f <= 4; ++f)
            CHECK(a.packets(u, f) == b.packets(u, f));
}

TEST_CASE("two users' subsets overlap like independent draws") {
    // quota 5000 per file out of B = 10000; the shared-packet count between
    // two users follows a hypergeometric with mean quota^2/B = 2500 and
    // sigma just over 25
    SystemParams sys{2, 2, 1.0, 10000, 20240101};
    CachingDist p;
    p.cache_size = 1.0;
    p.probs = {0.5, 0.5};
    const CacheConfig cfg = fill_caches(p, sys, sys.seed);
    CHECK(cfg.count(1, 1) == 5000);
    CHECK(cfg.count(2, 1) == 5000);

    long overlap = 0;
    for (int b = 1; b <= 10000; ++b)
        if (cfg.contains(1, 1, static_cast<std::uint32_t>(b)) &&
            cfg.contains(2, 1, static_cast<std::uint32_t>(b)))
            ++overlap;
    CHECK(std::abs(static_cast<double>(overlap) - 2500.0) <= 75.0);
}

TEST_CASE("each packet is cached with probability quota/B") {
    SystemParams sys{1, 2, 1.0, 8, 0};
    CachingDist p;
    p.cache_size = 1.0;
    p.probs = {0.5, 0.5}; // quota 4 of 8, per-packet probability 1/2
    const int rounds = 400;
    int hits = 0;
    for (int r = 0; r < rounds; ++r) {
        const CacheConfig cfg = fill_caches(p, sys, static_cast<std::uint64_t>(r));
        if (cfg.contains(1, 1, 3))
            ++hits;
    }
    const double freq = static_cast<double>(hits) / rounds;
    const double tol = 3.0 * std::sqrt(0.25 / rounds);
    CHECK(std::abs(freq - 0.5) <= tol);
}

TEST_CASE("empty cache size yields an empty configuration") {
    SystemParams sys{3, 4, 0.0, 8, 5};
    CachingDist unused;
    unused.cache_size = 1.0;
    unused.probs = {0.25, 0.25, 0.25, 0.25};
    const CacheConfig cfg = fill_caches(unused, sys, sys.seed);
    for (UserId u = 1; u <= 3; ++u)
        CHECK(cfg.user_total(u) == 0);
}

TEST_CASE("mismatched distribution and system are rejected") {
    SystemParams sys{1, 3, 2.0, 4, 0};
    CachingDist p;
    p.cache_size = 1.0; // built for a different cache size
    p.probs = {0.5, 0.25, 0.25};
    CHECK_THROWS_AS(fill_caches(p, sys, 0), invalid_parameter);
}

TEST_CASE("cache dump lists every non-empty set") {
    SystemParams sys{1, 2, 1.0, 2, 0};
    CacheConfig cfg = CacheConfig::empty(sys);
    cfg.insert(1, 1, 2);
    cfg.insert(1, 1, 1);
    std::ostringstream os;
    cfg.dump_text(os);
    CHECK(os.str() == "users 1 files 2 packets_per_file 2\n1 1: 1 2\n");
}
