#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccsim/analysis.hpp"
#include "ccsim/errors.hpp"
#include "ccsim/oracles.hpp"
#include "ccsim/rational.hpp"

using namespace ccsim;

namespace {

CachingDist dist_of(std::vector<double> probs, double cache_size) {
    CachingDist d;
    d.probs = std::move(probs);
    d.cache_size = cache_size;
    return d;
}

// exact-rational mirror of a Random-LFU point, popularity taken from the
// double values with the last file absorbing the rounding residue
oracles::RationalInstance rational_mirror(const PopularityDist& q, int users, int cache_size,
                                          int top_files) {
    oracles::RationalInstance inst;
    inst.users = users;
    inst.cache_size = cache_size;
    Rational left(1);
    for (int f = 1; f < q.files(); ++f) {
        const Rational r = Rational::from_double(q.prob(static_cast<FileId>(f)));
        inst.popularity.push_back(r);
        left = left - r;
    }
    inst.popularity.push_back(left);

    Rational share(1, static_cast<std::uint64_t>(top_files));
    Rational placed(0);
    for (int f = 1; f <= q.files(); ++f) {
        if (f < top_files) {
            inst.caching.push_back(share);
            placed = placed + share;
        } else if (f == top_files) {
            inst.caching.push_back(Rational(1) - placed);
        } else {
            inst.caching.push_back(Rational(0));
        }
    }
    return inst;
}

} // namespace

TEST_CASE("naive multicast rate on hand-checked points") {
    const PopularityDist q3 = PopularityDist::from_probs({0.7, 0.21, 0.09});
    CHECK(naive_multicast_rate(q3, 1) == doctest::Approx(1.0).epsilon(1e-12));

    const PopularityDist fair = PopularityDist::from_probs({0.5, 0.5});
    CHECK(naive_multicast_rate(fair, 2) == doctest::Approx(1.5).epsilon(1e-12));

    // (1-0.3^3) + (1-0.79^3) + (1-0.91^3) evaluated term by term
    CHECK(std::abs(naive_multicast_rate(q3, 3) - 1.72639) <= 1e-5);

    // full-support single file
    const PopularityDist point = PopularityDist::from_probs({1.0});
    CHECK(naive_multicast_rate(point, 50) == doctest::Approx(1.0));
}

TEST_CASE("leader probabilities degenerate cases") {
    const PopularityDist q1 = PopularityDist::from_probs({1.0});
    const LeaderProbs solo = leader_probabilities(dist_of({1.0}, 1.0), q1, 6);
    for (int ell = 1; ell <= 6; ++ell)
        CHECK(solo.at(ell, 1) == doctest::Approx(1.0));

    // singleton subsets: the requested file always leads, whatever p is
    const PopularityDist q = PopularityDist::from_probs({0.5, 0.3, 0.2});
    const LeaderProbs l = leader_probabilities(dist_of({0.6, 0.3, 0.1}, 1.0), q, 4);
    CHECK(l.at(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(l.at(1, 2) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(l.at(1, 3) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("leader probabilities at a worked two-file point") {
    // ranking term at subset size 2 favors file 2 (0.144 vs 0.096), so
    // file 2 leads whenever requested: 1 - 0.8^2 = 0.36, file 1 gets the
    // rest of the mass: 0.8^2 - 0 = 0.64
    const PopularityDist q = PopularityDist::from_probs({0.8, 0.2});
    const CachingDist p = dist_of({0.6, 0.4}, 1.0);
    const LeaderProbs l = leader_probabilities(p, q, 3);
    CHECK(l.at(2, 1) == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(l.at(2, 2) == doctest::Approx(0.36).epsilon(1e-12));
}

TEST_CASE("leader probabilities match Monte-Carlo at the worked point") {
    const PopularityDist q = PopularityDist::from_probs({0.8, 0.2});
    const CachingDist p = dist_of({0.6, 0.4}, 1.0);
    const LeaderProbs exact = leader_probabilities(p, q, 3);
    const long samples = 1000000;
    const std::vector<double> mc = oracles::leader_probabilities_mc(p, q, 3, 2, samples, 8080);
    for (FileId f = 1; f <= 2; ++f) {
        const double want = exact.at(2, f);
        const double got = mc[f - 1];
        const double tol = 3.0 * std::sqrt(want * (1 - want) / samples);
        CHECK(std::abs(want - got) <= tol);
    }
}

TEST_CASE("leader rows always sum to one") {
    const PopularityDist zq = PopularityDist::zipf(50, 1.1);
    const CachingDist zp = random_lfu_dist(50, 3.0, 17);
    const LeaderProbs zl = leader_probabilities(zp, zq, 40);
    for (int ell = 1; ell <= 40; ++ell) {
        KahanSum row;
        for (int f = 1; f <= 50; ++f) {
            const double v = zl.at(ell, static_cast<FileId>(f));
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            row.add(v);
        }
        CHECK(std::abs(row.value() - 1.0) <= 1e-9);
    }

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const oracles::RationalInstance inst = oracles::random_rational_instance(seed, 12, 8);
        std::vector<double> qd, pd;
        for (const auto& r : inst.popularity)
            qd.push_back(r.to_double());
        for (const auto& r : inst.caching)
            pd.push_back(r.to_double());
        const LeaderProbs l = leader_probabilities(dist_of(pd, inst.cache_size),
                                                   PopularityDist::from_probs(qd), inst.users);
        for (int ell = 1; ell <= inst.users; ++ell) {
            KahanSum row;
            for (int f = 1; f <= static_cast<int>(qd.size()); ++f)
                row.add(l.at(ell, static_cast<FileId>(f)));
            CHECK(std::abs(row.value() - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("coded bound vanishes only under full caching") {
    const PopularityDist q = PopularityDist::zipf(6, 0.7);
    CHECK(coded_rate_bound(uniform_dist(6, 6.0), q, 9) == doctest::Approx(0.0));

    const RateBound full = rate_upper_bound(uniform_dist(6, 6.0), q, 9);
    CHECK(full.value == doctest::Approx(0.0));

    const RateBound none = no_cache_bound(q, 9);
    CHECK(none.coded == doctest::Approx(9.0));
    CHECK(none.value == doctest::Approx(naive_multicast_rate(q, 9)));
    CHECK(none.value <= none.coded);
}

TEST_CASE("coded bound equals the exact rational on the worked instance") {
    // m=2, n=2, M=1, p=[3/5, 2/5], q=[4/5, 1/5]: the double sum collapses
    // to 2/5 + 6/25 = 16/25
    oracles::RationalInstance inst;
    inst.users = 2;
    inst.cache_size = 1;
    inst.popularity = {Rational(4, 5), Rational(1, 5)};
    inst.caching = {Rational(3, 5), Rational(2, 5)};
    const Rational exact = oracles::coded_rate_bound_exact(inst);
    CHECK(exact == Rational(16, 25));

    const double coded = coded_rate_bound(dist_of({0.6, 0.4}, 1.0),
                                          PopularityDist::from_probs({0.8, 0.2}), 2);
    CHECK(coded == doctest::Approx(0.64).epsilon(1e-12));
}

TEST_CASE("coded bound matches exact rationals on random instances") {
    for (std::uint64_t seed = 21; seed <= 32; ++seed) {
        const oracles::RationalInstance inst = oracles::random_rational_instance(seed, 10, 6);
        std::vector<double> qd, pd;
        for (const auto& r : inst.popularity)
            qd.push_back(r.to_double());
        for (const auto& r : inst.caching)
            pd.push_back(r.to_double());
        const double coded = coded_rate_bound(dist_of(pd, inst.cache_size),
                                              PopularityDist::from_probs(qd), inst.users);
        const double exact = oracles::coded_rate_bound_exact(inst).to_double();
        CHECK(std::abs(coded - exact) <= 1e-9 * std::max(1.0, exact));

        const double naive = naive_multicast_rate(PopularityDist::from_probs(qd), inst.users);
        const double naive_exact = oracles::naive_multicast_rate_exact(inst).to_double();
        CHECK(std::abs(naive - naive_exact) <= 1e-9 * std::max(1.0, naive_exact));
    }
}

TEST_CASE("closed-form family bound agrees with the generic path") {
    Rng rng(606);
    for (int i = 0; i < 25; ++i) {
        const int m = 2 + static_cast<int>(rng.next_below(12));
        const int M = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(std::min(3, m))));
        const int cutoff = M + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m - M + 1)));
        const int n = 1 + static_cast<int>(rng.next_below(16));
        const double alpha = 2.0 * rng.next_unit();
        const PopularityDist q = PopularityDist::zipf(m, alpha);

        const RateBound fast = random_lfu_bound(q, n, M, cutoff);
        const RateBound generic = rate_upper_bound(random_lfu_dist(m, M, cutoff), q, n);
        CHECK(std::abs(fast.coded - generic.coded) <= 1e-9 * std::max(1.0, generic.coded));
        CHECK(std::abs(fast.value - generic.value) <= 1e-9 * std::max(1.0, generic.value));
    }
}

TEST_CASE("uniform caching collapses to the closed product form") {
    for (int n : {1, 4, 17}) {
        for (int m : {3, 9}) {
            for (double M : {1.0, 2.0}) {
                const PopularityDist q = PopularityDist::zipf(m, 0.9);
                const double x = M / m;
                const double expect = (1.0 - x) / x * -std::expm1(n * std::log1p(-x));
                const RateBound got = random_lfu_bound(q, n, M, m);
                CHECK(got.coded == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("rate bound at the single-file corner") {
    // p = [1,0,0] with M = 1: the cached file costs nothing, every request
    // for the others needs its own transmission, so the coded expression
    // is n * (q_2 + q_3) = 0.9 at n = 3 and the bound stays below the
    // naive 1.72639
    const PopularityDist q = PopularityDist::from_probs({0.7, 0.21, 0.09});
    const RateBound corner = rate_upper_bound(dist_of({1.0, 0.0, 0.0}, 1.0), q, 3);
    CHECK(corner.coded == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(corner.naive == doctest::Approx(1.72639).epsilon(1e-4));
    CHECK(corner.value == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("flat-regime cutoff formula") {
    CHECK(flat_zipf_cutoff(100, 100, 10.0, 0.5) == 100); // (5)^2*100 clamps at m
    CHECK(flat_zipf_cutoff(4, 100, 1.0, 0.5) == 1);      // (0.02)^2*100 rounds to 0, clamps up
    for (double alpha : {0.0, 0.3, 0.9})
        CHECK(flat_zipf_cutoff(7, 10, 10.0, alpha) == 10); // M = m forces the full library

    // alpha = 0 limit: the base decides between the extremes
    CHECK(flat_zipf_cutoff(1000, 20, 5.0, 0.0) == 20); // base 250
    CHECK(flat_zipf_cutoff(1, 20, 1.0, 0.0) == 1);     // base 0.05

    CHECK_THROWS_AS(flat_zipf_cutoff(10, 10, 1.0, 1.0), wrong_regime);
    CHECK_THROWS_AS(flat_zipf_cutoff(10, 10, 1.0, 1.7), wrong_regime);
    CHECK_THROWS_AS(flat_zipf_cutoff(10, 10, 1.0, -0.1), invalid_parameter);
}

TEST_CASE("flat-regime bound endpoints") {
    const PopularityDist q = PopularityDist::zipf(5, 0.5);
    // cutoff = M integral: only the tail term survives
    const TailBound lfu_corner = flat_zipf_bound(10, 5, 2.0, q, 2);
    double tail = 0.0;
    for (int f = 3; f <= 5; ++f)
        tail += q.prob(static_cast<FileId>(f));
    CHECK(lfu_corner.value == doctest::Approx(10.0 * tail).epsilon(1e-9));

    // cutoff = m with no tail: bounded by m/M - 1
    const TailBound uni_corner = flat_zipf_bound(10, 5, 2.0, q, 5);
    CHECK(uni_corner.value <= 5.0 / 2.0 - 1.0 + 1e-12);

    // the worked grid point stays under its own coarse cap of 24
    const PopularityDist q100 = PopularityDist::zipf(100, 0.6);
    const int cutoff = flat_zipf_cutoff(50, 100, 4.0, 0.6);
    const TailBound grid = flat_zipf_bound(50, 100, 4.0, q100, cutoff);
    CHECK(grid.coarse_cap == doctest::Approx(24.0));
    CHECK(grid.value <= grid.coarse_cap);
}

TEST_CASE("cutoff search hits the corners") {
    const PopularityDist q = PopularityDist::zipf(12, 0.8);
    const CutoffSearch full = search_cutoff(q, 6, 12.0);
    CHECK(full.top_files == 12);
    CHECK(full.bound.value == doctest::Approx(0.0));

    const CutoffSearch best = search_cutoff(q, 6, 2.0);
    const RateBound at_lfu = random_lfu_bound(q, 6, 2.0, 2);
    const RateBound at_uniform = random_lfu_bound(q, 6, 2.0, 12);
    CHECK(best.bound.value <= at_lfu.value + 1e-12);
    CHECK(best.bound.value <= at_uniform.value + 1e-12);
}

TEST_CASE("cutoff search matches a generic-path scan") {
    const PopularityDist q = PopularityDist::zipf(50, 1.6);
    const int users = 20;
    const double M = 2.0;
    const CutoffSearch fast = search_cutoff(q, users, M);

    int best_cutoff = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int cutoff = 2; cutoff <= 50; ++cutoff) {
        const RateBound b = rate_upper_bound(random_lfu_dist(50, M, cutoff), q, users);
        if (b.value < best_value) {
            best_value = b.value;
            best_cutoff = cutoff;
        }
    }
    CHECK(fast.top_files == best_cutoff);
    CHECK(std::abs(fast.bound.value - best_value) <= 1e-9 * std::max(1.0, best_value));

    // exact-rational spot check of the winning point
    const oracles::RationalInstance mirror = rational_mirror(q, users, 2, fast.top_files);
    const double exact = oracles::coded_rate_bound_exact(mirror).to_double();
    CHECK(std::abs(fast.bound.coded - exact) <= 1e-9 * std::max(1.0, exact));
}

TEST_CASE("cutoff search value weakly improves with cache size") {
    const PopularityDist q = PopularityDist::zipf(30, 0.6);
    double prev = std::numeric_limits<double>::infinity();
    for (double M : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 30.0}) {
        const double value = search_cutoff(q, 15, M).bound.value;
        CHECK(value <= prev + 1e-9);
        prev = value;
    }
}

TEST_CASE("uniform popularity prefers wide caching for large populations") {
    const PopularityDist q = PopularityDist::zipf(20, 0.0);
    const CutoffSearch scan = search_cutoff(q, 200, 5.0);
    CHECK(scan.bound.value <= random_lfu_bound(q, 200, 5.0, 5).value + 1e-12);
    CHECK(scan.bound.value <= random_lfu_bound(q, 200, 5.0, 20).value + 1e-12);
    CHECK(flat_zipf_cutoff(200, 20, 5.0, 0.0) == 20);
}

TEST_CASE("steep-regime cap holds for the full-library cutoff") {
    for (int m : {20, 60}) {
        const PopularityDist q = PopularityDist::zipf(m, 1.6);
        for (double M : {1.0, 4.0}) {
            const int cutoff = steep_zipf_cutoff(m);
            CHECK(cutoff == m);
            const RateBound b = random_lfu_bound(q, 50 * m, M, cutoff);
            CHECK(b.value <= steep_zipf_cap(m, M, 0.0) + 1e-9);
        }
    }
}

TEST_CASE("lfu baseline rate") {
    const PopularityDist q = PopularityDist::zipf(10, 0.9);
    CHECK(lfu_rate(q, 25, 10.0) == doctest::Approx(0.0));
    CHECK(lfu_rate(q, 25, 0.0) == doctest::Approx(naive_multicast_rate(q, 25)).epsilon(1e-12));

    // direct evaluation of the tail sum
    double direct = 0.0;
    for (int f = 4; f <= 10; ++f)
        direct += 1.0 - std::pow(1.0 - q.prob(static_cast<FileId>(f)), 25);
    CHECK(lfu_rate(q, 25, 3.0) == doctest::Approx(direct).epsilon(1e-9));

    // fractional cache keeps only the floor
    CHECK(lfu_rate(q, 25, 3.9) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("caching optimizer dominates its seeds") {
    const PopularityDist q = PopularityDist::from_probs({0.7, 0.21, 0.09});
    for (int n : {3, 15}) {
        const RapResult rap = optimize_caching(q, n, 1.0);
        rap.dist.validate();
        const double scan = search_cutoff(q, n, 1.0).bound.value;
        CHECK(rap.bound.value <= scan + 1e-12);
        CHECK(rap.bound.value <=
              rate_upper_bound(dist_of({1.0, 0.0, 0.0}, 1.0), q, n).value + 1e-9);
        CHECK(rap.bound.value <=
              rate_upper_bound(uniform_dist(3, 1.0), q, n).value + 1e-9);
        CHECK(rap.evals > 0);
    }

    // full cache pins the optimizer to the uniform point
    const PopularityDist qz = PopularityDist::zipf(4, 1.2);
    const RapResult full = optimize_caching(qz, 5, 4.0);
    CHECK(full.bound.value == doctest::Approx(0.0));
    for (FileId f = 1; f <= 4; ++f)
        CHECK(full.dist.prob(f) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("optimizer respects its evaluation budget") {
    const PopularityDist q = PopularityDist::zipf(6, 0.5);
    RapOptions opts;
    opts.budget = 64;
    const RapResult rap = optimize_caching(q, 8, 2.0, opts);
    CHECK(rap.evals <= 64 + 16); // one in-flight line scan may finish
    rap.dist.validate();
}
