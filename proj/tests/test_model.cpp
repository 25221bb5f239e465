#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccsim/errors.hpp"
#include "ccsim/model.hpp"

using namespace ccsim;

TEST_CASE("system params validation and packet budget") {
    SystemParams sys{4, 10, 2.0, 8, 42};
    sys.validate();
    CHECK(sys.packet_budget() == 16);

    // representation slop must not shave a packet off the budget
    SystemParams frac{4, 10, 0.3, 10, 0};
    CHECK(frac.packet_budget() == 3);
    SystemParams half{4, 10, 2.5, 4, 0};
    CHECK(half.packet_budget() == 10);

    CHECK_THROWS_AS((SystemParams{0, 1, 0.0, 1, 0}.validate()), invalid_parameter);
    CHECK_THROWS_AS((SystemParams{1, 0, 0.0, 1, 0}.validate()), invalid_parameter);
    CHECK_THROWS_AS((SystemParams{1, 2, 3.0, 1, 0}.validate()), invalid_parameter);
    CHECK_THROWS_AS((SystemParams{1, 2, -1.0, 1, 0}.validate()), invalid_parameter);
    CHECK_THROWS_AS((SystemParams{1, 2, 1.0, 0, 0}.validate()), invalid_parameter);
}

TEST_CASE("zipf matches hand-evaluated points") {
    const PopularityDist flat = PopularityDist::zipf(4, 0.0);
    for (FileId f = 1; f <= 4; ++f)
        CHECK(flat.prob(f) == doctest::Approx(0.25).epsilon(1e-12));

    const PopularityDist two = PopularityDist::zipf(2, 1.0);
    CHECK(two.prob(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(two.prob(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // sum of i^-2 over {1,2,3} is 49/36
    const PopularityDist steep = PopularityDist::zipf(3, 2.0);
    CHECK(steep.prob(1) == doctest::Approx(36.0 / 49.0).epsilon(1e-12));
    CHECK(steep.prob(2) == doctest::Approx(9.0 / 49.0).epsilon(1e-12));
    CHECK(steep.prob(3) == doctest::Approx(4.0 / 49.0).epsilon(1e-12));
}

TEST_CASE("zipf rejects bad parameters") {
    CHECK_THROWS_AS(PopularityDist::zipf(0, 1.0), invalid_parameter);
    CHECK_THROWS_AS(PopularityDist::zipf(3, -0.5), invalid_parameter);
    CHECK_THROWS_AS(PopularityDist::zipf(3, std::nan("")), invalid_parameter);
    CHECK_THROWS_AS(PopularityDist::zipf(3, std::numeric_limits<double>::infinity()),
                    invalid_parameter);
}

TEST_CASE("zipf is normalized and monotone across sizes and exponents") {
    Rng rng(777);
    for (int i = 0; i < 40; ++i) {
        const int m = 1 + static_cast<int>(rng.next_below(2000));
        const double alpha = 3.0 * rng.next_unit();
        const PopularityDist q = PopularityDist::zipf(m, alpha);

        KahanSum total;
        for (int f = m; f >= 1; --f)
            total.add(q.prob(static_cast<FileId>(f)));
        CHECK(std::abs(total.value() - 1.0) <= 1e-12);

        for (int f = 2; f <= m; ++f) {
            CHECK(q.prob(static_cast<FileId>(f)) <= q.prob(static_cast<FileId>(f - 1)));
            if (alpha > 0.0)
                CHECK(q.prob(static_cast<FileId>(f)) < q.prob(static_cast<FileId>(f - 1)));
        }
    }

    // the sizes the experiments actually use, plus the stress corner
    for (double alpha : {0.0, 0.6, 1.0, 1.6, 3.0}) {
        const PopularityDist q = PopularityDist::zipf(1000000, alpha);
        KahanSum total;
        for (int f = q.files(); f >= 1; --f)
            total.add(q.prob(static_cast<FileId>(f)));
        CHECK(std::abs(total.value() - 1.0) <= 1e-12);
    }
}

TEST_CASE("explicit popularity validates") {
    CHECK_NOTHROW(PopularityDist::from_probs({0.7, 0.21, 0.09}));
    CHECK_THROWS_AS(PopularityDist::from_probs({0.7, 0.2}), invalid_parameter);
    CHECK_THROWS_AS(PopularityDist::from_probs({1.2, -0.2}), invalid_parameter);
    CHECK_THROWS_AS(PopularityDist::from_probs({}), invalid_parameter);
}

TEST_CASE("degenerate demand sampling") {
    const PopularityDist q = PopularityDist::from_probs({1.0, 0.0, 0.0});
    Rng rng(1);
    const DemandRealization d = sample_demands(q, 5, rng);
    for (FileId f : d.requests)
        CHECK(f == 1);
    CHECK(distinct_file_count(d) == 1);
}

TEST_CASE("demand sampling is deterministic in the seed") {
    const PopularityDist q = PopularityDist::zipf(20, 0.8);
    Rng a(999), b(999), c(1000);
    const DemandRealization da = sample_demands(q, 64, a);
    const DemandRealization db = sample_demands(q, 64, b);
    const DemandRealization dc = sample_demands(q, 64, c);
    CHECK(da.requests == db.requests);
    CHECK(da.requests != dc.requests);
}

TEST_CASE("fair-coin demands pass a chi-square check") {
    const PopularityDist q = PopularityDist::from_probs({0.5, 0.5});
    Rng rng(20240308);
    const int n = 100000;
    const DemandRealization d = sample_demands(q, n, rng);
    long ones = 0;
    for (FileId f : d.requests)
        if (f == 1)
            ++ones;
    const double freq = static_cast<double>(ones) / n;
    CHECK(std::abs(freq - 0.5) <= 0.01);

    // chi-square with 1 dof; 10.83 is the 0.001 quantile
    const double expected = n / 2.0;
    const double chi2 = (ones - expected) * (ones - expected) / expected +
                        ((n - ones) - expected) * ((n - ones) - expected) / expected;
    CHECK(chi2 <= 10.83);
}

TEST_CASE("sampled marginals track the distribution") {
    const int n = 100000;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const PopularityDist q = PopularityDist::zipf(8, 0.25 * static_cast<double>(seed % 5));
        Rng rng(seed);
        const DemandRealization d = sample_demands(q, n, rng);
        std::vector<long> counts(9, 0);
        for (FileId f : d.requests)
            ++counts[f];
        for (FileId f = 1; f <= 8; ++f) {
            const double qf = q.prob(f);
            const double tol = 4.0 * std::sqrt(qf * (1.0 - qf) / n);
            CHECK(std::abs(static_cast<double>(counts[f]) / n - qf) <= tol);
        }
    }
}
