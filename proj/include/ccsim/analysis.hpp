#ifndef CCSIM_ANALYSIS_HPP
#define CCSIM_ANALYSIS_HPP

#include <cstdint>
#include <vector>

#include "ccsim/model.hpp"
#include "ccsim/placement.hpp"

namespace ccsim {

// Expected number of distinct files in n i.i.d. requests:
// sum_f (1 - (1 - q_f)^n). This is the rate of naively multicasting each
// requested file once, the no-caching-gain fallback.
double naive_multicast_rate(const PopularityDist& q, int users);

/*
 * leader(f, l): probability that file f attains the maximum per-file term
 * (p_f M)^(l-1) (1 - p_f M)^(n-l+1) among the files requested by a random
 * l-user subset. Computed in closed form: rank files by the term
 * (descending, ties to the smaller id); f leads iff f is requested and no
 * higher-ranked file is, so with T_f the popularity mass strictly above f,
 * leader(f, l) = (1 - T_f)^l - (1 - T_f - q_f)^l. Rows telescope to 1.
 */
class LeaderProbs {
public:
    LeaderProbs(int files, int users) : files_(files), users_(users),
        prob_(static_cast<std::size_t>(files) * users, 0.0) {}

    int files() const { return files_; }
    int users() const { return users_; }

    double at(int subset_size, FileId f) const {
        return prob_[static_cast<std::size_t>(subset_size - 1) * files_ + (f - 1)];
    }
    double& at(int subset_size, FileId f) {
        return prob_[static_cast<std::size_t>(subset_size - 1) * files_ + (f - 1)];
    }

private:
    int files_;
    int users_;
    std::vector<double> prob_;
};

LeaderProbs leader_probabilities(const CachingDist& p, const PopularityDist& q, int users);

// Analytic bound on the expected coded-delivery rate for caching
// distribution p: the double sum over subset sizes and files of
// C(n,l) * leader(f,l) * (1-p_f M)^(n-l+1) (p_f M)^(l-1), with terms
// evaluated in the log domain (log-gamma binomials) and accumulated in
// descending magnitude with compensation. Convention 0^0 = 1 so the
// M = 0 and p_f = 0 limits degenerate correctly.
double coded_rate_bound(const CachingDist& p, const PopularityDist& q, int users);

struct RateBound {
    double coded = 0.0; // the double-sum expression
    double naive = 0.0; // expected distinct requests
    double value = 0.0; // min of the two
};

RateBound rate_upper_bound(const CachingDist& p, const PopularityDist& q, int users);

// Closed-form specialization of rate_upper_bound for the Random-LFU family
// (uniform over the top_files most popular files). Exploits that all
// cached files share one per-file term, so the leader sums telescope; the
// whole bound costs O(n) instead of O(n * m). Algebraically identical to
// the generic path, which the tests cross-check.
RateBound random_lfu_bound(const PopularityDist& q, int users, double cache_size, int top_files);

// Rate bound at M = 0: no caching distribution exists, the coded
// expression degenerates to n and the naive fallback is binding.
RateBound no_cache_bound(const PopularityDist& q, int users);

struct CutoffSearch {
    int top_files = 0;
    RateBound bound;
};

// One-dimensional scan of the Random-LFU cutoff over
// {ceil(cache_size), ..., files}; ties resolve to the smallest cutoff.
CutoffSearch search_cutoff(const PopularityDist& q, int users, double cache_size);

// Closed-form cutoff for Zipf exponents alpha in [0, 1):
// round(min((n (1-alpha) M / m)^(1/alpha) * m, m)) clamped into
// [ceil(M), m]. At alpha = 0 the power is taken as its one-sided limit.
// Throws wrong_regime for alpha >= 1.
int flat_zipf_cutoff(int users, int files, double cache_size, double alpha);

struct TailBound {
    double value = 0.0;      // min(expression, m)
    double coarse_cap = 0.0; // min(m/M - 1, n, m)
};

// Closed-form bound for the flat regime at a given cutoff:
// (cutoff/M - 1) (1 - (1 - M/cutoff)^(n Q)) + n (1 - Q), Q the popularity
// mass of the cutoff prefix, capped at m. Never exceeds coarse_cap.
TailBound flat_zipf_bound(int users, int files, double cache_size, const PopularityDist& q,
                          int top_files);

// Steep regime (alpha > 1 with n growing faster than m^alpha): the right
// cutoff is the whole library, and the bound is capped by
// min(m/M - 1 + slack, m). slack absorbs the vanishing correction term.
int steep_zipf_cutoff(int files);
double steep_zipf_cap(int files, double cache_size, double slack = 0.0);

// LFU baseline: the top floor(M) files are always cached whole, every
// other requested file is naively multicast once.
double lfu_rate(const PopularityDist& q, int users, double cache_size);

struct RapOptions {
    long budget = 50000;     // max objective evaluations
    double grid_step = 0.01; // dense-grid resolution for small libraries
};

struct RapResult {
    CachingDist dist;
    RateBound bound;
    long evals = 0;
};

// Searches for the caching distribution minimizing rate_upper_bound over
// the feasible simplex (p_f <= 1/M). Small libraries (m <= 4) get a dense
// grid pass; every run is seeded with the Random-LFU scan winner and the
// LFU/uniform corners and refined by pairwise-transfer coordinate descent,
// so the result never loses to any of those by construction.
RapResult optimize_caching(const PopularityDist& q, int users, double cache_size,
                           const RapOptions& options = {});

} // namespace ccsim

#endif
