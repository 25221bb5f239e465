#include "ccsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccsim/errors.hpp"

namespace ccsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// suffix[i] = q_{i+1} + ... + q_m, accumulated from the tail so the small
// terms are not swallowed
std::vector<double> suffix_mass(const PopularityDist& q) {
    const int m = q.files();
    std::vector<double> suffix(static_cast<std::size_t>(m) + 1, 0.0);
    KahanSum acc;
    for (int f = m; f >= 1; --f) {
        acc.add(q.prob(static_cast<FileId>(f)));
        suffix[static_cast<std::size_t>(f) - 1] = acc.value();
    }
    return suffix;
}

int cutoff_floor(double cache_size) {
    return std::max(1, static_cast<int>(std::ceil(cache_size - 1e-9)));
}

} // namespace

double naive_multicast_rate(const PopularityDist& q, int users) {
    if (users < 1)
        throw invalid_parameter("naive_multicast_rate: users must be >= 1");
    KahanSum sum;
    for (int f = q.files(); f >= 1; --f) {
        const double qf = q.prob(static_cast<FileId>(f));
        sum.add(-std::expm1(users * std::log1p(-qf)));
    }
    return sum.value();
}

LeaderProbs leader_probabilities(const CachingDist& p, const PopularityDist& q, int users) {
    p.validate();
    if (p.files() != q.files())
        throw invalid_parameter("leader_probabilities: p and q disagree on the library size");
    if (users < 1)
        throw invalid_parameter("leader_probabilities: users must be >= 1");

    const int m = q.files();
    const int n = users;

    // per-file log factors of the ranking term
    std::vector<double> log_share(static_cast<std::size_t>(m));  // log(p_f M)
    std::vector<double> log_rest(static_cast<std::size_t>(m));   // log(1 - p_f M)
    for (int f = 0; f < m; ++f) {
        const double pm = std::clamp(p.probs[static_cast<std::size_t>(f)] * p.cache_size, 0.0, 1.0);
        log_share[static_cast<std::size_t>(f)] = pm > 0.0 ? std::log(pm) : -kInf;
        log_rest[static_cast<std::size_t>(f)] = pm < 1.0 ? std::log1p(-pm) : -kInf;
    }

    LeaderProbs out(m, n);
    std::vector<int> order(static_cast<std::size_t>(m));
    std::vector<double> key(static_cast<std::size_t>(m));
    for (int ell = 1; ell <= n; ++ell) {
        for (int f = 0; f < m; ++f) {
            const double a = (ell == 1) ? 0.0 : (ell - 1) * log_share[static_cast<std::size_t>(f)];
            key[static_cast<std::size_t>(f)] = a + (n - ell + 1) * log_rest[static_cast<std::size_t>(f)];
        }
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (key[static_cast<std::size_t>(a)] != key[static_cast<std::size_t>(b)])
                return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)];
            return a < b;
        });

        // telescoping along the ranking keeps each row summing to 1
        KahanSum mass_above;
        double survivor = 1.0; // (1 - T)^ell for the mass T ranked so far
        for (int f : order) {
            mass_above.add(q.prob(static_cast<FileId>(f + 1)));
            const double next = std::pow(std::max(0.0, 1.0 - mass_above.value()), ell);
            out.at(ell, static_cast<FileId>(f + 1)) = std::max(0.0, survivor - next);
            survivor = next;
        }
    }
    return out;
}

double coded_rate_bound(const CachingDist& p, const PopularityDist& q, int users) {
    const LeaderProbs leader = leader_probabilities(p, q, users);
    const int m = q.files();
    const int n = users;

    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(m) * n);
    for (int ell = 1; ell <= n; ++ell) {
        const double lc = log_choose(n, ell);
        for (int f = 1; f <= m; ++f) {
            const double rho = leader.at(ell, static_cast<FileId>(f));
            if (rho <= 0.0)
                continue;
            const double pm =
                std::clamp(p.probs[static_cast<std::size_t>(f) - 1] * p.cache_size, 0.0, 1.0);
            if (pm >= 1.0)
                continue; // (1 - p_f M)^(n-l+1) = 0, the exponent is never 0
            double term;
            if (pm <= 0.0) {
                if (ell != 1)
                    continue; // 0^(l-1) with l >= 2
                term = n * rho;
            } else {
                term = std::exp(lc + (ell - 1) * std::log(pm) + (n - ell + 1) * std::log1p(-pm)) * rho;
            }
            terms.push_back(term);
        }
    }
    std::sort(terms.begin(), terms.end(), std::greater<>());
    KahanSum sum;
    for (double t : terms)
        sum.add(t);
    return sum.value();
}

RateBound rate_upper_bound(const CachingDist& p, const PopularityDist& q, int users) {
    RateBound out;
    out.coded = coded_rate_bound(p, q, users);
    out.naive = naive_multicast_rate(q, users);
    out.value = std::min(out.coded, out.naive);
    return out;
}

namespace {

// The coded expression for the Random-LFU family, O(n). x = M/cutoff is
// the cached share of every file above the cutoff, prefix the popularity
// mass of those files, tail the rest. lchoose[l] = log C(n, l).
double random_lfu_coded_sum(int n, double x, double prefix, double tail,
                            const std::vector<double>& lchoose) {
    const double log_tail = tail > 0.0 ? std::log(std::min(tail, 1.0)) : -kInf;
    KahanSum psi;
    if (x >= 1.0) {
        // integral-M LFU corner: cached files are held whole
        psi.add(n * tail);
        return psi.value();
    }
    const double log1mx = std::log1p(-x);
    const double logx = x > 0.0 ? std::log(x) : -kInf;
    psi.add(n * (prefix * std::exp(n * log1mx) + tail));
    for (int ell = 2; ell <= n; ++ell) {
        const double covered = -std::expm1(ell * log_tail); // 1 - tail^l
        psi.add(std::exp(lchoose[static_cast<std::size_t>(ell)] + (ell - 1) * logx +
                         (n - ell + 1) * log1mx) *
                covered);
    }
    return psi.value();
}

std::vector<double> log_choose_row(int n) {
    std::vector<double> lc(static_cast<std::size_t>(n) + 1);
    for (int ell = 0; ell <= n; ++ell)
        lc[static_cast<std::size_t>(ell)] = log_choose(n, ell);
    return lc;
}

} // namespace

RateBound random_lfu_bound(const PopularityDist& q, int users, double cache_size, int top_files) {
    const int m = q.files();
    if (users < 1)
        throw invalid_parameter("random_lfu_bound: users must be >= 1");
    if (!(cache_size > 0.0) || cache_size > static_cast<double>(m))
        throw invalid_parameter("random_lfu_bound: cache_size must lie in (0, files]");
    if (top_files < cutoff_floor(cache_size) || top_files > m)
        throw invalid_parameter("random_lfu_bound: top_files must lie in [ceil(cache_size), files]");

    const std::vector<double> suffix = suffix_mass(q);
    const double tail = suffix[static_cast<std::size_t>(top_files)];
    const double prefix = std::clamp(1.0 - tail, 0.0, 1.0);
    const double x = std::min(1.0, cache_size / top_files);

    RateBound out;
    out.coded = random_lfu_coded_sum(users, x, prefix, tail, log_choose_row(users));
    out.naive = naive_multicast_rate(q, users);
    out.value = std::min(out.coded, out.naive);
    return out;
}

RateBound no_cache_bound(const PopularityDist& q, int users) {
    RateBound out;
    out.coded = static_cast<double>(users);
    out.naive = naive_multicast_rate(q, users);
    out.value = std::min(out.coded, out.naive);
    return out;
}

CutoffSearch search_cutoff(const PopularityDist& q, int users, double cache_size) {
    const int m = q.files();
    if (!(cache_size > 0.0) || cache_size > static_cast<double>(m))
        throw invalid_parameter("search_cutoff: cache_size must lie in (0, files]");
    if (users < 1)
        throw invalid_parameter("search_cutoff: users must be >= 1");

    const std::vector<double> suffix = suffix_mass(q);
    const std::vector<double> lchoose = log_choose_row(users);
    const double naive = naive_multicast_rate(q, users);

    CutoffSearch best;
    best.bound.value = kInf;
    for (int cutoff = cutoff_floor(cache_size); cutoff <= m; ++cutoff) {
        const double tail = suffix[static_cast<std::size_t>(cutoff)];
        const double prefix = std::clamp(1.0 - tail, 0.0, 1.0);
        const double x = std::min(1.0, cache_size / cutoff);
        const double coded = random_lfu_coded_sum(users, x, prefix, tail, lchoose);
        const double value = std::min(coded, naive);
        if (value < best.bound.value) {
            best.top_files = cutoff;
            best.bound = {coded, naive, value};
        }
    }
    return best;
}

int flat_zipf_cutoff(int users, int files, double cache_size, double alpha) {
    if (users < 1 || files < 1)
        throw invalid_parameter("flat_zipf_cutoff: users and files must be >= 1");
    if (!(cache_size >= 0.0) || cache_size > static_cast<double>(files))
        throw invalid_parameter("flat_zipf_cutoff: cache_size must lie in [0, files]");
    if (!std::isfinite(alpha) || alpha < 0.0)
        throw invalid_parameter("flat_zipf_cutoff: alpha must be finite and >= 0");
    if (alpha >= 1.0)
        throw wrong_regime("flat_zipf_cutoff: closed form only covers alpha in [0, 1)");

    const double base = users * (1.0 - alpha) * cache_size / files;
    double raw;
    if (alpha == 0.0) {
        // one-sided limit of base^(1/alpha): 0 below 1, unbounded above
        raw = base >= 1.0 ? static_cast<double>(files) : 0.0;
    } else if (base <= 0.0) {
        raw = 0.0;
    } else {
        raw = std::exp(std::log(base) / alpha) * files;
    }

    long rounded = raw >= static_cast<double>(files) ? files : std::lround(raw);
    const long lo = cutoff_floor(cache_size);
    return static_cast<int>(std::clamp(rounded, lo, static_cast<long>(files)));
}

TailBound flat_zipf_bound(int users, int files, double cache_size, const PopularityDist& q,
                          int top_files) {
    if (q.files() != files)
        throw invalid_parameter("flat_zipf_bound: q does not match the library size");
    if (!(cache_size > 0.0))
        throw invalid_parameter("flat_zipf_bound: cache_size must be > 0");
    if (top_files < cutoff_floor(cache_size) || top_files > files)
        throw invalid_parameter("flat_zipf_bound: top_files must lie in [ceil(cache_size), files]");
    if (users < 1)
        throw invalid_parameter("flat_zipf_bound: users must be >= 1");

    const std::vector<double> suffix = suffix_mass(q);
    const double tail = suffix[static_cast<std::size_t>(top_files)];
    const double prefix = std::clamp(1.0 - tail, 0.0, 1.0);

    const double share = std::min(1.0, cache_size / top_files);
    double hit_factor;
    if (prefix <= 0.0)
        hit_factor = 0.0;
    else if (share >= 1.0)
        hit_factor = 1.0;
    else
        hit_factor = -std::expm1(users * prefix * std::log1p(-share));

    const double expr = (top_files / cache_size - 1.0) * hit_factor + users * tail;

    TailBound out;
    out.value = std::min(expr, static_cast<double>(files));
    out.coarse_cap = std::min({files / cache_size - 1.0, static_cast<double>(users),
                               static_cast<double>(files)});
    return out;
}

int steep_zipf_cutoff(int files) {
    if (files < 1)
        throw invalid_parameter("steep_zipf_cutoff: files must be >= 1");
    return files;
}

double steep_zipf_cap(int files, double cache_size, double slack) {
    if (files < 1 || !(cache_size > 0.0))
        throw invalid_parameter("steep_zipf_cap: need files >= 1 and cache_size > 0");
    return std::min(files / cache_size - 1.0 + slack, static_cast<double>(files));
}

double lfu_rate(const PopularityDist& q, int users, double cache_size) {
    if (users < 1)
        throw invalid_parameter("lfu_rate: users must be >= 1");
    if (!(cache_size >= 0.0) || cache_size > static_cast<double>(q.files()))
        throw invalid_parameter("lfu_rate: cache_size must lie in [0, files]");
    const int kept = std::min(q.files(), static_cast<int>(std::floor(cache_size + 1e-9)));
    KahanSum sum;
    for (int f = q.files(); f > kept; --f)
        sum.add(-std::expm1(users * std::log1p(-q.prob(static_cast<FileId>(f)))));
    return sum.value();
}

namespace {

// q projected onto the feasible set: proportional where possible, capped
// at 1/M with the excess re-spread over the uncapped files.
std::vector<double> capped_proportional(const PopularityDist& q, double cap) {
    const int m = q.files();
    std::vector<double> p(static_cast<std::size_t>(m), 0.0);
    std::vector<bool> fixed(static_cast<std::size_t>(m), false);
    double remaining = 1.0;
    for (int round = 0; round < m; ++round) {
        double active_mass = 0.0;
        int active = 0;
        for (int f = 0; f < m; ++f)
            if (!fixed[static_cast<std::size_t>(f)]) {
                active_mass += q.prob(static_cast<FileId>(f + 1));
                ++active;
            }
        if (active == 0)
            break;
        bool capped_any = false;
        if (active_mass <= 0.0) {
            const double share = remaining / active;
            for (int f = 0; f < m; ++f)
                if (!fixed[static_cast<std::size_t>(f)])
                    p[static_cast<std::size_t>(f)] = std::min(share, cap);
            break;
        }
        const double scale = remaining / active_mass;
        for (int f = 0; f < m; ++f) {
            if (fixed[static_cast<std::size_t>(f)])
                continue;
            if (q.prob(static_cast<FileId>(f + 1)) * scale > cap) {
                p[static_cast<std::size_t>(f)] = cap;
                fixed[static_cast<std::size_t>(f)] = true;
                remaining -= cap;
                capped_any = true;
            }
        }
        if (!capped_any) {
            for (int f = 0; f < m; ++f)
                if (!fixed[static_cast<std::size_t>(f)])
                    p[static_cast<std::size_t>(f)] = q.prob(static_cast<FileId>(f + 1)) * scale;
            break;
        }
    }
    return p;
}

struct RapSearch {
    const PopularityDist& q;
    int users;
    double cache_size;
    double naive;
    long budget;
    long evals = 0;

    double eval(const std::vector<double>& probs) {
        ++evals;
        CachingDist d;
        d.probs = probs;
        d.cache_size = cache_size;
        return std::min(coded_rate_bound(d, q, users), naive);
    }
};

void grid_pass(RapSearch& search, double step, double cap, std::vector<double>& best,
               double& best_value) {
    const int m = search.q.files();
    int units = std::max(1, static_cast<int>(std::lround(1.0 / step)));

    // keep the grid within the evaluation budget
    auto grid_size = [&](int g) {
        double count = 1.0;
        for (int i = 1; i < m; ++i)
            count *= static_cast<double>(g + i) / i;
        return count;
    };
    while (units > 4 && grid_size(units) > 0.6 * static_cast<double>(search.budget))
        units /= 2;

    std::vector<double> point(static_cast<std::size_t>(m), 0.0);
    const long cap_units = static_cast<long>(std::floor(cap * units + 1e-9));

    // enumerate compositions of `units` over m files
    std::vector<int> units_vec(static_cast<std::size_t>(m), 0);
    auto recurse = [&](auto&& self, int f, long rest) -> void {
        if (search.evals >= search.budget)
            return;
        if (f == m - 1) {
            if (rest > cap_units)
                return;
            units_vec[static_cast<std::size_t>(f)] = static_cast<int>(rest);
            for (int i = 0; i < m; ++i)
                point[static_cast<std::size_t>(i)] =
                    static_cast<double>(units_vec[static_cast<std::size_t>(i)]) / units;
            const double v = search.eval(point);
            if (v < best_value) {
                best_value = v;
                best = point;
            }
            return;
        }
        const long top = std::min(rest, cap_units);
        for (long k = 0; k <= top; ++k) {
            units_vec[static_cast<std::size_t>(f)] = static_cast<int>(k);
            self(self, f + 1, rest - k);
            if (search.evals >= search.budget)
                return;
        }
    };
    recurse(recurse, 0, units);
}

void coordinate_descent(RapSearch& search, double cap, std::vector<double>& best,
                        double& best_value) {
    const int m = static_cast<int>(best.size());

    // pair list: everything for small libraries, popularity-adjacent plus
    // head-tail transfers for large ones
    std::vector<std::pair<int, int>> pairs;
    if (m <= 16) {
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                pairs.emplace_back(i, j);
    } else {
        for (int i = 0; i + 1 < m; ++i)
            pairs.emplace_back(i, i + 1);
        for (int j = 1; j < m; ++j)
            pairs.emplace_back(0, j);
    }

    std::vector<double> trial = best;
    bool improved = true;
    while (improved && search.evals < search.budget) {
        improved = false;
        for (auto [i, j] : pairs) {
            if (search.evals >= search.budget)
                break;
            const double pi = best[static_cast<std::size_t>(i)];
            const double pj = best[static_cast<std::size_t>(j)];
            // transfer t from j to i; t < 0 moves the other way
            const double lo = -std::min(pi, cap - pj);
            const double hi = std::min(pj, cap - pi);
            if (hi - lo < 1e-12)
                continue;

            auto eval_at = [&](double t) {
                trial = best;
                trial[static_cast<std::size_t>(i)] = std::clamp(pi + t, 0.0, cap);
                trial[static_cast<std::size_t>(j)] = std::clamp(pj - t, 0.0, cap);
                return search.eval(trial);
            };

            // coarse scan, then shrink around the best sample
            const int samples = 9;
            double best_t = 0.0;
            double best_v = best_value;
            for (int s = 0; s < samples; ++s) {
                const double t = lo + (hi - lo) * s / (samples - 1);
                const double v = eval_at(t);
                if (v < best_v) {
                    best_v = v;
                    best_t = t;
                }
            }
            double span = (hi - lo) / (samples - 1);
            while (span > 1e-10 && search.evals < search.budget) {
                bool moved = false;
                for (double t : {best_t - span / 2, best_t + span / 2}) {
                    if (t < lo || t > hi)
                        continue;
                    const double v = eval_at(t);
                    if (v < best_v) {
                        best_v = v;
                        best_t = t;
                        moved = true;
                    }
                }
                if (!moved)
                    span /= 2;
            }

            if (best_v < best_value - 1e-13) {
                best[static_cast<std::size_t>(i)] = std::clamp(pi + best_t, 0.0, cap);
                best[static_cast<std::size_t>(j)] = std::clamp(pj - best_t, 0.0, cap);
                best_value = best_v;
                improved = true;
            }
        }
    }
}

} // namespace

RapResult optimize_caching(const PopularityDist& q, int users, double cache_size,
                           const RapOptions& options) {
    const int m = q.files();
    if (!(cache_size > 0.0) || cache_size > static_cast<double>(m))
        throw invalid_parameter("optimize_caching: cache_size must lie in (0, files]");
    if (users < 1)
        throw invalid_parameter("optimize_caching: users must be >= 1");
    if (options.budget < 8)
        throw invalid_parameter("optimize_caching: budget too small to be useful");

    const double cap = std::min(1.0, 1.0 / cache_size);
    RapSearch search{q, users, cache_size, naive_multicast_rate(q, users), options.budget};

    std::vector<double> best;
    double best_value = kInf;
    auto consider = [&](const std::vector<double>& p) {
        const double v = search.eval(p);
        if (v < best_value) {
            best_value = v;
            best = p;
        }
    };

    const CutoffSearch scan = search_cutoff(q, users, cache_size);
    consider(random_lfu_dist(m, cache_size, scan.top_files).probs);
    consider(lfu_dist(m, cache_size).probs);
    consider(uniform_dist(m, cache_size).probs);
    consider(capped_proportional(q, cap));

    if (m <= 4)
        grid_pass(search, options.grid_step, cap, best, best_value);
    coordinate_descent(search, cap, best, best_value);

    // snap boundary slop and renormalize descent drift before validating
    KahanSum total;
    for (double& v : best) {
        v = std::clamp(v, 0.0, cap);
        total.add(v);
    }
    for (double& v : best)
        v /= total.value();

    RapResult out;
    out.dist.probs = std::move(best);
    out.dist.cache_size = cache_size;
    out.dist.validate();
    out.bound = rate_upper_bound(out.dist, q, users);
    out.evals = search.evals;
    return out;
}

} // namespace ccsim
