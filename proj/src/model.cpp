#include "ccsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccsim/errors.hpp"

namespace ccsim {

void SystemParams::validate() const {
    if (users < 1)
        throw invalid_parameter("SystemParams: users must be >= 1");
    if (files < 1)
        throw invalid_parameter("SystemParams: files must be >= 1");
    if (!(cache_size >= 0.0) || !std::isfinite(cache_size))
        throw invalid_parameter("SystemParams: cache_size must be finite and >= 0");
    if (cache_size > static_cast<double>(files))
        throw invalid_parameter("SystemParams: cache_size must not exceed the library size");
    if (packets_per_file < 1)
        throw invalid_parameter("SystemParams: packets_per_file must be >= 1");
}

long SystemParams::packet_budget() const {
    const double raw = cache_size * static_cast<double>(packets_per_file);
    return static_cast<long>(std::floor(raw + 1e-9));
}

PopularityDist::PopularityDist(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty())
        throw invalid_parameter("PopularityDist: need at least one file");
    KahanSum total;
    for (double q : probs_) {
        if (!(q >= 0.0) || !std::isfinite(q))
            throw invalid_parameter("PopularityDist: probabilities must be finite and >= 0");
        total.add(q);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw invalid_parameter("PopularityDist: probabilities must sum to 1 (got " +
                                std::to_string(total.value()) + ")");
}

PopularityDist PopularityDist::zipf(int files, double alpha) {
    if (files < 1)
        throw invalid_parameter("zipf: need at least one file");
    if (!std::isfinite(alpha) || alpha < 0.0)
        throw invalid_parameter("zipf: alpha must be finite and >= 0");

    std::vector<double> weights(static_cast<std::size_t>(files));
    for (int f = 1; f <= files; ++f)
        weights[f - 1] = std::pow(static_cast<double>(f), -alpha);

    // Smallest weights first so the compensated sum stays tight up to
    // m = 1e6, alpha = 3.
    KahanSum norm;
    for (int f = files; f >= 1; --f)
        norm.add(weights[f - 1]);
    for (double& w : weights)
        w /= norm.value();
    return PopularityDist(std::move(weights));
}

PopularityDist PopularityDist::from_probs(std::vector<double> probs) {
    return PopularityDist(std::move(probs));
}

int distinct_file_count(const DemandRealization& demands) {
    std::vector<FileId> sorted = demands.requests;
    std::sort(sorted.begin(), sorted.end());
    return static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

DemandRealization sample_demands(const PopularityDist& q, int users, Rng& rng) {
    if (users < 1)
        throw invalid_parameter("sample_demands: users must be >= 1");

    std::vector<double> cdf(static_cast<std::size_t>(q.files()));
    KahanSum acc;
    for (int f = 1; f <= q.files(); ++f) {
        acc.add(q.prob(static_cast<FileId>(f)));
        cdf[f - 1] = acc.value();
    }
    cdf.back() = 1.0; // close the last bin against rounding

    DemandRealization out;
    out.requests.resize(static_cast<std::size_t>(users));
    for (int u = 0; u < users; ++u) {
        const double x = rng.next_unit();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
        out.requests[u] = static_cast<FileId>((it - cdf.begin()) + 1);
    }
    return out;
}

} // namespace ccsim
