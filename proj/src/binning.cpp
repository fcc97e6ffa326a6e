#include <algorithm>

#include "r2vf/encoding.hpp"
#include "r2vf/error.hpp"
#include "r2vf/format.hpp"

namespace r2vf {

std::size_t BinningScheme::bin_of(double value) const {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

std::string BinningScheme::bin_label(std::size_t bin) const {
    if (bin >= bin_count()) throw InputError("bin index out of range");
    const std::string lo = bin == 0 ? "-inf" : format_double(edges[bin - 1]);
    const std::string hi = bin == edges.size() ? "inf" : format_double(edges[bin]);
    return (bin == 0 ? "(" : "[") + lo + ", " + hi + ")";
}

BinningScheme build_percentile_bins(std::span<const double> values, int max_bins, int min_obs,
                                    std::string feature) {
    if (values.empty()) throw InputError("cannot bin an empty column '" + feature + "'");
    if (max_bins < 2) throw InputError("max_bins must be >= 2");
    if (min_obs < 1) throw InputError("min_obs must be >= 1");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back())
        throw DegenerateFeatureError("feature '" + feature + "' is constant");

    const std::size_t n = sorted.size();
    std::vector<double> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    // Candidate left edges of bins 1..B-1 (bin 0 starts at the minimum).
    std::vector<double> candidates;
    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
        candidates.assign(distinct.begin() + 1, distinct.end());
    } else {
        for (int k = 1; k < max_bins; ++k) {
            const double v = sorted[static_cast<std::size_t>(k) * n / static_cast<std::size_t>(max_bins)];
            if (v > sorted.front() && (candidates.empty() || v > candidates.back()))
                candidates.push_back(v);
        }
    }

    std::vector<std::size_t> counts(candidates.size() + 1);
    std::size_t below = 0;
    for (std::size_t b = 0; b < candidates.size(); ++b) {
        const auto upto = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), candidates[b]) - sorted.begin());
        counts[b] = upto - below;
        below = upto;
    }
    counts.back() = n - below;

    BinningScheme scheme{std::move(feature), {}};
    std::size_t acc = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        acc += counts[b];
        if (acc >= static_cast<std::size_t>(min_obs)) {
            if (b + 1 < counts.size()) scheme.edges.push_back(candidates[b]);
            acc = 0;
        }
    }
    // Under-filled tail joins the last closed bin.
    if (acc > 0 && !scheme.edges.empty()) scheme.edges.pop_back();
    if (scheme.edges.empty())
        throw DegenerateFeatureError("feature '" + scheme.feature + "' has too few observations for two bins");
    return scheme;
}

}  // namespace r2vf
