#include "coxcal/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coxcal {

KMCurve km_estimate(std::span<const double> times, std::span<const int> events) {
    const std::size_t n = times.size();
    if (n == 0) throw EmptySampleError("km_estimate: empty sample");
    if (events.size() != n) throw ConfigError("km_estimate: lengths differ");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0) {
            throw ConfigError("km_estimate: times must be finite and nonnegative");
        }
        if (events[i] != 0 && events[i] != 1) {
            throw ConfigError("km_estimate: event indicators must be 0 or 1");
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    KMCurve curve;
    double survival = 1.0;
    std::size_t k = 0;
    while (k < n) {
        const double t = times[order[k]];
        // Subjects censored exactly at t stay in the risk set for t's events.
        const int risk = static_cast<int>(n - k);
        int deaths = 0;
        std::size_t j = k;
        while (j < n && times[order[j]] == t) {
            deaths += events[order[j]];
            ++j;
        }
        if (deaths > 0) {
            survival *= 1.0 - static_cast<double>(deaths) / static_cast<double>(risk);
            curve.times.push_back(t);
            curve.survival.push_back(survival);
            curve.at_risk.push_back(risk);
            curve.n_events.push_back(deaths);
        }
        k = j;
    }
    return curve;
}

}  // namespace coxcal
