#pragma once

#include <span>
#include <vector>

#include "coxcal/errors.hpp"

namespace coxcal {

// Product-limit curve; rows only at distinct times carrying at least one
// event. S(t) for t before the first event time is 1.
struct KMCurve {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<int> at_risk;
    std::vector<int> n_events;
};

KMCurve km_estimate(std::span<const double> times, std::span<const int> events);

}  // namespace coxcal
