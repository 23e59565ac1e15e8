#include "coxcal/calibration.hpp"

#include <cmath>

namespace coxcal {

namespace {

double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sd_of(std::span<const double> xs, double mean) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1));
}

}  // namespace

CalibrationResult estimate_phi(std::span<const double> u_values,
                               std::span<const double> xtilde, Bandwidth h) {
    const std::size_t n = u_values.size();
    if (n < 2) throw EmptySampleError("estimate_phi: needs at least 2 subjects");
    if (xtilde.size() != n) {
        throw ConfigError("estimate_phi: u and xtilde lengths differ");
    }

    const double mean = mean_of(xtilde);
    const double sd = sd_of(xtilde, mean);
    // Identifiability needs E(X) bounded away from zero; sd-relative floor.
    if (std::abs(mean) < 1e-8 * sd) throw MeanNearZeroError();

    std::vector<KernelSample> samples(n);
    for (std::size_t i = 0; i < n; ++i) samples[i] = {u_values[i], xtilde[i]};

    CalibrationResult result{{}, {}, {}, h, mean};
    result.psi_hat.resize(n);
    result.phi_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.psi_hat[i] = nw_regress(u_values[i], samples, h);
        result.phi_hat[i] = result.psi_hat[i] / mean;
    }
    return result;
}

CalibrationResult calibrate(std::span<const double> u_values, std::span<const double> xtilde,
                            Bandwidth h, double phi_floor) {
    CalibrationResult result = estimate_phi(u_values, xtilde, h);
    const std::size_t n = xtilde.size();
    result.x_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(result.phi_hat[i]) < phi_floor) throw PhiNearZeroError(i);
        result.x_hat[i] = xtilde[i] / result.phi_hat[i];
    }
    return result;
}

}  // namespace coxcal
