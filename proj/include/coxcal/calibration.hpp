#pragma once

#include <span>
#include <vector>

#include "coxcal/kernel.hpp"

namespace coxcal {

// Result of estimating the multiplicative distortion and undoing it.
// phi_hat[i] = psi_hat[i] / xtilde_mean and x_hat[i] * phi_hat[i] == xtilde[i].
struct CalibrationResult {
    std::vector<double> psi_hat;
    std::vector<double> phi_hat;
    std::vector<double> x_hat;  // empty until calibrate()
    Bandwidth bandwidth;
    double xtilde_mean;
};

inline constexpr double kPhiFloor = 1e-6;

// Smooth Xtilde on U to get psi_hat, then phi_hat = psi_hat / mean(Xtilde).
CalibrationResult estimate_phi(std::span<const double> u_values,
                               std::span<const double> xtilde, Bandwidth h);

// estimate_phi plus the calibrated covariate x_hat[i] = xtilde[i] / phi_hat[i].
CalibrationResult calibrate(std::span<const double> u_values, std::span<const double> xtilde,
                            Bandwidth h, double phi_floor = kPhiFloor);

}  // namespace coxcal
