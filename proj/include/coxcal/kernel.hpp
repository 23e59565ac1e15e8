#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coxcal/errors.hpp"

namespace coxcal {

// One (U_i, Xtilde_i) pair entering the Nadaraya-Watson smoother.
struct KernelSample {
    double u;
    double w;
};

struct Bandwidth {
    double h;

    explicit Bandwidth(double h_in);
};

// Strictly increasing positive search grid for the CV bandwidth.
struct BandwidthGrid {
    std::vector<double> values;

    explicit BandwidthGrid(std::vector<double> values_in);

    static BandwidthGrid log_spaced(double lo, double hi, std::size_t count);
};

// K(t) = exp(-t^2/2) / sqrt(2*pi)
double gaussian_kernel(double t);

// Denominator floor below which NW weights are considered degenerate.
inline constexpr double kWeightFloor = 1e-300;

// psi_hat(u) = sum_i K((u-U_i)/h) w_i / sum_i K((u-U_i)/h)
double nw_regress(double u, std::span<const KernelSample> samples, Bandwidth h);

// p_hat(u) = (1/(n h)) sum_i K((u-U_i)/h)
double kde(double u, std::span<const double> points, Bandwidth h);

// Leave-one-out density at U_i, keeping the 1/(n h) normalization.
double kde_loo(std::size_t i, std::span<const double> points, Bandwidth h);

// CV(h) = int p_hat^2 - (2/n) sum_i p_hat_{(-i)}(U_i).
// The integral term uses the closed-form Gaussian convolution
//   int p_hat(u)^2 du = (1/(n^2 h sqrt(4 pi))) sum_ij exp(-(U_i-U_j)^2/(4 h^2)).
double cv_score(Bandwidth h, std::span<const double> points);

// Grid minimizer of cv_score; ties resolved toward the smaller h.
Bandwidth select_bandwidth(std::span<const double> points, const BandwidthGrid& grid);

// Silverman reference bandwidth 1.06 * sd * n^(-1/5).
double silverman_bandwidth(std::span<const double> points);

// Default CV search space: 40 log-spaced points on [h_S/10, 10 h_S].
BandwidthGrid default_bandwidth_grid(std::span<const double> points);

}  // namespace coxcal
