#include "coxcal/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace coxcal {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
const double kInvSqrt4Pi = 1.0 / std::sqrt(4.0 * std::numbers::pi);

void require_finite_bandwidth(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ConfigError("bandwidth must be positive and finite, got " + std::to_string(h));
    }
}

double sample_sd(std::span<const double> xs) {
    const std::size_t n = xs.size();
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

}  // namespace

Bandwidth::Bandwidth(double h_in) : h(h_in) { require_finite_bandwidth(h); }

BandwidthGrid::BandwidthGrid(std::vector<double> values_in) : values(std::move(values_in)) {
    if (values.empty()) throw ConfigError("bandwidth grid must be nonempty");
    double prev = 0.0;
    for (double h : values) {
        require_finite_bandwidth(h);
        if (h <= prev) throw ConfigError("bandwidth grid must be strictly increasing");
        prev = h;
    }
}

BandwidthGrid BandwidthGrid::log_spaced(double lo, double hi, std::size_t count) {
    if (count == 0) throw ConfigError("bandwidth grid must be nonempty");
    require_finite_bandwidth(lo);
    if (count == 1) return BandwidthGrid({lo});
    if (hi <= lo) throw ConfigError("bandwidth grid upper bound must exceed lower bound");
    std::vector<double> values(count);
    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) {
        values[k] = std::exp(log_lo + step * static_cast<double>(k));
    }
    values.back() = hi;
    return BandwidthGrid(std::move(values));
}

double gaussian_kernel(double t) { return std::exp(-0.5 * t * t) * kInvSqrt2Pi; }

double nw_regress(double u, std::span<const KernelSample> samples, Bandwidth h) {
    if (samples.empty()) throw EmptySampleError("nw_regress: empty sample");
    double num = 0.0;
    double den = 0.0;
    for (const KernelSample& s : samples) {
        const double k = gaussian_kernel((u - s.u) / h.h);
        num += k * s.w;
        den += k;
    }
    if (den < kWeightFloor) throw DegenerateWeightError(u);
    return num / den;
}

double kde(double u, std::span<const double> points, Bandwidth h) {
    if (points.empty()) throw EmptySampleError("kde: empty sample");
    double sum = 0.0;
    for (double p : points) sum += gaussian_kernel((u - p) / h.h);
    return sum / (static_cast<double>(points.size()) * h.h);
}

double kde_loo(std::size_t i, std::span<const double> points, Bandwidth h) {
    const std::size_t n = points.size();
    if (n < 2) throw EmptySampleError("kde_loo: needs at least 2 points");
    if (i >= n) throw IndexOutOfRangeError(i, n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        sum += gaussian_kernel((points[i] - points[j]) / h.h);
    }
    return sum / (static_cast<double>(n) * h.h);
}

double cv_score(Bandwidth h, std::span<const double> points) {
    const std::size_t n = points.size();
    if (n < 2) throw EmptySampleError("cv_score: needs at least 2 points");
    const double nd = static_cast<double>(n);
    const double inv4h2 = 1.0 / (4.0 * h.h * h.h);
    const double inv2h2 = 1.0 / (2.0 * h.h * h.h);

    // Off-diagonal pairs feed both terms; diagonal contributes only to the
    // squared-density integral (exp(0) per point).
    double conv_sum = nd;   // sum_ij exp(-(Ui-Uj)^2/(4h^2)), i == j part
    double loo_sum = 0.0;   // sum_{i != j} K((Ui-Uj)/h) * sqrt(2 pi)
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = (points[i] - points[j]) * (points[i] - points[j]);
            conv_sum += 2.0 * std::exp(-d2 * inv4h2);
            loo_sum += 2.0 * std::exp(-d2 * inv2h2);
        }
    }
    const double integral = conv_sum * kInvSqrt4Pi / (nd * nd * h.h);
    // (2/n) sum_i p_loo(U_i) = (2/(n^2 h)) sum_{i != j} K((Ui-Uj)/h)
    const double loo_term = 2.0 * loo_sum * kInvSqrt2Pi / (nd * nd * h.h);
    return integral - loo_term;
}

Bandwidth select_bandwidth(std::span<const double> points, const BandwidthGrid& grid) {
    double best_h = grid.values.front();
    double best_cv = std::numeric_limits<double>::infinity();
    for (double h : grid.values) {
        const double cv = cv_score(Bandwidth(h), points);
        if (cv < best_cv) {
            best_cv = cv;
            best_h = h;
        }
    }
    return Bandwidth(best_h);
}

double silverman_bandwidth(std::span<const double> points) {
    if (points.size() < 2) throw EmptySampleError("silverman_bandwidth: needs at least 2 points");
    const double sd = sample_sd(points);
    if (!(sd > 0.0)) {
        throw ConfigError("silverman_bandwidth: sample has zero spread");
    }
    return 1.06 * sd * std::pow(static_cast<double>(points.size()), -0.2);
}

BandwidthGrid default_bandwidth_grid(std::span<const double> points) {
    const double hs = silverman_bandwidth(points);
    return BandwidthGrid::log_spaced(hs / 10.0, 10.0 * hs, 40);
}

}  // namespace coxcal
