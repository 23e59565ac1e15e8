#pragma once

#include <cmath>
#include <cstdint>

namespace coxcal {

// Counter-based stream RNG built on the SplitMix64 finalizer (Vigna, 2015).
//
// Integer contract (exact, platform-independent):
//   mix64(z): z *= 0xBF58476D1CE4E5B9 after z ^= z>>30;
//             z *= 0x94D049BB133111EB after z ^= z>>27;
//             return z ^= z>>31.
//   stream base: mix64(seed + GAMMA) xor mix64((stream + 1) * GAMMA)
//   k-th output: mix64(base + (k + 1) * GAMMA),  GAMMA = 0x9E3779B97F4A7C15.
//
// Distinct (seed, stream) pairs give statistically independent sequences, and
// the k-th draw depends only on (seed, stream, k): no shared mutable state,
// so replication streams can run on any thread layout with identical results.
class CounterRng {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : base_(mix64(seed + kGamma) ^ mix64((stream + 1) * kGamma)), counter_(0) {}

    std::uint64_t next_u64() { return mix64(base_ + (++counter_) * kGamma); }

    // Uniform on [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on the open interval (0, 1); safe as a quantile-function argument.
    double next_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double next_normal() { return normal_quantile(next_open()); }

    double next_exponential() { return -std::log(next_open()); }

    void reset() { counter_ = 0; }

    // Standard normal quantile, Acklam's rational approximation
    // (absolute error < 1.15e-9 over (0,1)). Used for draws and for the
    // Wald z multiplier so every consumer shares one documented routine.
    static double normal_quantile(double p);

    // Phi(z) via erfc; used for two-sided p-values.
    static double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_;
};

inline double CounterRng::normal_quantile(double p) {
    // Coefficients from P. J. Acklam's algorithm.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace coxcal
