#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coxcal/dataset.hpp"
#include "coxcal/errors.hpp"
#include "coxcal/rng.hpp"

namespace coxcal {

// Multiplicative distortion phi(u); must average to one over the U law.
struct DistortionSpec {
    enum class Kind { identity, linear_shift, quadratic, custom_table };

    Kind kind = Kind::identity;
    double shift = 0.0;
    double scale = 1.0;
    std::vector<std::pair<double, double>> table;  // custom_table: (u, phi(u)) nodes

    double operator()(double u) const;
    std::string name() const;

    // Simpson-rule check of the mean-one identifiability constraint over
    // Unif[u_lo, u_hi]; throws ConfigError beyond tol.
    void validate_mean_one(double u_lo, double u_hi, double tol = 1e-10) const;

    static DistortionSpec identity();
    // phi(u) = (u + 3)/7
    static DistortionSpec linear_benchmark();
    // phi(u) = 3 (u + 1)^2 / 79
    static DistortionSpec quadratic_benchmark();
};

struct BandwidthPolicy {
    bool cv = true;       // leave-one-out CV over the default grid
    double fixed_h = 0.0; // used when cv == false
};

struct SimulationConfig {
    int n = 100;
    int p = 2;
    std::vector<double> beta0 = {1.0, 0.5};
    double gamma0 = 1.5;
    double z_corr = 0.8;
    double x_mean = 1.0;
    double x_sd = 0.5;
    double u_lo = 2.0;
    double u_hi = 6.0;
    DistortionSpec distortion;
    double target_cr = 0.2;
    int replications = 1000;
    std::uint64_t seed = 1;
    double ci_level = 0.95;
    BandwidthPolicy bandwidth_policy;
    int threads = 0;  // 0 = hardware concurrency
    std::string config_id = "default";

    void validate() const;
};

enum class Method : int { proposed = 0, naive = 1, oracle = 2 };
inline const char* method_name(Method m) {
    switch (m) {
        case Method::proposed: return "proposed";
        case Method::naive: return "naive";
        case Method::oracle: return "oracle";
    }
    return "?";
}

struct ParamStats {
    double bias = 0.0;
    double sd = 0.0;   // NaN when only one successful replication
    double se = 0.0;   // mean of per-replication standard errors
    double mse = 0.0;
    double cp = 0.0;
};

struct SimulationSummary {
    // stats[method][parameter], parameters ordered (beta_1, ..., beta_p, gamma)
    std::array<std::vector<ParamStats>, 3> stats;
    double achieved_cr = 0.0;
    double tau_used = 0.0;
    int replication_failures = 0;
    int replications_completed = 0;
};

// Draw one sample of size config.n under the configured design. Per subject
// the stream is consumed in the fixed order z1, z2, x, u, e, c.
Dataset generate_dataset(const SimulationConfig& config, double tau, CounterRng& rng);

// Bisection on tau against pilot Monte Carlo censoring-rate estimates
// (5e4 subjects, stream (seed, 2^32 - 1), common draws across evaluations).
double calibrate_tau(const SimulationConfig& config);

// Full Monte Carlo comparison of the proposed, naive, and oracle estimators.
// Replication r draws from stream (seed, r); failed replications are dropped
// from all three methods so the comparison stays paired.
SimulationSummary run_study(const SimulationConfig& config);

// Summary rows in the documented CSV schema (header included).
std::string summary_to_csv(const SimulationSummary& summary, const SimulationConfig& config);

}  // namespace coxcal
