#include "coxcal/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "coxcal/calibration.hpp"
#include "coxcal/cox.hpp"
#include "coxcal/format.hpp"
#include "coxcal/kernel.hpp"

namespace coxcal {

namespace {

constexpr std::uint64_t kPilotStream = 0xFFFFFFFFULL;  // 2^32 - 1
constexpr int kPilotSubjects = 50000;

double interpolate_table(const std::vector<std::pair<double, double>>& table, double u) {
    if (table.empty()) throw ConfigError("custom distortion table is empty");
    if (u <= table.front().first) return table.front().second;
    if (u >= table.back().first) return table.back().second;
    auto hi = std::upper_bound(table.begin(), table.end(), u,
                               [](double v, const auto& node) { return v < node.first; });
    auto lo = hi - 1;
    const double t = (u - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

}  // namespace

double DistortionSpec::operator()(double u) const {
    switch (kind) {
        case Kind::identity: return 1.0;
        case Kind::linear_shift: return (u + shift) / scale;
        case Kind::quadratic: return (u + shift) * (u + shift) / scale;
        case Kind::custom_table: return interpolate_table(table, u);
    }
    throw ConfigError("unknown distortion kind");
}

std::string DistortionSpec::name() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::linear_shift: return "linear";
        case Kind::quadratic: return "quadratic";
        case Kind::custom_table: return "table";
    }
    return "?";
}

void DistortionSpec::validate_mean_one(double u_lo, double u_hi, double tol) const {
    constexpr int kIntervals = 4096;  // Simpson on a smooth integrand: error << 1e-12
    const double width = u_hi - u_lo;
    const double step = width / kIntervals;
    double sum = (*this)(u_lo) + (*this)(u_hi);
    for (int k = 1; k < kIntervals; ++k) {
        sum += (*this)(u_lo + step * k) * (k % 2 == 1 ? 4.0 : 2.0);
    }
    const double mean = sum * step / 3.0 / width;
    if (std::abs(mean - 1.0) > tol) {
        throw ConfigError("distortion function " + name() + " has mean " + fmt_g17(mean) +
                          " over the U support; identifiability requires mean 1");
    }
}

DistortionSpec DistortionSpec::identity() { return {}; }

DistortionSpec DistortionSpec::linear_benchmark() {
    DistortionSpec spec;
    spec.kind = Kind::linear_shift;
    spec.shift = 3.0;
    spec.scale = 7.0;
    return spec;
}

DistortionSpec DistortionSpec::quadratic_benchmark() {
    DistortionSpec spec;
    spec.kind = Kind::quadratic;
    spec.shift = 1.0;
    spec.scale = 79.0 / 3.0;
    return spec;
}

void SimulationConfig::validate() const {
    if (n < 10) throw ConfigError("simulation: n must be at least 10");
    if (p != 2) throw ConfigError("simulation: only p = 2 is supported");
    if (static_cast<int>(beta0.size()) != p) throw ConfigError("simulation: beta0 must have length p");
    if (replications < 1) throw ConfigError("simulation: replications must be at least 1");
    if (!(target_cr > 0.0 && target_cr < 1.0)) {
        throw ConfigError("simulation: target_cr must lie in (0, 1)");
    }
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw ConfigError("simulation: ci_level must lie in (0, 1)");
    }
    if (!(u_hi > u_lo)) throw ConfigError("simulation: U support must be nonempty");
    if (!(x_sd > 0.0)) throw ConfigError("simulation: x_sd must be positive");
    if (!(std::abs(z_corr) < 1.0)) throw ConfigError("simulation: |z_corr| must be below 1");
    if (!bandwidth_policy.cv && !(bandwidth_policy.fixed_h > 0.0)) {
        throw ConfigError("simulation: fixed bandwidth must be positive");
    }
    distortion.validate_mean_one(u_lo, u_hi);
}

Dataset generate_dataset(const SimulationConfig& config, double tau, CounterRng& rng) {
    if (!(tau > 0.0)) throw ConfigError("generate_dataset: tau must be positive");

    // Lower-triangular factor of the AR(1) correlation [[1, rho], [rho, 1]].
    const double rho = config.z_corr;
    const double l22 = std::sqrt(1.0 - rho * rho);

    Dataset data;
    data.records.resize(static_cast<std::size_t>(config.n));
    for (auto& rec : data.records) {
        const double n1 = rng.next_normal();
        const double n2 = rng.next_normal();
        const double z1 = n1;
        const double z2 = rho * n1 + l22 * n2;
        const double x = config.x_mean + config.x_sd * rng.next_normal();
        const double u = rng.next_uniform(config.u_lo, config.u_hi);
        const double e = rng.next_exponential();
        const double ctilde = rng.next_uniform(0.0, tau + 2.0);

        const double lin = config.beta0[0] * z1 + config.beta0[1] * z2 + config.gamma0 * x;
        const double t = e / std::exp(lin);  // inverse transform, lambda_0 == 1
        const double c = std::min(ctilde, tau);

        rec.time = std::min(t, c);
        rec.event = t <= c ? 1 : 0;
        rec.z = {z1, z2};
        rec.u = u;
        rec.xtilde = config.distortion(u) * x;
        rec.x_true = x;
    }
    return data;
}

namespace {

double pilot_censoring_rate(const SimulationConfig& config, double tau, CounterRng& rng) {
    rng.reset();  // common random numbers: CR is exactly monotone in tau
    SimulationConfig pilot = config;
    pilot.n = kPilotSubjects;
    const Dataset data = generate_dataset(pilot, tau, rng);
    int censored = 0;
    for (const auto& rec : data.records) censored += 1 - rec.event;
    return static_cast<double>(censored) / static_cast<double>(kPilotSubjects);
}

}  // namespace

double calibrate_tau(const SimulationConfig& config) {
    config.validate();
    CounterRng rng(config.seed, kPilotStream);

    double lo = 1e-4;
    double hi = 1e4;
    const double cr_lo = pilot_censoring_rate(config, lo, rng);
    const double cr_hi = pilot_censoring_rate(config, hi, rng);
    if (cr_lo < config.target_cr || cr_hi > config.target_cr) {
        throw BracketFailureError();
    }

    for (int iter = 0; iter < 200; ++iter) {
        const double mid = std::sqrt(lo * hi);  // bisect on the log scale
        const double cr = pilot_censoring_rate(config, mid, rng);
        if (std::abs(cr - config.target_cr) < 0.005) return mid;
        if (cr > config.target_cr) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw BracketFailureError("tau bisection failed to reach the target censoring rate");
}

namespace {

constexpr int kMethods = 3;
constexpr int kParams = 3;  // beta1, beta2, gamma

struct RepResult {
    bool failed = false;
    double est[kMethods][kParams] = {};
    double se[kMethods][kParams] = {};
    double censored_frac = 0.0;
};

CoxData make_cox_data(const Dataset& data, const std::vector<double>& x_column) {
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    CoxData cox;
    cox.times.resize(n);
    cox.events.resize(data.size());
    cox.covariates.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = data.records[static_cast<std::size_t>(i)];
        cox.times[i] = rec.time;
        cox.events[static_cast<std::size_t>(i)] = rec.event;
        cox.covariates(i, 0) = rec.z[0];
        cox.covariates(i, 1) = rec.z[1];
        cox.covariates(i, 2) = x_column[static_cast<std::size_t>(i)];
    }
    return cox;
}

RepResult run_replication(const SimulationConfig& config, double tau, std::uint64_t rep) {
    RepResult out;
    CounterRng rng(config.seed, rep);
    const Dataset data = generate_dataset(config, tau, rng);

    int censored = 0;
    for (const auto& rec : data.records) censored += 1 - rec.event;
    out.censored_frac = static_cast<double>(censored) / static_cast<double>(data.size());

    const std::vector<double> u = data.u_values();
    const std::vector<double> xtilde = data.xtilde_values();
    const std::vector<double> x_true = data.x_true_values();

    // Proposed: CV bandwidth -> calibration -> estimated PL -> sandwich SE.
    const Bandwidth h = config.bandwidth_policy.cv
                            ? select_bandwidth(u, default_bandwidth_grid(u))
                            : Bandwidth(config.bandwidth_policy.fixed_h);
    const CalibrationResult cal = calibrate(u, xtilde, h);
    {
        const CoxData cox = make_cox_data(data, cal.x_hat);
        const CoxFit f = fit(cox);
        const VarianceEstimate v =
            sandwich_variance(f, xtilde, cal.x_hat, static_cast<int>(data.size()));
        for (int k = 0; k < kParams; ++k) {
            out.est[0][k] = f.theta_hat[k];
            out.se[0][k] = v.std_errors[k];
        }
    }
    // Naive and oracle use standard Cox theory for their SEs.
    const std::vector<double>* columns[2] = {&xtilde, &x_true};
    for (int m = 1; m < kMethods; ++m) {
        const CoxData cox = make_cox_data(data, *columns[m - 1]);
        const CoxFit f = fit(cox);
        const VarianceEstimate v = model_variance(f, static_cast<int>(data.size()));
        for (int k = 0; k < kParams; ++k) {
            out.est[m][k] = f.theta_hat[k];
            out.se[m][k] = v.std_errors[k];
        }
    }
    return out;
}

}  // namespace

SimulationSummary run_study(const SimulationConfig& config) {
    config.validate();
    const double tau = calibrate_tau(config);
    const int reps = config.replications;

    std::vector<RepResult> results(static_cast<std::size_t>(reps));
    unsigned n_threads = config.threads > 0
                             ? static_cast<unsigned>(config.threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(reps));

    std::atomic<int> next{0};
    auto worker = [&, tau]() {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
            auto& slot = results[static_cast<std::size_t>(r)];
            try {
                slot = run_replication(config, tau, static_cast<std::uint64_t>(r));
            } catch (const Error&) {
                slot.failed = true;
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Reduction runs serially in replication order: summaries are identical
    // for every thread count.
    SimulationSummary summary;
    summary.tau_used = tau;
    for (auto& per_method : summary.stats) per_method.resize(kParams);

    const double truth[kParams] = {config.beta0[0], config.beta0[1], config.gamma0};
    const double z = CounterRng::normal_quantile(0.5 + config.ci_level / 2.0);

    int m_ok = 0;
    double cr_sum = 0.0;
    double est_sum[kMethods][kParams] = {};
    double se_sum[kMethods][kParams] = {};
    double sqerr_sum[kMethods][kParams] = {};
    double cover_sum[kMethods][kParams] = {};
    for (const auto& rep : results) {
        if (rep.failed) {
            ++summary.replication_failures;
            continue;
        }
        ++m_ok;
        cr_sum += rep.censored_frac;
        for (int m = 0; m < kMethods; ++m) {
            for (int k = 0; k < kParams; ++k) {
                const double err = rep.est[m][k] - truth[k];
                est_sum[m][k] += rep.est[m][k];
                se_sum[m][k] += rep.se[m][k];
                sqerr_sum[m][k] += err * err;
                cover_sum[m][k] += std::abs(err) <= z * rep.se[m][k] ? 1.0 : 0.0;
            }
        }
    }

    if (summary.replication_failures > reps / 20) {
        throw TooManyFailuresError(summary.replication_failures, reps);
    }
    if (m_ok == 0) throw TooManyFailuresError(summary.replication_failures, reps);

    summary.replications_completed = m_ok;
    summary.achieved_cr = cr_sum / m_ok;
    const double md = static_cast<double>(m_ok);
    for (int m = 0; m < kMethods; ++m) {
        for (int k = 0; k < kParams; ++k) {
            ParamStats& s = summary.stats[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
            const double mean_est = est_sum[m][k] / md;
            s.bias = mean_est - truth[k];
            s.se = se_sum[m][k] / md;
            s.mse = sqerr_sum[m][k] / md;
            s.cp = cover_sum[m][k] / md;
            if (m_ok > 1) {
                // two-pass: sd from centered squares to avoid cancellation
                double ss = 0.0;
                for (const auto& rep : results) {
                    if (rep.failed) continue;
                    ss += (rep.est[m][k] - mean_est) * (rep.est[m][k] - mean_est);
                }
                s.sd = std::sqrt(ss / (md - 1.0));
            } else {
                s.sd = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return summary;
}

std::string summary_to_csv(const SimulationSummary& summary, const SimulationConfig& config) {
    static const char* param_names[kParams] = {"beta1", "beta2", "gamma"};
    std::ostringstream out;
    out << "config_id,n,cr_target,cr_achieved,distortion,method,parameter,"
           "bias,sd,se,mse,cp,replications,failures\n";
    for (int m = 0; m < kMethods; ++m) {
        for (int k = 0; k < kParams; ++k) {
            const ParamStats& s =
                summary.stats[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
            out << config.config_id << ',' << config.n << ',' << fmt_g17(config.target_cr) << ','
                << fmt_g17(summary.achieved_cr) << ',' << config.distortion.name() << ','
                << method_name(static_cast<Method>(m)) << ',' << param_names[k] << ','
                << fmt_g17(s.bias) << ',' << fmt_csv_opt(s.sd) << ',' << fmt_g17(s.se) << ','
                << fmt_g17(s.mse) << ',' << fmt_g17(s.cp) << ',' << config.replications << ','
                << summary.replication_failures << '\n';
        }
    }
    return out.str();
}

}  // namespace coxcal
