#include "coxcal/analysis.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "coxcal/format.hpp"
#include "coxcal/kernel.hpp"
#include "coxcal/rng.hpp"

namespace coxcal {

FitMethod parse_fit_method(const std::string& text) {
    if (text == "proposed") return FitMethod::proposed;
    if (text == "naive") return FitMethod::naive;
    if (text == "oracle-if-available" || text == "oracle") return FitMethod::oracle_if_available;
    throw ConfigError("unknown method '" + text + "' (expected proposed, naive, or oracle-if-available)");
}

namespace {

const char* method_label(FitMethod m) {
    switch (m) {
        case FitMethod::proposed: return "proposed";
        case FitMethod::naive: return "naive";
        case FitMethod::oracle_if_available: return "oracle";
    }
    return "?";
}

CoxData build_cox_data(const Dataset& data, const std::vector<double>& x_column) {
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index p = static_cast<Eigen::Index>(data.z_dim());
    CoxData cox;
    cox.times.resize(n);
    cox.events.resize(data.size());
    cox.covariates.resize(n, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& rec = data.records[static_cast<std::size_t>(i)];
        cox.times[i] = rec.time;
        cox.events[static_cast<std::size_t>(i)] = rec.event;
        for (Eigen::Index k = 0; k < p; ++k) {
            cox.covariates(i, k) = rec.z[static_cast<std::size_t>(k)];
        }
        cox.covariates(i, p) = x_column[static_cast<std::size_t>(i)];
    }
    return cox;
}

}  // namespace

FitReport run_fit(const Dataset& data, FitMethod method, std::optional<double> bandwidth,
                  double ci_level) {
    if (data.size() < 2) throw EmptySampleError("fit: needs at least 2 subjects");
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("ci_level must lie in (0, 1)");

    FitReport report;
    report.method = method;
    report.ci_level = ci_level;
    report.n = data.size();
    report.n_events = 0;
    for (const auto& rec : data.records) report.n_events += static_cast<std::size_t>(rec.event);

    const std::vector<double> xtilde = data.xtilde_values();
    std::vector<double> x_column;
    switch (method) {
        case FitMethod::proposed: {
            const std::vector<double> u = data.u_values();
            const Bandwidth h = bandwidth ? Bandwidth(*bandwidth)
                                          : select_bandwidth(u, default_bandwidth_grid(u));
            report.bandwidth = h.h;
            x_column = calibrate(u, xtilde, h).x_hat;
            break;
        }
        case FitMethod::naive:
            x_column = xtilde;
            break;
        case FitMethod::oracle_if_available:
            if (!data.has_x_true()) {
                throw SchemaError("oracle method requires a true-covariate column");
            }
            x_column = data.x_true_values();
            break;
    }

    const CoxData cox = build_cox_data(data, x_column);
    const CoxFit f = fit(cox);
    report.loglik = f.loglik;
    report.iterations = f.iterations;

    const VarianceEstimate v =
        method == FitMethod::proposed
            ? sandwich_variance(f, xtilde, x_column, static_cast<int>(data.size()))
            : model_variance(f, static_cast<int>(data.size()));

    const double zq = CounterRng::normal_quantile(0.5 + ci_level / 2.0);
    const std::size_t p = data.z_dim();
    for (std::size_t k = 0; k <= p; ++k) {
        CoefficientRow row;
        row.term = k < p ? "beta" + std::to_string(k + 1) : "gamma";
        row.estimate = f.theta_hat[static_cast<Eigen::Index>(k)];
        row.std_error = v.std_errors[static_cast<Eigen::Index>(k)];
        row.z_value = row.estimate / row.std_error;
        row.p_value = 2.0 * (1.0 - CounterRng::normal_cdf(std::abs(row.z_value)));
        row.ci_lower = row.estimate - zq * row.std_error;
        row.ci_upper = row.estimate + zq * row.std_error;
        report.rows.push_back(row);
    }
    return report;
}

std::string FitReport::to_csv() const {
    std::ostringstream out;
    out << "term,estimate,std_error,z_value,p_value,ci_lower,ci_upper\n";
    for (const auto& r : rows) {
        out << r.term << ',' << fmt_g17(r.estimate) << ',' << fmt_g17(r.std_error) << ','
            << fmt_g17(r.z_value) << ',' << fmt_g17(r.p_value) << ',' << fmt_g17(r.ci_lower)
            << ',' << fmt_g17(r.ci_upper) << '\n';
    }
    return out.str();
}

std::string FitReport::to_text(const std::string& config_block) const {
    std::ostringstream out;
    out << "Cox proportional-hazards fit (" << method_label(method) << " method)\n";
    out << config_block;
    out << "n = " << n << ", events = " << n_events << ", log-PL = " << fmt_fixed(loglik, 4)
        << ", Newton iterations = " << iterations << "\n";
    if (bandwidth) out << "selected bandwidth = " << fmt_g17(*bandwidth) << "\n";
    out << "ci_level = " << fmt_g17(ci_level) << "\n\n";
    out << "term      estimate        SE         z    p-value          CI\n";
    for (const auto& r : rows) {
        out << r.term;
        for (std::size_t s = r.term.size(); s < 8; ++s) out << ' ';
        out << fmt_fixed(r.estimate, 4) << "    " << fmt_fixed(r.std_error, 4) << "    "
            << fmt_fixed(r.z_value, 3) << "    " << fmt_fixed(r.p_value, 4) << "    ["
            << fmt_fixed(r.ci_lower, 4) << ", " << fmt_fixed(r.ci_upper, 4) << "]\n";
    }
    return out.str();
}

SimulationConfig simulation_config_from_map(const std::map<std::string, std::string>& values,
                                            const std::string& origin) {
    SimulationConfig config;
    std::set<std::string> known;

    auto lookup = [&](const std::string& key) -> const std::string* {
        known.insert(key);
        auto it = values.find("simulation." + key);
        if (it == values.end()) it = values.find(key);
        if (it == values.end()) return nullptr;
        return &it->second;
    };
    auto get_double = [&](const std::string& key, double& target) {
        if (const std::string* v = lookup(key)) {
            try {
                target = std::stod(*v);
            } catch (const std::exception&) {
                throw ConfigError(origin + ": key '" + key + "': cannot parse '" + *v + "'");
            }
        }
    };
    auto get_int = [&](const std::string& key, int& target) {
        double d = target;
        get_double(key, d);
        target = static_cast<int>(d);
    };

    get_int("n", config.n);
    get_int("replications", config.replications);
    get_int("threads", config.threads);
    get_double("target_cr", config.target_cr);
    get_double("gamma0", config.gamma0);
    get_double("beta1", config.beta0[0]);
    get_double("beta2", config.beta0[1]);
    get_double("z_corr", config.z_corr);
    get_double("x_mean", config.x_mean);
    get_double("x_sd", config.x_sd);
    get_double("u_lo", config.u_lo);
    get_double("u_hi", config.u_hi);
    get_double("ci_level", config.ci_level);
    if (const std::string* v = lookup("seed")) {
        config.seed = std::stoull(*v);
    }
    if (const std::string* v = lookup("config_id")) config.config_id = *v;
    if (const std::string* v = lookup("distortion")) {
        if (*v == "identity") {
            config.distortion = DistortionSpec::identity();
        } else if (*v == "linear") {
            config.distortion = DistortionSpec::linear_benchmark();
        } else if (*v == "quadratic") {
            config.distortion = DistortionSpec::quadratic_benchmark();
        } else {
            throw ConfigError(origin + ": unknown distortion '" + *v + "'");
        }
    }
    if (const std::string* v = lookup("bandwidth")) {
        if (*v == "cv" || *v == "auto") {
            config.bandwidth_policy = {true, 0.0};
        } else {
            try {
                config.bandwidth_policy = {false, std::stod(*v)};
            } catch (const std::exception&) {
                throw ConfigError(origin + ": bandwidth must be 'cv' or a positive number");
            }
        }
    }

    for (const auto& [key, value] : values) {
        (void)value;
        std::string bare = key;
        if (bare.rfind("simulation.", 0) == 0) bare = bare.substr(11);
        else if (bare.find('.') != std::string::npos) {
            throw ConfigError(origin + ": unknown section in key '" + key + "'");
        }
        if (!known.count(bare)) throw ConfigError(origin + ": unknown key '" + key + "'");
    }

    config.validate();
    return config;
}

}  // namespace coxcal
