#include "coxcal/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coxcal {

namespace {

// One reverse-time sweep accumulating the risk-set aggregates S0, S1, S2 and
// the requested event sums. Linear predictors are centered at their maximum
// so exp never overflows for finite theta.
struct SweepResult {
    double loglik = 0.0;
    Eigen::VectorXd score;
    Eigen::MatrixXd information;
};

SweepResult sweep(const Eigen::VectorXd& theta, const CoxData& data, bool want_derivatives) {
    const Eigen::Index n = data.times.size();
    const Eigen::Index q = data.covariates.cols();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (data.times[a] != data.times[b]) return data.times[a] < data.times[b];
        return a < b;  // stable under permutation of equal times
    });

    Eigen::VectorXd eta = data.covariates * theta;
    const double eta_max = eta.maxCoeff();
    if (!std::isfinite(eta_max)) throw NonFiniteLikelihoodError();

    SweepResult out;
    out.score = Eigen::VectorXd::Zero(q);
    out.information = Eigen::MatrixXd::Zero(q, q);

    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(q);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(q, q);

    std::size_t k = static_cast<std::size_t>(n);
    while (k > 0) {
        // Group of tied times [lo, k); all members join the risk set before
        // any of the group's events contribute (Breslow).
        std::size_t lo = k;
        const double t = data.times[order[k - 1]];
        while (lo > 0 && data.times[order[lo - 1]] == t) --lo;
        for (std::size_t m = lo; m < k; ++m) {
            const Eigen::Index i = order[m];
            const double w = std::exp(eta[i] - eta_max);
            s0 += w;
            if (want_derivatives) {
                s1.noalias() += w * data.covariates.row(i).transpose();
                s2.noalias() += w * data.covariates.row(i).transpose() * data.covariates.row(i);
            }
        }
        for (std::size_t m = lo; m < k; ++m) {
            const Eigen::Index i = order[m];
            if (!data.events[static_cast<std::size_t>(i)]) continue;
            out.loglik += eta[i] - (eta_max + std::log(s0));
            if (want_derivatives) {
                const Eigen::VectorXd e = s1 / s0;
                out.score.noalias() += data.covariates.row(i).transpose() - e;
                out.information.noalias() += s2 / s0 - e * e.transpose();
            }
        }
        k = lo;
    }

    if (!std::isfinite(out.loglik)) throw NonFiniteLikelihoodError();
    return out;
}

double sample_variance(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / (n - 1.0);
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw SingularInformationError();
    return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace

void CoxData::validate() const {
    const Eigen::Index n = times.size();
    if (n == 0) throw EmptySampleError("CoxData: no subjects");
    if (static_cast<Eigen::Index>(events.size()) != n || covariates.rows() != n) {
        throw ConfigError("CoxData: inconsistent lengths");
    }
    bool any_event = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0) {
            throw ConfigError("CoxData: times must be finite and nonnegative");
        }
        const int d = events[static_cast<std::size_t>(i)];
        if (d != 0 && d != 1) throw ConfigError("CoxData: event indicators must be 0 or 1");
        any_event = any_event || d == 1;
    }
    if (!covariates.allFinite()) throw ConfigError("CoxData: covariates must be finite");
    if (!any_event) throw EmptySampleError("CoxData: no observed events");
}

double log_partial_likelihood(const Eigen::VectorXd& theta, const CoxData& data) {
    data.validate();
    return sweep(theta, data, false).loglik;
}

Eigen::VectorXd score(const Eigen::VectorXd& theta, const CoxData& data) {
    data.validate();
    return sweep(theta, data, true).score;
}

Eigen::MatrixXd information(const Eigen::VectorXd& theta, const CoxData& data) {
    data.validate();
    return sweep(theta, data, true).information;
}

CoxFit fit(const CoxData& data, const FitOptions& options) {
    data.validate();
    const Eigen::Index q = data.covariates.cols();
    const double n = static_cast<double>(data.times.size());

    CoxFit result;
    result.theta_hat = Eigen::VectorXd::Zero(q);
    SweepResult cur = sweep(result.theta_hat, data, true);

    // Monotone likelihoods drive theta outward while score and log-PL
    // changes both vanish; the tell is curvature collapsing relative to its
    // value at theta = 0.
    auto min_eigenvalue = [](const Eigen::MatrixXd& m) {
        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
    };
    const double initial_curvature = min_eigenvalue(cur.information);
    auto check_curvature = [&](const Eigen::MatrixXd& info) {
        if (min_eigenvalue(info) < 1e-6 * initial_curvature) {
            throw SeparationDetectedError();
        }
    };

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        result.iterations = iter;
        result.max_score_norm = cur.score.lpNorm<Eigen::Infinity>();
        if (result.max_score_norm < options.score_tol_per_n * n) {
            check_curvature(cur.information);
            result.converged = true;
            break;
        }

        Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.information);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw SingularInformationError();
        }
        Eigen::VectorXd direction = ldlt.solve(cur.score);
        if (!direction.allFinite()) throw SingularInformationError();

        double step = 1.0;
        SweepResult next;
        Eigen::VectorXd candidate;
        bool improved = false;
        for (int halving = 0; halving <= options.max_step_halvings; ++halving) {
            candidate = result.theta_hat + step * direction;
            next = sweep(candidate, data, true);
            // Near the optimum the log-PL change drops below double
            // resolution before the score tolerance is met; the full Newton
            // step is still right whenever it shrinks the gradient.
            if (next.loglik > cur.loglik ||
                (halving == 0 &&
                 next.score.lpNorm<Eigen::Infinity>() < result.max_score_norm)) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            // Likelihood will not increase along the Newton direction away
            // from a stationary point: monotone likelihood.
            if (result.max_score_norm >= options.score_tol_per_n * n) {
                throw SeparationDetectedError();
            }
            break;
        }

        const double delta_ll = next.loglik - cur.loglik;
        result.theta_hat = candidate;
        cur = std::move(next);
        result.max_score_norm = cur.score.lpNorm<Eigen::Infinity>();

        if (result.theta_hat.lpNorm<Eigen::Infinity>() > options.theta_bound) {
            throw SeparationDetectedError();
        }
        if (result.max_score_norm < options.score_tol_per_n * n &&
            std::abs(delta_ll) < options.loglik_tol) {
            check_curvature(cur.information);
            result.converged = true;
            break;
        }
    }

    if (!result.converged &&
        result.max_score_norm < options.score_tol_per_n * n) {
        check_curvature(cur.information);
        result.converged = true;
    }
    if (!result.converged) throw MaxIterationsError(options.max_iterations);

    result.loglik = cur.loglik;
    result.information = cur.information;
    return result;
}

VarianceEstimate sandwich_variance(const CoxFit& fit, std::span<const double> xtilde,
                                   std::span<const double> x_hat, int n) {
    if (!fit.converged) throw ConfigError("sandwich_variance: fit did not converge");
    if (n < 2 || xtilde.size() < 2 || x_hat.size() != xtilde.size()) {
        throw ConfigError("sandwich_variance: need at least 2 subjects");
    }

    const double nd = static_cast<double>(n);
    const Eigen::Index q = fit.theta_hat.size();
    const double gamma_hat = fit.theta_hat[q - 1];

    double mean_xt = 0.0;
    for (double x : xtilde) mean_xt += x;
    mean_xt /= static_cast<double>(xtilde.size());
    const double var_xt = sample_variance(xtilde);
    const double var_xh = sample_variance(x_hat);
    if (std::abs(mean_xt) < 1e-8 * std::sqrt(var_xt)) throw MeanNearZeroError();

    VarianceEstimate out;
    out.sigma_hat = fit.information / nd;
    // zeta = (-Sigma_12^T gamma, -Sigma_22 gamma)^T, i.e. -gamma times the
    // last column of Sigma_hat; the plug-in variance gap is clamped at zero
    // to keep the covariance PSD in finite samples.
    const Eigen::VectorXd zeta = -gamma_hat * out.sigma_hat.col(q - 1);
    const double factor = std::max(var_xt - var_xh, 0.0) / (mean_xt * mean_xt);
    out.omega_hat = factor * zeta * zeta.transpose();

    const Eigen::MatrixXd sigma_inv = invert_spd(out.sigma_hat);
    out.covariance = sigma_inv * (out.sigma_hat + out.omega_hat) * sigma_inv / nd;
    out.covariance = ((out.covariance + out.covariance.transpose()) / 2.0).eval();
    out.std_errors = out.covariance.diagonal().cwiseSqrt();
    return out;
}

VarianceEstimate model_variance(const CoxFit& fit, int n) {
    if (!fit.converged) throw ConfigError("model_variance: fit did not converge");
    const double nd = static_cast<double>(n);
    VarianceEstimate out;
    out.sigma_hat = fit.information / nd;
    out.omega_hat = Eigen::MatrixXd::Zero(out.sigma_hat.rows(), out.sigma_hat.cols());
    out.covariance = invert_spd(out.sigma_hat) / nd;
    out.std_errors = out.covariance.diagonal().cwiseSqrt();
    return out;
}

}  // namespace coxcal
