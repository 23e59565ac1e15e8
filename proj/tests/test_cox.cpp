#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "coxcal/cox.hpp"
#include "coxcal/rng.hpp"
#include "oracle_helpers.hpp"

using namespace coxcal;

namespace {

CoxData random_dataset(std::uint64_t seed, int n, int q, double censor_frac = 0.3) {
    CounterRng rng(seed, 0);
    CoxData data;
    data.times.resize(n);
    data.events.resize(static_cast<std::size_t>(n));
    data.covariates.resize(n, q);
    for (int i = 0; i < n; ++i) {
        data.times[i] = rng.next_exponential();
        data.events[static_cast<std::size_t>(i)] = rng.next_double() < censor_frac ? 0 : 1;
        for (int k = 0; k < q; ++k) data.covariates(i, k) = rng.next_normal();
    }
    // guarantee at least one event
    data.events[0] = 1;
    return data;
}

Eigen::VectorXd random_theta(std::uint64_t seed, int q) {
    CounterRng rng(seed, 1);
    Eigen::VectorXd theta(q);
    for (int k = 0; k < q; ++k) theta[k] = 0.8 * rng.next_normal();
    return theta;
}

CoxData two_subject_example() {
    CoxData data;
    data.times.resize(2);
    data.times << 1.0, 2.0;
    data.events = {1, 1};
    data.covariates.resize(2, 1);
    data.covariates << 1.0, 0.0;
    return data;
}

}  // namespace

TEST_CASE("single subject log-PL is zero") {
    CoxData data;
    data.times.resize(1);
    data.times << 3.0;
    data.events = {1};
    data.covariates.resize(1, 2);
    data.covariates << 1.5, -0.3;
    Eigen::VectorXd theta(2);
    theta << 0.7, -2.0;
    CHECK(log_partial_likelihood(theta, data) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(information(theta, data).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("theta = 0 with full follow-up counts risk sets") {
    const int n = 9;
    CoxData data = random_dataset(31, n, 2, 0.0);
    double expected = 0.0;
    for (int k = 1; k <= n; ++k) expected -= std::log(static_cast<double>(k));
    CHECK(log_partial_likelihood(Eigen::VectorXd::Zero(2), data) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("two-subject hand example: value, score, information") {
    const CoxData data = two_subject_example();
    Eigen::VectorXd gamma0 = Eigen::VectorXd::Zero(1);
    CHECK(log_partial_likelihood(gamma0, data) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(score(gamma0, data)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(information(gamma0, data)(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("identical covariates give zero score") {
    CoxData data = random_dataset(5, 12, 2, 0.2);
    data.covariates = Eigen::MatrixXd::Ones(12, 2) * 1.7;
    Eigen::VectorXd theta(2);
    theta << 0.3, -0.4;
    CHECK(score(theta, data).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("score matches finite differences of log-PL") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const int q = 1 + static_cast<int>(seed % 3);
        const CoxData data = random_dataset(seed, 20, q);
        const Eigen::VectorXd theta = random_theta(seed, q);

        auto loglik = [&](const std::vector<double>& th) {
            Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(th.data(), q);
            return log_partial_likelihood(v, data);
        };
        std::vector<double> th(theta.data(), theta.data() + q);
        const std::vector<double> fd = test_oracle::finite_diff_gradient(loglik, th);
        const Eigen::VectorXd s = score(theta, data);
        for (int k = 0; k < q; ++k) {
            CHECK(s[k] == doctest::Approx(fd[static_cast<std::size_t>(k)])
                              .epsilon(1e-6)
                              .scale(std::max(1.0, std::abs(s[k]))));
        }
    }
}

TEST_CASE("information matches finite differences of score and is PSD") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const int q = 1 + static_cast<int>(seed % 2);
        const CoxData data = random_dataset(seed + 1000, 15, q);
        const Eigen::VectorXd theta = random_theta(seed + 1000, q);
        const Eigen::MatrixXd info = information(theta, data);

        // PSD at every sampled point
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, info.norm()));
        CHECK((info - info.transpose()).norm() < 1e-12 * std::max(1.0, info.norm()));

        // column k of information == -d(score)/d(theta_k)
        const double step = 1e-5;
        for (int k = 0; k < q; ++k) {
            Eigen::VectorXd up = theta;
            Eigen::VectorXd dn = theta;
            up[k] += step;
            dn[k] -= step;
            const Eigen::VectorXd fd = (score(up, data) - score(dn, data)) / (2.0 * step);
            for (int j = 0; j < q; ++j) {
                CHECK(-info(j, k) == doctest::Approx(fd[j]).epsilon(1e-5).scale(
                                         std::max(1.0, std::abs(info(j, k)))));
            }
        }
    }
}

TEST_CASE("perfectly ordered binary covariate triggers separation") {
    const CoxData data = two_subject_example();
    CHECK_THROWS_AS(fit(data), SeparationDetectedError);
}

TEST_CASE("fit matches grid-search oracle, n = 50, p = 1") {
    const CoxData data = random_dataset(7, 50, 2, 0.3);
    const CoxFit f = fit(data);
    CHECK(f.converged);

    auto loglik = [&](const std::vector<double>& th) {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(th.data(), 2);
        return log_partial_likelihood(v, data);
    };
    const std::vector<double> oracle = test_oracle::grid_search_max(loglik, 2, -5.0, 5.0, 1e-3);
    CHECK(std::abs(f.theta_hat[0] - oracle[0]) < 2e-3);
    CHECK(std::abs(f.theta_hat[1] - oracle[1]) < 2e-3);
}

TEST_CASE("fit matches grid-search oracle on tiny datasets") {
    for (std::uint64_t seed : {11u, 22u, 33u, 44u}) {
        const CoxData data = random_dataset(seed, 8, 2, 0.25);
        CoxFit f;
        try {
            f = fit(data);
        } catch (const SeparationDetectedError&) {
            continue;  // tiny samples can be degenerate; oracle has no maximizer either
        }
        auto loglik = [&](const std::vector<double>& th) {
            Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(th.data(), 2);
            return log_partial_likelihood(v, data);
        };
        const std::vector<double> oracle =
            test_oracle::grid_search_max(loglik, 2, -5.0, 5.0, 1e-3);
        CHECK(std::abs(f.theta_hat[0] - oracle[0]) < 2e-3);
        CHECK(std::abs(f.theta_hat[1] - oracle[1]) < 2e-3);
    }
}

TEST_CASE("converged fits satisfy the score contract") {
    for (std::uint64_t seed : {3u, 5u, 9u}) {
        const CoxData data = random_dataset(seed, 60, 3, 0.35);
        const CoxFit f = fit(data);
        CHECK(f.converged);
        CHECK(score(f.theta_hat, data).lpNorm<Eigen::Infinity>() < 1e-9 * 60.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.information);
        CHECK(es.eigenvalues().minCoeff() >= 0.0);
    }
}

TEST_CASE("permutation invariance of log-PL, fit, and SEs") {
    const CoxData data = random_dataset(41, 40, 2, 0.3);
    std::vector<int> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 gen(5);
    std::shuffle(perm.begin(), perm.end(), gen);

    CoxData shuffled = data;
    for (int i = 0; i < 40; ++i) {
        shuffled.times[i] = data.times[perm[static_cast<std::size_t>(i)]];
        shuffled.events[static_cast<std::size_t>(i)] =
            data.events[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        shuffled.covariates.row(i) = data.covariates.row(perm[static_cast<std::size_t>(i)]);
    }

    Eigen::VectorXd theta = random_theta(2, 2);
    CHECK(log_partial_likelihood(theta, data) ==
          doctest::Approx(log_partial_likelihood(theta, shuffled)).epsilon(1e-12));

    const CoxFit fa = fit(data);
    const CoxFit fb = fit(shuffled);
    const VarianceEstimate va = model_variance(fa, 40);
    const VarianceEstimate vb = model_variance(fb, 40);
    for (int k = 0; k < 2; ++k) {
        CHECK(fa.theta_hat[k] == doctest::Approx(fb.theta_hat[k]).epsilon(1e-9));
        CHECK(va.std_errors[k] == doctest::Approx(vb.std_errors[k]).epsilon(1e-9));
    }
}

TEST_CASE("Z-column location invariance and scale equivariance") {
    const CoxData data = random_dataset(51, 50, 3, 0.3);
    const CoxFit base = fit(data);
    const VarianceEstimate base_v = model_variance(base, 50);

    CoxData shifted = data;
    shifted.covariates.col(0).array() += 11.5;
    const CoxFit fs = fit(shifted);
    const VarianceEstimate vs = model_variance(fs, 50);
    for (int k = 0; k < 3; ++k) {
        CHECK(fs.theta_hat[k] == doctest::Approx(base.theta_hat[k]).epsilon(1e-7));
        CHECK(vs.std_errors[k] == doctest::Approx(base_v.std_errors[k]).epsilon(1e-7));
    }

    const double c = -2.5;
    CoxData scaled = data;
    scaled.covariates.col(1) *= c;
    const CoxFit fc = fit(scaled);
    const VarianceEstimate vc = model_variance(fc, 50);
    CHECK(fc.theta_hat[1] == doctest::Approx(base.theta_hat[1] / c).epsilon(1e-7));
    CHECK(vc.std_errors[1] == doctest::Approx(base_v.std_errors[1] / std::abs(c)).epsilon(1e-7));
    CHECK(fc.theta_hat[0] == doctest::Approx(base.theta_hat[0]).epsilon(1e-7));
}

TEST_CASE("sandwich reduces to model covariance when variances agree") {
    const CoxData data = random_dataset(61, 50, 3, 0.3);
    const CoxFit f = fit(data);
    std::vector<double> x(50);
    for (int i = 0; i < 50; ++i) x[static_cast<std::size_t>(i)] = data.covariates(i, 2) + 2.0;

    const VarianceEstimate sandwich = sandwich_variance(f, x, x, 50);
    const VarianceEstimate model = model_variance(f, 50);
    CHECK(sandwich.omega_hat.norm() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK((sandwich.covariance - model.covariance).norm() <
          1e-10 * model.covariance.norm());
}

TEST_CASE("sandwich minus model covariance is nonzero only in (gamma, gamma)") {
    const CoxData data = random_dataset(71, 80, 3, 0.25);
    const CoxFit f = fit(data);
    std::vector<double> xtilde(80), x_hat(80);
    CounterRng rng(9, 4);
    for (int i = 0; i < 80; ++i) {
        x_hat[static_cast<std::size_t>(i)] = data.covariates(i, 2) + 2.0;
        // xtilde strictly noisier than x_hat
        xtilde[static_cast<std::size_t>(i)] =
            x_hat[static_cast<std::size_t>(i)] + 0.5 * rng.next_normal();
    }
    const VarianceEstimate sandwich = sandwich_variance(f, xtilde, x_hat, 80);
    const VarianceEstimate model = model_variance(f, 80);
    const Eigen::MatrixXd diff = sandwich.covariance - model.covariance;
    const double scale = model.covariance.norm();
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            if (j == 2 && k == 2) continue;
            CHECK(std::abs(diff(j, k)) < 1e-10 * scale);
        }
    }
    CHECK(diff(2, 2) > 0.0);
    // gamma inflation: Sigma^{-1} zeta = (0, ..., 0, -gamma)^T makes the
    // correction factor * gamma^2 exactly
    const double var_gap =
        [&] {
            auto var = [](const std::vector<double>& v) {
                double m = 0.0;
                for (double t : v) m += t;
                m /= static_cast<double>(v.size());
                double ss = 0.0;
                for (double t : v) ss += (t - m) * (t - m);
                return ss / static_cast<double>(v.size() - 1);
            };
            return var(xtilde) - var(x_hat);
        }();
    double mean_xt = 0.0;
    for (double t : xtilde) mean_xt += t;
    mean_xt /= 80.0;
    const double expected =
        var_gap / (mean_xt * mean_xt) * f.theta_hat[2] * f.theta_hat[2] / 80.0;
    CHECK(diff(2, 2) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("sandwich variance rejects mean-zero xtilde") {
    const CoxData data = random_dataset(81, 30, 2, 0.3);
    const CoxFit f = fit(data);
    std::vector<double> xtilde(30), x_hat(30);
    CounterRng rng(1, 1);
    for (auto& v : xtilde) v = rng.next_normal() * 1.0;  // mean approx 0
    double m = 0.0;
    for (double v : xtilde) m += v;
    m /= 30.0;
    for (auto& v : xtilde) v -= m;  // exact mean zero
    x_hat = xtilde;
    CHECK_THROWS_AS(sandwich_variance(f, xtilde, x_hat, 30), MeanNearZeroError);
}

TEST_CASE("data validation errors") {
    CoxData data;
    CHECK_THROWS_AS(data.validate(), EmptySampleError);

    data = random_dataset(1, 5, 1, 0.0);
    data.events = {0, 0, 0, 0, 0};
    CHECK_THROWS_AS(data.validate(), EmptySampleError);

    data = random_dataset(1, 5, 1, 0.0);
    data.events[2] = 7;
    CHECK_THROWS_AS(data.validate(), ConfigError);

    data = random_dataset(1, 5, 1, 0.0);
    data.times[1] = -0.5;
    CHECK_THROWS_AS(data.validate(), ConfigError);
}
