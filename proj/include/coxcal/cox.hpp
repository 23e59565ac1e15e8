#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "coxcal/errors.hpp"

namespace coxcal {

// Right-censored sample for partial-likelihood fitting. Each covariate row is
// V_i = (Z_i^T, x_i) where x is the true, distorted, or calibrated covariate
// depending on the method being run.
struct CoxData {
    Eigen::VectorXd times;
    std::vector<int> events;        // 1 = observed failure, 0 = censored
    Eigen::MatrixXd covariates;     // n x (p+1)

    void validate() const;
};

struct FitOptions {
    int max_iterations = 100;
    double score_tol_per_n = 1e-9;   // converged when ||score||_inf < tol * n
    double loglik_tol = 1e-12;
    int max_step_halvings = 30;
    double theta_bound = 50.0;       // ||theta||_inf beyond this flags separation
};

struct CoxFit {
    Eigen::VectorXd theta_hat;
    double loglik = 0.0;
    Eigen::MatrixXd information;     // observed information (-Hessian) at theta_hat
    int iterations = 0;
    bool converged = false;
    double max_score_norm = 0.0;
};

struct VarianceEstimate {
    Eigen::MatrixXd sigma_hat;       // information / n
    Eigen::MatrixXd omega_hat;
    Eigen::MatrixXd covariance;      // sandwich / n (or model-based when omega = 0)
    Eigen::VectorXd std_errors;
};

// Breslow-tie log partial likelihood; risk set is {j : T_j >= T_i}.
double log_partial_likelihood(const Eigen::VectorXd& theta, const CoxData& data);

// Score sum over events of (V_i - E(theta, T_i)).
Eigen::VectorXd score(const Eigen::VectorXd& theta, const CoxData& data);

// Observed information: sum over events of S2/S0 - (S1/S0)^x2.
Eigen::MatrixXd information(const Eigen::VectorXd& theta, const CoxData& data);

// Damped Newton-Raphson from theta = 0.
CoxFit fit(const CoxData& data, const FitOptions& options = {});

// Sandwich covariance for the calibrated fit; the omega correction
// touches only the (gamma, gamma) entry.
VarianceEstimate sandwich_variance(const CoxFit& fit, std::span<const double> xtilde,
                                   std::span<const double> x_hat, int n);

// Standard model-based covariance Sigma_hat^{-1}/n for naive and oracle fits.
VarianceEstimate model_variance(const CoxFit& fit, int n);

}  // namespace coxcal
