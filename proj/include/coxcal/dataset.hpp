#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace coxcal {

// One subject: observed time, event flag, exact covariates Z, confounder U,
// distorted covariate Xtilde, and (simulated data only) the true X.
struct SurvivalRecord {
    double time = 0.0;
    int event = 0;
    std::vector<double> z;
    double u = 0.0;
    double xtilde = 0.0;
    std::optional<double> x_true;
};

struct Dataset {
    std::vector<SurvivalRecord> records;

    std::size_t size() const { return records.size(); }
    std::size_t z_dim() const { return records.empty() ? 0 : records.front().z.size(); }

    std::vector<double> times() const;
    std::vector<int> events() const;
    std::vector<double> u_values() const;
    std::vector<double> xtilde_values() const;
    std::vector<double> x_true_values() const;  // throws if any record lacks x_true
    bool has_x_true() const;
};

}  // namespace coxcal
