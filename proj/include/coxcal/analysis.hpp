#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coxcal/calibration.hpp"
#include "coxcal/cox.hpp"
#include "coxcal/dataset.hpp"
#include "coxcal/simulation.hpp"

namespace coxcal {

enum class FitMethod { proposed, naive, oracle_if_available };

FitMethod parse_fit_method(const std::string& text);  // throws ConfigError

// One fitted coefficient table row.
struct CoefficientRow {
    std::string term;
    double estimate;
    double std_error;
    double z_value;
    double p_value;
    double ci_lower;
    double ci_upper;
};

struct FitReport {
    FitMethod method;
    std::vector<CoefficientRow> rows;
    std::optional<double> bandwidth;  // proposed only
    double ci_level;
    std::size_t n;
    std::size_t n_events;
    double loglik;
    int iterations;

    std::string to_csv() const;
    std::string to_text(const std::string& config_block) const;
};

// The single-dataset workflow: (auto) bandwidth -> calibration -> Cox fit ->
// variance. bandwidth empty means CV selection on the observed U values.
FitReport run_fit(const Dataset& data, FitMethod method, std::optional<double> bandwidth,
                  double ci_level);

// Build a SimulationConfig from a parsed "key = value" config map;
// unknown keys are rejected. Keys may live in the "" or "simulation" section.
SimulationConfig simulation_config_from_map(const std::map<std::string, std::string>& values,
                                            const std::string& origin);

}  // namespace coxcal
