#include "coxcal/dataset.hpp"

#include "coxcal/errors.hpp"

namespace coxcal {

std::vector<double> Dataset::times() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.time);
    return out;
}

std::vector<int> Dataset::events() const {
    std::vector<int> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.event);
    return out;
}

std::vector<double> Dataset::u_values() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.u);
    return out;
}

std::vector<double> Dataset::xtilde_values() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.xtilde);
    return out;
}

std::vector<double> Dataset::x_true_values() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (!r.x_true) throw SchemaError("dataset has no true covariate column");
        out.push_back(*r.x_true);
    }
    return out;
}

bool Dataset::has_x_true() const {
    for (const auto& r : records) {
        if (!r.x_true) return false;
    }
    return !records.empty();
}

}  // namespace coxcal
