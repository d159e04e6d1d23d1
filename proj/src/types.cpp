#include "hawkes/types.hpp"

#include <stdexcept>

namespace hawkes {

double Dataset::total_horizon() const {
    double total = 0.0;
    for (const auto& seq : sequences) total += seq.horizon;
    return total;
}

std::size_t Dataset::total_events() const {
    std::size_t n = 0;
    for (const auto& seq : sequences) n += seq.events.size();
    return n;
}

void HawkesParams::validate() const {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("HawkesParams: beta must be positive");
    }
    const auto d = mu.size();
    if (A.rows() != d || A.cols() != d) {
        throw std::invalid_argument("HawkesParams: A must be d x d with d = |mu|");
    }
    if ((mu.array() < 0.0).any()) {
        throw std::invalid_argument("HawkesParams: mu entries must be nonnegative");
    }
    if (!mu.allFinite() || !A.allFinite()) {
        throw std::invalid_argument("HawkesParams: entries must be finite");
    }
}

void FitConfig::validate() const {
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0) || !(gamma0 > 0.0)) {
        throw std::invalid_argument("FitConfig: step lengths must be positive");
    }
    if (!(gamma0 < gamma2)) {
        throw std::invalid_argument("FitConfig: gamma0 must be smaller than gamma2");
    }
    if (!(p_select > 0.0 && p_select <= 1.0)) {
        throw std::invalid_argument("FitConfig: p_select must lie in (0, 1]");
    }
    if (lambda1 < 0.0) {
        throw std::invalid_argument("FitConfig: lambda1 must be nonnegative");
    }
    if (phase1_iters <= 0 || phase1_halve_every <= 0 || phase1_halve_every > phase1_iters) {
        throw std::invalid_argument("FitConfig: need 0 < phase1_halve_every <= phase1_iters");
    }
    if (mu_init_range.first < 0.0 || mu_init_range.second < mu_init_range.first) {
        throw std::invalid_argument("FitConfig: mu_init_range must satisfy 0 <= lo <= hi");
    }
}

std::vector<std::string> default_type_names(int d) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) names.push_back("type" + std::to_string(i));
    return names;
}

}  // namespace hawkes
