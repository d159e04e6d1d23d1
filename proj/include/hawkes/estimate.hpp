#pragma once

#include "hawkes/likelihood.hpp"
#include "hawkes/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hawkes {

struct TraceRecord {
    int iter{0};
    std::string phase;   // "phase1", "phase2-A", "phase2-mu", "gd", "sgd"
    double step{0.0};
    double grad_mu_norm{0.0};
    double grad_a_fro{0.0};
    std::vector<double> row_norms;
    std::optional<double> loglik;  // empty = intractable at this iterate
    std::string note;
    double wall_ms{0.0};
};

struct FitResult {
    HawkesParams params_hat;
    std::vector<int> selected_rows;
    std::vector<TraceRecord> trace;
    double end_phase1_loglik{0.0};

    std::string trace_csv() const;
};

/// Phase 1: projected normalized-gradient ascent with step halving on a fixed
/// schedule; all iterates are clipped to the nonnegative orthant.
std::pair<HawkesParams, std::vector<TraceRecord>> phase1_pgd(
    const LikelihoodContext& ctx, double beta, const FitConfig& config);

struct RowSelection {
    std::vector<int> indices;  // all d rows sorted by descending gradient-row norm
    int count{0};              // d-tilde: how many of them are selected
};

RowSelection select_rows(const Gradients& grads, double p_select);

FitResult phase2_bcd(const LikelihoodContext& ctx, double beta, const FitConfig& config,
                     HawkesParams phase1_params, std::vector<TraceRecord> trace,
                     double end_phase1_loglik);

FitResult fit_two_phase(const Dataset& dataset, double beta, const FitConfig& config);

FitResult fit_vanilla_gd(const Dataset& dataset, double beta, const FitConfig& config);
FitResult fit_early_stopped_gd(const Dataset& dataset, double beta, const FitConfig& config);
FitResult fit_restart_sgd(const Dataset& dataset, double beta, const FitConfig& config);

struct GridPoint {
    double beta{0.0};
    double lambda1{0.0};
    double gamma1{0.0};
    double end_phase1_loglik{0.0};  // -inf marks a diverged/failed phase 1
};

struct GridSearchResult {
    GridPoint best;
    std::vector<GridPoint> table;
    FitResult fit;  // full two-phase fit at the winning combination
};

GridSearchResult grid_search(const Dataset& dataset, const std::vector<double>& beta_grid,
                             const std::vector<double>& lambda1_grid,
                             const std::vector<double>& gamma1_grid, const FitConfig& config);

}  // namespace hawkes
