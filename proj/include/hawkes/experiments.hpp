#pragma once

#include "hawkes/estimate.hpp"
#include "hawkes/graph.hpp"
#include "hawkes/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hawkes {

/// A scripted study: repeated generate -> fit -> score trials over a grid of
/// configurations, or (for "runtime") gradient-evaluation timing.
struct ExperimentPlan {
    std::string experiment;            // consistency | beta_grid | baselines | runtime
    int d{5};
    std::vector<double> horizons{500.0};
    std::vector<int> sequence_counts{1};
    int trials{20};
    std::uint64_t seed{0};
    double beta{0.8};                  // ground-truth kernel decay
    double neg_fraction{0.1};
    std::vector<double> beta_grid;     // beta_grid experiment only
    std::vector<int> d_values{5, 10};  // runtime experiment only
    int evals{50};                     // runtime experiment only
    FitConfig fit;

    void validate() const;
    static ExperimentPlan from_json_file(const std::string& path);
};

struct TrialRecord {
    std::string config;  // e.g. "d=5,T=2000,n=1"
    std::string method;  // two_phase | restart_sgd | vanilla_gd | early_stopped_gd | selected | beta=x
    int trial{0};
    bool ok{false};
    MetricRecord metrics;
    double fit_ms{0.0};
    std::string error;
};

struct SummaryRow {
    std::string config;
    std::string method;
    int trials_ok{0};
    int trials_failed{0};
    double a_err_median{0.0}, a_err_std{0.0};
    double mu_err_median{0.0}, mu_err_std{0.0};
    double beta_err_median{0.0}, beta_err_std{0.0};
    double hd_median{0.0}, hd_std{0.0};
    double shd_median{0.0}, shd_std{0.0};
    double fit_ms_median{0.0};
};

struct RuntimeRow {
    int d{0};
    double horizon{0.0};
    double surrogate_mean_ms{0.0};
    double restart_mean_ms{0.0};
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    std::vector<SummaryRow> summary;
    std::vector<RuntimeRow> runtime;  // runtime experiment only

    std::string records_csv() const;
    std::string summary_csv() const;
    std::string summary_json() const;
};

ExperimentResult run_experiment(const ExperimentPlan& plan, int workers = 0);

double median(std::vector<double> values);
double sample_stddev(const std::vector<double>& values);

}  // namespace hawkes
