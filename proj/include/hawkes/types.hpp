#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hawkes {

struct Event {
    double time{0.0};
    int mark{0};

    friend bool operator==(const Event&, const Event&) = default;
};

/// One time-ordered marked event stream on [0, horizon].
struct EventSequence {
    std::string seq_id;
    double horizon{0.0};
    std::vector<Event> events;

    friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

struct Dataset {
    int d{0};
    std::vector<std::string> type_names;
    std::vector<EventSequence> sequences;

    double total_horizon() const;
    std::size_t total_events() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Full model state: background rates mu, interaction matrix A (row i = target
/// type, column j = source type) and the shared exponential decay rate beta.
struct HawkesParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd A;
    double beta{1.0};

    int dim() const { return static_cast<int>(mu.size()); }

    // Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

struct FitConfig {
    double gamma1{0.1};           // phase-1 step length
    double gamma2{0.1};           // phase-2 initial step
    double gamma0{1e-4};          // phase-2 terminal step threshold
    double p_select{0.85};        // row-selection energy fraction
    double lambda1{0.0};          // L1 penalty weight
    int phase1_iters{1000};
    int phase1_halve_every{200};
    std::uint64_t seed{0};
    std::pair<double, double> mu_init_range{0.01, 0.1};
    bool truncated_compensator{false};  // use the truncated compensator variant
    int phase2_max_iters_per_row{4000};  // divergence guard
    double feasibility_tol{1e-12};

    void validate() const;
};

std::vector<std::string> default_type_names(int d);

}  // namespace hawkes
