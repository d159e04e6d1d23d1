#pragma once

#include "hawkes/types.hpp"

#include <cstdint>

namespace hawkes {

struct GenConfig {
    int d{5};
    double horizon{500.0};
    int n_sequences{1};
    double neg_fraction{0.1};
    std::uint64_t seed{0};
    bool round_mu{true};
    double beta{0.8};
    int dag_max_iters{200000};
};

struct SyntheticProblem {
    HawkesParams truth;
    Dataset dataset;
    GenConfig gen_config;
};

/// Exact thinning sample of the ReLU-linked process. Throws on runaway
/// trajectories (event count exceeds max_events).
EventSequence thinning_sample(const HawkesParams& params, double horizon,
                              std::uint64_t seed, std::size_t max_events = 2000000);

/// Randomized estimation problem: mu ~ U[0,0.1], A ~ U[0,0.4] DAG-ified by
/// gradient descent on tr(e^A) - d, a fraction of the zero entries redrawn
/// negative, everything rounded to one decimal, then sampled by thinning.
SyntheticProblem generate_synthetic_problem(const GenConfig& config);

/// The DAG-ification step alone (gradient descent with clipping until
/// h(A) <= 1e-8). Throws if the iteration budget is exhausted.
Eigen::MatrixXd dagify(Eigen::MatrixXd A, int max_iters);

}  // namespace hawkes
