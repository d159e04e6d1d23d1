#include "hawkes/simulate.hpp"

#include "hawkes/graph.hpp"
#include "hawkes/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hawkes {

EventSequence thinning_sample(const HawkesParams& params, double horizon,
                              std::uint64_t seed, std::size_t max_events) {
    params.validate();
    const int d = params.dim();
    auto rng = make_stream(seed, 0x7468696eULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Dominating intensity: mu_i plus the positive-part excitation sum, which
    // only decays between events; clipping and inhibition stay below it.
    const Eigen::MatrixXd A_pos = params.A.cwiseMax(0.0);
    Eigen::VectorXd excite = Eigen::VectorXd::Zero(d);      // signed decayed sums
    Eigen::VectorXd excite_pos = Eigen::VectorXd::Zero(d);  // positive-part decayed sums
    const double mu_total = params.mu.sum();

    EventSequence seq;
    seq.horizon = horizon;
    double t = 0.0;
    while (true) {
        const double bound = mu_total + excite_pos.sum();
        if (bound <= 0.0) break;
        const double wait = -std::log(1.0 - unif(rng)) / bound;
        if (t + wait > horizon) break;
        const double decay = std::exp(-params.beta * wait);
        t += wait;
        excite *= decay;
        excite_pos *= decay;
        Eigen::VectorXd lambda = (params.mu + excite).cwiseMax(0.0);
        const double total = lambda.sum();
        if (unif(rng) * bound <= total) {
            // accepted: draw the mark proportionally to per-type intensities
            double u = unif(rng) * total;
            int mark = d - 1;
            for (int i = 0; i < d; ++i) {
                u -= lambda(i);
                if (u <= 0.0) {
                    mark = i;
                    break;
                }
            }
            seq.events.push_back({t, mark});
            excite += params.A.col(mark);
            excite_pos += A_pos.col(mark);
            if (seq.events.size() > max_events) {
                throw std::runtime_error("thinning_sample: non-stationary parameters (event cap exceeded)");
            }
        }
    }
    return seq;
}

Eigen::MatrixXd dagify(Eigen::MatrixXd A, int max_iters) {
    const double step = 0.005;
    for (int it = 0; it < max_iters; ++it) {
        if (h_dag(A) <= 1e-8) return A;
        const Eigen::MatrixXd grad = Eigen::MatrixXd(A.exp()).transpose();
        A = (A - step * grad).cwiseMax(0.0);
    }
    if (h_dag(A) <= 1e-8) return A;
    throw std::runtime_error("dagify: gradient descent on tr(e^A)-d did not converge");
}

SyntheticProblem generate_synthetic_problem(const GenConfig& config) {
    if (config.d <= 0 || config.horizon <= 0.0 || config.n_sequences <= 0 ||
        config.neg_fraction < 0.0 || config.neg_fraction > 1.0) {
        throw std::invalid_argument("generate_synthetic_problem: invalid gen_config");
    }
    const int d = config.d;
    auto rng = make_stream(config.seed, 0x67656e63ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::VectorXd mu(d);
    for (int i = 0; i < d; ++i) mu(i) = 0.1 * unif(rng);
    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) A(i, j) = 0.4 * unif(rng);
    }
    A = dagify(A, config.dag_max_iters);

    const auto round1 = [](double x) { return std::round(x * 10.0) / 10.0; };
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) A(i, j) = round1(A(i, j));
    }
    if (config.round_mu) {
        for (int i = 0; i < d; ++i) mu(i) = round1(mu(i));
    }

    // Negative entries are drawn only from entries left at zero, so the
    // positive part stays acyclic.
    std::vector<std::pair<int, int>> zeros;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (A(i, j) == 0.0) zeros.emplace_back(i, j);
        }
    }
    for (auto [i, j] : zeros) {
        if (unif(rng) < config.neg_fraction) {
            A(i, j) = round1(-0.5 * unif(rng));
        }
    }

    SyntheticProblem problem;
    problem.gen_config = config;
    problem.truth = HawkesParams{std::move(mu), std::move(A), config.beta};
    problem.dataset.d = d;
    problem.dataset.type_names = default_type_names(d);
    for (int s = 0; s < config.n_sequences; ++s) {
        auto seq = thinning_sample(problem.truth, config.horizon,
                                   mix64(config.seed) ^ mix64(0x736571ULL + static_cast<std::uint64_t>(s)));
        seq.seq_id = "seq" + std::to_string(s);
        problem.dataset.sequences.push_back(std::move(seq));
    }
    return problem;
}

}  // namespace hawkes
