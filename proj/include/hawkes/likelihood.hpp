#pragma once

#include "hawkes/types.hpp"

#include <optional>
#include <vector>

namespace hawkes {

struct Gradients {
    Eigen::VectorXd d_mu;
    Eigen::MatrixXd d_A;
};

/// Offending event of an intractable likelihood (surrogate intensity <= 0 at
/// an event occurrence) or of a singular gradient (intensity exactly 0).
struct EvalFailure {
    std::size_t sequence{0};
    std::size_t event{0};
};

struct LoglikResult {
    std::optional<double> value;
    std::optional<EvalFailure> failure;

    bool ok() const { return value.has_value(); }
};

struct GradResult {
    std::optional<Gradients> grads;
    std::optional<EvalFailure> failure;

    bool ok() const { return grads.has_value(); }
};

// Per-sequence quantities that depend on (dataset, beta) only, shared by every
// likelihood/gradient evaluation during a fit.
struct SequenceCache {
    const EventSequence* seq{nullptr};
    std::vector<double> step_decay;      // e^{-beta (t_n - t_{n-1})}, [0] unused
    std::vector<double> tail_weight;     // (1 - e^{-beta (T - t_n)}) / beta
    std::vector<double> tail_weight_truncated; // truncated variant: upper time t_N, events 0..N-2
};

struct LikelihoodContext {
    const Dataset* data{nullptr};
    double beta{0.0};
    std::vector<SequenceCache> seqs;
};

LikelihoodContext make_context(const Dataset& dataset, double beta);

/// lambda-tilde_i(t): the unclipped linear intensity (may be negative).
double surrogate_intensity(const HawkesParams& params, const EventSequence& seq,
                           int type, double t);

struct FeasibilityReport {
    bool feasible{true};
    std::optional<EvalFailure> first_violation;
};

/// Feasible iff lambda-tilde_{u_n}(t_n) > tol at every event in every sequence.
FeasibilityReport check_feasible(const HawkesParams& params, const Dataset& dataset,
                                 double tol);

struct EvalOptions {
    double lambda1{0.0};
    bool truncated_compensator{false};
};

LoglikResult surrogate_loglik(const LikelihoodContext& ctx, const HawkesParams& params,
                              const EvalOptions& opts = {});
GradResult surrogate_grad(const LikelihoodContext& ctx, const HawkesParams& params,
                          const EvalOptions& opts = {});

/// Single fused pass; the gradient is well-defined (and returned) even at
/// infeasible points, where the loglik part reports the offending event.
struct Evaluation {
    LoglikResult loglik;
    Gradients grads;        // valid unless grad_singular
    bool grad_singular{false};
    EvalFailure singular_at;
};

Evaluation surrogate_eval(const LikelihoodContext& ctx, const HawkesParams& params,
                          const EvalOptions& opts = {});

/// Restart times, one per (event, process): the first time after t_n at which
/// process i's surrogate intensity is nonnegative again, capped at t_{n+1}.
struct RestartSchedule {
    // per sequence: (N x d), row n = restart times after event n
    std::vector<Eigen::MatrixXd> restart;
};

RestartSchedule restart_schedule(const HawkesParams& params, const EventSequence& seq);

LoglikResult restart_loglik(const LikelihoodContext& ctx, const HawkesParams& params,
                            const EvalOptions& opts = {});
GradResult restart_grad(const LikelihoodContext& ctx, const HawkesParams& params,
                        const EvalOptions& opts = {});

// Convenience overloads building a throwaway context.
LoglikResult surrogate_loglik(const HawkesParams& params, const Dataset& dataset,
                              double lambda1 = 0.0);
GradResult surrogate_grad(const HawkesParams& params, const Dataset& dataset,
                          double lambda1 = 0.0);
LoglikResult restart_loglik(const HawkesParams& params, const Dataset& dataset,
                            double lambda1 = 0.0);
GradResult restart_grad(const HawkesParams& params, const Dataset& dataset,
                        double lambda1 = 0.0);

}  // namespace hawkes
