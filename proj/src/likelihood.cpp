#include "hawkes/likelihood.hpp"

#include <cmath>

namespace hawkes {

namespace {

// History convention at ties: events earlier in the stored order count toward
// the intensity of later ones, even at equal times.
struct DecayedSums {
    Eigen::VectorXd d;  // D_k(n): per-source-type decayed counts just before event n

    explicit DecayedSums(int dim) : d(Eigen::VectorXd::Zero(dim)) {}

    void advance(double decay, int prev_mark) {
        if (prev_mark >= 0) d(prev_mark) += 1.0;
        d *= decay;
    }
};

}  // namespace

LikelihoodContext make_context(const Dataset& dataset, double beta) {
    LikelihoodContext ctx;
    ctx.data = &dataset;
    ctx.beta = beta;
    ctx.seqs.reserve(dataset.sequences.size());
    for (const auto& seq : dataset.sequences) {
        SequenceCache cache;
        cache.seq = &seq;
        const std::size_t n_events = seq.events.size();
        cache.step_decay.resize(n_events, 1.0);
        cache.tail_weight.resize(n_events, 0.0);
        cache.tail_weight_truncated.resize(n_events, 0.0);
        for (std::size_t n = 0; n < n_events; ++n) {
            const double t = seq.events[n].time;
            if (n > 0) {
                cache.step_decay[n] = std::exp(-beta * (t - seq.events[n - 1].time));
            }
            cache.tail_weight[n] = (1.0 - std::exp(-beta * (seq.horizon - t))) / beta;
            if (n + 1 < n_events) {
                const double t_last = seq.events.back().time;
                cache.tail_weight_truncated[n] = (1.0 - std::exp(-beta * (t_last - t))) / beta;
            }
        }
        ctx.seqs.push_back(std::move(cache));
    }
    return ctx;
}

double surrogate_intensity(const HawkesParams& params, const EventSequence& seq,
                           int type, double t) {
    double value = params.mu(type);
    for (const auto& ev : seq.events) {
        if (!(ev.time < t)) break;
        value += params.A(type, ev.mark) * std::exp(-params.beta * (t - ev.time));
    }
    return value;
}

FeasibilityReport check_feasible(const HawkesParams& params, const Dataset& dataset,
                                 double tol) {
    const auto ctx = make_context(dataset, params.beta);
    const int d = params.dim();
    for (std::size_t s = 0; s < ctx.seqs.size(); ++s) {
        const auto& cache = ctx.seqs[s];
        const auto& events = cache.seq->events;
        DecayedSums sums(d);
        int prev_mark = -1;
        for (std::size_t n = 0; n < events.size(); ++n) {
            sums.advance(cache.step_decay[n], prev_mark);
            const double lam = params.mu(events[n].mark) + params.A.row(events[n].mark).dot(sums.d);
            if (!(lam > tol)) {
                return {false, EvalFailure{s, n}};
            }
            prev_mark = events[n].mark;
        }
    }
    return {true, std::nullopt};
}

Evaluation surrogate_eval(const LikelihoodContext& ctx, const HawkesParams& params,
                          const EvalOptions& opts) {
    const int d = params.dim();
    Evaluation out;
    out.grads.d_mu = Eigen::VectorXd::Zero(d);
    out.grads.d_A = Eigen::MatrixXd::Zero(d, d);
    double ll = 0.0;
    bool tractable = true;

    for (std::size_t s = 0; s < ctx.seqs.size(); ++s) {
        const auto& cache = ctx.seqs[s];
        const auto& events = cache.seq->events;
        const double horizon = cache.seq->horizon;
        const auto& tail = opts.truncated_compensator ? cache.tail_weight_truncated : cache.tail_weight;

        Eigen::VectorXd source_tail = Eigen::VectorXd::Zero(d);  // S_k
        DecayedSums sums(d);
        int prev_mark = -1;
        for (std::size_t n = 0; n < events.size(); ++n) {
            sums.advance(cache.step_decay[n], prev_mark);
            const int mark = events[n].mark;
            const double lam = params.mu(mark) + params.A.row(mark).dot(sums.d);
            if (lam == 0.0) {
                out.grad_singular = true;
                out.singular_at = {s, n};
                return out;
            }
            if (lam > 0.0) {
                ll += std::log(lam);
            } else if (tractable) {
                tractable = false;
                out.loglik.failure = EvalFailure{s, n};
            }
            const double inv = 1.0 / lam;
            out.grads.d_mu(mark) += inv;
            out.grads.d_A.row(mark) += inv * sums.d.transpose();
            source_tail(mark) += tail[n];
            prev_mark = mark;
        }
        // compensator of the surrogate intensity over [0, T]
        const double mu_sum = params.mu.sum();
        ll -= horizon * mu_sum;
        ll -= (params.A * source_tail).sum();
        out.grads.d_mu.array() -= horizon;
        out.grads.d_A.rowwise() -= source_tail.transpose();
    }
    if (opts.lambda1 > 0.0) {
        ll -= opts.lambda1 * params.A.array().abs().sum();
        out.grads.d_A -= opts.lambda1 * params.A.array().sign().matrix();
    }
    if (tractable) out.loglik.value = ll;
    return out;
}

LoglikResult surrogate_loglik(const LikelihoodContext& ctx, const HawkesParams& params,
                              const EvalOptions& opts) {
    return surrogate_eval(ctx, params, opts).loglik;
}

GradResult surrogate_grad(const LikelihoodContext& ctx, const HawkesParams& params,
                          const EvalOptions& opts) {
    auto eval = surrogate_eval(ctx, params, opts);
    if (eval.grad_singular) return {std::nullopt, eval.singular_at};
    return {std::move(eval.grads), std::nullopt};
}

RestartSchedule restart_schedule(const HawkesParams& params, const EventSequence& seq) {
    const int d = params.dim();
    const double beta = params.beta;
    RestartSchedule schedule;
    Eigen::MatrixXd restart(static_cast<Eigen::Index>(seq.events.size()), d);
    Eigen::VectorXd excitation = Eigen::VectorXd::Zero(d);  // post-event decayed counts
    for (std::size_t n = 0; n < seq.events.size(); ++n) {
        const double t = seq.events[n].time;
        if (n > 0) excitation *= std::exp(-beta * (t - seq.events[n - 1].time));
        excitation(seq.events[n].mark) += 1.0;
        const double t_next = (n + 1 < seq.events.size()) ? seq.events[n + 1].time : seq.horizon;
        const Eigen::VectorXd post = params.A * excitation;  // S_i(t_n+)
        for (int i = 0; i < d; ++i) {
            const double mu = params.mu(i);
            double r;
            if (post(i) >= -mu) {
                r = t;
            } else if (mu == 0.0) {
                r = t_next;
            } else {
                r = std::min(t_next, t + std::log(-post(i) / mu) / beta);
            }
            restart(static_cast<Eigen::Index>(n), i) = r;
        }
    }
    schedule.restart.push_back(std::move(restart));
    return schedule;
}

namespace {

// Shared pass for the exact (re-start) likelihood and its fixed-schedule
// gradient. The compensator integrates the surrogate intensity only on
// [restart, next-event] segments, where it coincides with the clipped one.
struct RestartEval {
    LoglikResult loglik;
    Gradients grads;
    bool grad_singular{false};
    EvalFailure singular_at;
};

RestartEval restart_eval(const LikelihoodContext& ctx, const HawkesParams& params,
                         const EvalOptions& opts) {
    const int d = params.dim();
    const double beta = params.beta;
    RestartEval out;
    out.grads.d_mu = Eigen::VectorXd::Zero(d);
    out.grads.d_A = Eigen::MatrixXd::Zero(d, d);
    double ll = 0.0;
    bool tractable = true;

    for (std::size_t s = 0; s < ctx.seqs.size(); ++s) {
        const auto& cache = ctx.seqs[s];
        const auto& events = cache.seq->events;
        const double horizon = cache.seq->horizon;

        const double t_first = events.empty() ? horizon : events.front().time;
        ll -= t_first * params.mu.sum();
        out.grads.d_mu.array() -= t_first;

        DecayedSums sums(d);
        int prev_mark = -1;
        for (std::size_t n = 0; n < events.size(); ++n) {
            sums.advance(cache.step_decay[n], prev_mark);
            const int mark = events[n].mark;
            const double t = events[n].time;
            const double lam = params.mu(mark) + params.A.row(mark).dot(sums.d);
            if (lam == 0.0) {
                out.grad_singular = true;
                out.singular_at = {s, n};
                return out;
            }
            if (lam > 0.0) {
                ll += std::log(lam);
            } else if (tractable) {
                tractable = false;
                out.loglik.failure = EvalFailure{s, n};
            }
            const double inv = 1.0 / lam;
            out.grads.d_mu(mark) += inv;
            out.grads.d_A.row(mark) += inv * sums.d.transpose();
            prev_mark = mark;

            // compensator segment after this event
            const Eigen::VectorXd post = sums.d + Eigen::VectorXd::Unit(d, mark);
            const Eigen::VectorXd excite = params.A * post;  // S_i(t_n+)
            const double t_next = (n + 1 < events.size()) ? events[n + 1].time : horizon;
            const double decay_next = std::exp(-beta * (t_next - t));
            for (int i = 0; i < d; ++i) {
                const double mu = params.mu(i);
                double r;
                if (excite(i) >= -mu) {
                    r = t;
                } else if (mu == 0.0) {
                    r = t_next;
                } else {
                    r = std::min(t_next, t + std::log(-excite(i) / mu) / beta);
                }
                const double decay_r = std::exp(-beta * (r - t));
                const double kernel_mass = (decay_r - decay_next) / beta;
                ll -= mu * (t_next - r) + excite(i) * kernel_mass;
                out.grads.d_mu(i) -= (t_next - r);
                out.grads.d_A.row(i) -= kernel_mass * post.transpose();
            }
        }
    }
    if (opts.lambda1 > 0.0) {
        ll -= opts.lambda1 * params.A.array().abs().sum();
        out.grads.d_A -= opts.lambda1 * params.A.array().sign().matrix();
    }
    if (tractable) out.loglik.value = ll;
    return out;
}

}  // namespace

LoglikResult restart_loglik(const LikelihoodContext& ctx, const HawkesParams& params,
                            const EvalOptions& opts) {
    return restart_eval(ctx, params, opts).loglik;
}

GradResult restart_grad(const LikelihoodContext& ctx, const HawkesParams& params,
                        const EvalOptions& opts) {
    auto eval = restart_eval(ctx, params, opts);
    if (eval.grad_singular) return {std::nullopt, eval.singular_at};
    if (!eval.loglik.ok()) return {std::nullopt, eval.loglik.failure};
    return {std::move(eval.grads), std::nullopt};
}

LoglikResult surrogate_loglik(const HawkesParams& params, const Dataset& dataset, double lambda1) {
    return surrogate_loglik(make_context(dataset, params.beta), params, {lambda1, false});
}

GradResult surrogate_grad(const HawkesParams& params, const Dataset& dataset, double lambda1) {
    return surrogate_grad(make_context(dataset, params.beta), params, {lambda1, false});
}

LoglikResult restart_loglik(const HawkesParams& params, const Dataset& dataset, double lambda1) {
    return restart_loglik(make_context(dataset, params.beta), params, {lambda1, false});
}

GradResult restart_grad(const HawkesParams& params, const Dataset& dataset, double lambda1) {
    return restart_grad(make_context(dataset, params.beta), params, {lambda1, false});
}

}  // namespace hawkes
