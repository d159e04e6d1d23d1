#include "hawkes/estimate.hpp"

#include "hawkes/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hawkes {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool finite(const HawkesParams& p) {
    return p.mu.allFinite() && p.A.allFinite();
}

bool finite(const Gradients& g) {
    return g.d_mu.allFinite() && g.d_A.allFinite();
}

HawkesParams init_params(int d, double beta, const FitConfig& config) {
    auto rng = make_stream(config.seed, 0x696e6974ULL);
    std::uniform_real_distribution<double> unif(config.mu_init_range.first,
                                                config.mu_init_range.second);
    HawkesParams p;
    p.beta = beta;
    p.mu.resize(d);
    for (int i = 0; i < d; ++i) p.mu(i) = unif(rng);
    p.A = Eigen::MatrixXd::Zero(d, d);
    return p;
}

std::vector<double> row_norms_of(const Eigen::MatrixXd& m) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m.row(i).norm();
    return out;
}

// Gradient restricted to one process: the A-row and the matching mu entry.
struct RowEval {
    Eigen::VectorXd grad_row;
    double grad_mu{0.0};
    bool singular{false};
};

RowEval eval_row(const LikelihoodContext& ctx, const HawkesParams& params, int row,
                 double lambda1) {
    const int d = params.dim();
    RowEval out;
    out.grad_row = Eigen::VectorXd::Zero(d);
    for (const auto& cache : ctx.seqs) {
        const auto& events = cache.seq->events;
        Eigen::VectorXd decayed = Eigen::VectorXd::Zero(d);
        Eigen::VectorXd source_tail = Eigen::VectorXd::Zero(d);
        int prev_mark = -1;
        for (std::size_t n = 0; n < events.size(); ++n) {
            if (prev_mark >= 0) decayed(prev_mark) += 1.0;
            decayed *= cache.step_decay[n];
            const int mark = events[n].mark;
            if (mark == row) {
                const double lam = params.mu(row) + params.A.row(row).dot(decayed);
                // lam <= 0 means this point is outside the feasible region (the
                // loglik is intractable there), so the caller must reject it
                if (lam <= 0.0) {
                    out.singular = true;
                    return out;
                }
                const double inv = 1.0 / lam;
                out.grad_mu += inv;
                out.grad_row += inv * decayed;
            }
            source_tail(mark) += cache.tail_weight[n];
            prev_mark = mark;
        }
        out.grad_row -= source_tail;
        out.grad_mu -= cache.seq->horizon;
    }
    if (lambda1 > 0.0) {
        out.grad_row -= lambda1 * params.A.row(row).transpose().array().sign().matrix();
    }
    return out;
}

}  // namespace

std::pair<HawkesParams, std::vector<TraceRecord>> phase1_pgd(
    const LikelihoodContext& ctx, double beta, const FitConfig& config) {
    config.validate();
    const int d = ctx.data->d;
    HawkesParams params = init_params(d, beta, config);
    std::vector<TraceRecord> trace;
    const auto start = Clock::now();
    const EvalOptions opts{config.lambda1, config.truncated_compensator};
    int extra_halvings = 0;
    HawkesParams prev = params;

    for (int it = 1; it <= config.phase1_iters; ++it) {
        const auto eval = surrogate_eval(ctx, params, opts);
        if (eval.grad_singular || !finite(eval.grads)) {
            if (it == 1) {  // infeasible before any step was taken: nothing to revert
                trace.push_back({it, "phase1", 0.0, 0.0, 0.0, {}, std::nullopt,
                                 "gradient singular; stopping", ms_since(start)});
                break;
            }
            // the last clipped step left the feasible region (typically a
            // background rate pinned at 0 with no excitation at an event of
            // that type); undo it and retry with a halved step
            params = prev;
            ++extra_halvings;
            trace.push_back({it, "phase1", 0.0, 0.0, 0.0, {}, std::nullopt,
                             "infeasible step reverted", ms_since(start)});
            continue;
        }
        const double mu_norm = eval.grads.d_mu.norm();
        const double a_norm = eval.grads.d_A.norm();
        const int halvings = (it - 1) / config.phase1_halve_every + extra_halvings;
        const double gamma = config.gamma1 * std::ldexp(1.0, -halvings);
        trace.push_back({it, "phase1", gamma, mu_norm, a_norm,
                         row_norms_of(eval.grads.d_A), eval.loglik.value, "",
                         ms_since(start)});
        if (mu_norm == 0.0 && a_norm == 0.0) break;  // converged

        HawkesParams next = params;
        if (mu_norm > 0.0) next.mu = (params.mu + (gamma / mu_norm) * eval.grads.d_mu).cwiseMax(0.0);
        if (a_norm > 0.0) next.A = (params.A + (gamma / a_norm) * eval.grads.d_A).cwiseMax(0.0);
        if (!finite(next)) {
            ++extra_halvings;  // divergence guard: revert and shrink
            trace.back().note = "non-finite step reverted";
            continue;
        }
        prev = params;
        params = std::move(next);
    }
    return {std::move(params), std::move(trace)};
}

RowSelection select_rows(const Gradients& grads, double p_select) {
    const int d = static_cast<int>(grads.d_A.rows());
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> sq(static_cast<std::size_t>(d));
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
        sq[static_cast<std::size_t>(i)] = grads.d_A.row(i).squaredNorm();
        total += sq[static_cast<std::size_t>(i)];
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = sq[static_cast<std::size_t>(a)];
        const double sb = sq[static_cast<std::size_t>(b)];
        return sa != sb ? sa > sb : a < b;
    });
    RowSelection sel;
    sel.indices = order;
    if (total == 0.0) return sel;  // all-zero gradient: d-tilde = 0
    double cum = 0.0;
    for (int k = 0; k < d; ++k) {
        cum += sq[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        if (cum >= p_select * total) {
            sel.count = k + 1;
            break;
        }
    }
    if (sel.count == 0) sel.count = d;  // numeric slack at p = 1
    return sel;
}

// Minimum relative gradient-norm improvement for a phase-2 step to count as
// progress. Rows whose surrogate objective is nearly linear (few or no
// own-type events) otherwise drift arbitrarily far along an almost-constant
// gradient before the step budget runs out.
#ifndef HAWKES_PHASE2_MIN_REL_IMPROVE
#define HAWKES_PHASE2_MIN_REL_IMPROVE 1e-3
#endif
constexpr double kMinRelImprove = HAWKES_PHASE2_MIN_REL_IMPROVE;

FitResult phase2_bcd(const LikelihoodContext& ctx, double beta, const FitConfig& config,
                     HawkesParams params, std::vector<TraceRecord> trace,
                     double end_phase1_loglik) {
    const auto start = Clock::now();
    const auto grad_at_phase1 = surrogate_eval(ctx, params, {config.lambda1, config.truncated_compensator});
    FitResult result;
    result.end_phase1_loglik = end_phase1_loglik;

    if (grad_at_phase1.grad_singular) {
        result.params_hat = std::move(params);
        result.trace = std::move(trace);
        return result;
    }
    const auto selection = select_rows(grad_at_phase1.grads, config.p_select);
    result.selected_rows.assign(selection.indices.begin(),
                                selection.indices.begin() + selection.count);

    int iter = trace.empty() ? 0 : trace.back().iter;
    for (int row : result.selected_rows) {
        // unconstrained ascent on the A-row
        auto cur = eval_row(ctx, params, row, config.lambda1);
        double gamma = config.gamma2;
        for (int it = 0; gamma > config.gamma0 && it < config.phase2_max_iters_per_row; ++it) {
            if (cur.singular || !cur.grad_row.allFinite()) break;
            const double norm = cur.grad_row.norm();
            if (norm == 0.0) break;
            HawkesParams probe = params;
            probe.A.row(row) = params.A.row(row) + (gamma / norm) * cur.grad_row.transpose();
            auto next = eval_row(ctx, probe, row, config.lambda1);
            const bool reject = next.singular || !next.grad_row.allFinite() ||
                                next.grad_row.norm() >= norm * (1.0 - kMinRelImprove);
            trace.push_back({++iter, "phase2-A", gamma, 0.0, norm, {}, std::nullopt,
                             "row " + std::to_string(row) + (reject ? " rejected" : ""),
                             ms_since(start)});
            if (reject) {
                gamma /= 2.0;
            } else {
                params = std::move(probe);
                cur = std::move(next);
            }
        }
        // projected ascent on the matching background rate
        cur = eval_row(ctx, params, row, config.lambda1);
        gamma = config.gamma2;
        if (params.mu(row) <= 0.0) {
            trace.push_back({++iter, "phase2-mu", gamma, 0.0, 0.0, {}, std::nullopt,
                             "row " + std::to_string(row) + " skipped: mu is zero",
                             ms_since(start)});
        }
        for (int it = 0;
             gamma > config.gamma0 && params.mu(row) > 0.0 && it < config.phase2_max_iters_per_row;
             ++it) {
            if (cur.singular || !std::isfinite(cur.grad_mu)) break;
            const double norm = std::abs(cur.grad_mu);
            if (norm == 0.0) break;
            HawkesParams probe = params;
            probe.mu(row) = std::max(0.0, params.mu(row) + gamma * (cur.grad_mu > 0 ? 1.0 : -1.0));
            auto next = eval_row(ctx, probe, row, config.lambda1);
            const bool reject = next.singular || !std::isfinite(next.grad_mu) ||
                                std::abs(next.grad_mu) >= norm * (1.0 - kMinRelImprove);
            trace.push_back({++iter, "phase2-mu", gamma, norm, 0.0, {}, std::nullopt,
                             "row " + std::to_string(row) + (reject ? " rejected" : ""),
                             ms_since(start)});
            if (reject) {
                gamma /= 2.0;
            } else {
                params = std::move(probe);
                cur = std::move(next);
            }
        }
    }
    result.params_hat = std::move(params);
    result.trace = std::move(trace);
    return result;
}

FitResult fit_two_phase(const Dataset& dataset, double beta, const FitConfig& config) {
    const auto ctx = make_context(dataset, beta);
    auto [params, trace] = phase1_pgd(ctx, beta, config);
    const auto end_ll = surrogate_loglik(ctx, params, {config.lambda1, config.truncated_compensator});
    const double score = end_ll.ok() ? *end_ll.value : -std::numeric_limits<double>::infinity();
    return phase2_bcd(ctx, beta, config, std::move(params), std::move(trace), score);
}

namespace {

FitResult fit_joint_gd(const Dataset& dataset, double beta, const FitConfig& config,
                       bool early_stopped) {
    config.validate();
    const auto ctx = make_context(dataset, beta);
    HawkesParams params = init_params(dataset.d, beta, config);
    FitResult result;
    const auto start = Clock::now();
    const EvalOptions opts{config.lambda1, config.truncated_compensator};

    double gamma = config.gamma1;
    auto cur = surrogate_eval(ctx, params, opts);
    int iter = 0;
    while (iter < config.phase1_iters) {
        ++iter;
        if (cur.grad_singular || !finite(cur.grads)) {
            result.trace.push_back({iter, "gd", gamma, 0.0, 0.0, {}, std::nullopt,
                                    "divergence: gradient not usable", ms_since(start)});
            break;
        }
        const double norm = std::sqrt(cur.grads.d_mu.squaredNorm() + cur.grads.d_A.squaredNorm());
        if (norm == 0.0) break;
        HawkesParams probe = params;
        probe.mu = params.mu + (gamma / norm) * cur.grads.d_mu;
        probe.A = params.A + (gamma / norm) * cur.grads.d_A;
        if (!finite(probe)) {
            result.trace.push_back({iter, "gd", gamma, cur.grads.d_mu.norm(), cur.grads.d_A.norm(),
                                    {}, cur.loglik.value, "divergence: non-finite iterate",
                                    ms_since(start)});
            gamma /= 2.0;
            if (early_stopped && gamma <= config.gamma0) break;
            continue;
        }
        auto next = surrogate_eval(ctx, probe, opts);
        const double next_norm =
            (next.grad_singular || !finite(next.grads))
                ? std::numeric_limits<double>::infinity()
                : std::sqrt(next.grads.d_mu.squaredNorm() + next.grads.d_A.squaredNorm());
        bool reject = false;
        if (early_stopped && next_norm >= norm) {
            reject = true;
            gamma /= 2.0;
        }
        result.trace.push_back({iter, "gd", gamma, cur.grads.d_mu.norm(), cur.grads.d_A.norm(),
                                {}, cur.loglik.value, reject ? "rejected" : "", ms_since(start)});
        if (!reject) {
            params = std::move(probe);
            cur = std::move(next);
        }
        if (early_stopped && gamma <= config.gamma0) break;
    }
    result.params_hat = std::move(params);
    const auto ll = surrogate_loglik(ctx, result.params_hat, opts);
    result.end_phase1_loglik = ll.ok() ? *ll.value : -std::numeric_limits<double>::infinity();
    return result;
}

}  // namespace

FitResult fit_vanilla_gd(const Dataset& dataset, double beta, const FitConfig& config) {
    return fit_joint_gd(dataset, beta, config, false);
}

FitResult fit_early_stopped_gd(const Dataset& dataset, double beta, const FitConfig& config) {
    return fit_joint_gd(dataset, beta, config, true);
}

FitResult fit_restart_sgd(const Dataset& dataset, double beta, const FitConfig& config) {
    config.validate();
    HawkesParams params = init_params(dataset.d, beta, config);
    FitResult result;
    const auto start = Clock::now();
    const EvalOptions opts{config.lambda1, config.truncated_compensator};

    // one single-sequence context per sequence, so each SGD step touches one
    std::vector<Dataset> singles;
    std::vector<LikelihoodContext> ctxs;
    singles.reserve(dataset.sequences.size());
    for (const auto& seq : dataset.sequences) {
        Dataset one{dataset.d, dataset.type_names, {seq}};
        singles.push_back(std::move(one));
    }
    ctxs.reserve(singles.size());
    for (const auto& one : singles) ctxs.push_back(make_context(one, beta));

    auto rng = make_stream(config.seed, 0x73676400ULL);
    std::vector<std::size_t> order(singles.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    double gamma = config.gamma1;
    int iter = 0;
    const int max_steps = config.phase1_iters * std::max<int>(1, static_cast<int>(singles.size()));
    while (gamma > config.gamma0 && iter < max_steps) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            if (gamma <= config.gamma0 || iter >= max_steps) break;
            ++iter;
            auto cur = restart_grad(ctxs[idx], params, opts);
            if (!cur.ok()) {  // infeasible probe: shrink and move on
                gamma /= 2.0;
                result.trace.push_back({iter, "sgd", gamma, 0.0, 0.0, {}, std::nullopt,
                                        "infeasible at sequence " + std::to_string(idx),
                                        ms_since(start)});
                continue;
            }
            const double norm =
                std::sqrt(cur.grads->d_mu.squaredNorm() + cur.grads->d_A.squaredNorm());
            if (norm == 0.0 || !finite(*cur.grads)) break;
            HawkesParams probe = params;
            probe.mu = params.mu + (gamma / norm) * cur.grads->d_mu;
            probe.A = params.A + (gamma / norm) * cur.grads->d_A;
            GradResult next;
            if (finite(probe)) next = restart_grad(ctxs[idx], probe, opts);
            bool reject = true;
            if (next.ok() && finite(*next.grads)) {
                const double next_norm =
                    std::sqrt(next.grads->d_mu.squaredNorm() + next.grads->d_A.squaredNorm());
                reject = next_norm >= norm;
            }
            result.trace.push_back({iter, "sgd", gamma, cur.grads->d_mu.norm(),
                                    cur.grads->d_A.norm(), {}, std::nullopt,
                                    reject ? "rejected" : "", ms_since(start)});
            if (reject) {
                gamma /= 2.0;
            } else {
                params = std::move(probe);
            }
        }
    }
    result.params_hat = std::move(params);
    const auto ll = restart_loglik(result.params_hat, dataset, config.lambda1);
    result.end_phase1_loglik = ll.ok() ? *ll.value : -std::numeric_limits<double>::infinity();
    return result;
}

GridSearchResult grid_search(const Dataset& dataset, const std::vector<double>& beta_grid,
                             const std::vector<double>& lambda1_grid,
                             const std::vector<double>& gamma1_grid, const FitConfig& config) {
    if (beta_grid.empty() || lambda1_grid.empty() || gamma1_grid.empty()) {
        throw std::invalid_argument("grid_search: all grids must be nonempty");
    }
    GridSearchResult out;
    out.best.end_phase1_loglik = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    for (double beta : beta_grid) {
        const auto ctx = make_context(dataset, beta);
        for (double lambda1 : lambda1_grid) {
            for (double gamma1 : gamma1_grid) {
                FitConfig local = config;
                local.lambda1 = lambda1;
                local.gamma1 = gamma1;
                GridPoint point{beta, lambda1, gamma1,
                                -std::numeric_limits<double>::infinity()};
                try {
                    auto [params, trace] = phase1_pgd(ctx, beta, local);
                    // goodness-of-fit score: unpenalized end-of-phase-1 loglik
                    const auto ll = surrogate_loglik(ctx, params, {0.0, local.truncated_compensator});
                    if (ll.ok() && std::isfinite(*ll.value)) point.end_phase1_loglik = *ll.value;
                } catch (const std::exception&) {
                    // diverged grid point: keep -inf and continue
                }
                out.table.push_back(point);
                if (!have_best || point.end_phase1_loglik > out.best.end_phase1_loglik) {
                    out.best = point;
                    have_best = true;
                }
            }
        }
    }
    FitConfig winner = config;
    winner.lambda1 = out.best.lambda1;
    winner.gamma1 = out.best.gamma1;
    out.fit = fit_two_phase(dataset, out.best.beta, winner);
    return out;
}

std::string FitResult::trace_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "iter,phase,step,grad_mu_norm,grad_A_fro,loglik,note,wall_ms\n";
    for (const auto& rec : trace) {
        os << rec.iter << ',' << rec.phase << ',' << rec.step << ',' << rec.grad_mu_norm << ','
           << rec.grad_a_fro << ',';
        if (rec.loglik) {
            os << *rec.loglik;
        } else {
            os << "intractable";
        }
        os << ',' << rec.note << ',' << rec.wall_ms << '\n';
    }
    return os.str();
}

}  // namespace hawkes
