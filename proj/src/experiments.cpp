#include "hawkes/experiments.hpp"

#include "hawkes/io.hpp"
#include "hawkes/likelihood.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hawkes {

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double sample_stddev(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

void ExperimentPlan::validate() const {
    static const std::vector<std::string> kinds{"consistency", "beta_grid", "baselines",
                                                "runtime"};
    if (std::find(kinds.begin(), kinds.end(), experiment) == kinds.end()) {
        throw std::invalid_argument("unknown experiment id: " + experiment);
    }
    if (trials < 1) throw std::invalid_argument("experiment plan: trials must be >= 1");
    if (d < 1) throw std::invalid_argument("experiment plan: d must be >= 1");
    if (horizons.empty()) throw std::invalid_argument("experiment plan: horizons required");
    for (double h : horizons) {
        if (!(h > 0.0)) throw std::invalid_argument("experiment plan: horizons must be positive");
    }
    for (int n : sequence_counts) {
        if (n < 1) throw std::invalid_argument("experiment plan: sequence counts must be >= 1");
    }
    if (!(beta > 0.0)) throw std::invalid_argument("experiment plan: beta must be positive");
    if (experiment == "beta_grid" && beta_grid.empty()) {
        throw std::invalid_argument("experiment plan: beta_grid experiment needs a beta grid");
    }
    if (experiment == "runtime") {
        if (d_values.empty()) throw std::invalid_argument("experiment plan: d_values required");
        if (evals < 1) throw std::invalid_argument("experiment plan: evals must be >= 1");
    }
}

ExperimentPlan ExperimentPlan::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    ExperimentPlan plan;
    try {
        plan.experiment = j.at("experiment").get<std::string>();
        plan.d = j.value("d", plan.d);
        if (j.contains("horizons")) plan.horizons = j["horizons"].get<std::vector<double>>();
        if (j.contains("sequence_counts")) {
            plan.sequence_counts = j["sequence_counts"].get<std::vector<int>>();
        }
        plan.trials = j.value("trials", plan.trials);
        plan.seed = j.value("seed", plan.seed);
        plan.beta = j.value("beta", plan.beta);
        plan.neg_fraction = j.value("neg_fraction", plan.neg_fraction);
        if (j.contains("beta_grid")) plan.beta_grid = j["beta_grid"].get<std::vector<double>>();
        if (j.contains("d_values")) plan.d_values = j["d_values"].get<std::vector<int>>();
        plan.evals = j.value("evals", plan.evals);
        if (j.contains("fit")) {
            const auto& f = j["fit"];
            plan.fit.gamma1 = f.value("gamma1", plan.fit.gamma1);
            plan.fit.gamma2 = f.value("gamma2", plan.fit.gamma2);
            plan.fit.gamma0 = f.value("gamma0", plan.fit.gamma0);
            plan.fit.p_select = f.value("p_select", plan.fit.p_select);
            plan.fit.lambda1 = f.value("lambda1", plan.fit.lambda1);
            plan.fit.phase1_iters = f.value("phase1_iters", plan.fit.phase1_iters);
            plan.fit.phase1_halve_every =
                f.value("phase1_halve_every", plan.fit.phase1_halve_every);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    plan.validate();
    return plan;
}

namespace {

using Clock = std::chrono::steady_clock;

// shared across configs so that, e.g., the horizons of a consistency sweep are
// fit against the same per-trial ground truth (paired comparisons)
std::uint64_t trial_seed(const ExperimentPlan& plan, int trial) {
    return mix64(plan.seed ^ 0xC0DE0000ULL) ^ mix64(static_cast<std::uint64_t>(trial) + 1);
}

struct MethodFit {
    std::string name;
    std::function<FitResult(const Dataset&, double, const FitConfig&)> fit;
};

TrialRecord score_fit(const std::string& config, const std::string& method, int trial,
                      const SyntheticProblem& problem, std::function<FitResult()> fit,
                      double beta_true, std::function<double(const FitResult&)> beta_of) {
    TrialRecord rec;
    rec.config = config;
    rec.method = method;
    rec.trial = trial;
    const auto t0 = Clock::now();
    try {
        const FitResult result = fit();
        rec.fit_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        rec.metrics = metrics(problem.truth.A, result.params_hat.A, problem.truth.mu,
                              result.params_hat.mu, beta_true, beta_of(result));
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.fit_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        rec.error = e.what();
    }
    return rec;
}

// run tasks on `workers` threads; results land at their task's index
template <typename Task>
std::vector<std::vector<TrialRecord>> run_pool(const std::vector<Task>& tasks, int workers) {
    std::vector<std::vector<TrialRecord>> results(tasks.size());
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            results[i] = tasks[i]();
        }
    };
    std::vector<std::thread> threads;
    const int n = std::min<int>(workers, static_cast<int>(tasks.size()));
    threads.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return results;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<const TrialRecord*>> groups;
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& rec : records) {
        auto key = std::make_pair(rec.config, rec.method);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&rec);
    }
    std::vector<SummaryRow> rows;
    for (const auto& key : order) {
        SummaryRow row;
        row.config = key.first;
        row.method = key.second;
        std::vector<double> a, mu, be, hd, shd, ms;
        for (const auto* rec : groups[key]) {
            if (!rec->ok) {
                ++row.trials_failed;
                continue;
            }
            ++row.trials_ok;
            a.push_back(rec->metrics.a_err);
            mu.push_back(rec->metrics.mu_err);
            be.push_back(rec->metrics.beta_err);
            hd.push_back(rec->metrics.hd);
            shd.push_back(static_cast<double>(rec->metrics.shd));
            ms.push_back(rec->fit_ms);
        }
        if (row.trials_ok > 0) {
            row.a_err_median = median(a);
            row.a_err_std = sample_stddev(a);
            row.mu_err_median = median(mu);
            row.mu_err_std = sample_stddev(mu);
            row.beta_err_median = median(be);
            row.beta_err_std = sample_stddev(be);
            row.hd_median = median(hd);
            row.hd_std = sample_stddev(hd);
            row.shd_median = median(shd);
            row.shd_std = sample_stddev(shd);
            row.fit_ms_median = median(ms);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ExperimentResult run_runtime(const ExperimentPlan& plan) {
    ExperimentResult out;
    std::size_t cfg = 0;
    for (int d : plan.d_values) {
        for (double horizon : plan.horizons) {
            GenConfig gc;
            gc.d = d;
            gc.horizon = horizon;
            gc.n_sequences = 1;
            gc.neg_fraction = plan.neg_fraction;
            gc.beta = plan.beta;
            gc.seed = trial_seed(plan, static_cast<int>(cfg++));
            const auto problem = generate_synthetic_problem(gc);
            const auto ctx = make_context(problem.dataset, plan.beta);

            auto time_mean = [&](auto&& call) {
                call();  // warm-up
                const auto t0 = Clock::now();
                for (int k = 0; k < plan.evals; ++k) call();
                return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() /
                       plan.evals;
            };
            RuntimeRow row;
            row.d = d;
            row.horizon = horizon;
            row.surrogate_mean_ms =
                time_mean([&] { (void)surrogate_grad(ctx, problem.truth); });
            row.restart_mean_ms = time_mean([&] { (void)restart_grad(ctx, problem.truth); });
            out.runtime.push_back(row);
        }
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan, int workers) {
    plan.validate();
    if (plan.experiment == "runtime") return run_runtime(plan);

    struct Config {
        std::string label;
        GenConfig gen;
    };
    std::vector<Config> configs;
    for (double horizon : plan.horizons) {
        for (int n : plan.sequence_counts) {
            GenConfig gc;
            gc.d = plan.d;
            gc.horizon = horizon;
            gc.n_sequences = n;
            gc.neg_fraction = plan.neg_fraction;
            gc.beta = plan.beta;
            std::ostringstream label;
            label << "d=" << plan.d << ",T=" << horizon << ",n=" << n;
            configs.push_back({label.str(), gc});
        }
    }

    std::vector<std::function<std::vector<TrialRecord>()>> tasks;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        for (int trial = 0; trial < plan.trials; ++trial) {
            tasks.emplace_back([&plan, &configs, c, trial] {
                const auto& config = configs[c];
                std::vector<TrialRecord> recs;
                GenConfig gc = config.gen;
                gc.seed = trial_seed(plan, trial);
                SyntheticProblem problem;
                try {
                    problem = generate_synthetic_problem(gc);
                } catch (const std::exception& e) {
                    TrialRecord rec;
                    rec.config = config.label;
                    rec.method = "generate";
                    rec.trial = trial;
                    rec.error = e.what();
                    recs.push_back(std::move(rec));
                    return recs;
                }
                FitConfig fc = plan.fit;
                fc.seed = mix64(gc.seed ^ 0xF17F17ULL);
                const double beta_true = plan.beta;

                if (plan.experiment == "consistency") {
                    recs.push_back(score_fit(
                        config.label, "two_phase", trial, problem,
                        [&] { return fit_two_phase(problem.dataset, beta_true, fc); }, beta_true,
                        [&](const FitResult&) { return beta_true; }));
                } else if (plan.experiment == "baselines") {
                    const std::vector<MethodFit> methods{
                        {"two_phase", fit_two_phase},
                        {"restart_sgd", fit_restart_sgd},
                        {"vanilla_gd", fit_vanilla_gd},
                        {"early_stopped_gd", fit_early_stopped_gd},
                    };
                    for (const auto& m : methods) {
                        recs.push_back(score_fit(
                            config.label, m.name, trial, problem,
                            [&] { return m.fit(problem.dataset, beta_true, fc); }, beta_true,
                            [&](const FitResult&) { return beta_true; }));
                    }
                } else {  // beta_grid
                    for (double b : plan.beta_grid) {
                        std::ostringstream name;
                        name << "beta=" << b;
                        recs.push_back(score_fit(
                            config.label, name.str(), trial, problem,
                            [&] { return fit_two_phase(problem.dataset, b, fc); }, beta_true,
                            [&](const FitResult&) { return b; }));
                    }
                    recs.push_back(score_fit(
                        config.label, "selected", trial, problem,
                        [&] {
                            auto gs = grid_search(problem.dataset, plan.beta_grid,
                                                  {fc.lambda1}, {fc.gamma1}, fc);
                            gs.fit.params_hat.beta = gs.best.beta;
                            return gs.fit;
                        },
                        beta_true, [&](const FitResult& r) { return r.params_hat.beta; }));
                }
                return recs;
            });
        }
    }

    ExperimentResult out;
    for (auto& group : run_pool(tasks, workers)) {
        for (auto& rec : group) out.records.push_back(std::move(rec));
    }
    out.summary = summarize(out.records);
    return out;
}

std::string ExperimentResult::records_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "config,method,trial,ok,beta_err,mu_err,a_err,hd_raw,hd,shd,threshold,fit_ms,error\n";
    for (const auto& r : records) {
        os << r.config << ',' << r.method << ',' << r.trial << ',' << (r.ok ? 1 : 0) << ','
           << r.metrics.beta_err << ',' << r.metrics.mu_err << ',' << r.metrics.a_err << ','
           << r.metrics.hd_raw << ',' << r.metrics.hd << ',' << r.metrics.shd << ','
           << r.metrics.threshold << ',' << r.fit_ms << ',' << r.error << '\n';
    }
    return os.str();
}

std::string ExperimentResult::summary_csv() const {
    std::ostringstream os;
    os.precision(12);
    if (!runtime.empty()) {
        os << "d,T,surrogate_mean_ms,restart_mean_ms\n";
        for (const auto& r : runtime) {
            os << r.d << ',' << r.horizon << ',' << r.surrogate_mean_ms << ','
               << r.restart_mean_ms << '\n';
        }
        return os.str();
    }
    os << "config,method,trials_ok,trials_failed,a_err_median,a_err_std,mu_err_median,"
          "mu_err_std,beta_err_median,beta_err_std,hd_median,hd_std,shd_median,shd_std,"
          "fit_ms_median\n";
    for (const auto& r : summary) {
        os << r.config << ',' << r.method << ',' << r.trials_ok << ',' << r.trials_failed << ','
           << r.a_err_median << ',' << r.a_err_std << ',' << r.mu_err_median << ','
           << r.mu_err_std << ',' << r.beta_err_median << ',' << r.beta_err_std << ','
           << r.hd_median << ',' << r.hd_std << ',' << r.shd_median << ',' << r.shd_std << ','
           << r.fit_ms_median << '\n';
    }
    return os.str();
}

std::string ExperimentResult::summary_json() const {
    nlohmann::json j;
    if (!runtime.empty()) {
        j["runtime"] = nlohmann::json::array();
        for (const auto& r : runtime) {
            j["runtime"].push_back({{"d", r.d},
                                    {"T", r.horizon},
                                    {"surrogate_mean_ms", r.surrogate_mean_ms},
                                    {"restart_mean_ms", r.restart_mean_ms}});
        }
        return j.dump(2);
    }
    j["summary"] = nlohmann::json::array();
    for (const auto& r : summary) {
        j["summary"].push_back({{"config", r.config},
                                {"method", r.method},
                                {"trials_ok", r.trials_ok},
                                {"trials_failed", r.trials_failed},
                                {"a_err_median", r.a_err_median},
                                {"a_err_std", r.a_err_std},
                                {"mu_err_median", r.mu_err_median},
                                {"mu_err_std", r.mu_err_std},
                                {"beta_err_median", r.beta_err_median},
                                {"beta_err_std", r.beta_err_std},
                                {"hd_median", r.hd_median},
                                {"hd_std", r.hd_std},
                                {"shd_median", r.shd_median},
                                {"shd_std", r.shd_std},
                                {"fit_ms_median", r.fit_ms_median}});
    }
    return j.dump(2);
}

}  // namespace hawkes
