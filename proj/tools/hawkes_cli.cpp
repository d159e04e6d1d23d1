#include "hawkes/chains.hpp"
#include "hawkes/estimate.hpp"
#include "hawkes/experiments.hpp"
#include "hawkes/graph.hpp"
#include "hawkes/ingest.hpp"
#include "hawkes/io.hpp"
#include "hawkes/likelihood.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/validate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
namespace fs = std::filesystem;

// exit codes: 0 success, 1 usage, 2 data, 3 numerical failure
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    bool force{false};
    bool no_manifest_times{false};
};

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& content, const Common& common) {
    if (!common.force && fs::exists(path)) {
        throw UsageError("refusing to overwrite " + path.string() + " (use --force)");
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + path.string());
        out << content;
    }
    fs::rename(tmp, path);
}

struct Manifest {
    std::string subcommand;
    json config = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed{0};
    std::string started;

    void write(const fs::path& next_to, const Common& common) const {
        json j{{"subcommand", subcommand}, {"config", config},    {"inputs", inputs},
               {"outputs", outputs},       {"seed", seed},        {"version", kVersion}};
        if (!common.no_manifest_times) {
            j["started"] = started;
            j["finished"] = iso_now();
        }
        const fs::path path = next_to.string() + ".manifest.json";
        if (!common.force && fs::exists(path)) {
            throw UsageError("refusing to overwrite " + path.string() + " (use --force)");
        }
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot write " + path.string());
            out << j.dump(2) << '\n';
        }
        fs::rename(tmp, path);
    }
};

hawkes::Dataset load_dataset(const std::string& path) {
    auto data = hawkes::read_events(path);
    const auto violations = hawkes::validate_dataset(data);
    if (!violations.empty()) {
        throw DataError(path + ": " + violations.front().rule + " (sequence " +
                        violations.front().seq_id + ")");
    }
    return data;
}

hawkes::FitConfig load_fit_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    hawkes::FitConfig fc;
    fc.gamma1 = j.value("gamma1", fc.gamma1);
    fc.gamma2 = j.value("gamma2", fc.gamma2);
    fc.gamma0 = j.value("gamma0", fc.gamma0);
    fc.p_select = j.value("p_select", fc.p_select);
    fc.lambda1 = j.value("lambda1", fc.lambda1);
    fc.phase1_iters = j.value("phase1_iters", fc.phase1_iters);
    fc.phase1_halve_every = j.value("phase1_halve_every", fc.phase1_halve_every);
    fc.seed = j.value("seed", fc.seed);
    return fc;
}

json fit_result_json(const hawkes::FitResult& result) {
    const auto& p = result.params_hat;
    json A = json::array();
    for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < p.A.cols(); ++k) row.push_back(p.A(i, k));
        A.push_back(std::move(row));
    }
    return json{{"d", p.dim()},
                {"beta", p.beta},
                {"mu", std::vector<double>(p.mu.data(), p.mu.data() + p.mu.size())},
                {"A", std::move(A)},
                {"selected_rows", result.selected_rows},
                {"end_phase1_loglik", result.end_phase1_loglik}};
}

std::vector<double> arange(double lo, double hi, double step) {
    std::vector<double> out;
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
    return out;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Linear multivariate Hawkes processes with excitation and inhibition: "
                 "fitting, Granger-causal graphs, and cohort chain discovery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Common common;
    app.add_flag("--force", common.force, "Overwrite existing output files");
    app.add_flag("--no-manifest-times", common.no_manifest_times,
                 "Omit timestamps from run manifests (for reproducible bytes)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic problem (events + truth)");
    hawkes::GenConfig gen;
    std::string sim_out, sim_truth;
    sim->add_option("--d", gen.d, "Process dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--horizon", gen.horizon, "Sequence horizon T")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--n-sequences", gen.n_sequences, "Sequences to draw")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--neg-fraction", gen.neg_fraction, "Fraction of inhibiting entries")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sim->add_option("--beta", gen.beta, "Kernel decay rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
    sim->add_option("--out", sim_out, "Output events JSONL")->required();
    sim->add_option("--truth", sim_truth, "Output truth params JSON")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit parameters to an event file");
    std::string fit_events, fit_out, fit_config, fit_method = "two_phase";
    double fit_beta = 1.0, fit_lambda1 = 0.0;
    std::uint64_t fit_seed = 0;
    fit->add_option("--events", fit_events, "Input events (JSONL or CSV)")->required();
    fit->add_option("--beta", fit_beta, "Kernel decay rate")
        ->check(CLI::PositiveNumber)
        ->required();
    fit->add_option("--lambda1", fit_lambda1, "L1 penalty weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    fit->add_option("--config", fit_config, "Optimizer config JSON");
    fit->add_option("--method", fit_method,
                    "two_phase | vanilla_gd | early_stopped_gd | restart_sgd")
        ->capture_default_str();
    fit->add_option("--seed", fit_seed, "RNG seed")->capture_default_str();
    fit->add_option("--out", fit_out, "Output fit JSON (trace lands at <out>.trace.csv)")
        ->required();

    // gridsearch
    auto* gs = app.add_subcommand("gridsearch", "Hyperparameter grid search, then fit");
    std::string gs_events, gs_out, gs_grid, gs_config;
    std::uint64_t gs_seed = 0;
    gs->add_option("--events", gs_events, "Input events (JSONL or CSV)")->required();
    gs->add_option("--grid", gs_grid,
                   "Grid JSON {\"beta\": [...], \"lambda1\": [...], \"gamma1\": [...]}; "
                   "defaults: beta 0.4..1.2 step 0.1, lambda1 0.05..0.5 step 0.05, gamma1 {0.1}");
    gs->add_option("--config", gs_config, "Optimizer config JSON");
    gs->add_option("--seed", gs_seed, "RNG seed")->capture_default_str();
    gs->add_option("--out", gs_out, "Output JSON (best point, score table, final fit)")
        ->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score an estimate against ground truth");
    std::string ev_truth, ev_params, ev_out;
    ev->add_option("--truth", ev_truth, "Truth params JSON")->required();
    ev->add_option("--params", ev_params, "Estimated params JSON")->required();
    ev->add_option("--out", ev_out, "Output metrics JSON")->required();

    // graph
    auto* gr = app.add_subcommand("graph", "Export the Granger-causal graph");
    std::string gr_params, gr_out;
    gr->add_option("--params", gr_params, "Estimated params JSON")->required();
    gr->add_option("--out", gr_out, "Output prefix (<out>.dot, <out>.categories.csv)")
        ->required();

    // chains
    auto* ch = app.add_subcommand("chains", "Rank causal chains distinguishing two cohorts");
    std::string ch_params, ch_c1, ch_c2, ch_out;
    int ch_max_len = 4;
    double ch_alpha = 0.05;
    ch->add_option("--params", ch_params, "Fitted params JSON (defines the graph)")->required();
    ch->add_option("--cohort1", ch_c1, "Cohort 1 events")->required();
    ch->add_option("--cohort2", ch_c2, "Cohort 2 events")->required();
    ch->add_option("--max-len", ch_max_len, "Maximum chain length (nodes)")
        ->check(CLI::Range(2, 64))
        ->capture_default_str();
    ch->add_option("--alpha", ch_alpha, "Significance cutoff")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    ch->add_option("--out", ch_out, "Output ranked chains CSV")->required();

    // eventize
    auto* et = app.add_subcommand("eventize", "Threshold measurement series into events");
    std::string et_meas, et_config, et_out;
    et->add_option("--measurements", et_meas, "Input CSV (patient_id,time,measurement,value)")
        ->required();
    et->add_option("--config", et_config, "Rules + window JSON")->required();
    et->add_option("--out", et_out, "Output events JSONL")->required();

    // experiment
    auto* ex = app.add_subcommand("experiment", "Run a scripted experiment plan");
    std::string ex_plan, ex_out;
    int ex_workers = 0;
    ex->add_option("--config", ex_plan, "Plan JSON")->required();
    ex->add_option("--workers", ex_workers, "Worker threads (0 = all cores)")
        ->capture_default_str();
    ex->add_option("--out", ex_out,
                   "Output prefix (<out>.records.csv, <out>.summary.csv, <out>.summary.json)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message; remap the code to the usage-error convention
        return 1;
    }

    Manifest man;
    man.started = iso_now();

    if (sim->parsed()) {
        const auto problem = hawkes::generate_synthetic_problem(gen);
        for (const auto& path : {sim_out, sim_truth}) {
            if (!common.force && fs::exists(path)) {
                throw UsageError("refusing to overwrite " + path + " (use --force)");
            }
        }
        ensure_parent(sim_out);
        ensure_parent(sim_truth);
        hawkes::write_events(problem.dataset, sim_out);
        hawkes::write_params(problem.truth, sim_truth);
        man.subcommand = "simulate";
        man.seed = gen.seed;
        man.config = {{"d", gen.d},
                      {"horizon", gen.horizon},
                      {"n_sequences", gen.n_sequences},
                      {"neg_fraction", gen.neg_fraction},
                      {"beta", gen.beta}};
        man.outputs = {sim_out, sim_truth};
        man.write(sim_out, common);
    } else if (fit->parsed()) {
        const auto data = load_dataset(fit_events);
        hawkes::FitConfig fc;
        if (!fit_config.empty()) fc = load_fit_config(fit_config);
        if (fit->count("--lambda1") > 0) fc.lambda1 = fit_lambda1;
        if (fit->count("--seed") > 0) fc.seed = fit_seed;
        hawkes::FitResult result;
        if (fit_method == "two_phase") {
            result = hawkes::fit_two_phase(data, fit_beta, fc);
        } else if (fit_method == "vanilla_gd") {
            result = hawkes::fit_vanilla_gd(data, fit_beta, fc);
        } else if (fit_method == "early_stopped_gd") {
            result = hawkes::fit_early_stopped_gd(data, fit_beta, fc);
        } else if (fit_method == "restart_sgd") {
            result = hawkes::fit_restart_sgd(data, fit_beta, fc);
        } else {
            throw UsageError("--method: unknown method " + fit_method);
        }
        write_text(fit_out, fit_result_json(result).dump(2) + "\n", common);
        write_text(fit_out + ".trace.csv", result.trace_csv(), common);
        man.subcommand = "fit";
        man.seed = fc.seed;
        man.config = {{"beta", fit_beta}, {"lambda1", fc.lambda1}, {"method", fit_method},
                      {"gamma1", fc.gamma1}, {"gamma2", fc.gamma2}, {"gamma0", fc.gamma0},
                      {"p_select", fc.p_select}, {"phase1_iters", fc.phase1_iters},
                      {"phase1_halve_every", fc.phase1_halve_every}};
        man.inputs = {fit_events};
        man.outputs = {fit_out, fit_out + ".trace.csv"};
        man.write(fit_out, common);
    } else if (gs->parsed()) {
        const auto data = load_dataset(gs_events);
        hawkes::FitConfig fc;
        if (!gs_config.empty()) fc = load_fit_config(gs_config);
        if (gs->count("--seed") > 0) fc.seed = gs_seed;
        std::vector<double> beta_grid = arange(0.4, 1.2, 0.1);
        std::vector<double> lambda1_grid = arange(0.05, 0.5, 0.05);
        std::vector<double> gamma1_grid{fc.gamma1};
        if (!gs_grid.empty()) {
            std::ifstream in(gs_grid);
            if (!in) throw DataError("cannot open " + gs_grid);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw DataError(gs_grid + ": " + e.what());
            }
            if (j.contains("beta")) beta_grid = j["beta"].get<std::vector<double>>();
            if (j.contains("lambda1")) lambda1_grid = j["lambda1"].get<std::vector<double>>();
            if (j.contains("gamma1")) gamma1_grid = j["gamma1"].get<std::vector<double>>();
        }
        const auto result = hawkes::grid_search(data, beta_grid, lambda1_grid, gamma1_grid, fc);
        json table = json::array();
        for (const auto& pt : result.table) {
            table.push_back({{"beta", pt.beta},
                             {"lambda1", pt.lambda1},
                             {"gamma1", pt.gamma1},
                             {"end_phase1_loglik", pt.end_phase1_loglik}});
        }
        json out{{"best",
                  {{"beta", result.best.beta},
                   {"lambda1", result.best.lambda1},
                   {"gamma1", result.best.gamma1},
                   {"end_phase1_loglik", result.best.end_phase1_loglik}}},
                 {"table", std::move(table)},
                 {"fit", fit_result_json(result.fit)}};
        write_text(gs_out, out.dump(2) + "\n", common);
        man.subcommand = "gridsearch";
        man.seed = fc.seed;
        man.config = {{"beta_grid", beta_grid},
                      {"lambda1_grid", lambda1_grid},
                      {"gamma1_grid", gamma1_grid}};
        man.inputs = {gs_events};
        man.outputs = {gs_out};
        man.write(gs_out, common);
    } else if (ev->parsed()) {
        const auto truth = hawkes::read_params(ev_truth);
        const auto est = hawkes::read_params(ev_params);
        if (truth.dim() != est.dim()) {
            throw DataError("dimension mismatch between " + ev_truth + " and " + ev_params);
        }
        const auto rec =
            hawkes::metrics(truth.A, est.A, truth.mu, est.mu, truth.beta, est.beta);
        write_text(ev_out, rec.to_json() + "\n", common);
        std::cout << rec.to_json() << '\n';
        man.subcommand = "evaluate";
        man.inputs = {ev_truth, ev_params};
        man.outputs = {ev_out};
        man.write(ev_out, common);
    } else if (gr->parsed()) {
        const auto params = hawkes::read_params(gr_params);
        const auto thresholded = hawkes::threshold_to_dag(params.A);
        const auto graph = hawkes::export_graph(thresholded.matrix,
                                                hawkes::default_type_names(params.dim()));
        write_text(gr_out + ".dot", hawkes::to_dot(graph), common);
        write_text(gr_out + ".categories.csv", hawkes::category_matrix_csv(graph), common);
        man.subcommand = "graph";
        man.config = {{"threshold", thresholded.threshold}};
        man.inputs = {gr_params};
        man.outputs = {gr_out + ".dot", gr_out + ".categories.csv"};
        man.write(gr_out + ".dot", common);
    } else if (ch->parsed()) {
        const auto params = hawkes::read_params(ch_params);
        const auto cohort1 = load_dataset(ch_c1);
        const auto cohort2 = load_dataset(ch_c2);
        if (cohort1.d != params.dim() || cohort2.d != params.dim()) {
            throw DataError("cohort dimension does not match " + ch_params);
        }
        const auto thresholded = hawkes::threshold_to_dag(params.A);
        const auto graph = hawkes::export_graph(thresholded.matrix, cohort1.type_names);
        const auto ranked =
            hawkes::rank_chains(graph, cohort1, cohort2, ch_max_len, ch_alpha);
        write_text(ch_out, hawkes::chains_csv(ranked, graph.type_names), common);
        man.subcommand = "chains";
        man.config = {{"max_len", ch_max_len}, {"alpha", ch_alpha}};
        man.inputs = {ch_params, ch_c1, ch_c2};
        man.outputs = {ch_out};
        man.write(ch_out, common);
    } else if (et->parsed()) {
        const auto config = hawkes::load_ingest_config(et_config);
        const auto rows = hawkes::read_measurements(et_meas);
        const auto result =
            hawkes::eventize(rows, config.rules, config.window, config.bin_hours);
        for (const auto& m : result.inert_measurements) {
            std::cerr << "warning: rule measurement never observed: " << m << '\n';
        }
        if (result.patients_skipped > 0) {
            std::cerr << "warning: skipped " << result.patients_skipped
                      << " patient(s) without an anchor measurement\n";
        }
        if (!common.force && fs::exists(et_out)) {
            throw UsageError("refusing to overwrite " + et_out + " (use --force)");
        }
        ensure_parent(et_out);
        hawkes::write_events(result.dataset, et_out);
        man.subcommand = "eventize";
        man.config = {{"patients_skipped", result.patients_skipped}};
        man.inputs = {et_meas, et_config};
        man.outputs = {et_out};
        man.write(et_out, common);
    } else if (ex->parsed()) {
        const auto plan = hawkes::ExperimentPlan::from_json_file(ex_plan);
        const auto result = hawkes::run_experiment(plan, ex_workers);
        write_text(ex_out + ".records.csv", result.records_csv(), common);
        write_text(ex_out + ".summary.csv", result.summary_csv(), common);
        write_text(ex_out + ".summary.json", result.summary_json() + "\n", common);
        man.subcommand = "experiment";
        man.seed = plan.seed;
        man.config = {{"experiment", plan.experiment}, {"trials", plan.trials}};
        man.inputs = {ex_plan};
        man.outputs = {ex_out + ".records.csv", ex_out + ".summary.csv",
                       ex_out + ".summary.json"};
        man.write(ex_out + ".summary.json", common);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const hawkes::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
