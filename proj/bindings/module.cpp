#include "hawkes/chains.hpp"
#include "hawkes/estimate.hpp"
#include "hawkes/graph.hpp"
#include "hawkes/likelihood.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/types.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

namespace py = pybind11;
using namespace hawkes;

namespace {

Dataset dataset_from_python(int d, const std::vector<std::vector<std::pair<double, int>>>& seqs,
                            double horizon) {
    Dataset data;
    data.d = d;
    data.type_names = default_type_names(d);
    int id = 0;
    for (const auto& seq : seqs) {
        EventSequence s;
        s.seq_id = "seq-" + std::to_string(id++);
        s.horizon = horizon;
        for (const auto& [t, mark] : seq) s.events.push_back({t, mark});
        data.sequences.push_back(std::move(s));
    }
    return data;
}

HawkesParams params_from_python(const Eigen::VectorXd& mu, const Eigen::MatrixXd& A,
                                double beta) {
    HawkesParams p{mu, A, beta};
    p.validate();
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Linear multivariate Hawkes processes with excitation and inhibition";

    m.def(
        "simulate",
        [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& A, double beta, double horizon,
           std::uint64_t seed) {
            const auto seq = thinning_sample(params_from_python(mu, A, beta), horizon, seed);
            std::vector<std::pair<double, int>> out;
            out.reserve(seq.events.size());
            for (const auto& ev : seq.events) out.emplace_back(ev.time, ev.mark);
            return out;
        },
        py::arg("mu"), py::arg("A"), py::arg("beta"), py::arg("horizon"), py::arg("seed") = 0,
        "Draw one sequence by thinning; returns a list of (time, mark) pairs.");

    m.def(
        "surrogate_loglik",
        [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& A, double beta,
           const std::vector<std::vector<std::pair<double, int>>>& seqs, double horizon,
           double lambda1) {
            const auto data = dataset_from_python(static_cast<int>(mu.size()), seqs, horizon);
            const auto r = surrogate_loglik(params_from_python(mu, A, beta), data, lambda1);
            if (!r.ok()) throw std::runtime_error("intractable: nonpositive intensity at an event");
            return *r.value;
        },
        py::arg("mu"), py::arg("A"), py::arg("beta"), py::arg("sequences"), py::arg("horizon"),
        py::arg("lambda1") = 0.0);

    m.def(
        "fit_two_phase",
        [](const std::vector<std::vector<std::pair<double, int>>>& seqs, double horizon, int d,
           double beta, double lambda1, std::uint64_t seed) {
            const auto data = dataset_from_python(d, seqs, horizon);
            FitConfig config;
            config.lambda1 = lambda1;
            config.seed = seed;
            const auto result = fit_two_phase(data, beta, config);
            return py::make_tuple(result.params_hat.mu, result.params_hat.A,
                                  result.end_phase1_loglik);
        },
        py::arg("sequences"), py::arg("horizon"), py::arg("d"), py::arg("beta"),
        py::arg("lambda1") = 0.0, py::arg("seed") = 0,
        "Two-phase fit; returns (mu_hat, A_hat, end_phase1_loglik).");

    m.def(
        "threshold_to_dag",
        [](const Eigen::MatrixXd& A) {
            const auto r = threshold_to_dag(A);
            return py::make_tuple(r.matrix, r.threshold);
        },
        py::arg("A"), "Smallest magnitude threshold making the support acyclic.");

    m.def("h_dag", &h_dag, py::arg("A"), "tr(exp(|A|)) - d acyclicity functional.");

    m.def(
        "fisher_exact",
        [](int occur1, int eligible1, int occur2, int eligible2, const std::string& mode) {
            FisherMode fm;
            if (mode == "point") {
                fm = FisherMode::point;
            } else if (mode == "greater") {
                fm = FisherMode::greater;
            } else if (mode == "two_sided") {
                fm = FisherMode::two_sided;
            } else {
                throw std::invalid_argument("mode must be point, greater, or two_sided");
            }
            return fisher_exact(ChainTable{occur1, eligible1, occur2, eligible2}, fm);
        },
        py::arg("occur1"), py::arg("eligible1"), py::arg("occur2"), py::arg("eligible2"),
        py::arg("mode") = "two_sided");

    m.def(
        "generate_synthetic_problem",
        [](int d, double horizon, int n_sequences, double neg_fraction, double beta,
           std::uint64_t seed) {
            GenConfig gc;
            gc.d = d;
            gc.horizon = horizon;
            gc.n_sequences = n_sequences;
            gc.neg_fraction = neg_fraction;
            gc.beta = beta;
            gc.seed = seed;
            const auto problem = generate_synthetic_problem(gc);
            std::vector<std::vector<std::pair<double, int>>> seqs;
            for (const auto& seq : problem.dataset.sequences) {
                std::vector<std::pair<double, int>> s;
                for (const auto& ev : seq.events) s.emplace_back(ev.time, ev.mark);
                seqs.push_back(std::move(s));
            }
            return py::make_tuple(problem.truth.mu, problem.truth.A, seqs);
        },
        py::arg("d") = 5, py::arg("horizon") = 500.0, py::arg("n_sequences") = 1,
        py::arg("neg_fraction") = 0.1, py::arg("beta") = 0.8, py::arg("seed") = 0,
        "Returns (mu_true, A_true, sequences).");
}
