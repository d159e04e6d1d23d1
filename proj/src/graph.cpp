#include "hawkes/graph.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace hawkes {

namespace {
constexpr double kDagTol = 1e-8;
}

double h_dag(const Eigen::MatrixXd& A) {
    const Eigen::MatrixXd M = A.cwiseAbs();
    const double trace = Eigen::MatrixXd(M.exp()).trace();
    return trace - static_cast<double>(A.rows());
}

ThresholdResult threshold_to_dag(const Eigen::MatrixXd& A_hat) {
    std::set<double> magnitudes;
    for (Eigen::Index i = 0; i < A_hat.rows(); ++i) {
        for (Eigen::Index j = 0; j < A_hat.cols(); ++j) {
            if (A_hat(i, j) != 0.0) magnitudes.insert(std::abs(A_hat(i, j)));
        }
    }
    std::vector<double> taus(magnitudes.begin(), magnitudes.end());
    // last resort: zero every entry (the empty matrix is a DAG); the smallest
    // sufficient cutoff is just above the largest magnitude, kept finite so
    // the threshold serializes as valid JSON
    taus.push_back(magnitudes.empty()
                       ? 0.0
                       : std::nextafter(*magnitudes.rbegin(),
                                        std::numeric_limits<double>::infinity()));
    for (double tau : taus) {
        Eigen::MatrixXd cut = A_hat;
        for (Eigen::Index i = 0; i < cut.rows(); ++i) {
            for (Eigen::Index j = 0; j < cut.cols(); ++j) {
                if (std::abs(cut(i, j)) < tau) cut(i, j) = 0.0;
            }
        }
        if (h_dag(cut) <= kDagTol) return {std::move(cut), tau};
    }
    return {Eigen::MatrixXd::Zero(A_hat.rows(), A_hat.cols()), taus.back()};  // unreachable
}

int structural_hamming_distance(const Eigen::MatrixXd& A_ref, const Eigen::MatrixXd& A_est) {
    const Eigen::Index d = A_ref.rows();
    int shd = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            // 2-bit masks over the unordered pair: bit0 = i->j edge, bit1 = j->i.
            // Convention: entry (r, c) != 0 encodes edge c -> r.
            const int ref = (A_ref(j, i) != 0.0 ? 1 : 0) | (A_ref(i, j) != 0.0 ? 2 : 0);
            const int est = (A_est(j, i) != 0.0 ? 1 : 0) | (A_est(i, j) != 0.0 ? 2 : 0);
            if (ref == est) continue;
            if ((ref | est) == 3 && ref != 3 && est != 3) {
                shd += 1;  // pure reversal
            } else {
                shd += __builtin_popcount(static_cast<unsigned>(ref ^ est));
            }
        }
    }
    return shd;
}

MetricRecord metrics(const Eigen::MatrixXd& A_true, const Eigen::MatrixXd& A_hat,
                     const Eigen::VectorXd& mu_true, const Eigen::VectorXd& mu_hat,
                     double beta_true, double beta_hat) {
    MetricRecord rec;
    rec.beta_err = std::abs(beta_hat - beta_true);
    rec.mu_err = (mu_hat - mu_true).cwiseAbs().sum();
    rec.a_err = (A_hat - A_true).cwiseAbs().sum();
    auto thresholded = threshold_to_dag(A_hat);
    rec.threshold = thresholded.threshold;
    const Eigen::Index d = A_true.rows();
    int mismatches = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if ((thresholded.matrix(i, j) != 0.0) != (A_true(i, j) != 0.0)) ++mismatches;
        }
    }
    rec.hd_raw = mismatches;
    rec.hd = static_cast<double>(mismatches) / static_cast<double>(d * d);
    rec.shd = structural_hamming_distance(A_true, thresholded.matrix);
    return rec;
}

std::string MetricRecord::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"beta_err\":" << beta_err << ",\"mu_err\":" << mu_err
       << ",\"A_err\":" << a_err << ",\"hd_raw\":" << hd_raw << ",\"hd\":" << hd
       << ",\"shd\":" << shd << ",\"threshold\":" << threshold << "}";
    return os.str();
}

std::string MetricRecord::csv_header() {
    return "beta_err,mu_err,A_err,hd_raw,hd,shd,threshold";
}

std::string MetricRecord::to_csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << beta_err << ',' << mu_err << ',' << a_err << ',' << hd_raw << ',' << hd
       << ',' << shd << ',' << threshold;
    return os.str();
}

EdgeStrength edge_strength(double weight) {
    const double mag = std::abs(weight);
    if (mag == 0.0) return EdgeStrength::none;
    if (mag < 5e-4) return EdgeStrength::weak;
    if (mag < 1e-3) return EdgeStrength::medium;
    return EdgeStrength::strong;
}

std::string strength_label(EdgeStrength s) {
    switch (s) {
        case EdgeStrength::weak: return "+";
        case EdgeStrength::medium: return "++";
        case EdgeStrength::strong: return "+++";
        default: return "";
    }
}

GCGraph export_graph(const Eigen::MatrixXd& thresholded,
                     const std::vector<std::string>& type_names) {
    GCGraph g;
    g.d = static_cast<int>(thresholded.rows());
    g.weights = thresholded;
    g.type_names = type_names.empty() ? default_type_names(g.d) : type_names;
    return g;
}

std::string to_dot(const GCGraph& graph) {
    std::ostringstream os;
    os.precision(10);
    os << "digraph gc {\n";
    for (int i = 0; i < graph.d; ++i) {
        os << "  n" << i << " [label=\"" << graph.type_names[i] << "\"];\n";
    }
    double max_mag = 0.0;
    for (int i = 0; i < graph.d; ++i) {
        for (int j = 0; j < graph.d; ++j) {
            max_mag = std::max(max_mag, std::abs(graph.weights(i, j)));
        }
    }
    for (int i = 0; i < graph.d; ++i) {
        for (int j = 0; j < graph.d; ++j) {
            const double w = graph.weights(i, j);
            if (w == 0.0) continue;
            const double penwidth = 0.5 + 4.5 * std::abs(w) / max_mag;
            // edge direction: source type j -> target type i
            os << "  n" << j << " -> n" << i
               << " [color=" << (w > 0.0 ? "blue" : "red")
               << ", label=\"" << strength_label(graph.strength(i, j)) << "\""
               << ", penwidth=" << penwidth << "];\n";
        }
    }
    os << "}\n";
    return os.str();
}

std::string category_matrix_csv(const GCGraph& graph) {
    std::ostringstream os;
    os << "target\\source";
    for (int j = 0; j < graph.d; ++j) os << ',' << graph.type_names[j];
    os << '\n';
    for (int i = 0; i < graph.d; ++i) {
        os << graph.type_names[i];
        for (int j = 0; j < graph.d; ++j) {
            const auto s = graph.strength(i, j);
            std::string cell = strength_label(s);
            if (s != EdgeStrength::none && graph.weights(i, j) < 0.0) cell = "-" + cell;
            os << ',' << cell;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace hawkes
