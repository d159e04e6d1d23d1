#pragma once

#include "hawkes/types.hpp"

#include <string>
#include <vector>

namespace hawkes {

/// tr(exp(|A|)) - d; zero exactly when the support digraph of |A| is acyclic.
double h_dag(const Eigen::MatrixXd& A);

struct ThresholdResult {
    Eigen::MatrixXd matrix;
    double threshold{0.0};
};

/// Zero all entries with |a| < tau, raising tau through the sorted distinct
/// nonzero magnitudes until the result is a DAG (h <= 1e-8).
ThresholdResult threshold_to_dag(const Eigen::MatrixXd& A_hat);

struct MetricRecord {
    double beta_err{0.0};
    double mu_err{0.0};
    double a_err{0.0};   // L1, pre-thresholding
    int hd_raw{0};       // support mismatches, thresholded estimate vs raw truth
    double hd{0.0};      // hd_raw / d^2
    int shd{0};          // min edge insert/delete/reverse edits, self-loops excluded
    double threshold{0.0};

    std::string to_json() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

MetricRecord metrics(const Eigen::MatrixXd& A_true, const Eigen::MatrixXd& A_hat,
                     const Eigen::VectorXd& mu_true, const Eigen::VectorXd& mu_hat,
                     double beta_true, double beta_hat);

/// SHD between two directed support patterns (diagonal ignored); an exact
/// (i,j)/(j,i) swap counts as one reversal.
int structural_hamming_distance(const Eigen::MatrixXd& A_ref, const Eigen::MatrixXd& A_est);

enum class EdgeStrength { none, weak, medium, strong };  // -, +, ++, +++

EdgeStrength edge_strength(double weight);
std::string strength_label(EdgeStrength s);

struct GCGraph {
    int d{0};
    Eigen::MatrixXd weights;  // thresholded, signed; (i,j) = effect of j on i
    std::vector<std::string> type_names;

    EdgeStrength strength(int i, int j) const { return edge_strength(weights(i, j)); }
    bool exciting(int i, int j) const { return weights(i, j) > 0.0; }
};

GCGraph export_graph(const Eigen::MatrixXd& thresholded,
                     const std::vector<std::string>& type_names);

std::string to_dot(const GCGraph& graph);
std::string category_matrix_csv(const GCGraph& graph);

}  // namespace hawkes
