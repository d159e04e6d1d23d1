#include "hawkes/graph.hpp"
#include "hawkes/likelihood.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace hawkes;

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0)) /
           std::sqrt(static_cast<double>(v.size()));
}

// independent oracle: fine-grid Bernoulli discretization of the clipped
// intensity, with the excitation state advanced by exact exponential decay
std::vector<int> grid_sample_counts(const HawkesParams& p, double horizon, double dt,
                                    std::mt19937_64& rng) {
    const int d = p.dim();
    std::vector<int> counts(static_cast<std::size_t>(d), 0);
    Eigen::VectorXd decayed = Eigen::VectorXd::Zero(d);  // per-source decayed sums
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double decay = std::exp(-p.beta * dt);
    for (double t = 0.0; t < horizon; t += dt) {
        for (int i = 0; i < d; ++i) {
            const double lam = std::max(0.0, p.mu(i) + p.A.row(i).dot(decayed));
            if (unif(rng) < lam * dt) {
                ++counts[static_cast<std::size_t>(i)];
                decayed(i) += 1.0;  // event at this grid point excites from now on
            }
        }
        decayed *= decay;
    }
    return counts;
}

}  // namespace

TEST_CASE("homogeneous Poisson mean count") {
    HawkesParams p;
    p.beta = 1.0;
    p.mu = Eigen::VectorXd::Constant(1, 0.5);
    p.A = Eigen::MatrixXd::Zero(1, 1);
    std::vector<double> counts;
    for (int rep = 0; rep < 200; ++rep) {
        counts.push_back(static_cast<double>(thinning_sample(p, 1000.0, 1000 + rep).events.size()));
    }
    CHECK(std::abs(mean(counts) - 500.0) < 3.0 * stderr_of(counts));
}

TEST_CASE("self-exciting branching-ratio mean count") {
    HawkesParams p;
    p.beta = 0.8;
    p.mu = Eigen::VectorXd::Constant(1, 0.5);
    p.A = Eigen::MatrixXd::Constant(1, 1, 0.4);
    std::vector<double> counts;
    for (int rep = 0; rep < 500; ++rep) {
        counts.push_back(static_cast<double>(thinning_sample(p, 100.0, 2000 + rep).events.size()));
    }
    // expected muT/(1 - alpha/beta) = 100, shaved slightly by edge effects
    CHECK(std::abs(mean(counts) - 100.0) < 3.0 * stderr_of(counts) + 2.0);
}

TEST_CASE("sampled sequences are valid and ordered") {
    HawkesParams p;
    p.beta = 0.9;
    p.mu = Eigen::Vector3d(0.1, 0.2, 0.05);
    p.A.resize(3, 3);
    p.A << 0.0, 0.3, -0.2, 0.1, 0.0, 0.0, 0.2, 0.1, 0.0;
    const auto seq = thinning_sample(p, 500.0, 77);
    double prev = 0.0;
    for (const auto& ev : seq.events) {
        CHECK(ev.time >= prev);
        CHECK(ev.time <= 500.0);
        CHECK(ev.mark >= 0);
        CHECK(ev.mark < 3);
        prev = ev.time;
    }
    CHECK(seq.horizon == doctest::Approx(500.0));
}

TEST_CASE("non-stationary parameters abort with a clear error") {
    HawkesParams p;
    p.beta = 0.5;
    p.mu = Eigen::VectorXd::Constant(1, 0.5);
    p.A = Eigen::MatrixXd::Constant(1, 1, 1.0);  // branching ratio 2
    CHECK_THROWS_WITH_AS(thinning_sample(p, 1e7, 3, 20000),
                         doctest::Contains("non-stationary"), std::runtime_error);
}

TEST_CASE("thinning matches a fine-grid discretization oracle (inhibitory d=2)") {
    HawkesParams p;
    p.beta = 0.8;
    p.mu = Eigen::Vector2d(0.3, 0.25);
    p.A.resize(2, 2);
    p.A << 0.0, -0.4, 0.35, 0.0;
    const double horizon = 50.0;
    const int reps = 300;
    std::vector<double> thin0, thin1, grid0, grid1;
    std::mt19937_64 grid_rng(991);
    for (int rep = 0; rep < reps; ++rep) {
        const auto seq = thinning_sample(p, horizon, 5000 + rep);
        int c0 = 0, c1 = 0;
        for (const auto& ev : seq.events) (ev.mark == 0 ? c0 : c1)++;
        thin0.push_back(c0);
        thin1.push_back(c1);
        const auto g = grid_sample_counts(p, horizon, 1e-3, grid_rng);
        grid0.push_back(g[0]);
        grid1.push_back(g[1]);
    }
    const double se0 = std::sqrt(stderr_of(thin0) * stderr_of(thin0) +
                                 stderr_of(grid0) * stderr_of(grid0));
    const double se1 = std::sqrt(stderr_of(thin1) * stderr_of(thin1) +
                                 stderr_of(grid1) * stderr_of(grid1));
    CHECK(std::abs(mean(thin0) - mean(grid0)) < 3.0 * se0);
    CHECK(std::abs(mean(thin1) - mean(grid1)) < 3.0 * se1);
}

TEST_CASE("synthetic problems satisfy the generation invariants (property)") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL, 12345ULL}) {
        GenConfig gc;
        gc.d = 5;
        gc.horizon = 100.0;
        gc.n_sequences = 2;
        gc.neg_fraction = 0.2;
        gc.seed = seed;
        const auto problem = generate_synthetic_problem(gc);
        for (int i = 0; i < gc.d; ++i) {
            const double mu = problem.truth.mu(i);
            CHECK((mu == 0.0 || mu == doctest::Approx(0.1)));
            for (int j = 0; j < gc.d; ++j) {
                const double a = problem.truth.A(i, j);
                const double scaled = a * 10.0;
                CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
                if (a > 0.0) CHECK(a <= 0.4 + 1e-12);
                if (a < 0.0) CHECK(a >= -0.5 - 1e-12);
            }
        }
        CHECK(h_dag(problem.truth.A.cwiseMax(0.0)) <= 1e-8);
        CHECK(problem.dataset.sequences.size() == 2);
    }
}

TEST_CASE("d=1 generation cannot keep a positive self-loop") {
    GenConfig gc;
    gc.d = 1;
    gc.horizon = 50.0;
    gc.seed = 4;
    const auto problem = generate_synthetic_problem(gc);
    CHECK(problem.truth.A(0, 0) <= 0.0);
}

TEST_CASE("generation is bit-identical for a fixed seed") {
    GenConfig gc;
    gc.d = 4;
    gc.horizon = 200.0;
    gc.n_sequences = 3;
    gc.seed = 31;
    const auto p1 = generate_synthetic_problem(gc);
    const auto p2 = generate_synthetic_problem(gc);
    CHECK((p1.truth.mu - p2.truth.mu).norm() == 0.0);
    CHECK((p1.truth.A - p2.truth.A).norm() == 0.0);
    REQUIRE(p1.dataset.sequences.size() == p2.dataset.sequences.size());
    for (std::size_t s = 0; s < p1.dataset.sequences.size(); ++s) {
        CHECK(p1.dataset.sequences[s] == p2.dataset.sequences[s]);
    }
}
