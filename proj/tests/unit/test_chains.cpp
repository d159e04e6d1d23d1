#include "hawkes/chains.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace hawkes;

namespace {

GCGraph make_graph(const Eigen::MatrixXd& weights) {
    return export_graph(weights, default_type_names(static_cast<int>(weights.rows())));
}

EventSequence seq_of(std::vector<Event> events, double horizon = 100.0) {
    EventSequence s;
    s.horizon = horizon;
    s.events = std::move(events);
    return s;
}

Dataset cohort_of(int d, std::vector<EventSequence> seqs) {
    Dataset ds;
    ds.d = d;
    ds.type_names = default_type_names(d);
    ds.sequences = std::move(seqs);
    return ds;
}

// exhaustive subsequence check: does any strictly increasing-time subsequence
// of events spell out the chain?
bool occurs_brute(const Chain& chain, const EventSequence& seq,
                  std::size_t pos = 0, double last_time = -1.0) {
    if (pos == chain.size()) return true;
    for (const auto& ev : seq.events) {
        if (ev.mark != chain[pos]) continue;
        if (pos > 0 && !(ev.time > last_time)) continue;
        if (occurs_brute(chain, seq, pos + 1, ev.time)) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("chain enumeration over a mutual excitation pair") {
    // edges 0 -> 1 and 1 -> 0, both strong exciting; weights(i, j) = j acts on i
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(1, 0) = 0.002;
    w(0, 1) = 0.002;
    const auto graph = make_graph(w);

    auto two = enumerate_chains(graph, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == Chain{0, 1});
    CHECK(two[1] == Chain{1, 0});

    auto three = enumerate_chains(graph, 3);
    REQUIRE(three.size() == 4);
    CHECK(three[0] == Chain{0, 1});
    CHECK(three[1] == Chain{0, 1, 0});
    CHECK(three[2] == Chain{1, 0});
    CHECK(three[3] == Chain{1, 0, 1});
}

TEST_CASE("enumeration ignores weak, inhibiting, and self edges") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    w(1, 0) = 2e-4;    // weak exciting: ignored
    w(2, 0) = -0.002;  // strong inhibiting: ignored
    w(0, 0) = 0.01;    // self loop: a walk 0 -> 0 would need an exciting edge; it has
                       // one, so self loops do produce walks when strong
    w(2, 1) = 7e-4;    // medium exciting: kept
    const auto chains = enumerate_chains(make_graph(w), 2);
    // expected: [0,0] from the strong self edge and [1,2] from the medium edge
    REQUIRE(chains.size() == 2);
    CHECK(chains[0] == Chain{0, 0});
    CHECK(chains[1] == Chain{1, 2});
}

TEST_CASE("enumeration cap and invalid max_len throw") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(4, 4, 0.01);
    const auto graph = make_graph(w);
    CHECK_THROWS_AS(enumerate_chains(graph, 12, 50), std::runtime_error);
    CHECK_THROWS_AS(enumerate_chains(graph, 1), std::invalid_argument);
}

TEST_CASE("chain_occurs: order, simultaneity, eligibility") {
    const Chain chain{0, 1, 0};
    CHECK(chain_occurs(chain, seq_of({{1.0, 0}, {2.0, 1}, {3.0, 0}})));
    CHECK_FALSE(chain_occurs(chain, seq_of({{1.0, 0}, {2.0, 0}, {3.0, 1}})));
    // strictly increasing: a tie does not count as progression
    CHECK_FALSE(chain_occurs(chain, seq_of({{1.0, 0}, {1.0, 1}, {3.0, 0}})));
    CHECK(chain_occurs(chain, seq_of({{1.0, 0}, {1.5, 1}, {3.0, 0}})));
    // eligibility requires every chain type present
    CHECK(chain_eligible(chain, seq_of({{1.0, 1}, {2.0, 0}})));
    CHECK_FALSE(chain_eligible(chain, seq_of({{1.0, 0}, {2.0, 0}})));
    CHECK_FALSE(chain_eligible(chain, seq_of({})));
}

TEST_CASE("greedy occurrence scan agrees with exhaustive search (property)") {
    std::mt19937_64 rng(211);
    std::uniform_int_distribution<int> n_events(0, 12);
    std::uniform_int_distribution<int> mark(0, 2);
    std::uniform_int_distribution<int> chain_len(2, 4);
    std::uniform_real_distribution<double> t(0.0, 10.0);
    for (int rep = 0; rep < 400; ++rep) {
        std::vector<Event> events;
        const int n = n_events(rng);
        for (int k = 0; k < n; ++k) events.push_back({t(rng), mark(rng)});
        std::sort(events.begin(), events.end(),
                  [](const Event& a, const Event& b) { return a.time < b.time; });
        const auto seq = seq_of(events);
        Chain chain;
        const int len = chain_len(rng);
        for (int k = 0; k < len; ++k) chain.push_back(mark(rng));
        CHECK(chain_occurs(chain, seq) == occurs_brute(chain, seq));
    }
}

TEST_CASE("build_table counts eligibility and occurrence per cohort") {
    const Chain chain{0, 1};
    auto c1 = cohort_of(2, {
        seq_of({{1.0, 0}, {2.0, 1}}),   // eligible, occurs
        seq_of({{1.0, 1}, {2.0, 0}}),   // eligible, does not occur
        seq_of({{1.0, 0}}),             // not eligible (no type 1)
    });
    auto c2 = cohort_of(2, {
        seq_of({{1.0, 1}, {2.0, 0}, {3.0, 1}}),  // eligible, occurs
    });
    const auto table = build_table(chain, c1, c2);
    CHECK(table.occur1 == 1);
    CHECK(table.eligible1 == 2);
    CHECK(table.occur2 == 1);
    CHECK(table.eligible2 == 1);
}

TEST_CASE("fisher exact small closed forms") {
    // table [1,0;0,1]: point prob = 1/2, tail(greater) = 1/2, two-sided = 1
    ChainTable t{1, 1, 0, 1};
    CHECK(fisher_exact(t, FisherMode::point) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fisher_exact(t, FisherMode::greater) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fisher_exact(t, FisherMode::two_sided) == doctest::Approx(1.0).epsilon(1e-12));

    // table [1,0;1,0] (both occur): the only table with these margins
    ChainTable sure{1, 1, 1, 1};
    CHECK(fisher_exact(sure, FisherMode::point) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fisher_exact(sure, FisherMode::two_sided) == doctest::Approx(1.0).epsilon(1e-12));

    // empty table convention
    CHECK(fisher_exact(ChainTable{0, 0, 0, 0}) == doctest::Approx(1.0));

    // invalid counts
    CHECK_THROWS_AS(fisher_exact(ChainTable{2, 1, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(fisher_exact(ChainTable{-1, 1, 0, 1}), std::invalid_argument);
}

TEST_CASE("fisher point probabilities sum to one over all tables (property)") {
    std::mt19937_64 rng(223);
    std::uniform_int_distribution<int> margin(1, 60);
    for (int rep = 0; rep < 40; ++rep) {
        const int e1 = margin(rng);
        const int e2 = margin(rng);
        std::uniform_int_distribution<int> k_total(0, e1 + e2);
        const int total = k_total(rng);
        double sum = 0.0;
        double point_obs = -1.0;
        const int a_obs = std::min(total, e1);
        for (int a = std::max(0, total - e2); a <= std::min(total, e1); ++a) {
            ChainTable t{a, e1, total - a, e2};
            const double p = fisher_exact(t, FisherMode::point);
            sum += p;
            if (a == a_obs) point_obs = p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        // two_sided includes at least the observed table's point mass
        ChainTable obs{a_obs, e1, total - a_obs, e2};
        CHECK(fisher_exact(obs, FisherMode::two_sided) >= point_obs - 1e-12);
    }
}

TEST_CASE("fisher modes stay in (0, 1] and two_sided dominates point") {
    std::mt19937_64 rng(227);
    std::uniform_int_distribution<int> elig(1, 80);
    for (int rep = 0; rep < 200; ++rep) {
        const int e1 = elig(rng);
        const int e2 = elig(rng);
        std::uniform_int_distribution<int> o1(0, e1), o2(0, e2);
        ChainTable t{o1(rng), e1, o2(rng), e2};
        for (auto mode : {FisherMode::point, FisherMode::greater, FisherMode::two_sided}) {
            const double p = fisher_exact(t, mode);
            CHECK(p > 0.0);
            CHECK(p <= 1.0 + 1e-12);
        }
        CHECK(fisher_exact(t, FisherMode::two_sided) >=
              fisher_exact(t, FisherMode::point) - 1e-12);
        // swapping cohorts leaves the two-sided p unchanged
        ChainTable swapped{t.occur2, t.eligible2, t.occur1, t.eligible1};
        CHECK(fisher_exact(swapped, FisherMode::two_sided) ==
              doctest::Approx(fisher_exact(t, FisherMode::two_sided)).epsilon(1e-9));
    }
}

TEST_CASE("published contingency fixtures reproduce to 3 truncated decimals") {
    // (with-chain cohort1, with-chain cohort2, without cohort1, without cohort2)
    struct Fixture {
        int a, b, c, d;
        double p3;  // truncated to 3 decimals
    };
    const std::vector<Fixture> fixtures = {
        {17, 20, 5, 30, 0.004}, {19, 35, 6, 28, 0.092}, {35, 31, 14, 25, 0.107},
        {49, 33, 17, 34, 0.004}, {3, 3, 1, 14, 0.052},  {3, 2, 3, 15, 0.088},
        {8, 7, 2, 17, 0.009},   {9, 13, 3, 19, 0.088},  {6, 13, 1, 20, 0.039},
        {9, 13, 6, 30, 0.063},
    };
    for (const auto& f : fixtures) {
        ChainTable t{f.a, f.a + f.c, f.b, f.b + f.d};
        const double p = fisher_exact(t, FisherMode::two_sided);
        CHECK(std::floor(p * 1000.0) / 1000.0 == doctest::Approx(f.p3).epsilon(1e-12));
    }
}

TEST_CASE("rank_chains orders by p-value, skips untestable chains, flags significance") {
    // graph with strong exciting edges 0 -> 1 and 2 -> 3
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    w(1, 0) = 0.4;
    w(3, 2) = 0.4;
    const auto graph = make_graph(w);

    // cohort 1: chain [0,1] occurs in every eligible sequence; [2,3] never tested
    // because no sequence in cohort 2 has events of types 2 and 3
    std::vector<EventSequence> c1, c2;
    for (int k = 0; k < 12; ++k) c1.push_back(seq_of({{1.0, 0}, {2.0, 1}}));
    c1.push_back(seq_of({{1.0, 2}, {2.0, 3}}));
    for (int k = 0; k < 12; ++k) c2.push_back(seq_of({{1.0, 1}, {2.0, 0}}));
    const auto ranking = rank_chains(graph, cohort_of(4, c1), cohort_of(4, c2), 2, 0.05);

    REQUIRE(ranking.reports.size() == 1);
    CHECK(ranking.skipped == 1);
    const auto& top = ranking.reports[0];
    CHECK(top.chain == Chain{0, 1});
    CHECK(top.table.occur1 == 12);
    CHECK(top.table.eligible1 == 12);
    CHECK(top.table.occur2 == 0);
    CHECK(top.table.eligible2 == 12);
    CHECK(top.ratio1 == doctest::Approx(1.0));
    CHECK(top.ratio2 == doctest::Approx(0.0));
    CHECK(top.p_value < 1e-5);
    CHECK(top.significant);

    CHECK_THROWS_AS(rank_chains(graph, cohort_of(4, c1), cohort_of(4, c2), 2, 1.5),
                    std::invalid_argument);
}

TEST_CASE("rank_chains tie-break: ascending p, then shorter, then lexicographic") {
    // two disconnected strong edges with identical cohort statistics
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    w(1, 0) = 0.4;
    w(3, 2) = 0.4;
    const auto graph = make_graph(w);
    std::vector<EventSequence> c1, c2;
    for (int k = 0; k < 5; ++k) {
        c1.push_back(seq_of({{1.0, 0}, {2.0, 1}, {3.0, 2}, {4.0, 3}}));
        c2.push_back(seq_of({{1.0, 1}, {2.0, 0}, {3.0, 3}, {4.0, 2}}));
    }
    const auto ranking = rank_chains(graph, cohort_of(4, c1), cohort_of(4, c2), 2, 0.05);
    REQUIRE(ranking.reports.size() == 2);
    CHECK(ranking.reports[0].p_value == doctest::Approx(ranking.reports[1].p_value));
    CHECK(ranking.reports[0].chain == Chain{0, 1});
    CHECK(ranking.reports[1].chain == Chain{2, 3});
}

TEST_CASE("chains_csv shape") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(1, 0) = 0.4;
    const auto graph = make_graph(w);
    auto c1 = cohort_of(2, {seq_of({{1.0, 0}, {2.0, 1}})});
    auto c2 = cohort_of(2, {seq_of({{1.0, 1}, {2.0, 0}})});
    const auto ranking = rank_chains(graph, c1, c2, 2, 0.05);
    const auto csv = chains_csv(ranking, default_type_names(2));
    CHECK(csv.find("# skipped_no_eligible=0") != std::string::npos);
    CHECK(csv.find("chain,") != std::string::npos);
    CHECK(csv.rfind("\n") == csv.size() - 1);
}
