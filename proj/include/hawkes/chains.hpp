#pragma once

#include "hawkes/graph.hpp"
#include "hawkes/types.hpp"

#include <string>
#include <vector>

namespace hawkes {

/// A causal chain: a walk v_0 -> v_1 -> ... over strong exciting edges of a
/// Granger-causal graph. Nodes may repeat.
using Chain = std::vector<int>;

/// All walks of 2..max_len nodes whose every edge is exciting with strength
/// ++ or +++ (weight >= the medium-strength boundary). Enumeration is
/// depth-first from each start node in ascending order; an overall cap guards
/// against dense graphs.
std::vector<Chain> enumerate_chains(const GCGraph& graph, int max_len,
                                    std::size_t cap = 100000);

/// True iff the chain occurs in the sequence as a strictly increasing-time
/// subsequence of matching event types (greedy earliest-match scan).
bool chain_occurs(const Chain& chain, const EventSequence& seq);

/// A sequence is eligible for a chain if it contains at least one event of
/// every type appearing in the chain.
bool chain_eligible(const Chain& chain, const EventSequence& seq);

/// 2x2 contingency counts for one chain across two cohorts: eligible
/// sequences and, among them, those where the chain occurs.
struct ChainTable {
    int occur1{0};
    int eligible1{0};
    int occur2{0};
    int eligible2{0};
};

ChainTable build_table(const Chain& chain, const Dataset& cohort1, const Dataset& cohort2);

enum class FisherMode { point, greater, two_sided };

/// Fisher exact test on the 2x2 table
///   [occur1, eligible1 - occur1; occur2, eligible2 - occur2],
/// computed in log-factorial space. "point" returns the hypergeometric
/// probability of the observed table; "greater" the one-sided tail (cohort 1
/// enriched); "two_sided" sums all tables at most as probable as observed.
double fisher_exact(const ChainTable& table, FisherMode mode = FisherMode::two_sided);

struct ChainReport {
    Chain chain;
    ChainTable table;
    double ratio1{0.0};  // occur1 / eligible1
    double ratio2{0.0};
    double p_value{1.0};
    bool significant{false};  // p <= alpha

    std::string label(const std::vector<std::string>& type_names) const;
};

struct ChainRanking {
    std::vector<ChainReport> reports;  // ascending p; ties: shorter, then lexicographic
    int skipped{0};                    // chains with no eligible sequence in some cohort
};

/// Enumerate chains on the graph, score each testable chain by Fisher
/// p-value, and rank; chains with p <= alpha are flagged significant.
ChainRanking rank_chains(const GCGraph& graph, const Dataset& cohort1, const Dataset& cohort2,
                         int max_len, double alpha, FisherMode mode = FisherMode::two_sided);

std::string chains_csv(const ChainRanking& ranking,
                       const std::vector<std::string>& type_names);

}  // namespace hawkes
