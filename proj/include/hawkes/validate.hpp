#pragma once

#include "hawkes/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace hawkes {

struct Violation {
    std::string seq_id;
    std::string rule;       // "unordered times", "time out of range", "mark out of range", ...
    std::ptrdiff_t index;   // offending event index, -1 for sequence-level rules
};

/// Never throws; returns one record per invariant breach (empty iff valid).
std::vector<Violation> validate_dataset(const Dataset& dataset);

}  // namespace hawkes
