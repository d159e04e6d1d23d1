#include "hawkes/validate.hpp"

#include <cmath>

namespace hawkes {

std::vector<Violation> validate_dataset(const Dataset& dataset) {
    std::vector<Violation> out;
    if (dataset.d <= 0) {
        out.push_back({"", "nonpositive type count", -1});
        return out;
    }
    if (dataset.sequences.empty()) {
        out.push_back({"", "empty dataset", -1});
    }
    if (!dataset.type_names.empty() &&
        dataset.type_names.size() != static_cast<std::size_t>(dataset.d)) {
        out.push_back({"", "type name count mismatch", -1});
    }
    for (const auto& seq : dataset.sequences) {
        if (!(seq.horizon >= 0.0) || !std::isfinite(seq.horizon)) {
            out.push_back({seq.seq_id, "invalid horizon", -1});
        }
        double prev = 0.0;
        for (std::size_t n = 0; n < seq.events.size(); ++n) {
            const auto& ev = seq.events[n];
            const auto idx = static_cast<std::ptrdiff_t>(n);
            if (!std::isfinite(ev.time) || ev.time < 0.0 || ev.time > seq.horizon) {
                out.push_back({seq.seq_id, "time out of range", idx});
            }
            if (n > 0 && ev.time < prev) {
                out.push_back({seq.seq_id, "unordered times", idx});
            }
            if (ev.mark < 0 || ev.mark >= dataset.d) {
                out.push_back({seq.seq_id, "mark out of range", idx});
            }
            prev = ev.time;
        }
    }
    return out;
}

}  // namespace hawkes
