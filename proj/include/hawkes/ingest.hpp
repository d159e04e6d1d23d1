#pragma once

#include "hawkes/types.hpp"

#include <string>
#include <vector>

namespace hawkes {

/// Maps one measurement to one event type via an abnormality predicate.
struct ThresholdRule {
    enum class Kind { greater, less, outside };

    std::string event_name;
    std::string measurement;
    Kind kind{Kind::greater};
    double lo{0.0};  // greater/less use lo; outside uses (lo, hi)
    double hi{0.0};

    bool abnormal(double value) const;
    void validate() const;
};

/// Per-patient observation window around an anchor measurement, in hours.
struct WindowSpec {
    std::string anchor_column;
    double before{0.0};
    double after{0.0};

    void validate() const;
};

struct MeasurementRow {
    std::string patient_id;
    double time{0.0};  // hours
    std::string measurement;
    double value{0.0};
};

/// CSV with header patient_id,time,measurement,value. Times are either plain
/// real hours or ISO-8601 timestamps; the format is auto-detected from the
/// first data row and ISO times are converted to hours.
std::vector<MeasurementRow> read_measurements(const std::string& path);

struct EventizeResult {
    Dataset dataset;
    int patients_skipped{0};                  // missing anchor
    std::vector<std::string> inert_measurements;  // referenced by a rule, absent from data
};

/// Per patient: clip to the window, bin values at bin_hours taking per-bin
/// means, and emit one event per (bin, event type) whose constituent rules
/// flag any binned value as abnormal. Times are hours since window start.
EventizeResult eventize(const std::vector<MeasurementRow>& measurements,
                        const std::vector<ThresholdRule>& rules, const WindowSpec& window,
                        double bin_hours);

struct IngestConfig {
    std::vector<ThresholdRule> rules;
    WindowSpec window;
    double bin_hours{1.0};
};

/// JSON layout:
/// {"anchor_column": ..., "before": ..., "after": ..., "bin_hours": ...,
///  "rules": [{"event": ..., "measurement": ..., "greater": x}
///            | {... "less": x} | {... "outside": [lo, hi]}]}
IngestConfig load_ingest_config(const std::string& path);

}  // namespace hawkes
