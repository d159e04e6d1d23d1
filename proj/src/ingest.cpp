#include "hawkes/ingest.hpp"

#include "hawkes/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hawkes {

bool ThresholdRule::abnormal(double value) const {
    switch (kind) {
        case Kind::greater: return value > lo;
        case Kind::less: return value < lo;
        case Kind::outside: return value < lo || value > hi;
    }
    return false;
}

void ThresholdRule::validate() const {
    if (event_name.empty() || measurement.empty()) {
        throw std::invalid_argument("threshold rule: event name and measurement required");
    }
    if (kind == Kind::outside && !(lo < hi)) {
        throw std::invalid_argument("threshold rule: outside(lo, hi) requires lo < hi");
    }
}

void WindowSpec::validate() const {
    if (anchor_column.empty()) throw std::invalid_argument("window: anchor column required");
    if (before < 0.0 || after < 0.0 || !(before + after > 0.0)) {
        throw std::invalid_argument("window: before/after must be nonnegative with positive span");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

// days since 1970-01-01 (proleptic Gregorian)
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

// "YYYY-MM-DD[T ]HH:MM[:SS[.frac]]" -> hours since the epoch
bool parse_iso_hours(const std::string& s, double& out) {
    int y, mo, d, h, mi;
    double sec = 0.0;
    char sep;
    int consumed = 0;
    int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
    if (n < 6 || (sep != 'T' && sep != ' ')) return false;
    std::string rest = s.substr(static_cast<std::size_t>(consumed));
    if (!rest.empty()) {
        if (rest[0] != ':') return false;
        if (!parse_double(rest.substr(1), sec)) return false;
    }
    out = static_cast<double>(days_from_civil(y, mo, d)) * 24.0 + h + mi / 60.0 + sec / 3600.0;
    return true;
}

}  // namespace

std::vector<MeasurementRow> read_measurements(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
    ++lineno;
    {
        auto header = split_csv_line(line);
        const std::vector<std::string> expected{"patient_id", "time", "measurement", "value"};
        if (std::vector<std::string>(header.begin(), header.end()) != expected) {
            throw ParseError(path, lineno, "expected header patient_id,time,measurement,value");
        }
    }
    std::vector<MeasurementRow> rows;
    bool format_known = false;
    bool iso_format = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 4) throw ParseError(path, lineno, "expected 4 fields");
        MeasurementRow row;
        row.patient_id = f[0];
        row.measurement = f[2];
        if (!parse_double(f[3], row.value)) throw ParseError(path, lineno, "bad value");
        if (!format_known) {
            double tmp;
            iso_format = !parse_double(f[1], tmp);
            format_known = true;
        }
        const bool ok = iso_format ? parse_iso_hours(f[1], row.time) : parse_double(f[1], row.time);
        if (!ok) throw ParseError(path, lineno, "bad time");
        rows.push_back(std::move(row));
    }
    return rows;
}

EventizeResult eventize(const std::vector<MeasurementRow>& measurements,
                        const std::vector<ThresholdRule>& rules, const WindowSpec& window,
                        double bin_hours) {
    if (rules.empty()) throw std::invalid_argument("eventize: rules must be nonempty");
    if (!(bin_hours > 0.0)) throw std::invalid_argument("eventize: bin_hours must be positive");
    window.validate();
    for (const auto& rule : rules) rule.validate();

    // event types = distinct event names, order of first appearance
    std::vector<std::string> type_names;
    std::map<std::string, int> type_index;
    for (const auto& rule : rules) {
        if (type_index.emplace(rule.event_name, static_cast<int>(type_names.size())).second) {
            type_names.push_back(rule.event_name);
        }
    }

    std::set<std::string> seen_measurements;
    for (const auto& row : measurements) seen_measurements.insert(row.measurement);

    EventizeResult result;
    for (const auto& rule : rules) {
        if (!seen_measurements.count(rule.measurement)) {
            result.inert_measurements.push_back(rule.measurement);
        }
    }

    // group rows per patient, preserving input order within a patient
    std::map<std::string, std::vector<const MeasurementRow*>> by_patient;
    for (const auto& row : measurements) by_patient[row.patient_id].push_back(&row);

    const double horizon = window.before + window.after;
    Dataset out;
    out.d = static_cast<int>(type_names.size());
    out.type_names = type_names;

    for (const auto& [patient, rows] : by_patient) {
        const MeasurementRow* anchor = nullptr;
        for (const auto* row : rows) {
            if (row->measurement == window.anchor_column) {
                anchor = row;
                break;
            }
        }
        if (anchor == nullptr) {
            ++result.patients_skipped;
            continue;
        }
        const double start = anchor->time - window.before;

        // per-bin, per-measurement means over the clipped window
        std::map<std::pair<long long, std::string>, std::pair<double, int>> sums;
        for (const auto* row : rows) {
            const double rel = row->time - start;
            if (rel < 0.0 || rel > horizon) continue;
            const long long bin = static_cast<long long>(std::floor(rel / bin_hours));
            auto& acc = sums[{bin, row->measurement}];
            acc.first += row->value;
            acc.second += 1;
        }

        // OR-combine rules per (bin, event type)
        std::set<std::pair<long long, int>> fired;
        for (const auto& rule : rules) {
            const int type = type_index.at(rule.event_name);
            for (const auto& [key, acc] : sums) {
                if (key.second != rule.measurement) continue;
                if (rule.abnormal(acc.first / acc.second)) fired.insert({key.first, type});
            }
        }

        EventSequence seq;
        seq.seq_id = patient;
        seq.horizon = horizon;
        for (const auto& [bin, type] : fired) {
            seq.events.push_back({static_cast<double>(bin) * bin_hours, type});
        }
        std::sort(seq.events.begin(), seq.events.end(), [](const Event& a, const Event& b) {
            return a.time != b.time ? a.time < b.time : a.mark < b.mark;
        });
        out.sequences.push_back(std::move(seq));
    }
    result.dataset = std::move(out);
    return result;
}

IngestConfig load_ingest_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    IngestConfig config;
    try {
        config.window.anchor_column = j.at("anchor_column").get<std::string>();
        config.window.before = j.at("before").get<double>();
        config.window.after = j.at("after").get<double>();
        config.bin_hours = j.value("bin_hours", 1.0);
        for (const auto& r : j.at("rules")) {
            ThresholdRule rule;
            rule.event_name = r.at("event").get<std::string>();
            rule.measurement = r.at("measurement").get<std::string>();
            if (r.contains("greater")) {
                rule.kind = ThresholdRule::Kind::greater;
                rule.lo = r.at("greater").get<double>();
            } else if (r.contains("less")) {
                rule.kind = ThresholdRule::Kind::less;
                rule.lo = r.at("less").get<double>();
            } else if (r.contains("outside")) {
                rule.kind = ThresholdRule::Kind::outside;
                rule.lo = r.at("outside").at(0).get<double>();
                rule.hi = r.at("outside").at(1).get<double>();
            } else {
                throw ParseError(path, 0, "rule needs one of greater/less/outside");
            }
            rule.validate();
            config.rules.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    config.window.validate();
    if (config.rules.empty()) throw ParseError(path, 0, "rules must be nonempty");
    return config;
}

}  // namespace hawkes
