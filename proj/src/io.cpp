#include "hawkes/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace hawkes {

namespace {

using nlohmann::json;

json parse_line(const std::filesystem::path& path, long line_no, const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(path.string(), line_no, "malformed JSON");
    }
    return j;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

Dataset read_events_jsonl(const std::filesystem::path& path) {
    auto in = open_in(path);
    Dataset ds;
    std::string line;
    long line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(path, line_no, line);
        if (!saw_header) {
            if (!j.contains("d")) {
                throw ParseError(path.string(), line_no, "first line must carry the {\"d\", \"type_names\"} header");
            }
            ds.d = j.at("d").get<int>();
            if (j.contains("type_names")) {
                ds.type_names = j.at("type_names").get<std::vector<std::string>>();
            } else {
                ds.type_names = default_type_names(ds.d);
            }
            if (ds.type_names.size() != static_cast<std::size_t>(ds.d)) {
                throw ParseError(path.string(), line_no, "type_names length does not match d");
            }
            saw_header = true;
            continue;
        }
        EventSequence seq;
        try {
            seq.seq_id = j.at("seq_id").get<std::string>();
            seq.horizon = j.at("horizon").get<double>();
            for (const auto& ev : j.at("events")) {
                if (!ev.is_array() || ev.size() != 2 || !ev[0].is_number() || !ev[1].is_number_integer()) {
                    throw ParseError(path.string(), line_no, "event entries must be [time, mark] pairs");
                }
                seq.events.push_back({ev[0].get<double>(), ev[1].get<int>()});
            }
        } catch (const json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        for (const auto& ev : seq.events) {
            if (ev.mark < 0 || ev.mark >= ds.d) {
                throw ParseError(path.string(), line_no, "mark " + std::to_string(ev.mark) + " inconsistent with d=" + std::to_string(ds.d));
            }
        }
        ds.sequences.push_back(std::move(seq));
    }
    if (!saw_header) {
        throw ParseError(path.string(), line_no, "empty events file");
    }
    return ds;
}

Dataset read_events_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    long line_no = 0;
    // ordered by first appearance
    std::vector<std::string> order;
    std::map<std::string, EventSequence> by_id;
    int max_mark = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("seq_id", 0) == 0) continue;  // header
        std::istringstream ss(line);
        std::string seq_id, time_s, mark_s;
        if (!std::getline(ss, seq_id, ',') || !std::getline(ss, time_s, ',') || !std::getline(ss, mark_s)) {
            throw ParseError(path.string(), line_no, "expected seq_id,time,mark");
        }
        double t;
        int mark;
        try {
            std::size_t pos = 0;
            t = std::stod(time_s, &pos);
            if (pos != time_s.size()) throw std::invalid_argument(time_s);
            mark = std::stoi(mark_s, &pos);
            if (pos != mark_s.size()) throw std::invalid_argument(mark_s);
        } catch (const std::exception&) {
            throw ParseError(path.string(), line_no, "non-numeric time or mark");
        }
        if (!by_id.count(seq_id)) order.push_back(seq_id);
        auto& seq = by_id[seq_id];
        seq.seq_id = seq_id;
        seq.events.push_back({t, mark});
        max_mark = std::max(max_mark, mark);
    }
    Dataset ds;
    ds.d = max_mark + 1;
    if (ds.d <= 0) throw ParseError(path.string(), line_no, "no events in CSV file");
    ds.type_names = default_type_names(ds.d);
    for (const auto& id : order) {
        auto seq = by_id[id];
        std::stable_sort(seq.events.begin(), seq.events.end(),
                         [](const Event& a, const Event& b) { return a.time < b.time; });
        seq.horizon = seq.events.empty() ? 0.0 : seq.events.back().time;
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

}  // namespace

Dataset read_events(const std::filesystem::path& path) {
    if (path.extension() == ".csv") return read_events_csv(path);
    return read_events_jsonl(path);
}

void write_events(const Dataset& dataset, const std::filesystem::path& path) {
    auto out = open_out(path);
    json header{{"d", dataset.d}, {"type_names", dataset.type_names}};
    out << header.dump() << '\n';
    for (const auto& seq : dataset.sequences) {
        json events = json::array();
        for (const auto& ev : seq.events) events.push_back({ev.time, ev.mark});
        json j{{"seq_id", seq.seq_id}, {"horizon", seq.horizon}, {"events", std::move(events)}};
        out << j.dump() << '\n';
    }
}

HawkesParams read_params(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError(path.string(), 1, "malformed JSON");
    HawkesParams p;
    int d;
    try {
        d = j.at("d").get<int>();
        p.beta = j.at("beta").get<double>();
        auto mu = j.at("mu").get<std::vector<double>>();
        auto rows = j.at("A").get<std::vector<std::vector<double>>>();
        if (static_cast<int>(mu.size()) != d || static_cast<int>(rows.size()) != d) {
            throw std::invalid_argument("mu/A dimensions inconsistent with d");
        }
        p.mu = Eigen::Map<Eigen::VectorXd>(mu.data(), d);
        p.A.resize(d, d);
        for (int i = 0; i < d; ++i) {
            if (static_cast<int>(rows[i].size()) != d) {
                throw std::invalid_argument("A row " + std::to_string(i) + " has wrong length");
            }
            for (int k = 0; k < d; ++k) p.A(i, k) = rows[i][k];
        }
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    p.validate();
    return p;
}

void write_params(const HawkesParams& params, const std::filesystem::path& path) {
    auto out = open_out(path);
    const int d = params.dim();
    json rows = json::array();
    for (int i = 0; i < d; ++i) {
        json row = json::array();
        for (int k = 0; k < d; ++k) row.push_back(params.A(i, k));
        rows.push_back(std::move(row));
    }
    json j{{"d", d},
           {"beta", params.beta},
           {"mu", std::vector<double>(params.mu.data(), params.mu.data() + d)},
           {"A", std::move(rows)}};
    out << j.dump(2) << '\n';
}

}  // namespace hawkes
