#pragma once

#include "hawkes/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace hawkes {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, long line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    long line() const { return line_; }

private:
    long line_;
};

// Events live in JSONL (header line with {"d","type_names"}, then one object
// per sequence) or in CSV with columns seq_id,time,mark; the format is chosen
// by the file extension. CSV carries no horizon/type metadata, so the horizon
// defaults to each sequence's last event time and d to the largest mark + 1.
Dataset read_events(const std::filesystem::path& path);
void write_events(const Dataset& dataset, const std::filesystem::path& path);

// Params file: single JSON object {"d","beta","mu","A"} with A row-major.
HawkesParams read_params(const std::filesystem::path& path);
void write_params(const HawkesParams& params, const std::filesystem::path& path);

}  // namespace hawkes
