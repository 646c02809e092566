#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace sqtom {

// Ordered key/value pairs embedded in every CLI output file (seed, config
// hash, tool version). CSV files carry them as leading "# key=value" lines;
// JSON files as a "meta" object.
using Metadata = std::vector<std::pair<std::string, std::string>>;

namespace io {

// Shortest text that still round-trips doubles exactly: 17 significant digits.
std::string format_double(double v);

void write_meta_comments(std::ostream& os, const Metadata& meta);

// Parses leading "# key=value" comment lines, advancing past them; returns
// the collected pairs. Lines without '=' are ignored.
Metadata read_meta_comments(std::istream& is, std::string& first_data_line);

std::string json_escape(const std::string& s);

std::string meta_json(const Metadata& meta);  // {"k":"v",...}

}  // namespace io
}  // namespace sqtom
