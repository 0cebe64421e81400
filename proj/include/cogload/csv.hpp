#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cogload::csv {

// Splits one data line on commas. The schemas in this project never embed
// commas or quotes, so no quoting rules apply.
std::vector<std::string_view> split(std::string_view line);

// Reads the next line, stripping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

// Shortest decimal representation that parses back to the same double.
// Every CSV this project writes uses it, which keeps golden files stable.
std::string format_double(double value);

// Strict full-token numeric parses; nullopt on any trailing garbage.
std::optional<double> to_double(std::string_view token);
std::optional<long long> to_int(std::string_view token);

}  // namespace cogload::csv
