#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cohere::csv {

// Shortest decimal text that parses back to exactly `value`.
std::string format(double value);

// Strict parse of a complete field ("." decimal point, no locale). Returns
// nullopt on malformed input. "nan"/"inf" parse and are left to the caller to
// reject.
std::optional<double> parse(std::string_view field);

// Splits one line on commas. No quoting: none of the formats here need it.
std::vector<std::string_view> split(std::string_view line);

// Writes `text` to `path`, creating parent directories. Throws Error{io}.
void write_file(const std::filesystem::path& path, std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace cohere::csv
