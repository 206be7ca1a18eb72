#pragma once

// Flat key=value text files: run manifests, dataset manifests, config files
// and metric reports. '#' starts a comment line; keys are written sorted.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace auw {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& origin = "<text>");
KeyValues read_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Shortest round-trip decimal form.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& what);
std::uint64_t parse_u64(const std::string& s, const std::string& what);

}  // namespace auw
