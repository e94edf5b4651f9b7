#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace iterag {

// nlohmann::json with the default std::map object storage: object keys are
// kept sorted, so dump() of semantically equal objects is byte-identical.
using json = nlohmann::json;

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// Canonical serialization of a JSON value: sorted object keys (the default
/// map storage), no whitespace, shortest round-trip number formatting.
std::string canonical_dump(const json& value);

/// Canonical payload digest: 16 lowercase hex chars of fnv1a64(canonical_dump).
/// Field insertion order never affects the result.
std::string payload_digest(const json& payload);

/// Deterministically fold extra values into a seed. Used to derive per-call
/// seeds from a run seed, e.g. seed_combine(seed, iteration, subquery_index).
std::uint64_t seed_combine(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0x9e3779b97f4a7c15ULL);

/// Derive a seed from a string key (e.g. a question id).
std::uint64_t seed_combine(std::uint64_t seed, std::string_view key);

/// Read a whole file; throws iterag::Error if unreadable (message names the path).
std::string read_file(const std::string& path);

/// Read a line-delimited file, skipping blank lines. Line numbers in parse
/// errors are 1-based over the original file.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path);

/// Parse a JSON file; errors name the path.
json read_json_file(const std::string& path);

/// Write a file, creating parent directories.
void write_file(const std::string& path, const std::string& content);

/// Fail with ValidationError unless `value` is an object whose keys are a
/// subset of `allowed`; unknown keys are named in the message. `where`
/// prefixes the message.
void reject_unknown_keys(const json& value, const std::vector<std::string>& allowed,
                         const std::string& where);

} // namespace iterag
