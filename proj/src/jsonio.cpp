#include "iterag/jsonio.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iterag/error.hpp"

namespace iterag {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string canonical_dump(const json& value) {
    return value.dump();
}

std::string payload_digest(const json& payload) {
    const std::uint64_t h = fnv1a64(canonical_dump(payload));
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) {
        out[15 - i] = hex[(h >> (4 * i)) & 0xf];
    }
    return out;
}

std::uint64_t seed_combine(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64-style mixing keeps derived seeds well separated.
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(seed ^ mix(a) ^ (mix(b) << 1));
}

std::uint64_t seed_combine(std::uint64_t seed, std::string_view key) {
    return seed_combine(seed, fnv1a64(key));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read file: " + path);
    }
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        lines.emplace_back(lineno, line);
    }
    return lines;
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error("invalid JSON in " + path + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write file: " + path);
    }
    out << content;
    if (!out) {
        throw Error("write failed: " + path);
    }
}

void reject_unknown_keys(const json& value, const std::vector<std::string>& allowed,
                         const std::string& where) {
    if (!value.is_object()) {
        throw ValidationError(where + ": expected an object");
    }
    for (const auto& [key, _] : value.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError(where + ": unknown key \"" + key + "\"");
        }
    }
}

} // namespace iterag
