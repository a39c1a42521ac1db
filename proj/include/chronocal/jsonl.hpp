#pragma once

// Line-delimited JSON plumbing shared by the file readers and the CLI.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronocal/error.hpp"

namespace chronocal {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "chronocal";
inline constexpr const char* kToolVersion = "0.3.0";

/// Key of the optional header line written by the CLI. Readers skip it.
inline constexpr const char* kMetaKey = "_meta";

enum class ParseMode { kStrict, kLenient };

struct Diagnostic {
    std::size_t line = 0;  // 1-based, 0 when not tied to a line
    std::string message;
};

inline std::string format_diagnostic(const Diagnostic& d) {
    if (d.line == 0) return d.message;
    return "line " + std::to_string(d.line) + ": " + d.message;
}

/// Calls fn(line_number, object) for each non-blank, non-header line.
/// JSON syntax errors and non-object lines are routed to on_error.
inline void for_each_json_line(std::istream& in, const std::function<void(std::size_t, const json&)>& fn,
                               const std::function<void(Diagnostic)>& on_error) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            on_error({line_no, std::string("malformed JSON: ") + e.what()});
            continue;
        }
        if (!obj.is_object()) {
            on_error({line_no, "record must be a JSON object"});
            continue;
        }
        if (obj.contains(kMetaKey)) continue;
        fn(line_no, obj);
    }
}

/// Shared strict/lenient policy: strict aborts on the first diagnostic,
/// lenient collects it and moves on.
class DiagnosticSink {
public:
    DiagnosticSink(ParseMode mode, std::string source) : mode_(mode), source_(std::move(source)) {}

    void report(Diagnostic d) {
        if (mode_ == ParseMode::kStrict) throw ValidationError(prefix() + format_diagnostic(d));
        diagnostics_.push_back(std::move(d));
    }
    /// Reported in both modes; the record is dropped but parsing continues.
    void note(Diagnostic d) { diagnostics_.push_back(std::move(d)); }
    [[noreturn]] void fatal(const Diagnostic& d) const { throw ValidationError(prefix() + format_diagnostic(d)); }

    ParseMode mode() const { return mode_; }
    std::vector<Diagnostic> take() { return std::move(diagnostics_); }

private:
    std::string prefix() const { return source_.empty() ? std::string() : source_ + ": "; }

    ParseMode mode_;
    std::string source_;
    std::vector<Diagnostic> diagnostics_;
};

// Typed field access with schema diagnostics.

inline const json& require_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) throw ValidationError(std::string("missing required field '") + key + "'");
    return *it;
}

inline std::string require_string(const json& obj, const char* key) {
    const json& v = require_field(obj, key);
    if (!v.is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

inline double require_number(const json& obj, const char* key) {
    const json& v = require_field(obj, key);
    if (!v.is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

inline std::optional<std::string> optional_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

inline std::optional<double> optional_number(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

inline std::vector<std::string> require_string_list(const json& obj, const char* key) {
    const json& v = require_field(obj, key);
    if (!v.is_array()) throw ValidationError(std::string("field '") + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw ValidationError(std::string("field '") + key + "' must be a list of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

/// 64-bit FNV-1a, used for feature hashing and config digests.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex_digest(std::string_view s) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

/// Writes the full contents to `path` via a sibling temp file and rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw ValidationError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ValidationError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file '" + path.string() + "'");
    return in;
}

}  // namespace chronocal
