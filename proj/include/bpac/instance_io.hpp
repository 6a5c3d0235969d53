#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bpac/core.hpp"

namespace bpac {

// Instance file format (JSON, labels 0-indexed):
//   {"K": int, "m": int, "hypotheses": [[int, ...], ...],
//    "support": [{"x": int, "y": int, "p": float}, ...]}

/// Parses and validates. Throws ValidationError whose details carry
/// line-level diagnostics for syntax errors and one entry per violation.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::filesystem::path& path);

/// Deterministic serialization: identical instances give identical bytes.
std::string dump_instance(const Instance& instance);
void save_instance(const Instance& instance, const std::filesystem::path& path);

}  // namespace bpac
