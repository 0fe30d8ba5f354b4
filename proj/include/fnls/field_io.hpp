#pragma once

#include <filesystem>
#include <iosfwd>

#include "fnls/field.hpp"

namespace fnls {

/// Binary snapshot: one JSON header line {"dim","M","L","space","scalar_width"}
/// followed by little-endian doubles, interleaved (re, im), row-major.
void write_field(std::ostream& out, const Field& f);
Field read_field(std::istream& in);

/// Writes to a temporary sibling and renames it into place.
void save_field(const std::filesystem::path& path, const Field& f);
Field load_field(const std::filesystem::path& path);

/// Writes text to path atomically (temporary sibling + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace fnls
