#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cascade::io {

/// 17 significant digits, scientific notation. Every float written to a
/// CSV file goes through here so repeated runs are byte-identical.
std::string format_double(double x);

/// Writes one CSV row (LF terminated). Cells are written verbatim.
void write_row(std::ostream& out, std::span<const std::string> cells);

/// Writes "# key=value" comment lines ahead of a CSV header.
void write_comments(std::ostream& out, std::span<const std::string> lines);

std::string sha256_hex(std::string_view data);

inline constexpr std::string_view kVersion = "1.0.0";

}  // namespace cascade::io
