#pragma once

#include "optcd/limits.hpp"

#include <filesystem>
#include <iosfwd>
#include <variant>

namespace optcd {

// Text limit tables. Header lines are "key value"; records follow, one per
// (n, knot) as "n y x value" for value grids and "n x value" for equivalent
// tables. Numbers use the shortest round-trip form, so a reload is bit-exact.
inline constexpr int kLimitTableFormatVersion = 1;

using LimitTable = std::variant<ValueGrid, EquivalentLimitTable>;

void write_limit_table(std::ostream& out, const ValueGrid& grid);
void write_limit_table(std::ostream& out, const EquivalentLimitTable& table);
LimitTable read_limit_table(std::istream& in);

void save_limit_table(const std::filesystem::path& path, const LimitTable& table);
// Throws MissingArtifact when the file does not exist.
LimitTable load_limit_table(const std::filesystem::path& path);

}  // namespace optcd
