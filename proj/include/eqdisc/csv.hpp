#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eqdisc/data.hpp"

namespace eqdisc {

/// Maps CSV columns onto the dataset fields. Column names refer to the
/// mandatory header row.
struct CsvLayout {
  std::string time_column = "t";
  std::optional<std::string> space_column;
  std::vector<std::string> components;
  std::vector<std::string> covariates;
};

/// Loads a complete rectilinear dataset. Rows are sorted by (space, time);
/// duplicate coordinates, incomplete grids, missing columns and unparseable
/// cells are errors. Lines starting with '#' are ignored.
Dataset load_csv(const std::filesystem::path& path, const CsvLayout& layout);

/// Convenience overload: column "t" is time, a column named "x" (if present)
/// is space, and every other column is a component.
Dataset load_csv(const std::filesystem::path& path);

/// Writes `t[,x],<components...>[,<covariates...>]` with one row per (s, t)
/// cell, space-major, 17 significant digits per value. load_csv(save_csv(d))
/// reproduces d exactly.
void save_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace eqdisc
