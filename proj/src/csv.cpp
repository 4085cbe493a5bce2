#include "eqdisc/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eqdisc/errors.hpp"
#include "eqdisc/util.hpp"

namespace eqdisc {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t file_line, std::size_t column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0'))
    throw ParseError("non-numeric cell '" + cell + "' at line " + std::to_string(file_line) +
                     ", column " + std::to_string(column + 1));
  return v;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column '" + name + "' in CSV header");
  return static_cast<std::size_t>(it - header.begin());
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvLayout& layout) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open CSV file '" + path.string() + "'");
  if (layout.components.empty())
    throw SchemaError("CSV layout must name at least one component column");

  std::string line;
  std::size_t file_line = 0;
  // Header (first non-comment line).
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++file_line;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    for (auto& h : split_row(t)) header.push_back(trim(h));
    break;
  }
  if (header.empty()) throw SchemaError("CSV file '" + path.string() + "' has no header row");

  const std::size_t time_col = find_column(header, layout.time_column);
  std::optional<std::size_t> space_col;
  if (layout.space_column) space_col = find_column(header, *layout.space_column);
  std::vector<std::size_t> comp_cols, cov_cols;
  for (const auto& c : layout.components) comp_cols.push_back(find_column(header, c));
  for (const auto& c : layout.covariates) cov_cols.push_back(find_column(header, c));

  struct Row {
    double x;
    double t;
    std::vector<double> vals;  // components then covariates
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++file_line;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split_row(t);
    if (cells.size() != header.size())
      throw SchemaError("row at line " + std::to_string(file_line) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
    Row r;
    r.t = parse_cell(trim(cells[time_col]), file_line, time_col);
    r.x = space_col ? parse_cell(trim(cells[*space_col]), file_line, *space_col) : 0.0;
    r.vals.reserve(comp_cols.size() + cov_cols.size());
    for (std::size_t c : comp_cols) r.vals.push_back(parse_cell(trim(cells[c]), file_line, c));
    for (std::size_t c : cov_cols) r.vals.push_back(parse_cell(trim(cells[c]), file_line, c));
    for (double v : r.vals) {
      if (!std::isfinite(v))
        throw ParseError("non-finite value at line " + std::to_string(file_line));
    }
    if (!std::isfinite(r.t) || !std::isfinite(r.x))
      throw ParseError("non-finite coordinate at line " + std::to_string(file_line));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw SchemaError("CSV file '" + path.string() + "' has no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.t < b.t;
  });
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].x == rows[i + 1].x && rows[i].t == rows[i + 1].t)
      throw GeometryError("duplicate coordinate (x=" + format_double(rows[i].x) +
                          ", t=" + format_double(rows[i].t) + ")");
  }

  // Unique spatial coordinates and the reference time axis.
  std::vector<double> xs;
  for (const Row& r : rows) {
    if (xs.empty() || xs.back() != r.x) xs.push_back(r.x);
  }
  const std::size_t S = xs.size();
  if (rows.size() % S != 0)
    throw GeometryError("incomplete grid: row count is not a multiple of the spatial size");
  const std::size_t T = rows.size() / S;
  std::vector<double> times(T);
  for (std::size_t t = 0; t < T; ++t) times[t] = rows[t].t;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t t = 0; t < T; ++t) {
      const Row& r = rows[s * T + t];
      if (r.x != xs[s] || r.t != times[t])
        throw GeometryError("incomplete grid: every spatial location needs the same times");
    }
  }
  for (std::size_t t = 0; t + 1 < T; ++t) {
    if (!(times[t] < times[t + 1]))
      throw GeometryError("time axis is not strictly increasing after sorting");
  }

  Grid grid = space_col ? Grid::spatiotemporal(xs, times) : Grid::temporal(times);
  const std::size_t N = comp_cols.size();
  const std::size_t C = cov_cols.size();
  std::vector<double> values(S * T * N);
  std::vector<double> covs(S * T * C);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t t = 0; t < T; ++t) {
      const Row& r = rows[s * T + t];
      for (std::size_t n = 0; n < N; ++n) values[(n * S + s) * T + t] = r.vals[n];
      for (std::size_t c = 0; c < C; ++c) covs[(c * S + s) * T + t] = r.vals[N + c];
    }
  }
  return Dataset(std::move(grid), layout.components, std::move(values), layout.covariates,
                 std::move(covs));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open CSV file '" + path.string() + "'");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    for (auto& h : split_row(t)) header.push_back(trim(h));
    break;
  }
  in.close();
  if (header.empty()) throw SchemaError("CSV file '" + path.string() + "' has no header row");

  CsvLayout layout;
  layout.time_column = "t";
  for (const auto& h : header) {
    if (h == "t") continue;
    if (h == "x") {
      layout.space_column = "x";
      continue;
    }
    layout.components.push_back(h);
  }
  return load_csv(path, layout);
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw SchemaError("cannot write CSV file '" + path.string() + "'");
    out << "t";
    if (data.grid().has_space()) out << ",x";
    for (const auto& n : data.component_names()) out << "," << n;
    for (const auto& c : data.covariate_names()) out << "," << c;
    out << "\n";
    const std::size_t S = data.num_space();
    const std::size_t T = data.num_times();
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t t = 0; t < T; ++t) {
        out << format_g17(data.grid().times()[t]);
        if (data.grid().has_space()) out << "," << format_g17(data.grid().spatial_coords()[s]);
        for (std::size_t n = 0; n < data.num_components(); ++n)
          out << "," << format_g17(data.value(s, t, n));
        for (std::size_t c = 0; c < data.num_covariates(); ++c)
          out << "," << format_g17(data.covariate(s, t, c));
        out << "\n";
      }
    }
    if (!out) throw SchemaError("I/O failure while writing '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace eqdisc
