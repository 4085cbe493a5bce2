#include "eqdisc/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {

// Returns (uniform, step). step is the mean gap; uniform when every gap is
// within 1e-9 of it.
std::pair<bool, double> classify_axis(const std::vector<double>& coords) {
  if (coords.size() < 2) return {false, 0.0};
  double step = (coords.back() - coords.front()) / static_cast<double>(coords.size() - 1);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < coords.size(); ++i) {
    worst = std::max(worst, std::fabs(coords[i + 1] - coords[i] - step));
  }
  return {worst <= 1e-9 * step, step};
}

void require_strictly_increasing(const std::vector<double>& coords, const char* what) {
  for (double v : coords) {
    if (!std::isfinite(v)) throw GeometryError(std::string(what) + " contains a non-finite value");
  }
  for (std::size_t i = 0; i + 1 < coords.size(); ++i) {
    if (!(coords[i] < coords[i + 1]))
      throw GeometryError(std::string(what) + " must be strictly increasing");
  }
}

bool identifier_like(const std::string& name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

void validate_names(const std::vector<std::string>& names, const char* what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!identifier_like(n))
      throw SchemaError(std::string(what) + " name '" + n + "' is not a valid identifier");
    if (n == "t" || n == "x")
      throw SchemaError(std::string(what) + " name '" + n + "' collides with a coordinate column");
    if (!seen.insert(n).second)
      throw SchemaError(std::string(what) + " name '" + n + "' is duplicated");
  }
}

}  // namespace

Grid Grid::temporal(std::vector<double> times) {
  Grid g;
  g.times_ = std::move(times);
  g.validate_and_classify();
  return g;
}

Grid Grid::spatiotemporal(std::vector<double> spatial_coords, std::vector<double> times) {
  Grid g;
  g.times_ = std::move(times);
  g.spatial_ = std::move(spatial_coords);
  g.has_space_ = true;
  g.validate_and_classify();
  return g;
}

void Grid::validate_and_classify() {
  if (times_.size() < 5) throw GeometryError("grid needs at least 5 time points");
  require_strictly_increasing(times_, "time axis");
  std::tie(uniform_dt_, dt_) = classify_axis(times_);
  if (has_space_) {
    if (spatial_.empty()) throw GeometryError("spatial axis must hold at least one coordinate");
    require_strictly_increasing(spatial_, "spatial axis");
    std::tie(uniform_dx_, dx_) = classify_axis(spatial_);
  }
}

Dataset::Dataset(Grid grid, std::vector<std::string> component_names,
                 std::vector<double> values, std::vector<std::string> covariate_names,
                 std::vector<double> covariates)
    : grid_(std::move(grid)),
      component_names_(std::move(component_names)),
      covariate_names_(std::move(covariate_names)),
      values_(std::move(values)),
      covariates_(std::move(covariates)) {
  if (component_names_.empty()) throw SchemaError("dataset needs at least one component");
  validate_names(component_names_, "component");
  validate_names(covariate_names_, "covariate");
  for (const auto& c : covariate_names_) {
    if (std::find(component_names_.begin(), component_names_.end(), c) !=
        component_names_.end())
      throw SchemaError("covariate name '" + c + "' collides with a component");
  }
  const std::size_t cells = grid_.num_space() * grid_.num_times();
  if (values_.size() != cells * component_names_.size())
    throw SchemaError("value array does not match the grid shape");
  if (covariates_.size() != cells * covariate_names_.size())
    throw SchemaError("covariate array does not match the grid shape");
  for (double v : values_) {
    if (!std::isfinite(v)) throw SchemaError("dataset contains a non-finite value");
  }
  for (double v : covariates_) {
    if (!std::isfinite(v)) throw SchemaError("covariates contain a non-finite value");
  }
}

int Dataset::component_index(const std::string& name) const {
  auto it = std::find(component_names_.begin(), component_names_.end(), name);
  return it == component_names_.end()
             ? -1
             : static_cast<int>(it - component_names_.begin());
}

int Dataset::covariate_index(const std::string& name) const {
  auto it = std::find(covariate_names_.begin(), covariate_names_.end(), name);
  return it == covariate_names_.end()
             ? -1
             : static_cast<int>(it - covariate_names_.begin());
}

void DerivativeField::set_temporal(int order, DerivArray arr) {
  if (arr.values.size() != data_.values().size())
    throw SchemaError("derivative array shape does not match its source");
  temporal_[order] = std::move(arr);
}

void DerivativeField::set_spatial(int order, DerivArray arr) {
  if (arr.values.size() != data_.values().size())
    throw SchemaError("derivative array shape does not match its source");
  spatial_[order] = std::move(arr);
}

}  // namespace eqdisc
