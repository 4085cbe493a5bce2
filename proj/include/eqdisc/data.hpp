#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace eqdisc {

/// Rectilinear space-time geometry shared by all observed fields.
///
/// `times` has length T >= 5 and is strictly increasing. The spatial axis is
/// optional (absent for pure ODE data). Uniform spacing is detected at
/// construction: the axis is flagged uniform when every gap deviates from the
/// mean gap by at most 1e-9 of it.
class Grid {
 public:
  static Grid temporal(std::vector<double> times);
  static Grid spatiotemporal(std::vector<double> spatial_coords, std::vector<double> times);

  std::size_t num_times() const { return times_.size(); }
  std::size_t num_space() const { return has_space_ ? spatial_.size() : 1; }
  bool has_space() const { return has_space_; }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& spatial_coords() const { return spatial_; }

  bool uniform_dt() const { return uniform_dt_; }
  bool uniform_dx() const { return uniform_dx_; }
  double dt() const { return dt_; }
  double dx() const { return dx_; }

  bool operator==(const Grid&) const = default;

 private:
  Grid() = default;
  void validate_and_classify();

  std::vector<double> times_;
  std::vector<double> spatial_;
  bool has_space_ = false;
  bool uniform_dt_ = false;
  bool uniform_dx_ = false;
  double dt_ = 0.0;
  double dx_ = 0.0;
};

/// Observed field u(s, t, n) plus optional covariates, immutable after
/// construction. Values are stored component-major, space-major within a
/// component: value(s, t, n) = values[(n*S + s)*T + t]. With that layout the
/// flattened row index r = s*T + t matches the row order of the design and
/// response matrices, each component's (S*T)-long block is already in row
/// order, and every (s, n) time series is contiguous.
class Dataset {
 public:
  Dataset(Grid grid, std::vector<std::string> component_names, std::vector<double> values,
          std::vector<std::string> covariate_names = {},
          std::vector<double> covariates = {});

  const Grid& grid() const { return grid_; }
  std::size_t num_space() const { return grid_.num_space(); }
  std::size_t num_times() const { return grid_.num_times(); }
  std::size_t num_components() const { return component_names_.size(); }
  std::size_t num_covariates() const { return covariate_names_.size(); }
  std::size_t num_rows() const { return num_space() * num_times(); }

  const std::vector<std::string>& component_names() const { return component_names_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& covariates() const { return covariates_; }

  double value(std::size_t s, std::size_t t, std::size_t n) const {
    return values_[(n * num_space() + s) * num_times() + t];
  }
  double covariate(std::size_t s, std::size_t t, std::size_t c) const {
    return covariates_[(c * num_space() + s) * num_times() + t];
  }

  /// Contiguous time series of component n at spatial index s.
  std::span<const double> time_series(std::size_t s, std::size_t n) const {
    return {values_.data() + (n * num_space() + s) * num_times(), num_times()};
  }
  /// Component n flattened over rows r = s*T + t.
  std::span<const double> component_column(std::size_t n) const {
    return {values_.data() + n * num_rows(), num_rows()};
  }
  std::span<const double> covariate_column(std::size_t c) const {
    return {covariates_.data() + c * num_rows(), num_rows()};
  }

  int component_index(const std::string& name) const;  // -1 when absent
  int covariate_index(const std::string& name) const;

  bool operator==(const Dataset&) const = default;

 private:
  Grid grid_;
  std::vector<std::string> component_names_;
  std::vector<std::string> covariate_names_;
  std::vector<double> values_;
  std::vector<double> covariates_;
};

/// One differentiated array, laid out exactly like Dataset::values.
struct DerivArray {
  std::vector<double> values;
  std::string method;
};

/// Derivatives of a dataset. `data` is the source restricted to the valid
/// region (identical to the input unless the trim boundary policy shrank the
/// grid); every array matches its shape.
class DerivativeField {
 public:
  explicit DerivativeField(Dataset data) : data_(std::move(data)) {}

  const Dataset& data() const { return data_; }

  bool has_temporal(int order) const { return temporal_.count(order) > 0; }
  bool has_spatial(int order) const { return spatial_.count(order) > 0; }
  const DerivArray& temporal(int order) const { return temporal_.at(order); }
  const DerivArray& spatial(int order) const { return spatial_.at(order); }

  std::span<const double> temporal_column(int order, std::size_t n) const {
    const auto& v = temporal_.at(order).values;
    return {v.data() + n * data_.num_rows(), data_.num_rows()};
  }
  std::span<const double> spatial_column(int order, std::size_t n) const {
    const auto& v = spatial_.at(order).values;
    return {v.data() + n * data_.num_rows(), data_.num_rows()};
  }

  void set_temporal(int order, DerivArray arr);
  void set_spatial(int order, DerivArray arr);

 private:
  Dataset data_;
  std::map<int, DerivArray> temporal_;
  std::map<int, DerivArray> spatial_;
};

}  // namespace eqdisc
