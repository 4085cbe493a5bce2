#include "eqdisc/library.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "eqdisc/errors.hpp"
#include "eqdisc/kernels.hpp"
#include "eqdisc/util.hpp"

namespace eqdisc {

namespace {

std::string monomial_descriptor(const std::vector<std::string>& components,
                                const std::vector<int>& exponents) {
  std::string desc;
  for (std::size_t n = 0; n < exponents.size(); ++n) {
    if (exponents[n] == 0) continue;
    if (!desc.empty()) desc += "·";
    desc += components[n];
    if (exponents[n] > 1) desc += "^" + std::to_string(exponents[n]);
  }
  return desc;
}

// Exponent vectors of total degree `degree`, lexicographically descending in
// the leading component; combined with the outer degree loop this yields the
// graded-lex order.
void enumerate_exponents(int n_components, int degree, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  const int pos = static_cast<int>(current.size());
  if (pos == n_components - 1) {
    current.push_back(degree);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current.push_back(e);
    enumerate_exponents(n_components, degree - e, current, out);
    current.pop_back();
  }
}

std::string trig_descriptor(const char* fn, double frequency, const std::string& component) {
  if (frequency == 1.0) return std::string(fn) + "(" + component + ")";
  return std::string(fn) + "(" + format_double(frequency) + "·" + component + ")";
}

std::string derivative_suffix(int order) { return order == 1 ? "_x" : "_xx"; }

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// --- descriptor parsing ------------------------------------------------

// Splits on "·" (UTF-8 0xC2 0xB7) outside parentheses.
std::vector<std::string> split_factors(const std::string& desc) {
  std::vector<std::string> factors;
  std::string current;
  int depth = 0;
  for (std::size_t i = 0; i < desc.size(); ++i) {
    unsigned char c = desc[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && c == 0xC2 && i + 1 < desc.size() &&
        static_cast<unsigned char>(desc[i + 1]) == 0xB7) {
      factors.push_back(current);
      current.clear();
      ++i;
      continue;
    }
    current += static_cast<char>(c);
  }
  factors.push_back(current);
  return factors;
}

struct ColumnBuffer {
  std::vector<double> values;
};

std::vector<double> component_or_covariate(const std::string& name, const Dataset& data) {
  if (int idx = data.component_index(name); idx >= 0) {
    auto col = data.component_column(static_cast<std::size_t>(idx));
    return {col.begin(), col.end()};
  }
  if (int idx = data.covariate_index(name); idx >= 0) {
    auto col = data.covariate_column(static_cast<std::size_t>(idx));
    return {col.begin(), col.end()};
  }
  throw SchemaError("descriptor references unknown name '" + name + "'");
}

std::vector<double> evaluate_factor(const std::string& factor, const Dataset& data,
                                    const DerivativeField& derivs) {
  const std::size_t rows = data.num_rows();
  if (factor == "1") return std::vector<double>(rows, 1.0);

  if (factor.rfind("sin(", 0) == 0 || factor.rfind("cos(", 0) == 0) {
    if (factor.back() != ')') throw SchemaError("malformed trig factor '" + factor + "'");
    const bool is_sin = factor[0] == 's';
    std::string arg = factor.substr(4, factor.size() - 5);
    double freq = 1.0;
    auto factors = split_factors(arg);
    std::string name;
    if (factors.size() == 2) {
      char* end = nullptr;
      freq = std::strtod(factors[0].c_str(), &end);
      if (end == factors[0].c_str() || *end != '\0')
        throw SchemaError("malformed trig frequency in '" + factor + "'");
      name = factors[1];
    } else if (factors.size() == 1) {
      name = factors[0];
    } else {
      throw SchemaError("malformed trig factor '" + factor + "'");
    }
    std::vector<double> col = component_or_covariate(name, data);
    std::vector<double> scaled(rows);
    kernels::scale(col.data(), freq, scaled.data(), rows);
    std::vector<double> out(rows);
    if (is_sin)
      kernels::sin_array(scaled.data(), out.data(), rows);
    else
      kernels::cos_array(scaled.data(), out.data(), rows);
    return out;
  }

  // name, name^k, name_x, name_xx
  std::string base = factor;
  int power = 1;
  if (auto caret = factor.find('^'); caret != std::string::npos) {
    base = factor.substr(0, caret);
    try {
      power = std::stoi(factor.substr(caret + 1));
    } catch (const std::exception&) {
      throw SchemaError("malformed exponent in '" + factor + "'");
    }
    if (power < 1) throw SchemaError("exponent must be positive in '" + factor + "'");
  }

  std::vector<double> col;
  if (base.size() > 3 && base.compare(base.size() - 3, 3, "_xx") == 0) {
    std::string name = base.substr(0, base.size() - 3);
    int idx = data.component_index(name);
    if (idx < 0) throw SchemaError("descriptor references unknown component '" + name + "'");
    if (!derivs.has_spatial(2))
      throw SchemaError("library needs the order-2 spatial derivative, which is missing");
    auto span = derivs.spatial_column(2, static_cast<std::size_t>(idx));
    col.assign(span.begin(), span.end());
  } else if (base.size() > 2 && base.compare(base.size() - 2, 2, "_x") == 0) {
    std::string name = base.substr(0, base.size() - 2);
    int idx = data.component_index(name);
    if (idx < 0) throw SchemaError("descriptor references unknown component '" + name + "'");
    if (!derivs.has_spatial(1))
      throw SchemaError("library needs the order-1 spatial derivative, which is missing");
    auto span = derivs.spatial_column(1, static_cast<std::size_t>(idx));
    col.assign(span.begin(), span.end());
  } else {
    col = component_or_covariate(base, data);
  }

  if (power == 1) return col;
  std::vector<double> out = col;
  for (int k = 1; k < power; ++k) kernels::mul(out.data(), col.data(), out.data(), rows);
  return out;
}

}  // namespace

void LibrarySpec::validate() const {
  if (poly_degree < 0) throw ConfigError("poly_degree must be non-negative");
  for (int o : derivative_orders) {
    if (o != 1 && o != 2) throw ConfigError("derivative orders must be 1 or 2");
  }
  for (int o : interaction_orders) {
    if (std::find(derivative_orders.begin(), derivative_orders.end(), o) ==
        derivative_orders.end())
      throw ConfigError("interaction orders must be a subset of derivative_orders");
  }
  for (double f : trig_frequencies) {
    if (!(f > 0.0)) throw ConfigError("trig frequencies must be positive");
  }
  const bool any = include_constant || poly_degree > 0 || !trig_frequencies.empty() ||
                   !derivative_orders.empty() || include_covariates;
  if (!any) throw ConfigError("library spec enables no terms");
}

std::vector<std::string> library_descriptors(const std::vector<std::string>& components,
                                             const std::vector<std::string>& covariates,
                                             const LibrarySpec& spec) {
  spec.validate();
  std::vector<std::string> out;
  if (spec.include_constant) out.push_back("1");

  std::vector<std::vector<int>> exponents;
  for (int degree = 1; degree <= spec.poly_degree; ++degree) {
    std::vector<int> current;
    enumerate_exponents(static_cast<int>(components.size()), degree, current, exponents);
  }
  std::vector<std::string> monomials;
  for (const auto& e : exponents) monomials.push_back(monomial_descriptor(components, e));
  out.insert(out.end(), monomials.begin(), monomials.end());

  for (double f : spec.trig_frequencies) {
    for (const auto& c : components) {
      out.push_back(trig_descriptor("sin", f, c));
      out.push_back(trig_descriptor("cos", f, c));
    }
  }

  const auto deriv_orders = sorted_unique(spec.derivative_orders);
  for (int order : deriv_orders) {
    for (const auto& c : components) out.push_back(c + derivative_suffix(order));
  }

  for (int order : sorted_unique(spec.interaction_orders)) {
    for (const auto& c : components) {
      const std::string deriv = c + derivative_suffix(order);
      for (const auto& m : monomials) out.push_back(m + "·" + deriv);
    }
  }

  if (spec.include_covariates) {
    for (const auto& c : covariates) out.push_back(c);
  }

  std::set<std::string> seen(out.begin(), out.end());
  if (seen.size() != out.size()) throw SchemaError("library descriptors are not unique");
  if (out.empty()) throw ConfigError("library spec produced no columns");
  return out;
}

std::vector<double> evaluate_descriptor(const std::string& descriptor, const Dataset& data,
                                        const DerivativeField& derivs) {
  if (descriptor.empty()) throw SchemaError("empty descriptor");
  const std::size_t rows = data.num_rows();
  auto factors = split_factors(descriptor);
  std::vector<double> out = evaluate_factor(factors[0], data, derivs);
  for (std::size_t i = 1; i < factors.size(); ++i) {
    std::vector<double> f = evaluate_factor(factors[i], data, derivs);
    kernels::mul(out.data(), f.data(), out.data(), rows);
  }
  return out;
}

DesignMatrix build_library(const Dataset& data, const DerivativeField& derivs,
                           const LibrarySpec& spec) {
  if (data.values().size() != derivs.data().values().size() ||
      data.grid().times() != derivs.data().grid().times())
    throw SchemaError("dataset does not match the derivative field's source");

  DesignMatrix F;
  F.descriptors = library_descriptors(data.component_names(), data.covariate_names(), spec);
  const std::size_t rows = data.num_rows();
  F.matrix.resize(static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(F.descriptors.size()));
  for (std::size_t d = 0; d < F.descriptors.size(); ++d) {
    std::vector<double> col = evaluate_descriptor(F.descriptors[d], data, derivs);
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::isfinite(col[r]))
        throw NumericError("library column '" + F.descriptors[d] +
                           "' contains a non-finite value");
      F.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = col[r];
    }
  }
  return F;
}

ResponseMatrix build_response(const DerivativeField& derivs, int order) {
  if (!derivs.has_temporal(order))
    throw SchemaError("response needs the order-" + std::to_string(order) +
                      " temporal derivative, which is missing");
  const Dataset& data = derivs.data();
  ResponseMatrix U;
  U.order = order;
  const std::size_t rows = data.num_rows();
  const std::size_t N = data.num_components();
  U.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(N));
  for (std::size_t n = 0; n < N; ++n) {
    auto col = derivs.temporal_column(order, n);
    for (std::size_t r = 0; r < rows; ++r)
      U.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n)) = col[r];
    const std::string& name = data.component_names()[n];
    U.lhs.push_back(order == 1 ? "d(" + name + ")/dt"
                               : "d" + std::to_string(order) + "(" + name + ")/dt" +
                                     std::to_string(order));
  }
  return U;
}

DesignMatrix normalize_columns(const DesignMatrix& F) {
  DesignMatrix out;
  out.descriptors = F.descriptors;
  out.matrix = F.matrix;
  out.column_norms.assign(F.descriptors.size(), 1.0);
  out.normalized = true;
  const std::size_t rows = static_cast<std::size_t>(F.matrix.rows());
  for (std::size_t d = 0; d < F.descriptors.size(); ++d) {
    if (F.descriptors[d] == "1") continue;  // constant column keeps its scale
    const double* col = F.matrix.col(static_cast<Eigen::Index>(d)).data();
    const double norm = std::sqrt(kernels::sum_squares(col, rows));
    if (norm == 0.0)
      throw DegenerateColumnError("library column '" + F.descriptors[d] +
                                  "' is identically zero");
    out.column_norms[d] = norm;
    for (std::size_t r = 0; r < rows; ++r)
      out.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) =
          F.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) / norm;
  }
  return out;
}

}  // namespace eqdisc
