#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "eqdisc/data.hpp"

namespace eqdisc {

/// Which candidate terms go into the design matrix. Canonical column order:
/// constant, monomials in graded-lex order, trig terms, spatial-derivative
/// terms, monomial-derivative products, covariates.
struct LibrarySpec {
  int poly_degree = 2;  // all monomials in the components up to this total degree
  bool include_constant = true;
  std::vector<double> trig_frequencies;  // adds sin(k*u_n), cos(k*u_n) per component
  std::vector<int> derivative_orders;    // spatial orders, subset of {1, 2}
  std::vector<int> interaction_orders;   // derivative orders entering monomial products
  bool include_covariates = false;

  void validate() const;
};

/// The feature library F, one column per candidate term. Descriptors are
/// canonical, unique and self-describing: evaluate_descriptor rebuilds any
/// column from its string.
struct DesignMatrix {
  Eigen::MatrixXd matrix;  // (S*T) x D
  std::vector<std::string> descriptors;
  std::vector<double> column_norms;  // recorded by normalize_columns
  bool normalized = false;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

/// Left-hand side U_{t^(J)}; one column per component.
struct ResponseMatrix {
  Eigen::MatrixXd matrix;  // (S*T) x N
  int order = 1;
  std::vector<std::string> lhs;  // e.g. "d(u1)/dt"
};

/// Canonical descriptor strings for a spec over the given names.
std::vector<std::string> library_descriptors(const std::vector<std::string>& components,
                                             const std::vector<std::string>& covariates,
                                             const LibrarySpec& spec);

/// Evaluates one canonical descriptor against the dataset (and its derivative
/// field, for terms that reference derivatives).
std::vector<double> evaluate_descriptor(const std::string& descriptor, const Dataset& data,
                                        const DerivativeField& derivs);

/// Builds the design matrix. `data` must be the derivative field's (possibly
/// trimmed) source, so library and response rows line up.
DesignMatrix build_library(const Dataset& data, const DerivativeField& derivs,
                           const LibrarySpec& spec);

ResponseMatrix build_response(const DerivativeField& derivs, int order = 1);

/// Rescales every non-constant column to unit Euclidean norm, recording the
/// norms so solved coefficients can be mapped back to the original units.
DesignMatrix normalize_columns(const DesignMatrix& F);

}  // namespace eqdisc
