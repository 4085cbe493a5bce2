#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace eqdisc::gp {

enum class Op : std::uint8_t { add, sub, mul, div, sin, cos, exp, var, constant };

constexpr bool is_binary(Op op) { return op <= Op::div; }
constexpr bool is_unary(Op op) { return op == Op::sin || op == Op::cos || op == Op::exp; }
constexpr bool is_terminal(Op op) { return op == Op::var || op == Op::constant; }

std::string op_name(Op op);
Op op_from_name(const std::string& name);

struct Node {
  Op op = Op::constant;
  std::int32_t a = -1;  // left / only child
  std::int32_t b = -1;  // right child
  std::int32_t var = -1;
  double value = 0.0;

  bool operator==(const Node&) const = default;
};

/// Expression encoded as a compact arena: children precede their parent and
/// the root is the last node, so a single forward pass evaluates the tree.
class Tree {
 public:
  Tree() = default;

  static Tree constant(double value);
  static Tree variable(int index);
  static Tree unary(Op op, Tree child);
  static Tree binary(Op op, Tree lhs, Tree rhs);

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int depth() const;
  bool empty() const { return nodes_.empty(); }

  /// Structural well-formedness plus variable indices < n_vars.
  bool valid(int n_vars) const;

  Tree subtree(int index) const;
  /// New tree with the subtree rooted at `index` replaced.
  Tree with_replaced(int index, const Tree& replacement) const;

  std::string to_infix(const std::vector<std::string>& var_names) const;
  nlohmann::ordered_json to_json() const;
  static Tree from_json(const nlohmann::json& j);

  bool operator==(const Tree&) const = default;

  // Internal: used by generators that assemble arenas directly.
  static Tree from_nodes(std::vector<Node> nodes);

 private:
  std::vector<Node> nodes_;
};

constexpr double kValueLimit = 1e12;   // evaluation clamp
constexpr double kDivGuard = 1e-12;    // protected-division threshold

struct EvalStats {
  std::size_t guarded_divisions = 0;
};

/// Variable columns for batch evaluation; all columns share one length.
struct BatchInputs {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  std::size_t n_vars() const { return columns.size(); }
};

/// Evaluates over the whole batch; division is guarded (|denominator| below
/// 1e-12 yields 1) and every operator output is clamped to +/-1e12.
std::vector<double> eval_tree(const Tree& tree, const BatchInputs& inputs,
                              EvalStats* stats = nullptr);

/// Same forward pass, but keeps every node's batch values (snipping needs
/// per-subtree statistics).
std::vector<std::vector<double>> eval_tree_nodes(const Tree& tree,
                                                 const BatchInputs& inputs,
                                                 EvalStats* stats = nullptr);

/// Single-point evaluation with identical guard and clamp semantics.
double eval_tree(const Tree& tree, std::span<const double> point,
                 EvalStats* stats = nullptr);

/// Symbolic derivative with local simplification (constant folding, zero and
/// identity absorption).
Tree differentiate_tree(const Tree& tree, int var);

}  // namespace eqdisc::gp
