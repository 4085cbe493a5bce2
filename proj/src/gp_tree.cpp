#include "eqdisc/gp/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <nlohmann/json.hpp>

#include "eqdisc/errors.hpp"
#include "eqdisc/kernels.hpp"
#include "eqdisc/util.hpp"

namespace eqdisc::gp {

std::string op_name(Op op) {
  switch (op) {
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::var: return "var";
    case Op::constant: return "const";
  }
  throw ConfigError("unknown operator");
}

Op op_from_name(const std::string& name) {
  if (name == "add" || name == "+") return Op::add;
  if (name == "sub" || name == "-") return Op::sub;
  if (name == "mul" || name == "*") return Op::mul;
  if (name == "div" || name == "/") return Op::div;
  if (name == "sin") return Op::sin;
  if (name == "cos") return Op::cos;
  if (name == "exp") return Op::exp;
  if (name == "var") return Op::var;
  if (name == "const") return Op::constant;
  throw ConfigError("unknown operator '" + name + "'");
}

Tree Tree::constant(double value) {
  Tree t;
  t.nodes_.push_back({Op::constant, -1, -1, -1, value});
  return t;
}

Tree Tree::variable(int index) {
  Tree t;
  t.nodes_.push_back({Op::var, -1, -1, index, 0.0});
  return t;
}

Tree Tree::unary(Op op, Tree child) {
  Tree t = std::move(child);
  t.nodes_.push_back({op, t.root(), -1, -1, 0.0});
  return t;
}

Tree Tree::binary(Op op, Tree lhs, Tree rhs) {
  Tree t = std::move(lhs);
  const std::int32_t offset = static_cast<std::int32_t>(t.nodes_.size());
  const std::int32_t left_root = t.root();
  for (Node n : rhs.nodes_) {
    if (n.a >= 0) n.a += offset;
    if (n.b >= 0) n.b += offset;
    t.nodes_.push_back(n);
  }
  t.nodes_.push_back({op, left_root, t.root(), -1, 0.0});
  return t;
}

Tree Tree::from_nodes(std::vector<Node> nodes) {
  Tree t;
  t.nodes_ = std::move(nodes);
  return t;
}

int Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.a >= 0) d[i] = std::max(d[i], d[static_cast<std::size_t>(n.a)] + 1);
    if (n.b >= 0) d[i] = std::max(d[i], d[static_cast<std::size_t>(n.b)] + 1);
  }
  return d.back();
}

bool Tree::valid(int n_vars) const {
  if (nodes_.empty()) return false;
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const bool binary = is_binary(n.op);
    const bool unary = is_unary(n.op);
    if (binary) {
      if (n.a < 0 || n.b < 0) return false;
    } else if (unary) {
      if (n.a < 0 || n.b >= 0) return false;
    } else {
      if (n.a >= 0 || n.b >= 0) return false;
    }
    // children strictly precede their parent
    if (n.a >= 0 && (n.a >= static_cast<std::int32_t>(i))) return false;
    if (n.b >= 0 && (n.b >= static_cast<std::int32_t>(i))) return false;
    if (n.a >= 0) ++parents[static_cast<std::size_t>(n.a)];
    if (n.b >= 0) ++parents[static_cast<std::size_t>(n.b)];
    if (n.op == Op::var && (n.var < 0 || n.var >= n_vars)) return false;
    if (n.op == Op::constant && !std::isfinite(n.value)) return false;
  }
  // exactly one root (the last node), every other node has one parent
  if (parents.back() != 0) return false;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (parents[i] != 1) return false;
  }
  return true;
}

Tree Tree::subtree(int index) const {
  std::vector<std::int32_t> map(nodes_.size(), -1);
  std::vector<Node> out;
  // Nodes of a subtree form a contiguous-by-order subset; collect reachable
  // indices, then renumber preserving order.
  std::vector<bool> keep(nodes_.size(), false);
  std::function<void(int)> mark = [&](int i) {
    keep[static_cast<std::size_t>(i)] = true;
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.a >= 0) mark(n.a);
    if (n.b >= 0) mark(n.b);
  };
  mark(index);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!keep[i]) continue;
    Node n = nodes_[i];
    if (n.a >= 0) n.a = map[static_cast<std::size_t>(n.a)];
    if (n.b >= 0) n.b = map[static_cast<std::size_t>(n.b)];
    map[i] = static_cast<std::int32_t>(out.size());
    out.push_back(n);
  }
  return from_nodes(std::move(out));
}

Tree Tree::with_replaced(int index, const Tree& replacement) const {
  std::function<Tree(int)> build = [&](int i) -> Tree {
    if (i == index) return replacement;
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (is_binary(n.op)) return Tree::binary(n.op, build(n.a), build(n.b));
    if (is_unary(n.op)) return Tree::unary(n.op, build(n.a));
    Tree t;
    t.nodes_.push_back(n);
    return t;
  };
  return build(root());
}

std::string Tree::to_infix(const std::vector<std::string>& var_names) const {
  std::function<std::string(int)> render = [&](int i) -> std::string {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::constant:
        return format_double(n.value);
      case Op::var:
        return var_names.at(static_cast<std::size_t>(n.var));
      case Op::add:
        return "(" + render(n.a) + " + " + render(n.b) + ")";
      case Op::sub:
        return "(" + render(n.a) + " - " + render(n.b) + ")";
      case Op::mul:
        return "(" + render(n.a) + " * " + render(n.b) + ")";
      case Op::div:
        return "(" + render(n.a) + " / " + render(n.b) + ")";
      case Op::sin:
        return "sin(" + render(n.a) + ")";
      case Op::cos:
        return "cos(" + render(n.a) + ")";
      case Op::exp:
        return "exp(" + render(n.a) + ")";
    }
    throw ConfigError("unknown operator");
  };
  return render(root());
}

nlohmann::ordered_json Tree::to_json() const {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const Node& n : nodes_) {
    nlohmann::ordered_json j;
    j["op"] = op_name(n.op);
    if (n.a >= 0) j["a"] = n.a;
    if (n.b >= 0) j["b"] = n.b;
    if (n.op == Op::var) j["index"] = n.var;
    if (n.op == Op::constant) j["value"] = n.value;
    nodes.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["root"] = root();
  out["nodes"] = std::move(nodes);
  return out;
}

Tree Tree::from_json(const nlohmann::json& j) {
  std::vector<Node> nodes;
  for (const auto& nj : j.at("nodes")) {
    Node n;
    n.op = op_from_name(nj.at("op").get<std::string>());
    n.a = nj.value("a", -1);
    n.b = nj.value("b", -1);
    n.var = nj.value("index", -1);
    n.value = nj.value("value", 0.0);
    nodes.push_back(n);
  }
  Tree t = from_nodes(std::move(nodes));
  if (j.at("root").get<int>() != t.root())
    throw SchemaError("tree JSON root must be the last node");
  return t;
}

namespace {

inline double clamp_value(double v) {
  double t = v > -kValueLimit ? v : -kValueLimit;
  return t < kValueLimit ? t : kValueLimit;
}

}  // namespace

std::vector<std::vector<double>> eval_tree_nodes(const Tree& tree,
                                                 const BatchInputs& inputs,
                                                 EvalStats* stats) {
  const std::size_t rows = inputs.rows();
  const auto& nodes = tree.nodes();
  std::vector<std::vector<double>> slots(nodes.size());
  EvalStats local;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    auto& out = slots[i];
    out.resize(rows);
    switch (n.op) {
      case Op::constant:
        std::fill(out.begin(), out.end(), n.value);
        continue;  // terminals are bounded by construction; no clamp
      case Op::var:
        out = inputs.columns.at(static_cast<std::size_t>(n.var));
        continue;
      case Op::add:
        kernels::add(slots[n.a].data(), slots[n.b].data(), out.data(), rows);
        break;
      case Op::sub:
        kernels::sub(slots[n.a].data(), slots[n.b].data(), out.data(), rows);
        break;
      case Op::mul:
        kernels::mul(slots[n.a].data(), slots[n.b].data(), out.data(), rows);
        break;
      case Op::div:
        local.guarded_divisions +=
            kernels::guarded_div(slots[n.a].data(), slots[n.b].data(), out.data(), rows);
        break;
      case Op::sin:
        kernels::sin_array(slots[n.a].data(), out.data(), rows);
        break;
      case Op::cos:
        kernels::cos_array(slots[n.a].data(), out.data(), rows);
        break;
      case Op::exp:
        kernels::exp_array(slots[n.a].data(), out.data(), rows);
        break;
    }
    kernels::clamp(out.data(), -kValueLimit, kValueLimit, out.data(), rows);
  }
  if (stats) stats->guarded_divisions += local.guarded_divisions;
  return slots;
}

std::vector<double> eval_tree(const Tree& tree, const BatchInputs& inputs,
                              EvalStats* stats) {
  auto slots = eval_tree_nodes(tree, inputs, stats);
  return std::move(slots.back());
}

double eval_tree(const Tree& tree, std::span<const double> point, EvalStats* stats) {
  const auto& nodes = tree.nodes();
  std::vector<double> slots(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    double v = 0.0;
    switch (n.op) {
      case Op::constant:
        slots[i] = n.value;
        continue;
      case Op::var:
        slots[i] = point[static_cast<std::size_t>(n.var)];
        continue;
      case Op::add:
        v = slots[n.a] + slots[n.b];
        break;
      case Op::sub:
        v = slots[n.a] - slots[n.b];
        break;
      case Op::mul:
        v = slots[n.a] * slots[n.b];
        break;
      case Op::div:
        if (std::fabs(slots[n.b]) < kDivGuard) {
          v = 1.0;
          if (stats) ++stats->guarded_divisions;
        } else {
          v = slots[n.a] / slots[n.b];
        }
        break;
      case Op::sin:
        v = std::sin(slots[n.a]);
        break;
      case Op::cos:
        v = std::cos(slots[n.a]);
        break;
      case Op::exp:
        v = std::exp(slots[n.a]);
        break;
    }
    slots[i] = clamp_value(v);
  }
  return slots.back();
}

namespace {

bool is_const(const Tree& t, double v) {
  return t.node_count() == 1 && t.nodes()[0].op == Op::constant && t.nodes()[0].value == v;
}

bool const_value(const Tree& t, double* v) {
  if (t.node_count() == 1 && t.nodes()[0].op == Op::constant) {
    *v = t.nodes()[0].value;
    return true;
  }
  return false;
}

Tree mk_add(Tree a, Tree b) {
  double ca, cb;
  if (const_value(a, &ca) && const_value(b, &cb)) return Tree::constant(ca + cb);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return Tree::binary(Op::add, std::move(a), std::move(b));
}

Tree mk_sub(Tree a, Tree b) {
  double ca, cb;
  if (const_value(a, &ca) && const_value(b, &cb)) return Tree::constant(ca - cb);
  if (is_const(b, 0.0)) return a;
  return Tree::binary(Op::sub, std::move(a), std::move(b));
}

Tree mk_mul(Tree a, Tree b) {
  double ca, cb;
  if (const_value(a, &ca) && const_value(b, &cb)) return Tree::constant(ca * cb);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return Tree::constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return Tree::binary(Op::mul, std::move(a), std::move(b));
}

Tree mk_div(Tree a, Tree b) {
  double ca, cb;
  // Folding is only safe when the guard cannot trigger.
  if (const_value(a, &ca) && const_value(b, &cb) && std::fabs(cb) >= kDivGuard)
    return Tree::constant(ca / cb);
  return Tree::binary(Op::div, std::move(a), std::move(b));
}

Tree mk_unary(Op op, Tree a) {
  double ca;
  if (const_value(a, &ca)) {
    switch (op) {
      case Op::sin: return Tree::constant(std::sin(ca));
      case Op::cos: return Tree::constant(std::cos(ca));
      case Op::exp: return Tree::constant(std::exp(ca));
      default: break;
    }
  }
  return Tree::unary(op, std::move(a));
}

Tree diff_node(const Tree& tree, int index, int var) {
  const Node& n = tree.nodes()[static_cast<std::size_t>(index)];
  switch (n.op) {
    case Op::constant:
      return Tree::constant(0.0);
    case Op::var:
      return Tree::constant(n.var == var ? 1.0 : 0.0);
    case Op::add:
      return mk_add(diff_node(tree, n.a, var), diff_node(tree, n.b, var));
    case Op::sub:
      return mk_sub(diff_node(tree, n.a, var), diff_node(tree, n.b, var));
    case Op::mul:
      return mk_add(mk_mul(diff_node(tree, n.a, var), tree.subtree(n.b)),
                    mk_mul(tree.subtree(n.a), diff_node(tree, n.b, var)));
    case Op::div: {
      Tree numerator = mk_sub(mk_mul(diff_node(tree, n.a, var), tree.subtree(n.b)),
                              mk_mul(tree.subtree(n.a), diff_node(tree, n.b, var)));
      return mk_div(std::move(numerator),
                    mk_mul(tree.subtree(n.b), tree.subtree(n.b)));
    }
    case Op::sin:
      return mk_mul(mk_unary(Op::cos, tree.subtree(n.a)), diff_node(tree, n.a, var));
    case Op::cos:
      return mk_mul(mk_sub(Tree::constant(0.0), mk_unary(Op::sin, tree.subtree(n.a))),
                    diff_node(tree, n.a, var));
    case Op::exp:
      return mk_mul(mk_unary(Op::exp, tree.subtree(n.a)), diff_node(tree, n.a, var));
  }
  throw ConfigError("unknown operator");
}

}  // namespace

Tree differentiate_tree(const Tree& tree, int var) {
  return diff_node(tree, tree.root(), var);
}

}  // namespace eqdisc::gp
