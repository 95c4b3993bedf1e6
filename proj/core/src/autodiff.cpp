#include "rpg/autodiff.hpp"

namespace rpg::ad {

Var Tape::parameter(double value) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{-1, -1, 0.0, 0.0});
  leaves_.push_back(id);
  return Var(value, id, this);
}

void Tape::clear() {
  nodes_.clear();
  leaves_.clear();
}

Var Tape::unary(double value, const Var& a, double da) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{a.idx, -1, da, 0.0});
  return Var(value, id, this);
}

Var Tape::binary(double value, const Var& a, double da, const Var& b, double db) {
  const int id = static_cast<int>(nodes_.size());
  if (a.is_constant()) {
    nodes_.push_back(Node{b.idx, -1, db, 0.0});
  } else if (b.is_constant()) {
    nodes_.push_back(Node{a.idx, -1, da, 0.0});
  } else {
    nodes_.push_back(Node{a.idx, b.idx, da, db});
  }
  return Var(value, id, this);
}

std::vector<double> Tape::adjoints(const Var& output) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (output.is_constant()) return adj;
  adj[static_cast<std::size_t>(output.idx)] = 1.0;
  for (int i = output.idx; i >= 0; --i) {
    const double a = adj[static_cast<std::size_t>(i)];
    if (a == 0.0) continue;
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    if (node.p0 >= 0) adj[static_cast<std::size_t>(node.p0)] += node.d0 * a;
    if (node.p1 >= 0) adj[static_cast<std::size_t>(node.p1)] += node.d1 * a;
  }
  return adj;
}

Vector Tape::gradient(const Var& output) const {
  const std::vector<double> adj = adjoints(output);
  Vector grad(static_cast<Eigen::Index>(leaves_.size()));
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    grad(static_cast<Eigen::Index>(i)) = adj[static_cast<std::size_t>(leaves_[i])];
  }
  return grad;
}

Vector backprop(const Tape& tape, const Var& output) { return tape.gradient(output); }

}  // namespace rpg::ad
