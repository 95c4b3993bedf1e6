#pragma once

// Scalar reverse-mode automatic differentiation over an explicit tape.
//
// Only trainable parameters are tape leaves. Anything computed from plain
// doubles stays a constant (idx < 0) and never allocates a node, so code
// templated on the scalar type costs nothing extra for inputs that do not
// depend on the parameters.

#include <cmath>
#include <cstddef>
#include <vector>

#include "rpg/linalg.hpp"

namespace rpg {

inline double value(double x) { return x; }

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace ad {

class Tape;

struct Var {
  double val = 0.0;
  int idx = -1;
  Tape* tape = nullptr;

  Var() = default;
  Var(double v) : val(v) {}  // NOLINT: implicit so generic code can write T x = 0.0
  Var(double v, int i, Tape* t) : val(v), idx(i), tape(t) {}

  bool is_constant() const { return idx < 0; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);
};

class Tape {
 public:
  /// New trainable leaf. Leaves are numbered in creation order.
  Var parameter(double value);

  std::size_t size() const { return nodes_.size(); }
  std::size_t parameter_count() const { return leaves_.size(); }
  void clear();
  void reserve(std::size_t nodes) { nodes_.reserve(nodes); }

  Var unary(double value, const Var& a, double da);
  Var binary(double value, const Var& a, double da, const Var& b, double db);

  /// d(output)/d(node) for every node on the tape.
  std::vector<double> adjoints(const Var& output) const;

  /// d(output)/d(leaf) in leaf creation order.
  Vector gradient(const Var& output) const;

 private:
  struct Node {
    int p0;
    int p1;
    double d0;
    double d1;
  };
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
};

/// d(output)/d(parameter leaf) for every leaf of `tape`.
Vector backprop(const Tape& tape, const Var& output);

inline double value(const Var& x) { return x.val; }

inline Tape* pick_tape(const Var& a, const Var& b) { return a.tape != nullptr ? a.tape : b.tape; }

inline Var operator+(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.val + b.val);
  return pick_tape(a, b)->binary(a.val + b.val, a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.val - b.val);
  return pick_tape(a, b)->binary(a.val - b.val, a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.val * b.val);
  return pick_tape(a, b)->binary(a.val * b.val, a, b.val, b, a.val);
}
inline Var operator/(const Var& a, const Var& b) {
  if (a.is_constant() && b.is_constant()) return Var(a.val / b.val);
  const double inv = 1.0 / b.val;
  return pick_tape(a, b)->binary(a.val * inv, a, inv, b, -a.val * inv * inv);
}
inline Var operator-(const Var& a) {
  if (a.is_constant()) return Var(-a.val);
  return a.tape->unary(-a.val, a, -1.0);
}

inline Var operator+(const Var& a, double b) {
  if (a.is_constant()) return Var(a.val + b);
  return a.tape->unary(a.val + b, a, 1.0);
}
inline Var operator+(double a, const Var& b) { return b + a; }
inline Var operator-(const Var& a, double b) { return a + (-b); }
inline Var operator-(double a, const Var& b) {
  if (b.is_constant()) return Var(a - b.val);
  return b.tape->unary(a - b.val, b, -1.0);
}
inline Var operator*(const Var& a, double b) {
  if (a.is_constant()) return Var(a.val * b);
  return a.tape->unary(a.val * b, a, b);
}
inline Var operator*(double a, const Var& b) { return b * a; }
inline Var operator/(const Var& a, double b) { return a * (1.0 / b); }
inline Var operator/(double a, const Var& b) {
  if (b.is_constant()) return Var(a / b.val);
  const double inv = 1.0 / b.val;
  return b.tape->unary(a * inv, b, -a * inv * inv);
}

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline Var exp(const Var& a) {
  const double e = std::exp(a.val);
  if (a.is_constant()) return Var(e);
  return a.tape->unary(e, a, e);
}
inline Var log(const Var& a) {
  if (a.is_constant()) return Var(std::log(a.val));
  return a.tape->unary(std::log(a.val), a, 1.0 / a.val);
}
inline Var sin(const Var& a) {
  if (a.is_constant()) return Var(std::sin(a.val));
  return a.tape->unary(std::sin(a.val), a, std::cos(a.val));
}
inline Var cos(const Var& a) {
  if (a.is_constant()) return Var(std::cos(a.val));
  return a.tape->unary(std::cos(a.val), a, -std::sin(a.val));
}
inline Var sqrt(const Var& a) {
  const double r = std::sqrt(a.val);
  if (a.is_constant()) return Var(r);
  return a.tape->unary(r, a, 0.5 / r);
}
inline Var tanh(const Var& a) {
  const double t = std::tanh(a.val);
  if (a.is_constant()) return Var(t);
  return a.tape->unary(t, a, 1.0 - t * t);
}
inline Var softplus(const Var& a) {
  if (a.is_constant()) return Var(rpg::softplus(a.val));
  return a.tape->unary(rpg::softplus(a.val), a, rpg::sigmoid(a.val));
}

}  // namespace ad
}  // namespace rpg
