#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msfadv/common.hpp"

namespace msfadv {

// Reverse-mode substrate. A Tape is a linear record of scalar operations;
// Var is a value plus its node id. Constants carry id -1 and no tape, so
// generic code applied to all-constant inputs never touches a tape.
class Tape;

struct Var {
  double v = 0.0;
  std::int32_t id = -1;
  Tape* tape = nullptr;

  Var() = default;
  Var(double value) : v(value) {}  // constant
  Var(double value, std::int32_t node, Tape* t) : v(value), id(node), tape(t) {}
};

inline double val(double x) { return x; }
inline double val(const Var& x) { return x.v; }

enum class Op : std::uint8_t {
  Leaf, Add, Sub, Mul, Div, Neg, Abs, Sqrt, Tanh, Exp, Log, Sigmoid,
  Max, Min, StStep,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Abs: return "abs";
    case Op::Sqrt: return "sqrt";
    case Op::Tanh: return "tanh";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sigmoid: return "sigmoid";
    case Op::Max: return "max";
    case Op::Min: return "min";
    case Op::StStep: return "st_step";
  }
  return "?";
}

class Tape {
 public:
  struct Node {
    std::int32_t a = -1, b = -1;
    double da = 0.0, db = 0.0;
    Op op = Op::Leaf;
  };

  Var input(double v) {
    Node n;
    n.op = Op::Leaf;
    nodes_.push_back(n);
    Var out{v, static_cast<std::int32_t>(nodes_.size() - 1), this};
    check_finite(out);
    return out;
  }

  Var record(Op op, double v, std::int32_t a, double da, std::int32_t b = -1, double db = 0.0) {
    Node n;
    n.op = op;
    n.a = a; n.da = da;
    n.b = b; n.db = db;
    nodes_.push_back(n);
    Var out{v, static_cast<std::int32_t>(nodes_.size() - 1), this};
    check_finite(out);
    return out;
  }

  // Exact reverse-mode sweep in strict reverse node order; accumulation
  // order is a function of the recorded graph only, so repeated calls are
  // bit-identical.
  std::vector<double> backward(const Var& output) const {
    if (output.tape != this || output.id < 0 ||
        output.id >= static_cast<std::int32_t>(nodes_.size()))
      throw Error("backward: output is not a node of this tape");
    if (!error_.empty()) throw Error("backward: " + error_);
    std::vector<double> grad(nodes_.size(), 0.0);
    grad[static_cast<std::size_t>(output.id)] = 1.0;
    for (std::int32_t i = output.id; i >= 0; --i) {
      double g = grad[static_cast<std::size_t>(i)];
      if (g == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.a >= 0) grad[static_cast<std::size_t>(n.a)] += n.da * g;
      if (n.b >= 0) grad[static_cast<std::size_t>(n.b)] += n.db * g;
    }
    return grad;
  }

  static double grad_of(const std::vector<double>& grads, const Var& x) {
    if (x.id < 0) return 0.0;
    return grads[static_cast<std::size_t>(x.id)];
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() {
    nodes_.clear();
    error_.clear();
  }
  const std::string& error() const { return error_; }

 private:
  void check_finite(const Var& out) {
    if (!std::isfinite(out.v) && error_.empty()) {
      error_ = std::string("non-finite value produced by '") +
               op_name(nodes_[static_cast<std::size_t>(out.id)].op) +
               "' at node " + std::to_string(out.id);
    }
  }

  std::vector<Node> nodes_;
  std::string error_;
};

namespace detail {
inline Tape* tape_of(const Var& a, const Var& b) { return a.tape ? a.tape : b.tape; }
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  if (!t) return Var(a.v + b.v);
  return t->record(Op::Add, a.v + b.v, a.id, 1.0, b.id, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  if (!t) return Var(a.v - b.v);
  return t->record(Op::Sub, a.v - b.v, a.id, 1.0, b.id, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  if (!t) return Var(a.v * b.v);
  return t->record(Op::Mul, a.v * b.v, a.id, b.v, b.id, a.v);
}
inline Var operator/(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  if (!t) return Var(a.v / b.v);
  return t->record(Op::Div, a.v / b.v, a.id, 1.0 / b.v, b.id, -a.v / (b.v * b.v));
}
inline Var operator-(const Var& a) {
  if (!a.tape) return Var(-a.v);
  return a.tape->record(Op::Neg, -a.v, a.id, -1.0);
}
inline Var& operator+=(Var& a, const Var& b) { a = a + b; return a; }
inline Var& operator-=(Var& a, const Var& b) { a = a - b; return a; }
inline Var& operator*=(Var& a, const Var& b) { a = a * b; return a; }

inline Var abs(const Var& a) {
  double s = a.v > 0 ? 1.0 : (a.v < 0 ? -1.0 : 0.0);  // subgradient 0 at the kink
  if (!a.tape) return Var(std::fabs(a.v));
  return a.tape->record(Op::Abs, std::fabs(a.v), a.id, s);
}
inline Var sqrt(const Var& a) {
  double r = std::sqrt(a.v);
  if (!a.tape) return Var(r);
  return a.tape->record(Op::Sqrt, r, a.id, 0.5 / r);
}
inline Var tanh(const Var& a) {
  double th = std::tanh(a.v);
  if (!a.tape) return Var(th);
  return a.tape->record(Op::Tanh, th, a.id, 1.0 - th * th);
}
inline Var exp(const Var& a) {
  double e = std::exp(a.v);
  if (!a.tape) return Var(e);
  return a.tape->record(Op::Exp, e, a.id, e);
}
inline Var log(const Var& a) {
  if (!a.tape) return Var(std::log(a.v));
  return a.tape->record(Op::Log, std::log(a.v), a.id, 1.0 / a.v);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline Var sigmoid(const Var& a) {
  double s = sigmoid(a.v);
  if (!a.tape) return Var(s);
  return a.tape->record(Op::Sigmoid, s, a.id, s * (1.0 - s));
}

// Subgradient flows to the winner only; ties go to the first argument.
inline double vmax(double a, double b) { return a >= b ? a : b; }
inline double vmin(double a, double b) { return a <= b ? a : b; }
inline Var vmax(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  bool first = a.v >= b.v;
  if (!t) return Var(first ? a.v : b.v);
  return t->record(Op::Max, first ? a.v : b.v, a.id, first ? 1.0 : 0.0, b.id, first ? 0.0 : 1.0);
}
inline Var vmin(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  bool first = a.v <= b.v;
  if (!t) return Var(first ? a.v : b.v);
  return t->record(Op::Min, first ? a.v : b.v, a.id, first ? 1.0 : 0.0, b.id, first ? 0.0 : 1.0);
}

// Straight-through step: forward is the hard threshold at 0.5, backward is
// identity on the input (the occupancy convention; registered here so every
// discrete-selection adjoint lives in one place).
inline double st_step(double c) { return c > 0.5 ? 1.0 : 0.0; }
inline Var st_step(const Var& c) {
  if (!c.tape) return Var(st_step(c.v));
  return c.tape->record(Op::StStep, st_step(c.v), c.id, 1.0);
}

template <class T>
T sq(const T& x) { return x * x; }

// Central-difference verification of a scalar function against the tape.
// F must be callable with both std::span<const Var> and
// std::span<const double>.
struct FdReport {
  double max_rel_err = 0.0;
  std::size_t worst_coord = 0;
  double analytic = 0.0, numeric = 0.0;
};

template <class F>
FdReport finite_diff_check(F&& f, std::span<const double> x, double h = 1e-5) {
  Tape tape;
  std::vector<Var> xs;
  xs.reserve(x.size());
  for (double xi : x) xs.push_back(tape.input(xi));
  Var y = f(std::span<const Var>(xs));
  auto grads = tape.backward(y);

  std::vector<double> probe(x.begin(), x.end());
  FdReport rep;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double hi = h * std::max(1.0, std::fabs(x[i]));
    double x0 = probe[i];
    probe[i] = x0 + hi;
    double fp = f(std::span<const double>(probe));
    probe[i] = x0 - hi;
    double fm = f(std::span<const double>(probe));
    probe[i] = x0;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw Error("finite_diff_check: non-finite function value at probe " + std::to_string(i));
    double numeric = (fp - fm) / (2.0 * hi);
    double analytic = Tape::grad_of(grads, xs[i]);
    double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    double rel = std::fabs(analytic - numeric) / denom;
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_coord = i;
      rep.analytic = analytic;
      rep.numeric = numeric;
    }
  }
  return rep;
}

}  // namespace msfadv
