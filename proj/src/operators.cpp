#include "hjb/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjb {

namespace {

void check_vertex(int x, int n) {
  if (x < 0 || x >= n) throw ValidationError("vertex index out of range");
}

double positive_part(double t) { return t > 0.0 ? t : 0.0; }

}  // namespace

MonotoneProfile::MonotoneProfile(std::function<double(double)> fn,
                                 std::optional<double> lo,
                                 std::optional<double> hi,
                                 double sample_radius)
    : c(std::move(fn)), lambda(lo), Lambda(hi) {
  if (!c) throw ValidationError("monotone profile needs a callable");
  if (lambda || Lambda) {
    if (!(lambda && Lambda))
      throw ValidationError("ellipticity bounds must be given as a pair");
    if (!(*lambda > 0.0) || !(*Lambda >= *lambda))
      throw ValidationError("ellipticity bounds require 0 < lambda <= Lambda");
  }
  // c is user-supplied and the GCP hinges on its monotonicity, so sample it.
  const int grid = 256;
  const double h = 2.0 * sample_radius / grid;
  const double slope_tol = 1e-9;
  double prev = c(-sample_radius);
  if (!std::isfinite(prev))
    throw ValidationError("profile value not finite at sample point");
  for (int i = 1; i <= grid; ++i) {
    const double t = -sample_radius + i * h;
    const double cur = c(t);
    if (!std::isfinite(cur))
      throw ValidationError("profile value not finite at sample point");
    const double slope = (cur - prev) / h;
    if (slope < -slope_tol)
      throw ValidationError("profile is not nondecreasing near t=" +
                            std::to_string(t));
    if (lambda &&
        (slope < *lambda - 1e-6 * (1.0 + *lambda) ||
         slope > *Lambda + 1e-6 * (1.0 + *Lambda)))
      throw ValidationError("profile slope " + std::to_string(slope) +
                            " escapes [lambda, Lambda] near t=" +
                            std::to_string(t));
    prev = cur;
  }
}

double eval_linear(const TransitionKernel& kernel, const GraphFunction& u,
                   int x) {
  const int n = kernel.size();
  validate_function(u, n, "u");
  check_vertex(x, n);
  double acc = 0.0;
  for (int y = 0; y < n; ++y) acc += kernel.rows(x, y) * (u[y] - u[x]);
  return acc;
}

double eval_bellman_inf(const KernelFamily& family, const GraphFunction& u,
                        int x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& k : family.kernels)
    best = std::min(best, eval_linear(k, u, x));
  return best;
}

int bellman_argmin(const KernelFamily& family, const GraphFunction& u, int x) {
  int arg = 0;
  double best = eval_linear(family.kernels[0], u, x);
  for (int i = 1; i < family.arity(); ++i) {
    const double v = eval_linear(family.kernels[i], u, x);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  return arg;
}

double eval_extremal(const KernelFamily& family, const GraphFunction& u, int x,
                     ExtremalSide side) {
  if (side == ExtremalSide::minus) return eval_bellman_inf(family, u, x);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& k : family.kernels)
    best = std::max(best, eval_linear(k, u, x));
  return best;
}

double eval_eikonal(const Graph& graph, const GraphFunction& u, int x,
                    Form form) {
  const int n = graph.size();
  validate_function(u, n, "u");
  check_vertex(x, n);
  const double sign = form == Form::H ? 1.0 : -1.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < n; ++y)
    best = std::max(best, graph.weights(y, x) * sign * (u[x] - u[y]));
  return best;
}

double eval_peikonal(const Graph& graph, double p, const GraphFunction& u,
                     int x, Form form) {
  if (!(p >= 1.0)) throw ValidationError("p-eikonal exponent must be >= 1");
  const int n = graph.size();
  validate_function(u, n, "u");
  check_vertex(x, n);
  const double sign = form == Form::H ? 1.0 : -1.0;
  double acc = 0.0;
  for (int y = 0; y < n; ++y) {
    const double d = positive_part(sign * (u[x] - u[y]));
    if (d > 0.0) acc += graph.weights(y, x) * std::pow(d, p);
  }
  return acc / p;
}

double eval_J(const MonotoneProfile& profile, const Graph& graph,
              const GraphFunction& u, int x) {
  const int n = graph.size();
  validate_function(u, n, "u");
  check_vertex(x, n);
  double acc = 0.0;
  for (int y = 0; y < n; ++y) {
    const double w = graph.weights(y, x);
    if (w > 0.0) acc += w * profile.c(u[y] - u[x]);
  }
  return acc;
}

double eval_pucci_J_minus(const Graph& graph, double lambda, double Lambda,
                          const GraphFunction& u, int x) {
  if (!(lambda > 0.0) || !(Lambda >= lambda))
    throw ValidationError("Pucci operator requires 0 < lambda <= Lambda");
  const int n = graph.size();
  validate_function(u, n, "u");
  check_vertex(x, n);
  double acc = 0.0;
  for (int y = 0; y < n; ++y) {
    const double w = graph.weights(y, x);
    if (w == 0.0) continue;
    const double d = u[y] - u[x];
    acc += w * (d > 0.0 ? lambda * d : Lambda * d);
  }
  return acc;
}

OperatorHandle wrap_hamiltonian(HamiltonianSpec spec) {
  if (spec.n < 2 || !spec.h)
    throw ValidationError("Hamiltonian spec needs a size and a callable");
  return HamiltonianOp{std::move(spec)};
}

Eigen::VectorXd peikonal_gradient(const Graph& graph, double p,
                                  const GraphFunction& u, int i) {
  if (!(p > 1.0))
    throw ValidationError("p-eikonal gradient needs p > 1");
  const int n = graph.size();
  validate_function(u, n, "u");
  check_vertex(i, n);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k == i) continue;
    const double d = positive_part(u[k] - u[i]);
    const double t = d > 0.0 ? graph.weights(k, i) * std::pow(d, p - 1.0) : 0.0;
    grad[k] = t;
    acc += t;
  }
  grad[i] = -acc;
  return grad;
}

namespace {

struct EvalVisitor {
  const GraphFunction& u;
  int x;

  double operator()(const LinearGenerator& op) const {
    return eval_linear(op.kernel, u, x);
  }
  double operator()(const BellmanInf& op) const {
    return eval_bellman_inf(op.family, u, x);
  }
  double operator()(const ExtremalMinus& op) const {
    return eval_extremal(op.family, u, x, ExtremalSide::minus);
  }
  double operator()(const ExtremalPlus& op) const {
    return eval_extremal(op.family, u, x, ExtremalSide::plus);
  }
  double operator()(const EikonalOp& op) const {
    return eval_eikonal(op.graph, u, x, op.form);
  }
  double operator()(const PEikonalOp& op) const {
    return eval_peikonal(op.graph, op.p, u, x, op.form);
  }
  double operator()(const DifferenceMonotoneOp& op) const {
    return eval_J(op.profile, op.graph, u, x);
  }
  double operator()(const PucciJMinusOp& op) const {
    return eval_pucci_J_minus(op.graph, op.lambda, op.Lambda, u, x);
  }
  double operator()(const HamiltonianOp& op) const {
    validate_function(u, op.spec.n, "u");
    check_vertex(x, op.spec.n);
    return op.spec.h(-discrete_gradient(u, x), -u[x], x);
  }
};

struct SizeVisitor {
  int operator()(const LinearGenerator& op) const { return op.kernel.size(); }
  int operator()(const BellmanInf& op) const { return op.family.size(); }
  int operator()(const ExtremalMinus& op) const { return op.family.size(); }
  int operator()(const ExtremalPlus& op) const { return op.family.size(); }
  int operator()(const EikonalOp& op) const { return op.graph.size(); }
  int operator()(const PEikonalOp& op) const { return op.graph.size(); }
  int operator()(const DifferenceMonotoneOp& op) const {
    return op.graph.size();
  }
  int operator()(const PucciJMinusOp& op) const { return op.graph.size(); }
  int operator()(const HamiltonianOp& op) const { return op.spec.n; }
};

}  // namespace

double eval(const OperatorHandle& op, const GraphFunction& u, int x) {
  return std::visit(EvalVisitor{u, x}, op);
}

int operator_size(const OperatorHandle& op) {
  return std::visit(SizeVisitor{}, op);
}

}  // namespace hjb
