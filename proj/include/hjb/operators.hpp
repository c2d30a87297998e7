#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "hjb/graph.hpp"

namespace hjb {

// Which of the two sign conventions an eikonal-type operator uses. The I form
// has the global comparison property; the H form is its u -> -u mirror.
enum class Form { H, I };

enum class ExtremalSide { minus, plus };

// Scalar nonlinearity of the J operator: continuous and nondecreasing, with
// optional ellipticity bounds 0 < lambda <= Lambda on its slopes. Monotonicity
// (and the bounds, when given) is validated by sampling on [-R, R].
struct MonotoneProfile {
  std::function<double(double)> c;
  std::optional<double> lambda;
  std::optional<double> Lambda;

  explicit MonotoneProfile(std::function<double(double)> fn,
                           std::optional<double> lo = std::nullopt,
                           std::optional<double> hi = std::nullopt,
                           double sample_radius = 10.0);
};

// Callable Hamiltonian H(p, s, x). The adapter only ever evaluates it at
// difference-gradients p with p_x = 0.
struct HamiltonianSpec {
  int n = 0;
  std::function<double(const Eigen::VectorXd&, double, int)> h;
};

struct LinearGenerator {
  TransitionKernel kernel;
};
struct BellmanInf {
  KernelFamily family;
};
struct ExtremalMinus {
  KernelFamily family;
};
struct ExtremalPlus {
  KernelFamily family;
};
struct EikonalOp {
  Graph graph;
  Form form = Form::I;
};
struct PEikonalOp {
  Graph graph;
  double p = 2.0;
  Form form = Form::I;
};
// J(u,x) = sum_y w(y,x) c(u(y)-u(x)) with monotone c ("differences monotone"
// nonlinearity of the edge differences).
struct DifferenceMonotoneOp {
  Graph graph;
  MonotoneProfile profile;
};
struct PucciJMinusOp {
  Graph graph;
  double lambda = 1.0;
  double Lambda = 1.0;
};
struct HamiltonianOp {
  HamiltonianSpec spec;
};

using OperatorHandle =
    std::variant<LinearGenerator, BellmanInf, ExtremalMinus, ExtremalPlus,
                 EikonalOp, PEikonalOp, DifferenceMonotoneOp, PucciJMinusOp,
                 HamiltonianOp>;

// Uniform evaluation I(u, x) for any handle.
double eval(const OperatorHandle& op, const GraphFunction& u, int x);
int operator_size(const OperatorHandle& op);

// L(u,x) = sum_y K(x,y)(u(y)-u(x)), the generator of the chain.
double eval_linear(const TransitionKernel& kernel, const GraphFunction& u,
                   int x);

// min over kernel indices of the generator value; exact reduction of the
// infimum over controls because the summand at x depends only on the choice
// made at x.
double eval_bellman_inf(const KernelFamily& family, const GraphFunction& u,
                        int x);
// Minimizing kernel index, ties broken toward the lowest index.
int bellman_argmin(const KernelFamily& family, const GraphFunction& u, int x);

double eval_extremal(const KernelFamily& family, const GraphFunction& u, int x,
                     ExtremalSide side);

// H form: max_y w(y,x)(u(x)-u(y)); I form: max_z w(z,x)(u(z)-u(x)).
double eval_eikonal(const Graph& graph, const GraphFunction& u, int x,
                    Form form);

// H form: sum_y (1/p) w(y,x) ((u(x)-u(y))_+)^p; I form negates differences.
double eval_peikonal(const Graph& graph, double p, const GraphFunction& u,
                     int x, Form form);

double eval_J(const MonotoneProfile& profile, const Graph& graph,
              const GraphFunction& u, int x);

// sum_y w(y,x) [ lambda (d)_+ + Lambda (d)_- ] with d = u(y)-u(x) and
// (t)_- = min(t, 0); the per-term infimum of a*d over a in [lambda, Lambda].
double eval_pucci_J_minus(const Graph& graph, double lambda, double Lambda,
                          const GraphFunction& u, int x);

// Adapter I(u,x) = H(-grad_G u(x), -u(x), x).
OperatorHandle wrap_hamiltonian(HamiltonianSpec spec);

// Closed-form gradient of u -> I_p(u, x_i) for p > 1 (the k-th entry is
// w(k,i)((u_k-u_i)_+)^{p-1}, the i-th the negated sum of the others).
Eigen::VectorXd peikonal_gradient(const Graph& graph, double p,
                                  const GraphFunction& u, int i);

}  // namespace hjb
