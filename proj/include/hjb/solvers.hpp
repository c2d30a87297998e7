#pragma once

#include <functional>

#include "hjb/operators.hpp"

namespace hjb {

enum class SolveStatus { converged, max_iter, infeasible, singular };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-10;
  long max_iter = 1'000'000;
};

struct SolveReport {
  GraphFunction solution;
  long iterations = 0;
  // sup-norm of the solved equation's interior residual
  double residual = 0.0;
  SolveStatus status = SolveStatus::converged;
};

// Solves L(u,.) = -f on the interior, u = g on the boundary, by direct
// elimination of the interior system u(x) - sum_{y int} K(x,y)u(y) =
// f(x) + sum_{y in G} K(x,y)g(y); the solution is the expected running cost
// plus exit value of the chain. A pivot below 1e-12 reports status singular
// (the finite-exit-time assumption fails).
SolveReport solve_linear_exit(const TransitionKernel& kernel,
                              const GraphFunction& f, const GraphFunction& g,
                              const BoundarySet& boundary);

// Fixed-point iteration u <- f + min_i K^i u on the interior with u = g on
// the boundary, from u = 0 inside. Diverging iterates (sup-norm past 1/tol)
// report infeasible.
SolveReport value_iteration_bellman(const KernelFamily& family,
                                    const GraphFunction& f,
                                    const GraphFunction& g,
                                    const BoundarySet& boundary,
                                    const SolveOptions& opts = {});

struct PolicyIterationResult {
  SolveReport report;
  // optimal policy on success; the offending policy when evaluation fails
  Policy policy;
};

// Alternates exact policy evaluation (linear solve on the composed kernel)
// with greedy improvement, ties to the lowest kernel index.
PolicyIterationResult policy_iteration_bellman(const KernelFamily& family,
                                               const GraphFunction& f,
                                               const GraphFunction& g,
                                               const BoundarySet& boundary,
                                               const SolveOptions& opts = {});

// Label-setting solve of H_e(u,.) = f (f > 0 on the interior), u = g on the
// boundary; the I form goes through the exact u -> -u, g -> -g transform.
SolveReport solve_eikonal(const Graph& graph, const GraphFunction& f,
                          const GraphFunction& g, const BoundarySet& boundary,
                          Form form = Form::H);

// Monotone Gauss-Seidel sweeps for H_p(u,.) = f with per-vertex scalar root
// finding (exact piecewise-linear solve at p = 1, bracketed bisection else).
SolveReport solve_peikonal(const Graph& graph, double p,
                           const GraphFunction& f, const GraphFunction& g,
                           const BoundarySet& boundary, Form form = Form::H,
                           const SolveOptions& opts = {});

// Perron construction as a monotone per-vertex root-finding sweep: start must
// be a subsolution (I(start,.) >= f on the interior, start <= g on the
// boundary) and the per-vertex residual t -> I(u[x:=t], x) - f(x) must be
// nonincreasing in t (holds for every built-in handle). on_sweep, when given,
// observes the iterate after each sweep.
SolveReport perron_gauss_seidel(
    const OperatorHandle& op, const GraphFunction& f, const GraphFunction& g,
    const BoundarySet& boundary, const GraphFunction& start,
    const SolveOptions& opts = {},
    const std::function<void(const GraphFunction&)>& on_sweep = nullptr);

struct ExitCertificate {
  GraphFunction phi;                 // solution of M^-(phi,.) = 1, phi <= 0
  GraphFunction worst_expected_exit; // -phi(x) = sup over controls of E_x tau
  double bound = 0.0;                // 2 sup-norm(phi), bounds every E_x tau
  SolveStatus status = SolveStatus::converged;
  long iterations = 0;
};

// Decides the finite-exit-time assumption for a kernel family by solving the
// minimal equation M^-(phi,.) = 1, phi = 0 on the boundary (value iteration
// with running cost -1). Divergence or non-convergence is the infeasible
// finding: some control keeps the chain inside forever.
ExitCertificate certify_exit_time(const KernelFamily& family,
                                  const BoundarySet& boundary,
                                  const SolveOptions& opts = {});

}  // namespace hjb
