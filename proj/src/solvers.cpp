#include "hjb/solvers.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

namespace hjb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSingularPivot = 1e-12;

void check_problem_dims(int n, const GraphFunction& f, const GraphFunction& g,
                        const BoundarySet& boundary) {
  validate_function(f, n, "f");
  validate_function(g, n, "g");
  if (boundary.size() != n)
    throw ValidationError("boundary vertex count does not match problem size");
}

void require_interior_no_self_loops(const KernelFamily& family,
                                    const std::vector<int>& interior) {
  for (int i = 0; i < family.arity(); ++i)
    if (!family.kernels[i].no_self_loops(interior))
      throw ValidationError("kernel " + std::to_string(i) +
                            " has an interior self-loop; the Bellman "
                            "equation requires K(x,x)=0 there");
}

double bellman_residual(const KernelFamily& family, const GraphFunction& u,
                        const GraphFunction& f,
                        const std::vector<int>& interior) {
  double res = 0.0;
  for (int x : interior)
    res = std::max(res, std::abs(eval_bellman_inf(family, u, x) + f[x]));
  return res;
}

// Vertices reachable from the boundary through positive-weight edges; the
// same orientation the eikonal update u(x) = min_y [u(y) + f(x)/w(y,x)] uses.
std::vector<bool> reachable_from_boundary(const Graph& graph,
                                          const BoundarySet& boundary) {
  const int n = graph.size();
  std::vector<bool> seen(n, false);
  std::vector<int> stack(boundary.members);
  for (int b : stack) seen[b] = true;
  while (!stack.empty()) {
    const int y = stack.back();
    stack.pop_back();
    for (int x = 0; x < n; ++x)
      if (!seen[x] && graph.weights(y, x) > 0.0) {
        seen[x] = true;
        stack.push_back(x);
      }
  }
  return seen;
}

SolveReport negation_shim(SolveReport report) {
  report.solution = -report.solution;
  return report;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::singular: return "singular";
  }
  return "unknown";
}

SolveReport solve_linear_exit(const TransitionKernel& kernel,
                              const GraphFunction& f, const GraphFunction& g,
                              const BoundarySet& boundary) {
  const int n = kernel.size();
  check_problem_dims(n, f, g, boundary);
  const std::vector<int> interior = boundary.interior();
  const int m = static_cast<int>(interior.size());

  SolveReport report;
  report.solution = GraphFunction::Zero(n);
  for (int b : boundary.members) report.solution[b] = g[b];
  if (m == 0) return report;

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const int x = interior[i];
    for (int j = 0; j < m; ++j) A(i, j) -= kernel.rows(x, interior[j]);
    double rhs = f[x];
    for (int y : boundary.members) rhs += kernel.rows(x, y) * g[y];
    b[i] = rhs;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot < kSingularPivot) {
    report.status = SolveStatus::singular;
    report.residual = kInf;
    return report;
  }

  const Eigen::VectorXd ui = lu.solve(b);
  for (int i = 0; i < m; ++i) report.solution[interior[i]] = ui[i];
  report.iterations = 1;
  for (int x : interior)
    report.residual = std::max(
        report.residual, std::abs(eval_linear(kernel, report.solution, x) + f[x]));
  return report;
}

SolveReport value_iteration_bellman(const KernelFamily& family,
                                    const GraphFunction& f,
                                    const GraphFunction& g,
                                    const BoundarySet& boundary,
                                    const SolveOptions& opts) {
  const int n = family.size();
  check_problem_dims(n, f, g, boundary);
  if (!(opts.tol > 0.0)) throw ValidationError("tolerance must be positive");
  const std::vector<int> interior = boundary.interior();
  require_interior_no_self_loops(family, interior);

  GraphFunction u = GraphFunction::Zero(n);
  for (int b : boundary.members) u[b] = g[b];

  SolveReport report;
  report.status = SolveStatus::max_iter;
  const double blowup = 1.0 / opts.tol;
  GraphFunction next = u;
  for (long iter = 1; iter <= opts.max_iter; ++iter) {
    double step = 0.0;
    for (int x : interior) {
      double best = kInf;
      for (const auto& k : family.kernels)
        best = std::min(best, k.rows.row(x).dot(u));
      next[x] = f[x] + best;
      step = std::max(step, std::abs(next[x] - u[x]));
    }
    for (int x : interior) u[x] = next[x];
    report.iterations = iter;
    if (sup_norm(u) > blowup) {
      report.status = SolveStatus::infeasible;
      break;
    }
    if (step < opts.tol) {
      report.residual = bellman_residual(family, u, f, interior);
      if (report.residual <= opts.tol) {
        report.status = SolveStatus::converged;
        break;
      }
    }
  }
  report.solution = u;
  if (report.status != SolveStatus::converged)
    report.residual = bellman_residual(family, u, f, interior);
  return report;
}

PolicyIterationResult policy_iteration_bellman(const KernelFamily& family,
                                               const GraphFunction& f,
                                               const GraphFunction& g,
                                               const BoundarySet& boundary,
                                               const SolveOptions& opts) {
  const int n = family.size();
  check_problem_dims(n, f, g, boundary);
  const std::vector<int> interior = boundary.interior();
  require_interior_no_self_loops(family, interior);

  Policy policy(std::vector<int>(n, 0), family);
  for (long round = 1; round <= opts.max_iter; ++round) {
    const TransitionKernel composed = compose(family, policy);
    SolveReport eval_report = solve_linear_exit(composed, f, g, boundary);
    if (eval_report.status == SolveStatus::singular) {
      eval_report.status = SolveStatus::infeasible;
      eval_report.iterations = round;
      return {std::move(eval_report), policy};
    }
    const GraphFunction& u = eval_report.solution;
    bool stable = true;
    Policy improved = policy;
    for (int x : interior) {
      improved.choice[x] = bellman_argmin(family, u, x);
      if (improved.choice[x] != policy.choice[x]) stable = false;
    }
    if (stable) {
      eval_report.iterations = round;
      eval_report.residual = bellman_residual(family, u, f, interior);
      eval_report.status = SolveStatus::converged;
      return {std::move(eval_report), policy};
    }
    policy = improved;
  }
  const TransitionKernel composed = compose(family, policy);
  SolveReport rep = solve_linear_exit(composed, f, g, boundary);
  rep.status = SolveStatus::max_iter;
  rep.iterations = opts.max_iter;
  rep.residual = bellman_residual(family, rep.solution, f, interior);
  return {std::move(rep), policy};
}

SolveReport solve_eikonal(const Graph& graph, const GraphFunction& f,
                          const GraphFunction& g, const BoundarySet& boundary,
                          Form form) {
  if (form == Form::I)
    return negation_shim(solve_eikonal(graph, f, -g, boundary, Form::H));

  const int n = graph.size();
  check_problem_dims(n, f, g, boundary);
  const std::vector<int> interior = boundary.interior();
  for (int x : interior)
    if (!(f[x] > 0.0))
      throw ValidationError("eikonal solve needs f > 0 on the interior "
                            "(violated at vertex " + std::to_string(x) + ")");

  SolveReport report;
  GraphFunction u = GraphFunction::Constant(n, kInf);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (int b : boundary.members) {
    u[b] = g[b];
    queue.emplace(u[b], b);
  }
  std::vector<bool> settled(n, false);
  while (!queue.empty()) {
    auto [val, y] = queue.top();
    queue.pop();
    if (settled[y]) continue;
    settled[y] = true;
    ++report.iterations;
    for (int x = 0; x < n; ++x) {
      if (settled[x] || boundary.contains(x)) continue;
      const double w = graph.weights(y, x);
      if (w <= 0.0) continue;
      const double candidate = u[y] + f[x] / w;
      if (candidate < u[x]) {
        u[x] = candidate;
        queue.emplace(candidate, x);
      }
    }
  }
  report.solution = u;
  for (int x : interior) {
    if (!settled[x]) {
      report.status = SolveStatus::infeasible;
      report.residual = kInf;
      return report;
    }
  }
  for (int x : interior)
    report.residual = std::max(
        report.residual, std::abs(eval_eikonal(graph, u, x, Form::H) - f[x]));
  return report;
}

namespace {

// Largest t with sum_y (1/1) w(y,x) (t - u(y))_+ = f, solved exactly on the
// sorted breakpoint segments.
double peikonal_node_solve_p1(const std::vector<std::pair<double, double>>&
                                  neighbors /* (value, weight), sorted */,
                              double f) {
  double mass = 0.0;
  double moment = 0.0;
  const int m = static_cast<int>(neighbors.size());
  for (int k = 0; k < m; ++k) {
    mass += neighbors[k].second;
    moment += neighbors[k].second * neighbors[k].first;
    const double t = (f + moment) / mass;
    const bool last = k + 1 == m;
    if (t >= neighbors[k].first && (last || t <= neighbors[k + 1].first))
      return t;
  }
  return (f + moment) / mass;
}

struct PEikonalNodeSolver {
  const Graph& graph;
  double p;
  double bisect_tol;

  double solve(const GraphFunction& u, int x, double fx) const {
    std::vector<std::pair<double, double>> neighbors;
    for (int y = 0; y < graph.size(); ++y)
      if (graph.weights(y, x) > 0.0)
        neighbors.emplace_back(u[y], graph.weights(y, x));
    std::sort(neighbors.begin(), neighbors.end());
    if (p == 1.0) return peikonal_node_solve_p1(neighbors, fx);

    auto psi = [&](double t) {
      double acc = 0.0;
      for (const auto& [v, w] : neighbors)
        if (t > v) acc += w * std::pow(t - v, p);
      return acc / p - fx;
    };
    double lo = neighbors.front().first;
    double width = 1.0;
    double hi = lo + width;
    while (psi(hi) < 0.0) {
      lo = hi;
      width *= 2.0;
      hi += width;
    }
    for (int it = 0; it < 200 && hi - lo > bisect_tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      (psi(mid) < 0.0 ? lo : hi) = mid;
    }
    return lo;
  }
};

}  // namespace

SolveReport solve_peikonal(const Graph& graph, double p,
                           const GraphFunction& f, const GraphFunction& g,
                           const BoundarySet& boundary, Form form,
                           const SolveOptions& opts) {
  if (!(p >= 1.0)) throw ValidationError("p-eikonal exponent must be >= 1");
  if (form == Form::I)
    return negation_shim(
        solve_peikonal(graph, p, f, -g, boundary, Form::H, opts));

  const int n = graph.size();
  check_problem_dims(n, f, g, boundary);
  if (!(opts.tol > 0.0)) throw ValidationError("tolerance must be positive");
  const std::vector<int> interior = boundary.interior();
  for (int x : interior)
    if (!(f[x] > 0.0))
      throw ValidationError("p-eikonal solve needs f > 0 on the interior "
                            "(violated at vertex " + std::to_string(x) + ")");

  SolveReport report;
  const std::vector<bool> reachable = reachable_from_boundary(graph, boundary);
  for (int x : interior) {
    if (!reachable[x]) {
      report.status = SolveStatus::infeasible;
      report.residual = kInf;
      report.solution = GraphFunction::Constant(n, kInf);
      for (int b : boundary.members) report.solution[b] = g[b];
      return report;
    }
  }

  // Start from the constant subsolution min_Gamma g; sweeps then increase
  // monotonically toward the solution.
  double gmin = kInf;
  for (int b : boundary.members) gmin = std::min(gmin, g[b]);
  GraphFunction u = GraphFunction::Constant(n, gmin);
  for (int b : boundary.members) u[b] = g[b];

  const PEikonalNodeSolver node{graph, p, std::min(opts.tol / 10.0, 1e-12)};
  report.status = SolveStatus::max_iter;
  for (long sweep = 1; sweep <= opts.max_iter; ++sweep) {
    double change = 0.0;
    for (int x : interior) {
      const double t = std::max(u[x], node.solve(u, x, f[x]));
      change = std::max(change, t - u[x]);
      u[x] = t;
    }
    report.iterations = sweep;
    if (change < opts.tol) {
      double res = 0.0;
      for (int x : interior)
        res = std::max(res,
                       std::abs(eval_peikonal(graph, p, u, x, Form::H) - f[x]));
      report.residual = res;
      if (res <= opts.tol) {
        report.status = SolveStatus::converged;
        break;
      }
    }
  }
  report.solution = u;
  if (report.status != SolveStatus::converged) {
    double res = 0.0;
    for (int x : interior)
      res = std::max(res,
                     std::abs(eval_peikonal(graph, p, u, x, Form::H) - f[x]));
    report.residual = res;
  }
  return report;
}

SolveReport perron_gauss_seidel(
    const OperatorHandle& op, const GraphFunction& f, const GraphFunction& g,
    const BoundarySet& boundary, const GraphFunction& start,
    const SolveOptions& opts,
    const std::function<void(const GraphFunction&)>& on_sweep) {
  const int n = operator_size(op);
  check_problem_dims(n, f, g, boundary);
  validate_function(start, n, "start");
  if (!(opts.tol > 0.0)) throw ValidationError("tolerance must be positive");
  const std::vector<int> interior = boundary.interior();

  const double sub_slack =
      1e-9 * (1.0 + sup_norm(f) + sup_norm(g) + sup_norm(start));
  for (int x : interior)
    if (eval(op, start, x) < f[x] - sub_slack)
      throw ValidationError("start is not a subsolution: I(start," +
                            std::to_string(x) + ") < f");
  for (int b : boundary.members)
    if (start[b] > g[b] + sub_slack)
      throw ValidationError("start exceeds g on the boundary at vertex " +
                            std::to_string(b));

  // raising the boundary entries to g preserves the subsolution property
  GraphFunction u = start;
  for (int b : boundary.members) u[b] = g[b];

  SolveReport report;
  report.status = SolveStatus::max_iter;
  const double blowup = 1.0 / opts.tol;
  const double bisect_tol = opts.tol / 10.0;

  auto residual_at = [&](GraphFunction& work, int x, double t) {
    const double keep = work[x];
    work[x] = t;
    const double r = eval(op, work, x) - f[x];
    work[x] = keep;
    return r;
  };

  for (long sweep = 1; sweep <= opts.max_iter; ++sweep) {
    double change = 0.0;
    const double contract_slack = 1e-7 * (1.0 + sup_norm(u) + sup_norm(f));
    for (int x : interior) {
      double r0 = residual_at(u, x, u[x]);
      if (r0 < -contract_slack)
        throw std::logic_error(
            "per-vertex residual increased along the sweep; the "
            "residual-monotonicity contract does not hold for this operator");
      if (r0 <= 0.0) continue;  // already at (or just past) the root
      double lo = u[x];
      double width = 1.0;
      double hi = lo + width;
      while (residual_at(u, x, hi) >= 0.0) {
        lo = hi;
        width *= 2.0;
        hi = u[x] + width;
        if (width > blowup) {
          report.status = SolveStatus::infeasible;
          report.solution = u;
          report.residual = kInf;
          report.iterations = sweep;
          return report;
        }
      }
      // keep r(lo) >= 0 > r(hi); land on the admissible end
      for (int it = 0; it < 200; ++it) {
        if (hi - lo <= bisect_tol &&
            residual_at(u, x, lo) <= opts.tol * 0.5)
          break;
        if (hi - lo < 1e-15 * (1.0 + std::abs(lo))) break;
        const double mid = 0.5 * (lo + hi);
        (residual_at(u, x, mid) >= 0.0 ? lo : hi) = mid;
      }
      change = std::max(change, lo - u[x]);
      u[x] = lo;
    }
    report.iterations = sweep;
    if (on_sweep) on_sweep(u);
    if (sup_norm(u) > blowup) {
      report.status = SolveStatus::infeasible;
      break;
    }
    if (change < opts.tol) {
      double res = 0.0;
      for (int x : interior)
        res = std::max(res, std::abs(eval(op, u, x) - f[x]));
      report.residual = res;
      if (res <= opts.tol) {
        report.status = SolveStatus::converged;
        break;
      }
    }
  }
  report.solution = u;
  if (report.status == SolveStatus::max_iter) {
    double res = 0.0;
    for (int x : interior)
      res = std::max(res, std::abs(eval(op, u, x) - f[x]));
    report.residual = res;
  }
  return report;
}

ExitCertificate certify_exit_time(const KernelFamily& family,
                                  const BoundarySet& boundary,
                                  const SolveOptions& opts) {
  const int n = family.size();
  const GraphFunction f = GraphFunction::Constant(n, -1.0);
  const GraphFunction g = GraphFunction::Zero(n);
  SolveReport rep = value_iteration_bellman(family, f, g, boundary, opts);

  ExitCertificate cert;
  cert.phi = rep.solution;
  cert.worst_expected_exit = -rep.solution;
  cert.bound = 2.0 * sup_norm(rep.solution);
  cert.iterations = rep.iterations;
  // The minimal-equation iteration from phi = 0 is monotone nonincreasing, so
  // failing to converge means unbounded decrease: the finite-exit-time
  // assumption fails.
  cert.status = rep.status == SolveStatus::converged ? SolveStatus::converged
                                                     : SolveStatus::infeasible;
  return cert;
}

}  // namespace hjb
