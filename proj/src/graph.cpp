#include "hjb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace hjb {

namespace {
constexpr double kRowSumTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double sup_norm(const GraphFunction& u) {
  return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff();
}

Graph::Graph(Eigen::MatrixXd w, std::vector<std::string> names)
    : weights(std::move(w)), labels(std::move(names)) {
  const auto n = weights.rows();
  if (n != weights.cols())
    throw ValidationError("graph weight matrix must be square");
  if (n < 2) throw ValidationError("graph needs at least 2 vertices");
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      const double v = weights(x, y);
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("edge weight w(" + std::to_string(x) + "," +
                              std::to_string(y) +
                              ") must be finite and nonnegative");
    }
    if (weights(x, x) != 0.0)
      throw ValidationError("self-loop weight at vertex " + std::to_string(x) +
                            " must be 0");
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n)
    throw ValidationError("label count does not match vertex count");
}

std::string Graph::label(int x) const {
  if (!labels.empty()) return labels[x];
  return "x" + std::to_string(x);
}

BoundarySet::BoundarySet(std::vector<int> vertices, int n)
    : members(std::move(vertices)), is_member(n, false) {
  if (n < 2) throw ValidationError("vertex count must be at least 2");
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.empty()) throw ValidationError("boundary set must be nonempty");
  for (int x : members) {
    if (x < 0 || x >= n)
      throw ValidationError("boundary vertex " + std::to_string(x) +
                            " out of range");
    is_member[x] = true;
  }
  if (static_cast<int>(members.size()) == n)
    throw ValidationError("boundary must be a proper subset of the vertices");
}

std::vector<int> BoundarySet::interior() const {
  std::vector<int> out;
  out.reserve(is_member.size() - members.size());
  for (int x = 0; x < static_cast<int>(is_member.size()); ++x)
    if (!is_member[x]) out.push_back(x);
  return out;
}

TransitionKernel::TransitionKernel(Eigen::MatrixXd k, bool normalize)
    : rows(std::move(k)) {
  const auto n = rows.rows();
  if (n != rows.cols())
    throw ValidationError("transition kernel must be square");
  if (n < 1) throw ValidationError("transition kernel must be nonempty");
  for (Eigen::Index x = 0; x < n; ++x) {
    double sum = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      const double v = rows(x, y);
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("kernel entry K(" + std::to_string(x) + "," +
                              std::to_string(y) +
                              ") must be finite and nonnegative");
      sum += v;
    }
    if (normalize) {
      if (sum <= 0.0)
        throw ValidationError("kernel row " + std::to_string(x) +
                              " has zero mass and cannot be normalized");
      rows.row(x) /= sum;
    } else if (std::abs(sum - 1.0) > kRowSumTol) {
      throw ValidationError("kernel row " + std::to_string(x) + " sums to " +
                            std::to_string(sum) +
                            ", not 1 (pass normalize to rescale)");
    }
  }
}

bool TransitionKernel::no_self_loops(const std::vector<int>& at,
                                     double tol) const {
  for (int x : at)
    if (std::abs(rows(x, x)) > tol) return false;
  return true;
}

KernelFamily::KernelFamily(std::vector<TransitionKernel> ks)
    : kernels(std::move(ks)) {
  if (kernels.empty())
    throw ValidationError("kernel family must be nonempty");
  const int n = kernels.front().size();
  for (const auto& k : kernels)
    if (k.size() != n)
      throw ValidationError("kernel family members must share a vertex count");
}

Policy::Policy(std::vector<int> c, const KernelFamily& family)
    : choice(std::move(c)) {
  if (static_cast<int>(choice.size()) != family.size())
    throw ValidationError("policy length does not match vertex count");
  for (int i : choice)
    if (i < 0 || i >= family.arity())
      throw ValidationError("policy kernel index " + std::to_string(i) +
                            " out of range");
}

TransitionKernel compose(const KernelFamily& family, const Policy& policy) {
  if (static_cast<int>(policy.choice.size()) != family.size())
    throw ValidationError("policy length does not match vertex count");
  const int n = family.size();
  Eigen::MatrixXd rows(n, n);
  for (int x = 0; x < n; ++x) rows.row(x) = family.kernels[policy.choice[x]].rows.row(x);
  return TransitionKernel(std::move(rows));
}

void validate_function(const GraphFunction& u, int n, const std::string& name) {
  if (u.size() != n)
    throw ValidationError(name + " has length " + std::to_string(u.size()) +
                          ", expected " + std::to_string(n));
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!std::isfinite(u[i]))
      throw ValidationError(name + " entry " + std::to_string(i) +
                            " is not finite");
}

ExtendedDistance path_distance(const Graph& graph, const BoundarySet& boundary,
                               double weight_exponent) {
  if (!(weight_exponent > 0.0))
    throw ValidationError("weight exponent must be positive");
  const int n = graph.size();
  if (boundary.size() != n)
    throw ValidationError("boundary vertex count does not match graph");

  // One inverse step cost per directed edge; pow is skipped for exponent 1 so
  // that exponent q on w and exponent 1 on w^q produce identical doubles.
  auto step_cost = [&](int from, int to) {
    const double w = graph.weights(from, to);
    if (w <= 0.0) return kInf;
    const double wq = weight_exponent == 1.0 ? w : std::pow(w, weight_exponent);
    return 1.0 / wq;
  };

  ExtendedDistance dist = ExtendedDistance::Constant(n, kInf);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (int x : boundary.members) {
    dist[x] = 0.0;
    queue.emplace(0.0, x);
  }
  std::vector<bool> settled(n, false);
  while (!queue.empty()) {
    auto [d, y] = queue.top();
    queue.pop();
    if (settled[y]) continue;
    settled[y] = true;
    for (int x = 0; x < n; ++x) {
      if (settled[x] || boundary.contains(x)) continue;
      const double c = step_cost(y, x);
      if (c == kInf) continue;
      const double candidate = d + c;
      if (candidate < dist[x]) {
        dist[x] = candidate;
        queue.emplace(candidate, x);
      }
    }
  }
  return dist;
}

Eigen::VectorXd discrete_gradient(const GraphFunction& u, int x) {
  if (x < 0 || x >= u.size())
    throw ValidationError("vertex index out of range");
  Eigen::VectorXd g = Eigen::VectorXd::Constant(u.size(), u[x]) - u;
  g[x] = 0.0;
  return g;
}

GraphFunction bump(int x0, int n) {
  if (x0 < 0 || x0 >= n) throw ValidationError("bump vertex out of range");
  GraphFunction b = GraphFunction::Zero(n);
  b[x0] = 1.0;
  return b;
}

}  // namespace hjb
