#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace hjb {

// Real-valued function on the vertex set, one entry per vertex.
using GraphFunction = Eigen::VectorXd;

// Distance field; entries may be +inf for vertices not reachable from the
// boundary through positive-weight edges.
using ExtendedDistance = Eigen::VectorXd;

// Thrown when input data violates a documented invariant (bad dimensions,
// negative weights, non-stochastic rows, ...). The CLI maps it to exit 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double sup_norm(const GraphFunction& u);

// Finite directed graph with nonnegative edge weights. weights(x, y) is the
// weight of the edge x -> y; zero means "no edge". Immutable after
// construction.
struct Graph {
  Eigen::MatrixXd weights;
  std::vector<std::string> labels;

  explicit Graph(Eigen::MatrixXd w, std::vector<std::string> names = {});

  int size() const { return static_cast<int>(weights.rows()); }
  std::string label(int x) const;
};

// Nonempty proper subset of vertices carrying Dirichlet data.
struct BoundarySet {
  std::vector<int> members;   // sorted, unique
  std::vector<bool> is_member;

  BoundarySet(std::vector<int> vertices, int n);

  int size() const { return static_cast<int>(is_member.size()); }
  bool contains(int x) const { return is_member[x]; }
  std::vector<int> interior() const;
};

// Row-stochastic transition matrix of a Markov chain on the vertex set.
struct TransitionKernel {
  Eigen::MatrixXd rows;

  explicit TransitionKernel(Eigen::MatrixXd k, bool normalize = false);

  int size() const { return static_cast<int>(rows.rows()); }
  // True when K(x,x)=0 for every x in `at` (the Bellman theorem hypothesis).
  bool no_self_loops(const std::vector<int>& at, double tol = 1e-12) const;
};

// Ordered, nonempty list of kernels sharing a vertex set; the index set A.
struct KernelFamily {
  std::vector<TransitionKernel> kernels;

  explicit KernelFamily(std::vector<TransitionKernel> ks);

  int size() const { return kernels.front().size(); }
  int arity() const { return static_cast<int>(kernels.size()); }
};

// Stationary control: a kernel index per vertex.
struct Policy {
  std::vector<int> choice;

  Policy(std::vector<int> c, const KernelFamily& family);
};

// Kernel of the controlled chain: row x taken from K^{policy(x)}.
TransitionKernel compose(const KernelFamily& family, const Policy& policy);

void validate_function(const GraphFunction& u, int n, const std::string& name);

// Distance-to-boundary field induced by the edge weights: d = 0 on the
// boundary and d(x) = min_y [ w(y,x)^{-q} + d(y) ], i.e. the cost of the
// cheapest chain of directed edges running from the boundary out to x, each
// step priced at the inverse q-th power of its weight. Zero-weight edges cost
// +inf, so vertices with no positive-weight chain from the boundary come back
// as +inf.
ExtendedDistance path_distance(const Graph& graph, const BoundarySet& boundary,
                               double weight_exponent = 1.0);

// Vector of differences u(x) - u(x_j); the entry at x itself is 0.
Eigen::VectorXd discrete_gradient(const GraphFunction& u, int x);

// Indicator bump: 1 at x0, 0 elsewhere.
GraphFunction bump(int x0, int n);

}  // namespace hjb
