#pragma once

#include <cstdint>
#include <optional>

#include "hjb/operators.hpp"

namespace hjb {

// Concrete data reproducing a violation: re-evaluating the checked inequality
// on (u, v, x) (plus the scalar pair for Hamiltonian checks) shows it fail.
struct Witness {
  GraphFunction u;
  GraphFunction v;
  int x = 0;
  double su = 0.0;
  double sv = 0.0;
};

struct CheckReport {
  bool passed = true;
  long trials = 0;
  // scaled so that `passed == (worst_violation <= slack)` for the check's
  // configured slack
  double worst_violation = 0.0;
  std::optional<Witness> witness;
};

struct CheckOptions {
  long trials = 1000;
  uint64_t seed = 0;
  double slack = 1e-12;  // scaled by (1 + sup-norms of the sampled inputs)
  double radius = 5.0;   // sampling radius for random functions
  bool parallel = true;
};

// Global comparison property: draws v and a nonnegative deficit pinned to zero
// at a random touch vertex x0, sets u = v - d, and requires
// I(u,x0) <= I(v,x0) up to scaled slack.
CheckReport check_gcp(const OperatorHandle& op, const CheckOptions& opts = {});

// I(u-c,.) >= I(u,.) for random u and constants c >= 0.
CheckReport check_constant_monotonicity(const OperatorHandle& op,
                                        const CheckOptions& opts = {});

// H(p,s,x_i) <= H(q,t,x_i) for random difference-gradients p <= q with
// p_i = q_i = 0 and scalars s <= t.
CheckReport check_differences_monotone(const HamiltonianSpec& spec,
                                       const CheckOptions& opts = {});

// Conclusion of the comparison theorem, max_G (u-v)_+ <= max_Gamma (u-v)_+,
// up to slack. Establishing the premises is the caller's business.
CheckReport check_comparison_conclusion(const GraphFunction& u,
                                        const GraphFunction& v,
                                        const BoundarySet& boundary,
                                        double slack = 1e-12);

// Validates that u1, u2 are subsolutions of I(.,.) = f on the interior, then
// requires max(u1,u2) to be one as well.
CheckReport check_max_subsolution(const OperatorHandle& op,
                                  const GraphFunction& u1,
                                  const GraphFunction& u2,
                                  const GraphFunction& f,
                                  const BoundarySet& boundary,
                                  double slack = 1e-12);

struct ConvexCertificate {
  Eigen::VectorXd gradient;      // closed-form gradient of I_p(., x_i) at v
  double legendre_value = 0.0;   // grad . v - I_p(v, x_i)
  double support_gap = 0.0;      // I_p(u,x_i) - I_p(v,x_i) - grad . (u - v)
};

struct ConvexCheckResult {
  // worst_violation folds the four sub-checks together, each rescaled so the
  // configured slack is the shared pass threshold; raw extrema live below.
  CheckReport report;
  double worst_gradient_error = 0.0;  // |closed form - central difference|, scaled
  double worst_equality_gap = 0.0;    // |support gap| at v = u
  double worst_support_violation = 0.0;  // max(-support_gap, 0)
  std::vector<ConvexCertificate> certificates;  // worst certificate per trial
};

// Convex/Legendre structure of the p-eikonal operator (p > 1): closed-form
// gradient against central differences (1e-6), support inequality
// (gap >= -1e-10) with equality at the base point, and the sup-of-linear
// lower bound never exceeding the operator value.
ConvexCheckResult check_convex_representation(const Graph& graph, double p,
                                              const CheckOptions& opts = {});

// Finite surrogate of the positive perturbation property: for random u, x0
// and t in {1e-2, 1e-4, 1e-6}, requires
// min_x [ I(u + t b_{x0}, x) - I(u, x) ] >= -t * bound_const, up to slack.
CheckReport check_bump_perturbation(const OperatorHandle& op,
                                    double bound_const,
                                    const CheckOptions& opts = {});

}  // namespace hjb
