#pragma once

#include <cstdint>

#include "hjb/graph.hpp"

namespace hjb {

struct Trajectory {
  std::vector<int> states;  // X_0 .. X_T
  long exit_time = 0;       // hitting time of the boundary, valid unless censored
  bool censored = false;
  uint64_t seed = 0;
  uint64_t stream = 0;
};

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long samples = 0;   // uncensored samples entering the estimate
  long censored = 0;  // censored samples, reported, never silently dropped

  // An estimate with noticeable censoring is biased; callers surface this.
  bool censored_warning() const {
    return censored > 0 && censored * 100 > samples + censored;
  }
};

struct SimOptions {
  long samples = 100'000;
  uint64_t seed = 0;
  long max_steps = 1'000'000;
};

// Simulates the chain from x0 until it hits the boundary or max_steps runs
// out. Inverse-CDF sampling over precomputed row sums, drawing from the
// counter-based stream (seed, stream): identical inputs give identical
// trajectories bit for bit.
Trajectory sample_path(const TransitionKernel& kernel, int x0,
                       const BoundarySet& boundary, uint64_t seed,
                       long max_steps = 1'000'000, uint64_t stream = 0);

// Monte Carlo estimate of E_x [ sum_{t<tau} f(X_t) + g(X_tau) ]; the empty-sum
// convention makes the estimate exactly g(x0) when x0 is on the boundary.
// Sample i always draws from stream (seed, i) and the merge runs in sample
// order, so results are bit-identical for any thread count.
MCEstimate estimate_exit_functional(const TransitionKernel& kernel,
                                    const GraphFunction& f,
                                    const GraphFunction& g,
                                    const BoundarySet& boundary, int x0,
                                    const SimOptions& opts = {});
// Plain serial loop kept as the reference implementation.
MCEstimate estimate_exit_functional_serial(const TransitionKernel& kernel,
                                           const GraphFunction& f,
                                           const GraphFunction& g,
                                           const BoundarySet& boundary, int x0,
                                           const SimOptions& opts = {});

// Estimates E_x [ w(X_tau) - sum_{t<tau} L(w, X_t) ] - w(x); the Dynkin defect,
// zero in expectation whenever exit times are integrable.
MCEstimate verify_dynkin(const TransitionKernel& kernel, const GraphFunction& w,
                         const BoundarySet& boundary, int x0,
                         const SimOptions& opts = {});
MCEstimate verify_dynkin_serial(const TransitionKernel& kernel,
                                const GraphFunction& w,
                                const BoundarySet& boundary, int x0,
                                const SimOptions& opts = {});

// Composes K^alpha(x,.) = K^{alpha(x)}(x,.) and estimates its exit functional.
MCEstimate evaluate_policy_mc(const KernelFamily& family, const Policy& policy,
                              const GraphFunction& f, const GraphFunction& g,
                              const BoundarySet& boundary, int x0,
                              const SimOptions& opts = {});

}  // namespace hjb
