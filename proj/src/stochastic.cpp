#include "hjb/stochastic.hpp"

#include <cmath>
#include <limits>

#include "hjb/rng.hpp"

namespace hjb {

namespace {

struct RowSampler {
  Eigen::MatrixXd cdf;          // running row sums
  std::vector<int> last_alive;  // last index with positive mass, per row

  explicit RowSampler(const TransitionKernel& kernel) {
    const int n = kernel.size();
    cdf.resize(n, n);
    last_alive.assign(n, 0);
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int y = 0; y < n; ++y) {
        acc += kernel.rows(x, y);
        cdf(x, y) = acc;
        if (kernel.rows(x, y) > 0.0) last_alive[x] = y;
      }
    }
  }

  int step(int x, double u) const {
    const int n = static_cast<int>(last_alive.size());
    for (int y = 0; y < n; ++y)
      if (u < cdf(x, y)) return y;
    // row sums to 1 within 1e-12; a draw landing in the gap takes the last
    // positive-mass entry
    return last_alive[x];
  }
};

struct WalkResult {
  double value = 0.0;
  bool censored = false;
};

// Runs the per-sample walks (OpenMP when parallel), then merges in sample
// order with a two-pass mean/variance, so serial and parallel runs produce
// identical bits.
template <typename PerSample>
MCEstimate run_samples(long samples, bool parallel, PerSample&& per_sample) {
  if (samples < 1) throw ValidationError("sample count must be at least 1");
  std::vector<double> values(samples, 0.0);
  std::vector<unsigned char> censored(samples, 0);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < samples; ++i) {
      const WalkResult r = per_sample(i);
      values[i] = r.value;
      censored[i] = r.censored ? 1 : 0;
    }
  } else {
    for (long i = 0; i < samples; ++i) {
      const WalkResult r = per_sample(i);
      values[i] = r.value;
      censored[i] = r.censored ? 1 : 0;
    }
  }

  MCEstimate est;
  double sum = 0.0;
  for (long i = 0; i < samples; ++i) {
    if (censored[i]) {
      ++est.censored;
    } else {
      ++est.samples;
      sum += values[i];
    }
  }
  if (est.samples == 0) {
    est.mean = std::numeric_limits<double>::quiet_NaN();
    est.stderr_ = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.mean = sum / static_cast<double>(est.samples);
  if (est.samples > 1) {
    double ss = 0.0;
    for (long i = 0; i < samples; ++i) {
      if (censored[i]) continue;
      const double d = values[i] - est.mean;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(est.samples - 1);
    est.stderr_ = std::sqrt(var / static_cast<double>(est.samples));
  }
  return est;
}

void check_sim_inputs(const TransitionKernel& kernel,
                      const BoundarySet& boundary, int x0, long max_steps) {
  if (kernel.size() != boundary.size())
    throw ValidationError("kernel and boundary vertex counts differ");
  if (x0 < 0 || x0 >= kernel.size())
    throw ValidationError("start vertex out of range");
  if (max_steps < 1) throw ValidationError("max_steps must be at least 1");
}

WalkResult walk_exit_cost(const RowSampler& sampler, const GraphFunction& f,
                          const GraphFunction& g, const BoundarySet& boundary,
                          int x0, long max_steps, RngStream rng) {
  int x = x0;
  double cost = 0.0;
  for (long t = 0;; ++t) {
    if (boundary.contains(x)) return {cost + g[x], false};
    if (t >= max_steps) return {0.0, true};
    cost += f[x];
    x = sampler.step(x, rng.uniform());
  }
}

MCEstimate estimate_impl(const TransitionKernel& kernel, const GraphFunction& f,
                         const GraphFunction& g, const BoundarySet& boundary,
                         int x0, const SimOptions& opts, bool parallel) {
  check_sim_inputs(kernel, boundary, x0, opts.max_steps);
  validate_function(f, kernel.size(), "f");
  validate_function(g, kernel.size(), "g");
  const RowSampler sampler(kernel);
  return run_samples(opts.samples, parallel, [&](long i) {
    return walk_exit_cost(sampler, f, g, boundary, x0, opts.max_steps,
                          RngStream(opts.seed, static_cast<uint64_t>(i)));
  });
}

MCEstimate dynkin_impl(const TransitionKernel& kernel, const GraphFunction& w,
                       const BoundarySet& boundary, int x0,
                       const SimOptions& opts, bool parallel) {
  check_sim_inputs(kernel, boundary, x0, opts.max_steps);
  validate_function(w, kernel.size(), "w");
  const RowSampler sampler(kernel);
  const Eigen::VectorXd lw = kernel.rows * w - w;  // generator applied to w
  return run_samples(opts.samples, parallel, [&](long i) -> WalkResult {
    RngStream rng(opts.seed, static_cast<uint64_t>(i));
    int x = x0;
    double running = 0.0;
    for (long t = 0;; ++t) {
      if (boundary.contains(x)) return {w[x] - running - w[x0], false};
      if (t >= opts.max_steps) return {0.0, true};
      running += lw[x];
      x = sampler.step(x, rng.uniform());
    }
  });
}

}  // namespace

Trajectory sample_path(const TransitionKernel& kernel, int x0,
                       const BoundarySet& boundary, uint64_t seed,
                       long max_steps, uint64_t stream) {
  check_sim_inputs(kernel, boundary, x0, max_steps);
  const RowSampler sampler(kernel);
  RngStream rng(seed, stream);
  Trajectory traj;
  traj.seed = seed;
  traj.stream = stream;
  traj.states.push_back(x0);
  int x = x0;
  for (long t = 0;; ++t) {
    if (boundary.contains(x)) {
      traj.exit_time = t;
      return traj;
    }
    if (t >= max_steps) {
      traj.censored = true;
      traj.exit_time = t;
      return traj;
    }
    x = sampler.step(x, rng.uniform());
    traj.states.push_back(x);
  }
}

MCEstimate estimate_exit_functional(const TransitionKernel& kernel,
                                    const GraphFunction& f,
                                    const GraphFunction& g,
                                    const BoundarySet& boundary, int x0,
                                    const SimOptions& opts) {
  return estimate_impl(kernel, f, g, boundary, x0, opts, true);
}

MCEstimate estimate_exit_functional_serial(const TransitionKernel& kernel,
                                           const GraphFunction& f,
                                           const GraphFunction& g,
                                           const BoundarySet& boundary, int x0,
                                           const SimOptions& opts) {
  return estimate_impl(kernel, f, g, boundary, x0, opts, false);
}

MCEstimate verify_dynkin(const TransitionKernel& kernel, const GraphFunction& w,
                         const BoundarySet& boundary, int x0,
                         const SimOptions& opts) {
  return dynkin_impl(kernel, w, boundary, x0, opts, true);
}

MCEstimate verify_dynkin_serial(const TransitionKernel& kernel,
                                const GraphFunction& w,
                                const BoundarySet& boundary, int x0,
                                const SimOptions& opts) {
  return dynkin_impl(kernel, w, boundary, x0, opts, false);
}

MCEstimate evaluate_policy_mc(const KernelFamily& family, const Policy& policy,
                              const GraphFunction& f, const GraphFunction& g,
                              const BoundarySet& boundary, int x0,
                              const SimOptions& opts) {
  return estimate_exit_functional(compose(family, policy), f, g, boundary, x0,
                                  opts);
}

}  // namespace hjb
