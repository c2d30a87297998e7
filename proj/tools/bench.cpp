// Times the OpenMP kernels against their serial reference implementations and
// verifies that both produce identical bits.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hjb/rng.hpp"
#include "hjb/stochastic.hpp"
#include "hjb/verification.hpp"

using namespace hjb;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

TransitionKernel random_kernel(int n, const BoundarySet& boundary,
                               uint64_t seed) {
  RngStream rng(seed, 0);
  Eigen::MatrixXd rows(n, n);
  for (int x = 0; x < n; ++x) {
    double sum = 0.0;
    for (int y = 0; y < n; ++y) {
      rows(x, y) = x == y ? 0.0 : rng.uniform(0.05, 1.0);
      sum += rows(x, y);
    }
    rows.row(x) /= sum;
    // keep exits short enough to make the walk lengths comparable
    const int exit = boundary.members[x % boundary.members.size()];
    rows.row(x) *= 0.7;
    rows(x, exit) += 0.3;
  }
  return TransitionKernel(std::move(rows));
}

struct Timing {
  double serial = 0.0;
  double parallel = 0.0;
};

void report(const char* name, const Timing& t, bool identical) {
  std::printf("%-28s serial %8.3f s   openmp %8.3f s   speedup %4.2fx   %s\n",
              name, t.serial, t.parallel, t.serial / t.parallel,
              identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled in this build\n");
#endif

  const int n = 40;
  const BoundarySet boundary({0, 1, n - 1}, n);
  const TransitionKernel kernel = random_kernel(n, boundary, 7);
  RngStream rng(11, 0);
  GraphFunction f(n), g(n), w(n);
  for (int i = 0; i < n; ++i) {
    f[i] = rng.uniform(0.2, 1.5);
    g[i] = rng.uniform(-1.0, 1.0);
    w[i] = rng.uniform(-3.0, 3.0);
  }

  {
    SimOptions opts;
    opts.samples = 400'000;
    opts.seed = 3;
    auto t0 = clock_type::now();
    const MCEstimate serial =
        estimate_exit_functional_serial(kernel, f, g, boundary, n / 2, opts);
    Timing t;
    t.serial = seconds_since(t0);
    t0 = clock_type::now();
    const MCEstimate par =
        estimate_exit_functional(kernel, f, g, boundary, n / 2, opts);
    t.parallel = seconds_since(t0);
    report("exit functional MC", t,
           std::memcmp(&serial.mean, &par.mean, sizeof(double)) == 0 &&
               std::memcmp(&serial.stderr_, &par.stderr_, sizeof(double)) == 0);
  }

  {
    SimOptions opts;
    opts.samples = 400'000;
    opts.seed = 5;
    auto t0 = clock_type::now();
    const MCEstimate serial =
        verify_dynkin_serial(kernel, w, boundary, n / 2, opts);
    Timing t;
    t.serial = seconds_since(t0);
    t0 = clock_type::now();
    const MCEstimate par = verify_dynkin(kernel, w, boundary, n / 2, opts);
    t.parallel = seconds_since(t0);
    report("dynkin defect MC", t,
           std::memcmp(&serial.mean, &par.mean, sizeof(double)) == 0 &&
               std::memcmp(&serial.stderr_, &par.stderr_, sizeof(double)) == 0);
  }

  {
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
    RngStream wrng(13, 0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y && wrng.uniform() < 0.4) weights(x, y) = wrng.uniform(0.1, 2.0);
    const Graph graph(weights);
    const OperatorHandle op = PEikonalOp{graph, 2.0, Form::I};
    CheckOptions opts;
    opts.trials = 20'000;
    opts.seed = 17;
    auto t0 = clock_type::now();
    opts.parallel = false;
    const CheckReport serial = check_gcp(op, opts);
    Timing t;
    t.serial = seconds_since(t0);
    t0 = clock_type::now();
    opts.parallel = true;
    const CheckReport par = check_gcp(op, opts);
    t.parallel = seconds_since(t0);
    report("gcp trials (p-eikonal)", t,
           std::memcmp(&serial.worst_violation, &par.worst_violation,
                       sizeof(double)) == 0 &&
               serial.passed == par.passed);

    opts.trials = 2'000;
    t0 = clock_type::now();
    opts.parallel = false;
    const ConvexCheckResult cs = check_convex_representation(graph, 2.0, opts);
    t.serial = seconds_since(t0);
    t0 = clock_type::now();
    opts.parallel = true;
    const ConvexCheckResult cp = check_convex_representation(graph, 2.0, opts);
    t.parallel = seconds_since(t0);
    report("convex representation", t,
           std::memcmp(&cs.report.worst_violation, &cp.report.worst_violation,
                       sizeof(double)) == 0);
  }

  return 0;
}
