#include <doctest.h>

#include <cmath>

#include "hjb/solvers.hpp"
#include "hjb/rng.hpp"
#include "oracles.hpp"

using namespace hjb;

TEST_CASE("linear exit solve on chains") {
  // single interior vertex: u(x2) = 1 + (0 + 0)/2
  {
    const TransitionKernel walk = oracle::chain_walk(3);
    const BoundarySet boundary({0, 2}, 3);
    const SolveReport rep = solve_linear_exit(
        walk, GraphFunction::Ones(3), GraphFunction::Zero(3), boundary);
    CHECK(rep.status == SolveStatus::converged);
    CHECK(rep.solution[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rep.residual <= 1e-12);
  }
  // expected exit times of the symmetric walk on the 5-chain
  {
    const TransitionKernel walk = oracle::chain_walk(5);
    const BoundarySet boundary({0, 4}, 5);
    const SolveReport rep = solve_linear_exit(
        walk, GraphFunction::Ones(5), GraphFunction::Zero(5), boundary);
    CHECK(rep.solution[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rep.solution[2] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.solution[3] == doctest::Approx(3.0).epsilon(1e-12));
  }
  // harmonic interpolation of the boundary data
  {
    const TransitionKernel walk = oracle::chain_walk(5);
    const BoundarySet boundary({0, 4}, 5);
    GraphFunction g = GraphFunction::Zero(5);
    g[4] = 1.0;
    const SolveReport rep =
        solve_linear_exit(walk, GraphFunction::Zero(5), g, boundary);
    for (int x = 0; x < 5; ++x)
      CHECK(rep.solution[x] == doctest::Approx(x / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("linear exit solve flags a non-exiting chain as singular") {
  // deterministic 2-cycle between the two interior vertices
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(4, 4);
  rows(0, 1) = 1.0;
  rows(1, 2) = 1.0;
  rows(2, 1) = 1.0;
  rows(3, 2) = 1.0;
  const TransitionKernel cycling{rows};
  const SolveReport rep =
      solve_linear_exit(cycling, GraphFunction::Ones(4), GraphFunction::Zero(4),
                        BoundarySet({0, 3}, 4));
  CHECK(rep.status == SolveStatus::singular);
}

TEST_CASE("value iteration") {
  const BoundarySet boundary({0, 4}, 5);
  const GraphFunction f = GraphFunction::Ones(5);
  const GraphFunction g = GraphFunction::Zero(5);

  // singleton family reduces to the linear solve
  {
    const KernelFamily single({oracle::chain_walk(5)});
    const SolveReport vi = value_iteration_bellman(single, f, g, boundary);
    const SolveReport lin =
        solve_linear_exit(single.kernels[0], f, g, boundary);
    CHECK(vi.status == SolveStatus::converged);
    CHECK(sup_norm(vi.solution - lin.solution) <= 1e-9);
  }
  // left/right movers: distance to the nearer end
  {
    const KernelFamily family = oracle::chain_left_right(5);
    const SolveReport vi = value_iteration_bellman(family, f, g, boundary);
    GraphFunction expected(5);
    expected << 0, 1, 2, 1, 0;
    CHECK(vi.status == SolveStatus::converged);
    CHECK(sup_norm(vi.solution - expected) <= 1e-9);
    const GraphFunction brute =
        oracle::enumerate_policies(family, f, g, boundary);
    CHECK(sup_norm(vi.solution - brute) <= 1e-9);
  }
  // zero data keeps the zero fixed point
  {
    const KernelFamily family = oracle::chain_left_right(5);
    const SolveReport vi = value_iteration_bellman(
        family, GraphFunction::Zero(5), g, boundary);
    CHECK(sup_norm(vi.solution) == 0.0);
    CHECK(vi.status == SolveStatus::converged);
  }
}

TEST_CASE("value iteration rejects interior self-loops") {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(3, 3);
  rows(0, 1) = 1.0;
  rows(1, 1) = 0.5;
  rows(1, 2) = 0.5;
  rows(2, 1) = 1.0;
  const KernelFamily family({TransitionKernel{rows}});
  CHECK_THROWS_AS(
      value_iteration_bellman(family, GraphFunction::Ones(3),
                              GraphFunction::Zero(3), BoundarySet({0, 2}, 3)),
      ValidationError);
}

TEST_CASE("policy iteration") {
  const BoundarySet boundary({0, 4}, 5);
  const GraphFunction f = GraphFunction::Ones(5);
  const GraphFunction g = GraphFunction::Zero(5);

  {
    const KernelFamily single({oracle::chain_walk(5)});
    const PolicyIterationResult res =
        policy_iteration_bellman(single, f, g, boundary);
    CHECK(res.report.status == SolveStatus::converged);
    CHECK(res.report.iterations == 1);  // stable immediately
  }
  {
    const KernelFamily family = oracle::chain_left_right(5);
    const PolicyIterationResult res =
        policy_iteration_bellman(family, f, g, boundary);
    GraphFunction expected(5);
    expected << 0, 1, 2, 1, 0;
    CHECK(res.report.status == SolveStatus::converged);
    CHECK(sup_norm(res.report.solution - expected) <= 1e-9);
    CHECK(res.policy.choice[1] == 0);  // head for the nearer end
    CHECK(res.policy.choice[3] == 1);
  }
}

TEST_CASE("value and policy iteration agree on random feasible instances") {
  RngStream rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + rng.uniform_int(3);  // up to 6
    const std::vector<int> gamma{0, n - 1};
    const KernelFamily family =
        oracle::random_feasible_family(rng, n, 1 + rng.uniform_int(3), gamma);
    const BoundarySet boundary(gamma, n);
    const GraphFunction f = oracle::random_function(rng, n, -1, 2);
    const GraphFunction g = oracle::random_function(rng, n, -1, 1);
    const SolveReport vi = value_iteration_bellman(family, f, g, boundary);
    const PolicyIterationResult pi =
        policy_iteration_bellman(family, f, g, boundary);
    REQUIRE(vi.status == SolveStatus::converged);
    REQUIRE(pi.report.status == SolveStatus::converged);
    CHECK(sup_norm(vi.solution - pi.report.solution) <= 1e-9);
    const GraphFunction brute =
        oracle::enumerate_policies(family, f, g, boundary);
    CHECK(sup_norm(vi.solution - brute) <= 1e-9);
  }
}

TEST_CASE("eikonal solve") {
  const Graph graph = oracle::chain(3);
  const BoundarySet gamma0({0}, 3);

  // f = 1 reproduces the path distance, bit for bit
  {
    const SolveReport rep = solve_eikonal(graph, GraphFunction::Ones(3),
                                          GraphFunction::Zero(3), gamma0);
    const ExtendedDistance d = path_distance(graph, gamma0, 1.0);
    CHECK(rep.status == SolveStatus::converged);
    for (int x = 0; x < 3; ++x) CHECK(rep.solution[x] == d[x]);
  }
  // hand propagation with node-dependent cost
  {
    GraphFunction f(3);
    f << 1, 2, 3;
    const SolveReport rep =
        solve_eikonal(graph, f, GraphFunction::Zero(3), gamma0);
    CHECK(rep.solution[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(rep.solution[2] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(rep.residual <= 1e-12);
  }
  // one interior vertex hanging off the boundary with weight w
  {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
    w(0, 1) = 0.25;
    w(1, 0) = 0.25;
    GraphFunction g = GraphFunction::Zero(2);
    g[0] = 1.5;
    GraphFunction f = GraphFunction::Constant(2, 3.0);
    const SolveReport rep =
        solve_eikonal(Graph{w}, f, g, BoundarySet({0}, 2));
    CHECK(rep.solution[1] == doctest::Approx(1.5 + 3.0 / 0.25));
  }
  // strictly positive f required
  CHECK_THROWS_AS(solve_eikonal(graph, GraphFunction::Zero(3),
                                GraphFunction::Zero(3), gamma0),
                  ValidationError);
}

TEST_CASE("eikonal solve equals path distance on random digraphs") {
  RngStream rng(22, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + rng.uniform_int(12);
    std::vector<int> gamma{0};
    if (n > 5) gamma.push_back(3);
    const Graph graph =
        oracle::random_gamma_connected_graph(rng, n, gamma, trial % 2 == 0);
    const BoundarySet boundary(gamma, n);
    const SolveReport rep = solve_eikonal(graph, GraphFunction::Ones(n),
                                          GraphFunction::Zero(n), boundary);
    const ExtendedDistance d = path_distance(graph, boundary, 1.0);
    REQUIRE(rep.status == SolveStatus::converged);
    for (int x = 0; x < n; ++x) CHECK(rep.solution[x] == d[x]);
  }
}

TEST_CASE("eikonal I form is the exact negation transform") {
  RngStream rng(23, 0);
  const int n = 6;
  const Graph graph = oracle::random_gamma_connected_graph(rng, n, {0, 1});
  const BoundarySet boundary({0, 1}, n);
  const GraphFunction f = oracle::random_function(rng, n, 0.5, 2.0);
  const GraphFunction g = oracle::random_function(rng, n, -1, 1);
  const SolveReport i_form = solve_eikonal(graph, f, g, boundary, Form::I);
  const SolveReport h_form =
      solve_eikonal(graph, f, (-g).eval(), boundary, Form::H);
  CHECK(i_form.status == SolveStatus::converged);
  CHECK(sup_norm(i_form.solution + h_form.solution) == 0.0);
  for (int x : boundary.interior())
    CHECK(std::abs(eval_eikonal(graph, i_form.solution, x, Form::I) - f[x]) <=
          1e-12);
  for (int b : boundary.members) CHECK(i_form.solution[b] == g[b]);
}

TEST_CASE("eikonal solve reports unreachable vertices as infeasible") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 1) = 1.0;  // vertex 2 unreachable from the boundary
  const SolveReport rep =
      solve_eikonal(Graph{w}, GraphFunction::Ones(3), GraphFunction::Zero(3),
                    BoundarySet({0}, 3));
  CHECK(rep.status == SolveStatus::infeasible);
}

TEST_CASE("p-eikonal solve") {
  const Graph graph = oracle::chain(3);
  const BoundarySet gamma0({0}, 3);

  // each step solves (1/2)(t - u_prev)^2 = 1/2
  {
    const SolveReport rep =
        solve_peikonal(graph, 2.0, GraphFunction::Constant(3, 0.5),
                       GraphFunction::Zero(3), gamma0);
    CHECK(rep.status == SolveStatus::converged);
    CHECK(std::abs(rep.solution[1] - 1.0) <= 1e-10);
    CHECK(std::abs(rep.solution[2] - 2.0) <= 1e-10);
  }
  // p = 1 goes through the exact piecewise-linear node solve
  {
    const SolveReport rep =
        solve_peikonal(graph, 1.0, GraphFunction::Ones(3),
                       GraphFunction::Zero(3), gamma0);
    CHECK(rep.status == SolveStatus::converged);
    CHECK(std::abs(rep.solution[1] - 1.0) <= 1e-10);
    CHECK(std::abs(rep.solution[2] - 2.0) <= 1e-10);
  }
  CHECK_THROWS_AS(solve_peikonal(graph, 0.9, GraphFunction::Ones(3),
                                 GraphFunction::Zero(3), gamma0),
                  ValidationError);
  CHECK_THROWS_AS(solve_peikonal(graph, 2.0, GraphFunction::Zero(3),
                                 GraphFunction::Zero(3), gamma0),
                  ValidationError);
}

TEST_CASE("p-eikonal residuals on random instances") {
  RngStream rng(24, 0);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 4 + rng.uniform_int(9);
    const std::vector<int> gamma{0};
    const Graph graph =
        oracle::random_gamma_connected_graph(rng, n, gamma, trial % 2 == 0);
    const BoundarySet boundary(gamma, n);
    const double p = (trial % 3 == 0) ? 1.0 : (trial % 3 == 1 ? 1.7 : 2.6);
    const GraphFunction f = oracle::random_function(rng, n, 0.4, 1.8);
    const GraphFunction g = oracle::random_function(rng, n, -0.5, 0.5);
    const SolveReport rep = solve_peikonal(graph, p, f, g, boundary);
    REQUIRE(rep.status == SolveStatus::converged);
    for (int x : boundary.interior())
      CHECK(std::abs(eval_peikonal(graph, p, rep.solution, x, Form::H) -
                     f[x]) <= 1e-10);
    // monotone iterates start at min g and never overshoot the solution
    const SolveReport i_form = solve_peikonal(graph, p, f, (-g).eval(),
                                              boundary, Form::H);
    CHECK(i_form.status == SolveStatus::converged);
  }
}

TEST_CASE("p-eikonal infeasible when an interior vertex has no inflow") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 1) = 1.0;
  const SolveReport rep =
      solve_peikonal(Graph{w}, 2.0, GraphFunction::Ones(3),
                     GraphFunction::Zero(3), BoundarySet({0}, 3));
  CHECK(rep.status == SolveStatus::infeasible);
}

TEST_CASE("perron sweep on the linear generator") {
  const TransitionKernel walk = oracle::chain_walk(3);
  const BoundarySet boundary({0, 2}, 3);
  const GraphFunction f = GraphFunction::Ones(3);
  const GraphFunction g = GraphFunction::Zero(3);
  // the equation I(u,.) = -f with I = L; u == 0 on the interior is a
  // subsolution since L(0,.) = 0 >= -1
  std::vector<double> mins;
  GraphFunction prev = GraphFunction::Zero(3);
  bool first = true;
  const SolveReport rep = perron_gauss_seidel(
      LinearGenerator{walk}, (-f).eval(), g, boundary, GraphFunction::Zero(3),
      {}, [&](const GraphFunction& u) {
        if (!first) mins.push_back((u - prev).minCoeff());
        prev = u;
        first = false;
      });
  const SolveReport direct = solve_linear_exit(walk, f, g, boundary);
  CHECK(rep.status == SolveStatus::converged);
  CHECK(sup_norm(rep.solution - direct.solution) <= 1e-8);
  for (double m : mins) CHECK(m >= -1e-12);
}

TEST_CASE("perron rejects a start that is not a subsolution") {
  const TransitionKernel walk = oracle::chain_walk(3);
  const BoundarySet boundary({0, 2}, 3);
  GraphFunction bad = GraphFunction::Zero(3);
  bad[1] = 5.0;  // exceeds the solution, L(bad,1) < -1
  CHECK_THROWS_AS(
      perron_gauss_seidel(LinearGenerator{walk},
                          GraphFunction::Constant(3, -1.0),
                          GraphFunction::Zero(3), boundary, bad),
      ValidationError);
  GraphFunction above_g = GraphFunction::Zero(3);
  above_g[0] = 1.0;  // exceeds g on the boundary
  CHECK_THROWS_AS(
      perron_gauss_seidel(LinearGenerator{walk},
                          GraphFunction::Constant(3, -1.0),
                          GraphFunction::Zero(3), boundary, above_g),
      ValidationError);
}

TEST_CASE("perron matches the specialized solvers") {
  RngStream rng(25, 0);

  // Bellman
  {
    const KernelFamily family = oracle::chain_left_right(5);
    const BoundarySet boundary({0, 4}, 5);
    const GraphFunction f = GraphFunction::Ones(5);
    const GraphFunction g = GraphFunction::Zero(5);
    const SolveReport vi = value_iteration_bellman(family, f, g, boundary);
    const SolveReport pe = perron_gauss_seidel(
        BellmanInf{family}, (-f).eval(), g, boundary, GraphFunction::Zero(5));
    CHECK(pe.status == SolveStatus::converged);
    CHECK(sup_norm(pe.solution - vi.solution) <= 1e-8);
  }
  // eikonal and p-eikonal, I form, from the distance-profile subsolution
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 4 + rng.uniform_int(5);
    const Graph graph = oracle::random_gamma_connected_graph(rng, n, {0});
    const BoundarySet boundary({0}, n);
    const GraphFunction f = oracle::random_function(rng, n, 0.5, 1.5);
    const GraphFunction g = oracle::random_function(rng, n, -0.5, 0.5);

    const SolveReport ei = solve_eikonal(graph, f, g, boundary, Form::I);
    const SolveReport pe = perron_gauss_seidel(
        EikonalOp{graph, Form::I}, f, g, boundary,
        oracle::eikonal_subsolution(graph, boundary, f, g));
    REQUIRE(pe.status == SolveStatus::converged);
    CHECK(sup_norm(pe.solution - ei.solution) <= 1e-8);

    const double p = trial % 2 == 0 ? 2.0 : 1.5;
    const SolveReport ps = solve_peikonal(graph, p, f, g, boundary, Form::I);
    const SolveReport pp = perron_gauss_seidel(
        PEikonalOp{graph, p, Form::I}, f, g, boundary,
        oracle::peikonal_subsolution(graph, p, boundary, f, g));
    REQUIRE(pp.status == SolveStatus::converged);
    CHECK(sup_norm(pp.solution - ps.solution) <= 1e-8);
  }
}

TEST_CASE("exit-time certificate") {
  // single symmetric kernel on the 3-chain: expected exit time 1
  {
    const KernelFamily family({oracle::chain_walk(3)});
    const ExitCertificate cert =
        certify_exit_time(family, BoundarySet({0, 2}, 3));
    CHECK(cert.status == SolveStatus::converged);
    CHECK(cert.worst_expected_exit[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cert.phi[1] <= 0.0);
    CHECK(cert.phi[0] == 0.0);
    CHECK(cert.bound == doctest::Approx(2.0).epsilon(1e-9));
  }
  // kernel pair allowing the deterministic 2-cycle between x2 and x3
  {
    Eigen::MatrixXd left = Eigen::MatrixXd::Zero(4, 4);
    left(0, 1) = 1.0;
    left(1, 0) = 1.0;
    left(2, 1) = 1.0;
    left(3, 2) = 1.0;
    Eigen::MatrixXd right = Eigen::MatrixXd::Zero(4, 4);
    right(0, 1) = 1.0;
    right(1, 2) = 1.0;
    right(2, 3) = 1.0;
    right(3, 2) = 1.0;
    const KernelFamily family(
        {TransitionKernel{left}, TransitionKernel{right}});
    SolveOptions opts;
    opts.tol = 1e-5;
    opts.max_iter = 500'000;
    const ExitCertificate cert =
        certify_exit_time(family, BoundarySet({0, 3}, 4), opts);
    CHECK(cert.status == SolveStatus::infeasible);
  }
  // every kernel jumps straight to the boundary: exit in one step surely
  {
    Eigen::MatrixXd jump = Eigen::MatrixXd::Zero(4, 4);
    jump(0, 1) = 1.0;
    jump(1, 0) = 1.0;
    jump(2, 0) = 0.5;
    jump(2, 3) = 0.5;
    jump(3, 0) = 1.0;
    const KernelFamily family({TransitionKernel{jump}});
    const ExitCertificate cert =
        certify_exit_time(family, BoundarySet({0, 3}, 4));
    CHECK(cert.status == SolveStatus::converged);
    CHECK(cert.worst_expected_exit[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cert.worst_expected_exit[2] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("comparison conclusion across ordered solver outputs") {
  RngStream rng(26, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5 + rng.uniform_int(4);
    const Graph graph = oracle::random_gamma_connected_graph(rng, n, {0, 1});
    const BoundarySet boundary({0, 1}, n);

    // eikonal, I form: bigger right-hand side gives the smaller solution
    const GraphFunction f_small = oracle::random_function(rng, n, 0.4, 1.0);
    const GraphFunction f_big = f_small.array() + rng.uniform(0.1, 1.0);
    const GraphFunction gu = oracle::random_function(rng, n, -1, 1);
    const GraphFunction gv = oracle::random_function(rng, n, -1, 1);
    const SolveReport u = solve_eikonal(graph, f_big, gu, boundary, Form::I);
    const SolveReport v = solve_eikonal(graph, f_small, gv, boundary, Form::I);
    double interior_gap = 0.0, boundary_gap = 0.0;
    for (int x = 0; x < n; ++x) {
      const double gap = std::max(u.solution[x] - v.solution[x], 0.0);
      if (boundary.contains(x))
        boundary_gap = std::max(boundary_gap, gap);
      else
        interior_gap = std::max(interior_gap, gap);
    }
    CHECK(interior_gap <= boundary_gap + 1e-9);
  }
}

TEST_CASE("policy iteration attaches the offending policy on failure") {
  // the only kernel cycles between the interior vertices
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(4, 4);
  rows(0, 1) = 1.0;
  rows(1, 2) = 1.0;
  rows(2, 1) = 1.0;
  rows(3, 2) = 1.0;
  const KernelFamily family({TransitionKernel{rows}});
  const PolicyIterationResult res = policy_iteration_bellman(
      family, GraphFunction::Ones(4), GraphFunction::Zero(4),
      BoundarySet({0, 3}, 4));
  CHECK(res.report.status == SolveStatus::infeasible);
  CHECK(res.policy.choice == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("value iteration reports max_iter when cut short") {
  const KernelFamily family({oracle::chain_walk(7)});
  SolveOptions opts;
  opts.max_iter = 3;
  const SolveReport rep =
      value_iteration_bellman(family, GraphFunction::Ones(7),
                              GraphFunction::Zero(7), BoundarySet({0, 6}, 7),
                              opts);
  CHECK(rep.status == SolveStatus::max_iter);
  CHECK(rep.iterations == 3);
  CHECK(rep.residual > opts.tol);
}

TEST_CASE("perron handles the Pucci and J operators") {
  RngStream rng(27, 0);
  const int n = 5;
  const Graph graph = oracle::random_gamma_connected_graph(rng, n, {0});
  const BoundarySet boundary({0}, n);
  const GraphFunction f = GraphFunction::Constant(n, -1.0);
  const GraphFunction g = GraphFunction::Zero(n);

  const OperatorHandle pucci = PucciJMinusOp{graph, 0.5, 2.0};
  const SolveReport rp = perron_gauss_seidel(pucci, f, g, boundary,
                                             GraphFunction::Zero(n));
  CHECK(rp.status == SolveStatus::converged);
  double res = 0.0;
  for (int x : boundary.interior())
    res = std::max(res, std::abs(eval(pucci, rp.solution, x) - f[x]));
  CHECK(res <= 1e-10);

  const OperatorHandle cubic_j = DifferenceMonotoneOp{
      graph, MonotoneProfile([](double t) { return t + t * t * t; })};
  const SolveReport rj = perron_gauss_seidel(cubic_j, f, g, boundary,
                                             GraphFunction::Zero(n));
  CHECK(rj.status == SolveStatus::converged);
  for (int x : boundary.interior())
    CHECK(std::abs(eval(cubic_j, rj.solution, x) - f[x]) <= 1e-10);
}
