// Command-line front end: ingest problem files, run a solver / check /
// simulation, print machine-readable output on stdout. Diagnostics go to
// stderr. Exit codes: 0 success or converged, 2 validation error,
// 3 infeasible or non-converged, 4 internal error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hjb/io.hpp"

namespace {

using namespace hjb;
using nlohmann::json;

struct CommonFlags {
  std::string graph, boundary, kernel, family, f = "zeros", g = "zeros";
  std::string op_spec, output = "json", form;
  std::string policy, w, start;
  double p = 2.0, lambda = 1.0, Lambda = 1.0, exponent = 1.0;
  double tol = 1e-10, slack = 1e-12, radius = 5.0;
  long max_iter = 1'000'000, samples = 100'000, max_steps = 1'000'000,
       trials = 1000;
  uint64_t seed = 0;
  int x0 = 0;
  bool normalize = false, serial = false, parallel_checks = false;
};

int status_exit(SolveStatus s) {
  return s == SolveStatus::converged ? 0 : 3;
}

Form parse_form(const std::string& text, Form fallback) {
  if (text.empty()) return fallback;
  if (text == "h" || text == "H") return Form::H;
  if (text == "i" || text == "I") return Form::I;
  throw ValidationError("--form must be h or i");
}

void emit_report(const SolveReport& report, const std::string& output) {
  if (output == "csv")
    std::cout << io::to_csv_solution(report);
  else
    std::cout << io::to_json(report) << "\n";
}

// Operator specification: {"kind": ..., "form": "h"|"i", "p", "lambda",
// "Lambda", "graph"|"kernel"|"family": path}. File references inside the spec
// win over the equally named command-line flags. User-supplied c and H stay
// library-level extension points, so kinds "j" and "hamiltonian" are not
// loadable here.
struct OperatorSpec {
  std::string kind;
  json body;

  static OperatorSpec parse(const std::string& spec) {
    json j;
    if (!spec.empty() && spec.front() == '{') {
      j = json::parse(spec, nullptr, false);
      if (j.is_discarded())
        throw ValidationError("--operator: malformed inline JSON");
    } else {
      std::ifstream in(spec);
      if (!in) throw ValidationError(spec + ": cannot open file");
      j = json::parse(in, nullptr, false);
      if (j.is_discarded()) throw ValidationError(spec + ": malformed JSON");
    }
    if (!j.is_object() || !j.contains("kind"))
      throw ValidationError("--operator: spec needs a \"kind\"");
    return {j["kind"].get<std::string>(), j};
  }

  std::string file(const std::string& key, const std::string& flag) const {
    if (body.contains(key)) return body[key].get<std::string>();
    if (!flag.empty()) return flag;
    throw ValidationError("operator kind \"" + kind + "\" needs a \"" + key +
                          "\" reference (spec key or --" + key + ")");
  }

  double number(const std::string& key, double flag_value) const {
    return body.contains(key) ? body[key].get<double>() : flag_value;
  }
};

OperatorHandle build_operator(const OperatorSpec& spec, const CommonFlags& fl) {
  // operator specs default to the GCP-side I form
  const Form form =
      parse_form(spec.body.value("form", fl.form.empty() ? "i" : fl.form),
                 Form::I);
  if (spec.kind == "linear")
    return LinearGenerator{
        io::load_kernel(spec.file("kernel", fl.kernel), fl.normalize)};
  if (spec.kind == "bellman")
    return BellmanInf{
        io::load_family(spec.file("family", fl.family), fl.normalize)};
  if (spec.kind == "extremal-minus")
    return ExtremalMinus{
        io::load_family(spec.file("family", fl.family), fl.normalize)};
  if (spec.kind == "extremal-plus")
    return ExtremalPlus{
        io::load_family(spec.file("family", fl.family), fl.normalize)};
  if (spec.kind == "eikonal")
    return EikonalOp{io::load_graph(spec.file("graph", fl.graph)), form};
  if (spec.kind == "peikonal") {
    const double p = spec.number("p", fl.p);
    if (!(p >= 1.0)) throw ValidationError("peikonal needs p >= 1");
    return PEikonalOp{io::load_graph(spec.file("graph", fl.graph)), p, form};
  }
  if (spec.kind == "pucci-j") {
    const double lo = spec.number("lambda", fl.lambda);
    const double hi = spec.number("Lambda", fl.Lambda);
    if (!(lo > 0.0) || !(hi >= lo))
      throw ValidationError("pucci-j needs 0 < lambda <= Lambda");
    return PucciJMinusOp{io::load_graph(spec.file("graph", fl.graph)), lo, hi};
  }
  if (spec.kind == "j" || spec.kind == "hamiltonian")
    throw ValidationError("operator kind \"" + spec.kind +
                          "\" is a library-level extension point; it cannot "
                          "be loaded from a file");
  throw ValidationError("unknown operator kind \"" + spec.kind + "\"");
}

// The explicit Hamiltonian form of a built-in operator; wrap_hamiltonian on
// the result reproduces the operator's I form.
HamiltonianSpec canonical_hamiltonian(const OperatorSpec& spec,
                                      const CommonFlags& fl) {
  if (spec.kind == "linear") {
    auto kernel = std::make_shared<TransitionKernel>(
        io::load_kernel(spec.file("kernel", fl.kernel), fl.normalize));
    return {kernel->size(),
            [kernel](const Eigen::VectorXd& pv, double, int x) {
              return kernel->rows.row(x).dot(pv);
            }};
  }
  if (spec.kind == "bellman" || spec.kind == "extremal-minus" ||
      spec.kind == "extremal-plus") {
    auto family = std::make_shared<KernelFamily>(
        io::load_family(spec.file("family", fl.family), fl.normalize));
    const bool plus = spec.kind == "extremal-plus";
    return {family->size(),
            [family, plus](const Eigen::VectorXd& pv, double, int x) {
              double best = plus ? -INFINITY : INFINITY;
              for (const auto& k : family->kernels) {
                const double v = k.rows.row(x).dot(pv);
                best = plus ? std::max(best, v) : std::min(best, v);
              }
              return best;
            }};
  }
  if (spec.kind == "eikonal") {
    auto graph =
        std::make_shared<Graph>(io::load_graph(spec.file("graph", fl.graph)));
    return {graph->size(),
            [graph](const Eigen::VectorXd& pv, double, int x) {
              double best = -INFINITY;
              for (int y = 0; y < graph->size(); ++y)
                best = std::max(best, graph->weights(y, x) * pv[y]);
              return best;
            }};
  }
  if (spec.kind == "peikonal") {
    auto graph =
        std::make_shared<Graph>(io::load_graph(spec.file("graph", fl.graph)));
    const double p = spec.number("p", fl.p);
    if (!(p >= 1.0)) throw ValidationError("peikonal needs p >= 1");
    return {graph->size(),
            [graph, p](const Eigen::VectorXd& pv, double, int x) {
              double acc = 0.0;
              for (int y = 0; y < graph->size(); ++y)
                if (pv[y] > 0.0)
                  acc += graph->weights(y, x) * std::pow(pv[y], p);
              return acc / p;
            }};
  }
  if (spec.kind == "pucci-j") {
    auto graph =
        std::make_shared<Graph>(io::load_graph(spec.file("graph", fl.graph)));
    const double lo = spec.number("lambda", fl.lambda);
    const double hi = spec.number("Lambda", fl.Lambda);
    return {graph->size(),
            [graph, lo, hi](const Eigen::VectorXd& pv, double, int x) {
              double acc = 0.0;
              for (int y = 0; y < graph->size(); ++y) {
                const double w = graph->weights(y, x);
                if (w > 0.0)
                  acc += w * (pv[y] > 0.0 ? lo * pv[y] : hi * pv[y]);
              }
              return acc;
            }};
  }
  throw ValidationError("no canonical Hamiltonian for operator kind \"" +
                        spec.kind + "\"");
}

GraphFunction default_perron_start(const OperatorHandle& op,
                                   const GraphFunction& f,
                                   const GraphFunction& g,
                                   const BoundarySet& boundary) {
  const int n = operator_size(op);
  double gmin = INFINITY;
  for (int b : boundary.members) gmin = std::min(gmin, g[b]);
  double fmax = -INFINITY;
  for (int x : boundary.interior()) fmax = std::max(fmax, f[x]);

  if (const auto* eik = std::get_if<EikonalOp>(&op)) {
    const ExtendedDistance d = path_distance(eik->graph, boundary, 1.0);
    if (!d.allFinite())
      throw ValidationError("graph is not connected to the boundary; "
                            "no default subsolution, pass --start");
    return GraphFunction(GraphFunction::Constant(n, gmin) -
                         std::max(fmax, 0.0) * d);
  }
  if (const auto* pe = std::get_if<PEikonalOp>(&op)) {
    const ExtendedDistance d = path_distance(pe->graph, boundary, 1.0 / pe->p);
    if (!d.allFinite())
      throw ValidationError("graph is not connected to the boundary; "
                            "no default subsolution, pass --start");
    const double beta = std::pow(pe->p * std::max(fmax, 0.0), 1.0 / pe->p);
    return GraphFunction(GraphFunction::Constant(n, gmin) - beta * d);
  }
  // kernel-based and Pucci kinds: a constant is a subsolution when f <= 0
  if (fmax > 0.0)
    throw ValidationError("no default subsolution for this operator with "
                          "f > 0 somewhere; pass --start");
  return GraphFunction::Constant(n, gmin);
}

int cmd_distance(const CommonFlags& fl) {
  const Graph graph = io::load_graph(fl.graph);
  const BoundarySet boundary = io::load_boundary(fl.boundary, graph.size());
  const ExtendedDistance d = path_distance(graph, boundary, fl.exponent);
  if (fl.output == "csv")
    std::cout << io::to_csv(d);
  else
    std::cout << "{\"distance\":" << io::to_json(d) << "}\n";
  return 0;
}

int cmd_solve_linear(const CommonFlags& fl) {
  const TransitionKernel kernel = io::load_kernel(fl.kernel, fl.normalize);
  const int n = kernel.size();
  const BoundarySet boundary = io::load_boundary(fl.boundary, n);
  const SolveReport report =
      solve_linear_exit(kernel, io::load_function(fl.f, n),
                        io::load_function(fl.g, n), boundary);
  emit_report(report, fl.output);
  return status_exit(report.status);
}

int cmd_solve_bellman(const CommonFlags& fl, bool policy_method) {
  const KernelFamily family = io::load_family(fl.family, fl.normalize);
  const int n = family.size();
  const BoundarySet boundary = io::load_boundary(fl.boundary, n);
  const GraphFunction f = io::load_function(fl.f, n);
  const GraphFunction g = io::load_function(fl.g, n);
  const SolveOptions opts{fl.tol, fl.max_iter};
  if (policy_method) {
    const PolicyIterationResult result =
        policy_iteration_bellman(family, f, g, boundary, opts);
    if (fl.output == "csv") {
      std::cout << io::to_csv_solution(result.report);
    } else {
      std::string out = io::to_json(result.report);
      out.pop_back();  // strip '}' to append the policy
      out += ",\"policy\":[";
      for (size_t i = 0; i < result.policy.choice.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(result.policy.choice[i]);
      }
      out += "]}";
      std::cout << out << "\n";
    }
    return status_exit(result.report.status);
  }
  const SolveReport report =
      value_iteration_bellman(family, f, g, boundary, opts);
  emit_report(report, fl.output);
  return status_exit(report.status);
}

int cmd_solve_eikonal(const CommonFlags& fl, bool p_version) {
  const Graph graph = io::load_graph(fl.graph);
  const int n = graph.size();
  const BoundarySet boundary = io::load_boundary(fl.boundary, n);
  const GraphFunction f = io::load_function(fl.f, n);
  const GraphFunction g = io::load_function(fl.g, n);
  // the distance-style H form is the default for these solves
  const Form form = parse_form(fl.form, Form::H);
  const SolveReport report =
      p_version ? solve_peikonal(graph, fl.p, f, g, boundary, form,
                                 SolveOptions{fl.tol, fl.max_iter})
                : solve_eikonal(graph, f, g, boundary, form);
  emit_report(report, fl.output);
  return status_exit(report.status);
}

int cmd_solve_perron(const CommonFlags& fl) {
  const OperatorSpec spec = OperatorSpec::parse(fl.op_spec);
  const OperatorHandle op = build_operator(spec, fl);
  const int n = operator_size(op);
  const BoundarySet boundary = io::load_boundary(fl.boundary, n);
  const GraphFunction f = io::load_function(fl.f, n);
  const GraphFunction g = io::load_function(fl.g, n);
  const GraphFunction start = fl.start.empty()
                                  ? default_perron_start(op, f, g, boundary)
                                  : io::load_function(fl.start, n);
  const SolveReport report = perron_gauss_seidel(
      op, f, g, boundary, start, SolveOptions{fl.tol, fl.max_iter});
  emit_report(report, fl.output);
  return status_exit(report.status);
}

int cmd_check(const std::string& what, const CommonFlags& fl) {
  CheckOptions opts;
  opts.trials = fl.trials;
  opts.seed = fl.seed;
  opts.slack = fl.slack;
  opts.radius = fl.radius;
  // trial loops stay serial here unless asked; the merge is deterministic
  // either way
  opts.parallel = fl.parallel_checks;
  if (what == "convex") {
    if (!(fl.p > 1.0))
      throw ValidationError("check convex needs --p greater than 1");
    const Graph graph = io::load_graph(fl.graph);
    const ConvexCheckResult result =
        check_convex_representation(graph, fl.p, opts);
    std::cout << io::to_json(result.report) << "\n";
    return 0;
  }
  const OperatorSpec spec = OperatorSpec::parse(fl.op_spec);
  CheckReport report;
  if (what == "gcp")
    report = check_gcp(build_operator(spec, fl), opts);
  else if (what == "constant")
    report = check_constant_monotonicity(build_operator(spec, fl), opts);
  else
    report = check_differences_monotone(canonical_hamiltonian(spec, fl), opts);
  std::cout << io::to_json(report) << "\n";
  return 0;  // a failing check is a finding, not a run failure
}

int cmd_simulate(const CommonFlags& fl) {
  const SimOptions opts{fl.samples, fl.seed, fl.max_steps};
  MCEstimate est;
  int n = 0;
  if (!fl.family.empty()) {
    const KernelFamily family = io::load_family(fl.family, fl.normalize);
    n = family.size();
    if (fl.policy.empty())
      throw ValidationError("simulating a family needs --policy");
    const Policy policy = io::load_policy(fl.policy, family);
    const BoundarySet boundary = io::load_boundary(fl.boundary, n);
    est = fl.serial
              ? estimate_exit_functional_serial(
                    compose(family, policy), io::load_function(fl.f, n),
                    io::load_function(fl.g, n), boundary, fl.x0, opts)
              : evaluate_policy_mc(family, policy, io::load_function(fl.f, n),
                                   io::load_function(fl.g, n), boundary, fl.x0,
                                   opts);
  } else {
    const TransitionKernel kernel = io::load_kernel(fl.kernel, fl.normalize);
    n = kernel.size();
    const BoundarySet boundary = io::load_boundary(fl.boundary, n);
    const GraphFunction f = io::load_function(fl.f, n);
    const GraphFunction g = io::load_function(fl.g, n);
    est = fl.serial
              ? estimate_exit_functional_serial(kernel, f, g, boundary, fl.x0,
                                                opts)
              : estimate_exit_functional(kernel, f, g, boundary, fl.x0, opts);
  }
  std::cout << io::to_json(est) << "\n";
  return 0;
}

int cmd_dynkin(const CommonFlags& fl) {
  const TransitionKernel kernel = io::load_kernel(fl.kernel, fl.normalize);
  const int n = kernel.size();
  const BoundarySet boundary = io::load_boundary(fl.boundary, n);
  const GraphFunction w = io::load_function(fl.w, n);
  const SimOptions opts{fl.samples, fl.seed, fl.max_steps};
  const MCEstimate est =
      fl.serial ? verify_dynkin_serial(kernel, w, boundary, fl.x0, opts)
                : verify_dynkin(kernel, w, boundary, fl.x0, opts);
  std::cout << io::to_json(est) << "\n";
  return 0;
}

int cmd_certify(const CommonFlags& fl) {
  const KernelFamily family = io::load_family(fl.family, fl.normalize);
  const BoundarySet boundary = io::load_boundary(fl.boundary, family.size());
  const ExitCertificate cert =
      certify_exit_time(family, boundary, SolveOptions{fl.tol, fl.max_iter});
  std::cout << io::to_json(cert) << "\n";
  return status_exit(cert.status);
}

void add_common_problem_flags(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--boundary", fl.boundary,
                  "boundary vertices (JSON array inline or file)")
      ->required();
  cmd->add_option("--f", fl.f, "source data: ones|zeros|<const>|file|inline");
  cmd->add_option("--g", fl.g, "boundary data: ones|zeros|<const>|file|inline");
  cmd->add_option("--output", fl.output, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamilton-Jacobi-Bellman equations on finite weighted graphs"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  CommonFlags fl;
  int exit_code = 0;

  auto* distance = app.add_subcommand("distance", "path distance to the boundary");
  distance->add_option("--graph", fl.graph)->required();
  distance->add_option("--boundary", fl.boundary)->required();
  distance->add_option("--exponent", fl.exponent, "weight exponent (1 or 1/p)");
  distance->add_option("--output", fl.output)->check(CLI::IsMember({"json", "csv"}));
  distance->callback([&] { exit_code = cmd_distance(fl); });

  auto* solve = app.add_subcommand("solve", "deterministic solvers");
  solve->require_subcommand(1);

  auto* lin = solve->add_subcommand("linear", "L(u,.) = -f, u = g on the boundary");
  lin->add_option("--kernel", fl.kernel)->required();
  lin->add_flag("--normalize", fl.normalize, "rescale kernel rows to sum 1");
  add_common_problem_flags(lin, fl);
  lin->callback([&] { exit_code = cmd_solve_linear(fl); });

  auto* bel = solve->add_subcommand("bellman", "Bellman equation for a kernel family");
  bel->add_option("--family", fl.family)->required();
  bel->add_flag("--normalize", fl.normalize);
  bel->add_option("--tol", fl.tol);
  bel->add_option("--max-iter", fl.max_iter);
  bool policy_method = false;
  bel->add_flag("--policy-iteration", policy_method,
                "policy iteration instead of value iteration");
  add_common_problem_flags(bel, fl);
  bel->callback([&] { exit_code = cmd_solve_bellman(fl, policy_method); });

  auto* eik = solve->add_subcommand("eikonal", "graph eikonal equation");
  eik->add_option("--graph", fl.graph)->required();
  eik->add_option("--form", fl.form, "h (default) or i");
  add_common_problem_flags(eik, fl);
  eik->callback([&] { exit_code = cmd_solve_eikonal(fl, false); });

  auto* peik = solve->add_subcommand("peikonal", "graph p-eikonal equation");
  peik->add_option("--graph", fl.graph)->required();
  peik->add_option("--p", fl.p)->required();
  peik->add_option("--form", fl.form, "h (default) or i");
  peik->add_option("--tol", fl.tol);
  peik->add_option("--max-iter", fl.max_iter);
  add_common_problem_flags(peik, fl);
  peik->callback([&] { exit_code = cmd_solve_eikonal(fl, true); });

  auto* per = solve->add_subcommand(
      "perron", "monotone sweep for a generic GCP operator, I(u,.) = f");
  per->add_option("--operator", fl.op_spec, "operator spec (JSON file or inline)")
      ->required();
  per->add_option("--graph", fl.graph);
  per->add_option("--kernel", fl.kernel);
  per->add_option("--family", fl.family);
  per->add_option("--start", fl.start, "subsolution to start from");
  per->add_option("--p", fl.p);
  per->add_option("--lambda", fl.lambda);
  per->add_option("--Lambda", fl.Lambda);
  per->add_option("--tol", fl.tol);
  per->add_option("--max-iter", fl.max_iter);
  per->add_flag("--normalize", fl.normalize);
  add_common_problem_flags(per, fl);
  per->callback([&] { exit_code = cmd_solve_perron(fl); });

  auto* check = app.add_subcommand("check", "randomized property checks");
  check->require_subcommand(1);
  for (const char* what : {"gcp", "constant", "differences", "convex"}) {
    auto* sub = check->add_subcommand(
        what, std::string("check ") + what +
                  (std::string(what) == "convex" ? " structure of the p-eikonal operator"
                                                 : ""));
    sub->add_option("--operator", fl.op_spec);
    sub->add_option("--graph", fl.graph);
    sub->add_option("--kernel", fl.kernel);
    sub->add_option("--family", fl.family);
    sub->add_option("--p", fl.p);
    sub->add_option("--lambda", fl.lambda);
    sub->add_option("--Lambda", fl.Lambda);
    sub->add_option("--trials", fl.trials);
    sub->add_option("--seed", fl.seed);
    sub->add_option("--slack", fl.slack);
    sub->add_option("--radius", fl.radius);
    sub->add_flag("--parallel", fl.parallel_checks, "OpenMP trial loop");
    sub->add_flag("--normalize", fl.normalize);
    std::string what_s = what;
    sub->callback([&, what_s] { exit_code = cmd_check(what_s, fl); });
  }

  auto* sim = app.add_subcommand("simulate", "Monte Carlo exit functional");
  sim->add_option("--kernel", fl.kernel);
  sim->add_option("--family", fl.family);
  sim->add_option("--policy", fl.policy, "kernel index per vertex (with --family)");
  sim->add_option("--x0", fl.x0)->required();
  sim->add_option("--samples", fl.samples);
  sim->add_option("--seed", fl.seed);
  sim->add_option("--max-steps", fl.max_steps);
  sim->add_flag("--serial", fl.serial);
  sim->add_flag("--normalize", fl.normalize);
  add_common_problem_flags(sim, fl);
  sim->callback([&] { exit_code = cmd_simulate(fl); });

  auto* dyn = app.add_subcommand("dynkin", "Monte Carlo Dynkin defect");
  dyn->add_option("--kernel", fl.kernel)->required();
  dyn->add_option("--w", fl.w, "test function w")->required();
  dyn->add_option("--boundary", fl.boundary)->required();
  dyn->add_option("--x0", fl.x0)->required();
  dyn->add_option("--samples", fl.samples);
  dyn->add_option("--seed", fl.seed);
  dyn->add_option("--max-steps", fl.max_steps);
  dyn->add_flag("--serial", fl.serial);
  dyn->add_flag("--normalize", fl.normalize);
  dyn->callback([&] { exit_code = cmd_dynkin(fl); });

  auto* cert = app.add_subcommand("certify", "finite-exit-time certificate");
  cert->add_option("--family", fl.family)->required();
  cert->add_option("--boundary", fl.boundary)->required();
  cert->add_option("--tol", fl.tol);
  cert->add_option("--max-iter", fl.max_iter);
  cert->add_flag("--normalize", fl.normalize);
  cert->callback([&] { exit_code = cmd_certify(fl); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return exit_code;
}
