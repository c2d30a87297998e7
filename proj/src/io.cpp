#include "hjb/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace hjb {
namespace io {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json parse_inline_or_file(const std::string& spec) {
  const auto first = spec.find_first_not_of(" \t");
  if (first != std::string::npos && spec[first] == '[') {
    try {
      return json::parse(spec);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("inline JSON: ") + e.what());
    }
  }
  return parse_file(spec);
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ValidationError(where + ": expected a nonempty array of rows");
  const int n = static_cast<int>(j.size());
  Eigen::MatrixXd m(n, n);
  for (int x = 0; x < n; ++x) {
    if (!j[x].is_array() || static_cast<int>(j[x].size()) != n)
      throw ValidationError(where + ": row " + std::to_string(x) +
                            " must hold " + std::to_string(n) + " numbers");
    for (int y = 0; y < n; ++y) {
      if (!j[x][y].is_number())
        throw ValidationError(where + ": entry (" + std::to_string(x) + "," +
                              std::to_string(y) + ") is not a number");
      m(x, y) = j[x][y].get<double>();
    }
  }
  return m;
}

GraphFunction function_from_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  GraphFunction u = GraphFunction::Zero(n);
  std::vector<bool> seen(n, false);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int idx;
    double value;
    if (std::sscanf(line.c_str(), "%d,%lf", &idx, &value) != 2)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": expected \"index,value\"");
    if (idx < 0 || idx >= n)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": index out of range");
    if (seen[idx])
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": duplicate index " + std::to_string(idx));
    seen[idx] = true;
    u[idx] = value;
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i])
      throw ValidationError(path + ": missing value for index " +
                            std::to_string(i));
  validate_function(u, n, path);
  return u;
}

GraphFunction function_from_json_array(const json& j, int n,
                                       const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ValidationError(where + ": expected an array of " +
                          std::to_string(n) + " numbers");
  GraphFunction u(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_number())
      throw ValidationError(where + ": entry " + std::to_string(i) +
                            " is not a number");
    u[i] = j[i].get<double>();
  }
  validate_function(u, n, where);
  return u;
}

void append_double(std::string& out, double v) { out += format_double(v); }

void append_array(std::string& out, const GraphFunction& u) {
  out += '[';
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (i) out += ',';
    append_double(out, u[i]);
  }
  out += ']';
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  if (std::isnan(v)) return "\"nan\"";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Graph load_graph(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
    throw ValidationError(path + ": graph file needs keys \"n\" and \"edges\"");
  if (!j["n"].is_number_integer())
    throw ValidationError(path + ": \"n\" must be an integer");
  const int n = j["n"].get<int>();
  if (n < 2) throw ValidationError(path + ": \"n\" must be at least 2");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  const json& edges = j["edges"];
  if (!edges.is_array())
    throw ValidationError(path + ": \"edges\" must be an array");
  for (size_t k = 0; k < edges.size(); ++k) {
    const json& e = edges[k];
    if (!e.is_array() || e.size() != 3)
      throw ValidationError(path + ": edge " + std::to_string(k) +
                            " must be [source, target, weight]");
    const int s = e[0].get<int>();
    const int t = e[1].get<int>();
    if (s < 0 || s >= n || t < 0 || t >= n)
      throw ValidationError(path + ": edge " + std::to_string(k) +
                            " endpoint out of range");
    w(s, t) = e[2].get<double>();
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    for (const auto& l : j["labels"]) labels.push_back(l.get<std::string>());
    if (static_cast<int>(labels.size()) != n)
      throw ValidationError(path + ": \"labels\" must hold n strings");
  }
  try {
    return Graph(std::move(w), std::move(labels));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

BoundarySet load_boundary(const std::string& path_or_inline, int n) {
  const json j = parse_inline_or_file(path_or_inline);
  if (!j.is_array())
    throw ValidationError(path_or_inline + ": boundary must be an array");
  std::vector<int> members;
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw ValidationError(path_or_inline + ": boundary entries must be integers");
    members.push_back(v.get<int>());
  }
  try {
    return BoundarySet(std::move(members), n);
  } catch (const ValidationError& e) {
    throw ValidationError(path_or_inline + ": " + e.what());
  }
}

GraphFunction load_function(const std::string& spec, int n) {
  if (spec == "ones") return GraphFunction::Ones(n);
  if (spec == "zeros") return GraphFunction::Zero(n);
  {
    char* end = nullptr;
    const double v = std::strtod(spec.c_str(), &end);
    if (end && *end == '\0' && end != spec.c_str())
      return GraphFunction::Constant(n, v);
  }
  const auto first = spec.find_first_not_of(" \t");
  if (first != std::string::npos && spec[first] == '[')
    return function_from_json_array(parse_inline_or_file(spec), n, "inline function");
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv")
    return function_from_csv(spec, n);
  return function_from_json_array(parse_file(spec), n, spec);
}

TransitionKernel load_kernel(const std::string& path, bool normalize) {
  try {
    return TransitionKernel(matrix_from_json(parse_file(path), path), normalize);
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw ValidationError(path + ": " + what);
  }
}

KernelFamily load_family(const std::string& path, bool normalize) {
  const json j = parse_file(path);
  if (!j.is_array() || j.empty())
    throw ValidationError(path + ": family file must be a nonempty array of matrices");
  std::vector<TransitionKernel> kernels;
  for (size_t i = 0; i < j.size(); ++i) {
    try {
      kernels.emplace_back(
          matrix_from_json(j[i], "kernel " + std::to_string(i)), normalize);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }
  try {
    return KernelFamily(std::move(kernels));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

Policy load_policy(const std::string& path_or_inline, const KernelFamily& family) {
  const json j = parse_inline_or_file(path_or_inline);
  if (!j.is_array())
    throw ValidationError(path_or_inline + ": policy must be an array");
  std::vector<int> choice;
  for (const auto& v : j) choice.push_back(v.get<int>());
  try {
    return Policy(std::move(choice), family);
  } catch (const ValidationError& e) {
    throw ValidationError(path_or_inline + ": " + e.what());
  }
}

std::string to_json(const GraphFunction& u) {
  std::string out;
  append_array(out, u);
  return out;
}

std::string to_csv(const GraphFunction& u) {
  std::string out;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    if (std::isinf(u[i])) {
      out += u[i] > 0 ? "inf" : "-inf";
    } else {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", u[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const SolveReport& report) {
  std::string out = "{\"status\":\"";
  out += to_string(report.status);
  out += "\",\"iterations\":" + std::to_string(report.iterations);
  out += ",\"residual\":";
  append_double(out, report.residual);
  out += ",\"solution\":";
  append_array(out, report.solution);
  out += '}';
  return out;
}

std::string to_csv_solution(const SolveReport& report) {
  return to_csv(report.solution);
}

std::string to_json(const MCEstimate& est) {
  std::string out = "{\"mean\":";
  append_double(out, est.mean);
  out += ",\"stderr\":";
  append_double(out, est.stderr_);
  out += ",\"samples\":" + std::to_string(est.samples);
  out += ",\"censored\":" + std::to_string(est.censored);
  if (est.censored_warning())
    out += ",\"warning\":\"censored fraction exceeds 1%; estimate biased\"";
  out += '}';
  return out;
}

std::string to_json(const CheckReport& report) {
  std::string out = "{\"passed\":";
  out += report.passed ? "true" : "false";
  out += ",\"trials\":" + std::to_string(report.trials);
  out += ",\"worst_violation\":";
  append_double(out, report.worst_violation);
  if (report.witness) {
    out += ",\"witness\":{\"u\":";
    append_array(out, report.witness->u);
    out += ",\"v\":";
    append_array(out, report.witness->v);
    out += ",\"x\":" + std::to_string(report.witness->x);
    out += ",\"s\":";
    append_double(out, report.witness->su);
    out += ",\"t\":";
    append_double(out, report.witness->sv);
    out += '}';
  }
  out += '}';
  return out;
}

std::string to_json(const ExitCertificate& cert) {
  std::string out = "{\"status\":\"";
  out += to_string(cert.status);
  out += "\",\"iterations\":" + std::to_string(cert.iterations);
  out += ",\"bound\":";
  append_double(out, cert.bound);
  out += ",\"phi\":";
  append_array(out, cert.phi);
  out += ",\"worst_expected_exit\":";
  append_array(out, cert.worst_expected_exit);
  out += '}';
  return out;
}

}  // namespace io
}  // namespace hjb
