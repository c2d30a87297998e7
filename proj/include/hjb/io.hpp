#pragma once

#include <string>

#include "hjb/solvers.hpp"
#include "hjb/stochastic.hpp"
#include "hjb/verification.hpp"

namespace hjb {
namespace io {

// Floats are printed with 17 significant digits so every value re-ingests
// bit-identically; infinities render as the string "inf".
std::string format_double(double v);

// Graph file: {"n": int, "labels": [string]?, "edges": [[source, target,
// weight], ...]} with 0-based indices; absent edges default to weight 0.
Graph load_graph(const std::string& path);

// Boundary: JSON array of vertex indices; inline text starting with '[' is
// parsed directly, anything else is a file path.
BoundarySet load_boundary(const std::string& path_or_inline, int n);

// Function data: "ones"/"zeros", a numeric literal (constant function), an
// inline JSON array, a .csv of "index,value" lines, or a JSON array file.
GraphFunction load_function(const std::string& spec, int n);

// Kernel file: one n x n row-stochastic matrix; family file: JSON array of
// such matrices.
TransitionKernel load_kernel(const std::string& path, bool normalize = false);
KernelFamily load_family(const std::string& path, bool normalize = false);

Policy load_policy(const std::string& path_or_inline, const KernelFamily& family);

std::string to_json(const GraphFunction& u);
std::string to_csv(const GraphFunction& u);
std::string to_json(const SolveReport& report);
std::string to_csv_solution(const SolveReport& report);
std::string to_json(const MCEstimate& est);
std::string to_json(const CheckReport& report);
std::string to_json(const ExitCertificate& cert);

}  // namespace io
}  // namespace hjb
