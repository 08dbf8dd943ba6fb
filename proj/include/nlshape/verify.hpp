#pragma once

#include <string>
#include <vector>

#include "nlshape/config.hpp"
#include "nlshape/oracle.hpp"

namespace nlshape {

// Smooth data field used by the verification suites (FD needs u-bar as a
// fixed spatial field): 0.1 + 0.2x - 0.3y + 0.5x^2 + 0.4xy - 0.2y^2.
AnalyticField verification_data();

// delta at least the diameter of the mesh bounding box: no pair is truncated.
bool full_interaction(const Mesh& mesh, const KernelSpec& kernel);

struct VerifyOptions {
  int samples = 10;
  unsigned seed = 1;
  std::vector<double> t_list{1e-2, 1e-3, 1e-4};
};

struct CheckLine {
  std::string name;
  double value;
  double tol;
  bool pass;
};
struct VerifyReport {
  std::string suite;
  std::vector<CheckLine> checks;
  std::vector<CheckLine> diagnostics;  // printed, not part of pass()
  std::vector<std::string> files;
  bool pass() const;
};

// suite: fd1, fd2, assembly, norms.  CSV reports are written to out_dir.
VerifyReport run_verify(const AppConfig& cfg, const std::string& suite, const VerifyOptions& opt,
                        const std::string& out_dir);

// Pieces used by the assembly suite and the tests.
struct AssemblyComparison {
  std::vector<CheckLine> checks;
};
AssemblyComparison compare_with_dense(const Mesh& mesh, const Problem& problem, unsigned seed);

}  // namespace nlshape
