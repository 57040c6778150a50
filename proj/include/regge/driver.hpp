#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "regge/curvature.hpp"
#include "regge/dualnorm.hpp"
#include "regge/linearization.hpp"

namespace regge {

// One experiment configuration, mirrored by the CLI flags.
struct RunConfig {
  int dim = 3;
  std::vector<int> levels{1, 2};
  int order = 1;             // Regge order k
  int test_order = -1;       // Lagrange order m; negative means k + 2
  double perturb = 0.0;      // vertex jitter amplitude, fraction of h-tilde
  std::uint64_t seed = 7;
  int gp = 5;                // parameter-quadrature points for the probes
  std::string functional = "qop";
  std::string out;           // CSV path; empty writes to stdout

  int resolved_test_order() const {
    return test_order >= 0 ? test_order : order + 2;
  }
  // Short fingerprint of every field, carried in each CSV row so output
  // files are self-identifying.
  std::string hash() const;
  std::string canonical() const;
};

struct LevelRow {
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  double error = 0.0;
  double order = 0.0;      // observed, from actual h ratios; 0 on first row
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  int gp = 0;
};

struct RunResult {
  std::vector<LevelRow> rows;
  bool ok = true;
  std::string message;
};

// Per level: interpolate the benchmark metric, assemble the selected
// functional and its exact counterpart, report the H^-2 norm of the
// difference. Selector values: gauss (2D), scalar, ricci, einstein, qop,
// riemann, inc.
RunResult run_convergence(const RunConfig& cfg);

// H^-2 norms of the bone-concentrated probes F1, F2, F3 per level, for the
// configured gp and for gp = 7 when comparing quadrature sensitivity.
RunResult run_probes(const RunConfig& cfg);

struct LinCheckResult {
  bool ok = false;
  double eps_order = 0.0;       // observed order of the central-difference fit
  double inc_rel = 1.0;         // |b + 2*inc| / |b|
  double flipped_rel = 0.0;     // same with the flipped bone-jump sign
  std::string message;
};

// Central-difference check of the linearization identity plus the
// incompatibility identity, including the deliberate sign-flip control.
LinCheckResult run_lincheck(const RunConfig& cfg);

void write_convergence_csv(std::ostream& out, const RunConfig& cfg,
                           const RunResult& r);
void write_probes_csv(std::ostream& out, const RunConfig& cfg,
                      const RunResult& r);

// Observed order between two (h, error) pairs, using the actual ratio.
double observed_order(double h_coarse, double e_coarse, double h_fine,
                      double e_fine);

// The benchmark metric for the configured dimension.
SmoothMetric benchmark_metric(int dim);

}  // namespace regge
