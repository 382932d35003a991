#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "sng/scenario.hpp"

namespace sng {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const;
};

struct AcceptanceOptions {
  std::filesystem::path out = "acceptance_out";
  unsigned jobs = 1;
  /// Supplementary runs that are printed as INFO and never gate.
  bool supplementary = true;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  std::vector<std::string> info;

  bool passed() const;
};

/// Runs every acceptance criterion at its pinned tolerance. When `progress`
/// is set, each criterion line is written as soon as it is decided.
AcceptanceReport run_acceptance(const AcceptanceOptions& options, std::ostream* progress = nullptr);

/// One "[PASS] n name: ..." or "[FAIL] n name: ..." line.
std::string format_criterion(const CriterionResult& c);

void write_acceptance(std::ostream& out, const AcceptanceReport& report);

// Property-suite pieces, exposed for the unit tests.

/// Forward then backward with the linear propagator; max |psi - psi0| / max |psi0|.
double time_reversal_error(std::size_t steps);
/// max |V[lambda f] - |lambda|^2 V[f]| / max |V[lambda f]| for the sphere kernel.
double coulomb_scaling_error(Complex lambda);
/// Change of each decomposition field under a common global phase, relative
/// to max(field scale, 1).
struct GaugeInvariance {
  double worst = 0.0;
  std::string worst_field;
  std::vector<std::pair<std::string, double>> fields;
};

GaugeInvariance gauge_invariance(double phase);
/// e(dt) / e(dt/2) against a dt/8 reference for the self-trapped model.
double convergence_ratio();

}  // namespace sng
