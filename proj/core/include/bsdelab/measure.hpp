#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bsdelab/psi.hpp"
#include "bsdelab/solver.hpp"
#include "bsdelab/stochastic.hpp"

namespace bsdelab {

/// Girsanov change of measure induced by a solved BSDE: the kernel
///   g_i = (f(t_i, Y_i, Z_i) - f(t_i, Y_i, 0)) Z_i / |Z_i|^2
/// is bounded by the declared Lipschitz-in-z constant, and its stochastic
/// exponential (kept in log space) is the density process.
struct MeasureChange {
  AdaptedProcess kernel;
  DensityPath density;
  double bound = 0.0;
  double mean_terminal_density = 1.0;  // should be ~1: E[D_T] = 1
  double se_terminal_density = 0.0;
};

MeasureChange build_measure_change(const BrownianEnsemble& ens, const GeneratorSpec& f,
                                   const SolutionEnsemble& sol);

/// Measure change from an explicit kernel (for synthetic checks).
MeasureChange measure_change_from_kernel(const BrownianEnsemble& ens, AdaptedProcess phi,
                                         double bound);

struct QExpectation {
  double value = 0.0;
  double stderr_of_mean = 0.0;
  double ess = 0.0;       // (sum D)^2 / sum D^2 at the weighting node
  std::size_t n = 0;
  bool collapsed = false; // ess below the configured floor
};

/// E_Q[values] = E_P[values * D_node] by importance weighting.
QExpectation q_expectation(std::span<const double> values, const MeasureChange& mc,
                           std::size_t node, double ess_floor_fraction = 0.0);

/// Per-path weighting at path-dependent nodes (stopping times).
QExpectation q_expectation_at(std::span<const double> values,
                              std::span<const std::size_t> nodes, const MeasureChange& mc,
                              double ess_floor_fraction = 0.0);

enum class AdmissibilityVerdict { admissible, unstable };

/// The gate for pricing: psi-moment of |xi| estimated at n and 2n paths
/// (counter RNG makes the first n paths of the 2n run identical, so this is
/// a genuine tail-extension test), compared against a relative threshold.
struct AdmissibilityReport {
  double mu = 0.0;
  double b = 0.0;
  double horizon = 0.0;
  double bound_rhs = 0.0;      // exp-moment factor + e^{2 mu^2} psi-moment
  double psi_moment_n = 0.0;
  double psi_moment_2n = 0.0;
  AdmissibilityVerdict verdict = AdmissibilityVerdict::unstable;
  double ess = 0.0;            // of the psi weights at 2n
  std::size_t n = 0;
  double stability_threshold = 0.2;

  std::string verdict_string() const;
};

AdmissibilityReport admissibility_check(const TerminalSpec& xi, const PsiParams& params,
                                        const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                                        std::size_t n_paths, double stability_threshold = 0.2);

/// Importance-weighted price E_Q[xi]. Refuses to run without an ADMISSIBLE
/// report unless explicitly overridden (the override is recorded upstream).
QExpectation measure_price(const BrownianEnsemble& ens, const TerminalSpec& xi,
                           const MeasureChange& mc,
                           const std::optional<AdmissibilityReport>& admissibility,
                           bool override_admissibility = false,
                           double ess_floor_fraction = 0.0);

}  // namespace bsdelab
