#ifndef HOMOG_CHECKS_HPP
#define HOMOG_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "homog/micro.hpp"

namespace homog {

struct CheckLine {
  std::string name;
  double value = 0.0;      // measured worst case
  double threshold = 0.0;  // pass iff value <= threshold (or in-band flag)
  bool pass = false;
};

struct CheckReport {
  std::vector<CheckLine> lines;

  bool pass() const {
    for (const auto& l : lines)
      if (!l.pass) return false;
    return true;
  }
};

/// Projection-operator suite: idempotency, zero mean and Fourier-space curl
/// of G * W for seeded random fields. The curl is evaluated with a direct
/// DFT, independent of the solver's transforms.
CheckReport check_projection(int n1, int n2, int n_fields, std::uint64_t seed);

/// Spectral laminate solves against the algebraic laminate system (at the
/// raster's exact volume fractions): energy, stress and the
/// fluctuation-sensitivity tangent against the central-difference tangent
/// of the analytical stress.
CheckReport check_laminate(int n_samples, std::uint64_t seed, int grid_n,
                           const SolverOptions& opts, int threads);

/// Bar-problem oracles: hyperelastic consistency of the homogenized energy,
/// convexity, and convergence of the full-field solution toward the
/// homogenized profile as the microstructure refines.
CheckReport check_toy1d();

/// Analytical surrogate derivatives against central finite differences of
/// the evaluator at second-order convergence rates.
CheckReport check_surrogate_derivatives(int n_models, std::uint64_t seed);

}  // namespace homog

#endif
