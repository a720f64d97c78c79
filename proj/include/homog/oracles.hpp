#ifndef HOMOG_ORACLES_HPP
#define HOMOG_ORACLES_HPP

#include <functional>
#include <utility>
#include <vector>

#include "homog/materials.hpp"
#include "homog/tensor.hpp"

namespace homog {

/// Two-phase laminate with layers normal to X1. The printed algebraic
/// system assumes equal volume fractions; the general fractions are kept as
/// parameters so a voxelized cell (odd grid, fractions n/N) can be compared
/// against the exact solution of the same geometry.
struct LaminateProblem {
  Material material1;
  Material material2;
  double fraction1 = 0.5;  // volume fraction of phase 1; phase 2 carries 1 - f

  LaminateProblem(Material m1, Material m2, double f1 = 0.5);
};

struct LaminateSolution {
  Tensor2 F1;
  Tensor2 F2;
};

/// Solves the laminate system: continuity of F12, F22 across phases,
/// volume-averaging of F11, F21 to the macroscopic values, and traction
/// continuity P11, P21. Damped Newton on the four free unknowns.
LaminateSolution laminate_solve(const LaminateProblem& p, const Tensor2& Fbar);

/// Macro energy and stress from the phase-wise solution,
/// psi = f1 psi1 + f2 psi2 and P = f1 P1 + f2 P2.
std::pair<double, Tensor2> laminate_energy_stress(const LaminateProblem& p,
                                                  const Tensor2& Fbar);

/// Central-difference tangent of an arbitrary macroscopic stress function,
/// C_ijkl ~ [P_ij(F + eps E_kl) - P_ij(F - eps E_kl)] / (2 eps).
Tensor4 central_diff_tangent(const std::function<Tensor2(const Tensor2&)>& stress_fn,
                             const Tensor2& Fbar, double eps);

/// Heterogeneous bar with energy density
///   psi(X, eps) = mu(X) [2/3 (1+eps)^{3/2} - eps - 2/3],
///   mu(X) = 3/2 + sin(2 pi k X),
/// clamped at X = 0 and loaded by an end traction t0.
struct Toy1dProblem {
  double L = 1.0;
  int k = 1;
  double t0 = 0.0;

  Toy1dProblem(double L_, int k_, double t0_);
};

struct Toy1dHomogenized {
  double psi_bar;   // macro energy density at the prescribed strain
  double sigma_bar; // constant micro stress realizing that strain
};

/// Micro problem on one period: equilibrium forces a constant stress, so
/// the macroscopic strain constraint <(1 + s/mu)^2 - 1> = eps_bar is solved
/// for s by a safeguarded root find, then psi is averaged over the period.
Toy1dHomogenized toy1d_micro_energy(const Toy1dProblem& p, double eps_bar);

/// Full-field 1D FEM solution (linear elements, Newton). Returns nodal
/// displacements on the uniform mesh, node 0 at X = 0.
std::vector<double> toy1d_fullfield(const Toy1dProblem& p, int n_elements);

}  // namespace homog

#endif
