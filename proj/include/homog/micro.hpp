#ifndef HOMOG_MICRO_HPP
#define HOMOG_MICRO_HPP

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "homog/materials.hpp"
#include "homog/tensor.hpp"

namespace homog {

/// Periodic cell (-L1,L1) x (-L2,L2) discretized by an odd number of voxels
/// per direction. Voxel centers sit at X_a = -L_a + h_a (j - 1/2) with
/// h_a = 2 L_a / N_a, j = 1..N_a.
struct RveGrid {
  int n1;
  int n2;
  double L1;
  double L2;

  RveGrid(int n1_, int n2_, double L1_, double L2_);

  int voxels() const { return n1 * n2; }
  double h1() const { return 2.0 * L1 / n1; }
  double h2() const { return 2.0 * L2 / n2; }
  /// Center coordinate of voxel (j1, j2), zero-based indices.
  double x1(int j1) const { return -L1 + h1() * (j1 + 0.5); }
  double x2(int j2) const { return -L2 + h2() * (j2 + 0.5); }
};

/// Scaled wavenumbers xi_a = (pi / L_a) k_a, integer k in
/// [-floor(N/2), floor(N/2)], stored in the transform's frequency ordering
/// (0, 1, ..., floor(N/2), -floor(N/2), ..., -1). The frequency vector of
/// bin (k1, k2) is (xi1[k1], xi2[k2]).
struct Wavenumbers {
  std::vector<double> xi1;
  std::vector<double> xi2;
};

Wavenumbers wavenumbers(const RveGrid& grid);

/// Per-voxel phase indices, zero-based, shape n1 x n2.
struct PhaseMap {
  int n1 = 0;
  int n2 = 0;
  std::vector<int> phase;  // idx = j1 * n2 + j2

  int operator()(int j1, int j2) const { return phase[j1 * n2 + j2]; }
  int& operator()(int j1, int j2) { return phase[j1 * n2 + j2]; }

  /// Fraction of voxels carrying phase index p.
  double volume_fraction(int p) const;
};

PhaseMap rasterize_homogeneous(const RveGrid& grid);
/// Two layers normal to X1: phase 0 for X1 < 0, phase 1 otherwise
/// (voxel-center test).
PhaseMap rasterize_laminate(const RveGrid& grid);
/// Circular inclusion (phase 1) centered in the cell with the given target
/// volume fraction; radius from pi R^2 = f * |cell|, voxel-center test.
PhaseMap rasterize_inclusion(const RveGrid& grid, double volume_fraction);

struct RveProblem {
  RveGrid grid;
  PhaseMap phases;
  std::vector<Material> materials;

  RveProblem(RveGrid g, PhaseMap p, std::vector<Material> m);

  const Material& material_at(int j1, int j2) const {
    return materials[static_cast<std::size_t>(phases(j1, j2))];
  }
};

/// Grid function of second-order tensors, stored as four component planes
/// (idx = j1 * n2 + j2) so the transforms stream over contiguous memory.
struct FieldT2 {
  int n1 = 0;
  int n2 = 0;
  std::array<std::vector<double>, 4> c;

  FieldT2() = default;
  FieldT2(int n1_, int n2_);

  std::size_t voxels() const { return static_cast<std::size_t>(n1) * n2; }

  Tensor2 get(int j1, int j2) const {
    const std::size_t q = static_cast<std::size_t>(j1) * n2 + j2;
    Tensor2 t;
    t.v[0][0] = c[0][q];
    t.v[0][1] = c[1][q];
    t.v[1][0] = c[2][q];
    t.v[1][1] = c[3][q];
    return t;
  }

  void set(int j1, int j2, const Tensor2& t) {
    const std::size_t q = static_cast<std::size_t>(j1) * n2 + j2;
    c[0][q] = t.v[0][0];
    c[1][q] = t.v[0][1];
    c[2][q] = t.v[1][0];
    c[3][q] = t.v[1][1];
  }

  void fill(const Tensor2& t);
  Tensor2 mean() const;
  bool finite() const;
};

double dot(const FieldT2& a, const FieldT2& b);
double norm(const FieldT2& a);
/// y += alpha * x
void axpy(double alpha, const FieldT2& x, FieldT2& y);

struct SolverOptions {
  double newton_tol = 1e-8;    // relative to the first iterate's residual
  int newton_max_iter = 50;
  double cg_tol = 1e-10;       // relative to the RHS norm
  int cg_max_iter = 0;         // 0 -> 10 * n1 * n2

  void validate() const;
};

struct MicroSolution {
  FieldT2 F;          // converged total deformation gradient
  Tensor2 Fbar;
  double psi_bar = 0.0;
  Tensor2 Pbar;
  int iterations = 0;
  double residual_norm = 0.0;  // ||G * P|| at the accepted iterate
};

/// FFT-based collocation solver for the periodic micro-equilibrium
/// G * P(F) = 0 at fixed macroscopic deformation gradient. One instance
/// owns its transform plans and scratch fields; distinct instances may run
/// concurrently on distinct problems.
class SpectralSolver {
 public:
  SpectralSolver(const RveProblem& problem, SolverOptions opts = {});
  ~SpectralSolver();

  SpectralSolver(const SpectralSolver&) = delete;
  SpectralSolver& operator=(const SpectralSolver&) = delete;

  /// Applies the Green projection, result = G * field.
  FieldT2 project(const FieldT2& field);

  /// G * P(F); raises NonPositiveJacobian naming the first offending voxel.
  FieldT2 residual(const FieldT2& F);

  MicroSolution solve(const Tensor2& Fbar);
  /// Warm variant: fluctuation (F - Fbar of a previous solution) used as the
  /// initial guess; must have zero mean.
  MicroSolution solve(const Tensor2& Fbar, const FieldT2& fluctuation_guess);

  /// Macroscopic tangent moduli via the fluctuation-sensitivity systems,
  /// one CG solve per macroscopic component.
  Tensor4 macro_tangent(const MicroSolution& sol);

  const RveProblem& problem() const { return problem_; }
  const SolverOptions& options() const { return opts_; }

 private:
  struct Fft;
  FieldT2 apply_projection(const FieldT2& field);
  FieldT2 cg_solve(const std::vector<Tensor4>& tangents, const FieldT2& rhs);
  void stress_field(const FieldT2& F, FieldT2& P) const;
  void tangent_field(const FieldT2& F, std::vector<Tensor4>& C) const;

  RveProblem problem_;
  SolverOptions opts_;
  Wavenumbers wn_;
  std::unique_ptr<Fft> fft_;
};

/// Writes per-voxel fields as CSV: X1,X2,F11,F12,F21,F22,P11,P12,P21,P22,psi
/// (one row per voxel, j1 outer, j2 inner).
void export_micro_fields(const RveProblem& problem, const MicroSolution& sol,
                         const std::string& path);

}  // namespace homog

#endif
