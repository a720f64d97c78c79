#ifndef HOMOG_FEM_HPP
#define HOMOG_FEM_HPP

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "homog/materials.hpp"
#include "homog/micro.hpp"
#include "homog/surrogate.hpp"
#include "homog/tensor.hpp"

namespace homog {

/// 4-node quadrilateral mesh in the reference configuration. Nodes and
/// elements are zero-based; material_tag is -1 for homogenized elements or
/// an index into the run's material table for full-field meshes.
struct MacroMesh {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 4>> elems;
  std::vector<int> material_tag;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elems() const { return static_cast<int>(elems.size()); }
  /// Checks connectivity and positive reference Jacobians at all
  /// quadrature points.
  void validate() const;
};

struct DirichletBc {
  int node;
  int comp;  // 0 or 1
  double value;
};

/// Constant traction (reference configuration, force per unit reference
/// length) applied along the edge between two boundary nodes.
struct EdgeTraction {
  int n1;
  int n2;
  double tx;
  double ty;
};

struct BoundaryConditions {
  std::vector<DirichletBc> dirichlet;
  std::vector<EdgeTraction> tractions;
};

struct ConstitutiveResponse {
  double psi = 0.0;
  Tensor2 P;
  Tensor4 C;
};

/// Pluggable macroscopic constitutive law. evaluate() may be called
/// concurrently for distinct quadrature points; qp identifies the point for
/// warm-start caches and worker selects per-thread scratch state.
class ConstitutiveProvider {
 public:
  virtual ~ConstitutiveProvider() = default;
  /// want_tangent=false lets residual-only probes (line searches) skip the
  /// tangent; C is left zero then.
  virtual ConstitutiveResponse evaluate(const Tensor2& F, std::size_t qp,
                                        int material_tag, int worker,
                                        bool want_tangent) = 0;
  /// Called once before a solve with the total quadrature point count.
  virtual void begin_solve(std::size_t n_qps, int n_workers) {
    (void)n_qps;
    (void)n_workers;
  }
};

/// Closed-form material evaluation; full-field runs select the material by
/// element tag.
class DirectProvider final : public ConstitutiveProvider {
 public:
  explicit DirectProvider(std::vector<Material> materials)
      : materials_(std::move(materials)) {}

  ConstitutiveResponse evaluate(const Tensor2& F, std::size_t qp,
                                int material_tag, int worker,
                                bool want_tangent) override;

 private:
  std::vector<Material> materials_;
};

struct ExtrapolationWarning {
  std::size_t qp;
  double excess;  // fraction of the training-box width
  FlatVec4 Fbar;
};

/// Trained energy surrogate: stress and tangent are the model's exact
/// first and second derivatives. Quadrature states leaving the training box
/// by more than 10% of its width are reported, not rejected.
class SurrogateProvider final : public ConstitutiveProvider {
 public:
  explicit SurrogateProvider(
      HdmrModel model,
      std::function<void(const ExtrapolationWarning&)> warn = nullptr);

  ConstitutiveResponse evaluate(const Tensor2& F, std::size_t qp,
                                int material_tag, int worker,
                                bool want_tangent) override;

  long warning_count() const { return warnings_.load(); }

 private:
  HdmrModel model_;
  std::function<void(const ExtrapolationWarning&)> warn_;
  std::atomic<long> warnings_{0};
};

/// Two-scale reference: every evaluation solves the micro problem at the
/// quadrature point's deformation gradient. Fluctuation fields are cached
/// per quadrature point and reused as warm starts across Newton iterations
/// and load steps.
class NestedProvider final : public ConstitutiveProvider {
 public:
  NestedProvider(RveProblem problem, SolverOptions opts);
  ~NestedProvider() override;

  ConstitutiveResponse evaluate(const Tensor2& F, std::size_t qp,
                                int material_tag, int worker,
                                bool want_tangent) override;
  void begin_solve(std::size_t n_qps, int n_workers) override;

  long micro_solve_count() const { return solves_.load(); }

 private:
  RveProblem problem_;
  SolverOptions opts_;
  std::vector<std::unique_ptr<SpectralSolver>> solvers_;  // one per worker
  std::vector<FieldT2> cache_;                            // one per qp
  std::vector<char> cache_valid_;
  std::atomic<long> solves_{0};
};

struct FemOptions {
  int load_steps = 10;
  int newton_max_iter = 25;
  double newton_tol = 1e-8;  // relative to the load step's first residual
  int threads = 1;
};

struct QpState {
  std::array<double, 2> X;  // reference coordinates
  double weight = 0.0;      // quadrature weight times reference Jacobian
  Tensor2 F;
  Tensor2 P;
  double psi = 0.0;
};

struct MacroSolution {
  std::vector<double> displacement;  // 2 per node
  std::vector<QpState> qp;           // 4 per element
  double residual_norm = 0.0;
  int newton_iterations = 0;  // total across load steps
  /// Residual norms per Newton iteration of each load step (diagnostics,
  /// includes the entry residual).
  std::vector<std::vector<double>> residual_history;

  double total_energy() const;
};

class Assembler;  // internal

/// Residual vector and tangent matrix at the given nodal displacements;
/// exposed for verification (finite-difference tangent checks, patch
/// tests). Dirichlet handling is left to the caller: rows are raw.
struct Triplet {
  int row;
  int col;
  double value;
};

struct AssembledSystem {
  std::vector<double> residual;   // f_int - f_ext, 2 per node
  std::vector<double> f_ext;      // external loads at the given scale
  std::vector<Triplet> tangent;   // deterministic ordering
  std::vector<QpState> qp;
};

AssembledSystem assemble(const MacroMesh& mesh, const BoundaryConditions& bc,
                         ConstitutiveProvider& provider,
                         const std::vector<double>& u, double load_scale = 1.0,
                         int threads = 1, bool want_tangent = true);

MacroSolution solve_macro(const MacroMesh& mesh, const BoundaryConditions& bc,
                          ConstitutiveProvider& provider,
                          const FemOptions& opts = {});

/// Sum of reaction forces (f_int - f_ext) over constrained dofs, per
/// component; balances applied tractions at convergence.
std::array<double, 2> reaction_sum(const MacroMesh& mesh,
                                   const BoundaryConditions& bc,
                                   ConstitutiveProvider& provider,
                                   const MacroSolution& sol);

/// CSV solution export (nodal displacements, then per-quadrature F, P and
/// S = F^{-1} P); deterministic ordering, 17 significant digits.
void export_solution(const MacroMesh& mesh, const MacroSolution& sol,
                     const std::string& path);

struct SolutionFile {
  std::vector<double> displacement;
  std::vector<std::array<double, 14>> qp_rows;  // elem,qp,X1,X2,F...,P...,S11,S12,S21,S22 minus ids
  std::vector<std::array<int, 2>> qp_ids;
};
SolutionFile read_solution(const std::string& path);

/// Mesh file format:
///   NODES n      followed by n lines "id x y"
///   ELEMS m      followed by m lines "id n1 n2 n3 n4 [mat]"
///   DIRICHLET k  followed by k lines "node comp value"
///   TRACTION j   followed by j lines "n1 n2 tx ty"
std::pair<MacroMesh, BoundaryConditions> read_mesh_file(const std::string& path);
void write_mesh_file(const MacroMesh& mesh, const BoundaryConditions& bc,
                     const std::string& path);

/// Structured quadrilateral mesh of an axis-aligned rectangle.
MacroMesh build_rect_mesh(int nx, int ny, double x0, double y0, double Lx,
                          double Ly);

/// Cook's membrane: trapezoid with corners (0,0), (48,44), (48,60), (0,44),
/// clamped along the left edge, tangential traction q0 on the right edge.
std::pair<MacroMesh, BoundaryConditions> build_cook_problem(int nx, int ny,
                                                            double q0);

/// Cantilever beam occupying [0, ncellx*cell] x [0, ncelly*cell], clamped
/// at the left edge, tangential traction q0 on the right edge. With
/// elems_per_cell > 0 and inclusion_fraction > 0 each cell carries a
/// centered circular inclusion resolved by element tags (0 matrix,
/// 1 inclusion); otherwise tags are -1 (homogenized).
std::pair<MacroMesh, BoundaryConditions> build_beam_problem(
    int ncellx, int ncelly, double cell, int elems_per_cell,
    double inclusion_fraction, double q0);

}  // namespace homog

#endif
