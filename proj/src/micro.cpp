#include "homog/micro.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

namespace {
// FFTW planner calls are not thread-safe; execution on private buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RveGrid::RveGrid(int n1_, int n2_, double L1_, double L2_)
    : n1(n1_), n2(n2_), L1(L1_), L2(L2_) {
  if (n1 < 1 || n2 < 1 || n1 % 2 == 0 || n2 % 2 == 0)
    throw std::invalid_argument("RveGrid: grid sizes must be odd and positive");
  if (!(L1 > 0.0) || !(L2 > 0.0))
    throw std::invalid_argument("RveGrid: half-lengths must be positive");
}

Wavenumbers wavenumbers(const RveGrid& grid) {
  Wavenumbers wn;
  wn.xi1.resize(grid.n1);
  wn.xi2.resize(grid.n2);
  for (int k = 0; k < grid.n1; ++k) {
    const int ks = (k <= grid.n1 / 2) ? k : k - grid.n1;
    wn.xi1[k] = M_PI * ks / grid.L1;
  }
  for (int k = 0; k < grid.n2; ++k) {
    const int ks = (k <= grid.n2 / 2) ? k : k - grid.n2;
    wn.xi2[k] = M_PI * ks / grid.L2;
  }
  return wn;
}

double PhaseMap::volume_fraction(int p) const {
  std::size_t count = 0;
  for (int q : phase)
    if (q == p) ++count;
  return static_cast<double>(count) / static_cast<double>(phase.size());
}

PhaseMap rasterize_homogeneous(const RveGrid& grid) {
  PhaseMap pm;
  pm.n1 = grid.n1;
  pm.n2 = grid.n2;
  pm.phase.assign(static_cast<std::size_t>(grid.n1) * grid.n2, 0);
  return pm;
}

PhaseMap rasterize_laminate(const RveGrid& grid) {
  PhaseMap pm = rasterize_homogeneous(grid);
  for (int j1 = 0; j1 < grid.n1; ++j1) {
    const int p = grid.x1(j1) < 0.0 ? 0 : 1;
    for (int j2 = 0; j2 < grid.n2; ++j2) pm(j1, j2) = p;
  }
  return pm;
}

PhaseMap rasterize_inclusion(const RveGrid& grid, double volume_fraction) {
  if (!(volume_fraction > 0.0) || !(volume_fraction < 1.0))
    throw std::invalid_argument("rasterize_inclusion: fraction in (0,1)");
  const double cell_area = 4.0 * grid.L1 * grid.L2;
  const double R = std::sqrt(volume_fraction * cell_area / M_PI);
  PhaseMap pm = rasterize_homogeneous(grid);
  for (int j1 = 0; j1 < grid.n1; ++j1)
    for (int j2 = 0; j2 < grid.n2; ++j2) {
      const double x = grid.x1(j1), y = grid.x2(j2);
      pm(j1, j2) = (x * x + y * y < R * R) ? 1 : 0;
    }
  return pm;
}

RveProblem::RveProblem(RveGrid g, PhaseMap p, std::vector<Material> m)
    : grid(g), phases(std::move(p)), materials(std::move(m)) {
  if (phases.n1 != grid.n1 || phases.n2 != grid.n2 ||
      phases.phase.size() != static_cast<std::size_t>(grid.voxels()))
    throw std::invalid_argument("RveProblem: phase map shape mismatch");
  for (int q : phases.phase)
    if (q < 0 || q >= static_cast<int>(materials.size()))
      throw std::invalid_argument("RveProblem: phase index out of range");
}

FieldT2::FieldT2(int n1_, int n2_) : n1(n1_), n2(n2_) {
  for (auto& plane : c)
    plane.assign(static_cast<std::size_t>(n1) * n2, 0.0);
}

void FieldT2::fill(const Tensor2& t) {
  const double f[4] = {t.v[0][0], t.v[0][1], t.v[1][0], t.v[1][1]};
  for (int p = 0; p < 4; ++p)
    std::fill(c[p].begin(), c[p].end(), f[p]);
}

Tensor2 FieldT2::mean() const {
  Tensor2 m;
  const double inv = 1.0 / static_cast<double>(voxels());
  for (int p = 0; p < 4; ++p) {
    double s = 0.0;
    for (double x : c[p]) s += x;
    m.v[p / 2][p % 2] = s * inv;
  }
  return m;
}

bool FieldT2::finite() const {
  for (const auto& plane : c)
    for (double x : plane)
      if (!std::isfinite(x)) return false;
  return true;
}

double dot(const FieldT2& a, const FieldT2& b) {
  double s = 0.0;
  for (int p = 0; p < 4; ++p)
    for (std::size_t q = 0; q < a.c[p].size(); ++q) s += a.c[p][q] * b.c[p][q];
  return s;
}

double norm(const FieldT2& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const FieldT2& x, FieldT2& y) {
  for (int p = 0; p < 4; ++p)
    for (std::size_t q = 0; q < x.c[p].size(); ++q)
      y.c[p][q] += alpha * x.c[p][q];
}

void SolverOptions::validate() const {
  if (!(newton_tol > 0.0) || !(cg_tol > 0.0) || newton_max_iter <= 0 ||
      cg_max_iter < 0)
    throw std::invalid_argument("SolverOptions: tolerances/iterations "
                                "must be positive");
}

// 2D complex-to-complex transforms on four component planes at once.
struct SpectralSolver::Fft {
  int n1, n2;
  std::size_t n;
  fftw_complex* buf;
  fftw_plan fwd;
  fftw_plan bwd;
  std::array<std::vector<std::complex<double>>, 4> hat;

  Fft(int n1_, int n2_) : n1(n1_), n2(n2_), n(std::size_t(n1_) * n2_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf = fftw_alloc_complex(n);
    fwd = fftw_plan_dft_2d(n1, n2, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(n1, n2, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (auto& h : hat) h.resize(n);
  }

  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
  }

  void forward_all(const FieldT2& field) {
    for (int p = 0; p < 4; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        buf[q][0] = field.c[p][q];
        buf[q][1] = 0.0;
      }
      fftw_execute(fwd);
      for (std::size_t q = 0; q < n; ++q)
        hat[p][q] = {buf[q][0], buf[q][1]};
    }
  }

  void backward_all(FieldT2& out) {
    const double inv = 1.0 / static_cast<double>(n);
    for (int p = 0; p < 4; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        buf[q][0] = hat[p][q].real();
        buf[q][1] = hat[p][q].imag();
      }
      fftw_execute(bwd);
      for (std::size_t q = 0; q < n; ++q) out.c[p][q] = buf[q][0] * inv;
    }
  }
};

SpectralSolver::SpectralSolver(const RveProblem& problem, SolverOptions opts)
    : problem_(problem), opts_(opts), wn_(wavenumbers(problem.grid)) {
  opts_.validate();
  if (opts_.cg_max_iter == 0)
    opts_.cg_max_iter = 10 * problem_.grid.n1 * problem_.grid.n2;
  fft_ = std::make_unique<Fft>(problem_.grid.n1, problem_.grid.n2);
}

SpectralSolver::~SpectralSolver() = default;

FieldT2 SpectralSolver::apply_projection(const FieldT2& field) {
  const int n1 = problem_.grid.n1, n2 = problem_.grid.n2;
  fft_->forward_all(field);
  auto& hat = fft_->hat;
  for (int k1 = 0; k1 < n1; ++k1) {
    const double x1 = wn_.xi1[k1];
    for (int k2 = 0; k2 < n2; ++k2) {
      const double x2 = wn_.xi2[k2];
      const std::size_t q = static_cast<std::size_t>(k1) * n2 + k2;
      const double nsq = x1 * x1 + x2 * x2;
      if (nsq == 0.0) {
        for (int p = 0; p < 4; ++p) hat[p][q] = 0.0;
        continue;
      }
      // (G W)_ij = xi_j (W . xi)_i / |xi|^2
      const std::complex<double> t0 = (hat[0][q] * x1 + hat[1][q] * x2) / nsq;
      const std::complex<double> t1 = (hat[2][q] * x1 + hat[3][q] * x2) / nsq;
      hat[0][q] = t0 * x1;
      hat[1][q] = t0 * x2;
      hat[2][q] = t1 * x1;
      hat[3][q] = t1 * x2;
    }
  }
  FieldT2 out(n1, n2);
  fft_->backward_all(out);
  return out;
}

FieldT2 SpectralSolver::project(const FieldT2& field) {
  if (field.n1 != problem_.grid.n1 || field.n2 != problem_.grid.n2)
    throw std::invalid_argument("project: field shape mismatch");
  return apply_projection(field);
}

void SpectralSolver::stress_field(const FieldT2& F, FieldT2& P) const {
  const int n1 = problem_.grid.n1, n2 = problem_.grid.n2;
  for (int j1 = 0; j1 < n1; ++j1)
    for (int j2 = 0; j2 < n2; ++j2) {
      const Tensor2 Fv = F.get(j1, j2);
      if (!(det2(Fv) > 0.0)) {
        throw NonPositiveJacobian(
            "residual: det(F) <= 0 at voxel (" + std::to_string(j1) + ", " +
            std::to_string(j2) + ")");
      }
      P.set(j1, j2, stress(problem_.material_at(j1, j2), Fv));
    }
}

void SpectralSolver::tangent_field(const FieldT2& F,
                                   std::vector<Tensor4>& C) const {
  const int n1 = problem_.grid.n1, n2 = problem_.grid.n2;
  C.resize(static_cast<std::size_t>(n1) * n2);
  for (int j1 = 0; j1 < n1; ++j1)
    for (int j2 = 0; j2 < n2; ++j2)
      C[static_cast<std::size_t>(j1) * n2 + j2] =
          tangent(problem_.material_at(j1, j2), F.get(j1, j2));
}

FieldT2 SpectralSolver::residual(const FieldT2& F) {
  FieldT2 P(problem_.grid.n1, problem_.grid.n2);
  stress_field(F, P);
  return apply_projection(P);
}

// Matrix-free CG on the projected linearized operator Y -> G * (C : Y).
// Initial guess zero keeps every iterate in the compatible zero-mean
// subspace where the operator is symmetric positive definite.
FieldT2 SpectralSolver::cg_solve(const std::vector<Tensor4>& tangents,
                                 const FieldT2& rhs) {
  const int n1 = problem_.grid.n1, n2 = problem_.grid.n2;
  const std::size_t nvox = static_cast<std::size_t>(n1) * n2;

  auto apply = [&](const FieldT2& y) {
    FieldT2 cy(n1, n2);
    for (std::size_t q = 0; q < nvox; ++q) {
      const int j1 = static_cast<int>(q) / n2;
      const int j2 = static_cast<int>(q) % n2;
      cy.set(j1, j2, ddot42(tangents[q], y.get(j1, j2)));
    }
    return apply_projection(cy);
  };

  FieldT2 x(n1, n2);
  FieldT2 r = rhs;
  const double bnorm = norm(rhs);
  if (bnorm == 0.0) return x;
  FieldT2 p = r;
  double rs = dot(r, r);
  for (int it = 0; it < opts_.cg_max_iter; ++it) {
    if (std::sqrt(rs) <= opts_.cg_tol * bnorm) return x;
    FieldT2 Ap = apply(p);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) {
      throw CgStalled("cg: operator lost positive definiteness (p.Ap = " +
                      std::to_string(pAp) + ")");
    }
    const double alpha = rs / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    const double rs_new = dot(r, r);
    const double beta = rs_new / rs;
    for (int pl = 0; pl < 4; ++pl)
      for (std::size_t q = 0; q < nvox; ++q)
        p.c[pl][q] = r.c[pl][q] + beta * p.c[pl][q];
    rs = rs_new;
  }
  throw CgStalled("cg: no convergence within " +
                  std::to_string(opts_.cg_max_iter) + " iterations");
}

MicroSolution SpectralSolver::solve(const Tensor2& Fbar) {
  FieldT2 zero(problem_.grid.n1, problem_.grid.n2);
  return solve(Fbar, zero);
}

MicroSolution SpectralSolver::solve(const Tensor2& Fbar,
                                    const FieldT2& fluctuation_guess) {
  if (!(det2(Fbar) > 0.0))
    throw NonPositiveJacobian("solve: det(Fbar) <= 0");
  const int n1 = problem_.grid.n1, n2 = problem_.grid.n2;
  if (fluctuation_guess.n1 != n1 || fluctuation_guess.n2 != n2)
    throw std::invalid_argument("solve: guess shape mismatch");

  FieldT2 F = fluctuation_guess;
  for (int j1 = 0; j1 < n1; ++j1)
    for (int j2 = 0; j2 < n2; ++j2) F.set(j1, j2, F.get(j1, j2) + Fbar);

  FieldT2 res = residual(F);
  double rnorm = norm(res);
  const double r0 = rnorm;
  // Absolute floor: a stress-free or homogeneous state has nothing to solve.
  FieldT2 P(n1, n2);
  stress_field(F, P);
  const double floor = 1e-13 * std::max(1.0, norm(P));

  int iter = 0;
  std::vector<Tensor4> tangents;
  while (rnorm > floor && rnorm > opts_.newton_tol * r0) {
    if (iter >= opts_.newton_max_iter) {
      throw NewtonDiverged("solve: no convergence after " +
                           std::to_string(iter) + " Newton iterations, " +
                           "residual " + std::to_string(rnorm / r0) +
                           " of initial");
    }
    tangent_field(F, tangents);
    FieldT2 rhs = res;
    for (auto& plane : rhs.c)
      for (double& x : plane) x = -x;
    FieldT2 dF = cg_solve(tangents, rhs);

    // Damped update: keep the iterate in the admissible set and require a
    // residual decrease before accepting.
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 12 && !accepted; ++bt) {
      FieldT2 Ftrial = F;
      axpy(alpha, dF, Ftrial);
      bool admissible = true;
      for (int j1 = 0; j1 < n1 && admissible; ++j1)
        for (int j2 = 0; j2 < n2; ++j2)
          if (!(det2(Ftrial.get(j1, j2)) > 0.0)) {
            admissible = false;
            break;
          }
      if (admissible) {
        FieldT2 res_trial = residual(Ftrial);
        const double rtrial = norm(res_trial);
        if (rtrial < rnorm || rtrial <= floor) {
          F = std::move(Ftrial);
          res = std::move(res_trial);
          rnorm = rtrial;
          accepted = true;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      throw NewtonDiverged(
          "solve: line search failed at Newton iteration " +
          std::to_string(iter) + " (residual " + std::to_string(rnorm) + ")");
    }
    ++iter;
  }

  MicroSolution sol;
  sol.F = std::move(F);
  sol.Fbar = Fbar;
  sol.iterations = iter;
  sol.residual_norm = rnorm;

  double psi = 0.0;
  Tensor2 Pbar;
  for (int j1 = 0; j1 < n1; ++j1)
    for (int j2 = 0; j2 < n2; ++j2) {
      const Tensor2 Fv = sol.F.get(j1, j2);
      const Material& m = problem_.material_at(j1, j2);
      psi += energy(m, Fv);
      Pbar += stress(m, Fv);
    }
  const double inv = 1.0 / static_cast<double>(problem_.grid.voxels());
  sol.psi_bar = psi * inv;
  sol.Pbar = Pbar * inv;
  return sol;
}

Tensor4 SpectralSolver::macro_tangent(const MicroSolution& sol) {
  const int n1 = problem_.grid.n1, n2 = problem_.grid.n2;
  const std::size_t nvox = static_cast<std::size_t>(n1) * n2;
  std::vector<Tensor4> tangents;
  tangent_field(sol.F, tangents);

  Tensor4 Cbar;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      const Tensor2 Ekl = Tensor2::unit(k, l);
      // rhs = -G * (C : E_kl)
      FieldT2 ce(n1, n2);
      for (std::size_t q = 0; q < nvox; ++q)
        ce.set(static_cast<int>(q) / n2, static_cast<int>(q) % n2,
               ddot42(tangents[q], Ekl));
      FieldT2 rhs = apply_projection(ce);
      for (auto& plane : rhs.c)
        for (double& x : plane) x = -x;
      const FieldT2 S = cg_solve(tangents, rhs);

      // column (.,.,k,l) of <C : (I + dFtilde/dFbar)>
      Tensor2 col;
      for (std::size_t q = 0; q < nvox; ++q) {
        const int j1 = static_cast<int>(q) / n2;
        const int j2 = static_cast<int>(q) % n2;
        col += ddot42(tangents[q], Ekl + S.get(j1, j2));
      }
      col *= 1.0 / static_cast<double>(nvox);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Cbar.v[i][j][k][l] = col.v[i][j];
    }
  return Cbar;
}

void export_micro_fields(const RveProblem& problem, const MicroSolution& sol,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_micro_fields: cannot open " + path);
  out << "X1,X2,F11,F12,F21,F22,P11,P12,P21,P22,psi\n";
  char buf[64];
  auto put = [&](double x, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf << sep;
  };
  for (int j1 = 0; j1 < problem.grid.n1; ++j1)
    for (int j2 = 0; j2 < problem.grid.n2; ++j2) {
      const Tensor2 F = sol.F.get(j1, j2);
      const Material& m = problem.material_at(j1, j2);
      const Tensor2 P = stress(m, F);
      put(problem.grid.x1(j1), ',');
      put(problem.grid.x2(j2), ',');
      const FlatVec4 f = flatten(F), p = flatten(P);
      for (double x : f) put(x, ',');
      for (double x : p) put(x, ',');
      std::snprintf(buf, sizeof buf, "%.17g", energy(m, F));
      out << buf << '\n';
    }
}

}  // namespace homog
