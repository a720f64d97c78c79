#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <vector>

#include "homog/micro.hpp"
#include "homog/oracles.hpp"
#include "homog/rng.hpp"

using namespace homog;

namespace {

RveProblem laminate_problem(int n) {
  const RveGrid grid(n, n, 1.0, 1.0);
  return RveProblem(grid, rasterize_laminate(grid),
                    {Material(NeoHookeanA(100.0, 1.0)),
                     Material(NeoHookeanA(1000.0, 1.0))});
}

RveProblem homogeneous_problem(int n, Material m) {
  const RveGrid grid(n, n, 1.0, 1.0);
  return RveProblem(grid, rasterize_homogeneous(grid), {std::move(m)});
}

FieldT2 random_field(const RveGrid& grid, Rng& rng) {
  FieldT2 w(grid.n1, grid.n2);
  for (auto& plane : w.c)
    for (double& x : plane) x = rng.uniform(-1.0, 1.0);
  return w;
}

// Independent projection oracle: direct DFT sums over the paper's signed
// wavenumbers and midpoint collocation nodes, O(N^4).
FieldT2 project_naive(const RveGrid& grid, const FieldT2& w) {
  const int n1 = grid.n1, n2 = grid.n2;
  const Wavenumbers wn = wavenumbers(grid);
  using cd = std::complex<double>;
  std::array<std::vector<cd>, 4> hat;
  for (auto& h : hat) h.assign(static_cast<std::size_t>(n1) * n2, 0.0);

  for (int k1 = 0; k1 < n1; ++k1)
    for (int k2 = 0; k2 < n2; ++k2)
      for (int j1 = 0; j1 < n1; ++j1)
        for (int j2 = 0; j2 < n2; ++j2) {
          const double phase =
              -(wn.xi1[k1] * grid.x1(j1) + wn.xi2[k2] * grid.x2(j2));
          const cd e(std::cos(phase), std::sin(phase));
          for (int p = 0; p < 4; ++p)
            hat[p][k1 * n2 + k2] +=
                e * w.c[p][static_cast<std::size_t>(j1) * n2 + j2];
        }

  for (int k1 = 0; k1 < n1; ++k1)
    for (int k2 = 0; k2 < n2; ++k2) {
      const double x1 = wn.xi1[k1], x2 = wn.xi2[k2];
      const double nsq = x1 * x1 + x2 * x2;
      const std::size_t q = static_cast<std::size_t>(k1) * n2 + k2;
      if (nsq == 0.0) {
        for (int p = 0; p < 4; ++p) hat[p][q] = 0.0;
        continue;
      }
      const cd t0 = (hat[0][q] * x1 + hat[1][q] * x2) / nsq;
      const cd t1 = (hat[2][q] * x1 + hat[3][q] * x2) / nsq;
      hat[0][q] = t0 * x1;
      hat[1][q] = t0 * x2;
      hat[2][q] = t1 * x1;
      hat[3][q] = t1 * x2;
    }

  FieldT2 out(n1, n2);
  const double inv = 1.0 / (n1 * n2);
  for (int j1 = 0; j1 < n1; ++j1)
    for (int j2 = 0; j2 < n2; ++j2)
      for (int p = 0; p < 4; ++p) {
        cd acc = 0.0;
        for (int k1 = 0; k1 < n1; ++k1)
          for (int k2 = 0; k2 < n2; ++k2) {
            const double phase =
                wn.xi1[k1] * grid.x1(j1) + wn.xi2[k2] * grid.x2(j2);
            acc += hat[p][static_cast<std::size_t>(k1) * n2 + k2] *
                   cd(std::cos(phase), std::sin(phase));
          }
        out.c[p][static_cast<std::size_t>(j1) * n2 + j2] = acc.real() * inv;
      }
  return out;
}

}  // namespace

TEST_CASE("grid construction rejects even sizes") {
  CHECK_THROWS_AS(RveGrid(30, 31, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RveGrid(31, 4, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RveGrid(31, 31, 0.0, 1.0), std::invalid_argument);
  CHECK_NOTHROW(RveGrid(31, 31, 1.0, 1.0));
}

TEST_CASE("scaled wavenumbers") {
  {
    const Wavenumbers wn = wavenumbers(RveGrid(3, 3, 1.0, 1.0));
    std::vector<double> xs = wn.xi1;
    std::sort(xs.begin(), xs.end());
    CHECK(xs[0] == doctest::Approx(-M_PI));
    CHECK(xs[1] == doctest::Approx(0.0));
    CHECK(xs[2] == doctest::Approx(M_PI));
    CHECK(wn.xi1[0] == 0.0);  // zero frequency leads the transform ordering
    CHECK(wn.xi2[0] == 0.0);
  }
  {
    const Wavenumbers wn = wavenumbers(RveGrid(5, 3, 2.0, 1.0));
    std::vector<double> xs = wn.xi1;
    std::sort(xs.begin(), xs.end());
    const double expect[5] = {-M_PI, -M_PI / 2.0, 0.0, M_PI / 2.0, M_PI};
    for (int i = 0; i < 5; ++i) CHECK(xs[i] == doctest::Approx(expect[i]));
  }
}

TEST_CASE("projection matches the direct-DFT oracle") {
  const RveProblem problem = laminate_problem(5);
  SpectralSolver solver(problem);
  Rng rng(5150);
  const FieldT2 w = random_field(problem.grid, rng);
  const FieldT2 fast = solver.project(w);
  const FieldT2 slow = project_naive(problem.grid, w);
  FieldT2 diff = fast;
  axpy(-1.0, slow, diff);
  CHECK(norm(diff) < 1e-12 * norm(slow));
}

TEST_CASE("projection annihilates constant fields") {
  const RveProblem problem = laminate_problem(9);
  SpectralSolver solver(problem);
  FieldT2 w(9, 9);
  w.fill(unflatten({1.0, -2.0, 0.5, 3.0}));
  CHECK(norm(solver.project(w)) < 1e-12);
}

TEST_CASE("projection properties: idempotent, zero mean, fixes gradients") {
  const RveProblem problem = laminate_problem(17);
  SpectralSolver solver(problem);
  Rng rng(333);
  for (int trial = 0; trial < 5; ++trial) {
    const FieldT2 w = random_field(problem.grid, rng);
    const FieldT2 gw = solver.project(w);
    CHECK(max_abs(gw.mean()) < 1e-12);

    // G*w is a zero-mean gradient field; the projection returns it intact.
    const FieldT2 ggw = solver.project(gw);
    FieldT2 diff = ggw;
    axpy(-1.0, gw, diff);
    CHECK(norm(diff) < 1e-10 * norm(gw));
  }
}

TEST_CASE("residual vanishes for homogeneous states") {
  const RveProblem hom = homogeneous_problem(11, NeoHookeanA(100.0, 1.0));
  SpectralSolver solver(hom);
  FieldT2 F(11, 11);
  F.fill(unflatten({1.2, 0.1, -0.2, 1.2}));
  CHECK(norm(solver.residual(F)) < 1e-10);

  const RveProblem lam = laminate_problem(11);
  SpectralSolver lam_solver(lam);
  FieldT2 I(11, 11);
  I.fill(Tensor2::identity());
  CHECK(norm(lam_solver.residual(I)) < 1e-10);
}

TEST_CASE("residual reports the offending voxel") {
  const RveProblem lam = laminate_problem(5);
  SpectralSolver solver(lam);
  FieldT2 F(5, 5);
  F.fill(Tensor2::identity());
  F.set(2, 3, Tensor2::diag(-1.0, 1.0));
  CHECK_THROWS_WITH_AS(solver.residual(F),
                       doctest::Contains("(2, 3)"), NonPositiveJacobian);
}

TEST_CASE("homogeneous RVE degenerates to the direct material") {
  const Material m = NeoHookeanA(100.0, 1.0);
  const RveProblem hom = homogeneous_problem(11, m);
  SpectralSolver solver(hom);
  const Tensor2 Fbar = unflatten({1.2, 0.1, -0.2, 1.2});
  const MicroSolution sol = solver.solve(Fbar);

  CHECK(sol.iterations == 0);
  CHECK(sol.psi_bar == doctest::Approx(energy(m, Fbar)).epsilon(1e-12));
  CHECK(norm2(sol.Pbar - stress(m, Fbar)) < 1e-10 * norm2(sol.Pbar));

  // fluctuation is identically zero
  FieldT2 fluct = sol.F;
  for (int j1 = 0; j1 < 11; ++j1)
    for (int j2 = 0; j2 < 11; ++j2)
      fluct.set(j1, j2, fluct.get(j1, j2) - Fbar);
  CHECK(norm(fluct) < 1e-10);

  const Tensor4 C = solver.macro_tangent(sol);
  const Tensor4 Cm = tangent(m, Fbar);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          num += std::pow(C(i, j, k, l) - Cm(i, j, k, l), 2);
          den += std::pow(Cm(i, j, k, l), 2);
        }
  CHECK(std::sqrt(num / den) < 1e-10);
}

TEST_CASE("laminate at identity stays stress free") {
  const RveProblem lam = laminate_problem(11);
  SpectralSolver solver(lam);
  const MicroSolution sol = solver.solve(Tensor2::identity());
  CHECK(sol.psi_bar == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(max_abs(sol.Pbar) < 1e-12);
  CHECK(sol.iterations == 0);
}

TEST_CASE("laminate solve matches the analytical system") {
  const RveProblem lam = laminate_problem(31);
  SpectralSolver solver(lam);
  const Tensor2 Fbar = unflatten({1.2, 0.1, -0.2, 1.2});
  const MicroSolution sol = solver.solve(Fbar);

  // zero-mean fluctuation by construction
  CHECK(max_abs(sol.F.mean() - Fbar) < 1e-10);

  const LaminateProblem oracle(lam.materials[0], lam.materials[1],
                               lam.phases.volume_fraction(0));
  const auto [psi_ref, P_ref] = laminate_energy_stress(oracle, Fbar);
  CHECK(std::abs(sol.psi_bar - psi_ref) < 1e-6 * std::abs(psi_ref));
  CHECK(norm2(sol.Pbar - P_ref) < 1e-6 * norm2(P_ref));

  // fluctuation-sensitivity tangent vs central difference of the oracle
  const Tensor4 C = solver.macro_tangent(sol);
  const Tensor4 Cref = central_diff_tangent(
      [&](const Tensor2& F) { return laminate_energy_stress(oracle, F).second; },
      Fbar, 1e-6);
  double num = 0.0, den = 0.0, asym = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          num += std::pow(C(i, j, k, l) - Cref(i, j, k, l), 2);
          den += std::pow(Cref(i, j, k, l), 2);
          asym = std::max(asym, std::abs(C(i, j, k, l) - C(k, l, i, j)));
        }
  CHECK(std::sqrt(num / den) < 1e-4);
  CHECK(asym < 1e-6 * max_abs(C));
}

TEST_CASE("Hill-Mandel and energy consistency on the laminate") {
  const RveProblem lam = laminate_problem(21);
  SpectralSolver solver(lam);
  const Tensor2 Fbar = unflatten({1.15, 0.05, -0.1, 1.1});
  const MicroSolution sol = solver.solve(Fbar);

  // <P : G*W> = 0 for any W at convergence
  Rng rng(99);
  FieldT2 P(21, 21);
  for (int j1 = 0; j1 < 21; ++j1)
    for (int j2 = 0; j2 < 21; ++j2)
      P.set(j1, j2, stress(lam.material_at(j1, j2), sol.F.get(j1, j2)));
  for (int trial = 0; trial < 3; ++trial) {
    const FieldT2 dF = solver.project(random_field(lam.grid, rng));
    CHECK(std::abs(dot(P, dF)) < 1e-8 * norm(P) * norm(dF));
  }

  // Pbar equals the finite-difference derivative of psi_bar
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      Tensor2 Fp = Fbar, Fm = Fbar;
      Fp(k, l) += h;
      Fm(k, l) -= h;
      const double dpsi =
          (solver.solve(Fp).psi_bar - solver.solve(Fm).psi_bar) / (2.0 * h);
      worst = std::max(worst, std::abs(dpsi - sol.Pbar(k, l)));
    }
  CHECK(worst < 1e-4 * norm2(sol.Pbar));
}

TEST_CASE("solver rejects inadmissible macroscopic input") {
  const RveProblem lam = laminate_problem(5);
  SpectralSolver solver(lam);
  CHECK_THROWS_AS(solver.solve(Tensor2::diag(1.0, -1.0)), NonPositiveJacobian);
}

TEST_CASE("warm start reproduces the cold solution") {
  const RveProblem lam = laminate_problem(15);
  SpectralSolver solver(lam);
  const Tensor2 Fa = unflatten({1.1, 0.05, -0.05, 1.1});
  const Tensor2 Fb = unflatten({1.15, 0.08, -0.03, 1.12});
  const MicroSolution cold_a = solver.solve(Fa);

  FieldT2 fluct = cold_a.F;
  for (int j1 = 0; j1 < 15; ++j1)
    for (int j2 = 0; j2 < 15; ++j2)
      fluct.set(j1, j2, fluct.get(j1, j2) - Fa);
  const MicroSolution warm_b = solver.solve(Fb, fluct);
  const MicroSolution cold_b = solver.solve(Fb);
  CHECK(std::abs(warm_b.psi_bar - cold_b.psi_bar) <
        1e-8 * std::abs(cold_b.psi_bar));
  CHECK(norm2(warm_b.Pbar - cold_b.Pbar) < 1e-6 * norm2(cold_b.Pbar));
}

TEST_CASE("micro field export round-trips") {
  const RveProblem lam = laminate_problem(5);
  SpectralSolver solver(lam);
  const MicroSolution sol = solver.solve(unflatten({1.1, 0.0, 0.0, 1.1}));
  const std::string path = "micro_fields_test.csv";
  export_micro_fields(lam, sol, path);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "X1,X2,F11,F12,F21,F22,P11,P12,P21,P22,psi");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 25);
  std::remove(path.c_str());
}
