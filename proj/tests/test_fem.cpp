#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "homog/fem.hpp"
#include "homog/rng.hpp"

using namespace homog;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const Material kMatrix = NeoHookeanB(100.0, 0.4);

DirectProvider direct_provider() { return DirectProvider({kMatrix}); }

// All boundary nodes pinned to u = (F0 - I) X.
BoundaryConditions linear_dirichlet(const MacroMesh& mesh, const Tensor2& F0) {
  BoundaryConditions bc;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const double x = mesh.nodes[n][0], y = mesh.nodes[n][1];
    const bool boundary = x < 1e-12 || x > 1.0 - 1e-12 || y < 1e-12 ||
                          y > 1.0 - 1e-12;
    if (!boundary) continue;
    bc.dirichlet.push_back({n, 0, (F0(0, 0) - 1.0) * x + F0(0, 1) * y});
    bc.dirichlet.push_back({n, 1, F0(1, 0) * x + (F0(1, 1) - 1.0) * y});
  }
  return bc;
}

}  // namespace

TEST_CASE("patch test: constant deformation gradient to 1e-10") {
  // distorted interior node, linear boundary data
  MacroMesh mesh = build_rect_mesh(3, 3, 0.0, 0.0, 1.0, 1.0);
  mesh.nodes[5] = {0.29, 0.41};
  mesh.nodes[10] = {0.63, 0.71};
  const Tensor2 F0 = unflatten({1.08, 0.03, -0.05, 0.95});
  const BoundaryConditions bc = linear_dirichlet(mesh, F0);

  DirectProvider provider = direct_provider();
  FemOptions opts;
  opts.load_steps = 2;
  const MacroSolution sol = solve_macro(mesh, bc, provider, opts);
  for (const auto& st : sol.qp) CHECK(max_abs(st.F - F0) < 1e-10);
}

TEST_CASE("assembled tangent matches finite differences of the residual") {
  MacroMesh mesh = build_rect_mesh(2, 2, 0.0, 0.0, 1.0, 1.0);
  mesh.nodes[4] = {0.55, 0.47};  // center node, distorted
  BoundaryConditions bc;         // no loads; raw residual probe
  DirectProvider provider = direct_provider();

  const int ndof = 2 * mesh.n_nodes();
  std::vector<double> u(ndof);
  Rng rng(4);
  for (double& ui : u) ui = 0.02 * rng.uniform(-1.0, 1.0);

  const AssembledSystem sys = assemble(mesh, bc, provider, u);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(ndof, ndof);
  for (const auto& t : sys.tangent) K(t.row, t.col) += t.value;

  const double h = 1e-7;
  Eigen::MatrixXd Kfd(ndof, ndof);
  for (int j = 0; j < ndof; ++j) {
    std::vector<double> up = u, um = u;
    up[j] += h;
    um[j] -= h;
    const auto rp = assemble(mesh, bc, provider, up, 1.0, 1, false);
    const auto rm = assemble(mesh, bc, provider, um, 1.0, 1, false);
    for (int i = 0; i < ndof; ++i)
      Kfd(i, j) = (rp.residual[i] - rm.residual[i]) / (2.0 * h);
  }
  CHECK((K - Kfd).norm() < 1e-4 * K.norm());
}

TEST_CASE("zero traction gives zero displacement") {
  MacroMesh mesh = build_rect_mesh(3, 2, 0.0, 0.0, 2.0, 1.0);
  BoundaryConditions bc;
  for (int j = 0; j <= 2; ++j) {
    bc.dirichlet.push_back({j * 4, 0, 0.0});
    bc.dirichlet.push_back({j * 4, 1, 0.0});
  }
  DirectProvider provider = direct_provider();
  const MacroSolution sol = solve_macro(mesh, bc, provider);
  for (double ui : sol.displacement) CHECK(std::abs(ui) < 1e-12);
  for (const auto& st : sol.qp) CHECK(max_abs(st.P) < 1e-12);
}

TEST_CASE("global equilibrium: reactions balance the applied tractions") {
  auto [mesh, bc] = build_cook_problem(4, 4, 2.0);
  DirectProvider provider = direct_provider();
  FemOptions opts;
  opts.load_steps = 5;
  const MacroSolution sol = solve_macro(mesh, bc, provider, opts);

  double applied[2] = {0.0, 0.0};
  for (const auto& tr : bc.tractions) {
    const double dx = mesh.nodes[tr.n2][0] - mesh.nodes[tr.n1][0];
    const double dy = mesh.nodes[tr.n2][1] - mesh.nodes[tr.n1][1];
    const double len = std::hypot(dx, dy);
    applied[0] += tr.tx * len;
    applied[1] += tr.ty * len;
  }
  const std::array<double, 2> R = reaction_sum(mesh, bc, provider, sol);
  const double scale = std::hypot(applied[0], applied[1]);
  CHECK(std::abs(R[0] + applied[0]) < 1e-8 * scale);
  CHECK(std::abs(R[1] + applied[1]) < 1e-8 * scale);
}

TEST_CASE("newton converges quadratically on the Cook problem") {
  auto [mesh, bc] = build_cook_problem(4, 4, 4.0);
  DirectProvider provider = direct_provider();
  FemOptions opts;
  opts.load_steps = 4;
  opts.newton_tol = 1e-12;
  const MacroSolution sol = solve_macro(mesh, bc, provider, opts);

  // pick the last step's history; ratios of successive log-reductions
  const auto& hist = sol.residual_history.back();
  REQUIRE(hist.size() >= 4);
  const std::size_t n = hist.size();
  const double e1 = hist[n - 3], e2 = hist[n - 2], e3 = hist[n - 1];
  const double order = std::log(e3 / e2) / std::log(e2 / e1);
  CHECK(order > 1.5);
}

TEST_CASE("rigid rotation leaves the energy invariant (direct provider)") {
  MacroMesh mesh = build_rect_mesh(3, 3, 0.0, 0.0, 1.0, 1.0);
  mesh.nodes[5] = {0.31, 0.37};
  const Tensor2 F0 = unflatten({1.1, 0.04, -0.03, 0.93});
  const double angle = 0.7;
  Tensor2 R;
  R(0, 0) = std::cos(angle);
  R(0, 1) = -std::sin(angle);
  R(1, 0) = std::sin(angle);
  R(1, 1) = std::cos(angle);
  const Tensor2 RF0 = dot22(R, F0);

  DirectProvider provider = direct_provider();
  FemOptions opts;
  opts.load_steps = 4;
  const MacroSolution a =
      solve_macro(mesh, linear_dirichlet(mesh, F0), provider, opts);
  const MacroSolution b =
      solve_macro(mesh, linear_dirichlet(mesh, RF0), provider, opts);
  CHECK(a.total_energy() ==
        doctest::Approx(b.total_energy()).epsilon(1e-8));
}

TEST_CASE("nested provider equals the direct provider on a homogeneous RVE") {
  const RveGrid grid(5, 5, 1.0, 1.0);
  RveProblem rve(grid, rasterize_homogeneous(grid), {kMatrix});
  NestedProvider nested(rve, SolverOptions{});
  DirectProvider direct = direct_provider();
  nested.begin_solve(4, 1);

  Rng rng(21);
  for (int t = 0; t < 4; ++t) {
    const Tensor2 F = unflatten({rng.uniform(0.9, 1.1), rng.uniform(-0.1, 0.1),
                                 rng.uniform(-0.1, 0.1), rng.uniform(0.9, 1.1)});
    const ConstitutiveResponse a = nested.evaluate(F, t, -1, 0, true);
    const ConstitutiveResponse b = direct.evaluate(F, t, -1, 0, true);
    CHECK(std::abs(a.psi - b.psi) < 1e-8 * std::max(1.0, std::abs(b.psi)));
    CHECK(norm2(a.P - b.P) < 1e-8 * std::max(1.0, norm2(b.P)));
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            worst = std::max(worst, std::abs(a.C(i, j, k, l) - b.C(i, j, k, l)));
    CHECK(worst < 1e-8 * max_abs(b.C));
  }
}

TEST_CASE("nested provider runs micro solves at every quadrature point") {
  const RveGrid grid(5, 5, 1.0, 1.0);
  RveProblem rve(grid, rasterize_homogeneous(grid), {kMatrix});
  NestedProvider provider(rve, SolverOptions{});

  MacroMesh mesh = build_rect_mesh(2, 1, 0.0, 0.0, 2.0, 1.0);
  BoundaryConditions bc;
  for (int j = 0; j <= 1; ++j) {
    bc.dirichlet.push_back({j * 3, 0, 0.0});
    bc.dirichlet.push_back({j * 3, 1, 0.0});
  }
  bc.tractions.push_back({2, 5, 0.0, 0.5});
  FemOptions opts;
  opts.load_steps = 2;
  const MacroSolution sol = solve_macro(mesh, bc, provider, opts);
  CHECK(sol.qp.size() == 8);
  CHECK(provider.micro_solve_count() >= 8);
}

TEST_CASE("surrogate provider flags extrapolation") {
  HdmrModel m;
  m.D = 4;
  m.d = 4;
  m.L = 1;
  m.norm.x_min = Eigen::Vector4d(0.9, -0.1, -0.1, 0.9);
  m.norm.x_max = Eigen::Vector4d(1.1, 0.1, 0.1, 1.1);
  m.norm.f_min = 0.0;
  m.norm.f_max = 1.0;
  ComponentNet cn;
  cn.A = Eigen::MatrixXd::Identity(4, 4);
  cn.b = Eigen::VectorXd::Zero(4);
  cn.W = Eigen::MatrixXd::Constant(1, 4, 0.1);
  cn.v = Eigen::VectorXd::Zero(1);
  cn.c = Eigen::VectorXd::Constant(1, 0.5);
  cn.v0 = 0.0;
  m.components.push_back(cn);

  int fired = 0;
  SurrogateProvider provider(m, [&](const ExtrapolationWarning& w) {
    ++fired;
    CHECK(w.excess > 0.10);
  });
  provider.evaluate(Tensor2::identity(), 0, -1, 0, true);
  CHECK(fired == 0);
  provider.evaluate(Tensor2::diag(1.5, 1.0), 1, -1, 0, true);
  CHECK(fired == 1);
  CHECK(provider.warning_count() == 1);
}

TEST_CASE("solution export") {
  auto [mesh, bc] = build_cook_problem(2, 2, 1.0);
  DirectProvider provider = direct_provider();
  FemOptions opts;
  opts.load_steps = 3;
  const MacroSolution sol = solve_macro(mesh, bc, provider, opts);

  const std::string p1 = "sol_rt_1.csv", p2 = "sol_rt_2.csv";
  export_solution(mesh, sol, p1);
  const SolutionFile sf = read_solution(p1);
  REQUIRE(sf.displacement.size() == sol.displacement.size());
  for (std::size_t i = 0; i < sf.displacement.size(); ++i)
    CHECK(sf.displacement[i] == sol.displacement[i]);

  // S = F^{-1} P holds on every row
  for (const auto& row : sf.qp_rows) {
    const Tensor2 F = unflatten({row[2], row[3], row[4], row[5]});
    const Tensor2 P = unflatten({row[6], row[7], row[8], row[9]});
    const Tensor2 S = unflatten({row[10], row[11], row[12], row[13]});
    CHECK(max_abs(dot22(inv2(F), P) - S) < 1e-12 * std::max(1.0, max_abs(S)));
  }

  // byte-exact round trip through the reader
  MacroSolution copy = sol;
  copy.displacement = sf.displacement;
  for (std::size_t q = 0; q < sf.qp_rows.size(); ++q) {
    copy.qp[q].X = {sf.qp_rows[q][0], sf.qp_rows[q][1]};
    copy.qp[q].F = unflatten({sf.qp_rows[q][2], sf.qp_rows[q][3],
                              sf.qp_rows[q][4], sf.qp_rows[q][5]});
    copy.qp[q].P = unflatten({sf.qp_rows[q][6], sf.qp_rows[q][7],
                              sf.qp_rows[q][8], sf.qp_rows[q][9]});
  }
  export_solution(mesh, copy, p2);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("mesh files round-trip") {
  auto [mesh, bc] = build_beam_problem(2, 1, 0.5, 4, 0.2, -0.25);
  const std::string path = "mesh_rt.txt";
  write_mesh_file(mesh, bc, path);
  auto [mesh2, bc2] = read_mesh_file(path);
  REQUIRE(mesh2.n_nodes() == mesh.n_nodes());
  REQUIRE(mesh2.n_elems() == mesh.n_elems());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    CHECK(mesh2.nodes[n][0] == mesh.nodes[n][0]);
    CHECK(mesh2.nodes[n][1] == mesh.nodes[n][1]);
  }
  for (int e = 0; e < mesh.n_elems(); ++e) {
    CHECK(mesh2.elems[e] == mesh.elems[e]);
    CHECK(mesh2.material_tag[e] == mesh.material_tag[e]);
  }
  CHECK(bc2.dirichlet.size() == bc.dirichlet.size());
  CHECK(bc2.tractions.size() == bc.tractions.size());
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_mesh_file("does_not_exist.txt"), std::runtime_error);
}

TEST_CASE("beam builder rasterizes the requested inclusion fraction") {
  auto [mesh, bc] = build_beam_problem(4, 2, 0.5, 10, 0.2, -0.1);
  (void)bc;
  int inclusion = 0;
  for (int tag : mesh.material_tag) inclusion += (tag == 1);
  const double frac = static_cast<double>(inclusion) / mesh.n_elems();
  CHECK(frac == doctest::Approx(0.2).epsilon(0.25));
  // tags must be periodic cell to cell
  CHECK(mesh.material_tag[0 * 40 + 0] == mesh.material_tag[0 * 40 + 10]);
}

TEST_CASE("dirichlet set must not be empty") {
  MacroMesh mesh = build_rect_mesh(2, 2, 0.0, 0.0, 1.0, 1.0);
  BoundaryConditions bc;
  DirectProvider provider = direct_provider();
  CHECK_THROWS_AS(solve_macro(mesh, bc, provider), std::invalid_argument);
}
