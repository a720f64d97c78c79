#include "homog/fem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"
#include "homog/parallel.hpp"

namespace homog {

namespace {

// Bilinear quadrilateral, CCW local node order, 2x2 Gauss quadrature.
constexpr double kXiN[4] = {-1.0, 1.0, 1.0, -1.0};
constexpr double kEtaN[4] = {-1.0, -1.0, 1.0, 1.0};
const double kGauss = 1.0 / std::sqrt(3.0);

struct QuadPointGeo {
  double dNdX[4][2];
  double wdetJ;
};

// Shape-function gradients in reference coordinates at one Gauss point.
QuadPointGeo qp_geometry(const std::array<std::array<double, 2>, 4>& X,
                         double xi, double eta) {
  double dNdxi[4][2];
  for (int a = 0; a < 4; ++a) {
    dNdxi[a][0] = 0.25 * kXiN[a] * (1.0 + kEtaN[a] * eta);
    dNdxi[a][1] = 0.25 * kEtaN[a] * (1.0 + kXiN[a] * xi);
  }
  double J[2][2] = {{0, 0}, {0, 0}};
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) J[i][j] += X[a][i] * dNdxi[a][j];
  const double detJ = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  if (!(detJ > 0.0))
    throw std::invalid_argument("mesh: non-positive reference Jacobian");
  const double Jinv[2][2] = {{J[1][1] / detJ, -J[0][1] / detJ},
                             {-J[1][0] / detJ, J[0][0] / detJ}};
  QuadPointGeo g;
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 2; ++i)
      g.dNdX[a][i] =
          dNdxi[a][0] * Jinv[0][i] + dNdxi[a][1] * Jinv[1][i];
  g.wdetJ = detJ;  // unit Gauss weights
  return g;
}

std::array<double, 2> qp_position(const std::array<std::array<double, 2>, 4>& X,
                                  double xi, double eta) {
  std::array<double, 2> p{0.0, 0.0};
  for (int a = 0; a < 4; ++a) {
    const double N = 0.25 * (1.0 + kXiN[a] * xi) * (1.0 + kEtaN[a] * eta);
    p[0] += N * X[a][0];
    p[1] += N * X[a][1];
  }
  return p;
}

}  // namespace

void MacroMesh::validate() const {
  if (material_tag.size() != elems.size())
    throw std::invalid_argument("mesh: material tag count != element count");
  for (const auto& e : elems)
    for (int a : e)
      if (a < 0 || a >= n_nodes())
        throw std::invalid_argument("mesh: node index out of range");
  for (const auto& e : elems) {
    std::array<std::array<double, 2>, 4> X;
    for (int a = 0; a < 4; ++a) X[a] = nodes[e[a]];
    for (int q = 0; q < 4; ++q) {
      const double xi = (q % 2 == 0 ? -kGauss : kGauss);
      const double eta = (q / 2 == 0 ? -kGauss : kGauss);
      qp_geometry(X, xi, eta);  // throws on inverted elements
    }
  }
}

ConstitutiveResponse DirectProvider::evaluate(const Tensor2& F, std::size_t,
                                              int material_tag, int,
                                              bool want_tangent) {
  const std::size_t idx = material_tag < 0 ? 0 : material_tag;
  const Material& m = materials_.at(idx);
  ConstitutiveResponse r;
  r.psi = energy(m, F);
  r.P = stress(m, F);
  if (want_tangent) r.C = tangent(m, F);
  return r;
}

SurrogateProvider::SurrogateProvider(
    HdmrModel model, std::function<void(const ExtrapolationWarning&)> warn)
    : model_(std::move(model)), warn_(std::move(warn)) {
  if (model_.D != 4)
    throw std::invalid_argument("SurrogateProvider: model input must be 4D");
}

ConstitutiveResponse SurrogateProvider::evaluate(const Tensor2& F,
                                                 std::size_t qp, int, int,
                                                 bool want_tangent) {
  const FlatVec4 x = flatten(F);
  const double excess = extrapolation_excess(
      model_, Eigen::Map<const Eigen::Vector4d>(x.data()));
  if (excess > 0.10) {
    warnings_.fetch_add(1);
    if (warn_) warn_({qp, excess, x});
  }
  ConstitutiveResponse r;
  r.psi = homog::evaluate(model_, x);
  r.P = unflatten(gradient4(model_, x));
  if (want_tangent) r.C = hessian4(model_, x);
  return r;
}

NestedProvider::NestedProvider(RveProblem problem, SolverOptions opts)
    : problem_(std::move(problem)), opts_(opts) {}

NestedProvider::~NestedProvider() = default;

void NestedProvider::begin_solve(std::size_t n_qps, int n_workers) {
  cache_.assign(n_qps, FieldT2(problem_.grid.n1, problem_.grid.n2));
  cache_valid_.assign(n_qps, 0);
  solvers_.resize(std::max(1, n_workers));
}

ConstitutiveResponse NestedProvider::evaluate(const Tensor2& F, std::size_t qp,
                                              int, int worker,
                                              bool want_tangent) {
  if (solvers_.empty()) begin_solve(qp + 1, worker + 1);
  auto& solver = solvers_.at(worker);
  if (!solver) solver = std::make_unique<SpectralSolver>(problem_, opts_);

  MicroSolution sol;
  bool solved = false;
  if (qp < cache_.size() && cache_valid_[qp]) {
    try {
      sol = solver->solve(F, cache_[qp]);
      solved = true;
    } catch (const SolverError&) {
      // stale warm start; fall through to a cold solve
    }
  }
  if (!solved) sol = solver->solve(F);
  solves_.fetch_add(1);

  if (qp < cache_.size()) {
    FieldT2 fluct = sol.F;
    for (int j1 = 0; j1 < fluct.n1; ++j1)
      for (int j2 = 0; j2 < fluct.n2; ++j2)
        fluct.set(j1, j2, fluct.get(j1, j2) - F);
    cache_[qp] = std::move(fluct);
    cache_valid_[qp] = 1;
  }

  ConstitutiveResponse r;
  r.psi = sol.psi_bar;
  r.P = sol.Pbar;
  if (want_tangent) r.C = solver->macro_tangent(sol);
  return r;
}

AssembledSystem assemble(const MacroMesh& mesh, const BoundaryConditions& bc,
                         ConstitutiveProvider& provider,
                         const std::vector<double>& u, double load_scale,
                         int threads, bool want_tangent) {
  const int nn = mesh.n_nodes();
  const int ne = mesh.n_elems();
  if (static_cast<int>(u.size()) != 2 * nn)
    throw std::invalid_argument("assemble: displacement size mismatch");

  AssembledSystem sys;
  sys.residual.assign(2 * nn, 0.0);
  sys.f_ext.assign(2 * nn, 0.0);
  sys.qp.resize(4 * static_cast<std::size_t>(ne));

  for (const auto& tr : bc.tractions) {
    const double dx = mesh.nodes[tr.n2][0] - mesh.nodes[tr.n1][0];
    const double dy = mesh.nodes[tr.n2][1] - mesh.nodes[tr.n1][1];
    const double half = 0.5 * std::hypot(dx, dy) * load_scale;
    sys.f_ext[2 * tr.n1 + 0] += half * tr.tx;
    sys.f_ext[2 * tr.n1 + 1] += half * tr.ty;
    sys.f_ext[2 * tr.n2 + 0] += half * tr.tx;
    sys.f_ext[2 * tr.n2 + 1] += half * tr.ty;
  }

  struct ElemOut {
    double fe[8];
    double Ke[8][8];
  };
  std::vector<ElemOut> eout(ne);

  parallel_for(static_cast<std::size_t>(ne), threads, [&](std::size_t e,
                                                          int worker) {
    std::array<std::array<double, 2>, 4> X;
    double ue[4][2];
    for (int a = 0; a < 4; ++a) {
      const int node = mesh.elems[e][a];
      X[a] = mesh.nodes[node];
      ue[a][0] = u[2 * node + 0];
      ue[a][1] = u[2 * node + 1];
    }
    ElemOut& out = eout[e];
    std::fill(std::begin(out.fe), std::end(out.fe), 0.0);
    for (auto& row : out.Ke) std::fill(std::begin(row), std::end(row), 0.0);

    for (int q = 0; q < 4; ++q) {
      const double xi = (q % 2 == 0 ? -kGauss : kGauss);
      const double eta = (q / 2 == 0 ? -kGauss : kGauss);
      const QuadPointGeo g = qp_geometry(X, xi, eta);

      Tensor2 F = Tensor2::identity();
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) F.v[i][j] += ue[a][i] * g.dNdX[a][j];

      const std::size_t qp_index = 4 * e + q;
      ConstitutiveResponse resp;
      try {
        resp = provider.evaluate(F, qp_index, mesh.material_tag[e], worker,
                                 want_tangent);
      } catch (const NonPositiveJacobian& ex) {
        throw NonPositiveJacobian("element " + std::to_string(e) + " qp " +
                                  std::to_string(q) + ": " + ex.what());
      } catch (const SolverError& ex) {
        throw SolverError("element " + std::to_string(e) + " qp " +
                          std::to_string(q) + ": " + ex.what());
      }

      QpState& st = sys.qp[qp_index];
      st.X = qp_position(X, xi, eta);
      st.weight = g.wdetJ;
      st.F = F;
      st.P = resp.P;
      st.psi = resp.psi;

      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 2; ++i) {
          double s = 0.0;
          for (int j = 0; j < 2; ++j) s += resp.P.v[i][j] * g.dNdX[a][j];
          out.fe[2 * a + i] += s * g.wdetJ;
        }
      if (want_tangent) {
        for (int a = 0; a < 4; ++a)
          for (int i = 0; i < 2; ++i)
            for (int b = 0; b < 4; ++b)
              for (int k = 0; k < 2; ++k) {
                double s = 0.0;
                for (int j = 0; j < 2; ++j)
                  for (int l = 0; l < 2; ++l)
                    s += g.dNdX[a][j] * resp.C.v[i][j][k][l] * g.dNdX[b][l];
                out.Ke[2 * a + i][2 * b + k] += s * g.wdetJ;
              }
      }
    }
  });

  // Serial scatter in element order keeps the reduction deterministic.
  for (int e = 0; e < ne; ++e) {
    for (int a = 0; a < 4; ++a) {
      const int ra = 2 * mesh.elems[e][a];
      sys.residual[ra + 0] += eout[e].fe[2 * a + 0];
      sys.residual[ra + 1] += eout[e].fe[2 * a + 1];
    }
  }
  for (int i = 0; i < 2 * nn; ++i) sys.residual[i] -= sys.f_ext[i];

  if (want_tangent) {
    sys.tangent.reserve(static_cast<std::size_t>(ne) * 64);
    for (int e = 0; e < ne; ++e)
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 2; ++i)
          for (int b = 0; b < 4; ++b)
            for (int k = 0; k < 2; ++k)
              sys.tangent.push_back({2 * mesh.elems[e][a] + i,
                                     2 * mesh.elems[e][b] + k,
                                     eout[e].Ke[2 * a + i][2 * b + k]});
  }
  return sys;
}

namespace {

double free_norm(const std::vector<double>& r, const std::vector<char>& fixed) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!fixed[i]) s += r[i] * r[i];
  return std::sqrt(s);
}

}  // namespace

MacroSolution solve_macro(const MacroMesh& mesh, const BoundaryConditions& bc,
                          ConstitutiveProvider& provider,
                          const FemOptions& opts) {
  mesh.validate();
  if (bc.dirichlet.empty())
    throw std::invalid_argument("solve_macro: Dirichlet set must be nonempty");
  const int nn = mesh.n_nodes();
  const int ndof = 2 * nn;

  std::vector<char> fixed(ndof, 0);
  for (const auto& d : bc.dirichlet) {
    if (d.node < 0 || d.node >= nn || d.comp < 0 || d.comp > 1)
      throw std::invalid_argument("solve_macro: bad Dirichlet entry");
    fixed[2 * d.node + d.comp] = 1;
  }
  std::vector<int> free_index(ndof, -1);
  int nfree = 0;
  for (int i = 0; i < ndof; ++i)
    if (!fixed[i]) free_index[i] = nfree++;
  if (nfree == 0)
    throw std::invalid_argument("solve_macro: no free dofs");

  provider.begin_solve(4 * static_cast<std::size_t>(mesh.n_elems()),
                       std::max(1, opts.threads));

  std::vector<double> u(ndof, 0.0);
  MacroSolution sol;
  AssembledSystem sys;

  for (int step = 1; step <= opts.load_steps; ++step) {
    const double t = static_cast<double>(step) / opts.load_steps;
    for (const auto& d : bc.dirichlet) u[2 * d.node + d.comp] = t * d.value;

    sys = assemble(mesh, bc, provider, u, t, opts.threads, true);
    double rnorm = free_norm(sys.residual, fixed);
    const double r0 = rnorm;
    const double tol = std::max(opts.newton_tol * r0, 1e-14 * std::max(1.0, r0));
    std::vector<double> history{rnorm};

    int it = 0;
    while (rnorm > tol) {
      if (it >= opts.newton_max_iter)
        throw NewtonDiverged("solve_macro: step " + std::to_string(step) +
                             " no convergence after " + std::to_string(it) +
                             " iterations (relative residual " +
                             std::to_string(rnorm / std::max(r0, 1e-300)) +
                             ")");

      Eigen::SparseMatrix<double> K(nfree, nfree);
      {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(sys.tangent.size());
        for (const auto& tr : sys.tangent) {
          if (fixed[tr.row] || fixed[tr.col]) continue;
          trips.emplace_back(free_index[tr.row], free_index[tr.col], tr.value);
        }
        K.setFromTriplets(trips.begin(), trips.end());
      }
      Eigen::VectorXd rhs(nfree);
      for (int i = 0; i < ndof; ++i)
        if (!fixed[i]) rhs[free_index[i]] = -sys.residual[i];

      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.analyzePattern(K);
      lu.factorize(K);
      if (lu.info() != Eigen::Success)
        throw NewtonDiverged("solve_macro: singular tangent at step " +
                             std::to_string(step) + " iteration " +
                             std::to_string(it));
      const Eigen::VectorXd du = lu.solve(rhs);

      double alpha = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 10 && !accepted; ++bt) {
        std::vector<double> ut = u;
        for (int i = 0; i < ndof; ++i)
          if (!fixed[i]) ut[i] += alpha * du[free_index[i]];
        try {
          AssembledSystem probe =
              assemble(mesh, bc, provider, ut, t, opts.threads, false);
          const double rn = free_norm(probe.residual, fixed);
          if (rn < rnorm || rn <= tol) {
            u = std::move(ut);
            rnorm = rn;
            accepted = true;
          }
        } catch (const SolverError&) {
          // inadmissible or unsolvable trial state; shrink the step
        }
        alpha *= 0.5;
      }
      if (!accepted)
        throw NewtonDiverged("solve_macro: line search stalled at step " +
                             std::to_string(step) + " iteration " +
                             std::to_string(it));
      ++it;
      ++sol.newton_iterations;
      history.push_back(rnorm);
      if (rnorm > tol)
        sys = assemble(mesh, bc, provider, u, t, opts.threads, true);
    }
    // The last accepted probe skipped the tangent and quadrature bookkeeping;
    // refresh the stored states at the accepted displacements.
    if (it > 0) sys = assemble(mesh, bc, provider, u, t, opts.threads, true);
    sol.residual_history.push_back(std::move(history));
    sol.residual_norm = free_norm(sys.residual, fixed);
  }

  sol.displacement = std::move(u);
  sol.qp = std::move(sys.qp);
  return sol;
}

std::array<double, 2> reaction_sum(const MacroMesh& mesh,
                                   const BoundaryConditions& bc,
                                   ConstitutiveProvider& provider,
                                   const MacroSolution& sol) {
  const AssembledSystem sys =
      assemble(mesh, bc, provider, sol.displacement, 1.0, 1, false);
  std::array<double, 2> R{0.0, 0.0};
  std::vector<char> counted(sys.residual.size(), 0);
  for (const auto& d : bc.dirichlet) {
    const int dof = 2 * d.node + d.comp;
    if (!counted[dof]) {
      R[d.comp] += sys.residual[dof];
      counted[dof] = 1;
    }
  }
  return R;
}

double MacroSolution::total_energy() const {
  double E = 0.0;
  for (const auto& s : qp) E += s.psi * s.weight;
  return E;
}

namespace {

void put17(std::ofstream& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out << buf;
}

}  // namespace

void export_solution(const MacroMesh& mesh, const MacroSolution& sol,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_solution: cannot open " + path);
  out << "DISPLACEMENTS " << mesh.n_nodes() << '\n';
  out << "node,ux,uy\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    out << n << ',';
    put17(out, sol.displacement[2 * n + 0]);
    out << ',';
    put17(out, sol.displacement[2 * n + 1]);
    out << '\n';
  }
  out << "QPOINTS " << sol.qp.size() << '\n';
  out << "elem,qp,X1,X2,F11,F12,F21,F22,P11,P12,P21,P22,S11,S12,S21,S22\n";
  for (std::size_t q = 0; q < sol.qp.size(); ++q) {
    const QpState& st = sol.qp[q];
    const Tensor2 S = dot22(inv2(st.F), st.P);
    out << q / 4 << ',' << q % 4;
    const double cols[14] = {
        st.X[0],      st.X[1],      st.F.v[0][0], st.F.v[0][1], st.F.v[1][0],
        st.F.v[1][1], st.P.v[0][0], st.P.v[0][1], st.P.v[1][0], st.P.v[1][1],
        S.v[0][0],    S.v[0][1],    S.v[1][0],    S.v[1][1]};
    for (double x : cols) {
      out << ',';
      put17(out, x);
    }
    out << '\n';
  }
}

SolutionFile read_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_solution: cannot open " + path);
  SolutionFile sf;
  std::string word;
  long n = 0;
  if (!(in >> word >> n) || word != "DISPLACEMENTS")
    throw ParseError("read_solution: expected DISPLACEMENTS");
  std::string line;
  std::getline(in, line);  // header line
  std::getline(in, line);
  sf.displacement.resize(2 * n);
  for (long i = 0; i < n; ++i) {
    std::getline(in, line);
    long id;
    double ux, uy;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &id, &ux, &uy) != 3)
      throw ParseError("read_solution: bad displacement row: " + line);
    sf.displacement[2 * id + 0] = ux;
    sf.displacement[2 * id + 1] = uy;
  }
  if (!(in >> word >> n) || word != "QPOINTS")
    throw ParseError("read_solution: expected QPOINTS");
  std::getline(in, line);
  std::getline(in, line);
  for (long i = 0; i < n; ++i) {
    std::getline(in, line);
    std::array<int, 2> ids;
    std::array<double, 14> row;
    const int got = std::sscanf(
        line.c_str(),
        "%d,%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf",
        &ids[0], &ids[1], &row[0], &row[1], &row[2], &row[3], &row[4], &row[5],
        &row[6], &row[7], &row[8], &row[9], &row[10], &row[11], &row[12],
        &row[13]);
    if (got != 16)
      throw ParseError("read_solution: bad quadrature row: " + line);
    sf.qp_ids.push_back(ids);
    sf.qp_rows.push_back(row);
  }
  return sf;
}

std::pair<MacroMesh, BoundaryConditions> read_mesh_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_mesh_file: cannot open " + path);
  MacroMesh mesh;
  BoundaryConditions bc;
  std::string word;
  auto expect_count = [&](const char* section) {
    long n;
    if (!(in >> word >> n) || word != section || n < 0)
      throw ParseError(std::string("mesh file: expected '") + section +
                       " <count>' in " + path);
    return n;
  };

  const long nn = expect_count("NODES");
  mesh.nodes.resize(nn);
  for (long i = 0; i < nn; ++i) {
    long id;
    double x, y;
    if (!(in >> id >> x >> y) || id < 0 || id >= nn)
      throw ParseError("mesh file: bad node line");
    mesh.nodes[id] = {x, y};
  }
  const long ne = expect_count("ELEMS");
  mesh.elems.resize(ne);
  mesh.material_tag.assign(ne, -1);
  {
    std::string line;
    std::getline(in, line);  // finish the count line
    for (long i = 0; i < ne; ++i) {
      if (!std::getline(in, line))
        throw ParseError("mesh file: truncated ELEMS section");
      std::istringstream ls(line);
      long id;
      std::array<int, 4> conn;
      if (!(ls >> id >> conn[0] >> conn[1] >> conn[2] >> conn[3]) || id < 0 ||
          id >= ne)
        throw ParseError("mesh file: bad element line: " + line);
      mesh.elems[id] = conn;
      int mat;
      if (ls >> mat) mesh.material_tag[id] = mat;
    }
  }
  const long nd = expect_count("DIRICHLET");
  for (long i = 0; i < nd; ++i) {
    DirichletBc d{};
    if (!(in >> d.node >> d.comp >> d.value))
      throw ParseError("mesh file: bad Dirichlet line");
    bc.dirichlet.push_back(d);
  }
  const long nt = expect_count("TRACTION");
  for (long i = 0; i < nt; ++i) {
    EdgeTraction tr{};
    if (!(in >> tr.n1 >> tr.n2 >> tr.tx >> tr.ty))
      throw ParseError("mesh file: bad traction line");
    bc.tractions.push_back(tr);
  }
  return {std::move(mesh), std::move(bc)};
}

void write_mesh_file(const MacroMesh& mesh, const BoundaryConditions& bc,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh_file: cannot open " + path);
  char buf[40];
  auto w = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  out << "NODES " << mesh.n_nodes() << '\n';
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    out << i << ' ';
    w(mesh.nodes[i][0]);
    out << ' ';
    w(mesh.nodes[i][1]);
    out << '\n';
  }
  out << "ELEMS " << mesh.n_elems() << '\n';
  for (int e = 0; e < mesh.n_elems(); ++e) {
    out << e;
    for (int a : mesh.elems[e]) out << ' ' << a;
    if (mesh.material_tag[e] >= 0) out << ' ' << mesh.material_tag[e];
    out << '\n';
  }
  out << "DIRICHLET " << bc.dirichlet.size() << '\n';
  for (const auto& d : bc.dirichlet) {
    out << d.node << ' ' << d.comp << ' ';
    w(d.value);
    out << '\n';
  }
  out << "TRACTION " << bc.tractions.size() << '\n';
  for (const auto& tr : bc.tractions) {
    out << tr.n1 << ' ' << tr.n2 << ' ';
    w(tr.tx);
    out << ' ';
    w(tr.ty);
    out << '\n';
  }
}

MacroMesh build_rect_mesh(int nx, int ny, double x0, double y0, double Lx,
                          double Ly) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rect_mesh: nx, ny >= 1");
  MacroMesh mesh;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes.push_back({x0 + Lx * i / nx, y0 + Ly * j / ny});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = j * (nx + 1) + i;
      mesh.elems.push_back({a, a + 1, a + nx + 2, a + nx + 1});
      mesh.material_tag.push_back(-1);
    }
  return mesh;
}

std::pair<MacroMesh, BoundaryConditions> build_cook_problem(int nx, int ny,
                                                            double q0) {
  MacroMesh mesh = build_rect_mesh(nx, ny, 0.0, 0.0, 1.0, 1.0);
  for (auto& node : mesh.nodes) {
    const double s = node[0], t = node[1];
    const double y_bot = 44.0 * s;
    const double y_top = 44.0 + 16.0 * s;
    node[0] = 48.0 * s;
    node[1] = (1.0 - t) * y_bot + t * y_top;
  }
  BoundaryConditions bc;
  for (int j = 0; j <= ny; ++j) {
    const int node = j * (nx + 1);
    bc.dirichlet.push_back({node, 0, 0.0});
    bc.dirichlet.push_back({node, 1, 0.0});
  }
  for (int j = 0; j < ny; ++j) {
    const int n1 = j * (nx + 1) + nx;
    const int n2 = (j + 1) * (nx + 1) + nx;
    bc.tractions.push_back({n1, n2, 0.0, q0});
  }
  return {std::move(mesh), std::move(bc)};
}

std::pair<MacroMesh, BoundaryConditions> build_beam_problem(
    int ncellx, int ncelly, double cell, int elems_per_cell,
    double inclusion_fraction, double q0) {
  const int nx = ncellx * elems_per_cell;
  const int ny = ncelly * elems_per_cell;
  MacroMesh mesh =
      build_rect_mesh(nx, ny, 0.0, 0.0, ncellx * cell, ncelly * cell);
  if (inclusion_fraction > 0.0) {
    const double R = std::sqrt(inclusion_fraction * cell * cell / M_PI);
    const double h = cell / elems_per_cell;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double cx = (i + 0.5) * h;
        const double cy = (j + 0.5) * h;
        const double ccx = (std::floor(cx / cell) + 0.5) * cell;
        const double ccy = (std::floor(cy / cell) + 0.5) * cell;
        const double dx = cx - ccx, dy = cy - ccy;
        mesh.material_tag[j * nx + i] = (dx * dx + dy * dy < R * R) ? 1 : 0;
      }
  }
  BoundaryConditions bc;
  for (int j = 0; j <= ny; ++j) {
    const int node = j * (nx + 1);
    bc.dirichlet.push_back({node, 0, 0.0});
    bc.dirichlet.push_back({node, 1, 0.0});
  }
  for (int j = 0; j < ny; ++j) {
    const int n1 = j * (nx + 1) + nx;
    const int n2 = (j + 1) * (nx + 1) + nx;
    bc.tractions.push_back({n1, n2, 0.0, q0});
  }
  return {std::move(mesh), std::move(bc)};
}

}  // namespace homog
