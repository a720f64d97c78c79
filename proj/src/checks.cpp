#include "homog/checks.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "homog/dataset.hpp"
#include "homog/oracles.hpp"
#include "homog/parallel.hpp"
#include "homog/rng.hpp"
#include "homog/surrogate.hpp"

namespace homog {

namespace {

FieldT2 random_field(const RveGrid& grid, Rng& rng) {
  FieldT2 w(grid.n1, grid.n2);
  for (auto& plane : w.c)
    for (double& x : plane) x = rng.uniform(-1.0, 1.0);
  return w;
}

// Direct (unaccelerated) DFT of one component plane, paper convention:
// vhat_k = sum_j exp(-i xi(k) . X_j) v_j over signed wavenumbers.
std::vector<std::complex<double>> naive_dft_plane(const RveGrid& grid,
                                                  const std::vector<double>& v,
                                                  const std::vector<double>& xi1,
                                                  const std::vector<double>& xi2) {
  const int n1 = grid.n1, n2 = grid.n2;
  std::vector<std::complex<double>> hat(static_cast<std::size_t>(n1) * n2);
  for (int k1 = 0; k1 < n1; ++k1)
    for (int k2 = 0; k2 < n2; ++k2) {
      std::complex<double> acc = 0.0;
      for (int j1 = 0; j1 < n1; ++j1)
        for (int j2 = 0; j2 < n2; ++j2) {
          const double phase =
              -(xi1[k1] * grid.x1(j1) + xi2[k2] * grid.x2(j2));
          acc += v[static_cast<std::size_t>(j1) * n2 + j2] *
                 std::complex<double>(std::cos(phase), std::sin(phase));
        }
      hat[static_cast<std::size_t>(k1) * n2 + k2] = acc;
    }
  return hat;
}

}  // namespace

CheckReport check_projection(int n1, int n2, int n_fields, std::uint64_t seed) {
  const RveGrid grid(n1, n2, 1.0, 1.0);
  // A dummy single-phase problem just to host the transforms.
  RveProblem problem(grid, rasterize_homogeneous(grid),
                     {Material(NeoHookeanA(1.0, 1.0))});
  SpectralSolver solver(problem);
  const Wavenumbers wn = wavenumbers(grid);

  double worst_idem = 0.0, worst_mean = 0.0, worst_curl = 0.0;
  Rng rng(derive_seed(seed, "projection"));
  for (int f = 0; f < n_fields; ++f) {
    const FieldT2 w = random_field(grid, rng);
    const FieldT2 gw = solver.project(w);
    const FieldT2 ggw = solver.project(gw);

    FieldT2 diff = ggw;
    axpy(-1.0, gw, diff);
    worst_idem = std::max(worst_idem, norm(diff) / norm(gw));
    worst_mean = std::max(worst_mean, max_abs(gw.mean()));

    // Fourier curl of the projected field, one row i at a time:
    // xi2 * hat(gw)_i1 - xi1 * hat(gw)_i2 must vanish at every frequency.
    const auto h0 = naive_dft_plane(grid, gw.c[0], wn.xi1, wn.xi2);
    const auto h1 = naive_dft_plane(grid, gw.c[1], wn.xi1, wn.xi2);
    const auto h2 = naive_dft_plane(grid, gw.c[2], wn.xi1, wn.xi2);
    const auto h3 = naive_dft_plane(grid, gw.c[3], wn.xi1, wn.xi2);
    double hat_scale = 0.0;
    for (std::size_t q = 0; q < h0.size(); ++q)
      hat_scale = std::max({hat_scale, std::abs(h0[q]), std::abs(h1[q]),
                            std::abs(h2[q]), std::abs(h3[q])});
    for (int k1 = 0; k1 < n1; ++k1)
      for (int k2 = 0; k2 < n2; ++k2) {
        const double x1 = wn.xi1[k1], x2 = wn.xi2[k2];
        const double xin = std::hypot(x1, x2);
        if (xin == 0.0) continue;
        const std::size_t q = static_cast<std::size_t>(k1) * n2 + k2;
        const double c0 = std::abs(x2 * h0[q] - x1 * h1[q]);
        const double c1 = std::abs(x2 * h2[q] - x1 * h3[q]);
        worst_curl = std::max(worst_curl,
                              std::max(c0, c1) / (xin * hat_scale));
      }
  }

  CheckReport rep;
  rep.lines.push_back({"projection idempotency (relative)", worst_idem, 1e-10,
                       worst_idem <= 1e-10});
  rep.lines.push_back(
      {"projection zero mean", worst_mean, 1e-12, worst_mean <= 1e-12});
  rep.lines.push_back({"projection Fourier curl (normalized)", worst_curl,
                       1e-10, worst_curl <= 1e-10});
  return rep;
}

CheckReport check_laminate(int n_samples, std::uint64_t seed, int grid_n,
                           const SolverOptions& opts, int threads) {
  const RveGrid grid(grid_n, grid_n, 1.0, 1.0);
  const PhaseMap phases = rasterize_laminate(grid);
  const std::vector<Material> mats = {Material(NeoHookeanA(100.0, 1.0)),
                                      Material(NeoHookeanA(1000.0, 1.0))};
  const RveProblem problem(grid, phases, mats);
  const LaminateProblem oracle(mats[0], mats[1], phases.volume_fraction(0));

  const SamplingBox box({0.7, -0.3, -0.3, 0.7}, {1.3, 0.3, 0.3, 1.3});
  const auto points = sample_box(box, n_samples, derive_seed(seed, "laminate"));

  std::vector<double> err_psi(points.size()), err_P(points.size()),
      err_C(points.size());
  std::vector<std::unique_ptr<SpectralSolver>> solvers(std::max(1, threads));
  parallel_for(points.size(), threads, [&](std::size_t i, int worker) {
    auto& solver = solvers[worker];
    if (!solver) solver = std::make_unique<SpectralSolver>(problem, opts);
    const Tensor2 Fbar = unflatten(points[i]);
    const MicroSolution sol = solver->solve(Fbar);
    const auto [psi_ref, P_ref] = laminate_energy_stress(oracle, Fbar);
    err_psi[i] = std::abs(sol.psi_bar - psi_ref) / std::abs(psi_ref);
    {
      Tensor2 dP = sol.Pbar - P_ref;
      err_P[i] = norm2(dP) / norm2(P_ref);
    }
    const Tensor4 C_fft = solver->macro_tangent(sol);
    const Tensor4 C_ref = central_diff_tangent(
        [&](const Tensor2& F) { return laminate_energy_stress(oracle, F).second; },
        Fbar, 1e-6);
    double num = 0.0, den = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            const double diff = C_fft.v[a][b][c][d] - C_ref.v[a][b][c][d];
            num += diff * diff;
            den += C_ref.v[a][b][c][d] * C_ref.v[a][b][c][d];
          }
    err_C[i] = std::sqrt(num / den);
  });

  const double worst_psi = *std::max_element(err_psi.begin(), err_psi.end());
  const double worst_P = *std::max_element(err_P.begin(), err_P.end());
  const double worst_C = *std::max_element(err_C.begin(), err_C.end());

  CheckReport rep;
  rep.lines.push_back({"laminate energy vs analytical (relative)", worst_psi,
                       1e-5, worst_psi <= 1e-5});
  rep.lines.push_back({"laminate stress vs analytical (relative)", worst_P,
                       1e-4, worst_P <= 1e-4});
  rep.lines.push_back({"laminate tangent vs central difference (relative)",
                       worst_C, 1e-3, worst_C <= 1e-3});
  return rep;
}

CheckReport check_toy1d() {
  CheckReport rep;

  // d psi / d eps equals the constant micro stress.
  double worst_sigma = 0.0;
  for (double eps : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    const Toy1dProblem p(1.0, 1, 0.0);
    const double h = 1e-5;
    const double dpsi = (toy1d_micro_energy(p, eps + h).psi_bar -
                         toy1d_micro_energy(p, eps - h).psi_bar) /
                        (2.0 * h);
    const double sigma = toy1d_micro_energy(p, eps).sigma_bar;
    worst_sigma = std::max(worst_sigma, std::abs(dpsi - sigma) / sigma);
  }
  rep.lines.push_back({"toy1d d(psi)/d(eps) = sigma (relative)", worst_sigma,
                       1e-6, worst_sigma <= 1e-6});

  // Convexity on [0, 2].
  double min_curv = 1e300;
  for (double eps = 0.1; eps < 2.0; eps += 0.2) {
    const Toy1dProblem p(1.0, 1, 0.0);
    const double h = 1e-4;
    const double c = (toy1d_micro_energy(p, eps + h).psi_bar -
                      2.0 * toy1d_micro_energy(p, eps).psi_bar +
                      toy1d_micro_energy(p, eps - h).psi_bar) /
                     (h * h);
    min_curv = std::min(min_curv, c);
  }
  rep.lines.push_back(
      {"toy1d convexity (min curvature)", min_curv, 0.0, min_curv > 0.0});

  // Full-field profiles approach the homogenized profile as k grows.
  const double eps_target = 1.0;
  const double t0 = toy1d_micro_energy(Toy1dProblem(1.0, 1, 0.0), eps_target)
                        .sigma_bar;
  std::vector<double> gaps;
  for (int k : {10, 30, 100}) {
    const Toy1dProblem p(1.0, k, t0);
    const int n = 40 * k;
    const std::vector<double> u = toy1d_fullfield(p, n);
    double gap = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double X = p.L * i / n;
      gap = std::max(gap, std::abs(u[i] - eps_target * X));
    }
    gaps.push_back(gap);
  }
  const bool monotone = gaps[0] > gaps[1] && gaps[1] > gaps[2];
  rep.lines.push_back({"toy1d full-field -> homogenized (gap at k=100)",
                       gaps[2], gaps[0], monotone});
  return rep;
}

CheckReport check_surrogate_derivatives(int n_models, std::uint64_t seed) {
  double worst_grad = 0.0, worst_hess = 0.0;
  double ratio_lo_g = 1e300, ratio_hi_g = 0.0;
  double ratio_lo_h = 1e300, ratio_hi_h = 0.0;

  Rng rng(derive_seed(seed, "derivatives"));
  for (int trial = 0; trial < n_models; ++trial) {
    HdmrModel m;
    m.D = 4;
    m.d = 1 + static_cast<int>(rng.index(4));
    m.L = 1 + static_cast<int>(rng.index(3));
    m.norm.x_min.resize(m.D);
    m.norm.x_max.resize(m.D);
    for (int r = 0; r < m.D; ++r) {
      m.norm.x_min[r] = rng.uniform(-2.0, 0.0);
      m.norm.x_max[r] = m.norm.x_min[r] + rng.uniform(0.5, 2.0);
    }
    m.norm.f_min = rng.uniform(-1.0, 0.0);
    m.norm.f_max = m.norm.f_min + rng.uniform(0.5, 3.0);
    for (int i = 0; i < m.L; ++i) {
      ComponentNet cn;
      const int N = 2 + static_cast<int>(rng.index(6));
      cn.A.resize(m.d, m.D);
      for (int a = 0; a < m.d; ++a)
        for (int b = 0; b < m.D; ++b) cn.A(a, b) = rng.uniform(-1.0, 1.0);
      cn.b = Eigen::VectorXd::Zero(m.d);
      cn.W.resize(N, m.d);
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < m.d; ++b) cn.W(a, b) = rng.uniform(-1.0, 1.0);
      cn.v.resize(N);
      cn.c.resize(N);
      for (int a = 0; a < N; ++a) {
        cn.v[a] = rng.uniform(-1.0, 1.0);
        cn.c[a] = rng.uniform(-1.0, 1.0);
      }
      cn.v0 = rng.uniform(-0.5, 0.5);
      m.components.push_back(std::move(cn));
    }

    Eigen::VectorXd x(m.D);
    for (int r = 0; r < m.D; ++r)
      x[r] = rng.uniform(m.norm.x_min[r], m.norm.x_max[r]);

    // Finite differences taken along normalized coordinates; the step in
    // physical coordinates is h * (width/2) per component.
    auto fd_grad = [&](double h) {
      Eigen::VectorXd g(m.D);
      for (int r = 0; r < m.D; ++r) {
        const double hx = 0.5 * h * (m.norm.x_max[r] - m.norm.x_min[r]);
        Eigen::VectorXd xp = x, xm = x;
        xp[r] += hx;
        xm[r] -= hx;
        g[r] = (evaluate(m, xp) - evaluate(m, xm)) / (2.0 * hx);
      }
      return g;
    };
    auto fd_hess = [&](double h) {
      Eigen::MatrixXd H(m.D, m.D);
      for (int r = 0; r < m.D; ++r) {
        const double hx = 0.5 * h * (m.norm.x_max[r] - m.norm.x_min[r]);
        Eigen::VectorXd xp = x, xm = x;
        xp[r] += hx;
        xm[r] -= hx;
        H.col(r) = (gradient(m, xp) - gradient(m, xm)) / (2.0 * hx);
      }
      return H;
    };

    const Eigen::VectorXd g_exact = gradient(m, x);
    const double gscale = std::max(g_exact.norm(), 1e-8);
    const double eg1 = (fd_grad(1e-4) - g_exact).norm() / gscale;
    const double eg2 = (fd_grad(5e-5) - g_exact).norm() / gscale;
    worst_grad = std::max(worst_grad, eg2);
    const double rg = eg1 / std::max(eg2, 1e-300);
    ratio_lo_g = std::min(ratio_lo_g, rg);
    ratio_hi_g = std::max(ratio_hi_g, rg);

    const Eigen::MatrixXd H_exact = hessian(m, x);
    const double hscale = std::max(H_exact.norm(), 1e-8);
    const double eh1 = (fd_hess(1e-3) - H_exact).norm() / hscale;
    const double eh2 = (fd_hess(5e-4) - H_exact).norm() / hscale;
    worst_hess = std::max(worst_hess, eh2);
    const double rh = eh1 / std::max(eh2, 1e-300);
    ratio_lo_h = std::min(ratio_lo_h, rh);
    ratio_hi_h = std::max(ratio_hi_h, rh);
  }

  CheckReport rep;
  rep.lines.push_back({"surrogate gradient vs FD (relative)", worst_grad, 1e-6,
                       worst_grad <= 1e-6});
  rep.lines.push_back({"surrogate Hessian vs FD (relative)", worst_hess, 1e-5,
                       worst_hess <= 1e-5});
  rep.lines.push_back({"gradient FD ratio (min, want 4 +/- 0.5)", ratio_lo_g,
                       4.5, ratio_lo_g >= 3.5 && ratio_hi_g <= 4.5});
  rep.lines.push_back({"Hessian FD ratio (min, want 4 +/- 0.5)", ratio_lo_h,
                       4.5, ratio_lo_h >= 3.5 && ratio_hi_h <= 4.5});
  return rep;
}

}  // namespace homog
