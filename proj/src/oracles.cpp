#include "homog/oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "homog/errors.hpp"

namespace homog {

LaminateProblem::LaminateProblem(Material m1, Material m2, double f1)
    : material1(std::move(m1)), material2(std::move(m2)), fraction1(f1) {
  if (!(fraction1 > 0.0) || !(fraction1 < 1.0))
    throw std::invalid_argument("LaminateProblem: fraction in (0,1)");
}

namespace {

// Unknowns z = (F11_1, F11_2, F21_1, F21_2); F12 and F22 are continuous and
// carry the macroscopic values directly.
Tensor2 phase_F(const Tensor2& Fbar, double f11, double f21) {
  Tensor2 F = Fbar;
  F.v[0][0] = f11;
  F.v[1][0] = f21;
  return F;
}

}  // namespace

LaminateSolution laminate_solve(const LaminateProblem& p, const Tensor2& Fbar) {
  if (!(det2(Fbar) > 0.0))
    throw NonPositiveJacobian("laminate_solve: det(Fbar) <= 0");
  const double f1 = p.fraction1, f2 = 1.0 - p.fraction1;

  Eigen::Vector4d z(Fbar.v[0][0], Fbar.v[0][0], Fbar.v[1][0], Fbar.v[1][0]);

  auto assemble = [&](const Eigen::Vector4d& zz, Eigen::Vector4d& r,
                      Eigen::Matrix4d* J) {
    const Tensor2 F1 = phase_F(Fbar, zz[0], zz[2]);
    const Tensor2 F2 = phase_F(Fbar, zz[1], zz[3]);
    if (!(det2(F1) > 0.0) || !(det2(F2) > 0.0)) return false;
    const Tensor2 P1 = stress(p.material1, F1);
    const Tensor2 P2 = stress(p.material2, F2);
    r[0] = f1 * zz[0] + f2 * zz[1] - Fbar.v[0][0];
    r[1] = f1 * zz[2] + f2 * zz[3] - Fbar.v[1][0];
    r[2] = P1.v[0][0] - P2.v[0][0];
    r[3] = P1.v[1][0] - P2.v[1][0];
    if (J) {
      const Tensor4 C1 = tangent(p.material1, F1);
      const Tensor4 C2 = tangent(p.material2, F2);
      J->setZero();
      (*J)(0, 0) = f1;
      (*J)(0, 1) = f2;
      (*J)(1, 2) = f1;
      (*J)(1, 3) = f2;
      (*J)(2, 0) = C1.v[0][0][0][0];
      (*J)(2, 1) = -C2.v[0][0][0][0];
      (*J)(2, 2) = C1.v[0][0][1][0];
      (*J)(2, 3) = -C2.v[0][0][1][0];
      (*J)(3, 0) = C1.v[1][0][0][0];
      (*J)(3, 1) = -C2.v[1][0][0][0];
      (*J)(3, 2) = C1.v[1][0][1][0];
      (*J)(3, 3) = -C2.v[1][0][1][0];
    }
    return true;
  };

  Eigen::Vector4d r;
  Eigen::Matrix4d J;
  if (!assemble(z, r, &J))
    throw NonPositiveJacobian("laminate_solve: initial phase state inadmissible");

  double rnorm = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 100 && rnorm > 1e-13; ++it) {
    const Eigen::Vector4d dz = J.fullPivLu().solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::Vector4d zt = z + alpha * dz;
      Eigen::Vector4d rt;
      Eigen::Matrix4d Jt;
      if (assemble(zt, rt, &Jt)) {
        const double rn = rt.lpNorm<Eigen::Infinity>();
        if (rn < rnorm) {
          z = zt;
          r = rt;
          J = Jt;
          rnorm = rn;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // at the rounding floor; final check below
  }
  if (!(rnorm <= 1e-12))
    throw NewtonDiverged("laminate_solve: residual " + std::to_string(rnorm));

  return {phase_F(Fbar, z[0], z[2]), phase_F(Fbar, z[1], z[3])};
}

std::pair<double, Tensor2> laminate_energy_stress(const LaminateProblem& p,
                                                  const Tensor2& Fbar) {
  const LaminateSolution s = laminate_solve(p, Fbar);
  const double f1 = p.fraction1, f2 = 1.0 - p.fraction1;
  const double psi = f1 * energy(p.material1, s.F1) + f2 * energy(p.material2, s.F2);
  const Tensor2 P = f1 * stress(p.material1, s.F1) + f2 * stress(p.material2, s.F2);
  return {psi, P};
}

Tensor4 central_diff_tangent(const std::function<Tensor2(const Tensor2&)>& stress_fn,
                             const Tensor2& Fbar, double eps) {
  if (!(eps >= 1e-8) || !(eps <= 1e-3))
    throw std::invalid_argument("central_diff_tangent: eps in [1e-8, 1e-3]");
  Tensor4 C;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      Tensor2 Fp = Fbar, Fm = Fbar;
      Fp.v[k][l] += eps;
      Fm.v[k][l] -= eps;
      const Tensor2 Pp = stress_fn(Fp);
      const Tensor2 Pm = stress_fn(Fm);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          C.v[i][j][k][l] = (Pp.v[i][j] - Pm.v[i][j]) / (2.0 * eps);
    }
  return C;
}

Toy1dProblem::Toy1dProblem(double L_, int k_, double t0_)
    : L(L_), k(k_), t0(t0_) {
  if (!(L > 0.0) || k < 1)
    throw std::invalid_argument("Toy1dProblem: require L > 0 and k >= 1");
}

namespace {

constexpr int kPeriodSamples = 1024;  // midpoint rule; spectrally accurate

double toy_mu(double x, int k) {
  return 1.5 + std::sin(2.0 * M_PI * k * x);
}

double toy_psi(double mu, double eps) {
  return mu * (2.0 / 3.0 * std::pow(1.0 + eps, 1.5) - eps - 2.0 / 3.0);
}

}  // namespace

Toy1dHomogenized toy1d_micro_energy(const Toy1dProblem& p, double eps_bar) {
  // Sample mu over one period; the phase offset is immaterial for averages.
  std::array<double, kPeriodSamples> mu;
  double mu_min = 1e300;
  for (int m = 0; m < kPeriodSamples; ++m) {
    const double x = (m + 0.5) / (static_cast<double>(kPeriodSamples) * p.k);
    mu[m] = toy_mu(x, p.k);
    mu_min = std::min(mu_min, mu[m]);
  }

  auto mean_strain = [&](double s) {
    double acc = 0.0;
    for (double m : mu) {
      const double t = 1.0 + s / m;
      acc += t * t - 1.0;
    }
    return acc / kPeriodSamples;
  };

  // <(1 + s/mu)^2 - 1> is strictly increasing on s > -mu_min; bracket and
  // bisect with Newton acceleration.
  double lo = (eps_bar >= 0.0) ? 0.0 : -mu_min * (1.0 - 1e-9);
  double hi = (eps_bar >= 0.0) ? 1.0 : 0.0;
  if (eps_bar >= 0.0) {
    int guard = 0;
    while (mean_strain(hi) < eps_bar) {
      hi *= 2.0;
      if (++guard > 200)
        throw RootFindFailed("toy1d_micro_energy: bracket not found");
    }
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = mean_strain(s) - eps_bar;
    if (std::abs(g) < 1e-14 * (1.0 + std::abs(eps_bar))) break;
    if (g > 0.0)
      hi = s;
    else
      lo = s;
    double gp = 0.0;
    for (double m : mu) gp += 2.0 * (1.0 + s / m) / m;
    gp /= kPeriodSamples;
    double snext = s - g / gp;
    if (!(snext > lo) || !(snext < hi)) snext = 0.5 * (lo + hi);
    s = snext;
  }
  const double g_final = mean_strain(s) - eps_bar;
  if (!(std::abs(g_final) < 1e-10 * (1.0 + std::abs(eps_bar))))
    throw RootFindFailed("toy1d_micro_energy: residual " +
                         std::to_string(g_final));

  double psi = 0.0;
  for (double m : mu) {
    const double t = 1.0 + s / m;
    psi += toy_psi(m, t * t - 1.0);
  }
  return {psi / kPeriodSamples, s};
}

std::vector<double> toy1d_fullfield(const Toy1dProblem& p, int n_elements) {
  if (n_elements < 10 * p.k)
    throw std::invalid_argument(
        "toy1d_fullfield: need at least 10 k elements to resolve mu(X)");
  const int n = n_elements;
  const double h = p.L / n;

  // Exact per-element integral of mu; avoids quadrature error from the
  // oscillating coefficient.
  std::vector<double> Mu(n);
  const double w = 2.0 * M_PI * p.k;
  for (int e = 0; e < n; ++e) {
    const double a = e * h, b = a + h;
    Mu[e] = 1.5 * h + (std::cos(w * a) - std::cos(w * b)) / w;
  }

  std::vector<double> u(n + 1, 0.0);
  std::vector<double> eps(n), S(n), kappa(n);
  std::vector<double> diag(n), lower(n), upper(n), rhs(n), dz(n);

  auto element_state = [&](const std::vector<double>& uu) {
    for (int e = 0; e < n; ++e) {
      eps[e] = (uu[e + 1] - uu[e]) / h;
      if (!(1.0 + eps[e] > 0.0)) return false;
      S[e] = (std::sqrt(1.0 + eps[e]) - 1.0) * Mu[e] / h;
      kappa[e] = Mu[e] / (2.0 * h * h * std::sqrt(1.0 + eps[e]));
    }
    return true;
  };

  auto residual_norm = [&](bool fill_rhs) {
    double rn = 0.0;
    for (int i = 1; i <= n; ++i) {
      double r = S[i - 1] - (i < n ? S[i] : 0.0) - (i == n ? p.t0 : 0.0);
      if (fill_rhs) rhs[i - 1] = -r;
      rn = std::max(rn, std::abs(r));
    }
    return rn;
  };

  if (!element_state(u))
    throw NewtonDiverged("toy1d_fullfield: inadmissible initial state");
  double rnorm = residual_norm(true);
  const double tol = 1e-12 * std::max(1.0, std::abs(p.t0));

  bool at_floor = false;
  for (int it = 0; it < 60 && rnorm > tol && !at_floor; ++it) {
    // Tridiagonal tangent, unknowns u_1..u_n.
    for (int i = 1; i <= n; ++i) {
      diag[i - 1] = kappa[i - 1] + (i < n ? kappa[i] : 0.0);
      lower[i - 1] = (i > 1) ? -kappa[i - 1] : 0.0;
      upper[i - 1] = (i < n) ? -kappa[i] : 0.0;
    }
    // Thomas algorithm
    std::vector<double> cp(n), dp(n);
    cp[0] = upper[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for (int i = 1; i < n; ++i) {
      const double m = diag[i] - lower[i] * cp[i - 1];
      cp[i] = upper[i] / m;
      dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m;
    }
    dz[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) dz[i] = dp[i] - cp[i] * dz[i + 1];

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      std::vector<double> ut = u;
      for (int i = 1; i <= n; ++i) ut[i] += alpha * dz[i - 1];
      if (element_state(ut)) {
        const double rn = residual_norm(false);
        if (rn < rnorm || rn < tol) {
          u = std::move(ut);
          rnorm = residual_norm(true);
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      element_state(u);       // restore cached state for the kept iterate
      residual_norm(true);
      at_floor = true;        // rounding floor; the final check decides
    }
  }
  if (rnorm > 1e-10 * std::max(1.0, std::abs(p.t0)))
    throw NewtonDiverged("toy1d_fullfield: residual " + std::to_string(rnorm));
  return u;
}

}  // namespace homog
