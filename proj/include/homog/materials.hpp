#ifndef HOMOG_MATERIALS_HPP
#define HOMOG_MATERIALS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "homog/tensor.hpp"

namespace homog {

/// Compressible Neo-Hookean law parameterized by shear modulus and a
/// compressibility exponent:
///   psi(F) = mu/2 [trace(F^T F) - 2] + mu/beta [det(F)^(-beta) - 1].
/// beta may also be derived from a Poisson ratio, beta = 2 nu / (1 - nu).
struct NeoHookeanA {
  double mu;
  double beta;

  NeoHookeanA(double mu_, double beta_) : mu(mu_), beta(beta_) {
    if (!(mu > 0.0) || !(beta > 0.0))
      throw std::invalid_argument("NeoHookeanA: require mu > 0 and beta > 0");
  }

  static NeoHookeanA from_poisson(double mu_, double nu) {
    if (!(nu > 0.0) || !(nu < 0.5))
      throw std::invalid_argument("NeoHookeanA: require 0 < nu < 0.5");
    return NeoHookeanA(mu_, 2.0 * nu / (1.0 - nu));
  }
};

/// Neo-Hookean law in terms of the right Cauchy-Green tensor C = F^T F:
///   psi = lambda/2 [log J]^2 - mu log J + mu/2 [trace(C) - 2],
/// with Lame parameters from Young modulus and Poisson ratio.
struct NeoHookeanB {
  double E;
  double nu;

  NeoHookeanB(double E_, double nu_) : E(E_), nu(nu_) {
    if (!(E > 0.0) || !(nu > 0.0) || !(nu < 0.5))
      throw std::invalid_argument("NeoHookeanB: require E > 0 and 0 < nu < 0.5");
  }

  double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double mu() const { return E / (2.0 * (1.0 + nu)); }
};

using Material = std::variant<NeoHookeanA, NeoHookeanB>;

namespace detail {

inline void require_positive_jacobian(double J, const char* where) {
  if (!(J > 0.0)) {
    throw NonPositiveJacobian(std::string(where) +
                              ": det(F) = " + std::to_string(J) + " <= 0");
  }
}

}  // namespace detail

inline double energy(const NeoHookeanA& m, const Tensor2& F) {
  const double J = det2(F);
  detail::require_positive_jacobian(J, "energy");
  const double trC = ddot22(F, F);
  return 0.5 * m.mu * (trC - 2.0) +
         m.mu / m.beta * (std::pow(J, -m.beta) - 1.0);
}

inline Tensor2 stress(const NeoHookeanA& m, const Tensor2& F) {
  const double J = det2(F);
  detail::require_positive_jacobian(J, "stress");
  const Tensor2 Fit = transpose(inv2(F));  // Fit_ij = F^{-1}_ji
  const double Jb = std::pow(J, -m.beta);
  Tensor2 P;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      P.v[i][j] = m.mu * F.v[i][j] - m.mu * Jb * Fit.v[i][j];
  return P;
}

inline Tensor4 tangent(const NeoHookeanA& m, const Tensor2& F) {
  const double J = det2(F);
  detail::require_positive_jacobian(J, "tangent");
  const Tensor2 Fi = inv2(F);
  const double Jb = std::pow(J, -m.beta);
  Tensor4 C;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          double c = (i == k && j == l) ? m.mu : 0.0;
          c += m.mu * Jb *
               (m.beta * Fi.v[j][i] * Fi.v[l][k] + Fi.v[j][k] * Fi.v[l][i]);
          C.v[i][j][k][l] = c;
        }
  return C;
}

inline double energy(const NeoHookeanB& m, const Tensor2& F) {
  const double J = det2(F);
  detail::require_positive_jacobian(J, "energy");
  const double lam = m.lambda(), mu = m.mu();
  const double logJ = std::log(J);
  const double trC = ddot22(F, F);
  return 0.5 * lam * logJ * logJ - mu * logJ + 0.5 * mu * (trC - 2.0);
}

inline Tensor2 stress(const NeoHookeanB& m, const Tensor2& F) {
  const double J = det2(F);
  detail::require_positive_jacobian(J, "stress");
  const double lam = m.lambda(), mu = m.mu();
  const double logJ = std::log(J);
  const Tensor2 Fi = inv2(F);
  Tensor2 P;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      P.v[i][j] = mu * F.v[i][j] + (lam * logJ - mu) * Fi.v[j][i];
  return P;
}

inline Tensor4 tangent(const NeoHookeanB& m, const Tensor2& F) {
  const double J = det2(F);
  detail::require_positive_jacobian(J, "tangent");
  const double lam = m.lambda(), mu = m.mu();
  const double logJ = std::log(J);
  const Tensor2 Fi = inv2(F);
  Tensor4 C;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          double c = lam * Fi.v[j][i] * Fi.v[l][k] -
                     (lam * logJ - mu) * Fi.v[j][k] * Fi.v[l][i];
          if (i == k && j == l) c += mu;
          C.v[i][j][k][l] = c;
        }
  return C;
}

inline double energy(const Material& m, const Tensor2& F) {
  return std::visit([&](const auto& mm) { return energy(mm, F); }, m);
}

inline Tensor2 stress(const Material& m, const Tensor2& F) {
  return std::visit([&](const auto& mm) { return stress(mm, F); }, m);
}

inline Tensor4 tangent(const Material& m, const Tensor2& F) {
  return std::visit([&](const auto& mm) { return tangent(mm, F); }, m);
}

}  // namespace homog

#endif
