#ifndef HOMOG_TENSOR_HPP
#define HOMOG_TENSOR_HPP

#include <array>
#include <cmath>
#include <cstddef>

#include "homog/errors.hpp"

namespace homog {

/// Canonical component ordering used everywhere a 2x2 tensor is flattened
/// (surrogate inputs, dataset files, solution exports): row-major
/// (t11, t12, t21, t22).
using FlatVec4 = std::array<double, 4>;

/// Dense second-order tensor in fixed spatial dimension 2.
struct Tensor2 {
  double v[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

  double& operator()(int i, int j) { return v[i][j]; }
  double operator()(int i, int j) const { return v[i][j]; }

  static Tensor2 identity() {
    Tensor2 t;
    t.v[0][0] = 1.0;
    t.v[1][1] = 1.0;
    return t;
  }

  static Tensor2 zero() { return Tensor2{}; }

  static Tensor2 diag(double a, double b) {
    Tensor2 t;
    t.v[0][0] = a;
    t.v[1][1] = b;
    return t;
  }

  /// Unit tensor E_kl with a single 1 at (k,l).
  static Tensor2 unit(int k, int l) {
    Tensor2 t;
    t.v[k][l] = 1.0;
    return t;
  }

  Tensor2& operator+=(const Tensor2& o) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) v[i][j] += o.v[i][j];
    return *this;
  }

  Tensor2& operator-=(const Tensor2& o) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) v[i][j] -= o.v[i][j];
    return *this;
  }

  Tensor2& operator*=(double s) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) v[i][j] *= s;
    return *this;
  }

  friend Tensor2 operator+(Tensor2 a, const Tensor2& b) { return a += b; }
  friend Tensor2 operator-(Tensor2 a, const Tensor2& b) { return a -= b; }
  friend Tensor2 operator*(Tensor2 a, double s) { return a *= s; }
  friend Tensor2 operator*(double s, Tensor2 a) { return a *= s; }

  bool finite() const {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (!std::isfinite(v[i][j])) return false;
    return true;
  }
};

/// Dense fourth-order tensor in dimension 2, indexed C(i,j,k,l).
struct Tensor4 {
  double v[2][2][2][2] = {};

  double& operator()(int i, int j, int k, int l) { return v[i][j][k][l]; }
  double operator()(int i, int j, int k, int l) const { return v[i][j][k][l]; }

  /// Fourth-order identity I_ijkl = delta_ik delta_jl.
  static Tensor4 identity() {
    Tensor4 c;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) c.v[i][j][i][j] = 1.0;
    return c;
  }

  static Tensor4 zero() { return Tensor4{}; }

  Tensor4& operator+=(const Tensor4& o) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) v[i][j][k][l] += o.v[i][j][k][l];
    return *this;
  }

  Tensor4& operator-=(const Tensor4& o) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) v[i][j][k][l] -= o.v[i][j][k][l];
    return *this;
  }

  Tensor4& operator*=(double s) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) v[i][j][k][l] *= s;
    return *this;
  }

  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
  friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
  friend Tensor4 operator*(Tensor4 a, double s) { return a *= s; }
  friend Tensor4 operator*(double s, Tensor4 a) { return a *= s; }
};

inline double det2(const Tensor2& t) {
  return t.v[0][0] * t.v[1][1] - t.v[0][1] * t.v[1][0];
}

inline Tensor2 inv2(const Tensor2& t) {
  const double d = det2(t);
  if (std::abs(d) <= 1e-12) {
    throw SingularTensor("inv2: |det| <= 1e-12");
  }
  Tensor2 r;
  r.v[0][0] = t.v[1][1] / d;
  r.v[0][1] = -t.v[0][1] / d;
  r.v[1][0] = -t.v[1][0] / d;
  r.v[1][1] = t.v[0][0] / d;
  return r;
}

inline Tensor2 transpose(const Tensor2& t) {
  Tensor2 r;
  r.v[0][0] = t.v[0][0];
  r.v[0][1] = t.v[1][0];
  r.v[1][0] = t.v[0][1];
  r.v[1][1] = t.v[1][1];
  return r;
}

/// Matrix product (a.b)_ij = a_ik b_kj.
inline Tensor2 dot22(const Tensor2& a, const Tensor2& b) {
  Tensor2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      r.v[i][j] = a.v[i][0] * b.v[0][j] + a.v[i][1] * b.v[1][j];
  return r;
}

/// Double contraction a : b = a_ij b_ij.
inline double ddot22(const Tensor2& a, const Tensor2& b) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += a.v[i][j] * b.v[i][j];
  return s;
}

/// Double contraction (c : t)_ij = c_ijkl t_kl.
inline Tensor2 ddot42(const Tensor4& c, const Tensor2& t) {
  Tensor2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) s += c.v[i][j][k][l] * t.v[k][l];
      r.v[i][j] = s;
    }
  return r;
}

inline double norm2(const Tensor2& t) { return std::sqrt(ddot22(t, t)); }

inline double max_abs(const Tensor2& t) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m = std::max(m, std::abs(t.v[i][j]));
  return m;
}

inline double max_abs(const Tensor4& c) {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) m = std::max(m, std::abs(c.v[i][j][k][l]));
  return m;
}

inline FlatVec4 flatten(const Tensor2& t) {
  return {t.v[0][0], t.v[0][1], t.v[1][0], t.v[1][1]};
}

inline Tensor2 unflatten(const FlatVec4& f) {
  Tensor2 t;
  t.v[0][0] = f[0];
  t.v[0][1] = f[1];
  t.v[1][0] = f[2];
  t.v[1][1] = f[3];
  return t;
}

inline double det2(const FlatVec4& f) { return f[0] * f[3] - f[1] * f[2]; }

}  // namespace homog

#endif
