#include <doctest.h>

#include <cmath>

#include "homog/rng.hpp"
#include "homog/tensor.hpp"

using namespace homog;

namespace {

Tensor2 make(double a, double b, double c, double d) {
  return unflatten({a, b, c, d});
}

Tensor2 random_tensor(Rng& rng, double lo = -2.0, double hi = 2.0) {
  return make(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi),
              rng.uniform(lo, hi));
}

}  // namespace

TEST_CASE("det2") {
  CHECK(det2(Tensor2::identity()) == doctest::Approx(1.0));
  CHECK(det2(Tensor2::diag(2.0, 1.0)) == doctest::Approx(2.0));
  CHECK(det2(make(0.8, 0.5, 0.5, 0.8)) == doctest::Approx(0.39));
}

TEST_CASE("inv2 basics") {
  const Tensor2 I = Tensor2::identity();
  CHECK(max_abs(inv2(I) - I) == 0.0);
  const Tensor2 d = inv2(Tensor2::diag(2.0, 4.0));
  CHECK(d(0, 0) == doctest::Approx(0.5));
  CHECK(d(1, 1) == doctest::Approx(0.25));
  const Tensor2 shear = inv2(make(1.0, 0.3, 0.0, 1.0));
  CHECK(shear(0, 1) == doctest::Approx(-0.3));
  CHECK(shear(0, 0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(inv2(make(1.0, 2.0, 0.5, 1.0)), SingularTensor);
}

TEST_CASE("inv2 post-condition and involution") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor2 t = random_tensor(rng);
    if (std::abs(det2(t)) < 0.2) continue;  // keep it well-conditioned
    const Tensor2 prod = dot22(t, inv2(t));
    CHECK(max_abs(prod - Tensor2::identity()) < 1e-14 * (1.0 + max_abs(t)));
    const Tensor2 twice = inv2(inv2(t));
    CHECK(max_abs(twice - t) < 1e-12 * max_abs(t));
  }
}

TEST_CASE("ddot42 identity, zero and hand case") {
  Rng rng(7);
  const Tensor2 t = random_tensor(rng);
  CHECK(max_abs(ddot42(Tensor4::identity(), t) - t) == 0.0);
  CHECK(max_abs(ddot42(Tensor4::zero(), t)) == 0.0);

  Tensor4 c;
  c(0, 0, 0, 0) = 5.0;
  const Tensor2 r = ddot42(c, Tensor2::identity());
  CHECK(r(0, 0) == doctest::Approx(5.0));
  CHECK(r(0, 1) == 0.0);
  CHECK(r(1, 0) == 0.0);
  CHECK(r(1, 1) == 0.0);
}

TEST_CASE("ddot42 is bilinear") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor4 c;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) c(i, j, k, l) = rng.uniform(-1.0, 1.0);
    const Tensor2 a = random_tensor(rng), b = random_tensor(rng);
    const double alpha = rng.uniform(-2.0, 2.0);

    const Tensor2 lhs = ddot42(c, a + alpha * b);
    const Tensor2 rhs = ddot42(c, a) + alpha * ddot42(c, b);
    CHECK(max_abs(lhs - rhs) < 1e-13 * (1.0 + max_abs(lhs)));
  }
}

TEST_CASE("flatten/unflatten round-trips exactly") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor2 t = random_tensor(rng, -1e6, 1e6);
    const Tensor2 back = unflatten(flatten(t));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(back(i, j) == t(i, j));
  }
  const FlatVec4 f = {1.0, 2.0, 3.0, 4.0};
  const Tensor2 t = unflatten(f);
  CHECK(t(0, 0) == 1.0);
  CHECK(t(0, 1) == 2.0);
  CHECK(t(1, 0) == 3.0);
  CHECK(t(1, 1) == 4.0);
}
