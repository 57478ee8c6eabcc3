#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "rep/analysis.hpp"
#include "rep/dynamics.hpp"
#include "rep/oracle.hpp"

using namespace rep;
using oracle::ExampleFamily;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("default family reproduces its initial data") {
  ExampleFamily fam(4.0, 1.0, -1.0, 1.0);
  CHECK(fam.rho0() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fam.p() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fam.tB() == doctest::Approx(kPi / 2).epsilon(1e-15));

  const auto v0 = fam.eval(0.0);
  CHECK(v0.lambda1 == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(v0.lambda4 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v0.rho == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v0.u1u4 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("closed forms at t = pi/4") {
  ExampleFamily fam(4.0, 1.0, -1.0, 1.0);
  const auto v = fam.eval(kPi / 4);
  CHECK(v.lambda1 == doctest::Approx(-3.0).epsilon(1e-13));
  CHECK(v.lambda4 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(v.rho == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(v.u1u4 == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("second-order pole limits near tB") {
  ExampleFamily fam(4.0, 1.0, -1.0, 1.0);
  // (tB-t)^2 lambda1 -> -1 and (tB-t)^4 rho -> 1 for this family
  for (double tau : {1e-4, 1e-5, 1e-6}) {
    const auto v = fam.eval(fam.tB() - tau);
    CHECK(tau * tau * v.lambda1 == doctest::Approx(-1.0).epsilon(20 * tau));
    CHECK(tau * tau * tau * tau * v.rho == doctest::Approx(1.0).epsilon(20 * tau));
  }
}

TEST_CASE("tB formula") {
  CHECK(oracle::example_tB(4.0, 1.0, -1.0, 1.0) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(oracle::example_tB(4.0, 1.0, -1.0, 3.0) ==
        doctest::Approx(3.0 * kPi / 4).epsilon(1e-15));
  CHECK_THROWS_AS(ExampleFamily(4.0, 1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(ExampleFamily(4.0, 1.0, -1.0, 1.0).eval(2.0), Error);
}

TEST_CASE("family tB always dominates the arctan lower bound") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const double k = rep::testutil::uni(rng, 0.2, 5.0);
    const double c_b = rep::testutil::uni(rng, 0.2, 5.0);
    const double l1 = rep::testutil::uni(rng, -4.0, 2.0);
    const double l4 = l1 + rep::testutil::uni(rng, 0.1, 4.0);
    ExampleFamily fam(k, c_b, l1, l4);
    const double bound = analysis::lower_bound_tB(fam.params(), l1);
    CHECK(fam.tB() >= bound - 1e-12);
  }
}

TEST_CASE("closed form satisfies the lambda-space equations") {
  ExampleFamily fam(4.0, 1.0, -1.0, 1.0);
  const REPParams params = fam.params();
  // centered finite differences of lambda match the right-hand side to O(h^2)
  for (double t : {0.3, 0.9, 1.2}) {
    double err_prev = 0.0;
    for (double h : {1e-4, 5e-5}) {
      const auto vm = fam.eval(t - h);
      const auto vp = fam.eval(t + h);
      const auto v = fam.eval(t);
      LambdaState state{t, {v.lambda1, v.lambda1, v.lambda4, v.lambda4}, v.rho};
      const auto d = lambda_rhs(state, params);
      const double fd1 = (vp.lambda1 - vm.lambda1) / (2 * h);
      const double fd4 = (vp.lambda4 - vm.lambda4) / (2 * h);
      const double err = std::max(std::abs(fd1 - d.dlambda[0]), std::abs(fd4 - d.dlambda[3]));
      if (err_prev > 0.0) {
        const double order = std::log2(err_prev / err);
        CHECK(order >= 1.9);
      }
      err_prev = err;
    }
  }
}

TEST_CASE("rho equals rho0 over the product of u") {
  ExampleFamily fam(4.0, 1.0, -1.0, 3.0);
  for (double frac : {0.1, 0.5, 0.9}) {
    const double t = frac * fam.tB();
    const auto v = fam.eval(t);
    // u1 = u2 and u3 = u4 for this family, so prod(u) = (u1 u4)^2
    const double prod = v.u1u4 * v.u1u4;
    CHECK(v.rho == doctest::Approx(fam.rho0() / prod).epsilon(1e-12));
  }
}

TEST_CASE("individual u values match the aggregate closed forms") {
  ExampleFamily fam(2.0, 1.5, -1.0, 2.0);
  for (double frac : {0.05, 0.4, 0.8}) {
    const double t = frac * fam.tB();
    const auto v = fam.eval(t);
    const auto u = fam.eval_u(t);
    CHECK(u.u1 * u.u4 == doctest::Approx(v.u1u4).epsilon(1e-12));
    CHECK(u.v1 / u.u1 == doctest::Approx(v.lambda1).epsilon(1e-12));
    CHECK(u.v4 / u.u4 == doctest::Approx(v.lambda4).epsilon(1e-12));
    // Abel pairing across the extreme pair
    CHECK(u.v1 * u.u4 - u.u1 * u.v4 ==
          doctest::Approx(fam.lambda10() - fam.lambda40()).epsilon(1e-12));
  }
}

TEST_CASE("family always sits exactly on the A0 = k rho0 surface") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const double k = rep::testutil::uni(rng, 0.2, 5.0);
    const double c_b = rep::testutil::uni(rng, 0.2, 5.0);
    const double l1 = rep::testutil::uni(rng, -4.0, 1.0);
    const double l4 = l1 + rep::testutil::uni(rng, 0.1, 4.0);
    ExampleFamily fam(k, c_b, l1, l4);
    auto [params, init] = validate(4, k, c_b, fam.rho0(), {l1, l1, l4, l4});
    const auto cls = classify(params, init);
    CHECK(cls.caseLabel == CaseLabel::IIc);
  }
}
