#include <doctest.h>

#include <opkr/hilbert.hpp>
#include <opkr/rng.hpp>

using namespace opkr;

namespace {

OutVec random_vec(const SpacePtr& space, Rng& rng) {
  Eigen::VectorXd v(space->dim());
  for (int i = 0; i < space->dim(); ++i) v[i] = rng.normal();
  return OutVec(space, v);
}

}  // namespace

TEST_CASE("finite-dim inner product and norm") {
  auto space = OutputSpace::finite(2);
  const OutVec a(space, Eigen::Vector2d(1, 0));
  const OutVec b(space, Eigen::Vector2d(0, 1));
  CHECK(inner(a, b) == 0.0);

  auto s3 = OutputSpace::finite(3);
  const OutVec v(s3, Eigen::Vector3d(3, 4, 0));
  CHECK(norm(v) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(norm(zero_vec(s3)) == 0.0);
}

TEST_CASE("trapezoidal weights integrate constants exactly") {
  Eigen::VectorXd grid(3);
  grid << 0.0, 0.5, 1.0;
  auto space = OutputSpace::discretized_l2(grid);
  CHECK(space->quad_weights()[0] == doctest::Approx(0.25));
  CHECK(space->quad_weights()[1] == doctest::Approx(0.5));
  CHECK(space->quad_weights()[2] == doctest::Approx(0.25));
  CHECK(space->quad_weights().sum() == doctest::Approx(1.0).epsilon(1e-12));

  const OutVec one(space, Eigen::Vector3d(1, 1, 1));
  CHECK(inner(one, one) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadrature of t^2 on [0,1]") {
  auto space = OutputSpace::uniform_l2(0.0, 1.0, 101);
  const OutVec t(space, space->grid());
  CHECK(inner(t, t) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  CHECK(norm(t) == doctest::Approx(0.57735).epsilon(1e-3));
}

TEST_CASE("axpy") {
  auto space = OutputSpace::finite(2);
  const OutVec a(space, Eigen::Vector2d(1, 1));
  const OutVec b(space, Eigen::Vector2d(3, -1));
  const OutVec z = zero_vec(space);
  CHECK(axpy(0.0, a, b).values == b.values);
  CHECK(axpy(1.0, a, z).values == a.values);
  const OutVec r = axpy(2.0, a, b);
  CHECK(r.values[0] == 5.0);
  CHECK(r.values[1] == 1.0);
}

TEST_CASE("mismatched spaces are rejected") {
  auto s2 = OutputSpace::finite(2);
  auto s3 = OutputSpace::finite(3);
  const OutVec a(s2, Eigen::Vector2d(1, 0));
  const OutVec b(s3, Eigen::Vector3d(0, 1, 0));
  CHECK_THROWS_AS(inner(a, b), DimensionError);
  CHECK_THROWS_AS(axpy(1.0, a, b), DimensionError);
}

TEST_CASE("grid must be strictly increasing") {
  Eigen::VectorXd bad(3);
  bad << 0.0, 0.5, 0.5;
  CHECK_THROWS(OutputSpace::discretized_l2(bad));
}

TEST_CASE("Cauchy-Schwarz and parallelogram law on random pairs") {
  Rng rng(7, "hilbert-props");
  for (const auto& space :
       {OutputSpace::finite(5), OutputSpace::uniform_l2(0.0, 2.0, 33)}) {
    for (int rep = 0; rep < 200; ++rep) {
      const OutVec a = random_vec(space, rng);
      const OutVec b = random_vec(space, rng);
      CHECK(std::abs(inner(a, b)) <= norm(a) * norm(b) + 1e-12);

      const double lhs = std::pow(norm(axpy(1.0, a, b)), 2) +
                         std::pow(norm(axpy(-1.0, b, a)), 2);
      const double rhs = 2 * inner(a, a) + 2 * inner(b, b);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("trapezoid error decays at second order under refinement") {
  // integrand a(t)^2 with a(t) = e^t: exact integral (e^2 - 1) / 2
  auto quad_error = [](int n) {
    auto space = OutputSpace::uniform_l2(0.0, 1.0, n);
    Eigen::VectorXd a = space->grid().array().exp();
    const OutVec v(space, a);
    return std::abs(inner(v, v) - 0.5 * (std::exp(2.0) - 1.0));
  };
  for (int n : {17, 33, 65}) {
    const double coarse = quad_error(n);
    const double fine = quad_error(2 * (n - 1) + 1);
    CHECK(coarse / fine >= 3.0);
  }
}
