#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "kahler/quadrature.hpp"
#include "kahler/reduce.hpp"

using namespace kahler;

TEST_CASE("Gauss-Legendre on [0,1] is exact to degree 2n-1") {
  std::vector<double> x, w;
  gauss_legendre01(6, x, w);
  for (int d = 0; d <= 11; ++d) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], d);
    CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
  }
}

TEST_CASE("round sphere rule moments") {
  const QuadratureRule r = round_sphere_rule(400);
  CHECK(r.size() == 400u * kSphereAngles);
  CHECK(r.total_mass == doctest::Approx(4 * M_PI).epsilon(1e-14));
  // u = |x|^2 / (1 + |x|^2) is uniform under the round area form.
  auto u = [](const QuadPoint& q) { return std::norm(q.a) / (1.0 + std::norm(q.a)); };
  CHECK(integrate_scalar(r, u) == doctest::Approx(2 * M_PI).epsilon(1e-12));
  CHECK(integrate_scalar(r, [&](const QuadPoint& q) { return u(q) * u(q); }) ==
        doctest::Approx(4 * M_PI / 3).epsilon(1e-5));
  // Angular moments vanish.
  CHECK(std::abs(integrate_scalar(r, [](const QuadPoint& q) { return (q.a * q.a / (1.0 + std::norm(q.a))).real(); })) <
        1e-12);
}

TEST_CASE("parallel and serial integration agree and do not depend on thread count") {
  const QuadratureRule r = round_sphere_rule(3000);
  auto f = [](const QuadPoint& q) { return std::cos(q.a.real()) / (1.0 + std::norm(q.a)); };
  const double serial = integrate_scalar_serial(r, f);
  set_threads(1);
  const double one = integrate_scalar(r, f);
  set_threads(3);
  const double three = integrate_scalar(r, f);
  set_threads(0);
  CHECK(one == three);
  CHECK(one == doctest::Approx(serial).epsilon(1e-13));

  const CMat h = integrate_hermitian(r, 2, [](const QuadPoint& q) {
    CVec s(2);
    s << 1.0, q.a;
    return CMat(s * s.adjoint() / (1.0 + std::norm(q.a)));
  });
  CHECK(std::abs(h(0, 1)) < 1e-12);
  CHECK(h(0, 0).real() + h(1, 1).real() == doctest::Approx(4 * M_PI).epsilon(1e-12));
}

TEST_CASE("evaluation failures carry the point") {
  const QuadratureRule r = round_sphere_rule(10);
  try {
    integrate_scalar(r, [](const QuadPoint& q) -> double {
      if (q.weight > 0) throw EvaluationFailure("boom", q);
      return 0.0;
    });
    FAIL("no exception");
  } catch (const EvaluationFailure& e) {
    CHECK(e.point.weight > 0);
  }
}

TEST_CASE("rule cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "kahler_rule_cache_test";
  std::filesystem::remove_all(dir);
  int builds = 0;
  auto build = [&] {
    ++builds;
    return round_sphere_rule(12);
  };
  const QuadratureRule a = cached_rule(dir.string(), "sphere/12", build);
  const QuadratureRule b = cached_rule(dir.string(), "sphere/12", build);
  CHECK(builds == 1);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.points[i].a == b.points[i].a);
    CHECK(a.points[i].weight == b.points[i].weight);
    CHECK(a.points[i].chart == b.points[i].chart);
  }
  CHECK(b.total_mass == a.total_mass);
  CHECK(b.label == a.label);
  const auto junk = dir / "junk.qr";
  std::FILE* f = std::fopen(junk.string().c_str(), "wb");
  std::fputs("nonsense", f);
  std::fclose(f);
  CHECK_THROWS(load_rule(junk.string()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("block reduction matches the serial sum") {
  auto term = [](std::size_t i, double& acc) { acc += 1.0 / (1.0 + static_cast<double>(i)); };
  const double b = block_reduce(100000, 0.0, term);
  const double s = serial_reduce(100000, 0.0, term);
  CHECK(b == doctest::Approx(s).epsilon(1e-13));
  CHECK(block_reduce(0, 2.5, term) == 2.5);
}
