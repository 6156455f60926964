#include <doctest.h>

#include <cmath>

#include "kahler/cp1.hpp"
#include "kahler/quadrature.hpp"

using namespace kahler;

namespace {

// Independent oracle for the Fubini-Study T-step integrals: midpoint rule in u with the density
// k + g'(u) computed by central differences of g = u (1 - u) D~'/D~.
RVec hilb_fs_oracle(const DiagMetric& m, int cells) {
  const int k = m.k;
  auto dt = [&](double u) {
    double s = 0.0;
    for (int q = 0; q <= k; ++q) s += m.a(q) * std::pow(u, q) * std::pow(1 - u, k - q);
    return s;
  };
  auto g = [&](double u) {
    const double h = 1e-6;
    return u * (1 - u) * (std::log(dt(u + h)) - std::log(dt(u - h))) / (2 * h);
  };
  RVec t = RVec::Zero(k + 1);
  const double du = 1.0 / cells;
  for (int c = 0; c < cells; ++c) {
    const double u = (c + 0.5) * du;
    const double h = 1e-4;
    const double dens = k + (g(u + h) - g(u - h)) / (2 * h);
    for (int p = 0; p <= k; ++p) t(p) += du * dens * std::pow(u, p) * std::pow(1 - u, k - p) / dt(u);
  }
  return t * (k + 1) / k;
}

DiagMetric sample(int k) {
  RVec a(k + 1);
  for (int p = 0; p <= k; ++p) a(p) = binomial(k, p) * (1.0 + 0.3 * std::sin(1.0 + p));
  return DiagMetric(k, a);
}

}  // namespace

TEST_CASE("T-step integrals against a finite-difference oracle") {
  for (int k : {2, 5, 6}) {
    const DiagMetric m = sample(k);
    const RVec t = hilb_fs(m, 256);
    const RVec o = hilb_fs_oracle(m, 20000);
    for (int p = 0; p <= k; ++p) CHECK(t(p) == doctest::Approx(o(p)).epsilon(1e-5));
    CHECK(m.a.dot(t) == doctest::Approx(k + 1).epsilon(1e-12));
  }
}

TEST_CASE("round metric is fixed by every toy map") {
  for (int k : {2, 4, 6}) {
    const DiagMetric r = normalize_toy(DiagMetric::round(k));
    for (ToyVariant v : {ToyVariant::T, ToyVariant::TNu, ToyVariant::TK}) {
      const DiagMetric n = toy_iterates(v, r, 1).back();
      CHECK((n.a - r.a).norm() < 1e-10 * r.a.norm());
    }
  }
  CHECK(normalize_toy(DiagMetric::round(6)).a.sum() == doctest::Approx(64.0));
}

TEST_CASE("round-density radial reduction matches the sphere quadrature") {
  const DiagMetric m = sample(6);
  const RVec a = hilb_round(m, 256);
  const RVec b = hilb_nu(m, round_sphere_rule(400));
  for (int p = 0; p <= 6; ++p) CHECK(a(p) == doctest::Approx(b(p)).epsilon(1e-4));
}

TEST_CASE("canonical step needs k = -2p") {
  const DiagMetric m = sample(2);
  const RVec a = hilb_canonical(m, -1, 256);
  CHECK(m.a.dot(a) == doctest::Approx(3.0).epsilon(1e-12));
  // Same integrals on the sphere rule, reweighted from the round form to D^{-1} dA.
  const QuadratureRule r = round_sphere_rule(2000);
  RVec t = RVec::Zero(3);
  double mass = 0.0;
  for (const QuadPoint& q : r.points) {
    const double rho = std::norm(q.a);
    const double d = m.a(0) + m.a(1) * rho + m.a(2) * rho * rho;
    const double c = q.weight * (1 + rho) * (1 + rho) / 4 / d;
    mass += c;
    for (int p = 0; p <= 2; ++p) t(p) += c * std::pow(rho, p) / d;
  }
  t *= 3.0 / mass;
  for (int p = 0; p <= 2; ++p) CHECK(a(p) == doctest::Approx(t(p)).epsilon(1e-4));
  CHECK_THROWS_AS(hilb_canonical(sample(3), -1, 64), ExponentMismatch);
}

TEST_CASE("tau closed form") {
  CHECK(tau_closed_form(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double s : {0.3, 0.9995, 1.0005, 1.2, 2.0, 5.0}) {
    RVec a(3);
    a << 0.5, s, 0.5;
    const DiagMetric n = t_step_fs(DiagMetric(2, a, true), 512);
    CHECK(tau_closed_form(s) == doctest::Approx(n.a(1) / (2 * n.a(0))).epsilon(1e-8));
  }
}

TEST_CASE("Q matrix on CP1 has eigenvalues chi") {
  for (int k = 1; k <= 12; ++k) {
    const RMat q = q_matrix_cp1(k);
    Eigen::SelfAdjointEigenSolver<RMat> es(q);
    std::vector<double> want;
    for (int m = 0; m <= k; ++m) want.push_back(chi(m, k));
    std::sort(want.begin(), want.end());
    for (int i = 0; i <= k; ++i) CHECK(std::abs(es.eigenvalues()(i) - want[i]) < 1e-12);
  }
  CHECK(chi(2, 6) == doctest::Approx(5.0 / 12.0));
  CHECK(chi(0, 6) == doctest::Approx(1.0));
}

TEST_CASE("toy T_nu rate equals chi_{2,6}") {
  RVec half(4);
  half << 0.018, 0.5, 4.5, 54;
  const auto it = toy_iterates(ToyVariant::TNu, normalize_toy(DiagMetric::symmetric_completion(6, half)), 12);
  const RVec d1 = it[11].a - it[10].a, d2 = it[12].a - it[11].a;
  CHECK(d2.norm() / d1.norm() == doctest::Approx(5.0 / 12.0).epsilon(1e-3));
}

TEST_CASE("lambda_{m,k} decreases to 2m(m+1) with an O(k^-2) gap") {
  for (int m = 1; m <= 4; ++m) {
    const double lim = 2.0 * m * (m + 1);
    double prev = INFINITY;
    for (int k = m; k <= 50; ++k) {
      const double l = lambda_mk(m, k);
      CHECK(l < prev);
      CHECK(l > lim);
      const double kp = k + 1.0;
      if (k >= 2 * m + 1) CHECK((l - lim) * kp * kp < std::pow(m * (m + 1.0), 2));
      prev = l;
    }
  }
  CHECK(lambda_mk(0, 7) == 0.0);
}
