#include <doctest.h>

#include <cmath>

#include "kahler/k3.hpp"

using namespace kahler;

namespace {

const QuadratureRule& small_rule() {
  static const QuadratureRule r = build_k3_rule(10, 10, 8, 6);
  return r;
}

InvariantParams generic_params(int k) {
  const ClassTable& t = class_table(Scheme::k3(k));
  RVec v(t.size());
  for (int c = 0; c < t.size(); ++c) v(c) = t.classes[c].diagonal ? 1.0 + 0.37 * std::sin(1.3 * c) : 0.04;
  return InvariantParams(t.scheme, v);
}

double log_D(const HermitianForm& ginv, const SectionBasis& b, const SurfacePoint& pt) {
  CVec s(b.size());
  eval_sections(b, pt, s.data());
  return std::log(eval_D(ginv, s));
}

}  // namespace

TEST_CASE("chart points lie on the surface") {
  for (const SurfacePoint& pt : surface_points(small_rule())) CHECK(surface_residual(pt) < 1e-10);
  const QuadratureRule r = build_k3_rule(20, 20, 14, 10);
  double worst = 0.0;
  for (const SurfacePoint& pt : surface_points(r)) worst = std::max(worst, surface_residual(pt));
  CHECK(worst < 1e-10);
  CHECK_THROWS_AS(big_chart_point(std::polar(1.0, M_PI / 6), 0.3), OutsideDomain);
  CHECK_THROWS_AS(small_chart_point(1.0, 0.0), OutsideDomain);
}

TEST_CASE("holomorphic volume density matches finite-difference Jacobians") {
  const double h = 1e-6;
  for (cplx x : {cplx(0.3, 0.1), cplx(0.9, -0.2)})
    for (cplx p : {cplx(0.2, 0.05), cplx(0.6, 0.3)}) {
      const SurfacePoint pt = big_chart_point(x, p);
      const cplx dy = (big_chart_point(x, p + h).y - big_chart_point(x, p - h).y) / (2 * h);
      CHECK(std::abs(theta_density(pt) - dy / pt.w) < 1e-7 * std::abs(theta_density(pt)));
    }
  for (cplx u : {cplx(0.1, 0.2), cplx(-0.3, 0.4)})
    for (cplx w : {cplx(0.3, -0.2), cplx(0.1, 0.5)}) {
      const SurfacePoint pt = small_chart_point(u, w);
      auto at = [](cplx uu, cplx ww) { return small_chart_point(uu, ww); };
      const cplx xu = (at(u + h, w).x - at(u - h, w).x) / (2 * h), xw = (at(u, w + h).x - at(u, w - h).x) / (2 * h);
      const cplx yu = (at(u + h, w).y - at(u - h, w).y) / (2 * h), yw = (at(u, w + h).y - at(u, w - h).y) / (2 * h);
      const cplx jac = (xu * yw - xw * yu) / pt.w;
      CHECK(std::abs(std::abs(theta_density(pt)) - std::abs(jac)) < 1e-7 * std::abs(jac));
    }
}

TEST_CASE("partition of unity") {
  for (const SurfacePoint& pt : surface_points(small_rule())) {
    const CutoffWeights c = cutoff_weights(pt);
    CHECK(c.big_x + c.big_y + c.small == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c.big_x >= 0.0);
    CHECK(c.small >= 0.0);
  }
  CHECK(smoothstep(0.0) == 0.0);
  CHECK(smoothstep(1.0) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5));
}

TEST_CASE("volume") {
  CHECK(lattice_integral_LI() == doctest::Approx(1.76664).epsilon(1e-5 / 1.76664));
  CHECK(std::abs(analytic_volume() - 263.0) < 0.005);
  const auto a = chart_masses(build_k3_rule(20, 20, 14, 10));
  const auto b = chart_masses(build_k3_rule(28, 28, 20, 14));
  const double ta = a[0] + a[1], tb = b[0] + b[1];
  CHECK(std::abs(ta - tb) < 0.0015 * tb);
  CHECK(std::abs(ta - analytic_volume()) < 0.3);
  CHECK(a[1] > 0.0);
  CHECK_THROWS_AS(build_k3_rule(3, 10, 10, 10), std::invalid_argument);
}

TEST_CASE("group orbit") {
  const InvariantParams p = generic_params(6);
  const HermitianForm g = expand_params(p);
  const SectionBasis b = k3_basis(6);
  const SurfacePoint pt = surface_points(small_rule())[17];
  const auto orbit = gamma_orbit(pt);
  REQUIRE(orbit.size() == 864u);
  auto scaled = [&](const SurfacePoint& q) {
    return log_D(g, b, q) - 6.0 * std::log(std::norm(q.x) + std::norm(q.y) + std::norm(q.z));
  };
  const double ref = scaled(pt);
  for (const SurfacePoint& q : orbit) {
    CHECK(surface_residual(q) < 1e-10);
    CHECK(scaled(q) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("sections are weighted homogeneous") {
  const SurfacePoint pt = big_chart_point(cplx(0.4, 0.2), cplx(0.3, -0.1));
  const cplx lam(0.7, 0.4);
  SurfacePoint q = pt;
  q.x *= lam;
  q.y *= lam;
  q.z *= lam;
  q.w *= lam * lam * lam;
  for (int k : {3, 6, 9}) {
    const SectionBasis b = k3_basis(k);
    CVec s(b.size()), t(b.size());
    eval_sections(b, pt, s.data());
    eval_sections(b, q, t.data());
    CHECK((t - std::pow(lam, k) * s).norm() < 1e-12 * s.norm());
    CHECK((section_jet(pt, k).r - s).norm() < 1e-14 * s.norm());
  }
}

TEST_CASE("section jets against finite differences") {
  const SurfacePoint pt = big_chart_point(cplx(0.5, 0.2), cplx(0.4, 0.1));
  const double h = 1e-6;
  const SectionBasis b = k3_basis(6);
  const SectionJet j = section_jet(pt, 6);
  auto moved = [&](cplx dx, cplx dy, bool follow_w) {
    SurfacePoint q = pt;
    q.x += dx;
    q.y += dy;
    if (follow_w) {
      const cplx w = std::sqrt(std::pow(q.x, 6) + std::pow(q.y, 6) + 1.0);
      q.w = std::abs(w - pt.w) < std::abs(w + pt.w) ? w : -w;
    }
    CVec s(b.size());
    eval_sections(b, q, s.data());
    return s;
  };
  const CVec rx = (moved(h, 0, true) - moved(-h, 0, true)) / (2 * h);
  const CVec ry = (moved(0, h, true) - moved(0, -h, true)) / (2 * h);
  const CVec dx = (moved(h, 0, false) - moved(-h, 0, false)) / (2 * h);
  CHECK((rx - j.r_x).norm() < 1e-7 * j.r_x.norm());
  CHECK((ry - j.r_y).norm() < 1e-7 * j.r_y.norm());
  CHECK((dx - j.delta_x).norm() < 1e-7 * j.delta_x.norm());
}

TEST_CASE("two volume-ratio formulas agree away from the branch curve") {
  for (int k : {3, 6, 9}) {
    const InvariantParams p = generic_params(k);
    const SparseForm g = SparseForm::from_params(p);
    int used = 0;
    for (const SurfacePoint& pt : surface_points(small_rule())) {
      if (std::abs(pt.w) < 0.1) continue;
      const SectionJet j = section_jet(pt, k);
      const double a = fs_volume_ratio_det(g, j), b = fs_volume_ratio_branch(g, j);
      CHECK(std::abs(a - b) < 1e-7 * std::abs(a));
      ++used;
    }
    CHECK(used > 100);
  }
}

TEST_CASE("volume ratio is a constant multiple of det ddbar log D over |theta|^2") {
  // Oracle: the Fubini-Study form i ddbar log D in big-chart coordinates by central differences.
  const InvariantParams p = generic_params(6);
  const HermitianForm ginv = expand_params(p);
  const SectionBasis b = k3_basis(6);
  const double h = 1e-3;
  std::vector<double> ratio;
  for (cplx x0 : {cplx(0.3, 0.1), cplx(0.8, -0.3), cplx(-0.2, 0.6)})
    for (cplx p0 : {cplx(0.2, 0.05), cplx(0.5, 0.4)}) {
      auto f = [&](double a, double bb, double c, double d) {
        return log_D(ginv, b, big_chart_point(x0 + cplx(a, bb), p0 + cplx(c, d)));
      };
      double dd[4][4];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          double e1[4] = {0, 0, 0, 0}, e2[4] = {0, 0, 0, 0};
          e1[i] = h;
          e2[j] = h;
          auto at = [&](double s1, double s2) {
            return f(s1 * e1[0] + s2 * e2[0], s1 * e1[1] + s2 * e2[1], s1 * e1[2] + s2 * e2[2],
                     s1 * e1[3] + s2 * e2[3]);
          };
          dd[i][j] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
        }
      Eigen::Matrix2cd gm;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const int a = 2 * i, c = 2 * j;
          gm(i, j) = 0.25 * cplx(dd[a][c] + dd[a + 1][c + 1], dd[a][c + 1] - dd[a + 1][c]);
        }
      const SurfacePoint pt = big_chart_point(x0, p0);
      ratio.push_back(fs_volume_ratio(ginv, 6, pt) * std::norm(theta_density(pt)) / gm.determinant().real());
    }
  for (double r : ratio) CHECK(r == doctest::Approx(ratio[0]).epsilon(1e-4));
}

TEST_CASE("sparse form") {
  const InvariantParams p = generic_params(6);
  const CMat dense = expand_params(p).entries();
  const SparseForm s = SparseForm::from_params(p);
  const SparseForm t = SparseForm::from_dense(dense, k3_basis(6).n_big);
  CVec u = CVec::LinSpaced(38, cplx(0.1, 0.2), cplx(1.0, -0.5));
  CVec v = CVec::LinSpaced(38, cplx(-0.3, 0.7), cplx(0.4, 0.1));
  cplx want = 0.0;
  for (int a = 0; a < 38; ++a)
    for (int c = 0; c < 38; ++c) want += dense(a, c) * u(a) * std::conj(v(c));
  CHECK(std::abs(s.inner(u.data(), v.data()) - want) < 1e-12 * std::abs(want));
  CHECK(std::abs(t.inner(u.data(), v.data()) - want) < 1e-12 * std::abs(want));
  CHECK(std::abs(s.inner_plus(u.data(), v.data()) + s.inner_minus(u.data() + 28, v.data() + 28) - want) <
        1e-12 * std::abs(want));
  CMat coupled = dense;
  coupled(0, 30) = coupled(30, 0) = 0.1;
  CHECK_THROWS_AS(SparseForm::from_dense(coupled, 28), std::invalid_argument);
}
