#include <doctest.h>

#include <random>
#include <set>

#include "kahler/params.hpp"

using namespace kahler;

TEST_CASE("section counts and class counts") {
  CHECK(k3_dim(3) == 11);
  CHECK(k3_dim(6) == 38);
  CHECK(k3_dim(9) == 83);
  CHECK(class_table(Scheme::k3(3)).size() == 4);
  CHECK(class_table(Scheme::k3(6)).size() == 11);
  CHECK(class_table(Scheme::k3(9)).size() == 26);
  CHECK_THROWS(Scheme::k3(4));
  const SectionBasis b = k3_basis(6);
  CHECK(b.n_big == 28);
  for (int i = 0; i < b.size(); ++i) CHECK(b.index_of(b.mons[i].p, b.mons[i].q, b.mons[i].odd) == i);
}

TEST_CASE("classes are disjoint and every expansion is group invariant") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int k : {3, 6, 9}) {
    const ClassTable& t = class_table(Scheme::k3(k));
    std::set<std::array<int, 2>> seen;
    for (const ParamClass& c : t.classes)
      for (auto e : c.entries) {
        CHECK(e[0] <= e[1]);
        CHECK(seen.insert(e).second);
        CHECK((e[0] == e[1]) == c.diagonal);
      }
    RVec v(t.size());
    for (int c = 0; c < t.size(); ++c) v(c) = t.classes[c].diagonal ? u(rng) : 0.05 * u(rng);
    const CMat m = expand_values(t, v);
    CHECK(gamma_deviation(m, t.basis) < 1e-12);
    const InvariantParams back = contract_params(m, t.scheme);
    CHECK((back.values - v).norm() < 1e-13);
  }
}

TEST_CASE("a generic invariant matrix has no entries outside the classes") {
  // Average a random Hermitian matrix over the generators; the result must lie in the class span.
  const ClassTable& t = class_table(Scheme::k3(6));
  const int n = t.basis.size();
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  CMat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  m = (m + m.transpose()).eval();
  const auto gens = gamma_generators(t.basis);
  for (int pass = 0; pass < 400; ++pass)
    for (const CMat& u : gens) m = 0.5 * (m + u * m * u.adjoint());
  m = m.real().cast<cplx>();
  double dev = 0.0;
  const InvariantParams p = project_params(m, t.scheme, &dev);
  CHECK(dev < 1e-8);
  CHECK_THROWS_AS(contract_params(CMat(CMat::Random(n, n)), t.scheme), NotInvariant);
  CHECK(p.size() == t.size());
}

TEST_CASE("projective distance and normalizations") {
  RVec p(3), q(3);
  p << 1.0, 2.0, 3.0;
  q = 7.5 * p;
  CHECK(projective_distance(p, q) < 1e-15);
  q(1) *= 1.01;
  CHECK(projective_distance(p, q) == doctest::Approx(0.01 / 2.01).epsilon(1e-6));
  const InvariantParams a(Scheme::k3(3), RVec::LinSpaced(4, 1.0, 4.0));
  const InvariantParams b = normalize_product(a);
  double prod = 1.0;
  for (int i = 0; i < 4; ++i) prod *= b[i];
  CHECK(prod == doctest::Approx(1.0));
  CHECK(normalize_sum(a, 10.0).values.sum() == doctest::Approx(10.0));
  CHECK(InvariantParams::ones(Scheme::k3(6)).values.sum() > 0);
  CHECK_THROWS_AS(InvariantParams(Scheme::k3(6), RVec::Ones(4)), SchemeMismatch);
}
