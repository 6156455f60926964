#include <doctest.h>

#include <random>

#include "kahler/linalg.hpp"

using namespace kahler;

namespace {

CMat random_pd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a * a.adjoint() + CMat::Identity(n, n);
}

}  // namespace

TEST_CASE("cholesky reconstructs and rejects indefinite input") {
  const CMat m = random_pd(7, 1);
  const CMat l = cholesky(m);
  CHECK((l * l.adjoint() - m).norm() < 1e-12 * m.norm());
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j) CHECK(std::abs(l(i, j)) == 0.0);
  CMat bad = m;
  bad(3, 3) = -50.0;
  CHECK_THROWS_AS(cholesky(bad), NotPositiveDefinite);
}

TEST_CASE("hermitian form checks symmetry and inverts") {
  CMat m = random_pd(5, 2);
  const HermitianForm f(m);
  CHECK((f.entries() * f.inverse_entries() - CMat::Identity(5, 5)).norm() < 1e-12);
  const HermitianForm g = invert(f);
  CHECK((g.entries() - f.inverse_entries()).norm() < 1e-14);
  m(0, 1) += cplx(0.0, 1e-3);
  CHECK_THROWS_AS(HermitianForm{m}, NotSelfAdjoint);
}

TEST_CASE("D is the explicit double sum") {
  const CMat m = random_pd(4, 3);
  const HermitianForm f(m);
  CVec z(4);
  z << cplx(1, 2), cplx(-0.5, 0.1), cplx(0, 3), cplx(2, -1);
  cplx s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s += m(a, b) * z(a) * std::conj(z(b));
  CHECK(eval_D(f, z) == doctest::Approx(s.real()).epsilon(1e-13));
  CHECK(std::abs(s.imag()) < 1e-12);
}

TEST_CASE("Jacobi eigensolver agrees with Eigen") {
  const CMat m = random_pd(9, 4) - 4.0 * CMat::Identity(9, 9);
  const EigenDecomposition e = symmetric_eigen(m);
  Eigen::SelfAdjointEigenSolver<CMat> ref(m);
  std::vector<double> want(ref.eigenvalues().data(), ref.eigenvalues().data() + 9);
  std::sort(want.begin(), want.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  for (int i = 0; i < 9; ++i) CHECK(e.values(i) == doctest::Approx(want[i]).epsilon(1e-11));
  CHECK((m * e.vectors - e.vectors * e.values.asDiagonal()).norm() < 1e-10);
  CHECK((e.vectors.adjoint() * e.vectors - CMat::Identity(9, 9)).norm() < 1e-12);

  RMat r = m.real();
  r = 0.5 * (r + r.transpose()).eval();
  const EigenDecomposition er = symmetric_eigen(r);
  CHECK((r * er.vectors.real() - er.vectors.real() * er.values.asDiagonal()).norm() < 1e-10);
  r(0, 1) += 1.0;
  CHECK_THROWS_AS(symmetric_eigen(r), NotSelfAdjoint);
}

TEST_CASE("square roots") {
  const CMat m = random_pd(6, 5);
  const CMat s = hermitian_sqrt(m);
  CHECK((s * s - m).norm() < 1e-11 * m.norm());
  CHECK(hermitian_deviation(s) < 1e-13);
  CHECK((hermitian_inv_sqrt(m) * s - CMat::Identity(6, 6)).norm() < 1e-11);
}
