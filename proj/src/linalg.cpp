#include "kahler/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace kahler {

double hermitian_deviation(const CMat& m) {
  double scale = std::max(m.norm(), 1e-300);
  return (m - m.adjoint()).norm() / scale;
}

HermitianForm::HermitianForm(CMat entries, double tol) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) throw NotSelfAdjoint("form must be square and non-empty");
  if (hermitian_deviation(m_) > tol) throw NotSelfAdjoint("form is not Hermitian");
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
}

HermitianForm HermitianForm::identity(int n) { return HermitianForm(CMat::Identity(n, n)); }

HermitianForm HermitianForm::diagonal(const RVec& d) {
  return HermitianForm(d.cast<cplx>().asDiagonal().toDenseMatrix());
}

const CMat& HermitianForm::inverse_entries() const {
  if (!inv_) inv_ = invert(*this).entries();
  return *inv_;
}

CMat cholesky(const CMat& m) {
  const int n = static_cast<int>(m.rows());
  CMat l = CMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) throw NotPositiveDefinite("non-positive pivot at row " + std::to_string(j));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      cplx s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

HermitianForm invert(const HermitianForm& form) {
  const int n = form.dim();
  CMat l = cholesky(form.entries());
  // Solve L Y = I, then L^H X = Y.
  CMat y = CMat::Identity(n, n);
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < n; ++i) {
      cplx s = y(i, c);
      for (int k = 0; k < i; ++k) s -= l(i, k) * y(k, c);
      y(i, c) = s / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      cplx s = y(i, c);
      for (int k = i + 1; k < n; ++k) s -= std::conj(l(k, i)) * y(k, c);
      y(i, c) = s / l(i, i);
    }
  }
  return HermitianForm(0.5 * (y + y.adjoint()), 1e-6);
}

double eval_D(const HermitianForm& inverse, const CVec& z) {
  return (z.adjoint() * inverse.entries().transpose() * z)(0, 0).real();
}

namespace {

EigenDecomposition jacobi(CMat a) {
  const int n = static_cast<int>(a.rows());
  CMat v = CMat::Identity(n, n);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (int p = 0; p < n; ++p) {
      diag += std::norm(a(p, p));
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    }
    if (off <= eps * eps * std::max(diag, 1e-300)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq_abs = std::abs(a(p, q));
        if (apq_abs == 0.0) continue;
        const cplx phase = a(p, q) / apq_abs;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * apq_abs);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
        const cplx upp = c, upq = s, uqp = -s * std::conj(phase), uqq = c * std::conj(phase);
        for (int k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (int k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (int k = 0; k < n; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(a(i, i).real()) > std::abs(a(j, j).real());
  });
  EigenDecomposition out{RVec(n), CMat(n, n)};
  for (int i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]).real();
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

}  // namespace

EigenDecomposition symmetric_eigen(const CMat& m, double sym_tol) {
  if (m.rows() != m.cols()) throw NotSelfAdjoint("matrix is not square");
  if (hermitian_deviation(m) > sym_tol) throw NotSelfAdjoint("matrix is not self-adjoint");
  return jacobi(0.5 * (m + m.adjoint()));
}

EigenDecomposition symmetric_eigen(const RMat& m, double sym_tol) {
  return symmetric_eigen(CMat(m.cast<cplx>()), sym_tol);
}

namespace {
CMat spectral_power(const CMat& m, double power) {
  EigenDecomposition e = symmetric_eigen(m, 1e-8);
  for (int i = 0; i < e.values.size(); ++i)
    if (!(e.values(i) > 0)) throw NotPositiveDefinite("matrix power of a non-PD matrix");
  RVec d = e.values.array().pow(power);
  CMat r = e.vectors * d.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  return 0.5 * (r + r.adjoint());
}
}  // namespace

CMat hermitian_sqrt(const CMat& m) { return spectral_power(m, 0.5); }
CMat hermitian_inv_sqrt(const CMat& m) { return spectral_power(m, -0.5); }

}  // namespace kahler
