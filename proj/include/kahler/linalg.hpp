#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace kahler {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Base for failures the CLI maps to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : NumericalError {
  using NumericalError::NumericalError;
};
struct NotSelfAdjoint : NumericalError {
  using NumericalError::NumericalError;
};

// Dense positive-definite Hermitian matrix with a lazily computed inverse.
class HermitianForm {
 public:
  HermitianForm() = default;
  explicit HermitianForm(CMat entries, double tol = 1e-10);

  static HermitianForm identity(int n);
  static HermitianForm diagonal(const RVec& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMat& entries() const { return m_; }
  cplx operator()(int a, int b) const { return m_(a, b); }
  const CMat& inverse_entries() const;

 private:
  CMat m_;
  mutable std::optional<CMat> inv_;
};

// Lower-triangular L with M = L L^H; throws NotPositiveDefinite on a non-positive pivot.
CMat cholesky(const CMat& m);

HermitianForm invert(const HermitianForm& form);

// D(z) = sum G^{ab} z_a conj(z_b) for the inverse form G^{-1}.
double eval_D(const HermitianForm& inverse, const CVec& z);

struct EigenDecomposition {
  RVec values;   // sorted by |value|, descending
  CMat vectors;  // columns
};

// Cyclic Jacobi with a fixed sweep order.
EigenDecomposition symmetric_eigen(const CMat& m, double sym_tol = 1e-10);
EigenDecomposition symmetric_eigen(const RMat& m, double sym_tol = 1e-10);

// Principal square root and inverse square root of a PD Hermitian matrix.
CMat hermitian_sqrt(const CMat& m);
CMat hermitian_inv_sqrt(const CMat& m);

double hermitian_deviation(const CMat& m);

}  // namespace kahler
