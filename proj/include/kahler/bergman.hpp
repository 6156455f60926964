#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kahler/iteration.hpp"
#include "kahler/params.hpp"

namespace kahler {

struct DegreeOverflow : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// s_a s_b = sum_i P_{ab i} tau_i with tau the monomial basis of degree 2k. Products of two odd
// sections use w^2 = x^6 + y^6 + z^6.
struct ProductMap {
  Scheme scheme;
  SectionBasis basis;   // degree k
  SectionBasis target;  // degree 2k
  std::vector<std::vector<std::pair<int, double>>> terms;  // index a * n + b

  int n() const { return basis.size(); }
  int n2() const { return target.size(); }
  const std::vector<std::pair<int, double>>& product(int a, int b) const { return terms[a * n() + b]; }
};

ProductMap product_map(int k);  // K3
ProductMap product_map_cp1(int k);
ProductMap product_map(const Scheme& s);

// Dual of the quotient metric on degree-2k sections: G'^{-1} = P (G^{-1} (x) G^{-1}) P^*.
// With this, D'(z) = D(z)^2 pointwise.
CMat induced_square_metric_inverse(const CMat& ginv, const ProductMap& pm);
// Gram matrix <tau_i, tau_j> of the quotient metric.
CMat induced_square_metric(const CMat& ginv, const ProductMap& pm);

struct InvariantQMatrix {
  Scheme scheme;
  RMat entries;
  std::vector<std::string> basis;  // class name for each row
  std::vector<int> classes;        // class index for each row
  double raw_asymmetry = 0.0;      // relative, before symmetrization
};

// Orthonormal basis of invariant Hermitian matrices (in G-orthonormal section coordinates):
// off-diagonal classes first, then diagonal classes in table order.
std::vector<int> q_basis_order(const Scheme& s);

InvariantQMatrix q_tilde(const InvariantParams& p, const ProductMap& pm);
InvariantQMatrix q_tilde(const InvariantParams& p);
InvariantQMatrix q_direct(const InvariantParams& p, const NuModel& m);

// Coordinates of the constant function 1 in the q basis.
RVec q_identity_vector(const Scheme& s);

struct SpectralReport {
  std::vector<double> chis;  // by decreasing |chi|
  double k_prime = 0.0;
  std::vector<std::optional<double>> lambdas;  // for chi in (0, 1]
  std::vector<bool> negative;
};

SpectralReport laplacian_estimates(const std::vector<double>& chis, int dim, int n);
SpectralReport spectrum(const InvariantQMatrix& q, int n);

}  // namespace kahler
