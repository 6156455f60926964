#pragma once

#include <array>
#include <string>
#include <vector>

#include "kahler/linalg.hpp"

namespace kahler {

struct NotInvariant : NumericalError {
  using NumericalError::NumericalError;
};
struct SchemeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class SchemeKind { CP1Diag, K3k3, K3k6, K3k9 };

struct Scheme {
  SchemeKind kind = SchemeKind::K3k3;
  int k = 3;

  static Scheme cp1(int k) { return {SchemeKind::CP1Diag, k}; }
  static Scheme k3(int k);
  bool is_k3() const { return kind != SchemeKind::CP1Diag; }
  std::string name() const;
  bool operator==(const Scheme&) const = default;
};

// x^p y^q (times w when odd). On CP1 only p is used.
struct Monomial {
  int p = 0;
  int q = 0;
  bool odd = false;
};

// Big triangle x^p y^q (p+q <= k) in lexicographic order, then w x^p y^q (p+q <= k-3).
struct SectionBasis {
  int k = 0;
  int n_big = 0;
  std::vector<Monomial> mons;

  int size() const { return static_cast<int>(mons.size()); }
  int index_of(int p, int q, bool odd) const;
  // Exponent of the third homogeneous coordinate.
  int r_of(const Monomial& m) const { return (m.odd ? k - 3 : k) - m.p - m.q; }
};

SectionBasis k3_basis(int k);
int k3_dim(int k);

// One real parameter: a set of unordered index pairs (a <= b) sharing the value.
struct ParamClass {
  std::string name;
  bool diagonal = true;
  std::vector<std::array<int, 2>> entries;
  std::array<int, 3> exponents{};  // sorted exponent triple for diagonal classes
};

struct ClassTable {
  Scheme scheme;
  SectionBasis basis;
  std::vector<ParamClass> classes;
  std::vector<int> class_of_diag;  // basis index -> diagonal class index

  int size() const { return static_cast<int>(classes.size()); }
  int find(const std::string& name) const;
};

const ClassTable& class_table(const Scheme& s);

struct InvariantParams {
  Scheme scheme;
  RVec values;

  InvariantParams() = default;
  InvariantParams(Scheme s, RVec v);
  static InvariantParams ones(const Scheme& s);  // diagonal classes 1, off-diagonal 0
  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values(i); }
};

// Full G^{-1} in the monomial basis.
HermitianForm expand_params(const InvariantParams& p);
CMat expand_values(const ClassTable& t, const RVec& values);

// Class averages of M; throws NotInvariant when the remainder exceeds tau_sym relative.
InvariantParams contract_params(const CMat& m, const Scheme& s, double tau_sym = 1e-6);
// Projection without the invariance check; deviation is reported through the pointer.
InvariantParams project_params(const CMat& m, const Scheme& s, double* deviation = nullptr);

// Rescale so the product of diagonal-class entries is 1.
InvariantParams normalize_product(const InvariantParams& p);
// Rescale so the diagonal-class entries sum to target.
InvariantParams normalize_sum(const InvariantParams& p, double target);

// min over s > 0 of max_i |p_i - s q_i| / |p_i|.
double projective_distance(const RVec& p, const RVec& q);
double projective_distance(const InvariantParams& p, const InvariantParams& q);

// Unitary matrices of the group generators acting on the section basis. Conjugation is
// antilinear and handled separately (invariant matrices are real).
std::vector<CMat> gamma_generators(const SectionBasis& b);
double gamma_deviation(const CMat& m, const SectionBasis& b);

}  // namespace kahler
