#pragma once

#include "kahler/linalg.hpp"
#include "kahler/quadrature.hpp"

#include <vector>

namespace kahler {

struct QuadratureFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct ExponentMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// S1-invariant metric on H0(O(k)) over CP1: a_p are the diagonal entries of G^{-1},
// D = sum a_p |x|^{2p}.
struct DiagMetric {
  int k = 0;
  RVec a;
  bool symmetric = false;  // a_p = a_{k-p}

  DiagMetric() = default;
  DiagMetric(int k, RVec a, bool symmetric = false);
  static DiagMetric round(int k);
  // Entries a_0..a_{floor(k/2)} extended by a_p = a_{k-p}.
  static DiagMetric symmetric_completion(int k, const RVec& half);
  RVec half() const { return a.head(k / 2 + 1); }
};

// Tables keep sum a_p = 2^k, the value at the round metric.
DiagMetric normalize_toy(const DiagMetric& m);

// Diagonal of T(G) before inversion; sum a_p T_p = k + 1.
RVec hilb_fs(const DiagMetric& m, int resolution);
RVec hilb_nu(const DiagMetric& m, const QuadratureRule& rule);
RVec hilb_canonical(const DiagMetric& m, int p_exponent, int resolution);
// hilb_nu for the round area form, by the same radial reduction.
RVec hilb_round(const DiagMetric& m, int resolution);

DiagMetric t_step_fs(const DiagMetric& m, int resolution);
DiagMetric t_nu_step(const DiagMetric& m, const QuadratureRule& rule);
DiagMetric t_canonical_step(const DiagMetric& m, int p_exponent, int resolution);

enum class ToyVariant { T, TNu, TK };

// Iterates 0..steps of one of the three toy maps; T_nu uses the round area form.
std::vector<DiagMetric> toy_iterates(ToyVariant v, const DiagMetric& start, int steps, int resolution = 256);

// The k = 2 slice a = (1/2, s, 1/2) of the T map: s -> tau(s).
double tau_closed_form(double s);

RMat q_matrix_cp1(int k);
double chi(int m, int k);
double lambda_mk(int m, int k);
double binomial(int n, int r);

}  // namespace kahler
