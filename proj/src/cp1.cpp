#include "kahler/cp1.hpp"

#include <cmath>
#include <vector>

namespace kahler {

double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  long double v = 1.0L;
  for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return static_cast<double>(v);
}

DiagMetric::DiagMetric(int k_, RVec a_, bool sym) : k(k_), a(std::move(a_)), symmetric(sym) {
  if (k < 1 || a.size() != k + 1) throw std::invalid_argument("DiagMetric needs k + 1 entries");
  for (int p = 0; p <= k; ++p)
    if (!(a(p) > 0)) throw std::invalid_argument("DiagMetric entries must be positive");
  if (symmetric)
    for (int p = 0; p <= k; ++p)
      if (a(p) != a(k - p)) throw std::invalid_argument("DiagMetric flagged symmetric but a_p != a_{k-p}");
}

DiagMetric DiagMetric::round(int k) {
  RVec a(k + 1);
  for (int p = 0; p <= k; ++p) a(p) = binomial(k, p);
  return DiagMetric(k, a, true);
}

DiagMetric DiagMetric::symmetric_completion(int k, const RVec& half) {
  if (half.size() != k / 2 + 1) throw std::invalid_argument("symmetric_completion needs floor(k/2)+1 entries");
  RVec a(k + 1);
  for (int p = 0; p <= k; ++p) a(p) = half(std::min(p, k - p));
  return DiagMetric(k, a, true);
}

DiagMetric normalize_toy(const DiagMetric& m) {
  RVec a = m.a * (std::pow(2.0, m.k) / m.a.sum());
  if (m.symmetric)
    for (int p = 0; p < (m.k + 1) / 2; ++p) a(m.k - p) = a(p);
  return DiagMetric(m.k, a, m.symmetric);
}

namespace {

// D~(u) = sum a_q u^q (1-u)^(k-q) and its first two derivatives, via Bernstein differences.
struct Radial {
  double d, d1, d2;
};

double bernstein(int n, int q, double u) { return binomial(n, q) * std::pow(u, q) * std::pow(1.0 - u, n - q); }

Radial radial(const DiagMetric& m, double u) {
  const int k = m.k;
  std::vector<double> c(k + 1);
  for (int q = 0; q <= k; ++q) c[q] = m.a(q) / binomial(k, q);
  Radial r{0, 0, 0};
  for (int q = 0; q <= k; ++q) r.d += c[q] * bernstein(k, q, u);
  for (int q = 0; q < k; ++q) r.d1 += k * (c[q + 1] - c[q]) * bernstein(k - 1, q, u);
  for (int q = 0; q + 1 < k; ++q) r.d2 += k * (k - 1.0) * (c[q + 2] - 2 * c[q + 1] + c[q]) * bernstein(k - 2, q, u);
  return r;
}

template <class Density>
RVec hilb_radial(const DiagMetric& m, int resolution, Density density) {
  if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
  std::vector<double> nodes, weights;
  gauss_legendre01(resolution, nodes, weights);
  const int k = m.k;
  RVec t = RVec::Zero(k + 1);
  double mass = 0.0;
  for (int i = 0; i < resolution; ++i) {
    const double u = nodes[i];
    const Radial r = radial(m, u);
    if (!(r.d > 0) || !std::isfinite(r.d)) throw QuadratureFailure("D underflow in radial quadrature");
    const double mu = weights[i] * density(u, r);
    mass += mu;
    for (int p = 0; p <= k; ++p) t(p) += mu * std::pow(u, p) * std::pow(1.0 - u, k - p) / r.d;
  }
  if (!(mass > 0)) throw QuadratureFailure("non-positive measure");
  return t * ((k + 1) / mass);
}

DiagMetric invert_and_normalize(const DiagMetric& m, const RVec& t) {
  RVec a = t.cwiseInverse();
  if (m.symmetric)
    for (int p = 0; p <= m.k / 2; ++p) a(p) = a(m.k - p) = 0.5 * (a(p) + a(m.k - p));
  return normalize_toy(DiagMetric(m.k, a, m.symmetric));
}

}  // namespace

RVec hilb_fs(const DiagMetric& m, int resolution) {
  const int k = m.k;
  // Pulled back to u, the Fubini-Study area is (k + g'(u)) du with g = u(1-u) D~'/D~.
  return hilb_radial(m, resolution, [k](double u, const Radial& r) {
    const double v = u * (1.0 - u);
    const double gp = ((1.0 - 2.0 * u) * r.d1 + v * r.d2) / r.d - v * r.d1 * r.d1 / (r.d * r.d);
    return k + gp;
  });
}

RVec hilb_canonical(const DiagMetric& m, int p_exponent, int resolution) {
  if (p_exponent == 0 || m.k != -2 * p_exponent)
    throw ExponentMismatch("canonical step needs k = -2p (k = " + std::to_string(m.k) + ", p = " +
                           std::to_string(p_exponent) + ")");
  // D^{1/p} times the Euclidean area element, pulled back to u, is D~^{1/p} du.
  return hilb_radial(m, resolution, [p_exponent](double, const Radial& r) { return std::pow(r.d, 1.0 / p_exponent); });
}

RVec hilb_round(const DiagMetric& m, int resolution) {
  return hilb_radial(m, resolution, [](double, const Radial&) { return 1.0; });
}

RVec hilb_nu(const DiagMetric& m, const QuadratureRule& rule) {
  const int k = m.k;
  RVec t = RVec::Zero(k + 1);
  std::vector<double> pw(k + 1);
  for (const QuadPoint& pt : rule.points) {
    const double rho = std::norm(pt.a);
    double d = 0.0, x = 1.0;
    for (int p = 0; p <= k; ++p) {
      pw[p] = x;
      d += m.a(p) * x;
      x *= rho;
    }
    if (!(d > 0) || !std::isfinite(d)) throw EvaluationFailure("D is not positive", pt);
    for (int p = 0; p <= k; ++p) t(p) += pt.weight * pw[p] / d;
  }
  return t * ((k + 1) / rule.total_mass);
}

DiagMetric t_step_fs(const DiagMetric& m, int resolution) { return invert_and_normalize(m, hilb_fs(m, resolution)); }

DiagMetric t_nu_step(const DiagMetric& m, const QuadratureRule& rule) {
  return invert_and_normalize(m, hilb_nu(m, rule));
}

DiagMetric t_canonical_step(const DiagMetric& m, int p_exponent, int resolution) {
  return invert_and_normalize(m, hilb_canonical(m, p_exponent, resolution));
}

std::vector<DiagMetric> toy_iterates(ToyVariant v, const DiagMetric& start, int steps, int resolution) {
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");
  std::vector<DiagMetric> out{start};
  for (int r = 0; r < steps; ++r) {
    const DiagMetric& m = out.back();
    switch (v) {
      case ToyVariant::T: out.push_back(t_step_fs(m, resolution)); break;
      case ToyVariant::TNu: out.push_back(invert_and_normalize(m, hilb_round(m, resolution))); break;
      case ToyVariant::TK: out.push_back(t_canonical_step(m, -m.k / 2, resolution)); break;
    }
  }
  return out;
}

double tau_closed_form(double s) {
  if (!(s > 0)) throw std::invalid_argument("tau needs s > 0");
  const double t = s - 1.0;
  if (std::abs(t) < 1e-3) {
    const double c[] = {1.0,
                        2.0 / 5.0,
                        9.0 / 350.0,
                        -13.0 / 1750.0,
                        1557.0 / 673750.0,
                        -33237.0 / 43793750.0,
                        1196189.0 / 4598343750.0};
    double v = 0.0;
    for (int i = 6; i >= 0; --i) v = v * t + c[i];
    return v;
  }
  // acosh(s) = i acos(s) and sqrt(s^2-1) = i sqrt(1-s^2) give the same real expression for s < 1.
  double ang, root;
  if (s > 1.0) {
    ang = std::acosh(s);
    root = std::sqrt(s * s - 1.0);
  } else {
    ang = std::acos(s);
    root = std::sqrt(1.0 - s * s);
  }
  return (s * ang + root * (s * s - 2.0)) / (2.0 * s * root - 2.0 * ang);
}

RMat q_matrix_cp1(int k) {
  if (k < 1) throw std::invalid_argument("q_matrix_cp1 needs k >= 1");
  RMat q(k + 1, k + 1);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j <= k; ++j)
      q(i, j) = (k + 1.0) / (2.0 * k + 1.0) * binomial(k, i) * binomial(k, j) / binomial(2 * k, i + j);
  return q;
}

double chi(int m, int k) {
  if (m < 0 || m > k) throw std::invalid_argument("chi needs 0 <= m <= k");
  const double kp = k + 1.0;
  double v = 1.0;
  for (int r = 1; r <= m; ++r) v *= (kp - r) / (kp + r);
  return v;
}

double lambda_mk(int m, int k) { return -2.0 * (k + 1.0) * std::log(chi(m, k)); }

}  // namespace kahler
