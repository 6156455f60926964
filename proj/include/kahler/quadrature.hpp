#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kahler/linalg.hpp"

namespace kahler {

enum class ChartId : std::uint8_t { Sphere = 0, Big = 1, Small = 2 };

struct QuadPoint {
  cplx a;  // x (sphere, big chart) or u (small chart)
  cplx b;  // unused (sphere), p (big chart) or w (small chart)
  ChartId chart = ChartId::Sphere;
  double weight = 0.0;
};

struct QuadratureRule {
  std::vector<QuadPoint> points;
  double total_mass = 0.0;
  std::string label;

  QuadratureRule() = default;
  QuadratureRule(std::vector<QuadPoint> pts, std::string label);
  std::size_t size() const { return points.size(); }
};

struct EvaluationFailure : NumericalError {
  EvaluationFailure(const std::string& what, const QuadPoint& pt);
  QuadPoint point;
};

double integrate_scalar(const QuadratureRule& rule, const std::function<double(const QuadPoint&)>& f);
CMat integrate_hermitian(const QuadratureRule& rule, int dim,
                         const std::function<CMat(const QuadPoint&)>& f);
// Sequential reference used by tests and the benchmark.
double integrate_scalar_serial(const QuadratureRule& rule, const std::function<double(const QuadPoint&)>& f);

// Rings at midpoints of n cells in u = |x|^2/(1+|x|^2), eight angles per ring; area 4 pi.
QuadratureRule round_sphere_rule(int n);
inline constexpr int kSphereAngles = 8;

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Cache files: a small binary header, then (a, b, chart, weight) records.
void save_rule(const QuadratureRule& rule, const std::string& path);
QuadratureRule load_rule(const std::string& path);
// Loads dir/<sanitized label>.qr if present, otherwise builds, relabels, saves and returns.
QuadratureRule cached_rule(const std::string& dir, const std::string& label,
                           const std::function<QuadratureRule()>& build);

}  // namespace kahler
