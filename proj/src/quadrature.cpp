#include "kahler/quadrature.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "kahler/reduce.hpp"

namespace kahler {

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {
struct Sum {
  double v = 0.0;
  Sum& operator+=(const Sum& o) {
    v += o.v;
    return *this;
  }
};
}  // namespace

QuadratureRule::QuadratureRule(std::vector<QuadPoint> pts, std::string lbl)
    : points(std::move(pts)), label(std::move(lbl)) {
  for (const QuadPoint& p : points)
    if (!(p.weight > 0)) throw std::invalid_argument("quadrature weights must be positive");
  total_mass = block_reduce(points.size(), Sum{}, [&](std::size_t i, Sum& s) { s.v += points[i].weight; }).v;
}

EvaluationFailure::EvaluationFailure(const std::string& what, const QuadPoint& pt)
    : NumericalError(what + " at chart point (" + std::to_string(pt.a.real()) + "+" + std::to_string(pt.a.imag()) +
                     "i, " + std::to_string(pt.b.real()) + "+" + std::to_string(pt.b.imag()) + "i)"),
      point(pt) {}

double integrate_scalar(const QuadratureRule& rule, const std::function<double(const QuadPoint&)>& f) {
  return block_reduce(rule.size(), Sum{}, [&](std::size_t i, Sum& s) {
           const QuadPoint& pt = rule.points[i];
           const double v = f(pt);
           if (!std::isfinite(v)) throw EvaluationFailure("non-finite integrand", pt);
           s.v += pt.weight * v;
         }).v;
}

double integrate_scalar_serial(const QuadratureRule& rule, const std::function<double(const QuadPoint&)>& f) {
  return serial_reduce(rule.size(), Sum{}, [&](std::size_t i, Sum& s) {
           s.v += rule.points[i].weight * f(rule.points[i]);
         }).v;
}

CMat integrate_hermitian(const QuadratureRule& rule, int dim, const std::function<CMat(const QuadPoint&)>& f) {
  CMat out = block_reduce(rule.size(), CMat(CMat::Zero(dim, dim)), [&](std::size_t i, CMat& acc) {
    const QuadPoint& pt = rule.points[i];
    acc += pt.weight * f(pt);
  });
  return 0.5 * (out + out.adjoint());
}

QuadratureRule round_sphere_rule(int n) {
  if (n < 4) throw std::invalid_argument("round_sphere_rule needs n >= 4");
  std::vector<QuadPoint> pts;
  pts.reserve(static_cast<std::size_t>(n) * kSphereAngles);
  const double du = 1.0 / n;
  const double w = 4.0 * M_PI * du / kSphereAngles;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) * du;
    const double r = std::sqrt(u / (1.0 - u));
    for (int j = 0; j < kSphereAngles; ++j) {
      QuadPoint p;
      p.a = std::polar(r, 2.0 * M_PI * j / kSphereAngles);
      p.chart = ChartId::Sphere;
      p.weight = w;
      pts.push_back(p);
    }
  }
  return QuadratureRule(std::move(pts), "round-sphere(" + std::to_string(n) + ")");
}

void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = 0.5 * (1.0 - x);
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = weights[n - 1 - i] = 0.5 * w;
  }
}

namespace {
constexpr char kMagic[4] = {'K', 'Q', 'R', '1'};

std::string sanitize(const std::string& label) {
  std::string s;
  for (char c : label) s += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return s;
}
}  // namespace

void save_rule(const QuadratureRule& rule, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write rule cache " + path);
  out.write(kMagic, 4);
  const std::uint64_t n = rule.size(), len = rule.label.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(rule.label.data(), static_cast<std::streamsize>(len));
  for (const QuadPoint& p : rule.points) {
    const double rec[5] = {p.a.real(), p.a.imag(), p.b.real(), p.b.imag(), p.weight};
    const std::uint8_t chart = static_cast<std::uint8_t>(p.chart);
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    out.write(reinterpret_cast<const char*>(&chart), 1);
  }
}

QuadratureRule load_rule(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read rule cache " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad rule cache header in " + path);
  std::uint64_t n = 0, len = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string label(len, '\0');
  in.read(label.data(), static_cast<std::streamsize>(len));
  std::vector<QuadPoint> pts(n);
  for (auto& p : pts) {
    double rec[5];
    std::uint8_t chart = 0;
    in.read(reinterpret_cast<char*>(rec), sizeof rec);
    in.read(reinterpret_cast<char*>(&chart), 1);
    p.a = {rec[0], rec[1]};
    p.b = {rec[2], rec[3]};
    p.weight = rec[4];
    p.chart = static_cast<ChartId>(chart);
  }
  if (!in) throw std::runtime_error("truncated rule cache " + path);
  return QuadratureRule(std::move(pts), label);
}

QuadratureRule cached_rule(const std::string& dir, const std::string& label,
                           const std::function<QuadratureRule()>& build) {
  if (dir.empty()) return build();
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / (sanitize(label) + ".qr")).string();
  if (std::filesystem::exists(path)) {
    QuadratureRule r = load_rule(path);
    if (r.label == label) return r;
  }
  QuadratureRule r = build();
  r.label = label;
  save_rule(r, path);
  return r;
}

}  // namespace kahler
