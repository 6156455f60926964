#include "kahler/k3.hpp"

#include <cmath>
#include <sstream>

namespace kahler {

namespace {

constexpr double kSqrt3Half = 0.86602540378443864676;
const cplx kOmega6 = std::polar(1.0, M_PI / 3.0);

cplx pow6(cplx z) {
  const cplx z2 = z * z;
  return z2 * z2 * z2;
}

cplx root6(cplx z) { return std::pow(z, 1.0 / 6.0); }

}  // namespace

double surface_residual(const SurfacePoint& pt) {
  const cplx x6 = pow6(pt.x), y6 = pow6(pt.y), z6 = pow6(pt.z);
  return std::abs(pt.w * pt.w - x6 - y6 - z6) / (std::abs(z6) + std::abs(x6) + std::abs(y6));
}

SurfacePoint big_chart_point(cplx x, cplx p, const K3Config& cfg) {
  const cplx x6 = pow6(x), p6 = pow6(p);
  if (!(x6.real() > cfg.big_edge)) throw OutsideDomain("big chart needs Re(x^6) > " + std::to_string(cfg.big_edge));
  const cplx s = 2.0 + p6;
  if (std::abs(s.imag()) == 0.0 && s.real() <= 0.0) throw OutsideDomain("2 + p^6 on the branch cut");
  SurfacePoint pt;
  pt.x = x;
  pt.y = p * root6(s) * root6(1.0 + x6);
  pt.w = (1.0 + p6) * std::sqrt(1.0 + x6);
  pt.chart = ChartId::Big;
  pt.c1 = x;
  pt.c2 = p;
  return pt;
}

SurfacePoint small_chart_point(cplx u, cplx w, const K3Config&) {
  const cplx x6 = 0.5 * (w * w + u - 1.0), y6 = 0.5 * (w * w - u - 1.0);
  if (std::abs(x6) < 1e-12 || std::abs(y6) < 1e-12) throw OutsideDomain("small chart root argument vanishes");
  SurfacePoint pt;
  pt.x = root6(x6);
  pt.y = root6(y6);
  pt.w = w;
  pt.chart = ChartId::Small;
  pt.c1 = u;
  pt.c2 = w;
  return pt;
}

SurfacePoint chart_point(const QuadPoint& q, const K3Config& cfg) {
  switch (q.chart) {
    case ChartId::Big: return big_chart_point(q.a, q.b, cfg);
    case ChartId::Small: return small_chart_point(q.a, q.b, cfg);
    default: throw OutsideDomain("not a K3 chart point");
  }
}

cplx theta_density(const SurfacePoint& pt) {
  if (pt.chart == ChartId::Big) {
    const cplx x6 = pow6(pt.c1), p6 = pow6(pt.c2);
    return 2.0 * std::pow(2.0 + p6, -5.0 / 6.0) * std::pow(1.0 + x6, -1.0 / 3.0);
  }
  const cplx x5 = pow6(pt.x) / pt.x, y5 = pow6(pt.y) / pt.y;
  if (std::abs(x5 * y5) < 1e-8) throw NearBranchSingularity("small chart density near x y = 0");
  return 1.0 / (36.0 * x5 * y5);
}

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * (3.0 - 2.0 * t);
}

namespace {

double band(double re6, const K3Config& cfg) {
  return smoothstep((re6 - cfg.big_edge) / (cfg.small_edge - cfg.big_edge));
}

double radial_cut(double r, const K3Config& cfg) {
  return smoothstep((cfg.patch_outer - r) / (cfg.patch_outer - cfg.patch_inner));
}

double sheet_cut(double re_q, const K3Config& cfg) {
  return smoothstep((re_q + cfg.sheet_halfwidth) / (2.0 * cfg.sheet_halfwidth));
}

double patch_weight_xy(double ax, double ay, const K3Config& cfg) {
  const double own = radial_cut(ax, cfg) * radial_cut(ay, cfg);
  if (own == 0.0) return 0.0;
  double total = own;
  if (ax > 0) total += radial_cut(ay / ax, cfg) * radial_cut(1.0 / ax, cfg);
  if (ay > 0) total += radial_cut(ax / ay, cfg) * radial_cut(1.0 / ay, cfg);
  return own / total;
}

}  // namespace

CutoffWeights cutoff_weights(const SurfacePoint& pt, const K3Config& cfg) {
  const double bx = band(pow6(pt.x / pt.z).real(), cfg), by = band(pow6(pt.y / pt.z).real(), cfg);
  return {0.5 * bx * (2.0 - by), 0.5 * by * (2.0 - bx), (1.0 - bx) * (1.0 - by)};
}

double cutoff_weight(const SurfacePoint& pt, const K3Config& cfg) {
  const CutoffWeights c = cutoff_weights(pt, cfg);
  return c.big_x + c.big_y;
}

double patch_weight(const SurfacePoint& pt, const K3Config& cfg) {
  return patch_weight_xy(std::abs(pt.x / pt.z), std::abs(pt.y / pt.z), cfg);
}

std::string k3_rule_label(int n_x, int n_p, int n_u, int n_w) {
  std::ostringstream s;
  s << "k3(" << n_x << "," << n_p << "," << n_u << "," << n_w << ")";
  return s.str();
}

namespace {

struct LatticeRep {
  cplx z;
  double mult;
};

// Hexagonal lattice h (i + j e^{i pi/3}) inside |z| < radius, one representative per orbit of
// the rotations by pi/3 (and of conjugation when half is set).
std::vector<LatticeRep> hex_reps(double h, double radius, bool half) {
  std::vector<LatticeRep> out;
  out.push_back({0.0, 1.0});
  const int n = static_cast<int>(std::ceil(2.0 * radius / h)) + 2;
  for (int i = 1; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double mult;
      if (half) {
        if (j == 0 || i == j) mult = 6.0;
        else if (i > j) mult = 12.0;
        else continue;
      } else {
        mult = 6.0;
      }
      const cplx z = h * (static_cast<double>(i) + static_cast<double>(j) * kOmega6);
      if (std::abs(z) < radius) out.push_back({z, mult});
    }
  return out;
}

}  // namespace

QuadratureRule build_k3_rule(int n_x, int n_p, int n_u, int n_w, const K3Config& cfg) {
  if (n_x < 4 || n_p < 4 || n_u < 4 || n_w < 4) throw std::invalid_argument("lattice parameters must be >= 4");
  std::vector<QuadPoint> pts;

  const double hx = cfg.c_x / n_x, hp = cfg.c_p / n_p;
  const double cell_x = kSqrt3Half * hx * hx, cell_p = kSqrt3Half * hp * hp;
  std::vector<LatticeRep> xs = hex_reps(hx, cfg.patch_outer, true);
  std::vector<LatticeRep> ps = hex_reps(hp, cfg.p_radius, false);
  for (const LatticeRep& xr : xs) {
    const cplx x6 = pow6(xr.z);
    if (band(x6.real(), cfg) == 0.0) continue;
    for (const LatticeRep& pr : ps) {
      const cplx q = 1.0 + pow6(pr.z);
      const double sheet = sheet_cut(q.real(), cfg);
      if (sheet == 0.0) continue;
      SurfacePoint sp = big_chart_point(xr.z, pr.z, cfg);
      const double omega = patch_weight(sp, cfg);
      if (omega == 0.0) continue;
      const CutoffWeights cw = cutoff_weights(sp, cfg);
      // Both big-chart terms are x <-> y images of each other; the w -> -w sheet doubles again,
      // and the three coordinate patches triple.
      const double w = cell_x * cell_p * xr.mult * pr.mult * 4.0 * std::norm(theta_density(sp)) * 2.0 * cw.big_x *
                       omega * sheet * 2.0 * 3.0;
      if (w > 0.0) pts.push_back({xr.z, pr.z, ChartId::Big, w});
    }
  }

  const double hu = cfg.c_u / n_u, hw = cfg.c_w / n_w;
  const int nu = static_cast<int>(std::ceil(cfg.u_radius / hu)) + 1;
  const int nw = static_cast<int>(std::ceil(cfg.w_radius / hw)) + 1;
  const double cell = hu * hu * hw * hw;
  for (int ur = 0; ur < nu; ++ur)
    for (int ui = 0; ui < nu; ++ui) {
      const cplx u((ur + 0.5) * hu, (ui + 0.5) * hu);
      if (std::abs(u) >= cfg.u_radius) continue;
      for (int wr = 0; wr < nw; ++wr)
        for (int wi = -nw; wi < nw; ++wi) {
          const cplx w((wr + 0.5) * hw, (wi + 0.5) * hw);
          if (std::abs(w) >= cfg.w_radius) continue;
          const cplx x6 = 0.5 * (w * w + u - 1.0), y6 = 0.5 * (w * w - u - 1.0);
          if (x6.real() >= cfg.small_edge || y6.real() >= cfg.small_edge) continue;
          SurfacePoint sp = small_chart_point(u, w, cfg);
          const double omega = patch_weight(sp, cfg);
          if (omega == 0.0) continue;
          // Eight sign images of (u, w), 36 root choices of (x, y), three patches.
          const double wt =
              cell * 8.0 * 36.0 * 4.0 * std::norm(theta_density(sp)) * cutoff_weights(sp, cfg).small * omega * 3.0;
          if (wt > 0.0) pts.push_back({u, w, ChartId::Small, wt});
        }
    }
  return QuadratureRule(std::move(pts), k3_rule_label(n_x, n_p, n_u, n_w));
}

std::array<double, 2> chart_masses(const QuadratureRule& rule) {
  std::array<double, 2> m{0.0, 0.0};
  for (const QuadPoint& p : rule.points) m[p.chart == ChartId::Big ? 0 : 1] += p.weight;
  return m;
}

std::array<std::size_t, 2> chart_counts(const QuadratureRule& rule) {
  std::array<std::size_t, 2> c{0, 0};
  for (const QuadPoint& p : rule.points) ++c[p.chart == ChartId::Big ? 0 : 1];
  return c;
}

double lattice_integral_LI(int nodes) {
  // int_0^1 (1-p^3)^(-2/3) dp: the substitution 1 - p^3 = t^3 maps [2^(-1/3), 1] onto [0, 2^(-1/3)]
  // with the same integrand, leaving a smooth integral over [0, 2^(-1/3)] twice.
  std::vector<double> x, w;
  gauss_legendre01(nodes, x, w);
  const double b = std::pow(2.0, -1.0 / 3.0);
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double p = b * x[i];
    s += w[i] * std::pow(1.0 - p * p * p, -2.0 / 3.0);
  }
  return 2.0 * b * s;
}

double analytic_volume(int nodes) { return 27.0 * std::pow(lattice_integral_LI(nodes), 4); }

std::vector<SurfacePoint> surface_points(const QuadratureRule& rule, const K3Config& cfg) {
  std::vector<SurfacePoint> out(rule.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rule.size()); ++i)
    out[i] = chart_point(rule.points[i], cfg);
  return out;
}

std::vector<SurfacePoint> gamma_orbit(const SurfacePoint& pt) {
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<SurfacePoint> out;
  out.reserve(864);
  const cplx c[3] = {pt.x, pt.y, pt.z};
  for (auto& g : perms)
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int sw = 0; sw < 2; ++sw)
          for (int cj = 0; cj < 2; ++cj) {
            SurfacePoint q;
            q.x = c[g[0]] * std::pow(kOmega6, a);
            q.y = c[g[1]] * std::pow(kOmega6, b);
            q.z = c[g[2]];
            q.w = sw ? -pt.w : pt.w;
            if (cj) {
              q.x = std::conj(q.x);
              q.y = std::conj(q.y);
              q.z = std::conj(q.z);
              q.w = std::conj(q.w);
            }
            q.chart = pt.chart;
            out.push_back(q);
          }
  return out;
}

void eval_sections(const SectionBasis& b, const SurfacePoint& pt, cplx* out) {
  const int k = b.k;
  cplx px[32], py[32], pz[32];
  if (k >= 32) throw std::invalid_argument("degree too large");
  px[0] = py[0] = pz[0] = 1.0;
  for (int i = 1; i <= k; ++i) {
    px[i] = px[i - 1] * pt.x;
    py[i] = py[i - 1] * pt.y;
    pz[i] = pz[i - 1] * pt.z;
  }
  for (int i = 0; i < b.size(); ++i) {
    const Monomial& m = b.mons[i];
    const cplx v = px[m.p] * py[m.q] * pz[b.r_of(m)];
    out[i] = m.odd ? v * pt.w : v;
  }
}

SectionJet section_jet(const SurfacePoint& pt, int k) {
  if (pt.z != 1.0) throw std::invalid_argument("section_jet needs an affine point (z = 1)");
  const SectionBasis b = k3_basis(k);
  const int np = b.n_big, nm = b.size() - b.n_big;
  SectionJet j;
  j.k = k;
  j.w = pt.w;
  j.f_x = 3.0 * pow6(pt.x) / pt.x;
  j.f_y = 3.0 * pow6(pt.y) / pt.y;
  if (pt.x == 0.0) j.f_x = 0.0;
  if (pt.y == 0.0) j.f_y = 0.0;
  std::vector<cplx> px(k + 1), py(k + 1);
  px[0] = py[0] = 1.0;
  for (int i = 1; i <= k; ++i) {
    px[i] = px[i - 1] * pt.x;
    py[i] = py[i - 1] * pt.y;
  }
  auto fill = [&](int off, int n, CVec& v, CVec& vx, CVec& vy) {
    v.resize(n);
    vx.resize(n);
    vy.resize(n);
    for (int i = 0; i < n; ++i) {
      const Monomial& m = b.mons[off + i];
      v(i) = px[m.p] * py[m.q];
      vx(i) = m.p > 0 ? static_cast<double>(m.p) * px[m.p - 1] * py[m.q] : 0.0;
      vy(i) = m.q > 0 ? static_cast<double>(m.q) * px[m.p] * py[m.q - 1] : 0.0;
    }
  };
  fill(0, np, j.r_plus, j.v_plus_x, j.v_plus_y);
  fill(np, nm, j.v_minus, j.v_minus_x, j.v_minus_y);
  j.r_minus = pt.w * j.v_minus;
  const cplx wx = j.f_x / pt.w, wy = j.f_y / pt.w;  // w' = 3x^5 / w from w^2 = 1 + x^6 + y^6
  j.r.resize(np + nm);
  j.r << j.r_plus, j.r_minus;
  j.delta_x.resize(np + nm);
  j.delta_y.resize(np + nm);
  j.delta_x << j.v_plus_x, pt.w * j.v_minus_x;
  j.delta_y << j.v_plus_y, pt.w * j.v_minus_y;
  j.r_x.resize(np + nm);
  j.r_y.resize(np + nm);
  j.r_x << j.v_plus_x, pt.w * j.v_minus_x + wx * j.v_minus;
  j.r_y << j.v_plus_y, pt.w * j.v_minus_y + wy * j.v_minus;
  return j;
}

SparseForm SparseForm::from_dense(const CMat& m, int n_plus, double drop) {
  SparseForm f;
  f.dim = static_cast<int>(m.rows());
  f.n_plus = n_plus;
  f.diag.resize(f.dim);
  for (int i = 0; i < f.dim; ++i) {
    f.diag(i) = m(i, i).real();
    for (int j = i + 1; j < f.dim; ++j) {
      if (std::abs(m(i, j)) <= drop) continue;
      if ((i < n_plus) != (j < n_plus)) throw std::invalid_argument("form couples the two triangles");
      f.row.push_back(i);
      f.col.push_back(j);
      f.val.push_back(m(i, j));
    }
  }
  return f;
}

SparseForm SparseForm::from_params(const InvariantParams& p) {
  const ClassTable& t = class_table(p.scheme);
  SparseForm f;
  f.dim = t.basis.size();
  f.n_plus = t.basis.n_big;
  f.diag.resize(f.dim);
  for (int c = 0; c < t.size(); ++c) {
    const ParamClass& pc = t.classes[c];
    for (auto [a, b] : pc.entries) {
      if (pc.diagonal) {
        f.diag(a) = p.values(c);
      } else {
        f.row.push_back(a);
        f.col.push_back(b);
        f.val.push_back(p.values(c));
      }
    }
  }
  return f;
}

cplx SparseForm::inner(const cplx* u, const cplx* v) const {
  cplx s = 0.0;
  for (int i = 0; i < dim; ++i) s += diag(i) * u[i] * std::conj(v[i]);
  for (std::size_t e = 0; e < val.size(); ++e)
    s += val[e] * u[row[e]] * std::conj(v[col[e]]) + std::conj(val[e]) * u[col[e]] * std::conj(v[row[e]]);
  return s;
}

cplx SparseForm::inner_plus(const cplx* u, const cplx* v) const {
  cplx s = 0.0;
  for (int i = 0; i < n_plus; ++i) s += diag(i) * u[i] * std::conj(v[i]);
  for (std::size_t e = 0; e < val.size(); ++e)
    if (col[e] < n_plus)
      s += val[e] * u[row[e]] * std::conj(v[col[e]]) + std::conj(val[e]) * u[col[e]] * std::conj(v[row[e]]);
  return s;
}

cplx SparseForm::inner_minus(const cplx* u, const cplx* v) const {
  cplx s = 0.0;
  for (int i = n_plus; i < dim; ++i) s += diag(i) * u[i - n_plus] * std::conj(v[i - n_plus]);
  for (std::size_t e = 0; e < val.size(); ++e)
    if (row[e] >= n_plus) {
      const int r = row[e] - n_plus, c = col[e] - n_plus;
      s += val[e] * u[r] * std::conj(v[c]) + std::conj(val[e]) * u[c] * std::conj(v[r]);
    }
  return s;
}

double fs_volume_ratio_det(const SparseForm& g, const SectionJet& j) {
  const cplx* v[3] = {j.r.data(), j.r_x.data(), j.r_y.data()};
  Eigen::Matrix3cd gram;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) gram(a, b) = g.inner(v[a], v[b]);
  const double n2 = gram(0, 0).real();
  return kFsVolumeConstant * std::norm(j.w) * gram.determinant().real() / (n2 * n2 * n2);
}

double fs_volume_ratio_branch(const SparseForm& g, const SectionJet& j) {
  const int n = g.dim;
  const cplx* r = j.r.data();
  const double n2 = g.norm2(r);
  CVec hx = j.delta_x - (g.inner(j.delta_x.data(), r) / n2) * j.r;
  CVec hy = j.delta_y - (g.inner(j.delta_y.data(), r) / n2) * j.r;
  const double vp2 = g.inner_plus(j.r_plus.data(), j.r_plus.data()).real();
  const double vm2 = n > g.n_plus ? g.inner_minus(j.v_minus.data(), j.v_minus.data()).real() : 0.0;
  cplx qx = 0.0, qy = 0.0;
  if (n > g.n_plus) {
    qx = (vp2 * g.inner_minus(j.v_minus_x.data(), j.v_minus.data()) -
          vm2 * g.inner_plus(j.v_plus_x.data(), j.r_plus.data())) / n2;
    qy = (vp2 * g.inner_minus(j.v_minus_y.data(), j.v_minus.data()) -
          vm2 * g.inner_plus(j.v_plus_y.data(), j.r_plus.data())) / n2;
  }
  const double hxx = g.norm2(hx.data()), hyy = g.norm2(hy.data());
  const cplx hxy = g.inner(hx.data(), hy.data());
  const double aw2 = std::norm(j.w);
  const cplx w2 = j.w * j.w, cw2 = std::conj(w2);
  CVec mix = j.f_x * hy - j.f_y * hx;
  const double v1 = aw2 * (hxx * hyy - std::norm(hxy));
  const double v2 = vp2 * vm2 / n2 * g.norm2(mix.data());
  const double v3 = aw2 * std::norm(j.f_x * qy - j.f_y * qx);
  const double v4 = (hyy * std::conj(qx) * cw2 * j.f_x + hxx * std::conj(qy) * cw2 * j.f_y).real();
  const double v5 = (hxy * (std::conj(j.f_x) * qy * w2 + j.f_y * std::conj(qx) * cw2)).real();
  return kFsVolumeConstant * (v1 + v2 - v3 + 2.0 * v4 - 2.0 * v5) / (n2 * n2);
}

double fs_volume_ratio(const HermitianForm& ginv, int k, const SurfacePoint& pt) {
  const SectionJet j = section_jet(pt, k);
  const SparseForm g = SparseForm::from_dense(ginv.entries(), k3_basis(k).n_big);
  const double v = fs_volume_ratio_branch(g, j);
  if (!(v > 0)) throw NotPositive("volume ratio is not positive");
  return v;
}

}  // namespace kahler
