#include "kahler/bergman.hpp"

#include <cmath>

#include "kahler/k3.hpp"
#include "kahler/reduce.hpp"

namespace kahler {

namespace {

void add_term(std::vector<std::pair<int, double>>& t, int i, double c) {
  for (auto& [j, v] : t)
    if (j == i) {
      v += c;
      return;
    }
  t.emplace_back(i, c);
}

}  // namespace

ProductMap product_map(int k) {
  const Scheme s = Scheme::k3(k);
  if (2 * k >= 32) throw DegreeOverflow("degree 2k too large for the product map");
  ProductMap pm;
  pm.scheme = s;
  pm.basis = k3_basis(k);
  pm.target = k3_basis(2 * k);
  const int n = pm.n();
  pm.terms.resize(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Monomial& ma = pm.basis.mons[a];
      const Monomial& mb = pm.basis.mons[b];
      const int p = ma.p + mb.p, q = ma.q + mb.q;
      auto& t = pm.terms[a * n + b];
      auto put = [&](int pp, int qq, bool odd) {
        const int i = pm.target.index_of(pp, qq, odd);
        if (i < 0) throw DegreeOverflow("product outside the degree-2k basis");
        add_term(t, i, 1.0);
      };
      if (ma.odd && mb.odd) {
        put(p + 6, q, false);
        put(p, q + 6, false);
        put(p, q, false);
      } else {
        put(p, q, ma.odd || mb.odd);
      }
    }
  return pm;
}

ProductMap product_map_cp1(int k) {
  ProductMap pm;
  pm.scheme = Scheme::cp1(k);
  pm.basis = class_table(pm.scheme).basis;
  pm.target = class_table(Scheme::cp1(2 * k)).basis;
  const int n = pm.n();
  pm.terms.resize(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) pm.terms[a * n + b].emplace_back(a + b, 1.0);
  return pm;
}

ProductMap product_map(const Scheme& s) { return s.is_k3() ? product_map(s.k) : product_map_cp1(s.k); }

namespace {

// Rows: ordered pairs (alpha, gamma) of G-orthonormal sections; columns: degree-2k basis.
CMat orthonormal_products(const CMat& a, const ProductMap& pm) {
  const int n = pm.n(), n2 = pm.n2();
  CMat u = CMat::Zero(static_cast<Eigen::Index>(n) * n, n2);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      const auto& t = pm.product(x, y);
      if (t.empty()) continue;
      for (int al = 0; al < n; ++al) {
        if (a(x, al) == 0.0) continue;
        for (int ga = 0; ga < n; ++ga) {
          const cplx f = a(x, al) * a(y, ga);
          if (f == 0.0) continue;
          for (auto [i, c] : t) u(al * n + ga, i) += f * c;
        }
      }
    }
  return u;
}

}  // namespace

CMat induced_square_metric_inverse(const CMat& ginv, const ProductMap& pm) {
  if (ginv.rows() != pm.n()) throw SchemeMismatch("metric size does not match the product map");
  const CMat u = orthonormal_products(hermitian_sqrt(ginv), pm);
  CMat d = u.transpose() * u.conjugate();
  return 0.5 * (d + d.adjoint());
}

CMat induced_square_metric(const CMat& ginv, const ProductMap& pm) {
  const CMat d = induced_square_metric_inverse(ginv, pm);
  return invert(HermitianForm(CMat(d.conjugate()))).entries();
}

std::vector<int> q_basis_order(const Scheme& s) {
  const ClassTable& t = class_table(s);
  std::vector<int> order;
  for (int c = 0; c < t.size(); ++c)
    if (!t.classes[c].diagonal) order.push_back(c);
  for (int c = 0; c < t.size(); ++c)
    if (t.classes[c].diagonal) order.push_back(c);
  return order;
}

namespace {

struct Slot {
  int a, b;
  double v;
};

std::vector<std::vector<Slot>> invariant_basis(const ClassTable& t, const std::vector<int>& order) {
  std::vector<std::vector<Slot>> out;
  for (int c : order) {
    const ParamClass& pc = t.classes[c];
    const double m = static_cast<double>(pc.entries.size());
    std::vector<Slot> slots;
    if (pc.diagonal) {
      for (auto [a, b] : pc.entries) slots.push_back({a, b, 1.0 / std::sqrt(m)});
    } else {
      for (auto [a, b] : pc.entries) {
        slots.push_back({a, b, 1.0 / std::sqrt(2.0 * m)});
        slots.push_back({b, a, 1.0 / std::sqrt(2.0 * m)});
      }
    }
    out.push_back(std::move(slots));
  }
  return out;
}

InvariantQMatrix finish(const Scheme& s, const std::vector<int>& order, RMat q) {
  const ClassTable& t = class_table(s);
  InvariantQMatrix out;
  out.scheme = s;
  out.classes = order;
  for (int c : order) out.basis.push_back(t.classes[c].name);
  out.raw_asymmetry = (q - q.transpose()).norm() / std::max(q.norm(), 1e-300);
  out.entries = 0.5 * (q + q.transpose());
  return out;
}

}  // namespace

InvariantQMatrix q_tilde(const InvariantParams& p, const ProductMap& pm) {
  if (!(p.scheme == pm.scheme)) throw SchemeMismatch("product map built for a different scheme");
  const ClassTable& t = class_table(p.scheme);
  const CMat ginv = expand_params(p).entries();
  const CMat u = orthonormal_products(hermitian_sqrt(ginv), pm);
  CMat dual = u.transpose() * u.conjugate();
  dual = 0.5 * (dual + dual.adjoint());
  const CMat gram = invert(HermitianForm(CMat(dual.conjugate()))).entries();
  const CMat v = u * gram;  // <u_x, u_y> = v.row(x) . conj(u.row(y))
  const int n = pm.n();
  const std::vector<int> order = q_basis_order(p.scheme);
  const auto basis = invariant_basis(t, order);
  const int nc = static_cast<int>(order.size());
  RMat q(nc, nc);
  const double scale = static_cast<double>(n) / pm.n2();
  for (int c = 0; c < nc; ++c)
    for (int d = 0; d < nc; ++d) {
      cplx s = 0.0;
      for (const Slot& x : basis[c])
        for (const Slot& y : basis[d])
          s += x.v * y.v * v.row(x.a * n + y.a).cwiseProduct(u.row(x.b * n + y.b).conjugate()).sum();
      q(c, d) = scale * s.real();
    }
  return finish(p.scheme, order, q);
}

InvariantQMatrix q_tilde(const InvariantParams& p) { return q_tilde(p, product_map(p.scheme)); }

InvariantQMatrix q_direct(const InvariantParams& p, const NuModel& m) {
  if (!(p.scheme == m.scheme())) throw SchemeMismatch("parameters and model use different schemes");
  const ClassTable& t = m.table();
  const CMat a = hermitian_sqrt(expand_params(p).entries());
  const std::vector<int> order = q_basis_order(p.scheme);
  const auto basis = invariant_basis(t, order);
  const int nc = static_cast<int>(order.size()), n = m.dim();
  RMat acc = block_reduce(m.size(), RMat(RMat::Zero(nc, nc)), [&](std::size_t i, RMat& q) {
    CVec s(n);
    m.sections(i, s.data());
    const CVec sh = a.transpose() * s;
    const double d = sh.squaredNorm();
    RVec phi(nc);
    for (int c = 0; c < nc; ++c) {
      double v = 0.0;
      for (const Slot& x : basis[c]) v += x.v * (sh(x.a) * std::conj(sh(x.b))).real();
      phi(c) = v / d;
    }
    q.noalias() += m.weight(i) * phi * phi.transpose();
  });
  return finish(p.scheme, order, acc * (n / m.mass()));
}

RVec q_identity_vector(const Scheme& s) {
  const ClassTable& t = class_table(s);
  const std::vector<int> order = q_basis_order(s);
  RVec v = RVec::Zero(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const ParamClass& pc = t.classes[order[i]];
    if (pc.diagonal) v(static_cast<Eigen::Index>(i)) = std::sqrt(static_cast<double>(pc.entries.size()));
  }
  return v / std::sqrt(static_cast<double>(t.basis.size()));
}

SpectralReport laplacian_estimates(const std::vector<double>& chis, int dim, int n) {
  if (dim < 2 || n < 1) throw std::invalid_argument("laplacian_estimates needs dim >= 2 and n >= 1");
  SpectralReport r;
  r.chis = chis;
  r.k_prime = std::pow(static_cast<double>(dim), 1.0 / n);
  for (double c : chis) {
    r.negative.push_back(c < 0);
    if (c > 0 && c <= 1.0) r.lambdas.emplace_back(-2.0 * r.k_prime * std::log(c));
    else r.lambdas.emplace_back(std::nullopt);
  }
  return r;
}

SpectralReport spectrum(const InvariantQMatrix& q, int n) {
  const EigenDecomposition e = symmetric_eigen(q.entries);
  std::vector<double> chis(e.values.data(), e.values.data() + e.values.size());
  return laplacian_estimates(chis, class_table(q.scheme).basis.size(), n);
}

}  // namespace kahler
