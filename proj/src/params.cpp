#include "kahler/params.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace kahler {

namespace {

std::string roman(int n) {
  static const std::pair<int, const char*> table[] = {{10, "X"}, {9, "IX"}, {5, "V"}, {4, "IV"}, {1, "I"}};
  std::string out;
  for (auto [v, s] : table)
    while (n >= v) {
      out += s;
      n -= v;
    }
  return out;
}

using Triple = std::array<int, 3>;

Triple sorted_desc(Triple t) {
  std::sort(t.begin(), t.end(), std::greater<int>());
  return t;
}

Triple exponents(const SectionBasis& b, int i) {
  const Monomial& m = b.mons[i];
  return {m.p, m.q, b.r_of(m)};
}

constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

Triple permute(const Triple& t, int g) { return {t[kPerms[g][0]], t[kPerms[g][1]], t[kPerms[g][2]]}; }

bool congruent_mod6(const Triple& a, const Triple& b) {
  for (int i = 0; i < 3; ++i)
    if (((a[i] - b[i]) % 6 + 6) % 6 != 0) return false;
  return true;
}

// Diagonal classes of one triangle, ordered by smallest exponent descending then largest ascending.
void add_diagonal_classes(ClassTable& t, bool odd, const std::string& prefix) {
  std::map<Triple, std::vector<int>> groups;
  for (int i = 0; i < t.basis.size(); ++i)
    if (t.basis.mons[i].odd == odd) groups[sorted_desc(exponents(t.basis, i))].push_back(i);
  std::vector<Triple> keys;
  for (auto& [key, _] : groups) keys.push_back(key);
  std::sort(keys.begin(), keys.end(), [](const Triple& a, const Triple& b) {
    if (a[2] != b[2]) return a[2] > b[2];
    return a[0] < b[0];
  });
  int n = 1;
  for (const Triple& key : keys) {
    ParamClass c;
    c.name = prefix + "_" + roman(n++);
    c.diagonal = true;
    c.exponents = key;
    for (int i : groups[key]) {
      c.entries.push_back({i, i});
      t.class_of_diag[i] = t.size();
    }
    t.classes.push_back(c);
  }
}

// Off-diagonal classes of one triangle: S3-orbits of unordered pairs with exponents congruent mod 6.
std::vector<ParamClass> offdiagonal_classes(const ClassTable& t, bool odd) {
  const SectionBasis& b = t.basis;
  std::map<std::pair<Triple, Triple>, std::vector<std::array<int, 2>>> orbits;
  for (int i = 0; i < b.size(); ++i) {
    if (b.mons[i].odd != odd) continue;
    for (int j = i + 1; j < b.size(); ++j) {
      if (b.mons[j].odd != odd) continue;
      Triple ei = exponents(b, i), ej = exponents(b, j);
      if (!congruent_mod6(ei, ej)) continue;
      std::pair<Triple, Triple> best{};
      bool first = true;
      for (int g = 0; g < 6; ++g) {
        Triple a = permute(ei, g), c = permute(ej, g);
        auto cand = a < c ? std::make_pair(a, c) : std::make_pair(c, a);
        if (first || cand < best) best = cand;
        first = false;
      }
      orbits[best].push_back({i, j});
    }
  }
  std::vector<ParamClass> out;
  for (auto& [_, entries] : orbits) {
    ParamClass c;
    c.diagonal = false;
    c.entries = entries;
    out.push_back(c);
  }
  return out;
}

std::string diag_pair_label(const ClassTable& t, const ParamClass& c) {
  auto [i, j] = c.entries.front();
  std::string a = t.classes[t.class_of_diag[i]].name, b = t.classes[t.class_of_diag[j]].name;
  if (b < a) std::swap(a, b);
  return a + "|" + b;
}

std::unique_ptr<ClassTable> build_k3_table(const Scheme& s) {
  auto t = std::make_unique<ClassTable>();
  t->scheme = s;
  t->basis = k3_basis(s.k);
  t->class_of_diag.assign(t->basis.size(), -1);
  add_diagonal_classes(*t, false, "a");
  const int n_a = t->size();
  add_diagonal_classes(*t, true, "b");
  std::vector<ParamClass> big_off = offdiagonal_classes(*t, false);
  std::vector<ParamClass> small_off = offdiagonal_classes(*t, true);

  std::vector<ParamClass> ordered_big;
  if (s.k == 6) {
    if (big_off.size() != 1) throw std::logic_error("unexpected off-diagonal classes at k=6");
    ordered_big = big_off;
    ordered_big[0].name = "C";
  } else if (s.k == 9) {
    const char* order[6] = {"a_VI|a_XI", "a_VI|a_X", "a_X|a_XI", "a_IX|a_XII", "a_IX|a_IX", "a_VII|a_VII"};
    if (big_off.size() != 6) throw std::logic_error("unexpected off-diagonal classes at k=9");
    for (int n = 0; n < 6; ++n) {
      auto it = std::find_if(big_off.begin(), big_off.end(),
                             [&](const ParamClass& c) { return diag_pair_label(*t, c) == order[n]; });
      if (it == big_off.end()) throw std::logic_error(std::string("missing class ") + order[n]);
      ParamClass c = *it;
      c.name = "C" + std::to_string(n + 1);
      ordered_big.push_back(c);
    }
  } else if (!big_off.empty()) {
    throw std::logic_error("unexpected off-diagonal classes");
  }
  if (small_off.size() > 1) throw std::logic_error("unexpected small-triangle off-diagonal classes");
  for (auto& c : small_off) c.name = "C'";

  // Layout: k=6 (a, b, C); k=9 (a, C1..C6, b, C').
  std::vector<ParamClass> a(t->classes.begin(), t->classes.begin() + n_a);
  std::vector<ParamClass> b(t->classes.begin() + n_a, t->classes.end());
  std::vector<ParamClass> all;
  if (s.k == 9) {
    all = a;
    all.insert(all.end(), ordered_big.begin(), ordered_big.end());
    all.insert(all.end(), b.begin(), b.end());
    all.insert(all.end(), small_off.begin(), small_off.end());
  } else {
    all = a;
    all.insert(all.end(), b.begin(), b.end());
    all.insert(all.end(), ordered_big.begin(), ordered_big.end());
    all.insert(all.end(), small_off.begin(), small_off.end());
  }
  t->classes = all;
  for (int c = 0; c < t->size(); ++c)
    if (t->classes[c].diagonal)
      for (auto [i, _] : t->classes[c].entries) t->class_of_diag[i] = c;
  return t;
}

std::unique_ptr<ClassTable> build_cp1_table(const Scheme& s) {
  auto t = std::make_unique<ClassTable>();
  t->scheme = s;
  t->basis.k = s.k;
  t->basis.n_big = s.k + 1;
  for (int p = 0; p <= s.k; ++p) t->basis.mons.push_back({p, 0, false});
  for (int p = 0; p <= s.k; ++p) {
    ParamClass c;
    c.name = "a_" + std::to_string(p);
    c.entries.push_back({p, p});
    t->classes.push_back(c);
    t->class_of_diag.push_back(p);
  }
  return t;
}

}  // namespace

Scheme Scheme::k3(int k) {
  switch (k) {
    case 3: return {SchemeKind::K3k3, 3};
    case 6: return {SchemeKind::K3k6, 6};
    case 9: return {SchemeKind::K3k9, 9};
    default: throw SchemeMismatch("K3 schemes exist for k = 3, 6, 9 only");
  }
}

std::string Scheme::name() const {
  if (kind == SchemeKind::CP1Diag) return "CP1Diag(" + std::to_string(k) + ")";
  return "K3k" + std::to_string(k);
}

int SectionBasis::index_of(int p, int q, bool odd) const {
  for (int i = 0; i < size(); ++i)
    if (mons[i].p == p && mons[i].q == q && mons[i].odd == odd) return i;
  return -1;
}

SectionBasis k3_basis(int k) {
  SectionBasis b;
  b.k = k;
  for (int p = 0; p <= k; ++p)
    for (int q = 0; p + q <= k; ++q) b.mons.push_back({p, q, false});
  b.n_big = b.size();
  for (int p = 0; p <= k - 3; ++p)
    for (int q = 0; p + q <= k - 3; ++q) b.mons.push_back({p, q, true});
  return b;
}

int k3_dim(int k) { return (k + 1) * (k + 2) / 2 + (k >= 3 ? (k - 2) * (k - 1) / 2 : 0); }

int ClassTable::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (classes[i].name == name) return i;
  return -1;
}

const ClassTable& class_table(const Scheme& s) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<ClassTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(static_cast<int>(s.kind), s.k);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  if (s.kind == SchemeKind::CP1Diag && s.k < 1) throw SchemeMismatch("CP1 degree must be positive");
  auto t = s.is_k3() ? build_k3_table(s) : build_cp1_table(s);
  return *cache.emplace(key, std::move(t)).first->second;
}

InvariantParams::InvariantParams(Scheme s, RVec v) : scheme(s), values(std::move(v)) {
  if (values.size() != class_table(scheme).size())
    throw SchemeMismatch("parameter count does not match " + scheme.name());
}

InvariantParams InvariantParams::ones(const Scheme& s) {
  const ClassTable& t = class_table(s);
  RVec v(t.size());
  for (int c = 0; c < t.size(); ++c) v(c) = t.classes[c].diagonal ? 1.0 : 0.0;
  return InvariantParams(s, v);
}

CMat expand_values(const ClassTable& t, const RVec& values) {
  const int n = t.basis.size();
  CMat m = CMat::Zero(n, n);
  for (int c = 0; c < t.size(); ++c)
    for (auto [a, b] : t.classes[c].entries) {
      m(a, b) = values(c);
      m(b, a) = values(c);
    }
  return m;
}

HermitianForm expand_params(const InvariantParams& p) {
  const ClassTable& t = class_table(p.scheme);
  for (int c = 0; c < t.size(); ++c)
    if (t.classes[c].diagonal && !(p.values(c) > 0))
      throw NotPositiveDefinite("diagonal class " + t.classes[c].name + " is not positive");
  HermitianForm form(expand_values(t, p.values));
  cholesky(form.entries());
  return form;
}

InvariantParams project_params(const CMat& m, const Scheme& s, double* deviation) {
  const ClassTable& t = class_table(s);
  if (m.rows() != t.basis.size() || m.cols() != t.basis.size())
    throw SchemeMismatch("matrix size does not match " + s.name());
  RVec v(t.size());
  for (int c = 0; c < t.size(); ++c) {
    double sum = 0.0;
    for (auto [a, b] : t.classes[c].entries) sum += 0.5 * (m(a, b).real() + m(b, a).real());
    v(c) = sum / static_cast<double>(t.classes[c].entries.size());
  }
  if (deviation) {
    const double scale = std::max(m.norm(), 1e-300);
    *deviation = (m - expand_values(t, v)).norm() / scale;
  }
  return InvariantParams(s, v);
}

InvariantParams contract_params(const CMat& m, const Scheme& s, double tau_sym) {
  double dev = 0.0;
  InvariantParams p = project_params(m, s, &dev);
  if (dev > tau_sym)
    throw NotInvariant("matrix deviates from the invariant subspace by " + std::to_string(dev) + " (relative)");
  return p;
}

InvariantParams normalize_product(const InvariantParams& p) {
  const ClassTable& t = class_table(p.scheme);
  double log_sum = 0.0;
  int n = 0;
  for (int c = 0; c < t.size(); ++c)
    if (t.classes[c].diagonal) {
      log_sum += std::log(p.values(c));
      ++n;
    }
  return InvariantParams(p.scheme, p.values * std::exp(-log_sum / n));
}

InvariantParams normalize_sum(const InvariantParams& p, double target) {
  const ClassTable& t = class_table(p.scheme);
  double sum = 0.0;
  for (int c = 0; c < t.size(); ++c)
    if (t.classes[c].diagonal) sum += p.values(c);
  return InvariantParams(p.scheme, p.values * (target / sum));
}

double projective_distance(const RVec& p, const RVec& q) {
  if (p.size() != q.size()) throw SchemeMismatch("projective_distance: size mismatch");
  std::vector<double> r;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) {
      if (q(i) != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    r.push_back(q(i) / p(i));
  }
  if (r.empty()) return 0.0;
  auto value = [&](double s) {
    double m = 0.0;
    for (double ri : r) m = std::max(m, std::abs(1.0 - s * ri));
    return m;
  };
  double best = value(0.0);
  for (size_t i = 0; i < r.size(); ++i) {
    if (r[i] != 0.0) best = std::min(best, value(1.0 / r[i]));
    for (size_t j = i; j < r.size(); ++j)
      if (r[i] + r[j] > 0) best = std::min(best, value(2.0 / (r[i] + r[j])));
  }
  return best;
}

double projective_distance(const InvariantParams& p, const InvariantParams& q) {
  if (!(p.scheme == q.scheme)) throw SchemeMismatch("projective_distance: scheme mismatch");
  return projective_distance(p.values, q.values);
}

std::vector<CMat> gamma_generators(const SectionBasis& b) {
  const int n = b.size();
  std::vector<CMat> gens;
  if (b.n_big == n && n == b.k + 1 && std::all_of(b.mons.begin(), b.mons.end(), [](auto& m) { return m.q == 0; })) {
    CMat g = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i) g(i, i) = std::polar(1.0, static_cast<double>(b.mons[i].p));
    gens.push_back(g);
    return gens;
  }
  const double third = M_PI / 3.0;
  CMat px = CMat::Zero(n, n), py = CMat::Zero(n, n), fw = CMat::Zero(n, n);
  CMat sxy = CMat::Zero(n, n), sxz = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Monomial& m = b.mons[i];
    px(i, i) = std::polar(1.0, third * m.p);
    py(i, i) = std::polar(1.0, third * m.q);
    fw(i, i) = m.odd ? -1.0 : 1.0;
    sxy(b.index_of(m.q, m.p, m.odd), i) = 1.0;
    sxz(b.index_of(b.r_of(m), m.q, m.odd), i) = 1.0;
  }
  gens = {px, py, fw, sxy, sxz};
  return gens;
}

double gamma_deviation(const CMat& m, const SectionBasis& b) {
  const double scale = std::max(m.norm(), 1e-300);
  double dev = m.imag().norm() / scale;
  for (const CMat& g : gamma_generators(b)) dev = std::max(dev, (g * m * g.adjoint() - m).norm() / scale);
  return dev;
}

}  // namespace kahler
