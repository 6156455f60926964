#include "kahler/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kahler/reduce.hpp"

namespace kahler {

NuModel::NuModel(const Scheme& s, QuadratureRule rule, const K3Config& cfg)
    : scheme_(s), rule_(std::move(rule)), cfg_(cfg), table_(&class_table(s)) {
  for (const QuadPoint& q : rule_.points) {
    const bool sphere = q.chart == ChartId::Sphere;
    if (sphere == s.is_k3()) throw SchemeMismatch("rule charts do not match scheme " + s.name());
  }
  if (s.is_k3()) points_ = surface_points(rule_, cfg_);
}

void NuModel::sections(std::size_t i, cplx* out) const {
  if (scheme_.is_k3()) {
    eval_sections(table_->basis, points_[i], out);
    return;
  }
  const cplx x = rule_.points[i].a;
  cplx v = 1.0;
  for (int p = 0; p <= scheme_.k; ++p) {
    out[p] = v;
    v *= x;
  }
}

namespace {

struct Entry {
  int a, b, c;
};

std::vector<Entry> flatten(const ClassTable& t, RVec& counts) {
  std::vector<Entry> out;
  counts.resize(t.size());
  for (int c = 0; c < t.size(); ++c) {
    counts(c) = static_cast<double>(t.classes[c].entries.size());
    for (auto [a, b] : t.classes[c].entries) out.push_back({a, b, c});
  }
  return out;
}

struct HilbAcc {
  RVec t;
  double log_d = 0.0;
  HilbAcc& operator+=(const HilbAcc& o) {
    t += o.t;
    log_d += o.log_d;
    return *this;
  }
};

RVec hilb_invariant_impl(const InvariantParams& p, const NuModel& m, double* log_d_sum) {
  if (!(p.scheme == m.scheme())) throw SchemeMismatch("parameters and model use different schemes");
  const ClassTable& t = m.table();
  const SparseForm g = SparseForm::from_params(p);
  RVec counts;
  const std::vector<Entry> entries = flatten(t, counts);
  const int dim = m.dim();
  HilbAcc zero{RVec::Zero(t.size()), 0.0};
  HilbAcc acc = block_reduce(m.size(), zero, [&](std::size_t i, HilbAcc& a) {
    thread_local std::vector<cplx> s;
    s.resize(dim);
    m.sections(i, s.data());
    const double d = g.norm2(s.data());
    if (!(d > 0) || !std::isfinite(d)) throw EvaluationFailure("D is not positive", m.rule().points[i]);
    const double f = m.weight(i) / d;
    for (const Entry& e : entries) a.t(e.c) += f * (s[e.a] * std::conj(s[e.b])).real();
    a.log_d += m.weight(i) * std::log(d);
  });
  if (log_d_sum) *log_d_sum = acc.log_d;
  return acc.t.cwiseQuotient(counts) * (dim / m.mass());
}

InvariantParams invert_invariant(const RVec& t, const Scheme& s) {
  const ClassTable& table = class_table(s);
  const HermitianForm tf(expand_values(table, t));
  return contract_params(invert(tf).entries(), s, 1e-8);
}

double log_det(const InvariantParams& p) {
  const CMat l = cholesky(expand_params(p).entries());
  double s = 0.0;
  for (int i = 0; i < l.rows(); ++i) s += 2.0 * std::log(l(i, i).real());
  return s;
}

double psi_from(double log_d_sum, const InvariantParams& p, const NuModel& m) {
  return log_d_sum - m.mass() / m.dim() * log_det(p);
}

}  // namespace

RVec hilb_nu_invariant(const InvariantParams& p, const NuModel& m) { return hilb_invariant_impl(p, m, nullptr); }

InvariantParams t_nu_step(const InvariantParams& p, const NuModel& m) {
  return invert_invariant(hilb_nu_invariant(p, m), p.scheme);
}

InvariantParams t_nu_step_k3(const InvariantParams& p, const NuModel& m) {
  if (!p.scheme.is_k3()) throw SchemeMismatch("t_nu_step_k3 needs a K3 scheme");
  return t_nu_step(p, m);
}

CMat hilb_nu_dense(const InvariantParams& p, const std::vector<SurfacePoint>& pts, const std::vector<double>& weights) {
  if (!p.scheme.is_k3()) throw SchemeMismatch("dense route is for K3 schemes");
  const ClassTable& t = class_table(p.scheme);
  const HermitianForm ginv = expand_params(p);
  const int dim = t.basis.size();
  double mass = 0.0;
  for (double w : weights) mass += w;
  CMat acc = block_reduce(pts.size(), CMat(CMat::Zero(dim, dim)), [&](std::size_t i, CMat& a) {
    CVec s(dim);
    eval_sections(t.basis, pts[i], s.data());
    const double d = eval_D(ginv, s);
    a.noalias() += (weights[i] / d) * s * s.adjoint();
  });
  acc *= dim / mass;
  return 0.5 * (acc + acc.adjoint());
}

InvariantParams t_nu_step_dense(const InvariantParams& p, const std::vector<SurfacePoint>& pts,
                                const std::vector<double>& weights, double tau_sym) {
  const HermitianForm tf(hilb_nu_dense(p, pts, weights));
  return contract_params(invert(tf).entries(), p.scheme, tau_sym);
}

void orbit_points(const NuModel& m, std::vector<SurfacePoint>& pts, std::vector<double>& weights) {
  pts.clear();
  weights.clear();
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<SurfacePoint> orbit = gamma_orbit(m.points()[i]);
    const double w = m.weight(i) / static_cast<double>(orbit.size());
    for (const SurfacePoint& q : orbit) {
      pts.push_back(q);
      weights.push_back(w);
    }
  }
}

double trace_identity(const InvariantParams& ginv, const RVec& t) {
  const ClassTable& table = class_table(ginv.scheme);
  const CMat g = expand_values(table, ginv.values), tm = expand_values(table, t);
  return g.cwiseProduct(tm.transpose()).sum().real();
}

double psi_nu(const InvariantParams& p, const NuModel& m) {
  double log_d = 0.0;
  hilb_invariant_impl(p, m, &log_d);
  return psi_from(log_d, p, m);
}

FixedPointResult iterate_to_fixed_point(const InvariantParams& p0, const NuModel& m, double tol, int max_steps,
                                        int extra_steps) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  IterationTrace trace;
  InvariantParams cur = p0;
  InvariantParams result = p0;
  trace.params_by_step.push_back(cur);
  int remaining = -1;
  for (int step = 0; step < max_steps || remaining > 0; ++step) {
    double log_d = 0.0;
    const RVec t = hilb_invariant_impl(cur, m, &log_d);
    trace.psi_by_step.push_back(psi_from(log_d, cur, m));
    trace.trace_by_step.push_back(trace_identity(cur, t));
    InvariantParams next = invert_invariant(t, cur.scheme);
    trace.step_size.push_back(projective_distance(cur.values, next.values));
    trace.params_by_step.push_back(next);
    cur = next;
    if (remaining > 0) {
      --remaining;
      if (remaining == 0) break;
      continue;
    }
    if (trace.step_size.back() < tol) {
      trace.converged = true;
      result = cur;
      if (extra_steps <= 0) break;
      remaining = extra_steps;
    }
  }
  if (!trace.converged) result = cur;
  trace.psi_by_step.push_back(psi_nu(cur, m));
  return {result, trace};
}

SigmaFit fit_sigma(const std::vector<RVec>& xs) {
  const int n = static_cast<int>(xs.size()) - 1;
  if (n < 5) throw InsufficientDecay("need at least 6 iterates to fit a rate");
  std::vector<RVec> d(n);
  for (int r = 0; r < n; ++r) d[r] = xs[r + 1] - xs[r];
  const int first = n - (n + 2) / 3;
  std::vector<double> rs, ls;
  int last_used = -1;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int r = first; r < n; ++r) {
    const double nd = d[r].norm();
    if (nd < 1e3 * eps * xs[r + 1].norm()) continue;
    rs.push_back(r);
    ls.push_back(std::log(nd));
    last_used = r;
  }
  if (rs.size() < 2) throw InsufficientDecay("too few differences above the rounding floor");
  const double m = static_cast<double>(rs.size());
  double sr = 0, sl = 0, srr = 0, srl = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    sr += rs[i];
    sl += ls[i];
    srr += rs[i] * rs[i];
    srl += rs[i] * ls[i];
  }
  const double slope = (m * srl - sr * sl) / (m * srr - sr * sr);
  SigmaFit fit;
  fit.sigma = std::exp(slope);
  fit.used = static_cast<int>(rs.size());
  if (!(fit.sigma < 1.0)) throw InsufficientDecay("differences are not decaying");
  RVec dir = d[last_used];
  Eigen::Index imax = 0;
  dir.cwiseAbs().maxCoeff(&imax);
  const double pivot = std::abs(dir(0)) > 1e-8 * std::abs(dir(imax)) ? dir(0) : dir(imax);
  fit.direction = dir / pivot;
  return fit;
}

SigmaFit fit_sigma(const IterationTrace& trace) {
  std::vector<RVec> xs;
  for (const InvariantParams& p : trace.params_by_step) xs.push_back(p.values);
  return fit_sigma(xs);
}

std::vector<double> default_eta_edges(int k) {
  switch (k) {
    case 3: return {.4, .55, .7, .85, 1.0, 1.15, 1.3, 1.45};
    case 6: return {.7, .75, .8, .85, .9, .95, 1.0, 1.05};
    case 9: return {.88, .9, .92, .94, .96, .98, 1.0, 1.02};
    default: throw SchemeMismatch("no default histogram for k = " + std::to_string(k));
  }
}

std::vector<double> volume_ratios(const InvariantParams& p, const NuModel& m) {
  if (!p.scheme.is_k3() || !(p.scheme == m.scheme())) throw SchemeMismatch("volume ratios need a matching K3 model");
  const SparseForm g = SparseForm::from_params(p);
  std::vector<double> v(m.size());
  std::vector<std::exception_ptr> errors(m.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m.size()); ++i) {
    try {
      const double r = fs_volume_ratio_branch(g, section_jet(m.points()[i], p.scheme.k));
      if (!(r > 0) || !std::isfinite(r)) throw NotPositive("volume ratio is not positive");
      v[i] = r;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw EvaluationFailure(e.what(), m.rule().points[i]);
      }
    }
  return v;
}

namespace {
struct Sum2 {
  double a = 0.0, b = 0.0;
  Sum2& operator+=(const Sum2& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
};
}  // namespace

EtaReport eta_report(const InvariantParams& p, const NuModel& m, const std::vector<double>& edges) {
  if (!std::is_sorted(edges.begin(), edges.end())) throw std::invalid_argument("histogram edges must be sorted");
  EtaReport rep;
  const std::vector<double> v = volume_ratios(p, m);
  rep.total_fs_volume = block_reduce(m.size(), Sum2{}, [&](std::size_t i, Sum2& s) { s.a += m.weight(i) * v[i]; }).a;
  rep.normalizer = rep.total_fs_volume / m.mass();
  rep.eta_values.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) rep.eta_values[i] = v[i] / rep.normalizer;
  rep.max = *std::max_element(rep.eta_values.begin(), rep.eta_values.end());
  rep.min = *std::min_element(rep.eta_values.begin(), rep.eta_values.end());
  rep.mean_abs_dev = block_reduce(m.size(), Sum2{}, [&](std::size_t i, Sum2& s) {
                       s.a += m.weight(i) * std::abs(rep.eta_values[i] - 1.0);
                     }).a / m.mass();
  rep.edges = edges;
  rep.percentages.assign(edges.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto bin = std::upper_bound(edges.begin(), edges.end(), rep.eta_values[i]) - edges.begin();
    rep.percentages[bin] += m.weight(i);
  }
  for (double& x : rep.percentages) x *= 100.0 / m.mass();
  return rep;
}

EtaReport eta_report(const InvariantParams& p, const NuModel& m) {
  return eta_report(p, m, default_eta_edges(p.scheme.k));
}

EtaCoefficients eta_coefficients(const InvariantParams& p, const NuModel& m, const std::vector<double>* eta_values) {
  std::vector<double> own;
  if (!eta_values) {
    own = eta_report(p, m, {}).eta_values;
    eta_values = &own;
  }
  if (eta_values->size() != m.size()) throw std::invalid_argument("eta values do not match the rule");
  const ClassTable& t = m.table();
  const SparseForm g = SparseForm::from_params(p);
  RVec counts;
  const std::vector<Entry> entries = flatten(t, counts);
  std::vector<double> scale(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e)
    scale[e] = std::sqrt(p.values(t.class_of_diag[entries[e].a]) * p.values(t.class_of_diag[entries[e].b]));
  const int dim = m.dim();
  RVec acc = block_reduce(m.size(), RVec(RVec::Zero(t.size())), [&](std::size_t i, RVec& a) {
    thread_local std::vector<cplx> s;
    s.resize(dim);
    m.sections(i, s.data());
    const double f = m.weight(i) * ((*eta_values)[i] - 1.0) / g.norm2(s.data());
    for (std::size_t e = 0; e < entries.size(); ++e)
      a(entries[e].c) += f * scale[e] * (s[entries[e].a] * std::conj(s[entries[e].b])).real();
  });
  return {p.scheme, acc.cwiseQuotient(counts) * (dim / m.mass())};
}

InvariantParams refine_step(const InvariantParams& p, const EtaCoefficients& coeffs, double kappa) {
  if (!(kappa > 0 && kappa < kKappaBound)) throw std::invalid_argument("kappa must lie in (0, 2e)");
  if (!(coeffs.scheme == p.scheme)) throw SchemeMismatch("coefficients and parameters use different schemes");
  const ClassTable& t = class_table(p.scheme);
  const int n = t.basis.size();
  CMat e = CMat::Zero(n, n);
  for (int c = 0; c < t.size(); ++c)
    for (auto [a, b] : t.classes[c].entries) {
      const double s = std::sqrt(p.values(t.class_of_diag[a]) * p.values(t.class_of_diag[b]));
      e(a, b) = e(b, a) = coeffs.values(c) / s;
    }
  const CMat g = expand_params(p).entries();
  const CMat next = g + kappa * g * e * g;
  HermitianForm f(next);
  cholesky(f.entries());
  return contract_params(f.entries(), p.scheme, 1e-8);
}

}  // namespace kahler
