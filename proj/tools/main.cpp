#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kahler/bergman.hpp"
#include "kahler/cp1.hpp"
#include "kahler/iteration.hpp"
#include "kahler/k3.hpp"
#include "kahler/reduce.hpp"

#ifndef KAHLER_DATA_DIR
#define KAHLER_DATA_DIR "data"
#endif

using nlohmann::json;
using namespace kahler;

namespace {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Global {
  int threads = 0;
  std::string cache;
  std::string reference_table;
  std::string reference_file = std::string(KAHLER_DATA_DIR) + "/reference.json";
  std::string report;
};

struct RuleOpts {
  std::vector<int> n{20, 20, 14, 10};
  K3Config cfg;
};

std::ostringstream g_discard;
std::ostream* g_table = &std::cout;

// Tables go to stdout unless the JSON report takes it over.
std::ostream& out() { return *g_table; }

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void add_rule_options(CLI::App* cmd, RuleOpts& r) {
  cmd->add_option("--rule", r.n, "lattice parameters n_x n_p n_u n_w")->expected(4);
  cmd->add_option("--big-edge", r.cfg.big_edge, "big chart needs Re(x^6) above this");
  cmd->add_option("--small-edge", r.cfg.small_edge, "small chart needs Re(x^6), Re(y^6) below this");
  cmd->add_option("--c-x", r.cfg.c_x);
  cmd->add_option("--c-p", r.cfg.c_p);
  cmd->add_option("--c-u", r.cfg.c_u);
  cmd->add_option("--c-w", r.cfg.c_w);
  cmd->add_option("--p-radius", r.cfg.p_radius);
  cmd->add_option("--u-radius", r.cfg.u_radius);
  cmd->add_option("--w-radius", r.cfg.w_radius);
}

void check_rule(const RuleOpts& r) {
  if (r.n.size() != 4) throw ConfigError("--rule takes four integers");
  for (int v : r.n)
    if (v < 4) throw ConfigError("lattice parameters must be >= 4");
}

std::string rule_label(const RuleOpts& r) {
  std::string label = k3_rule_label(r.n[0], r.n[1], r.n[2], r.n[3]);
  const K3Config& c = r.cfg;
  const K3Config d;
  if (c.big_edge != d.big_edge || c.small_edge != d.small_edge || c.c_x != d.c_x || c.c_p != d.c_p ||
      c.c_u != d.c_u || c.c_w != d.c_w || c.p_radius != d.p_radius || c.u_radius != d.u_radius ||
      c.w_radius != d.w_radius || c.patch_inner != d.patch_inner || c.patch_outer != d.patch_outer ||
      c.sheet_halfwidth != d.sheet_halfwidth) {
    for (double v : {c.big_edge, c.small_edge, c.c_x, c.c_p, c.c_u, c.c_w, c.p_radius, c.u_radius, c.w_radius})
      label += "_" + num(v);
  }
  return label;
}

QuadratureRule k3_rule(const Global& g, const RuleOpts& r) {
  check_rule(r);
  return cached_rule(g.cache, rule_label(r), [&] { return build_k3_rule(r.n[0], r.n[1], r.n[2], r.n[3], r.cfg); });
}

json load_reference(const Global& g, const std::string& id) {
  std::ifstream in(g.reference_file);
  if (!in) throw ConfigError("cannot open reference file " + g.reference_file);
  json all = json::parse(in);
  if (!all.contains(id)) throw ConfigError("unknown reference table '" + id + "'");
  return all[id];
}

void require_table(const Global& g, std::initializer_list<const char*> ids) {
  if (g.reference_table.empty()) return;
  for (const char* id : ids)
    if (g.reference_table == id) return;
  std::string msg = "reference table '" + g.reference_table + "' does not belong to this command (choose from";
  for (const char* id : ids) msg += std::string(" ") + id;
  throw ConfigError(msg + ")");
}

void write_report(const Global& g, const json& j) {
  if (g.report.empty()) return;
  if (g.report == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(g.report);
  if (!out) throw ConfigError("cannot write report " + g.report);
  out << j.dump(2) << "\n";
}

// Scale making computed match reference in the geometric mean over the given indices.
double align_scale(const RVec& computed, const std::vector<double>& ref, const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) s += std::log(ref[i] / computed(i));
  return std::exp(s / static_cast<double>(idx.size()));
}

void side_by_side_header() { out() << "row,column,computed,reference,rel_diff\n"; }

void side_by_side(const std::string& row, const std::vector<std::string>& cols, const RVec& computed,
                  const std::vector<double>& ref) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const double c = computed(static_cast<Eigen::Index>(i));
    const double rel = ref[i] != 0.0 ? (c - ref[i]) / std::abs(ref[i]) : c;
    out() << row << "," << cols[i] << "," << num(c) << "," << num(ref[i]) << "," << num(rel) << "\n";
  }
}

// Values of a K3 reference row reordered to our class order.
RVec by_name(const Scheme& s, const json& names, const json& values) {
  const ClassTable& t = class_table(s);
  RVec v = RVec::Zero(t.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const int c = t.find(names[i].get<std::string>());
    if (c < 0) throw ConfigError("reference class " + names[i].get<std::string>() + " unknown");
    v(c) = values[i].get<double>();
  }
  return v;
}

std::vector<std::string> class_names(const Scheme& s) {
  std::vector<std::string> out;
  for (const ParamClass& c : class_table(s).classes) out.push_back(c.name);
  return out;
}

std::vector<int> diagonal_indices(const Scheme& s) {
  std::vector<int> out;
  const ClassTable& t = class_table(s);
  for (int c = 0; c < t.size(); ++c)
    if (t.classes[c].diagonal) out.push_back(c);
  return out;
}

void compare_params(const std::string& row, const InvariantParams& p, const RVec& ref) {
  std::vector<double> r(ref.data(), ref.data() + ref.size());
  const double s = align_scale(p.values, r, diagonal_indices(p.scheme));
  side_by_side(row, class_names(p.scheme), p.values * s, r);
}

json eta_json(const EtaReport& e) {
  return {{"max", e.max},       {"min", e.min},
          {"mean_abs_dev", e.mean_abs_dev}, {"normalizer", e.normalizer},
          {"total_fs_volume", e.total_fs_volume}, {"edges", e.edges},
          {"percentages", e.percentages}};
}

json params_json(const InvariantParams& p) {
  json j = json::object();
  const auto names = class_names(p.scheme);
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = p.values(static_cast<Eigen::Index>(i));
  return j;
}

// ---------------------------------------------------------------- toy

struct ToyOpts {
  std::string variant = "t";
  int k = 6;
  std::vector<double> start;
  int steps = 40;
  int resolution = 256;
};

int cmd_toy(const Global& g, const ToyOpts& o) {
  const ToyVariant v = o.variant == "t" ? ToyVariant::T : o.variant == "t_nu" ? ToyVariant::TNu : ToyVariant::TK;
  const std::string table = o.variant == "t" ? "toy_t" : o.variant == "t_nu" ? "toy_t_nu" : "toy_t_k";
  require_table(g, {"toy_t", "toy_t_nu", "toy_t_k"});
  if (!g.reference_table.empty() && g.reference_table != table)
    throw ConfigError("variant " + o.variant + " pairs with reference table " + table);
  if (o.k < 2) throw ConfigError("--k must be at least 2");
  if (v == ToyVariant::TK && o.k % 2) throw ConfigError("t_k needs even k");
  if (o.steps < 0) throw ConfigError("--steps must be non-negative");
  std::vector<double> start = o.start;
  if (start.empty()) {
    if (o.k != 6) throw ConfigError("--start is required for k != 6");
    start = {0.018, v == ToyVariant::T ? 0.495 : 0.5, 4.5, 54};
  }
  if (static_cast<int>(start.size()) != o.k / 2 + 1) throw ConfigError("--start needs floor(k/2)+1 entries");
  RVec half = Eigen::Map<const RVec>(start.data(), static_cast<Eigen::Index>(start.size()));
  const DiagMetric m0 = normalize_toy(DiagMetric::symmetric_completion(o.k, half));
  const std::vector<DiagMetric> it = toy_iterates(v, m0, o.steps, o.resolution);

  if (!g.reference_table.empty()) {
    const json ref = load_reference(g, table);
    side_by_side_header();
    std::vector<std::string> cols;
    for (int p = 0; p <= o.k / 2; ++p) cols.push_back("a_" + std::to_string(p));
    for (const json& row : ref["rows"]) {
      const int r = row["iterate"].get<int>();
      if (r > o.steps) continue;
      side_by_side(std::to_string(row["r"].get<int>()), cols, it[r].half(), row["a"].get<std::vector<double>>());
    }
  } else {
    out() << "r";
    for (int p = 0; p <= o.k / 2; ++p) out() << ",a_" << p;
    out() << "\n";
    for (std::size_t r = 0; r < it.size(); ++r) {
      out() << r;
      const RVec h = it[r].half();
      for (int p = 0; p < h.size(); ++p) out() << "," << num(h(p));
      out() << "\n";
    }
  }
  json rep = {{"variant", o.variant}, {"k", o.k}, {"steps", o.steps}};
  std::vector<RVec> xs;
  for (const DiagMetric& m : it) xs.push_back(m.half());
  try {
    const SigmaFit f = fit_sigma(xs);
    rep["sigma"] = f.sigma;
    rep["direction"] = std::vector<double>(f.direction.data(), f.direction.data() + f.direction.size());
  } catch (const InsufficientDecay& e) {
    rep["sigma"] = nullptr;
    rep["sigma_error"] = e.what();
  }
  write_report(g, rep);
  return 0;
}

// ---------------------------------------------------------------- k3-volume

int cmd_k3_volume(const Global& g, const RuleOpts& r) {
  require_table(g, {"k3_volume"});
  const QuadratureRule rule = k3_rule(g, r);
  const auto masses = chart_masses(rule);
  const auto counts = chart_counts(rule);
  const double analytic = analytic_volume();
  if (!g.reference_table.empty()) {
    const json ref = load_reference(g, "k3_volume");
    side_by_side_header();
    RVec a(2);
    a << analytic, lattice_integral_LI();
    side_by_side("analytic", {"volume", "L_I"}, a, {ref["analytic"].get<double>(), ref["L_I"].get<double>()});
    for (const json& t : ref["total"])
      if (t["n"].get<std::vector<int>>() == r.n)
        side_by_side("total", {"V"}, RVec::Constant(1, masses[0] + masses[1]), {t["value"].get<double>()});
    for (const json& t : ref["V1"])
      if (t["n"].get<std::vector<int>>() == std::vector<int>{r.n[0], r.n[1]})
        side_by_side("big", {"V1"}, RVec::Constant(1, masses[0]), {t["value"].get<double>()});
    for (const json& t : ref["V2"])
      if (t["n"].get<std::vector<int>>() == std::vector<int>{r.n[2], r.n[3]})
        side_by_side("small", {"V2"}, RVec::Constant(1, masses[1]), {t["value"].get<double>()});
  } else {
    out() << "quantity,value\n";
    out() << "analytic," << num(analytic) << "\n";
    out() << "L_I," << num(lattice_integral_LI()) << "\n";
    out() << "V1," << num(masses[0]) << "\n";
    out() << "V2," << num(masses[1]) << "\n";
    out() << "total," << num(masses[0] + masses[1]) << "\n";
    out() << "N1," << counts[0] << "\n";
    out() << "N2," << counts[1] << "\n";
  }
  write_report(g, {{"rule", rule.label},
                   {"analytic", analytic},
                   {"L_I", lattice_integral_LI()},
                   {"V1", masses[0]},
                   {"V2", masses[1]},
                   {"total", masses[0] + masses[1]},
                   {"N1", counts[0]},
                   {"N2", counts[1]}});
  return 0;
}

// ---------------------------------------------------------------- k3-balance

struct BalanceOpts {
  int k = 3;
  RuleOpts rule;
  double tol = kDefaultTol;
  int max_steps = 50;
  int extra_steps = 10;
  bool eta = false;
};

FixedPointResult balance(const NuModel& m, const BalanceOpts& o) {
  if (!(o.tol > 0)) throw ConfigError("--tol must be positive");
  if (o.max_steps < 1) throw ConfigError("--max-steps must be positive");
  return iterate_to_fixed_point(InvariantParams::ones(m.scheme()), m, o.tol, o.max_steps, o.extra_steps);
}

int cmd_k3_balance(const Global& g, const BalanceOpts& o) {
  require_table(g, {"k3_balance_3", "k3_balance_6", "k3_balance_9"});
  const Scheme s = Scheme::k3(o.k);
  if (!g.reference_table.empty() && g.reference_table != "k3_balance_" + std::to_string(o.k))
    throw ConfigError("reference table does not match k");
  const NuModel m(s, k3_rule(g, o.rule), o.rule.cfg);
  const FixedPointResult res = balance(m, o);
  const IterationTrace& tr = res.trace;

  if (!g.reference_table.empty()) {
    const json ref = load_reference(g, g.reference_table);
    side_by_side_header();
    if (ref.contains("rows") && o.rule.n == ref["rule"].get<std::vector<int>>())
      for (const json& row : ref["rows"]) {
        const std::size_t r = row["r"].get<std::size_t>();
        if (r < tr.params_by_step.size())
          compare_params(std::to_string(r), tr.params_by_step[r], by_name(s, ref["classes"], row["values"]));
      }
    const char* key = ref.contains("balanced") ? "balanced" : "fixed_point";
    compare_params("balanced", res.params, by_name(s, ref["classes"], ref[key]));
  } else {
    out() << "r";
    for (const std::string& n : class_names(s)) out() << "," << n;
    out() << ",psi,trace,step\n";
    for (std::size_t r = 0; r < tr.params_by_step.size(); ++r) {
      out() << r;
      for (int c = 0; c < tr.params_by_step[r].size(); ++c) out() << "," << num(tr.params_by_step[r][c]);
      out() << "," << num(tr.psi_by_step[r]);
      out() << "," << (r > 0 ? num(tr.trace_by_step[r - 1]) : "");
      out() << "," << (r > 0 ? num(tr.step_size[r - 1]) : "") << "\n";
    }
  }
  json rep = {{"k", o.k}, {"rule", m.rule().label}, {"converged", tr.converged}, {"params", params_json(res.params)}};
  try {
    const SigmaFit f = fit_sigma(tr);
    rep["sigma"] = f.sigma;
    rep["laplacian_estimate"] = -2.0 * std::sqrt(static_cast<double>(m.dim())) * std::log(f.sigma);
  } catch (const InsufficientDecay& e) {
    rep["sigma"] = nullptr;
    rep["sigma_error"] = e.what();
  }
  if (o.eta) rep["eta"] = eta_json(eta_report(res.params, m));
  write_report(g, rep);
  if (!tr.converged) {
    std::cerr << "no convergence within " << o.max_steps << " steps\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------- k3-refine

struct RefineOpts {
  BalanceOpts balance;
  std::vector<double> kappa{2.5};
  int steps = 5;
};

int cmd_k3_refine(const Global& g, const RefineOpts& o) {
  require_table(g, {"k3_refine_6"});
  if (o.steps < 0) throw ConfigError("--steps must be non-negative");
  if (o.kappa.empty()) throw ConfigError("--kappa needs at least one value");
  for (double k : o.kappa)
    if (!(k > 0 && k < kKappaBound)) throw ConfigError("kappa must lie in (0, 2e)");
  const Scheme s = Scheme::k3(o.balance.k);
  if (!g.reference_table.empty() && s.k != 6) throw ConfigError("k3_refine_6 needs --k 6");
  const NuModel m(s, k3_rule(g, o.balance.rule), o.balance.rule.cfg);
  BalanceOpts bo = o.balance;
  bo.extra_steps = 0;
  const FixedPointResult bal = balance(m, bo);
  if (!bal.trace.converged) {
    std::cerr << "balanced metric did not converge\n";
    return 3;
  }
  std::vector<InvariantParams> ps{bal.params};
  std::vector<EtaReport> reps;
  std::vector<EtaCoefficients> coeffs;
  for (int r = 0; r <= o.steps; ++r) {
    reps.push_back(eta_report(ps.back(), m));
    coeffs.push_back(eta_coefficients(ps.back(), m, &reps.back().eta_values));
    if (r == o.steps) break;
    const double kappa = o.kappa[std::min<std::size_t>(r, o.kappa.size() - 1)];
    ps.push_back(refine_step(ps.back(), coeffs.back(), kappa));
  }
  const auto names = class_names(s);
  if (!g.reference_table.empty()) {
    const json ref = load_reference(g, "k3_refine_6");
    side_by_side_header();
    for (std::size_t r = 0; r < ps.size() && r < ref["params"].size(); ++r) {
      compare_params("params_" + std::to_string(r), ps[r], by_name(s, ref["classes"], ref["params"][r]));
      std::vector<std::string> eta_cols;
      for (const auto& n : names) eta_cols.push_back("eta_" + n);
      const RVec want = by_name(s, ref["classes"], ref["eta_coefficients_e3"][r]);
      side_by_side("eta_e3_" + std::to_string(r), eta_cols, coeffs[r].values * 1e3,
                   std::vector<double>(want.data(), want.data() + want.size()));
      RVec st(3);
      st << reps[r].max, reps[r].min, reps[r].mean_abs_dev;
      side_by_side("stats_" + std::to_string(r), {"max", "min", "mean_abs_dev"}, st,
                   {ref["max"][r].get<double>(), ref["min"][r].get<double>(), ref["mean_abs_dev"][r].get<double>()});
    }
  } else {
    out() << "r";
    for (const auto& n : names) out() << "," << n;
    out() << ",max,min,mean_abs_dev";
    for (const auto& n : names) out() << ",eta_" << n;
    out() << "\n";
    for (std::size_t r = 0; r < ps.size(); ++r) {
      out() << r;
      for (int c = 0; c < ps[r].size(); ++c) out() << "," << num(ps[r][c]);
      out() << "," << num(reps[r].max) << "," << num(reps[r].min) << "," << num(reps[r].mean_abs_dev);
      for (int c = 0; c < ps[r].size(); ++c) out() << "," << num(coeffs[r].values(c));
      out() << "\n";
    }
  }
  json steps = json::array();
  for (std::size_t r = 0; r < ps.size(); ++r) {
    json e = eta_json(reps[r]);
    e["params"] = params_json(ps[r]);
    e["eta_coefficients"] = std::vector<double>(coeffs[r].values.data(), coeffs[r].values.data() + coeffs[r].values.size());
    steps.push_back(e);
  }
  write_report(g, {{"k", s.k}, {"rule", m.rule().label}, {"kappa", o.kappa}, {"steps", steps}});
  return 0;
}

// ---------------------------------------------------------------- k3-spectrum

struct SpectrumOpts {
  BalanceOpts balance;
  int cp1 = 0;
  bool cross_check = false;
};

void print_q(const InvariantQMatrix& q) {
  out() << "row";
  for (const auto& b : q.basis) out() << "," << b;
  out() << "\n";
  for (int i = 0; i < q.entries.rows(); ++i) {
    out() << q.basis[i];
    for (int j = 0; j < q.entries.cols(); ++j) out() << "," << num(100.0 * q.entries(i, j));
    out() << "\n";
  }
}

json spectral_json(const SpectralReport& r) {
  json lam = json::array();
  for (const auto& l : r.lambdas) lam.push_back(l ? json(*l) : json(nullptr));
  std::vector<int> neg;
  for (bool b : r.negative) neg.push_back(b ? 1 : 0);
  return {{"chis", r.chis}, {"k_prime", r.k_prime}, {"lambdas", lam}, {"negative", neg}};
}

int cmd_k3_spectrum(const Global& g, const SpectrumOpts& o) {
  require_table(g, {"k3_spectrum_6", "cp1_spectrum"});
  if (o.cp1 > 0) {
    if (!g.reference_table.empty() && g.reference_table != "cp1_spectrum") throw ConfigError("use cp1_spectrum here");
    const int k = o.cp1;
    const InvariantParams round(Scheme::cp1(k), DiagMetric::round(k).a);
    const InvariantQMatrix q = q_tilde(round);
    const SpectralReport sp = spectrum(q, 1);
    json rep = spectral_json(sp);
    std::vector<double> chis;
    for (int mm = 0; mm <= k; ++mm) chis.push_back(chi(mm, k));
    rep["chi_closed_form"] = chis;
    if (!g.reference_table.empty()) {
      const json ref = load_reference(g, "cp1_spectrum");
      side_by_side_header();
      for (const json& l : ref["lambda"]) {
        const int mm = l["m"].get<int>(), kk = l["k"].get<int>();
        side_by_side("lambda_" + std::to_string(mm) + "_" + std::to_string(kk), {"lambda"},
                     RVec::Constant(1, lambda_mk(mm, kk)), {l["value"].get<double>()});
      }
      side_by_side("chi_2_6", {"chi"}, RVec::Constant(1, chi(2, 6)), {ref["chi_2_6"].get<double>()});
    } else {
      out() << "m,chi_closed_form,lambda_closed_form\n";
      for (int mm = 0; mm <= k; ++mm) out() << mm << "," << num(chi(mm, k)) << "," << num(lambda_mk(mm, k)) << "\n";
    }
    write_report(g, rep);
    return 0;
  }
  const Scheme s = Scheme::k3(o.balance.k);
  if (g.reference_table == "k3_spectrum_6" && s.k != 6) throw ConfigError("k3_spectrum_6 needs --k 6");
  const NuModel m(s, k3_rule(g, o.balance.rule), o.balance.rule.cfg);
  const FixedPointResult bal = balance(m, o.balance);
  if (!bal.trace.converged) {
    std::cerr << "balanced metric did not converge\n";
    return 3;
  }
  const InvariantQMatrix q = q_tilde(bal.params);
  const SpectralReport sp = spectrum(q, 2);
  json rep = spectral_json(sp);
  rep["basis"] = q.basis;
  rep["raw_asymmetry"] = q.raw_asymmetry;
  try {
    const SigmaFit f = fit_sigma(bal.trace);
    rep["sigma"] = f.sigma;
    rep["laplacian_estimate_from_sigma"] = -2.0 * sp.k_prime * std::log(f.sigma);
  } catch (const InsufficientDecay& e) {
    rep["sigma_error"] = e.what();
  }
  if (o.cross_check) {
    const InvariantQMatrix qd = q_direct(bal.params, m);
    rep["direct"] = spectral_json(spectrum(qd, 2));
    rep["direct_vs_tilde_max_abs"] = (qd.entries - q.entries).cwiseAbs().maxCoeff();
  }
  if (!g.reference_table.empty()) {
    const json ref = load_reference(g, "k3_spectrum_6");
    side_by_side_header();
    if (ref["basis"].get<std::vector<std::string>>() != q.basis) throw ConfigError("reference basis order differs");
    const auto& upper = ref["q_tilde_upper_e2"];
    for (int i = 0; i < q.entries.rows(); ++i) {
      std::vector<std::string> cols;
      std::vector<double> want;
      RVec got(q.entries.cols() - i);
      for (int j = i; j < q.entries.cols(); ++j) {
        cols.push_back(q.basis[j]);
        want.push_back(upper[i][j - i].get<double>());
        got(j - i) = 100.0 * q.entries(i, j);
      }
      side_by_side("q_" + q.basis[i], cols, got, want);
    }
    const auto eig = ref["eigenvalues"].get<std::vector<double>>();
    RVec got(static_cast<Eigen::Index>(eig.size()));
    std::vector<std::string> cols;
    for (std::size_t i = 0; i < eig.size(); ++i) {
      got(static_cast<Eigen::Index>(i)) = sp.chis[i];
      cols.push_back("chi_" + std::to_string(i + 1));
    }
    side_by_side("eigenvalues", cols, got, eig);
    const auto lam = ref["lambdas"].get<std::vector<double>>();
    RVec gl(3);
    for (int i = 0; i < 3; ++i) gl(i) = sp.lambdas[i + 1].value_or(NAN);
    side_by_side("lambdas", {"lambda_2", "lambda_3", "lambda_4"}, gl, lam);
  } else {
    print_q(q);
  }
  write_report(g, rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced metrics, refined approximations and Q spectra on CP1 and the sextic K3 double plane"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values (sections per subcommand)");
  Global g;
  app.add_option("--threads", g.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--cache", g.cache, "directory for quadrature rule caches");
  app.add_option("--reference-table", g.reference_table, "print computed values next to a stored reference table");
  app.add_option("--reference-file", g.reference_file, "reference values (JSON)");
  app.add_option("--report", g.report, "write the JSON report here ('-' for stdout instead of the table)");

  ToyOpts toy;
  auto* c_toy = app.add_subcommand("toy", "iterate T, T_nu or T_K on invariant metrics of O(k) over CP1");
  c_toy->add_option("--variant", toy.variant)->check(CLI::IsMember({"t", "t_nu", "t_k"}));
  c_toy->add_option("--k", toy.k);
  c_toy->add_option("--start", toy.start, "a_0..a_{k/2} (completed by a_p = a_{k-p})");
  c_toy->add_option("--steps", toy.steps);
  c_toy->add_option("--resolution", toy.resolution, "Gauss-Legendre nodes in the radial variable")
      ->check(CLI::Range(2, 100000));

  RuleOpts vol;
  vol.n = {20, 20, 14, 10};
  auto* c_vol = app.add_subcommand("k3-volume", "quadrature and analytic volume of the K3 surface");
  add_rule_options(c_vol, vol);

  BalanceOpts bal;
  auto* c_bal = app.add_subcommand("k3-balance", "nu-balanced metric by T_nu iteration");
  auto add_balance = [](CLI::App* c, BalanceOpts& b) {
    c->add_option("--k", b.k)->check(CLI::IsMember({3, 6, 9}));
    add_rule_options(c, b.rule);
    c->add_option("--tol", b.tol, "projective step size for convergence");
    c->add_option("--max-steps", b.max_steps);
    c->add_option("--extra-steps", b.extra_steps, "steps past convergence used for the rate fit");
  };
  add_balance(c_bal, bal);
  c_bal->add_flag("--eta", bal.eta, "include eta statistics of the balanced metric");

  RefineOpts ref;
  ref.balance.k = 6;
  auto* c_ref = app.add_subcommand("k3-refine", "refinement steps driven by eta-coefficients");
  add_balance(c_ref, ref.balance);
  c_ref->add_option("--kappa", ref.kappa, "step sizes; the last one repeats");
  c_ref->add_option("--steps", ref.steps);

  SpectrumOpts spec;
  spec.balance.k = 6;
  auto* c_spec = app.add_subcommand("k3-spectrum", "algebraic Q on the invariant subspace and Laplacian estimates");
  add_balance(c_spec, spec.balance);
  c_spec->add_option("--cp1", spec.cp1, "closed-form CP1 spectrum for O(k) instead");
  c_spec->add_flag("--cross-check", spec.cross_check, "also build Q by quadrature");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    set_threads(g.threads);
    if (g.report == "-") g_table = &g_discard;
    if (c_toy->parsed()) return cmd_toy(g, toy);
    if (c_vol->parsed()) return cmd_k3_volume(g, vol);
    if (c_bal->parsed()) return cmd_k3_balance(g, bal);
    if (c_ref->parsed()) return cmd_k3_refine(g, ref);
    if (c_spec->parsed()) return cmd_k3_spectrum(g, spec);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "reference file error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
