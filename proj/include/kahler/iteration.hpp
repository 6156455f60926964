#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kahler/k3.hpp"
#include "kahler/params.hpp"
#include "kahler/quadrature.hpp"

namespace kahler {

struct MaxStepsExceeded : NumericalError {
  using NumericalError::NumericalError;
};
struct InsufficientDecay : NumericalError {
  using NumericalError::NumericalError;
};

// A quadrature rule together with the section basis of a scheme, evaluated pointwise.
// CP1 schemes take sphere rules (sections x^p); K3 schemes take K3 rules.
class NuModel {
 public:
  NuModel(const Scheme& s, QuadratureRule rule, const K3Config& cfg = {});

  const Scheme& scheme() const { return scheme_; }
  const QuadratureRule& rule() const { return rule_; }
  const ClassTable& table() const { return *table_; }
  const K3Config& config() const { return cfg_; }
  int dim() const { return table_->basis.size(); }
  std::size_t size() const { return rule_.size(); }
  double mass() const { return rule_.total_mass; }
  double weight(std::size_t i) const { return rule_.points[i].weight; }
  void sections(std::size_t i, cplx* out) const;
  // Surface points of a K3 model (empty for CP1).
  const std::vector<SurfacePoint>& points() const { return points_; }

 private:
  Scheme scheme_;
  QuadratureRule rule_;
  K3Config cfg_;
  const ClassTable* table_;
  std::vector<SurfacePoint> points_;
};

// Class averages of R int s s^* / D dnu with R = (N+1)/mass: the invariant entries of T_nu(G).
RVec hilb_nu_invariant(const InvariantParams& p, const NuModel& m);
// One T_nu step in parameter space: integrate, invert, contract.
InvariantParams t_nu_step(const InvariantParams& p, const NuModel& m);
InvariantParams t_nu_step_k3(const InvariantParams& p, const NuModel& m);

// Dense route: full Hermitian T_nu(G) over arbitrary homogeneous points with weights.
CMat hilb_nu_dense(const InvariantParams& p, const std::vector<SurfacePoint>& pts, const std::vector<double>& weights);
// Contracts the dense matrix's inverse; throws NotInvariant above tau_sym.
InvariantParams t_nu_step_dense(const InvariantParams& p, const std::vector<SurfacePoint>& pts,
                                const std::vector<double>& weights, double tau_sym = 1e-6);
// Every rule point replaced by its full group orbit, each image with weight w/864.
void orbit_points(const NuModel& m, std::vector<SurfacePoint>& pts, std::vector<double>& weights);

// sum_ab G^{ab} T_ba for T = expanded t (should be N+1).
double trace_identity(const InvariantParams& ginv, const RVec& t);

// sum w log D + mass/(N+1) log det G (up to a rule-dependent constant).
double psi_nu(const InvariantParams& p, const NuModel& m);

struct IterationTrace {
  std::vector<InvariantParams> params_by_step;
  std::vector<double> psi_by_step;
  std::vector<double> trace_by_step;  // trace identity of each T_nu output
  std::vector<double> step_size;      // projective distance between consecutive entries
  bool converged = false;
  std::optional<double> sigma;
  std::optional<RVec> direction;
};

struct FixedPointResult {
  InvariantParams params;
  IterationTrace trace;
};

inline constexpr double kDefaultTol = 5e-5;

// Iterates T_nu until consecutive iterates are within tol projectively. On hitting max_steps
// the best-so-far is returned with trace.converged = false. extra_steps continue past
// convergence (for rate fitting) without changing the returned parameters.
FixedPointResult iterate_to_fixed_point(const InvariantParams& p0, const NuModel& m, double tol = kDefaultTol,
                                        int max_steps = 50, int extra_steps = 0);

struct SigmaFit {
  double sigma = 0.0;
  RVec direction;  // first entry 1
  int used = 0;    // number of differences in the fit
};

// Geometric-rate fit on successive differences x_{r+1} - x_r: least squares on log norms over
// the last third, skipping differences at the rounding floor.
SigmaFit fit_sigma(const std::vector<RVec>& iterates);
SigmaFit fit_sigma(const IterationTrace& trace);

struct EtaReport {
  double max = 0.0, min = 0.0;
  double mean_abs_dev = 0.0;
  std::vector<double> edges;        // interior bin edges
  std::vector<double> percentages;  // edges.size() + 1 bins
  std::vector<double> eta_values;
  double normalizer = 0.0;       // mass-weighted mean of mu / nu
  double total_fs_volume = 0.0;  // int V dnu
};

std::vector<double> default_eta_edges(int k);
// Volume ratios mu/nu at every point of a K3 model.
std::vector<double> volume_ratios(const InvariantParams& p, const NuModel& m);
EtaReport eta_report(const InvariantParams& p, const NuModel& m, const std::vector<double>& edges);
EtaReport eta_report(const InvariantParams& p, const NuModel& m);

struct EtaCoefficients {
  Scheme scheme;
  RVec values;
};

// R sqrt(a_alpha a_beta) int (eta - 1) Re(s_alpha conj s_beta) / D dnu, averaged over each class,
// with R = dim / mass. eta_values may be passed to avoid recomputing them.
EtaCoefficients eta_coefficients(const InvariantParams& p, const NuModel& m,
                                 const std::vector<double>* eta_values = nullptr);

// G^{-1} <- G^{-1} + kappa G^{-1} E G^{-1}, E_ab = eta_class / sqrt(a_a a_b) on every class slot.
InvariantParams refine_step(const InvariantParams& p, const EtaCoefficients& coeffs, double kappa);

inline constexpr double kKappaBound = 2.0 * 2.718281828459045;

}  // namespace kahler
