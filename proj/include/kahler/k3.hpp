#pragma once

#include <array>
#include <vector>

#include "kahler/linalg.hpp"
#include "kahler/params.hpp"
#include "kahler/quadrature.hpp"

namespace kahler {

struct OutsideDomain : std::domain_error {
  using std::domain_error::domain_error;
};
struct NearBranchSingularity : NumericalError {
  using NumericalError::NumericalError;
};
struct NotPositive : NumericalError {
  using NumericalError::NumericalError;
};

// Point of w^2 = x^6 + y^6 + z^6 in weighted homogeneous coordinates; chart points have z = 1.
struct SurfacePoint {
  cplx x, y, w;
  cplx z = 1.0;
  ChartId chart = ChartId::Big;
  cplx c1, c2;  // chart coordinates: (x, p) or (u, w)
};

double surface_residual(const SurfacePoint& pt);

// Lattice and partition constants. Defaults reproduce the reference volume split.
struct K3Config {
  double big_edge = -0.531;   // big chart requires Re(x^6) above this
  double small_edge = -0.117;  // small chart requires Re(x^6), Re(y^6) below this
  double patch_inner = 1.0;   // |x|, |y| where the permutation partition starts to fall off
  double patch_outer = 1.2;
  double sheet_halfwidth = 0.5;  // transition of the sheet partition in Re(1 + p^6)
  double c_x = 1.5, c_p = 1.5;   // hexagonal spacings c_x / n_x, c_p / n_p
  double c_u = 2.0, c_w = 2.0;   // square spacings c_u / n_u, c_w / n_w
  double p_radius = 1.25;
  double u_radius = 6.0;
  double w_radius = 2.7;
};

SurfacePoint big_chart_point(cplx x, cplx p, const K3Config& cfg = {});
SurfacePoint small_chart_point(cplx u, cplx w, const K3Config& cfg = {});
SurfacePoint chart_point(const QuadPoint& q, const K3Config& cfg = {});

// F with theta = F d(chart1) d(chart2); |F|^2 against (i dz dz-bar) per coordinate.
cplx theta_density(const SurfacePoint& pt);

double smoothstep(double t);

struct CutoffWeights {
  double big_x = 0.0;  // chart based on x
  double big_y = 0.0;  // its image under x <-> y
  double small = 0.0;  // all small-chart images together
};
CutoffWeights cutoff_weights(const SurfacePoint& pt, const K3Config& cfg = {});
// Total big-chart weight; big + small = 1.
double cutoff_weight(const SurfacePoint& pt, const K3Config& cfg = {});
// Weight of the affine patch z = 1 among its three coordinate-permutation images.
double patch_weight(const SurfacePoint& pt, const K3Config& cfg = {});

QuadratureRule build_k3_rule(int n_x, int n_p, int n_u, int n_w, const K3Config& cfg = {});
std::string k3_rule_label(int n_x, int n_p, int n_u, int n_w);
// Masses of the two chart families.
std::array<double, 2> chart_masses(const QuadratureRule& rule);
std::array<std::size_t, 2> chart_counts(const QuadratureRule& rule);

double lattice_integral_LI(int nodes = 64);
double analytic_volume(int nodes = 64);

std::vector<SurfacePoint> surface_points(const QuadratureRule& rule, const K3Config& cfg = {});

// All 864 images of a point under the symmetry group (with repeats when the point has a stabilizer).
std::vector<SurfacePoint> gamma_orbit(const SurfacePoint& pt);

struct SectionJet {
  int k = 0;
  CVec r_plus, r_minus;       // x^p y^q and w x^p y^q
  CVec v_plus_x, v_plus_y;    // derivatives of x^p y^q
  CVec v_minus, v_minus_x, v_minus_y;
  CVec r, r_x, r_y;           // full vector and its derivatives (w differentiated)
  CVec delta_x, delta_y;      // derivatives with w held fixed
  cplx f_x, f_y, w;
};

// Values of the section basis at a point (homogeneous, so z may differ from 1).
void eval_sections(const SectionBasis& b, const SurfacePoint& pt, cplx* out);
SectionJet section_jet(const SurfacePoint& pt, int k);

// Sparse Hermitian form on section vectors: <u, v> = sum G^{ab} u_a conj(v_b).
struct SparseForm {
  int dim = 0;
  RVec diag;
  std::vector<int> row, col;  // row < col
  std::vector<cplx> val;
  int n_plus = 0;  // size of the big-triangle block

  static SparseForm from_dense(const CMat& m, int n_plus, double drop = 0.0);
  static SparseForm from_params(const InvariantParams& p);
  cplx inner(const cplx* u, const cplx* v) const;
  double norm2(const cplx* u) const { return inner(u, u).real(); }
  // Restricted to one block: plus (indices < n_plus) or minus (re-indexed from n_plus).
  cplx inner_plus(const cplx* u, const cplx* v) const;
  cplx inner_minus(const cplx* u, const cplx* v) const;
};

inline constexpr double kFsVolumeConstant = 2.0;

double fs_volume_ratio_det(const SparseForm& g, const SectionJet& jet);
double fs_volume_ratio_branch(const SparseForm& g, const SectionJet& jet);
double fs_volume_ratio(const HermitianForm& ginv, int k, const SurfacePoint& pt);

}  // namespace kahler
