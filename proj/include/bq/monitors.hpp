// A priori bounds and pointwise inequalities evaluated on snapshots: margins
// (bound minus measured value), measured constants, and the diagnostics CSV.
#pragma once

#include "bq/solver.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bq {

// ---------------------------------------------------------------------------
// Index window

/// (23 - sqrt 145) / 12, the threshold above which 2/(3 alpha - 2) < q0.
double alpha0();

struct IndexWindow {
  double alpha = 0.0;
  double q0 = 0.0;     // (8 - 4 alpha) / (8 - 7 alpha)
  double q_low = 0.0;  // 2 / (2 alpha - 1): lower end of the Besov-bound range q_low < q < q0
  double q_lip = 0.0;  // 2 / (3 alpha - 2): q above this lets B^s_{q,inf}, s near 3 alpha - 2, embed in Lipschitz
  double s_max = 0.0;  // 3 alpha - 2
  double alpha0 = 0.0;
  bool valid = false;  // q_lip < q0 and s_max > 0, i.e. alpha > alpha0
};

/// Requires alpha in (4/5, 1).
IndexWindow index_window(double alpha);

/// 2 < q < q0; throws naming the violated constraint.
void validate_lq_index(const IndexWindow& w, double q);
/// 0 < s <= 3 alpha - 2 and 2/(2 alpha - 1) < q < q0; throws naming the violated constraint.
void validate_besov_indices(const IndexWindow& w, double q, double s);

// ---------------------------------------------------------------------------
// Bounds along a trajectory

struct MaxPrincipleMargin {
  double l2 = 0.0;    // |theta0|_2 - |theta(t)|_2
  double linf = 0.0;  // |theta0|_inf - |theta(t)|_inf
};
MaxPrincipleMargin max_principle_margin(double theta_l2, double theta_linf, double theta0_l2, double theta0_linf);
/// True when a margin falls below -1e-6 |theta0| (1 + t).
bool max_principle_violated(const MaxPrincipleMargin& m, double theta0_l2, double theta0_linf, double t);

struct EnergyMargin {
  double linear = 0.0;   // |u0|_2 + t |theta0|_2 - |u(t)|_2
  double squared = 0.0;  // (|u0|^2 + t |theta0|^2)^2 - (|u(t)|^2 + int_0^t |Lambda^{alpha/2} u|^2), reported only
};
EnergyMargin energy_margin(double u_l2, double diss_u_accum, double t, double u0_l2, double theta0_l2);

/// |G|_2^2 + int_0^t |Lambda^{alpha/2} G|^2.
double G_l2_quantity(double G_l2, double diss_G_accum);

struct GradThetaDiagnostics {
  double grad_theta_linf = 0.0;
  double M_tilde = 0.0;  // |grad u~|_inf, u~ = grad-perp Delta^{-1} G (pointwise Frobenius norm)
};
GradThetaDiagnostics grad_theta_monitor(const SimState& s, double alpha);

// ---------------------------------------------------------------------------
// Pointwise inequalities

struct ConvexFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
};
ConvexFunction gamma_power(int p);  // |x|^{2p}
ConvexFunction gamma_smoothed_hinge(double corner = 0.2, double eps = 0.1);
ConvexFunction gamma_linear();
std::vector<ConvexFunction> cordoba_gamma_set();

struct PointwiseMargin {
  double min = 0.0;    // minimum over the grid
  double scale = 0.0;  // max |first term| + max |second term|; tolerances are relative to this
};

/// min over the grid of Gamma'(f) Lambda^beta f - Lambda^beta Gamma(f), beta in (0, 2].
PointwiseMargin cordoba_margin(const PhysicalField& f, double beta, const ConvexFunction& gamma);

/// c_{2,beta} = 2^beta Gamma(1 + beta/2) / (pi |Gamma(-beta/2)|): g Lambda^beta g - Lambda^beta(g^2)/2
/// = (c/2) int (g(x) - g(y))^2 / |x - y|^{2+beta} dy.
double fractional_kernel_constant(double beta);

/// D(g)(x) = (c/2) sum_y |g(x) - g(y)|^2 / |x - y|^{2+beta} h^2 over nearest-image 0 < |x - y| <= radius.
PhysicalField dissipation_quadrature(const std::vector<PhysicalField>& g, double beta, double radius);

struct LowerBoundReport {
  PointwiseMargin exact_part;  // g . Lambda^beta g - Lambda^beta |g|^2 / 2
  double empirical_constant = 0.0;
};

/// g = grad f. empirical_constant = C0 = max_x |grad f|^{2+gamma} / (|f|_q^gamma (exact - D/2)),
/// gamma = beta q / (q + 2), with D truncated at L/4.
/// With measure_constant = false only the exact part is evaluated.
LowerBoundReport gradient_lower_bound_margin(const PhysicalField& f, double beta, double q,
                                             bool measure_constant = true);

/// g = theta(. + h) - theta for a grid shift h = (a, b) cells. empirical_constant =
/// min_x (exact - D/2) |theta|_inf^beta |h|^beta / |g|^{2+beta} over points with g != 0.
LowerBoundReport difference_lower_bound_margin(const PhysicalField& theta, int a, int b, double beta,
                                               bool measure_constant = true);

// ---------------------------------------------------------------------------
// Diagnostics records

struct DiagnosticsRecord {
  double t = 0.0;
  double theta_l2 = 0.0, theta_linf = 0.0;
  double u_l2 = 0.0, omega_linf = 0.0, grad_theta_linf = 0.0;
  double G_l2 = 0.0, G_lq = 0.0, q = 2.0, G_besov = 0.0, s = 0.5;
  double diss_u_accum = 0.0, diss_G_accum = 0.0;
  double margin_maxprinciple_l2 = 0.0, margin_maxprinciple_linf = 0.0, margin_energy_linear = 0.0;
  double cordoba_min = 0.0;
  double oss_delta_measured = 0.0;
};

const std::vector<std::string>& diagnostics_columns();
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const DiagnosticsRecord& r);
/// %.17g, which round-trips every double.
std::string format_double(double v);

struct MonitorSettings {
  double q = 2.0;
  double s = 0.5;
  double oss_L = 0.1;
};

/// Resolves monitor indices: given values are validated against the window (throws); missing
/// values default to the window midpoint / s_max when the window exists, else q = 2, s = 0.5.
MonitorSettings resolve_monitor_settings(double alpha, std::optional<double> q, std::optional<double> s,
                                         double oss_L);

/// Reference norms at t = 0 and the running dissipation integrals (trapezoid rule per step).
struct DiagnosticsState {
  double theta0_l2 = 0.0, theta0_linf = 0.0, u0_l2 = 0.0;
  double diss_u_accum = 0.0, diss_G_accum = 0.0;
  double last_t = 0.0, last_diss_u = 0.0, last_diss_G = 0.0;
};

DiagnosticsState start_diagnostics(const SimState& s0, const FlowParams& p);
/// Adds the trapezoid contribution from last_t to s.t.
void accumulate_dissipation(DiagnosticsState& d, const SimState& s, const FlowParams& p);
DiagnosticsRecord diagnose(const SimState& s, const FlowParams& p, const MonitorSettings& m, const DiagnosticsState& d);

}  // namespace bq
