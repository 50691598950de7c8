// Time integration of the vorticity-temperature system
//   d_t theta + u.grad theta + kappa Lambda^beta theta = 0
//   d_t omega + u.grad omega + nu Lambda^alpha omega   = d1 theta,   u = grad-perp Delta^{-1} omega
// with an integrating-factor RK2 scheme, the combined quantity G = omega - R_alpha theta,
// initial data, and the small-oscillation (OSS) modulus machinery.
#pragma once

#include "bq/spectral.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bq {

struct SimState {
  SpectralField theta_hat;
  SpectralField omega_hat;
  double t = 0.0;
};

struct StepperConfig {
  double dt_init = 1e-2;
  double cfl_number = 0.5;
  double t_end = 1.0;
  /// Use dt_init for every step instead of the CFL choice.
  bool fixed_dt = false;
  /// Stop after this many steps even if t_end is not reached; negative means unlimited.
  long max_steps = -1;
  void validate() const;
};

struct Tendency {
  SpectralField theta;
  SpectralField omega;
};

/// Time-dependent source added to the explicit part of both equations (manufactured solutions).
using Forcing = std::function<Tendency(double t)>;

/// Raised when |omega|_inf exceeds 1e8 or the state becomes non-finite.
class BlowUp : public std::runtime_error {
 public:
  BlowUp(double t, double omega_linf);
  double t;
  double omega_linf;
};

/// Raised when the CFL step falls below 1e-12.
class StepUnderflow : public std::runtime_error {
 public:
  explicit StepUnderflow(double dt);
};

/// Explicit part: (-u.grad theta, -u.grad omega + d1 theta), products dealiased.
Tendency nonlinear_tendency(const SimState& s, const FlowParams& p);

/// Diagonal dissipation rates (kappa |k|^beta, nu |k|^alpha) for the integrating factor.
std::pair<RealGrid<double>, RealGrid<double>> linear_rates(const GridSpec& g, const FlowParams& p);

/// Full tendency: explicit part minus the diagonal dissipation.
Tendency rhs(const SimState& s, const FlowParams& p);

/// min(dt_init, cfl dx / |u|_inf, cfl dx), or dt_init when fixed_dt is set.
double choose_dt(const SimState& s, const FlowParams& p, const StepperConfig& cfg);

/// One integrating-factor RK2 step of size dt:
///   a = E (y + dt N(y)),  y+ = E y + dt/2 (E N(y) + N(a)),  E = exp(-c dt).
SimState step(const SimState& s, const FlowParams& p, double dt, const Forcing& forcing = {});

/// One step with dt from choose_dt, clipped so t does not pass t_end.
SimState step(const SimState& s, const FlowParams& p, const StepperConfig& cfg);

/// Physical-space snapshot; the run loop keeps this as its state between steps so a
/// checkpoint of it resumes bit-for-bit.
struct FlowSnapshot {
  PhysicalField theta;
  PhysicalField omega;
  double t = 0.0;
};
SimState to_state(const FlowSnapshot& x);
FlowSnapshot to_snapshot(const SimState& s);

/// G = omega - R_alpha theta.
SpectralField compute_G_hat(const SimState& s, double alpha);
PhysicalField compute_G(const SimState& s, double alpha);

/// L^2 norm of  d_t G + u.grad G + nu Lambda^alpha G - [R_alpha, u.grad] theta
///              - (1 - nu) d1 theta - kappa Lambda^{beta-alpha} d1 theta
/// at the middle state, with d_t G by central difference. Requires uniform spacing.
double g_equation_residual(const SimState& s0, const SimState& s1, const SimState& s2, const FlowParams& p);

enum class InitKind { taylor_green, gaussian_bumps, random_band };
InitKind parse_init_kind(const std::string& name);
std::string init_kind_name(InitKind k);

struct InitOptions {
  /// Shell of integer modes |m| in [band_lo, band_hi] for random-band; band_hi <= 0 picks min(8, n/6).
  double band_lo = 1.0;
  double band_hi = 0.0;
};

/// Smooth, dealiased, reproducible from seed.
///   taylor-green: u = (sin k x1 cos k x2, -cos k x1 sin k x2), omega = 2k sin k x1 sin k x2,
///                 theta = sin k x1 cos k x2, k = 2 pi / L; |u|_2 = L / sqrt 2.
///   gaussian-bumps: three periodized bumps each for theta and omega.
///   random-band: random coefficients on a shell, |theta|_inf = |omega|_inf = 1.
SimState initial_data(InitKind kind, std::uint64_t seed, const GridSpec& g, const InitOptions& opt = {});

struct InitialNorms {
  double theta_l2, theta_linf, grad_theta_linf, u_l2;
};
InitialNorms initial_norms(const SimState& s);

struct OssReport {
  double delta_measured = 0.0;  // max over grid shifts |h| < L of max_x |theta(x+h) - theta(x)|
  double delta_target = 0.0;
  double L = 0.0;
  bool holds = false;
};

/// Exhaustive scan over grid shifts with |h| < L (nearest image). stride > 1 scans every
/// stride-th shift on each axis (coarse mode, not an oracle).
double oss_delta(const PhysicalField& theta, double L, int stride = 1);
OssReport oss_check(const PhysicalField& theta, double delta, double L, int stride = 1);

/// delta = C_user * |theta0|_inf^{-2 beta / (2 - beta)}.
double delta_star(double theta0_sup, double beta, double C_user);

/// (|h|, sup_x (theta(x+h) - theta(x))^2 exp(-c |h|^{1-beta})) for every distinct grid shift
/// length |h| <= h_max, maximized over shifts of equal length, sorted by |h|.
std::vector<std::pair<double, double>> oss_weighted_profile(const PhysicalField& theta, double beta, double c,
                                                            double h_max);

}  // namespace bq
