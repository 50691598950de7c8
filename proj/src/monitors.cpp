#include "bq/monitors.hpp"

#include "bq/lp_besov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace bq {

namespace {

PhysicalField lambda(const PhysicalField& f, double beta) {
  return to_physical(fractional_laplacian(to_spectral(f), beta));
}

PhysicalField map(const PhysicalField& f, const std::function<double(double)>& fn) {
  PhysicalField out(f.grid);
  out.values = f.values.unaryExpr([&](double x) { return fn(x); });
  return out;
}

double max_abs(const PhysicalField& f) { return f.values.size() ? f.values.abs().maxCoeff() : 0.0; }

PhysicalField roll(const PhysicalField& f, int a, int b) {
  const int n = f.grid.n;
  PhysicalField out(f.grid);
  for (int j = 0; j < n; ++j) {
    const int jj = ((j + b) % n + n) % n;
    for (int i = 0; i < n; ++i) out(i, j) = f(((i + a) % n + n) % n, jj);
  }
  return out;
}

/// sum_i g_i Lambda^beta g_i - Lambda^beta(|g|^2) / 2, and the scale of its two terms.
std::pair<PhysicalField, double> exact_part(const std::vector<PhysicalField>& g, double beta) {
  const GridSpec& grid = g.front().grid;
  PhysicalField first(grid), sq(grid);
  for (const auto& gi : g) {
    first.values += gi.values * lambda(gi, beta).values;
    sq.values += gi.values.square();
  }
  const PhysicalField second = 0.5 * lambda(sq, beta);
  return {first - second, max_abs(first) + max_abs(second)};
}

void check_beta(double beta, const char* who) {
  if (!(beta > 0.0 && beta < 2.0)) throw std::invalid_argument(std::string(who) + ": beta must lie in (0, 2)");
}

}  // namespace

// ---------------------------------------------------------------------------
// Index window

double alpha0() { return (23.0 - std::sqrt(145.0)) / 12.0; }

IndexWindow index_window(double alpha) {
  if (!(alpha > 0.8)) throw std::invalid_argument("index window: q₀ formula requires α > 4/5");
  if (!(alpha < 1.0)) throw std::invalid_argument("index window: alpha must be < 1");
  IndexWindow w;
  w.alpha = alpha;
  w.q0 = (8.0 - 4.0 * alpha) / (8.0 - 7.0 * alpha);
  w.q_low = 2.0 / (2.0 * alpha - 1.0);
  w.q_lip = 2.0 / (3.0 * alpha - 2.0);
  w.s_max = 3.0 * alpha - 2.0;
  w.alpha0 = alpha0();
  w.valid = w.s_max > 0.0 && w.q_lip < w.q0 && w.q_low < w.q0;
  return w;
}

void validate_lq_index(const IndexWindow& w, double q) {
  if (!(q > 2.0)) throw std::invalid_argument("monitor index: L^q monitor requires q > 2");
  if (!(q < w.q0))
    throw std::invalid_argument("monitor index: L^q monitor requires q < q0 = (8 - 4 alpha)/(8 - 7 alpha) = " +
                                format_double(w.q0));
}

void validate_besov_indices(const IndexWindow& w, double q, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("monitor index: Besov monitor requires s > 0");
  if (!(s <= w.s_max))
    throw std::invalid_argument("monitor index: Besov monitor requires s <= 3 alpha - 2 = " + format_double(w.s_max));
  if (!(q > w.q_low))
    throw std::invalid_argument("monitor index: Besov monitor requires q > 2/(2 alpha - 1) = " +
                                format_double(w.q_low));
  if (!(q < w.q0))
    throw std::invalid_argument("monitor index: Besov monitor requires q < q0 = (8 - 4 alpha)/(8 - 7 alpha) = " +
                                format_double(w.q0));
}

MonitorSettings resolve_monitor_settings(double alpha, std::optional<double> q, std::optional<double> s,
                                         double oss_L) {
  MonitorSettings m;
  m.oss_L = oss_L;
  if (!(oss_L > 0.0)) throw std::invalid_argument("monitor: oss L must be positive");
  if (q || s) {
    const auto w = index_window(alpha);
    if (q) validate_lq_index(w, *q);
    if (!w.valid)
      throw std::invalid_argument("monitor index: the window 2/(2 alpha - 1) < q < q0 with 0 < s <= 3 alpha - 2 "
                                  "is empty for alpha <= alpha0 = " + format_double(w.alpha0));
    m.q = q ? *q : 0.5 * (std::max(w.q_low, 2.0) + w.q0);
    m.s = s ? *s : w.s_max;
    validate_lq_index(w, m.q);
    validate_besov_indices(w, m.q, m.s);
    return m;
  }
  if (alpha > 0.8 && alpha < 1.0) {
    const auto w = index_window(alpha);
    if (w.valid) {
      m.q = 0.5 * (std::max(w.q_low, 2.0) + w.q0);
      m.s = w.s_max;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Bounds along a trajectory

MaxPrincipleMargin max_principle_margin(double theta_l2, double theta_linf, double theta0_l2, double theta0_linf) {
  return {theta0_l2 - theta_l2, theta0_linf - theta_linf};
}

bool max_principle_violated(const MaxPrincipleMargin& m, double theta0_l2, double theta0_linf, double t) {
  return m.l2 < -1e-6 * theta0_l2 * (1.0 + t) || m.linf < -1e-6 * theta0_linf * (1.0 + t);
}

EnergyMargin energy_margin(double u_l2, double diss_u_accum, double t, double u0_l2, double theta0_l2) {
  EnergyMargin e;
  e.linear = u0_l2 + t * theta0_l2 - u_l2;
  const double b = u0_l2 * u0_l2 + t * theta0_l2 * theta0_l2;
  e.squared = b * b - (u_l2 * u_l2 + diss_u_accum);
  return e;
}

double G_l2_quantity(double G_l2, double diss_G_accum) { return G_l2 * G_l2 + diss_G_accum; }

GradThetaDiagnostics grad_theta_monitor(const SimState& s, double alpha) {
  GradThetaDiagnostics d;
  d.grad_theta_linf = max_abs(magnitude(to_physical(grad(s.theta_hat))));
  const auto ut = biot_savart(compute_G_hat(s, alpha));
  const GridSpec& g = s.theta_hat.grid;
  RealGrid<double> frob = RealGrid<double>::Zero(g.n, g.n);
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a) frob += to_physical(partial(ut[c], a)).values.square();
  d.M_tilde = frob.size() ? std::sqrt(frob.maxCoeff()) : 0.0;
  return d;
}

// ---------------------------------------------------------------------------
// Pointwise inequalities

ConvexFunction gamma_power(int p) {
  if (p < 1) throw std::invalid_argument("gamma_power: p must be >= 1");
  return {"x^" + std::to_string(2 * p), [p](double x) { return std::pow(x, 2 * p); },
          [p](double x) { return 2.0 * p * std::pow(x, 2 * p - 1); }};
}

ConvexFunction gamma_smoothed_hinge(double corner, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("gamma_smoothed_hinge: eps must be positive");
  return {"smoothed-hinge",
          [=](double x) { return 0.5 * (x - corner + std::hypot(x - corner, eps)); },
          [=](double x) { return 0.5 * (1.0 + (x - corner) / std::hypot(x - corner, eps)); }};
}

ConvexFunction gamma_linear() {
  return {"x", [](double x) { return x; }, [](double) { return 1.0; }};
}

std::vector<ConvexFunction> cordoba_gamma_set() {
  return {gamma_power(1), gamma_power(2), gamma_power(3), gamma_smoothed_hinge()};
}

PointwiseMargin cordoba_margin(const PhysicalField& f, double beta, const ConvexFunction& gamma) {
  if (!(beta > 0.0 && beta <= 2.0)) throw std::invalid_argument("cordoba_margin: beta must lie in (0, 2]");
  const PhysicalField first = map(f, gamma.df) * lambda(f, beta);
  const PhysicalField second = lambda(map(f, gamma.f), beta);
  return {(first - second).values.minCoeff(), max_abs(first) + max_abs(second)};
}

double fractional_kernel_constant(double beta) {
  check_beta(beta, "fractional_kernel_constant");
  return std::pow(2.0, beta) * std::tgamma(1.0 + 0.5 * beta) /
         (std::numbers::pi * std::abs(std::tgamma(-0.5 * beta)));
}

PhysicalField dissipation_quadrature(const std::vector<PhysicalField>& g, double beta, double radius) {
  if (g.empty()) throw std::invalid_argument("dissipation_quadrature: no components");
  const GridSpec& grid = g.front().grid;
  for (const auto& gi : g) detail::require_same_grid(grid, gi.grid);
  const double c = fractional_kernel_constant(beta);
  const int n = grid.n;
  const double h = grid.spacing();
  const int reach = std::min(n / 2, static_cast<int>(std::floor(radius / h)));
  PhysicalField D(grid);
  for (int b = -reach; b <= reach && b < n / 2; ++b)
    for (int a = -reach; a <= reach && a < n / 2; ++a) {
      const double r = h * std::hypot(a, b);
      if ((a == 0 && b == 0) || r > radius) continue;
      const double w = 0.5 * c * grid.cell_area() * std::pow(r, -2.0 - beta);
      for (const auto& gi : g)
        for (int j = 0; j < n; ++j) {
          const int jj = ((j + b) % n + n) % n;
          for (int i = 0; i < n; ++i) {
            const double d = gi(i, j) - gi(((i + a) % n + n) % n, jj);
            D(i, j) += w * d * d;
          }
        }
    }
  return D;
}

LowerBoundReport gradient_lower_bound_margin(const PhysicalField& f, double beta, double q, bool measure_constant) {
  check_beta(beta, "gradient_lower_bound_margin");
  if (!(q >= 1.0)) throw std::invalid_argument("gradient_lower_bound_margin: q must be >= 1");
  const auto gh = grad(to_spectral(f));
  const std::vector<PhysicalField> g{to_physical(gh[0]), to_physical(gh[1])};
  const auto [exact, scale] = exact_part(g, beta);
  LowerBoundReport r;
  r.exact_part = {exact.values.minCoeff(), scale};
  if (scale == 0.0) {
    r.exact_part.min = 0.0;
    return r;
  }
  if (!measure_constant) return r;
  const PhysicalField D = dissipation_quadrature(g, beta, 0.25 * f.grid.side_length);
  const double gamma = beta * q / (q + 2.0);
  const double fq = std::pow(lp_norm(f, q), gamma);
  const RealGrid<double> mag2 = g[0].values.square() + g[1].values.square();
  const RealGrid<double> den = fq * (exact.values - 0.5 * D.values);
  double c0 = 0.0;
  for (Eigen::Index k = 0; k < den.size(); ++k)
    if (den(k) > 0.0) c0 = std::max(c0, std::pow(mag2(k), 1.0 + 0.5 * gamma) / den(k));
  r.empirical_constant = c0;
  return r;
}

LowerBoundReport difference_lower_bound_margin(const PhysicalField& theta, int a, int b, double beta,
                                               bool measure_constant) {
  check_beta(beta, "difference_lower_bound_margin");
  LowerBoundReport r;
  if (a == 0 && b == 0) return r;
  const PhysicalField g = roll(theta, a, b) - theta;
  const auto [exact, scale] = exact_part({g}, beta);
  r.exact_part = {exact.values.minCoeff(), scale};
  const double gmax = max_abs(g);
  if (gmax == 0.0) {
    r.exact_part.min = 0.0;
    return r;
  }
  if (!measure_constant) return r;
  const PhysicalField D = dissipation_quadrature({g}, beta, 0.25 * theta.grid.side_length);
  const double hlen = theta.grid.spacing() * std::hypot(a, b);
  const double factor = std::pow(max_abs(theta), beta) * std::pow(hlen, beta);
  // Points where g is at rounding level carry no information about the constant.
  const double floor = 1e-6 * gmax;
  double c = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < g.values.size(); ++k) {
    const double gk = std::abs(g.values(k));
    if (gk < floor) continue;
    c = std::min(c, (exact.values(k) - 0.5 * D.values(k)) * factor / std::pow(gk, 2.0 + beta));
  }
  r.empirical_constant = c;
  return r;
}

// ---------------------------------------------------------------------------
// Diagnostics records

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols{
      "t",           "theta_l2",     "theta_linf",   "u_l2",
      "omega_linf",  "grad_theta_linf", "G_l2",      "G_lq",
      "q",           "G_besov",      "s",            "diss_u_accum",
      "diss_G_accum", "margin_maxprinciple_l2", "margin_maxprinciple_linf", "margin_energy_linear",
      "cordoba_min", "oss_delta_measured"};
  return cols;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_header(std::ostream& os) {
  const auto& cols = diagnostics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_csv_row(std::ostream& os, const DiagnosticsRecord& r) {
  const double v[] = {r.t,
                      r.theta_l2,
                      r.theta_linf,
                      r.u_l2,
                      r.omega_linf,
                      r.grad_theta_linf,
                      r.G_l2,
                      r.G_lq,
                      r.q,
                      r.G_besov,
                      r.s,
                      r.diss_u_accum,
                      r.diss_G_accum,
                      r.margin_maxprinciple_l2,
                      r.margin_maxprinciple_linf,
                      r.margin_energy_linear,
                      r.cordoba_min,
                      r.oss_delta_measured};
  for (std::size_t i = 0; i < std::size(v); ++i) os << (i ? "," : "") << format_double(v[i]);
  os << '\n';
}

namespace {

double dissipation_rate(const SpectralField& fh, double alpha) {
  const double v = l2_norm_spectral(fractional_laplacian(fh, 0.5 * alpha));
  return v * v;
}

std::pair<double, double> dissipation_rates(const SimState& s, const FlowParams& p) {
  const auto u = biot_savart(s.omega_hat);
  return {dissipation_rate(u[0], p.alpha) + dissipation_rate(u[1], p.alpha),
          dissipation_rate(compute_G_hat(s, p.alpha), p.alpha)};
}

}  // namespace

DiagnosticsState start_diagnostics(const SimState& s0, const FlowParams& p) {
  DiagnosticsState d;
  const auto n0 = initial_norms(s0);
  d.theta0_l2 = n0.theta_l2;
  d.theta0_linf = n0.theta_linf;
  d.u0_l2 = n0.u_l2;
  d.last_t = s0.t;
  std::tie(d.last_diss_u, d.last_diss_G) = dissipation_rates(s0, p);
  return d;
}

void accumulate_dissipation(DiagnosticsState& d, const SimState& s, const FlowParams& p) {
  const auto [du, dG] = dissipation_rates(s, p);
  const double dt = s.t - d.last_t;
  d.diss_u_accum += 0.5 * dt * (d.last_diss_u + du);
  d.diss_G_accum += 0.5 * dt * (d.last_diss_G + dG);
  d.last_t = s.t;
  d.last_diss_u = du;
  d.last_diss_G = dG;
}

DiagnosticsRecord diagnose(const SimState& s, const FlowParams& p, const MonitorSettings& m,
                           const DiagnosticsState& d) {
  DiagnosticsRecord r;
  r.t = s.t;
  const PhysicalField theta = to_physical(s.theta_hat);
  const PhysicalField omega = to_physical(s.omega_hat);
  const auto n0 = initial_norms(s);
  r.theta_l2 = n0.theta_l2;
  r.theta_linf = n0.theta_linf;
  r.u_l2 = n0.u_l2;
  r.omega_linf = max_abs(omega);
  r.grad_theta_linf = n0.grad_theta_linf;
  const SpectralField Gh = compute_G_hat(s, p.alpha);
  const PhysicalField G = to_physical(Gh);
  r.G_l2 = lp_norm(G, 2.0);
  r.q = m.q;
  r.s = m.s;
  r.G_lq = lp_norm(G, m.q);
  r.G_besov = besov_norm(Gh, BesovIndex{m.s, m.q, std::numeric_limits<double>::infinity(), false});
  r.diss_u_accum = d.diss_u_accum;
  r.diss_G_accum = d.diss_G_accum;
  const auto mp = max_principle_margin(r.theta_l2, r.theta_linf, d.theta0_l2, d.theta0_linf);
  r.margin_maxprinciple_l2 = mp.l2;
  r.margin_maxprinciple_linf = mp.linf;
  r.margin_energy_linear = energy_margin(r.u_l2, d.diss_u_accum, s.t, d.u0_l2, d.theta0_l2).linear;
  double cmin = std::numeric_limits<double>::infinity();
  for (const auto& gam : cordoba_gamma_set()) cmin = std::min(cmin, cordoba_margin(theta, p.beta, gam).min);
  r.cordoba_min = cmin;
  r.oss_delta_measured = oss_delta(theta, std::min(m.oss_L, 0.5 * s.theta_hat.grid.side_length));
  return r;
}

}  // namespace bq
