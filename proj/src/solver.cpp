#include "bq/solver.hpp"

#include "bq/lp_besov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace bq {

namespace {

constexpr double blowup_threshold = 1e8;
constexpr double min_dt = 1e-12;

Tendency add(const Tendency& a, const Tendency& b) { return {a.theta + b.theta, a.omega + b.omega}; }

SpectralField times(const RealGrid<double>& e, const SpectralField& f) { return {f.grid, f.coeffs * e}; }

bool finite(const SimState& s) { return s.theta_hat.coeffs.isFinite().all() && s.omega_hat.coeffs.isFinite().all(); }

Tendency explicit_part(const SimState& s, const FlowParams& p, const Forcing& forcing) {
  Tendency n = nonlinear_tendency(s, p);
  if (forcing) {
    const Tendency f = forcing(s.t);
    n = add(n, {dealias(f.theta), dealias(f.omega)});
  }
  return n;
}

double periodic_offset(double d, double L) { return d - L * std::round(d / L); }

// Real field with Hermitian random coefficients on integer modes lo <= |m| <= hi.
SpectralField random_shell(const GridSpec& g, double lo, double hi, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralField f(g);
  const int mmax = static_cast<int>(std::floor(hi));
  for (int m1 = 0; m1 <= mmax; ++m1)
    for (int m2 = -mmax; m2 <= mmax; ++m2) {
      if (m1 == 0 && m2 <= 0) continue;
      const double k = std::hypot(m1, m2);
      if (k < lo || k > hi) continue;
      const std::complex<double> c(nd(rng) / k, nd(rng) / k);
      f.at_mode(m1, m2) = c;
      f.at_mode(-m1, -m2) = std::conj(c);
    }
  return f;
}

SpectralField unit_sup(const SpectralField& f) {
  const double m = to_physical(f).values.abs().maxCoeff();
  return m > 0.0 ? (1.0 / m) * f : f;
}

}  // namespace

void StepperConfig::validate() const {
  if (!(dt_init > 0.0) || !std::isfinite(dt_init)) throw std::invalid_argument("stepper: dt_init must be positive");
  if (!(cfl_number > 0.0 && cfl_number <= 1.0)) throw std::invalid_argument("stepper: cfl_number must lie in (0, 1]");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("stepper: t_end must be nonnegative");
}

BlowUp::BlowUp(double t_, double w)
    : std::runtime_error("blow-up at t = " + std::to_string(t_) + ", |omega|_inf = " + std::to_string(w)),
      t(t_),
      omega_linf(w) {}

StepUnderflow::StepUnderflow(double dt) : std::runtime_error("time step underflow: dt = " + std::to_string(dt)) {}

Tendency nonlinear_tendency(const SimState& s, const FlowParams& p) {
  (void)p;
  const auto u = to_physical(biot_savart(s.omega_hat));
  return {-1.0 * advect(u, s.theta_hat), partial(s.theta_hat, 0) - advect(u, s.omega_hat)};
}

std::pair<RealGrid<double>, RealGrid<double>> linear_rates(const GridSpec& g, const FlowParams& p) {
  RealGrid<double> ct(g.n, g.n), cw(g.n, g.n);
  const double unit = g.wavenumber_unit();
  for (int b = 0; b < g.n; ++b)
    for (int a = 0; a < g.n; ++a) {
      const double k = unit * std::hypot(g.mode(a), g.mode(b));
      ct(a, b) = k == 0.0 ? 0.0 : p.kappa * std::pow(k, p.beta);
      cw(a, b) = k == 0.0 ? 0.0 : p.nu * std::pow(k, p.alpha);
    }
  return {std::move(ct), std::move(cw)};
}

Tendency rhs(const SimState& s, const FlowParams& p) {
  const auto [ct, cw] = linear_rates(s.theta_hat.grid, p);
  const Tendency n = nonlinear_tendency(s, p);
  return {n.theta - times(ct, s.theta_hat), n.omega - times(cw, s.omega_hat)};
}

double choose_dt(const SimState& s, const FlowParams& p, const StepperConfig& cfg) {
  (void)p;
  if (cfg.fixed_dt) return cfg.dt_init;
  const double dx = s.omega_hat.grid.spacing();
  const double umax = magnitude(to_physical(biot_savart(s.omega_hat))).values.maxCoeff();
  double dt = std::min(cfg.dt_init, cfg.cfl_number * dx);
  if (umax > 0.0) dt = std::min(dt, cfg.cfl_number * dx / umax);
  return dt;
}

SimState step(const SimState& s, const FlowParams& p, double dt, const Forcing& forcing) {
  if (!finite(s)) throw BlowUp(s.t, std::numeric_limits<double>::quiet_NaN());
  const GridSpec& g = s.theta_hat.grid;
  const auto [ct, cw] = linear_rates(g, p);
  const RealGrid<double> et = (-dt * ct).exp(), ew = (-dt * cw).exp();

  const Tendency n0 = explicit_part(s, p, forcing);
  const SimState a{times(et, s.theta_hat + dt * n0.theta), times(ew, s.omega_hat + dt * n0.omega), s.t + dt};
  if (!finite(a)) throw BlowUp(a.t, std::numeric_limits<double>::quiet_NaN());
  const Tendency n1 = explicit_part(a, p, forcing);
  SimState out{times(et, s.theta_hat) + (dt / 2) * (times(et, n0.theta) + n1.theta),
               times(ew, s.omega_hat) + (dt / 2) * (times(ew, n0.omega) + n1.omega), s.t + dt};
  if (!finite(out)) throw BlowUp(out.t, std::numeric_limits<double>::quiet_NaN());
  const double wmax = to_physical(out.omega_hat).values.abs().maxCoeff();
  if (wmax > blowup_threshold) throw BlowUp(out.t, wmax);
  return out;
}

SimState step(const SimState& s, const FlowParams& p, const StepperConfig& cfg) {
  if (s.t >= cfg.t_end) return s;
  if (!finite(s)) throw BlowUp(s.t, std::numeric_limits<double>::quiet_NaN());
  const double dt = choose_dt(s, p, cfg);
  if (dt < min_dt) throw StepUnderflow(dt);
  const double remaining = cfg.t_end - s.t;
  if (dt < remaining) return step(s, p, dt);
  SimState out = step(s, p, remaining);
  out.t = cfg.t_end;
  return out;
}

SimState to_state(const FlowSnapshot& x) {
  return {dealias(to_spectral(x.theta)), dealias(to_spectral(x.omega)), x.t};
}

FlowSnapshot to_snapshot(const SimState& s) { return {to_physical(s.theta_hat), to_physical(s.omega_hat), s.t}; }

SpectralField compute_G_hat(const SimState& s, double alpha) { return s.omega_hat - riesz_alpha(s.theta_hat, alpha); }

PhysicalField compute_G(const SimState& s, double alpha) { return to_physical(compute_G_hat(s, alpha)); }

double g_equation_residual(const SimState& s0, const SimState& s1, const SimState& s2, const FlowParams& p) {
  const double h0 = s1.t - s0.t, h1 = s2.t - s1.t;
  if (!(h0 > 0.0) || std::abs(h1 - h0) > 1e-9 * h0)
    throw std::invalid_argument("g_equation_residual: states must be at uniform, increasing times");
  const double a = p.alpha;
  const auto G0 = compute_G_hat(s0, a), G1 = compute_G_hat(s1, a), G2 = compute_G_hat(s2, a);
  const auto dG = (1.0 / (s2.t - s0.t)) * (G2 - G0);
  const auto u = to_physical(biot_savart(s1.omega_hat));
  const auto d1 = partial(s1.theta_hat, 0);
  const auto r = dG + advect(u, G1) + p.nu * fractional_laplacian(G1, a) - commutator_Ralpha(u, s1.theta_hat, a) -
                 (1.0 - p.nu) * d1 - p.kappa * fractional_laplacian(d1, p.beta - a);
  return l2_norm_spectral(r);
}

InitKind parse_init_kind(const std::string& name) {
  if (name == "taylor-green-like") return InitKind::taylor_green;
  if (name == "gaussian-bumps") return InitKind::gaussian_bumps;
  if (name == "random-band") return InitKind::random_band;
  throw std::invalid_argument("unknown initial data kind '" + name + "'");
}

std::string init_kind_name(InitKind k) {
  switch (k) {
    case InitKind::taylor_green: return "taylor-green-like";
    case InitKind::gaussian_bumps: return "gaussian-bumps";
    case InitKind::random_band: return "random-band";
  }
  return "";
}

SimState initial_data(InitKind kind, std::uint64_t seed, const GridSpec& g, const InitOptions& opt) {
  g.validate();
  const double L = g.side_length;
  switch (kind) {
    case InitKind::taylor_green: {
      const double k = g.wavenumber_unit();
      const auto th = sample(g, [k](double x, double y) { return std::sin(k * x) * std::cos(k * y); });
      const auto w = sample(g, [k](double x, double y) { return 2.0 * k * std::sin(k * x) * std::sin(k * y); });
      return {dealias(to_spectral(th)), dealias(to_spectral(w)), 0.0};
    }
    case InitKind::gaussian_bumps: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> pos(0.0, L), width(L / 12, L / 6), amp(-1.0, 1.0);
      auto bumps = [&] {
        struct Bump { double x, y, w, a; };
        std::vector<Bump> b(3);
        for (auto& e : b) e = {pos(rng), pos(rng), width(rng), amp(rng)};
        return sample(g, [b, L](double x, double y) {
          double acc = 0.0;
          for (const auto& e : b) {
            const double dx = periodic_offset(x - e.x, L), dy = periodic_offset(y - e.y, L);
            acc += e.a * std::exp(-(dx * dx + dy * dy) / (e.w * e.w));
          }
          return acc;
        });
      };
      const auto th = bumps();
      const auto w = bumps();
      auto wh = dealias(to_spectral(w));
      wh.at_mode(0, 0) = 0.0;
      return {dealias(to_spectral(th)), wh, 0.0};
    }
    case InitKind::random_band: {
      const double hi = opt.band_hi > 0.0 ? opt.band_hi : std::min(8.0, g.n / 6.0);
      if (!(opt.band_lo >= 1.0 && opt.band_lo <= hi))
        throw std::invalid_argument("random-band: need 1 <= band_lo <= band_hi");
      if (hi > g.dealias_fraction * g.n / 2.0)
        throw std::invalid_argument("random-band: band_hi exceeds the dealiasing cutoff");
      std::mt19937_64 rng(seed);
      const auto th = random_shell(g, opt.band_lo, hi, rng);
      const auto w = random_shell(g, opt.band_lo, hi, rng);
      return {unit_sup(th), unit_sup(w), 0.0};
    }
  }
  throw std::invalid_argument("unknown initial data kind");
}

InitialNorms initial_norms(const SimState& s) {
  const auto th = to_physical(s.theta_hat);
  const auto u = to_physical(biot_savart(s.omega_hat));
  return {lp_norm(th, 2.0), lp_norm(th, INFINITY), magnitude(to_physical(grad(s.theta_hat))).values.maxCoeff(),
          std::hypot(lp_norm(u[0], 2.0), lp_norm(u[1], 2.0))};
}

namespace {

double shift_sup(const RealGrid<double>& v, int a, int b) {
  const int n = static_cast<int>(v.rows());
  double m = 0.0;
  for (int j = 0; j < n; ++j) {
    const int jj = ((j + b) % n + n) % n;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(v(((i + a) % n + n) % n, jj) - v(i, j)));
  }
  return m;
}

}  // namespace

double oss_delta(const PhysicalField& theta, double L, int stride) {
  const GridSpec& g = theta.grid;
  if (!(L > 0.0 && L <= g.side_length / 2.0)) throw std::invalid_argument("oss: need 0 < L <= L_domain / 2");
  if (stride < 1) throw std::invalid_argument("oss: stride must be >= 1");
  const double h = g.spacing();
  const int reach = std::min(g.n / 2, static_cast<int>(std::ceil(L / h)));
  double best = 0.0;
  for (int b = -reach; b <= reach && b < g.n / 2; ++b)
    for (int a = -reach; a <= reach && a < g.n / 2; ++a) {
      if ((a == 0 && b == 0) || a % stride != 0 || b % stride != 0) continue;
      if (h * std::hypot(a, b) >= L) continue;
      best = std::max(best, shift_sup(theta.values, a, b));
    }
  return best;
}

OssReport oss_check(const PhysicalField& theta, double delta, double L, int stride) {
  OssReport r;
  r.delta_measured = oss_delta(theta, L, stride);
  r.delta_target = delta;
  r.L = L;
  r.holds = r.delta_measured <= delta;
  return r;
}

double delta_star(double theta0_sup, double beta, double C_user) {
  if (!(theta0_sup > 0.0)) throw std::invalid_argument("delta_star: |theta0|_inf must be positive");
  if (!(beta > 0.0 && beta < 2.0)) throw std::invalid_argument("delta_star: beta must lie in (0, 2)");
  return C_user * std::pow(theta0_sup, -2.0 * beta / (2.0 - beta));
}

std::vector<std::pair<double, double>> oss_weighted_profile(const PhysicalField& theta, double beta, double c,
                                                            double h_max) {
  const GridSpec& g = theta.grid;
  if (!(h_max >= 0.0 && h_max <= g.side_length / 2.0))
    throw std::invalid_argument("oss_weighted_profile: need 0 <= h_max <= L_domain / 2");
  const double h = g.spacing();
  const int reach = std::min(g.n / 2 - 1, static_cast<int>(std::floor(h_max / h)));
  std::map<int, double> by_len;  // keyed by a^2 + b^2
  for (int b = -reach; b <= reach; ++b)
    for (int a = -reach; a <= reach; ++a) {
      const double r = h * std::hypot(a, b);
      if (r > h_max) continue;
      const double d = shift_sup(theta.values, a, b);
      const double v = d * d * std::exp(-c * std::pow(r, 1.0 - beta));
      auto& slot = by_len[a * a + b * b];
      slot = std::max(slot, v);
    }
  std::vector<std::pair<double, double>> out;
  for (const auto& [k, v] : by_len) out.emplace_back(h * std::sqrt(static_cast<double>(k)), v);
  return out;
}

}  // namespace bq
