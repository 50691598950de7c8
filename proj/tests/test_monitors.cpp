#include "bq/monitors.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace bq;
using bq::testing::random_band_limited;

namespace {

GridSpec grid(int n) {
  GridSpec g;
  g.n = n;
  return g;
}

PhysicalField cos_x1(const GridSpec& g) {
  return sample(g, [](double x, double) { return std::cos(x); });
}

PhysicalField random_field(const GridSpec& g, std::uint64_t seed, int band = 4) {
  auto f = to_physical(random_band_limited(g, band, seed));
  f.values /= f.values.abs().maxCoeff();
  return f;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("index window at alpha = 0.9") {
  const auto w = index_window(0.9);
  CHECK(std::abs(w.q0 - 4.4 / 1.7) < 1e-12);
  CHECK(std::abs(w.q_low - 2.0 / 0.8) < 1e-12);
  CHECK(std::abs(w.s_max - 0.7) < 1e-12);
  CHECK_FALSE(w.valid);  // 0.9 < alpha0
}

TEST_CASE("alpha0 and the degeneracy of the window") {
  const double a0 = (23.0 - std::sqrt(145.0)) / 12.0;
  CHECK(alpha0() == a0);
  CHECK(std::abs(a0 - 0.9132) < 5e-5);
  const auto w = index_window(a0);
  CHECK(std::abs(w.q_lip - w.q0) < 1e-10);
  CHECK(index_window(a0 + 1e-3).valid);
  CHECK_FALSE(index_window(a0 - 1e-3).valid);
  for (double a : {0.92, 0.95, 0.99}) {
    const auto v = index_window(a);
    CHECK(v.q_low < v.q0);
    CHECK(v.q_lip < v.q0);
    CHECK(v.s_max > 0.7396);
  }
  CHECK(std::abs(index_window(0.95).s_max - 0.85) < 1e-12);
}

TEST_CASE("index window requires alpha above 4/5") {
  CHECK(message_of([] { index_window(0.8); }).find("q₀ formula requires α > 4/5") != std::string::npos);
  CHECK_THROWS(index_window(0.5));
  CHECK_THROWS(index_window(1.0));
}

TEST_CASE("monitor indices outside the window are rejected") {
  const auto w = index_window(0.95);
  CHECK_THROWS(validate_lq_index(w, w.q0 + 0.1));
  CHECK_THROWS(validate_lq_index(w, 2.0));
  CHECK_NOTHROW(validate_lq_index(w, 0.5 * (2.0 + w.q0)));
  CHECK(message_of([&] { validate_besov_indices(w, w.q0 + 0.1, 0.5); }).find("q0") != std::string::npos);
  CHECK(message_of([&] { validate_besov_indices(w, 2.5, 0.9); }).find("3 alpha - 2") != std::string::npos);
  CHECK(message_of([&] { validate_besov_indices(w, 2.1, 0.5); }).find("2/(2 alpha - 1)") != std::string::npos);
  CHECK_THROWS(validate_besov_indices(w, 2.5, 0.0));
  CHECK_NOTHROW(validate_besov_indices(w, 2.5, w.s_max));
  // alpha = 0.9, q = 3 exceeds q0 = 2.588...
  CHECK_THROWS(resolve_monitor_settings(0.9, 3.0, std::nullopt, 0.1));
}

TEST_CASE("monitor index defaults") {
  const auto w = index_window(0.95);
  const auto m = resolve_monitor_settings(0.95, std::nullopt, std::nullopt, 0.1);
  CHECK(std::abs(m.q - 0.5 * (std::max(w.q_low, 2.0) + w.q0)) < 1e-15);
  CHECK(m.s == w.s_max);
  const auto d = resolve_monitor_settings(0.85, std::nullopt, std::nullopt, 0.1);
  CHECK(d.q == 2.0);
  CHECK(d.s == 0.5);
  const auto c = resolve_monitor_settings(0.5, std::nullopt, std::nullopt, 0.1);
  CHECK(c.q == 2.0);
}

TEST_CASE("trajectory margins vanish at t = 0") {
  const auto mp = max_principle_margin(1.5, 0.7, 1.5, 0.7);
  CHECK(mp.l2 == 0.0);
  CHECK(mp.linf == 0.0);
  CHECK_FALSE(max_principle_violated(mp, 1.5, 0.7, 0.0));
  CHECK(max_principle_violated({-1e-3, 0.0}, 1.0, 1.0, 0.0));
  CHECK_FALSE(max_principle_violated({-1e-7, 0.0}, 1.0, 1.0, 0.0));
  const auto e = energy_margin(2.0, 0.0, 0.0, 2.0, 3.0);
  CHECK(e.linear == 0.0);
  // The squared form fails at t = 0 when |u0| < 1: (0.25)^2 - 0.5^2 < 0.
  CHECK(energy_margin(0.5, 0.0, 0.0, 0.5, 1.0).squared < 0.0);
  CHECK(G_l2_quantity(2.0, 1.0) == 5.0);
}

TEST_CASE("convexity margin: linear Gamma gives zero") {
  const auto g = grid(64);
  const auto f = random_field(g, 3);
  const auto m = cordoba_margin(f, 0.5, gamma_linear());
  CHECK(std::abs(m.min) <= 1e-13 * m.scale);
}

TEST_CASE("convexity margin: closed form for cos x1 and x^2") {
  const auto g = grid(64);
  const auto m = cordoba_margin(cos_x1(g), 0.5, gamma_power(1));
  CHECK(std::abs(m.min - std::pow(2.0, -0.5)) < 1e-10);
  for (double beta : {0.3, 1.0, 1.5}) {
    const auto mb = cordoba_margin(cos_x1(g), beta, gamma_power(1));
    // Margin field 1 + (1 - 2^{beta-1}) cos 2x1.
    CHECK(std::abs(mb.min - (1.0 - std::abs(1.0 - std::pow(2.0, beta - 1.0)))) < 1e-10);
  }
}

TEST_CASE("convexity margin is nonnegative on random fields") {
  const auto g = grid(64);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = random_field(g, seed);
    for (const auto& gam : cordoba_gamma_set())
      for (double beta : {0.3, 0.5, 1.0, 1.5}) {
        const auto m = cordoba_margin(f, beta, gam);
        CHECK_MESSAGE(m.min >= -1e-8 * m.scale, gam.name << " beta=" << beta << " min=" << m.min);
      }
  }
}

TEST_CASE("gamma set functions are convex with consistent derivatives") {
  for (const auto& gam : cordoba_gamma_set())
    for (double x : {-0.9, -0.3, 0.1, 0.25, 0.8}) {
      const double h = 1e-5;
      CHECK(std::abs((gam.f(x + h) - gam.f(x - h)) / (2 * h) - gam.df(x)) < 1e-7);
      CHECK(gam.f(x + h) + gam.f(x - h) - 2 * gam.f(x) >= -1e-14);
    }
}

TEST_CASE("fractional kernel constant at beta = 1") {
  // 2 Gamma(3/2) / (pi |Gamma(-1/2)|) = 2 (sqrt(pi)/2) / (pi 2 sqrt(pi)) = 1 / (2 pi)
  CHECK(std::abs(fractional_kernel_constant(1.0) - 1.0 / (2.0 * std::numbers::pi)) < 1e-15);
}

TEST_CASE("dissipation quadrature is a truncated form of the exact part") {
  const auto g = grid(128);
  const auto f = cos_x1(g);
  const auto df = to_physical(partial(to_spectral(f), 0));
  const double beta = 0.5;
  const auto D = dissipation_quadrature({df}, beta, 0.25 * g.side_length);
  // Exact part for g = -sin x1: 1/2 + (2^beta/4 - 1/2) cos 2x1.
  const auto exact = sample(g, [&](double x, double) {
    return 0.5 + (std::pow(2.0, beta) / 4.0 - 0.5) * std::cos(2.0 * x);
  });
  CHECK(D.values.minCoeff() >= 0.0);
  CHECK((D.values <= exact.values * 1.0001).all());
  // Enlarging the truncation radius only adds nonnegative terms.
  const auto wider = dissipation_quadrature({df}, beta, 0.5 * g.side_length);
  CHECK((wider.values >= D.values).all());
  CHECK((wider.values <= exact.values * 1.0001).all());
  const auto zero = dissipation_quadrature({sample(g, [](double, double) { return 3.0; })}, beta, 1.0);
  CHECK(zero.values.abs().maxCoeff() == 0.0);
}

TEST_CASE("gradient lower bound: exact part on a single mode") {
  const auto g = grid(64);
  for (double beta : {0.3, 0.5, 1.0, 1.5}) {
    const auto r = gradient_lower_bound_margin(cos_x1(g), beta, 2.0);
    // Exact part 1/2 + (2^beta/4 - 1/2) cos 2x1.
    CHECK(std::abs(r.exact_part.min - (0.5 - std::abs(std::pow(2.0, beta) / 4.0 - 0.5))) < 1e-12);
    CHECK(std::isfinite(r.empirical_constant));
    CHECK(r.empirical_constant > 0.0);
  }
}

TEST_CASE("gradient lower bound: constant f gives zeros") {
  const auto g = grid(32);
  const auto r = gradient_lower_bound_margin(sample(g, [](double, double) { return 2.0; }), 0.5, 3.0);
  CHECK(r.exact_part.min == 0.0);
  CHECK(r.exact_part.scale == 0.0);
  CHECK(r.empirical_constant == 0.0);
}

TEST_CASE("gradient lower bound: random fields") {
  const auto g = grid(64);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = gradient_lower_bound_margin(random_field(g, seed), 0.5, 3.0);
    CHECK(r.exact_part.min >= -1e-8 * r.exact_part.scale);
  }
}

TEST_CASE("difference lower bound: zero shift and single mode") {
  const auto g = grid(64);
  const auto z = difference_lower_bound_margin(cos_x1(g), 0, 0, 0.5);
  CHECK(z.exact_part.min == 0.0);
  CHECK(z.empirical_constant == 0.0);
  // Quarter period shift.
  const auto r = difference_lower_bound_margin(cos_x1(g), 16, 0, 0.5);
  CHECK(r.exact_part.min >= -1e-8 * r.exact_part.scale);
  CHECK(r.empirical_constant > 0.0);
  CHECK(std::isfinite(r.empirical_constant));
}

TEST_CASE("grad theta monitor on zero data and a single mode") {
  const auto g = grid(32);
  SimState s{SpectralField(g), SpectralField(g), 0.0};
  const auto z = grad_theta_monitor(s, 0.95);
  CHECK(z.grad_theta_linf == 0.0);
  CHECK(z.M_tilde == 0.0);
  s.theta_hat = to_spectral(cos_x1(g));
  const auto m = grad_theta_monitor(s, 0.95);
  CHECK(std::abs(m.grad_theta_linf - 1.0) < 1e-12);
  // G = -R_alpha theta, u~ = grad-perp Delta^{-1} G: |grad u~| = |d1 d1 Delta^{-1} R_alpha cos x1| = 1.
  CHECK(std::abs(m.M_tilde - 1.0) < 1e-12);
}

TEST_CASE("CSV header order and round trip formatting") {
  std::ostringstream os;
  write_csv_header(os);
  CHECK(os.str() ==
        "t,theta_l2,theta_linf,u_l2,omega_linf,grad_theta_linf,G_l2,G_lq,q,G_besov,s,diss_u_accum,diss_G_accum,"
        "margin_maxprinciple_l2,margin_maxprinciple_linf,margin_energy_linear,cordoba_min,oss_delta_measured\n");
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::nextafter(1.0, 2.0)})
    CHECK(std::stod(format_double(v)) == v);
  DiagnosticsRecord r;
  r.t = 0.1;
  r.oss_delta_measured = 1.0 / 7.0;
  std::ostringstream row;
  write_csv_row(row, r);
  const auto line = row.str();
  CHECK(std::count(line.begin(), line.end(), ',') == 17);
  CHECK(line.back() == '\n');
}

TEST_CASE("diagnostics are pure functions of the state") {
  const auto g = grid(32);
  FlowParams p;
  p.alpha = 0.95;
  p.beta = 0.05;
  const auto s = initial_data(InitKind::random_band, 1, g);
  const auto m = resolve_monitor_settings(p.alpha, std::nullopt, std::nullopt, 0.3);
  const auto d = start_diagnostics(s, p);
  const auto a = diagnose(s, p, m, d);
  const auto b = diagnose(s, p, m, d);
  std::ostringstream x, y;
  write_csv_row(x, a);
  write_csv_row(y, b);
  CHECK(x.str() == y.str());
  CHECK(a.margin_maxprinciple_l2 == 0.0);
  CHECK(a.margin_maxprinciple_linf == 0.0);
  CHECK(a.margin_energy_linear == 0.0);
  CHECK(a.diss_u_accum == 0.0);
  CHECK(a.cordoba_min >= -1e-8);
  CHECK(a.oss_delta_measured > 0.0);
}

TEST_CASE("dissipation accumulates by the trapezoid rule") {
  const auto g = grid(32);
  FlowParams p;
  p.alpha = 0.95;
  SimState s{SpectralField(g), to_spectral(sample(g, [](double x, double) { return std::sin(x); })), 0.0};
  auto d = start_diagnostics(s, p);
  // u = (0, -cos x1)/... : |Lambda^{alpha/2} u|^2 = |u|^2 for a |k| = 1 mode = 2 pi^2.
  const double rate = 2.0 * std::numbers::pi * std::numbers::pi;
  s.t = 0.5;
  accumulate_dissipation(d, s, p);
  CHECK(std::abs(d.diss_u_accum - 0.5 * rate) < 1e-12 * rate);
  CHECK(std::abs(d.diss_G_accum - 0.5 * rate) < 1e-12 * rate);
}

TEST_CASE("zero data gives zero monitors") {
  const auto g = grid(32);
  FlowParams p;
  p.alpha = 0.95;
  SimState s{SpectralField(g), SpectralField(g), 0.0};
  const auto m = resolve_monitor_settings(p.alpha, std::nullopt, std::nullopt, 0.3);
  const auto r = diagnose(s, p, m, start_diagnostics(s, p));
  CHECK(r.G_l2 == 0.0);
  CHECK(r.G_lq == 0.0);
  CHECK(r.G_besov == 0.0);
  CHECK(r.grad_theta_linf == 0.0);
}
