#include "bq/kernel.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace bq;
using bq::testing::max_abs;
using bq::testing::rel_err;

namespace {

const double pi = std::acos(-1.0);

GridSpec grid(int n) {
  GridSpec g;
  g.n = n;
  return g;
}

// Smooth off-centre blob, well inside the cell so the support check stays quiet.
PhysicalField blob(const GridSpec& g, double cx, double cy, double w) {
  return sample(g, [=](double x, double y) {
    const double s = ((x - cx) * (x - cx) + 0.6 * (y - cy) * (y - cy)) / (w * w);
    return (1.0 + 0.3 * (x - cx)) * std::exp(-s);
  });
}

double mat_err(const Mat2<PhysicalField>& a, const Mat2<PhysicalField>& b) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      num = std::max(num, (a[i][j].values - b[i][j].values).abs().maxCoeff());
      den = std::max(den, b[i][j].values.abs().maxCoeff());
    }
  return num / den;
}

}  // namespace

TEST_CASE("sigma kernel values and identities") {
  const Eigen::Matrix2d a = sigma(Eigen::Vector2d(1.0, 0.0));
  CHECK(a(0, 0) == 0.0);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 0) == 1.0);
  CHECK(a(1, 1) == 0.0);
  const Eigen::Matrix2d b = sigma(Eigen::Vector2d(1.0, 1.0));
  CHECK(b(0, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(b(0, 1)) <= 1e-16);
  CHECK(b(1, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sigma(Eigen::Vector2d(0.0, 0.0)), std::invalid_argument);
  for (double t = 0.0; t < 2 * pi; t += 0.37) {
    const Eigen::Matrix2d s = sigma(Eigen::Vector2d(2.5 * std::cos(t), 2.5 * std::sin(t)));
    CHECK(std::abs(s.trace()) <= 1e-15);
    CHECK(s(0, 1) == s(1, 0));
    CHECK(s.norm() <= std::sqrt(2.0) + 1e-15);
    CHECK(s.cwiseAbs().maxCoeff() <= 1.0 + 1e-15);
  }
}

TEST_CASE("sigma has zero circle mean") {
  CHECK(circle_mean_sigma(1.0, 64).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(circle_mean_sigma(0.01, 64).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(circle_mean_sigma(3.0, 8).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(circle_mean_sigma(1.0, 7), std::invalid_argument);
  CHECK_THROWS_AS(circle_mean_sigma(0.0, 64), std::invalid_argument);
}

TEST_CASE("kernel config validation") {
  KernelConfig cfg;
  cfg.beta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.beta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.beta = 0.5;
  cfg.truncation_radius = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("quadrature of the zero field is zero") {
  const auto g = grid(32);
  const auto z = sample(g, [](double, double) { return 0.0; });
  const KernelConfig cfg;
  const auto v = v_quadrature(z, cfg, 1.0);
  CHECK(max_abs(v.field[0]) == 0.0);
  CHECK(max_abs(v.field[1]) == 0.0);
  const auto s = symgrad_v_quadrature(z, cfg, 1.0);
  CHECK(max_abs(s.field[0][0]) == 0.0);
}

TEST_CASE("radially symmetric theta: reflection symmetry at the centre") {
  // d1 theta is odd in x1 and even in x2, so the x2-odd kernel component v1
  // cancels at the centre; v2 = -d1 d1 Lambda^{beta-3} theta does not.
  const auto g = grid(64);
  const double c = g.side_length / 2;
  const auto th = sample(g, [c](double x, double y) { return std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) / 0.3); });
  const auto vs = to_physical(v_from_theta(to_spectral(th), 0.5));
  for (auto rule : {SelfCellRule::exclude, SelfCellRule::polar}) {
    KernelConfig cfg;
    cfg.self_cell_rule = rule;
    const auto v = v_quadrature(th, cfg, 1.0);
    const double scale = std::max(max_abs(v.field[0]), max_abs(v.field[1]));
    CHECK(scale > 0.0);
    CHECK(std::abs(v.field[0](32, 32)) <= 1e-13 * scale);
    CHECK(v.field[1](32, 32) * vs[1](32, 32) > 0.0);
  }
}

TEST_CASE("fft and direct engines evaluate the same sums") {
  const auto g = grid(24);
  const auto th = blob(g, 2.9, 3.4, 0.7);
  for (double beta : {0.2, 0.7})
    for (auto rule : {SelfCellRule::exclude, SelfCellRule::polar})
      for (double R : {double(INFINITY), 2.0}) {
        KernelConfig fast{beta, rule, R, QuadratureEngine::fft};
        KernelConfig slow{beta, rule, R, QuadratureEngine::direct};
        const auto vf = v_quadrature(th, fast, 1.3).field;
        const auto vs = v_quadrature(th, slow, 1.3).field;
        CHECK(rel_err(vf[0], vs[0]) <= 1e-12);
        CHECK(rel_err(vf[1], vs[1]) <= 1e-12);
        CHECK(mat_err(grad_v_quadrature(th, fast, 1.3).field, grad_v_quadrature(th, slow, 1.3).field) <= 1e-12);
        CHECK(mat_err(symgrad_v_quadrature(th, fast, 1.3).field, symgrad_v_quadrature(th, slow, 1.3).field) <= 1e-12);
      }
}

TEST_CASE("quadrature is linear in theta") {
  const auto g = grid(64);
  const auto a = blob(g, 3.0, 3.2, 0.5);
  const auto b = blob(g, 3.3, 2.9, 0.4);
  const KernelConfig cfg;
  const auto lhs = v_quadrature(2.0 * a - b, cfg, 0.7).field;
  const auto va = v_quadrature(a, cfg, 0.7).field;
  const auto vb = v_quadrature(b, cfg, 0.7).field;
  CHECK(rel_err(lhs[0], 2.0 * va[0] - vb[0]) <= 1e-12);
  CHECK(rel_err(lhs[1], 2.0 * va[1] - vb[1]) <= 1e-12);
}

TEST_CASE("symmetric gradient structure") {
  const auto g = grid(64);
  const auto th = blob(g, 3.0, 3.3, 0.5);
  for (auto rule : {SelfCellRule::exclude, SelfCellRule::polar}) {
    KernelConfig cfg;
    cfg.beta = 0.4;
    cfg.self_cell_rule = rule;
    const auto s = symgrad_v_quadrature(th, cfg, 1.0).field;
    const double scale = max_abs(s[0][0]) + max_abs(s[0][1]);
    CHECK(max_abs(s[0][0] + s[1][1]) <= 1e-10 * scale);
    CHECK(max_abs(s[0][1] - s[1][0]) == 0.0);

    // The symmetric part of the differentiated-kernel gradient is the same sum.
    const auto gv = grad_v_quadrature(th, cfg, 1.0).field;
    CHECK(rel_err(0.5 * (gv[0][1] + gv[1][0]), s[0][1]) <= 1e-11);
    CHECK(rel_err(gv[0][0], s[0][0]) <= 1e-11);
    CHECK(rel_err(gv[1][1], s[1][1]) <= 1e-11);
  }
}

TEST_CASE("antisymmetric part of the gradient is the scalar-kernel term") {
  const auto g = grid(20);
  const auto th = blob(g, 3.1, 3.0, 0.8);
  const double beta = 0.3, C = 1.1;
  KernelConfig cfg{beta, SelfCellRule::exclude, INFINITY, QuadratureEngine::direct};
  const auto gv = grad_v_quadrature(th, cfg, C).field;
  const auto d1 = to_physical(partial(to_spectral(th), 0));
  const double h = g.spacing();
  for (int i = 0; i < g.n; i += 3)
    for (int j = 0; j < g.n; j += 4) {
      double acc = 0.0;
      for (int b = 0; b < g.n; ++b)
        for (int a = 0; a < g.n; ++a) {
          if (a == i && b == j) continue;
          acc += std::pow(h * std::hypot(i - a, j - b), -1.0 - beta) * d1(a, b) * h * h;
        }
      const double expected = C * (1.0 - beta) / 2.0 * acc;
      CHECK(0.5 * (gv[1][0](i, j) - gv[0][1](i, j)) == doctest::Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("polar self-cell rule only corrects the antisymmetric part") {
  const auto g = grid(64);
  const auto th = blob(g, 3.0, 3.3, 0.5);
  KernelConfig ex, po;
  po.self_cell_rule = SelfCellRule::polar;
  const auto a = grad_v_quadrature(th, ex, 1.0).field;
  const auto b = grad_v_quadrature(th, po, 1.0).field;
  CHECK(rel_err(a[0][0], b[0][0]) <= 1e-14);
  CHECK(rel_err(a[1][1], b[1][1]) <= 1e-14);
  CHECK(rel_err(a[0][1] + a[1][0], b[0][1] + b[1][0]) <= 1e-13);
  CHECK(rel_err(a[0][1], b[0][1]) > 1e-6);
}

TEST_CASE("support check flags fields that reach the cell boundary") {
  const auto g = grid(64);
  CHECK_FALSE(support_exceeds(kernel_test_profile(g)));
  const auto wide = sample(g, [](double x, double y) { return std::exp(-((x - pi) * (x - pi) + (y - pi) * (y - pi)) / 4.0); });
  CHECK(support_exceeds(wide));
  CHECK(v_quadrature(wide, KernelConfig{}, 1.0).support_warning);
  CHECK_FALSE(v_quadrature(kernel_test_profile(g), KernelConfig{}, 1.0).support_warning);
}

TEST_CASE("calibrated constant reproduces the spectral velocity") {
  const auto c = calibrate_Cbeta(0.5, 256);
  CHECK(c.passed);
  CHECK(c.residual <= 1e-3);
  CHECK(c.C > 0.0);
  CHECK(c.C == doctest::Approx(analytic_Cbeta(0.5)).epsilon(0.01));
  const auto again = calibrate_Cbeta(0.5, 256);
  CHECK(again.C == c.C);
  CHECK(again.residual == c.residual);
}

TEST_CASE("analytic constant closed form") {
  CHECK(analytic_Cbeta(0.5) == doctest::Approx(0.152149).epsilon(1e-5));
  for (double b : {0.1, 0.5, 0.9}) CHECK(analytic_Cbeta(b) > 0.0);
}

TEST_CASE("symmetric gradient matches the spectral oracle") {
  const auto o = kernel_oracle(0.5, 256);
  CHECK(o.calibration.passed);
  CHECK(o.symgrad_error <= 1e-2);
  CHECK_FALSE(o.support_warning);
}

TEST_CASE("three-region split partitions the symmetric gradient") {
  const auto g = grid(64);
  const auto th = to_physical(bq::testing::random_band_limited(g, 10, 3));
  KernelConfig cfg;
  cfg.beta = 0.6;
  const auto full = symgrad_v_quadrature(th, cfg, 0.9).field;
  const auto sp = split_symgrad_bound(th, 0.4, 2.0, cfg, 0.9);
  Mat2<PhysicalField> sum = full;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sum[i][j] = sp.near[i][j] + sp.mid[i][j] + sp.far[i][j];
  CHECK(mat_err(sum, full) <= 1e-12);

  CHECK_THROWS_AS(split_symgrad_bound(th, 2.0, 1.0, cfg, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(split_symgrad_bound(th, 0.5, 4.0, cfg, 0.9), std::invalid_argument);
}

TEST_CASE("near region vanishes as rho shrinks for smooth theta") {
  const auto g = grid(128);
  const auto th = kernel_test_profile(g);
  KernelConfig cfg;
  const double h = g.spacing();
  auto near_size = [&](double rho) { return max_abs(split_symgrad_bound(th, rho, 2.0, cfg, 1.0).near[0][1]); };
  const double total = max_abs(symgrad_v_quadrature(th, cfg, 1.0).field[0][1]);
  CHECK(near_size(0.5 * h) == 0.0);  // only the excluded self cell
  CHECK(near_size(2 * h) < 0.25 * total);
  CHECK(near_size(2 * h) < near_size(4 * h));
  CHECK(near_size(h) < near_size(2 * h));
}

TEST_CASE("mid-region bound formula and scaling") {
  CHECK(mid_region_bound(0.1, 0.5, 2.0, 0.5) ==
        doctest::Approx(0.1 * 2 * pi * (std::pow(0.5, -0.5) - std::pow(2.0, -0.5)) / 0.5));
  CHECK(mid_region_bound(0.0, 0.5, 2.0, 0.5) == 0.0);
  const double r = mid_region_bound(1.0, 1e-6, 3.0, 0.4) / mid_region_bound(1.0, 2e-6, 3.0, 0.4);
  CHECK(r == doctest::Approx(std::pow(2.0, 0.4)).epsilon(1e-3));
  CHECK_THROWS_AS(mid_region_bound(1.0, 2.0, 1.0, 0.5), std::invalid_argument);
}
