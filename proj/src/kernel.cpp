#include "bq/kernel.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace bq {

namespace {

using KernelFn = std::function<double(double, double)>;

// Evaluates out(x) = sum_y k(x - y) src(y) h^2 over grid nodes x, y of the
// fundamental cell with no wrap-around. k is never called at z = 0.
class FreeSpaceSum {
 public:
  FreeSpaceSum(const GridSpec& g, const RealGrid<double>& src, QuadratureEngine engine)
      : g_(g), src_(src), engine_(engine) {
    if (engine_ == QuadratureEngine::fft) {
      const int N = 2 * g_.n;
      src_hat_ = ComplexGrid<double>::Zero(N, N);
      src_hat_.topLeftCorner(g_.n, g_.n) = src_.cast<std::complex<double>>();
      detail::fft2_inplace(src_hat_, true);
    }
  }

  RealGrid<double> apply(const KernelFn& k) const {
    return engine_ == QuadratureEngine::fft ? apply_fft(k) : apply_direct(k);
  }

 private:
  RealGrid<double> apply_fft(const KernelFn& k) const {
    const int n = g_.n, N = 2 * n;
    const double h = g_.spacing();
    ComplexGrid<double> kz = ComplexGrid<double>::Zero(N, N);
    for (int j = 0; j < N; ++j) {
      if (j == n) continue;
      const double z2 = (j < n ? j : j - N) * h;
      for (int i = 0; i < N; ++i) {
        if (i == n || (i == 0 && j == 0)) continue;
        kz(i, j) = k((i < n ? i : i - N) * h, z2);
      }
    }
    detail::fft2_inplace(kz, true);
    kz *= src_hat_;
    detail::fft2_inplace(kz, false);
    const double scale = g_.cell_area() / (static_cast<double>(N) * N);
    return kz.topLeftCorner(n, n).real() * scale;
  }

  RealGrid<double> apply_direct(const KernelFn& k) const {
    const int n = g_.n;
    const double h = g_.spacing();
    // Tabulate k over every displacement once; x - y spans (-n, n) on each axis.
    RealGrid<double> table = RealGrid<double>::Zero(2 * n - 1, 2 * n - 1);
    for (int j = -(n - 1); j < n; ++j)
      for (int i = -(n - 1); i < n; ++i)
        if (i != 0 || j != 0) table(i + n - 1, j + n - 1) = k(i * h, j * h);
    RealGrid<double> out = RealGrid<double>::Zero(n, n);
    for (int xj = 0; xj < n; ++xj)
      for (int xi = 0; xi < n; ++xi) {
        double acc = 0.0;
        for (int yj = 0; yj < n; ++yj)
          for (int yi = 0; yi < n; ++yi) acc += table(xi - yi + n - 1, xj - yj + n - 1) * src_(yi, yj);
        out(xi, xj) = acc * g_.cell_area();
      }
    return out;
  }

  GridSpec g_;
  RealGrid<double> src_;
  QuadratureEngine engine_;
  ComplexGrid<double> src_hat_;
};

// Radial window lo < |z| <= hi, intersected with the configured truncation.
struct Window {
  double lo = 0.0;
  double hi = INFINITY;
  bool contains(double r) const { return r > lo && r <= hi; }
};

// Sum of k over every displacement the quadrature can see, restricted to the window.
double lattice_sum(const GridSpec& g, const KernelFn& k, const Window& w) {
  const int n = g.n;
  const double h = g.spacing();
  double acc = 0.0;
  for (int j = -(n - 1); j < n; ++j)
    for (int i = -(n - 1); i < n; ++i) {
      if (i == 0 && j == 0) continue;
      if (w.contains(h * std::hypot(i, j))) acc += k(i * h, j * h);
    }
  return acc * g.cell_area();
}

PhysicalField d1_of(const PhysicalField& theta) { return to_physical(partial(to_spectral(theta), 0)); }

// Disk of the same area as one cell, used by the polar self-cell correction.
double polar_radius(const GridSpec& g) { return g.spacing() / std::sqrt(std::numbers::pi); }

Mat2<PhysicalField> symgrad_in_window(const PhysicalField& theta, const KernelConfig& cfg, double C_beta,
                                      const Window& w) {
  const GridSpec& g = theta.grid;
  const double beta = cfg.beta;
  const auto f = d1_of(theta);
  const FreeSpaceSum sum(g, f.values, cfg.engine);
  auto s11 = [&](double z1, double z2) {
    const double r = std::hypot(z1, z2);
    return w.contains(r) ? -2.0 * z1 * z2 * std::pow(r, -3.0 - beta) : 0.0;
  };
  auto s12 = [&](double z1, double z2) {
    const double r = std::hypot(z1, z2);
    return w.contains(r) ? (z1 * z1 - z2 * z2) * std::pow(r, -3.0 - beta) : 0.0;
  };
  // Inserted d1 theta(x) term: the window sums vanish by 90-degree rotation
  // symmetry and are kept so the evaluated form is exactly the difference form.
  const double k = C_beta * (1.0 + beta) / 2.0;
  const PhysicalField a(g, k * (f.values * lattice_sum(g, s11, w) - sum.apply(s11)));
  const PhysicalField b(g, k * (f.values * lattice_sum(g, s12, w) - sum.apply(s12)));
  return {{{a, b}, {b, -1.0 * a}}};
}

Window full_window(const KernelConfig& cfg) { return {0.0, cfg.truncation_radius}; }

double rel_l2(const std::vector<const RealGrid<double>*>& approx, const std::vector<const RealGrid<double>*>& exact) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    num += (*approx[i] - *exact[i]).square().sum();
    den += exact[i]->square().sum();
  }
  return std::sqrt(num / den);
}

}  // namespace

void KernelConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("kernel: beta must lie in (0, 1)");
  if (!(truncation_radius > 0.0)) throw std::invalid_argument("kernel: truncation_radius must be positive");
}

Eigen::Matrix2d sigma(const Eigen::Vector2d& z) {
  const double r2 = z.squaredNorm();
  if (r2 == 0.0) throw std::invalid_argument("sigma: z must be nonzero");
  Eigen::Matrix2d s;
  const double off = (z(0) * z(0) - z(1) * z(1)) / r2;
  const double diag = 2.0 * z(0) * z(1) / r2;
  s << -diag, off, off, diag;
  return s;
}

Eigen::Matrix2d circle_mean_sigma(double r, int m) {
  if (!(r > 0.0)) throw std::invalid_argument("circle_mean_sigma: radius must be positive");
  if (m < 8) throw std::invalid_argument("circle_mean_sigma: need at least 8 nodes");
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  for (int i = 0; i < m; ++i) {
    const double t = 2.0 * std::numbers::pi * i / m;
    acc += sigma(Eigen::Vector2d(r * std::cos(t), r * std::sin(t)));
  }
  return acc / m;
}

bool support_exceeds(const PhysicalField& theta, double radius_fraction, double tol) {
  const GridSpec& g = theta.grid;
  const double L = g.side_length, h = g.spacing();
  const double peak = theta.values.abs().maxCoeff();
  const double rad = radius_fraction * L;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      if (std::hypot(i * h - L / 2, j * h - L / 2) > rad && std::abs(theta(i, j)) > tol * peak) return true;
  return false;
}

Quadrature<Vec2<PhysicalField>> v_quadrature(const PhysicalField& theta, const KernelConfig& cfg, double C_beta) {
  cfg.validate();
  const GridSpec& g = theta.grid;
  const double beta = cfg.beta;
  const Window w = full_window(cfg);
  const auto th = to_spectral(theta);
  const auto f = to_physical(partial(th, 0));
  const FreeSpaceSum sum(g, f.values, cfg.engine);
  // (x - y)^perp = (-z2, z1).
  const RealGrid<double> v1 = sum.apply([&](double z1, double z2) {
    const double r = std::hypot(z1, z2);
    return w.contains(r) ? -z2 * std::pow(r, -1.0 - beta) : 0.0;
  });
  const RealGrid<double> v2 = sum.apply([&](double z1, double z2) {
    const double r = std::hypot(z1, z2);
    return w.contains(r) ? z1 * std::pow(r, -1.0 - beta) : 0.0;
  });
  Quadrature<Vec2<PhysicalField>> out{{PhysicalField(g, C_beta * v1), PhysicalField(g, C_beta * v2)},
                                      support_exceeds(theta)};
  if (cfg.self_cell_rule == SelfCellRule::polar) {
    // Self disk: -C J grad(d1 theta)(x) * pi a^{3-beta} / (3 - beta).
    const double a = polar_radius(g);
    const double m = C_beta * std::numbers::pi * std::pow(a, 3.0 - beta) / (3.0 - beta);
    const auto g11 = to_physical(partial(partial(th, 0), 0));
    const auto g12 = to_physical(partial(partial(th, 0), 1));
    out.field[0].values += m * g12.values;
    out.field[1].values -= m * g11.values;
  }
  return out;
}

Quadrature<Mat2<PhysicalField>> grad_v_quadrature(const PhysicalField& theta, const KernelConfig& cfg, double C_beta) {
  cfg.validate();
  const GridSpec& g = theta.grid;
  const double beta = cfg.beta;
  const Window w = full_window(cfg);
  const auto f = d1_of(theta);
  const FreeSpaceSum sum(g, f.values, cfg.engine);
  static constexpr double J[2][2] = {{0.0, -1.0}, {1.0, 0.0}};
  Quadrature<Mat2<PhysicalField>> out{{{{PhysicalField(g), PhysicalField(g)}, {PhysicalField(g), PhysicalField(g)}}},
                                      support_exceeds(theta)};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const RealGrid<double> e = sum.apply([&](double z1, double z2) {
        const double r = std::hypot(z1, z2);
        if (!w.contains(r)) return 0.0;
        const double zp[2] = {-z2, z1}, z[2] = {z1, z2};
        return J[i][j] * std::pow(r, -1.0 - beta) - (1.0 + beta) * zp[i] * z[j] * std::pow(r, -3.0 - beta);
      });
      out.field[i][j] = PhysicalField(g, C_beta * e);
    }
  if (cfg.self_cell_rule == SelfCellRule::polar) {
    // Self disk: C J pi a^{1-beta} d1 theta(x); purely antisymmetric.
    const double m = C_beta * std::numbers::pi * std::pow(polar_radius(g), 1.0 - beta);
    out.field[0][1].values -= m * f.values;
    out.field[1][0].values += m * f.values;
  }
  return out;
}

Quadrature<Mat2<PhysicalField>> symgrad_v_quadrature(const PhysicalField& theta, const KernelConfig& cfg,
                                                    double C_beta) {
  cfg.validate();
  // The self disk contributes nothing to the symmetric part (sigma has zero circle mean),
  // so both self-cell rules evaluate the same sum.
  return {symgrad_in_window(theta, cfg, C_beta, full_window(cfg)), support_exceeds(theta)};
}

Mat2<PhysicalField> grad_v_spectral(const PhysicalField& theta, double beta) {
  const auto v = v_from_theta(to_spectral(theta), beta);
  Mat2<PhysicalField> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = to_physical(partial(v[i], j));
  return out;
}

Mat2<PhysicalField> symgrad_v_spectral(const PhysicalField& theta, double beta) {
  auto gv = grad_v_spectral(theta, beta);
  const PhysicalField off = 0.5 * (gv[0][1] + gv[1][0]);
  gv[0][1] = off;
  gv[1][0] = off;
  return gv;
}

PhysicalField kernel_test_profile(const GridSpec& g) {
  const double L = g.side_length, w = L / 12.0;
  return sample(g, [=](double x, double y) {
    const double s = ((x - L / 2) * (x - L / 2) + (y - L / 2) * (y - L / 2)) / (w * w);
    return (6.0 - 18.0 * s + 9.0 * s * s - s * s * s) / 6.0 * std::exp(-s);
  });
}

double analytic_Cbeta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("analytic_Cbeta: beta must lie in (0, 1)");
  return -(1.0 - beta) * std::tgamma((beta - 1.0) / 2.0) /
         (std::pow(2.0, 3.0 - beta) * std::numbers::pi * std::tgamma((3.0 - beta) / 2.0));
}

namespace {

struct Fit {
  Calibration calibration;
  bool support_warning;
};

Fit fit_constant(const PhysicalField& theta, const KernelConfig& cfg) {
  const auto q = v_quadrature(theta, cfg, 1.0);
  const auto v = to_physical(v_from_theta(to_spectral(theta), cfg.beta));
  const double num = (q.field[0].values * v[0].values + q.field[1].values * v[1].values).sum();
  const double den = (q.field[0].values.square() + q.field[1].values.square()).sum();
  Calibration c;
  c.C = num / den;
  const RealGrid<double> r0 = c.C * q.field[0].values, r1 = c.C * q.field[1].values;
  c.residual = rel_l2({&r0, &r1}, {&v[0].values, &v[1].values});
  c.passed = c.residual <= 1e-3;
  return {c, q.support_warning};
}

}  // namespace

Calibration calibrate_Cbeta(double beta, int n, SelfCellRule rule) {
  GridSpec g;
  g.n = n;
  g.validate();
  KernelConfig cfg;
  cfg.beta = beta;
  cfg.self_cell_rule = rule;
  cfg.validate();
  return fit_constant(kernel_test_profile(g), cfg).calibration;
}

KernelOracle kernel_oracle(double beta, int n, SelfCellRule rule) {
  GridSpec g;
  g.n = n;
  g.validate();
  KernelConfig cfg;
  cfg.beta = beta;
  cfg.self_cell_rule = rule;
  cfg.validate();
  const auto theta = kernel_test_profile(g);
  const auto fit = fit_constant(theta, cfg);
  const auto sq = symgrad_v_quadrature(theta, cfg, fit.calibration.C).field;
  const auto ss = symgrad_v_spectral(theta, beta);
  std::vector<const RealGrid<double>*> a, e;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      a.push_back(&sq[i][j].values);
      e.push_back(&ss[i][j].values);
    }
  return {n, fit.calibration, rel_l2(a, e), fit.support_warning};
}

SymgradSplit split_symgrad_bound(const PhysicalField& theta, double rho, double L_split, const KernelConfig& cfg,
                                 double C_beta) {
  cfg.validate();
  if (!(rho > 0.0 && rho < L_split && L_split <= theta.grid.side_length / 2.0))
    throw std::invalid_argument("split_symgrad_bound: need 0 < rho < L_split <= L/2");
  const double R = cfg.truncation_radius;
  return {symgrad_in_window(theta, cfg, C_beta, {0.0, std::min(rho, R)}),
          symgrad_in_window(theta, cfg, C_beta, {std::min(rho, R), std::min(L_split, R)}),
          symgrad_in_window(theta, cfg, C_beta, {std::min(L_split, R), R})};
}

double mid_region_bound(double delta, double rho, double L_split, double beta) {
  if (!(rho > 0.0 && rho < L_split)) throw std::invalid_argument("mid_region_bound: need 0 < rho < L_split");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("mid_region_bound: beta must lie in (0, 1)");
  if (!(delta >= 0.0)) throw std::invalid_argument("mid_region_bound: delta must be nonnegative");
  return delta * 2.0 * std::numbers::pi * (std::pow(rho, -beta) - std::pow(L_split, -beta)) / beta;
}

}  // namespace bq
