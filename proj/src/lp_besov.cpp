#include "bq/lp_besov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bq {

namespace {

// floor(log2(k)) for k > 0, exact at powers of two.
int floor_log2(double k) {
  int e = 0;
  std::frexp(k, &e);
  return e - 1;
}

int ceil_log2(double k) {
  const int f = floor_log2(k);
  return std::ldexp(1.0, f) == k ? f : f + 1;
}

double max_wavenumber(const GridSpec& g) { return g.wavenumber_unit() * std::sqrt(2.0) * (g.n / 2); }

double smooth_band_weight(int j, double k, bool homogeneous) {
  if (j == -1 && !homogeneous) return lp_cutoff(2.0 * k);
  const double a = std::ldexp(k, -j);
  return lp_cutoff(a) - lp_cutoff(2.0 * a);
}

int sharp_band_of(double k, bool homogeneous) {
  if (!homogeneous && k < 1.0) return -1;
  return floor_log2(k);
}

// L^p norm of a raw grid array with cell weight w.
double lp_array(const RealGrid<double>& v, double w, double p) {
  if (std::isinf(p)) return v.abs().maxCoeff();
  if (p == 2.0) return std::sqrt(w * v.square().sum());
  const double mx = v.abs().maxCoeff();
  if (mx == 0.0) return 0.0;
  return mx * std::pow(w * (v.abs() / mx).pow(p).sum(), 1.0 / p);
}

double lr_combine(const std::vector<double>& terms, double r) {
  if (std::isinf(r)) return terms.empty() ? 0.0 : *std::max_element(terms.begin(), terms.end());
  double mx = 0.0;
  for (double t : terms) mx = std::max(mx, t);
  if (mx == 0.0) return 0.0;
  double acc = 0.0;
  for (double t : terms) acc += std::pow(t / mx, r);
  return mx * std::pow(acc, 1.0 / r);
}

double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  return den == 0.0 ? std::numeric_limits<double>::infinity() : num / den;
}

void require_index(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("index constraint violated: " + what);
}

}  // namespace

double lp_cutoff(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double a = bump(2.0 - r), b = bump(r - 1.0);
  return a / (a + b);
}

BandRange band_range(const GridSpec& g, BlockKind kind, bool homogeneous) {
  const double kmax = max_wavenumber(g);
  const double kmin = g.wavenumber_unit();
  const int first = homogeneous ? floor_log2(kmin) : -1;
  int last = kind == BlockKind::sharp ? floor_log2(kmax) : ceil_log2(kmax);
  if (!homogeneous) last = std::max(last, -1);
  return {first, last};
}

std::vector<LPBand> dyadic_blocks(const SpectralField& fh, BlockKind kind, bool homogeneous) {
  const GridSpec& g = fh.grid;
  const BandRange range = band_range(g, kind, homogeneous);
  std::vector<LPBand> out;
  for (int j = range.first; j <= range.last; ++j) {
    auto band = apply_multiplier(fh, [&](double k1, double k2, int m1, int m2) -> std::complex<double> {
      if (m1 == 0 && m2 == 0) return (!homogeneous && j == -1) ? 1.0 : 0.0;
      const double k = std::hypot(k1, k2);
      if (kind == BlockKind::sharp) return sharp_band_of(k, homogeneous) == j ? 1.0 : 0.0;
      return smooth_band_weight(j, k, homogeneous);
    });
    out.push_back({j, std::move(band)});
  }
  return out;
}

std::vector<std::pair<int, double>> besov_band_table(const SpectralField& fh, const BesovIndex& idx, BlockKind kind) {
  if (!(idx.p >= 1.0)) throw std::invalid_argument("besov: p must be >= 1");
  std::vector<std::pair<int, double>> rows;
  for (const auto& b : dyadic_blocks(fh, kind, idx.homogeneous))
    rows.emplace_back(b.j, std::pow(2.0, b.j * idx.s) * lp_norm(to_physical(b.band), idx.p));
  return rows;
}

double besov_norm(const SpectralField& fh, const BesovIndex& idx, BlockKind kind) {
  if (!(idx.r >= 1.0)) throw std::invalid_argument("besov: r must be >= 1");
  std::vector<double> terms;
  for (const auto& [j, v] : besov_band_table(fh, idx, kind)) terms.push_back(v);
  return lr_combine(terms, idx.r);
}

double besov_norm(const PhysicalField& f, const BesovIndex& idx, BlockKind kind) {
  return besov_norm(to_spectral(f), idx, kind);
}

double besov_norm_fd(const PhysicalField& f, double s, double p, double r, bool homogeneous) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("besov_norm_fd: s must lie in (0, 1)");
  if (!(p >= 1.0) || !(r >= 1.0)) throw std::invalid_argument("besov_norm_fd: p and r must be >= 1");
  const GridSpec& g = f.grid;
  const int n = g.n;
  const double h = g.spacing();
  const double w = g.cell_area();
  const double half = g.side_length / 2.0;
  const RealGrid<double>& v = f.values;
  RealGrid<double> diff(n, n);

  double sup = 0.0, acc = 0.0;
  for (int b = -n / 2; b < n / 2; ++b) {
    for (int a = -n / 2; a < n / 2; ++a) {
      if (a == 0 && b == 0) continue;
      const double t = h * std::hypot(a, b);
      if (t > half) continue;
      for (int j = 0; j < n; ++j) {
        const int jj = ((j + b) % n + n) % n;
        for (int i = 0; i < n; ++i) diff(i, j) = v(((i + a) % n + n) % n, jj) - v(i, j);
      }
      const double d = lp_array(diff, w, p);
      if (std::isinf(r)) sup = std::max(sup, d / std::pow(t, s));
      else acc += std::pow(d, r) / std::pow(t, 2.0 + s * r) * w;
    }
  }
  const double seminorm = std::isinf(r) ? sup : std::pow(acc, 1.0 / r);
  return homogeneous ? seminorm : lp_norm(f, p) + seminorm;
}

std::optional<BernsteinRatios> bernstein_check(const SpectralField& fh, int j, double order, double p, double q) {
  if (j < 0) throw std::invalid_argument("bernstein_check: band index must be >= 0");
  if (!(order >= 0.0)) throw std::invalid_argument("bernstein_check: order must be >= 0");
  if (!(p >= 1.0 && p <= q)) throw std::invalid_argument("bernstein_check: need 1 <= p <= q");
  const GridSpec& g = fh.grid;
  const double peak = fh.coeffs.abs().maxCoeff();
  if (peak == 0.0) return std::nullopt;
  const double unit = g.wavenumber_unit();
  for (int b = 0; b < g.n; ++b)
    for (int a = 0; a < g.n; ++a) {
      if (std::abs(fh.coeffs(a, b)) <= 1e-13 * peak) continue;
      const double k = unit * std::hypot(g.mode(a), g.mode(b));
      if (k == 0.0 || sharp_band_of(k, false) != j)
        throw std::invalid_argument("bernstein_check: input is not supported in band " + std::to_string(j));
    }
  const auto f = to_physical(fh);
  const auto lf = to_physical(fractional_laplacian(fh, 2.0 * order));
  const double lq = lp_norm(lf, q);
  const double scale = std::pow(2.0, 2.0 * order * j);
  const double bern = std::pow(2.0, 2.0 * j * (1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q)));
  return BernsteinRatios{lq / (scale * lp_norm(f, q)), lq / (scale * bern * lp_norm(f, p))};
}

SpectralField commutator_Ralpha(const Vec2<PhysicalField>& u, const SpectralField& theta_hat, double alpha) {
  return riesz_alpha(advect(u, theta_hat), alpha) - advect(u, riesz_alpha(theta_hat, alpha));
}

PhysicalField commutator_Ralpha(const Vec2<PhysicalField>& u, const PhysicalField& theta, double alpha) {
  return to_physical(commutator_Ralpha(u, to_spectral(theta), alpha));
}

SpectralField commutator_Ralpha_product(const PhysicalField& f, const PhysicalField& g, double alpha) {
  const auto rg = to_physical(riesz_alpha(to_spectral(g), alpha));
  return riesz_alpha(dealiased_product(f, g), alpha) - dealiased_product(f, rg);
}

void CommutatorIndices::validate() const {
  require_index(alpha > 0.0 && alpha < 1.0, "alpha in (0,1)");
  require_index(s > 0.0 && s < 1.0, "s in (0,1)");
  require_index(delta > 0.0 && delta < 1.0, "delta in (0,1)");
  require_index(s + 1.0 - alpha - delta < 0.0, "s + 1 - alpha - delta < 0");
  require_index(q >= 2.0 && std::isfinite(q), "q in [2,inf)");
  require_index(r >= 1.0, "r in [1,inf]");
  require_index(q1 >= 2.0 && q2 >= 2.0, "q1, q2 in [2,inf]");
  require_index(std::abs(1.0 / q - 1.0 / q1 - 1.0 / q2) <= 1e-12, "1/q = 1/q1 + 1/q2");
}

double commutator_estimate_ratio(const Vec2<PhysicalField>& u, const PhysicalField& theta, const CommutatorIndices& idx) {
  idx.validate();
  double lhs = 0.0, ub = 0.0;
  for (const auto& ui : u) {
    lhs += besov_norm(commutator_Ralpha_product(ui, theta, idx.alpha), BesovIndex{idx.s, idx.q, idx.r});
    ub += besov_norm(ui, BesovIndex{idx.delta, idx.q1, INFINITY});
  }
  const double tb = besov_norm(theta, BesovIndex{idx.s + 1.0 - idx.alpha - idx.delta, idx.q2, idx.r});
  return safe_ratio(lhs, ub * tb);
}

void ConvolutionIndices::validate() const {
  require_index(delta > 0.0 && delta < 1.0, "delta in (0,1)");
  require_index(q >= 1.0 && q1 >= 1.0 && q2 >= 1.0 && r1 >= 1.0 && r2 >= 1.0, "exponents >= 1");
  require_index(std::abs(1.0 / q - 1.0 / q1 - 1.0 / q2) <= 1e-12, "1/q1 + 1/q2 = 1/q");
  require_index(std::abs(1.0 / r1 + 1.0 / r2 - 1.0) <= 1e-12, "1/r1 + 1/r2 = 1");
}

PhysicalField gaussian_mollifier(const GridSpec& g, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_mollifier: width must be positive");
  const double L = g.side_length;
  auto phi = sample(g, [&](double x, double y) {
    const double dx = x < L / 2 ? x : x - L;
    const double dy = y < L / 2 ? y : y - L;
    const double r2 = dx * dx + dy * dy;
    return r2 > L * L / 4 ? 0.0 : std::exp(-r2 / (width * width));
  });
  const double mass = phi.values.sum() * g.cell_area();
  phi.values /= mass;
  return phi;
}

double convolution_commutator_ratio(const PhysicalField& phi, const PhysicalField& f, const PhysicalField& g,
                                    const ConvolutionIndices& idx) {
  idx.validate();
  detail::require_same_grid(phi.grid, f.grid);
  detail::require_same_grid(f.grid, g.grid);
  const GridSpec& grid = f.grid;
  const double L2 = grid.side_length * grid.side_length;
  const auto ph = to_spectral(phi);
  // Periodic convolution sum_z phi(z) F(x - z) h^2 has coefficients L^2 phi_hat F_hat.
  auto conv = [&](const PhysicalField& F) { return to_physical(SpectralField(grid, L2 * ph.coeffs * to_spectral(F).coeffs)); };
  const auto lhs_field = conv(f * g) - f * conv(g);
  const double lhs = lp_norm(lhs_field, idx.q);

  const double L = grid.side_length;
  const double a = idx.delta + 2.0 / idx.r1;
  const auto weighted = sample(grid, [&](double x, double y) {
    const double dx = x < L / 2 ? x : x - L;
    const double dy = y < L / 2 ? y : y - L;
    return std::pow(std::hypot(dx, dy), a);
  });
  const double wphi = lp_norm(weighted * phi, idx.r2);
  const double fb = besov_norm_fd(f, idx.delta, idx.q1, idx.r1, true);
  const double gq = lp_norm(g, idx.q2);
  // A constant f has an exactly zero difference norm; its commutator is then pure rounding.
  if (fb == 0.0 && lhs <= 1e-12 * lp_norm(f, INFINITY) * lp_norm(g, INFINITY) * L2) return 0.0;
  return safe_ratio(lhs, wphi * fb * gq);
}

double interp_inequality_ratio(const PhysicalField& theta, double beta) {
  const auto th = to_spectral(theta);
  const auto w = perp_grad(fractional_laplacian(partial(th, 0), beta - 3.0));
  RealGrid<double> frob = RealGrid<double>::Zero(theta.grid.n, theta.grid.n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) frob += to_physical(partial(w[i], j)).values.square();
  const double lhs = std::sqrt(frob.maxCoeff());
  const auto gt = to_physical(grad(th));
  const double rhs = lp_norm(theta, 2.0) + lp_norm(magnitude(gt), INFINITY);
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("interp_inequality_ratio: beta must lie in (0,1)");
  return safe_ratio(lhs, rhs);
}

double chain_rule_besov_ratio(const PhysicalField& G, double s, double alpha, double q) {
  require_index(s > 0.0 && s < 1.0, "s in (0,1)");
  require_index(alpha > 0.0 && alpha < 1.0, "alpha in (0,1)");
  require_index(q >= 2.0 && std::isfinite(q), "q in [2,inf)");
  const PhysicalField F(G.grid, G.values * G.values.abs().pow(q - 2.0));
  const double lhs = l2_norm_spectral(fractional_laplacian(to_spectral(F), s));
  const double sigma = 2.0 + s - alpha - 2.0 * (2.0 - alpha) / q;
  const double hs = l2_norm_spectral(fractional_laplacian(to_spectral(G), sigma));
  const double lq = q == 2.0 ? 1.0 : std::pow(lp_norm(G, 2.0 * q / (2.0 - alpha)), q - 2.0);
  return safe_ratio(lhs, lq * hs);
}

}  // namespace bq
