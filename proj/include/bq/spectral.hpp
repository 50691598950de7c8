// Periodic pseudospectral primitives on the torus [0, L)^2.
//
// Transform normalization: the spectral coefficient of mode m is
//
//     c(m) = (1/n^2) * sum_{i,j} f(x_ij) exp(-i k.x_ij),   k = (2 pi / L) m,
//
// i.e. the rectangle-rule approximation of (1/L^2) * integral exp(-i k.x) f dx.
// With this choice Parseval reads
//
//     (L/n)^2 * sum |f(x_ij)|^2 = L^2 * sum_m |c(m)|^2 .
//
// Mode storage follows the FFT ordering: array index a in [0, n) maps to the
// integer wavenumber a for a < n/2 and a - n otherwise, so m ranges over
// {-n/2, ..., n/2 - 1} along each axis. Index (a, b) carries (m1, m2); the
// physical point (i, j) is x = (i L/n, j L/n).
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bq {

struct GridSpec {
  int n = 64;
  double side_length = 2.0 * std::numbers::pi;
  double dealias_fraction = 2.0 / 3.0;

  void validate() const {
    if (n < 8 || n % 2 != 0)
      throw std::invalid_argument("grid: n must be even and >= 8, got " + std::to_string(n));
    if (!(side_length > 0.0) || !std::isfinite(side_length))
      throw std::invalid_argument("grid: side_length must be positive");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
      throw std::invalid_argument("grid: dealias_fraction must lie in (0, 1]");
  }

  double spacing() const { return side_length / n; }
  double cell_area() const { return spacing() * spacing(); }
  double wavenumber_unit() const { return 2.0 * std::numbers::pi / side_length; }
  int mode(int index) const { return index < n / 2 ? index : index - n; }
  bool operator==(const GridSpec&) const = default;
};

struct FlowParams {
  double nu = 1.0;
  double kappa = 1.0;
  double alpha = 0.95;
  double beta = 0.05;
  bool critical = false;

  void validate() const {
    if (!(nu >= 0.0) || !(kappa >= 0.0))
      throw std::invalid_argument("params: nu and kappa must be nonnegative");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::invalid_argument("params: alpha must lie in (0, 1]");
    if (!(beta > 0.0 && beta <= 1.0))
      throw std::invalid_argument("params: beta must lie in (0, 1]");
    // Exact comparison on purpose: a critical run must be configured with
    // alpha and beta that sum to exactly one in binary.
    if (critical && alpha + beta != 1.0)
      throw std::invalid_argument("params: critical flag requires alpha + beta == 1");
  }
};

template <typename Scalar>
using RealGrid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexGrid = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct BasicPhysicalField {
  GridSpec grid;
  RealGrid<Scalar> values;

  BasicPhysicalField() = default;
  explicit BasicPhysicalField(const GridSpec& g) : grid(g), values(RealGrid<Scalar>::Zero(g.n, g.n)) {}
  BasicPhysicalField(const GridSpec& g, RealGrid<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.rows() != g.n || values.cols() != g.n)
      throw std::invalid_argument("physical field: value array does not match grid");
  }

  Scalar& operator()(int i, int j) { return values(i, j); }
  Scalar operator()(int i, int j) const { return values(i, j); }
};

template <typename Scalar>
struct BasicSpectralField {
  GridSpec grid;
  ComplexGrid<Scalar> coeffs;

  BasicSpectralField() = default;
  explicit BasicSpectralField(const GridSpec& g) : grid(g), coeffs(ComplexGrid<Scalar>::Zero(g.n, g.n)) {}
  BasicSpectralField(const GridSpec& g, ComplexGrid<Scalar> c) : grid(g), coeffs(std::move(c)) {
    if (coeffs.rows() != g.n || coeffs.cols() != g.n)
      throw std::invalid_argument("spectral field: coefficient array does not match grid");
  }

  std::complex<Scalar>& at_mode(int m1, int m2) { return coeffs(wrap(m1), wrap(m2)); }
  std::complex<Scalar> at_mode(int m1, int m2) const { return coeffs(wrap(m1), wrap(m2)); }
  std::complex<Scalar> mean_mode() const { return coeffs(0, 0); }

 private:
  int wrap(int m) const { return ((m % grid.n) + grid.n) % grid.n; }
};

using PhysicalField = BasicPhysicalField<double>;
using SpectralField = BasicSpectralField<double>;

template <typename F>
using Vec2 = std::array<F, 2>;
template <typename F>
using Mat2 = std::array<std::array<F, 2>, 2>;

// ---------------------------------------------------------------------------
// Field arithmetic (same-grid, coefficient-wise)

namespace detail {

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw std::invalid_argument("grid mismatch between operands");
}

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine = [] {
    Eigen::FFT<Scalar> e;
    e.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    return e;
  }();
  return engine;
}

// In-place 2D transform; forward uses exp(-i k.x), inverse exp(+i k.x), both unscaled.
template <typename Scalar>
void fft2_inplace(ComplexGrid<Scalar>& a, bool forward) {
  using Vec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
  auto& fft = fft_engine<Scalar>();
  const Eigen::Index n1 = a.rows(), n2 = a.cols();
  Vec in(n1), out(n1);
  for (Eigen::Index j = 0; j < n2; ++j) {
    in = a.col(j).matrix();
    if (forward) fft.fwd(out, in); else fft.inv(out, in);
    a.col(j) = out.array();
  }
  Vec rin(n2), rout(n2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    rin = a.row(i).transpose().matrix();
    if (forward) fft.fwd(rout, rin); else fft.inv(rout, rin);
    a.row(i) = rout.array().transpose();
  }
}

template <typename Scalar>
bool all_finite(const RealGrid<Scalar>& v) {
  return v.isFinite().all();
}

}  // namespace detail

template <typename Scalar>
BasicSpectralField<Scalar> operator+(const BasicSpectralField<Scalar>& a, const BasicSpectralField<Scalar>& b) {
  detail::require_same_grid(a.grid, b.grid);
  return {a.grid, a.coeffs + b.coeffs};
}
template <typename Scalar>
BasicSpectralField<Scalar> operator-(const BasicSpectralField<Scalar>& a, const BasicSpectralField<Scalar>& b) {
  detail::require_same_grid(a.grid, b.grid);
  return {a.grid, a.coeffs - b.coeffs};
}
template <typename Scalar>
BasicSpectralField<Scalar> operator*(Scalar s, const BasicSpectralField<Scalar>& a) {
  return {a.grid, a.coeffs * s};
}
template <typename Scalar>
BasicPhysicalField<Scalar> operator+(const BasicPhysicalField<Scalar>& a, const BasicPhysicalField<Scalar>& b) {
  detail::require_same_grid(a.grid, b.grid);
  return {a.grid, a.values + b.values};
}
template <typename Scalar>
BasicPhysicalField<Scalar> operator-(const BasicPhysicalField<Scalar>& a, const BasicPhysicalField<Scalar>& b) {
  detail::require_same_grid(a.grid, b.grid);
  return {a.grid, a.values - b.values};
}
template <typename Scalar>
BasicPhysicalField<Scalar> operator*(Scalar s, const BasicPhysicalField<Scalar>& a) {
  return {a.grid, a.values * s};
}
/// Pointwise product (no dealiasing; see dealiased_product).
template <typename Scalar>
BasicPhysicalField<Scalar> operator*(const BasicPhysicalField<Scalar>& a, const BasicPhysicalField<Scalar>& b) {
  detail::require_same_grid(a.grid, b.grid);
  return {a.grid, a.values * b.values};
}

// ---------------------------------------------------------------------------
// Transforms

template <typename Scalar>
BasicSpectralField<Scalar> to_spectral(const BasicPhysicalField<Scalar>& f) {
  f.grid.validate();
  if (!detail::all_finite(f.values)) throw std::domain_error("to_spectral: non-finite input");
  ComplexGrid<Scalar> a = f.values.template cast<std::complex<Scalar>>();
  detail::fft2_inplace(a, true);
  a /= static_cast<Scalar>(f.grid.n) * static_cast<Scalar>(f.grid.n);
  return {f.grid, std::move(a)};
}

template <typename Scalar>
BasicPhysicalField<Scalar> to_physical(const BasicSpectralField<Scalar>& fh) {
  fh.grid.validate();
  if (!fh.coeffs.isFinite().all()) throw std::domain_error("to_physical: non-finite input");
  ComplexGrid<Scalar> a = fh.coeffs;
  detail::fft2_inplace(a, false);
  return {fh.grid, a.real()};
}

template <typename Scalar>
BasicPhysicalField<Scalar> sample_as(const GridSpec& g, auto&& fn) {
  g.validate();
  BasicPhysicalField<Scalar> f(g);
  const double h = g.spacing();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) f(i, j) = static_cast<Scalar>(fn(i * h, j * h));
  return f;
}

inline PhysicalField sample(const GridSpec& g, auto&& fn) { return sample_as<double>(g, fn); }

// ---------------------------------------------------------------------------
// Fourier multipliers

/// Multiplies each coefficient by fn(k1, k2, m1, m2) where k is the physical
/// wavevector and m the integer mode.
template <typename Scalar, typename Fn>
BasicSpectralField<Scalar> apply_multiplier(const BasicSpectralField<Scalar>& fh, Fn&& fn) {
  const GridSpec& g = fh.grid;
  const double unit = g.wavenumber_unit();
  BasicSpectralField<Scalar> out(g);
  for (int b = 0; b < g.n; ++b) {
    const int m2 = g.mode(b);
    for (int a = 0; a < g.n; ++a) {
      const int m1 = g.mode(a);
      out.coeffs(a, b) = fh.coeffs(a, b) * std::complex<Scalar>(fn(unit * m1, unit * m2, m1, m2));
    }
  }
  return out;
}

namespace detail {
// Odd multipliers break Hermitian symmetry on the unpaired Nyquist line, so
// they annihilate it.
inline bool on_nyquist(const GridSpec& g, int m1, int m2) { return m1 == -g.n / 2 || m2 == -g.n / 2; }
}  // namespace detail

/// Lambda^gamma: multiplier |k|^gamma; the mean mode maps to 0 unless gamma == 0.
template <typename Scalar>
BasicSpectralField<Scalar> fractional_laplacian(const BasicSpectralField<Scalar>& fh, double gamma) {
  if (!std::isfinite(gamma)) throw std::invalid_argument("fractional_laplacian: non-finite order");
  if (gamma == 0.0) return fh;
  return apply_multiplier(fh, [gamma](double k1, double k2, int m1, int m2) -> std::complex<double> {
    if (m1 == 0 && m2 == 0) return 0.0;
    return std::pow(std::hypot(k1, k2), gamma);
  });
}

template <typename Scalar>
BasicSpectralField<Scalar> partial(const BasicSpectralField<Scalar>& fh, int axis) {
  const GridSpec g = fh.grid;
  return apply_multiplier(fh, [&](double k1, double k2, int m1, int m2) -> std::complex<double> {
    if (detail::on_nyquist(g, m1, m2)) return 0.0;
    return {0.0, axis == 0 ? k1 : k2};
  });
}

template <typename Scalar>
Vec2<BasicSpectralField<Scalar>> grad(const BasicSpectralField<Scalar>& fh) {
  return {partial(fh, 0), partial(fh, 1)};
}

/// grad-perp = (-d2, d1).
template <typename Scalar>
Vec2<BasicSpectralField<Scalar>> perp_grad(const BasicSpectralField<Scalar>& fh) {
  return {Scalar(-1) * partial(fh, 1), partial(fh, 0)};
}

/// R_alpha = Lambda^{-alpha} d1, multiplier i k1 |k|^{-alpha}.
template <typename Scalar>
BasicSpectralField<Scalar> riesz_alpha(const BasicSpectralField<Scalar>& fh, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("riesz_alpha: alpha must lie in (0, 1]");
  const GridSpec g = fh.grid;
  return apply_multiplier(fh, [&](double k1, double k2, int m1, int m2) -> std::complex<double> {
    if ((m1 == 0 && m2 == 0) || detail::on_nyquist(g, m1, m2)) return 0.0;
    return {0.0, k1 * std::pow(std::hypot(k1, k2), -alpha)};
  });
}

/// u = grad-perp Delta^{-1} omega: u1 = i k2 w / |k|^2, u2 = -i k1 w / |k|^2.
template <typename Scalar>
Vec2<BasicSpectralField<Scalar>> biot_savart(const BasicSpectralField<Scalar>& wh) {
  const GridSpec g = wh.grid;
  auto component = [&](int c) {
    return apply_multiplier(wh, [&, c](double k1, double k2, int m1, int m2) -> std::complex<double> {
      if ((m1 == 0 && m2 == 0) || detail::on_nyquist(g, m1, m2)) return 0.0;
      const double k2sq = k1 * k1 + k2 * k2;
      return c == 0 ? std::complex<double>(0.0, k2 / k2sq) : std::complex<double>(0.0, -k1 / k2sq);
    });
  };
  return {component(0), component(1)};
}

/// v = -grad-perp Lambda^{-3+beta} d1 theta, the temperature-driven part of
/// the velocity when alpha + beta = 1.
template <typename Scalar>
Vec2<BasicSpectralField<Scalar>> v_from_theta(const BasicSpectralField<Scalar>& th, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("v_from_theta: beta must lie in (0, 1)");
  const GridSpec g = th.grid;
  auto component = [&](int c) {
    return apply_multiplier(th, [&, c](double k1, double k2, int m1, int m2) -> std::complex<double> {
      if ((m1 == 0 && m2 == 0) || detail::on_nyquist(g, m1, m2)) return 0.0;
      // Lambda^{-3+beta} d1 has symbol i k1 |k|^{beta-3}; -grad-perp = (d2, -d1).
      const double s = k1 * std::pow(std::hypot(k1, k2), beta - 3.0);
      return c == 0 ? std::complex<double>(-k2 * s, 0.0) : std::complex<double>(k1 * s, 0.0);
    });
  };
  return {component(0), component(1)};
}

/// Zeroes every mode with |m_i| > dealias_fraction * n / 2 on either axis.
template <typename Scalar>
BasicSpectralField<Scalar> dealias(const BasicSpectralField<Scalar>& fh) {
  const double cut = fh.grid.dealias_fraction * fh.grid.n / 2.0;
  return apply_multiplier(fh, [cut](double, double, int m1, int m2) -> std::complex<double> {
    return (std::abs(m1) > cut || std::abs(m2) > cut) ? 0.0 : 1.0;
  });
}

template <typename Scalar>
bool is_dealiased(const BasicSpectralField<Scalar>& fh) {
  const GridSpec& g = fh.grid;
  const double cut = g.dealias_fraction * g.n / 2.0;
  for (int b = 0; b < g.n; ++b)
    for (int a = 0; a < g.n; ++a)
      if ((std::abs(g.mode(a)) > cut || std::abs(g.mode(b)) > cut) && fh.coeffs(a, b) != std::complex<Scalar>(0))
        return false;
  return true;
}

/// Spectral coefficients of the pointwise product, with the 2/3-rule applied.
template <typename Scalar>
BasicSpectralField<Scalar> dealiased_product(const BasicPhysicalField<Scalar>& a, const BasicPhysicalField<Scalar>& b) {
  return dealias(to_spectral(a * b));
}

/// Spectral coefficients of u . grad(f), dealiased.
template <typename Scalar>
BasicSpectralField<Scalar> advect(const Vec2<BasicPhysicalField<Scalar>>& u, const BasicSpectralField<Scalar>& fh) {
  const auto g = grad(fh);
  const auto g1 = to_physical(g[0]);
  const auto g2 = to_physical(g[1]);
  detail::require_same_grid(u[0].grid, fh.grid);
  return dealias(to_spectral(BasicPhysicalField<Scalar>(fh.grid, u[0].values * g1.values + u[1].values * g2.values)));
}

// ---------------------------------------------------------------------------
// Norms

/// Discrete L^p norm with uniform quadrature weight (L/n)^2; p = +inf gives the max norm.
template <typename Scalar>
double lp_norm(const BasicPhysicalField<Scalar>& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (std::isinf(p)) return f.values.size() ? static_cast<double>(f.values.abs().maxCoeff()) : 0.0;
  const double w = f.grid.cell_area();
  if (p == 2.0) return std::sqrt(w * static_cast<double>(f.values.square().sum()));
  if (p == 1.0) return w * static_cast<double>(f.values.abs().sum());
  const double mx = static_cast<double>(f.values.abs().maxCoeff());
  if (mx == 0.0) return 0.0;
  // Scaled to keep |f|^p representable for large p.
  const double s = (f.values.abs().template cast<double>() / mx).pow(p).sum();
  return mx * std::pow(w * s, 1.0 / p);
}

/// L^2 norm computed from coefficients via Parseval (exact companion of lp_norm(., 2)).
template <typename Scalar>
double l2_norm_spectral(const BasicSpectralField<Scalar>& fh) {
  const double L = fh.grid.side_length;
  return L * std::sqrt(static_cast<double>(fh.coeffs.abs2().sum()));
}

/// Inner product (f, g)_{L^2} of two real fields from their coefficients.
template <typename Scalar>
double inner_spectral(const BasicSpectralField<Scalar>& f, const BasicSpectralField<Scalar>& g) {
  detail::require_same_grid(f.grid, g.grid);
  const double L = f.grid.side_length;
  return L * L * static_cast<double>((f.coeffs * g.coeffs.conjugate()).real().sum());
}

/// Pointwise Euclidean magnitude of a vector field.
template <typename Scalar>
BasicPhysicalField<Scalar> magnitude(const Vec2<BasicPhysicalField<Scalar>>& v) {
  return {v[0].grid, (v[0].values.square() + v[1].values.square()).sqrt()};
}

template <typename Scalar>
Vec2<BasicPhysicalField<Scalar>> to_physical(const Vec2<BasicSpectralField<Scalar>>& v) {
  return {to_physical(v[0]), to_physical(v[1])};
}

}  // namespace bq
