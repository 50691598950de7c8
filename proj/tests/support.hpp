// Shared helpers for the unit suites: seeded random fields and error metrics.
#pragma once

#include "bq/spectral.hpp"

#include <cmath>
#include <random>

namespace bq::testing {

/// Real field with random coefficients on modes |m|_inf <= kmax (Hermitian by construction).
inline SpectralField random_band_limited(const GridSpec& g, int kmax, std::uint64_t seed, bool zero_mean = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralField f(g);
  for (int m1 = -kmax; m1 <= kmax; ++m1)
    for (int m2 = -kmax; m2 <= kmax; ++m2) {
      // Generate each conjugate pair once, in a canonical half-plane order.
      if (m1 < 0 || (m1 == 0 && m2 < 0)) continue;
      const std::complex<double> c(nd(rng), (m1 == 0 && m2 == 0) ? 0.0 : nd(rng));
      f.at_mode(m1, m2) = c;
      f.at_mode(-m1, -m2) = std::conj(c);
    }
  if (zero_mean) f.at_mode(0, 0) = 0.0;
  return f;
}

/// Random real field with coefficients only inside the sharp dyadic annulus 2^j <= |k| < 2^{j+1}.
inline SpectralField random_band(const GridSpec& g, int j, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  SpectralField f(g);
  const double unit = g.wavenumber_unit();
  const int mmax = static_cast<int>(std::ceil(std::ldexp(1.0, j + 1) / unit));
  for (int m1 = 0; m1 <= mmax && m1 < g.n / 2; ++m1)
    for (int m2 = -mmax; m2 <= mmax && m2 < g.n / 2; ++m2) {
      if (m2 <= -g.n / 2) continue;
      if (m1 == 0 && m2 <= 0) continue;
      const double k = unit * std::hypot(m1, m2);
      if (k < std::ldexp(1.0, j) || k >= std::ldexp(1.0, j + 1)) continue;
      const std::complex<double> c(nd(rng), nd(rng));
      f.at_mode(m1, m2) = c;
      f.at_mode(-m1, -m2) = std::conj(c);
    }
  return f;
}

inline double rel_err(const PhysicalField& a, const PhysicalField& b) {
  const double d = (a.values - b.values).abs().maxCoeff();
  const double s = std::max(a.values.abs().maxCoeff(), b.values.abs().maxCoeff());
  return s == 0.0 ? d : d / s;
}

inline double max_abs(const PhysicalField& a) { return a.values.abs().maxCoeff(); }

}  // namespace bq::testing
