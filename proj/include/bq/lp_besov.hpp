// Littlewood-Paley blocks, Besov norms, and the measured-ratio forms of the
// Bernstein, commutator, and interpolation inequalities.
#pragma once

#include "bq/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bq {

enum class BlockKind { sharp, smooth };

struct LPBand {
  int j;
  SpectralField band;
};

struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;
  bool homogeneous = false;
};

/// Range of band indices that can carry energy on this grid.
struct BandRange {
  int first;
  int last;
};
BandRange band_range(const GridSpec& g, BlockKind kind, bool homogeneous);

/// Smooth cutoff: 1 on [0, 1], 0 on [2, inf), C-infinity in between.
double lp_cutoff(double r);

/// Dyadic decomposition. Sharp blocks: j >= 0 holds 2^j <= |k| < 2^{j+1}, j = -1
/// holds |k| < 1. Smooth blocks use lp_cutoff(2^{-j}|k|) - lp_cutoff(2^{1-j}|k|),
/// supported in 2^{j-1} < |k| < 2^{j+1}. The homogeneous variant drops the mean
/// mode and indexes every nonzero shell (j may be negative when L > 2 pi).
std::vector<LPBand> dyadic_blocks(const SpectralField& fh, BlockKind kind = BlockKind::sharp,
                                  bool homogeneous = false);

/// One row per band: (j, 2^{js} ||Delta_j f||_{L^p}).
std::vector<std::pair<int, double>> besov_band_table(const SpectralField& fh, const BesovIndex& idx,
                                                     BlockKind kind = BlockKind::sharp);

double besov_norm(const SpectralField& fh, const BesovIndex& idx, BlockKind kind = BlockKind::sharp);
double besov_norm(const PhysicalField& f, const BesovIndex& idx, BlockKind kind = BlockKind::sharp);

/// Finite-difference form: ||f||_p + ( sum_t ||f(.+t) - f||_p^r |t|^{-2-sr} h^2 )^{1/r}
/// over every grid shift with 0 < |t| <= L/2 (nearest image). r = inf takes the
/// supremum of ||f(.+t) - f||_p / |t|^s. Homogeneous drops the ||f||_p term.
double besov_norm_fd(const PhysicalField& f, double s, double p, double r, bool homogeneous = false);

struct BernsteinRatios {
  double lower;  // ||Lambda^{2a} f||_q / (2^{2aj} ||f||_q)
  double upper;  // ||Lambda^{2a} f||_q / (2^{2aj + 2j(1/p - 1/q)} ||f||_p)
};

/// Input must live in the sharp band j (throws otherwise); returns nullopt for a zero field.
std::optional<BernsteinRatios> bernstein_check(const SpectralField& fh, int j, double order, double p, double q);

/// [R_alpha, u.grad] theta = R_alpha(u.grad theta) - u.grad(R_alpha theta), each product dealiased.
PhysicalField commutator_Ralpha(const Vec2<PhysicalField>& u, const PhysicalField& theta, double alpha);
SpectralField commutator_Ralpha(const Vec2<PhysicalField>& u, const SpectralField& theta_hat, double alpha);

/// Scalar commutator [R_alpha, f] g = R_alpha(f g) - f R_alpha g.
SpectralField commutator_Ralpha_product(const PhysicalField& f, const PhysicalField& g, double alpha);

struct CommutatorIndices {
  double alpha = 0.95;
  double s = 0.2;
  double delta = 0.9;
  double q = 2.0;
  double q1 = 4.0;
  double q2 = 4.0;
  double r = 2.0;
  void validate() const;
};

/// sum_i ||[R_alpha, u_i] theta||_{B^s_{q,r}} / ( sum_i ||u_i||_{B^delta_{q1,inf}} ||theta||_{B^{s+1-alpha-delta}_{q2,r}} ).
/// 0/0 is reported as 0.
double commutator_estimate_ratio(const Vec2<PhysicalField>& u, const PhysicalField& theta, const CommutatorIndices& idx);

struct ConvolutionIndices {
  double delta = 0.5;
  double q = 2.0;
  double q1 = 4.0;
  double q2 = 4.0;
  double r1 = 2.0;
  double r2 = 2.0;
  void validate() const;
};

/// ||phi*(fg) - f (phi*g)||_q / ( || |x|^{delta + 2/r1} phi ||_{r2} ||f||_{B^delta_{q1,r1}} ||g||_{q2} )
/// with periodic convolution, nearest-image |x|, and the homogeneous finite-difference Besov norm.
double convolution_commutator_ratio(const PhysicalField& phi, const PhysicalField& f, const PhysicalField& g,
                                    const ConvolutionIndices& idx);

/// Periodic Gaussian mollifier centred at the origin, unit mass, truncated to |x| <= L/2.
PhysicalField gaussian_mollifier(const GridSpec& g, double width);

/// || grad grad-perp Lambda^{-3+beta} d1 theta ||_inf / ( ||theta||_2 + ||grad theta||_inf ).
double interp_inequality_ratio(const PhysicalField& theta, double beta);

/// ||Lambda^s (G|G|^{q-2})||_2 / ( ||G||_{2q/(2-alpha)}^{q-2} ||Lambda^{2+s-alpha-2(2-alpha)/q} G||_2 ).
double chain_rule_besov_ratio(const PhysicalField& G, double s, double alpha, double q);

}  // namespace bq
