// Direct quadrature of the singular-integral representations of the
// temperature-driven velocity v, its gradient, and its symmetric gradient,
// plus calibration of the kernel constant against the spectral evaluation.
//
// The integrals are evaluated as free-space Riemann sums: theta is taken as
// zero outside the fundamental cell and x - y is never wrapped, so every
// target point sees the whole support of theta.
#pragma once

#include "bq/spectral.hpp"

#include <Eigen/Dense>

namespace bq {

enum class SelfCellRule { exclude, polar };
enum class QuadratureEngine { fft, direct };

struct KernelConfig {
  double beta = 0.5;
  SelfCellRule self_cell_rule = SelfCellRule::exclude;
  /// Largest |x - y| included in the sums; infinity keeps every node pair.
  double truncation_radius = INFINITY;
  /// fft evaluates exactly the same Riemann sums as direct, as zero-padded linear convolutions.
  QuadratureEngine engine = QuadratureEngine::fft;
  void validate() const;
};

/// sigma(z) = |z|^{-2} [[-2 z1 z2, z1^2 - z2^2], [z1^2 - z2^2, 2 z1 z2]].
Eigen::Matrix2d sigma(const Eigen::Vector2d& z);

/// Trapezoid-rule mean of sigma over the circle |z| = r with m nodes.
Eigen::Matrix2d circle_mean_sigma(double r, int m);

template <typename T>
struct Quadrature {
  T field;
  /// theta exceeded 1e-5 of its peak beyond radius 3L/8 from the cell centre.
  bool support_warning = false;
};

/// True when |theta| > tol * max|theta| somewhere beyond radius_fraction * L from the cell centre.
bool support_exceeds(const PhysicalField& theta, double radius_fraction = 0.375, double tol = 1e-5);

/// v(x) = C sum_y (x-y)^perp / |x-y|^{1+beta} d1 theta(y) h^2.
Quadrature<Vec2<PhysicalField>> v_quadrature(const PhysicalField& theta, const KernelConfig& cfg, double C_beta);

/// grad v with entry (i, j) = d_j v_i, from the differentiated kernel
/// C [ J |z|^{-1-beta} - (1+beta) z^perp (x) z |z|^{-3-beta} ], J = [[0,-1],[1,0]].
Quadrature<Mat2<PhysicalField>> grad_v_quadrature(const PhysicalField& theta, const KernelConfig& cfg, double C_beta);

/// S(grad v)(x) = C (1+beta)/2 sum_y sigma(x-y) / |x-y|^{1+beta} (d1 theta(x) - d1 theta(y)) h^2.
/// Exactly symmetric and trace-free.
Quadrature<Mat2<PhysicalField>> symgrad_v_quadrature(const PhysicalField& theta, const KernelConfig& cfg,
                                                    double C_beta);

/// Spectral references: grad v and its symmetric part, entry (i, j) = d_j v_i.
Mat2<PhysicalField> grad_v_spectral(const PhysicalField& theta, double beta);
Mat2<PhysicalField> symgrad_v_spectral(const PhysicalField& theta, double beta);

/// Centred, moment-free bump (1/6)(6 - 18s + 9s^2 - s^3) e^{-s}, s = |x - c|^2 / w^2, w = L/12.
PhysicalField kernel_test_profile(const GridSpec& g);

struct Calibration {
  double C = 0.0;
  double residual = 0.0;  // relative L^2 mismatch of C * v_quadrature against v_from_theta
  bool passed = false;    // residual <= 1e-3
};

/// Least-squares fit of the kernel constant on kernel_test_profile at resolution n.
Calibration calibrate_Cbeta(double beta, int n, SelfCellRule rule = SelfCellRule::exclude);

/// Closed form of the constant, used only as an independent cross-check of calibrate_Cbeta.
double analytic_Cbeta(double beta);

struct KernelOracle {
  int n = 0;
  Calibration calibration;
  double symgrad_error = 0.0;  // relative L^2 (Frobenius) error of S(grad v) with the calibrated constant
  bool support_warning = false;
};

KernelOracle kernel_oracle(double beta, int n, SelfCellRule rule = SelfCellRule::exclude);

struct SymgradSplit {
  Mat2<PhysicalField> near;  // |x - y| <= rho
  Mat2<PhysicalField> mid;   // rho < |x - y| <= L_split
  Mat2<PhysicalField> far;   // |x - y| > L_split
};

/// Partition of the symmetric-gradient sum into three radial regions on the same nodes.
SymgradSplit split_symgrad_bound(const PhysicalField& theta, double rho, double L_split, const KernelConfig& cfg,
                                 double C_beta);

/// delta * integral over rho < |z| <= L_split of |z|^{-2-beta} dz = delta 2 pi (rho^{-beta} - L^{-beta}) / beta.
double mid_region_bound(double delta, double rho, double L_split, double beta);

}  // namespace bq
