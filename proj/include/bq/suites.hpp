// Verification suites shared by the command line and the acceptance binary:
// each produces rows of (check, case, value, bound, passed).
#pragma once

#include "bq/config.hpp"
#include "bq/kernel.hpp"
#include "bq/monitors.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace bq {

struct SuiteRow {
  std::string check;
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  bool passed = true;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;
  bool passed() const;
  void add(std::string check, std::string label, double value, double bound, bool passed);
  void append(const SuiteReport& other);
  void write_csv(std::ostream& os) const;
};

/// Trigonometric interpolation onto a grid `factor` times finer.
PhysicalField upsample(const PhysicalField& f, int factor);

struct Trajectory {
  std::vector<PhysicalField> theta_snapshots;  // first states at or past k t_end / count, k = 1..count
  std::vector<DiagnosticsRecord> records;      // one per step, plus t = 0
  DiagnosticsState reference;                  // norms at t = 0
};

/// Runs `cfg` in memory with a diagnostics record after every step.
Trajectory run_trajectory(const RunConfig& cfg, int snapshot_count);

/// Random band-limited fields (|m|_inf <= band) normalized to unit max.
std::vector<PhysicalField> random_ensemble(int n, int count, int band, std::uint64_t seed);

/// Pointwise inequality min margins >= -1e-8 scale on the given fields: convexity inequality
/// for every Gamma in the test set, and the exact parts of the gradient / difference lower bounds.
SuiteReport cordoba_suite(const std::vector<PhysicalField>& fields, const std::vector<double>& betas,
                          const std::string& label);
SuiteReport lower_bound_suite(const std::vector<PhysicalField>& fields, const std::vector<double>& betas,
                              const std::string& label);

/// Index-window checks for alpha (formula values and out-of-window rejection).
SuiteReport index_window_suite(double alpha);

/// Max principle and linear energy margins along a trajectory, within the 1e-6 (1 + t) band.
SuiteReport trajectory_bound_suite(const Trajectory& tr, const std::string& label);

/// Everything above for one configuration.
SuiteReport inequality_suite(const RunConfig& cfg);

/// Calibration residual and S(grad v) error at n; with `refine`, also the error reduction n -> 2n.
/// Sigma circle means and the near/mid/far partition identity.
SuiteReport kernel_suite(double beta, int n, SelfCellRule rule, bool refine = false);

}  // namespace bq
