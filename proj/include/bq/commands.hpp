// Subcommand implementations behind the bqsim executable. Each returns a process
// exit status: 0 success, 2 configuration/input error, 3 blow-up abort,
// 4 failed assertion in a verification suite.
#pragma once

#include "bq/config.hpp"
#include "bq/kernel.hpp"
#include "bq/lp_besov.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bq {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_blowup = 3, exit_assertion = 4 };

/// Everything the run loop carries between steps. The physical snapshot is the
/// canonical state, so a checkpoint of it plus the sidecar resumes bit for bit.
struct RunState {
  FlowSnapshot snapshot;
  long step = 0;
  DiagnosticsState diagnostics;
};

RunState start_run(const RunConfig& cfg);

/// Called after every completed step with the updated run state and its spectral form.
using StepObserver = std::function<void(const RunState&, const SimState&)>;

/// Advances until t_end or until cfg.stepper.max_steps steps have been taken in this call.
/// BlowUp / StepUnderflow propagate with `st` left at the last good state.
void advance(RunState& st, const RunConfig& cfg, const StepObserver& observer = {});

/// Sidecar "<checkpoint>.state": step index and diagnostic accumulators, %.17g text.
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);
void write_sidecar(const std::filesystem::path& checkpoint, const RunState& st);
/// Restores step and accumulators into `st`; returns false when no sidecar exists.
bool read_sidecar(const std::filesystem::path& checkpoint, RunState& st);

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Resumes from a checkpoint. Keys set in the config file must agree with the checkpoint
/// header; keys passed as overrides replace header values (except n and side_length).
int cmd_resume(const std::filesystem::path& checkpoint, const std::optional<std::string>& config_path,
               const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err);

int cmd_kernel_verify(double beta, int n, SelfCellRule rule, bool refine, const std::string& out_dir,
                      std::ostream& out, std::ostream& err);

int cmd_inequality_suite(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Band table of theta, omega and G (alpha from the header) for B^s_{p,r}.
int cmd_besov(const std::filesystem::path& checkpoint, double s, double p, double r, BlockKind kind,
              const std::string& out_dir, std::ostream& out, std::ostream& err);

}  // namespace bq
