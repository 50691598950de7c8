#include "bq/commands.hpp"

#include "bq/checkpoint.hpp"
#include "bq/suites.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace bq {

namespace fs = std::filesystem;

namespace {

std::string checkpoint_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "chk_%08ld.bqchk", step);
  return buf;
}

void save(const fs::path& path, const RunState& st, const FlowParams& p) {
  write_checkpoint(path, st.snapshot, p);
  write_sidecar(path, st);
}

struct SummaryStats {
  long rows = 0;
  long maxprinciple_violations = 0;
  double min_margin_l2 = std::numeric_limits<double>::infinity();
  double min_margin_linf = std::numeric_limits<double>::infinity();
  double min_margin_energy = std::numeric_limits<double>::infinity();
  double min_cordoba = std::numeric_limits<double>::infinity();

  void add(const DiagnosticsRecord& r, const DiagnosticsState& d) {
    ++rows;
    if (max_principle_violated({r.margin_maxprinciple_l2, r.margin_maxprinciple_linf}, d.theta0_l2, d.theta0_linf,
                               r.t))
      ++maxprinciple_violations;
    min_margin_l2 = std::min(min_margin_l2, r.margin_maxprinciple_l2);
    min_margin_linf = std::min(min_margin_linf, r.margin_maxprinciple_linf);
    min_margin_energy = std::min(min_margin_energy, r.margin_energy_linear);
    min_cordoba = std::min(min_cordoba, r.cordoba_min);
  }
};

void write_summary(std::ostream& os, const RunState& st, const DiagnosticsRecord& last, const SummaryStats& s) {
  os << "steps = " << st.step << "\n"
     << "t = " << format_double(st.snapshot.t) << "\n"
     << "rows = " << s.rows << "\n"
     << "maxprinciple_violations = " << s.maxprinciple_violations << "\n"
     << "min_margin_maxprinciple_l2 = " << format_double(s.min_margin_l2) << "\n"
     << "min_margin_maxprinciple_linf = " << format_double(s.min_margin_linf) << "\n"
     << "min_margin_energy_linear = " << format_double(s.min_margin_energy) << "\n"
     << "min_cordoba = " << format_double(s.min_cordoba) << "\n"
     << "final_theta_l2 = " << format_double(last.theta_l2) << "\n"
     << "final_theta_linf = " << format_double(last.theta_linf) << "\n"
     << "final_u_l2 = " << format_double(last.u_l2) << "\n"
     << "final_omega_linf = " << format_double(last.omega_linf) << "\n"
     << "final_G_l2 = " << format_double(last.G_l2) << "\n";
}

/// Shared loop of run and resume: CSV rows at the diag cadence, periodic and final checkpoints.
int drive(RunState& st, const RunConfig& cfg, const fs::path& dir, bool append_csv, std::ostream& out,
          std::ostream& err) {
  const MonitorSettings mon = cfg.monitor_settings();
  const fs::path csv_path = dir / "diagnostics.csv";
  const bool fresh = !append_csv || !fs::exists(csv_path);
  std::ofstream csv(csv_path, fresh ? std::ios::trunc : std::ios::app);
  if (!csv) {
    err << "error: cannot write " << csv_path << "\n";
    return exit_config;
  }
  if (fresh) write_csv_header(csv);
  SummaryStats stats;
  DiagnosticsRecord last;
  auto emit = [&](const SimState& s) {
    last = diagnose(s, cfg.params, mon, st.diagnostics);
    write_csv_row(csv, last);
    csv.flush();
    stats.add(last, st.diagnostics);
  };
  if (fresh) emit(to_state(st.snapshot));

  RunState good = st;
  long last_row_step = st.step;
  try {
    advance(st, cfg, [&](const RunState& now, const SimState& s) {
      if (now.step % cfg.diag_every == 0 || now.snapshot.t >= cfg.stepper.t_end) {
        emit(s);
        last_row_step = now.step;
      }
      if (cfg.checkpoint_every > 0 && now.step % cfg.checkpoint_every == 0)
        save(dir / checkpoint_name(now.step), now, cfg.params);
      good = now;
    });
  } catch (const std::exception& e) {
    // BlowUp and StepUnderflow: keep the last good state for the post-mortem.
    const bool blowup = dynamic_cast<const BlowUp*>(&e) || dynamic_cast<const StepUnderflow*>(&e);
    if (!blowup) throw;
    const fs::path pm_chk = dir / "postmortem.bqchk";
    save(pm_chk, good, cfg.params);
    const fs::path pm = dir / "postmortem.txt";
    std::ofstream o(pm);
    o << "reason = " << e.what() << "\n"
      << "last_good_step = " << good.step << "\n"
      << "last_good_t = " << format_double(good.snapshot.t) << "\n"
      << "last_good_checkpoint = " << pm_chk.string() << "\n";
    if (const auto* b = dynamic_cast<const BlowUp*>(&e))
      o << "t = " << format_double(b->t) << "\nomega_linf = " << format_double(b->omega_linf) << "\n";
    err << "blow-up abort: " << e.what() << "\npost-mortem record: " << pm.string() << "\n";
    return exit_blowup;
  }
  if (last_row_step != st.step) emit(to_state(st.snapshot));
  const fs::path final_chk = dir / "final.bqchk";
  save(final_chk, st, cfg.params);
  std::ofstream summary(dir / "summary.txt");
  write_summary(summary, st, last, stats);
  write_summary(out, st, last, stats);
  out << "final_checkpoint = " << final_chk.string() << "\n";
  return exit_ok;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
  }
  return exit_config;
}

}  // namespace

RunState start_run(const RunConfig& cfg) {
  RunState st;
  st.snapshot = to_snapshot(initial_data(cfg.init, cfg.seed, cfg.grid, cfg.init_options));
  st.diagnostics = start_diagnostics(to_state(st.snapshot), cfg.params);
  return st;
}

void advance(RunState& st, const RunConfig& cfg, const StepObserver& observer) {
  long taken = 0;
  while (st.snapshot.t < cfg.stepper.t_end && (cfg.stepper.max_steps < 0 || taken < cfg.stepper.max_steps)) {
    const SimState next = step(to_state(st.snapshot), cfg.params, cfg.stepper);
    RunState now = st;
    now.snapshot = to_snapshot(next);
    now.step = st.step + 1;
    accumulate_dissipation(now.diagnostics, next, cfg.params);
    st = std::move(now);
    ++taken;
    if (observer) observer(st, next);
  }
}

fs::path sidecar_path(const fs::path& checkpoint) {
  fs::path p = checkpoint;
  p += ".state";
  return p;
}

void write_sidecar(const fs::path& checkpoint, const RunState& st) {
  std::ofstream o(sidecar_path(checkpoint), std::ios::trunc);
  if (!o) throw CheckpointError("cannot write " + sidecar_path(checkpoint).string());
  const auto& d = st.diagnostics;
  o << "step " << st.step << "\n"
    << "theta0_l2 " << format_double(d.theta0_l2) << "\n"
    << "theta0_linf " << format_double(d.theta0_linf) << "\n"
    << "u0_l2 " << format_double(d.u0_l2) << "\n"
    << "diss_u_accum " << format_double(d.diss_u_accum) << "\n"
    << "diss_G_accum " << format_double(d.diss_G_accum) << "\n"
    << "last_t " << format_double(d.last_t) << "\n"
    << "last_diss_u " << format_double(d.last_diss_u) << "\n"
    << "last_diss_G " << format_double(d.last_diss_G) << "\n";
}

bool read_sidecar(const fs::path& checkpoint, RunState& st) {
  std::ifstream in(sidecar_path(checkpoint));
  if (!in) return false;
  std::map<std::string, std::string> kv;
  std::string k, v;
  while (in >> k >> v) kv[k] = v;
  auto num = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError(sidecar_path(checkpoint).string() + ": missing " + key);
    return std::stod(it->second);
  };
  auto& d = st.diagnostics;
  st.step = std::stol(kv.count("step") ? kv["step"] : throw CheckpointError("sidecar: missing step"));
  d.theta0_l2 = num("theta0_l2");
  d.theta0_linf = num("theta0_linf");
  d.u0_l2 = num("u0_l2");
  d.diss_u_accum = num("diss_u_accum");
  d.diss_G_accum = num("diss_G_accum");
  d.last_t = num("last_t");
  d.last_diss_u = num("last_diss_u");
  d.last_diss_G = num("last_diss_G");
  return true;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const fs::path dir = resolved_out_dir(cfg);
    fs::create_directories(dir);
    {
      std::ofstream echo(dir / "config.txt");
      echo << format_config(cfg);
    }
    RunState st = start_run(cfg);
    return drive(st, cfg, dir, false, out, err);
  });
}

int cmd_resume(const fs::path& checkpoint, const std::optional<std::string>& config_path,
               const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const Checkpoint chk = read_checkpoint(checkpoint);
    RunConfig cfg = config_path ? load_config(*config_path) : RunConfig{};
    const std::vector<std::string> file_keys = cfg.explicit_keys;
    auto in_file = [&](const std::string& k) { return std::find(file_keys.begin(), file_keys.end(), k) != file_keys.end(); };
    cfg.explicit_keys.clear();
    apply_overrides(cfg, overrides);
    auto overridden = [&](const std::string& k) {
      return std::find(cfg.explicit_keys.begin(), cfg.explicit_keys.end(), k) != cfg.explicit_keys.end();
    };
    const GridSpec& hg = chk.snapshot.theta.grid;
    // Grid fields must always agree with the stored arrays.
    if ((in_file("n") || overridden("n")) && cfg.grid.n != hg.n)
      throw ConfigError("n: checkpoint header has n = " + std::to_string(hg.n));
    if ((in_file("side_length") || overridden("side_length")) && cfg.grid.side_length != hg.side_length)
      throw ConfigError("side_length: checkpoint header has " + format_double(hg.side_length));
    cfg.grid.n = hg.n;
    cfg.grid.side_length = hg.side_length;
    auto reconcile = [&](const std::string& key, double& field, double header) {
      if (overridden(key)) return;
      if (in_file(key) && field != header)
        throw ConfigError(key + ": config has " + format_double(field) + " but the checkpoint header has " +
                          format_double(header) + " (pass --set " + key + "=... to override)");
      field = header;
    };
    reconcile("nu", cfg.params.nu, chk.params.nu);
    reconcile("kappa", cfg.params.kappa, chk.params.kappa);
    reconcile("alpha", cfg.params.alpha, chk.params.alpha);
    reconcile("beta", cfg.params.beta, chk.params.beta);
    cfg.validate();

    RunState st;
    st.snapshot = chk.snapshot;
    st.snapshot.theta.grid = cfg.grid;
    st.snapshot.omega.grid = cfg.grid;
    if (!read_sidecar(checkpoint, st)) {
      err << "warning: no sidecar for " << checkpoint.string()
          << "; dissipation integrals and reference norms restart from the checkpoint\n";
      st.diagnostics = start_diagnostics(to_state(st.snapshot), cfg.params);
      st.step = 0;
    }
    const fs::path dir = resolved_out_dir(cfg);
    fs::create_directories(dir);
    return drive(st, cfg, dir, true, out, err);
  });
}

int cmd_kernel_verify(double beta, int n, SelfCellRule rule, bool refine, const std::string& out_dir,
                      std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    KernelConfig kc;
    kc.beta = beta;
    kc.validate();
    GridSpec g;
    g.n = n;
    g.validate();
    const SuiteReport rep = kernel_suite(beta, n, rule, refine);
    fs::create_directories(out_dir);
    std::ofstream o(fs::path(out_dir) / "kernel_verify.csv");
    rep.write_csv(o);
    rep.write_csv(out);
    return rep.passed() ? exit_ok : exit_assertion;
  });
}

int cmd_inequality_suite(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const SuiteReport rep = inequality_suite(cfg);
    const fs::path dir = resolved_out_dir(cfg);
    fs::create_directories(dir);
    std::ofstream o(dir / "inequality_suite.csv");
    rep.write_csv(o);
    rep.write_csv(out);
    return rep.passed() ? exit_ok : exit_assertion;
  });
}

int cmd_besov(const fs::path& checkpoint, double s, double p, double r, BlockKind kind, const std::string& out_dir,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(p >= 1.0) || !(r >= 1.0) || !std::isfinite(s))
      throw std::invalid_argument("besov: need finite s, p >= 1 and r >= 1");
    const Checkpoint chk = read_checkpoint(checkpoint);
    const SimState st = to_state(chk.snapshot);
    const BesovIndex idx{s, p, r, false};
    const SpectralField G = compute_G_hat(st, chk.params.alpha);
    const auto th = besov_band_table(st.theta_hat, idx, kind);
    const auto om = besov_band_table(st.omega_hat, idx, kind);
    const auto gg = besov_band_table(G, idx, kind);
    std::ostringstream table;
    table << "j,theta,omega,G\n";
    for (std::size_t i = 0; i < th.size(); ++i)
      table << th[i].first << "," << format_double(th[i].second) << "," << format_double(om[i].second) << ","
            << format_double(gg[i].second) << "\n";
    table << "norm," << format_double(besov_norm(st.theta_hat, idx, kind)) << ","
          << format_double(besov_norm(st.omega_hat, idx, kind)) << "," << format_double(besov_norm(G, idx, kind))
          << "\n";
    fs::create_directories(out_dir);
    std::ofstream o(fs::path(out_dir) / "besov.csv");
    o << table.str();
    out << table.str();
    return exit_ok;
  });
}

}  // namespace bq
