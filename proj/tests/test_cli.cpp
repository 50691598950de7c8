#include "bq/checkpoint.hpp"
#include "bq/commands.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bq_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string error_of(const std::string& text) {
  try {
    parse(text).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config parsing: values, comments, defaults") {
  const auto c = parse("# comment\n n = 48  # trailing\nalpha=0.9\nbeta = 0.1\ninit = gaussian-bumps\nseed = 7\n\n");
  CHECK(c.grid.n == 48);
  CHECK(c.params.alpha == 0.9);
  CHECK(c.init == InitKind::gaussian_bumps);
  CHECK(c.seed == 7);
  CHECK(c.stepper.t_end == 1.0);
  CHECK_NOTHROW(c.validate());
  // Canonical text round trip.
  const auto again = parse(format_config(c));
  CHECK(format_config(again) == format_config(c));
}

TEST_CASE("config errors carry line and key") {
  CHECK(error_of("n = 32\nfoo = 1\n").find("test.cfg:2: unknown key 'foo'") != std::string::npos);
  CHECK(error_of("n = 32\nalpha = abc\n").find("test.cfg:2: alpha") != std::string::npos);
  CHECK(error_of("n = 32\nn = 64\n").find("duplicate") != std::string::npos);
  CHECK(error_of("n = 33\n").find("grid") != std::string::npos);
  CHECK(error_of("alpha = 0.9\nbeta = 0.1\nq = 3.0\n").find("q0") != std::string::npos);
  CHECK(error_of("alpha = 0.95\nbeta = 0.05\ns = 0.9\n").find("3 alpha - 2") != std::string::npos);
  CHECK(error_of("alpha = 0.6\nbeta = 0.5\ncritical = true\n").find("critical") != std::string::npos);
  CHECK(error_of("alpha = 0.5\nbeta = 0.5\ncritical = true\n").empty());
  CHECK(error_of("diag_every = 0\n").find("diag_every") != std::string::npos);
  CHECK(error_of("n = 32\njust text\n").find("test.cfg:2") != std::string::npos);
}

TEST_CASE("run: minimal config writes at least two rows") {
  const auto dir = scratch("min");
  auto c = parse("n = 32\nt_end = 0.01\n");
  c.out_dir = dir.string();
  std::ostringstream out, err;
  CHECK(cmd_run(c, out, err) == exit_ok);
  std::ifstream csv(dir / "diagnostics.csv");
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows >= 3);  // header + t = 0 + final
  CHECK(fs::exists(dir / "final.bqchk"));
  CHECK(fs::exists(dir / "summary.txt"));
}

TEST_CASE("run: invalid config creates no output") {
  const auto dir = scratch("invalid");
  auto c = parse("alpha = 0.9\nbeta = 0.1\nq = 3.0\n");
  c.out_dir = dir.string();
  std::ostringstream out, err;
  CHECK(cmd_run(c, out, err) == exit_config);
  CHECK_FALSE(fs::exists(dir));
  CHECK(err.str().find("q0") != std::string::npos);
}

TEST_CASE("run: output directory environment override") {
  const auto dir = scratch("env");
  ::setenv("BQSIM_OUT_DIR", dir.string().c_str(), 1);
  auto c = parse("n = 16\nt_end = 0.01\nout_dir = not_used\n");
  std::ostringstream out, err;
  const int code = cmd_run(c, out, err);
  ::unsetenv("BQSIM_OUT_DIR");
  CHECK(code == exit_ok);
  CHECK(fs::exists(dir / "diagnostics.csv"));
  CHECK_FALSE(fs::exists("not_used"));
}

TEST_CASE("run: checkpoint cadence and repeat determinism") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto c = parse("n = 32\nt_end = 0.05\ninit = random-band\nseed = 3\ncheckpoint_every = 2\n");
  std::ostringstream out, err;
  c.out_dir = a.string();
  REQUIRE(cmd_run(c, out, err) == exit_ok);
  c.out_dir = b.string();
  REQUIRE(cmd_run(c, out, err) == exit_ok);
  CHECK(fs::exists(a / "chk_00000002.bqchk"));
  CHECK(fs::exists(a / "chk_00000004.bqchk"));
  CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
  CHECK(slurp(a / "final.bqchk") == slurp(b / "final.bqchk"));
}

TEST_CASE("resume: split run equals unsplit run bitwise") {
  const auto whole = scratch("whole"), first = scratch("first"), second = scratch("second");
  const auto cfg_path = scratch("cfg.txt");
  {
    std::ofstream o(cfg_path);
    o << "n = 32\ninit = random-band\nseed = 1\nt_end = 100\nalpha = 0.95\nbeta = 0.05\n";
  }
  std::ostringstream out, err;
  auto c = load_config(cfg_path.string());
  c.stepper.max_steps = 20;
  c.out_dir = whole.string();
  REQUIRE(cmd_run(c, out, err) == exit_ok);
  c.stepper.max_steps = 10;
  c.out_dir = first.string();
  REQUIRE(cmd_run(c, out, err) == exit_ok);
  REQUIRE(cmd_resume(first / "final.bqchk", cfg_path.string(), {"max_steps=10", "out_dir=" + second.string()}, out,
                     err) == exit_ok);
  CHECK(slurp(whole / "final.bqchk") == slurp(second / "final.bqchk"));
  CHECK(slurp(whole / "final.bqchk.state") == slurp(second / "final.bqchk.state"));
}

TEST_CASE("resume: header checks and overrides") {
  const auto base = scratch("hdr");
  auto c = parse("n = 16\nt_end = 0.02\n");
  c.out_dir = base.string();
  std::ostringstream out, err;
  REQUIRE(cmd_run(c, out, err) == exit_ok);
  const auto chk = base / "final.bqchk";

  // Overriding t_end alone is accepted.
  CHECK(cmd_resume(chk, std::nullopt, {"t_end=0.04", "out_dir=" + (base / "more").string()}, out, err) == exit_ok);

  // A config file that disagrees with the header is rejected.
  const auto cfg_path = scratch("hdr.cfg");
  {
    std::ofstream o(cfg_path);
    o << "n = 16\nalpha = 0.9\nbeta = 0.1\n";
  }
  std::ostringstream err2;
  CHECK(cmd_resume(chk, cfg_path.string(), {"out_dir=" + (base / "x").string()}, out, err2) == exit_config);
  CHECK(err2.str().find("alpha") != std::string::npos);
  // ... unless the key is overridden explicitly.
  CHECK(cmd_resume(chk, cfg_path.string(),
                   {"alpha=0.9", "beta=0.1", "t_end=0.03", "out_dir=" + (base / "y").string()}, out, err) == exit_ok);
  // Grid size can never change.
  CHECK(cmd_resume(chk, std::nullopt, {"n=32", "out_dir=" + (base / "z").string()}, out, err) == exit_config);

  // Corrupt header.
  auto bytes = slurp(chk);
  bytes[0] = 'X';
  const auto bad = base / "bad.bqchk";
  {
    std::ofstream o(bad, std::ios::binary);
    o << bytes;
  }
  std::ostringstream err3;
  CHECK(cmd_resume(bad, std::nullopt, {"out_dir=" + (base / "w").string()}, out, err3) == exit_config);
  CHECK(err3.str().find("checkpoint") != std::string::npos);
}

TEST_CASE("run: blow-up aborts with a post-mortem record") {
  const auto dir = scratch("blowup");
  // Negative dissipation is not configurable, so force blow-up with a huge fixed step.
  auto c = parse("n = 32\ninit = random-band\nseed = 2\nfixed_dt = true\ndt_init = 50\nt_end = 5000\nnu = 0\nkappa = 0\n");
  c.out_dir = dir.string();
  std::ostringstream out, err;
  const int code = cmd_run(c, out, err);
  CHECK(code == exit_blowup);
  CHECK(err.str().find("post-mortem record") != std::string::npos);
  CHECK(fs::exists(dir / "postmortem.txt"));
  CHECK(fs::exists(dir / "postmortem.bqchk"));
}

TEST_CASE("besov on a zero-field checkpoint gives an all-zero table") {
  const auto dir = scratch("besov");
  fs::create_directories(dir);
  GridSpec g;
  g.n = 32;
  FlowSnapshot z{PhysicalField(g), PhysicalField(g), 0.0};
  write_checkpoint(dir / "zero.bqchk", z, FlowParams{});
  std::ostringstream out, err;
  CHECK(cmd_besov(dir / "zero.bqchk", 0.5, 2.0, 2.0, BlockKind::sharp, dir.string(), out, err) == exit_ok);
  std::istringstream table(out.str());
  std::string line;
  std::getline(table, line);
  CHECK(line == "j,theta,omega,G");
  int rows = 0;
  while (std::getline(table, line)) {
    ++rows;
    CHECK(line.substr(line.find(',')) == ",0,0,0");
  }
  CHECK(rows >= 3);
}
