#include "bq/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace bq {

namespace {

constexpr const char* magic = "BQCHK1";

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw CheckpointError("checkpoint: truncated data");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

void put_array(std::string& out, const RealGrid<double>& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  put_u64(out, n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) put_u64(out, std::bit_cast<std::uint64_t>(a(i, j)));
}

RealGrid<double> get_array(const std::string& in, std::size_t& pos, int n) {
  const std::uint64_t count = get_u64(in, pos);
  if (count != static_cast<std::uint64_t>(n) * n) throw CheckpointError("checkpoint: array length does not match n");
  RealGrid<double> a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = std::bit_cast<double>(get_u64(in, pos));
      if (!std::isfinite(a(i, j))) throw CheckpointError("checkpoint: non-finite value");
    }
  return a;
}

}  // namespace

std::string encode_checkpoint(const FlowSnapshot& x, const FlowParams& p) {
  const GridSpec& g = x.theta.grid;
  detail::require_same_grid(g, x.omega.grid);
  std::string out = std::string(magic) + " " + std::to_string(g.n) + " " + fmt17(g.side_length) + " " + fmt17(x.t) +
                    " " + fmt17(p.nu) + " " + fmt17(p.kappa) + " " + fmt17(p.alpha) + " " + fmt17(p.beta) + "\n";
  put_array(out, x.theta.values);
  put_array(out, x.omega.values);
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string::npos) throw CheckpointError("checkpoint: missing header line");
  std::istringstream header(bytes.substr(0, eol));
  std::string tag;
  int n = 0;
  double L, t, nu, kappa, alpha, beta;
  if (!(header >> tag) || tag != magic) throw CheckpointError("checkpoint: bad magic (expected BQCHK1)");
  if (!(header >> n >> L >> t >> nu >> kappa >> alpha >> beta)) throw CheckpointError("checkpoint: malformed header");
  std::string extra;
  if (header >> extra) throw CheckpointError("checkpoint: trailing header fields");
  GridSpec g;
  g.n = n;
  g.side_length = L;
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  if (!std::isfinite(t) || t < 0.0) throw CheckpointError("checkpoint: invalid time");
  std::size_t pos = eol + 1;
  Checkpoint c;
  c.snapshot.theta = PhysicalField(g, get_array(bytes, pos, n));
  c.snapshot.omega = PhysicalField(g, get_array(bytes, pos, n));
  c.snapshot.t = t;
  if (pos != bytes.size()) throw CheckpointError("checkpoint: trailing bytes");
  c.params.nu = nu;
  c.params.kappa = kappa;
  c.params.alpha = alpha;
  c.params.beta = beta;
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const FlowSnapshot& x, const FlowParams& p) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  const std::string bytes = encode_checkpoint(x, p);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("checkpoint: write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("checkpoint: cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace bq
