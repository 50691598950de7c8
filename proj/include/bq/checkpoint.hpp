// Binary checkpoints: a text header line
//   BQCHK1 n L t nu kappa alpha beta
// followed by two length-prefixed arrays of little-endian float64 (theta, then
// omega, row-major). Header numbers use 17 significant digits, so every field
// round-trips bit for bit.
#pragma once

#include "bq/solver.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace bq {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  FlowSnapshot snapshot;
  FlowParams params;
};

std::string encode_checkpoint(const FlowSnapshot& x, const FlowParams& p);
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const FlowSnapshot& x, const FlowParams& p);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace bq
