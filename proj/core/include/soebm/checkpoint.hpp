#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "soebm/adam.hpp"
#include "soebm/mlp.hpp"

namespace soebm {

/// Text checkpoint: a versioned header, layer shapes, then row-major entries
/// in shortest round-trip decimal form. Loading reproduces every bit.
void write_params(std::ostream& out, const MlpParams& params);
MlpParams read_params(std::istream& in);

void save_params(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_params(const std::filesystem::path& path);

/// Parameters plus optimizer state and the number of completed epochs, used
/// to resume an interrupted run.
struct TrainingCheckpoint {
  std::string mode;
  std::uint64_t epochs_done = 0;
  MlpParams params;
  std::optional<AdamState> adam;
};

void save_training_checkpoint(const std::filesystem::path& path, const TrainingCheckpoint& ckpt);
TrainingCheckpoint load_training_checkpoint(const std::filesystem::path& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace soebm
