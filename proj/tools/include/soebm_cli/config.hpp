#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "soebm/ebm.hpp"
#include "soebm/power_task.hpp"
#include "soebm/solver.hpp"
#include "soebm/synthetic_task.hpp"
#include "soebm/task.hpp"

namespace soebm::cli {

inline constexpr int kSchemaVersion = 1;

enum class TaskKind { kSynthetic2D, kPower };
enum class Mode { kTwoStage, kSoebm, kAblationNoMle, kAblationNoKl };

std::string to_string(TaskKind kind);
std::string to_string(Mode mode);
TaskKind parse_task(const std::string& text);
Mode parse_mode(const std::string& text);

struct DataConfig {
  std::size_t examples = 500;
  double noise = 0.03;          // synthetic2d label noise
  std::size_t feature_dim = 150;  // power features
  std::vector<double> split{0.8, 0.2};  // train, [validation,] test
};

struct ModelConfig {
  std::vector<std::size_t> hidden{64, 64};
  double dropout = 0.0;
  double initial_sigma = 1.0;
};

struct StageConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
};

struct SoebmConfig {
  double lambda = 1.0;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 1e-4;
  /// Start from a fresh initialization instead of the two-stage checkpoint.
  bool cold_start = false;
  /// Score the test split after every epoch (slow; off by default).
  bool eval_during_training = false;
};

struct LandscapeConfig {
  double extent = 1.0;
  std::size_t points = 41;
};

struct RunConfig {
  TaskKind task = TaskKind::kSynthetic2D;
  std::uint64_t seed = 0;
  DataConfig data;
  Synthetic2DParams synthetic;
  PowerTaskParams power;
  ModelConfig model;
  ExpectationConfig expectation;
  double cost_scale = 1.0;
  StageConfig pretrain;
  SoebmConfig train;
  ProposalConfig proposal;
  SolveConfig preprocess_solve = SolveConfig::preprocessing();
  SolveConfig inference_solve = SolveConfig::inference();
  LandscapeConfig landscape;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;
  std::shared_ptr<const Task> make_task() const;
  bool has_validation_split() const { return data.split.size() == 3; }
};

/// Defaults for a task: the synthetic 2-D problem uses a small network and an
/// 80/20 split; the power problem uses a 150-200-200 network with dropout, a
/// 60/20/20 split and a smaller cost scale.
RunConfig default_config(TaskKind task);

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys take the task defaults; unknown keys and bad values throw
/// ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

}  // namespace soebm::cli
