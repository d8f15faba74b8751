#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "soebm/dataset.hpp"
#include "soebm/evaluation.hpp"
#include "soebm/landscape.hpp"
#include "soebm_cli/config.hpp"

namespace soebm::cli {

/// Files of one run directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path data_dir() const { return root / "data"; }
  std::filesystem::path train_csv() const { return data_dir() / "train.csv"; }
  std::filesystem::path validation_csv() const { return data_dir() / "validation.csv"; }
  std::filesystem::path test_csv() const { return data_dir() / "test.csv"; }
  std::filesystem::path decisions_csv() const { return data_dir() / "decisions.csv"; }
  std::filesystem::path decisions_meta() const { return data_dir() / "decisions.meta.json"; }

  std::filesystem::path model_dir(Mode mode) const { return root / "models" / to_string(mode); }
  std::filesystem::path checkpoint(Mode mode) const { return model_dir(mode) / "params.txt"; }
  std::filesystem::path training_state(Mode mode) const { return model_dir(mode) / "state.txt"; }
  std::filesystem::path history(Mode mode) const { return model_dir(mode) / "history.jsonl"; }
  /// Wall-clock seconds per epoch; the only file allowed to differ between reruns.
  std::filesystem::path timing(Mode mode) const { return model_dir(mode) / "timing.jsonl"; }

  std::filesystem::path eval_dir(Mode mode) const { return root / "eval" / to_string(mode); }
  std::filesystem::path per_example(Mode mode) const { return eval_dir(mode) / "per_example.csv"; }
  std::filesystem::path summary(Mode mode) const { return eval_dir(mode) / "summary.json"; }
  std::filesystem::path paired(Mode mode) const { return eval_dir(mode) / "paired_vs_two-stage.csv"; }

  std::filesystem::path landscape(Mode mode, std::size_t index) const {
    return root / "landscape" / (to_string(mode) + "_" + std::to_string(index) + ".csv");
  }
};

struct PreprocessResult {
  bool cache_hit = false;
  std::size_t rows = 0;
};

struct TrainResult {
  std::size_t epochs_run = 0;
  std::size_t start_epoch = 0;
  double seconds = 0.0;
};

void cmd_gen_data(const RunConfig& cfg, const RunLayout& out, std::ostream& log);
PreprocessResult cmd_preprocess(const RunConfig& cfg, const RunLayout& out, std::ostream& log);
/// SO-EBM modes start from the two-stage checkpoint, training it first when
/// it is missing, unless train.cold_start is set.
TrainResult cmd_train(const RunConfig& cfg, const RunLayout& out, Mode mode, bool resume,
                      std::ostream& log);
EvalReport cmd_eval(const RunConfig& cfg, const RunLayout& out, Mode mode, std::ostream& log);
LandscapeGrid cmd_landscape(const RunConfig& cfg, const RunLayout& out, Mode mode,
                            std::size_t index, std::ostream& log);

/// Per-example metrics as written by cmd_eval.
struct PerExampleRow {
  std::size_t index = 0;
  double task_loss = 0.0;
  double optimal_cost = 0.0;
  double regret = 0.0;
  double nll = 0.0;
  std::string status;
};
std::vector<PerExampleRow> read_per_example_csv(const std::filesystem::path& path);

void write_landscape_csv(const std::filesystem::path& path, const LandscapeGrid& grid,
                         std::size_t index);
LandscapeGrid read_landscape_csv(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::string read_file(const std::filesystem::path& path);

}  // namespace soebm::cli
