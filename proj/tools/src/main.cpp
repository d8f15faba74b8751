#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "soebm/error.hpp"
#include "soebm_cli/commands.hpp"
#include "soebm_cli/config.hpp"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

int run(int argc, char** argv) {
  using namespace soebm::cli;

  CLI::App app{"Decision-focused learning with an energy-based surrogate"};
  app.require_subcommand(1);
  std::string config_path;
  std::string task_name;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "run";
  std::string mode_name = "soebm";
  std::size_t index = 0;
  bool resume = false;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--task", task_name, "Task defaults when no config is given")
      ->check(CLI::IsMember({"synthetic2d", "power"}));
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out_dir, "Run directory")->capture_default_str();

  app.add_subcommand("gen-data", "Generate train/validation/test CSVs");
  app.add_subcommand("preprocess", "Solve for the optimal decision of each training example");
  auto* train = app.add_subcommand("train", "Train a model");
  auto* eval = app.add_subcommand("eval", "Score a trained model on the test split");
  auto* landscape = app.add_subcommand("landscape", "Export a 2-D energy slice for one test example");
  auto* dump = app.add_subcommand("print-config", "Print the effective configuration");
  const std::vector<std::string> modes{"two-stage", "soebm", "ablation-no-mle", "ablation-no-kl"};
  for (auto* sub : {train, eval, landscape}) {
    sub->add_option("--mode", mode_name, "Training objective")
        ->check(CLI::IsMember(modes))
        ->capture_default_str();
  }
  train->add_flag("--resume", resume, "Continue from the last saved epoch");
  landscape->add_option("--index", index, "Test example index")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (!config_path.empty() && !task_name.empty()) {
    throw soebm::UsageError("give either --config or --task, not both");
  }

  RunConfig cfg = config_path.empty()
                      ? default_config(parse_task(task_name.empty() ? "synthetic2d" : task_name))
                      : load_config(config_path);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  const RunLayout layout{out_dir};
  const Mode mode = parse_mode(mode_name);

  if (app.got_subcommand("gen-data")) {
    cmd_gen_data(cfg, layout, std::cout);
  } else if (app.got_subcommand("preprocess")) {
    cmd_preprocess(cfg, layout, std::cout);
  } else if (train->parsed()) {
    cmd_train(cfg, layout, mode, resume, std::cout);
  } else if (eval->parsed()) {
    cmd_eval(cfg, layout, mode, std::cout);
  } else if (landscape->parsed()) {
    cmd_landscape(cfg, layout, mode, index, std::cout);
  } else if (dump->parsed()) {
    std::cout << to_json(cfg).dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const soebm::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const soebm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const soebm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
