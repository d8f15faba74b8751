#include "soebm_cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "soebm/checkpoint.hpp"
#include "soebm/error.hpp"
#include "soebm/training.hpp"

namespace soebm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Write to a sibling temp file, then rename, so readers never see a partial file.
void write_file(const fs::path& path, const std::string& text) {
  make_dirs(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  out << line << '\n';
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

void keep_first_lines(const fs::path& path, std::size_t n) {
  std::string kept;
  if (fs::exists(path)) {
    std::istringstream in(read_file(path));
    std::string line;
    for (std::size_t i = 0; i < n && std::getline(in, line); ++i) kept += line + '\n';
  }
  write_file(path, kept);
}

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

std::string fmt(double v) { return format_double(v); }

// Parameters of a model that two-stage pretraining depends on; a stored
// checkpoint is reused only when these match.
std::string pretrain_fingerprint(const RunConfig& cfg) {
  const json full = to_json(cfg);
  json j;
  for (const char* key : {"task", "seed", "data", "task_params", "model", "expectation", "energy",
                          "pretrain"}) {
    j[key] = full.at(key);
  }
  return hex(fnv1a(j.dump()));
}

EnergyModel fresh_model(const RunConfig& cfg, std::size_t feature_dim) {
  auto task = cfg.make_task();
  std::vector<std::size_t> widths{feature_dim};
  widths.insert(widths.end(), cfg.model.hidden.begin(), cfg.model.hidden.end());
  RngStream init(cfg.seed, {0, 0, StreamPurpose::kInit});
  EnergyModel model{init_params(widths, task->label_dim(), cfg.model.dropout, init,
                                cfg.model.initial_sigma),
                    task, cfg.expectation, cfg.cost_scale};
  model.validate();
  return model;
}

EnergyModel load_model(const RunConfig& cfg, const RunLayout& out, Mode mode) {
  const fs::path path = out.checkpoint(mode);
  if (!fs::exists(path)) {
    throw IoError("no checkpoint for mode " + to_string(mode) + " at " + path.string() +
                  " (run train first)");
  }
  EnergyModel model{load_params(path), cfg.make_task(), cfg.expectation, cfg.cost_scale};
  model.validate();
  return model;
}

Dataset read_split(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing " + path.string() + " (run gen-data first)");
  return read_dataset_csv(path);
}

TrainConfig soebm_train_config(const RunConfig& cfg, Mode mode) {
  TrainConfig t;
  t.lambda = cfg.train.lambda;
  t.epochs = cfg.train.epochs;
  t.batch_size = cfg.train.batch_size;
  t.learning_rate = cfg.train.learning_rate;
  t.proposal = cfg.proposal;
  t.seed = cfg.seed;
  t.disable_mle = mode == Mode::kAblationNoMle;
  t.disable_kl = mode == Mode::kAblationNoKl;
  return t;
}

TrainConfig pretrain_config(const RunConfig& cfg) {
  TrainConfig t;
  t.epochs = cfg.pretrain.epochs;
  t.batch_size = cfg.pretrain.batch_size;
  t.learning_rate = cfg.pretrain.learning_rate;
  t.seed = cfg.seed;
  return t;
}

json record_json(const EpochRecord& r, Mode mode) {
  json j;
  j["epoch"] = r.epoch;
  if (mode == Mode::kTwoStage) {
    j["mean_nll"] = r.mean_nll;
  } else {
    j["mean_energy_at_astar"] = r.mean_energy_at_astar;
    j["mean_kl_cross"] = r.mean_kl_cross;
    j["ess_model_mean"] = r.ess_model_mean;
    j["ess_oracle_mean"] = r.ess_oracle_mean;
  }
  if (r.eval_task_loss) j["eval_task_loss"] = *r.eval_task_loss;
  return j;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t parse_index(const std::string& text, const fs::path& path) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || text[0] == '-') {
    throw IoError(path.string() + ": bad index '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

void cmd_gen_data(const RunConfig& cfg, const RunLayout& out, std::ostream& log) {
  cfg.validate();
  RngStream data_stream(cfg.seed, {0, 0, StreamPurpose::kData});
  const Dataset all =
      cfg.task == TaskKind::kPower
          ? gen_power_dataset(cfg.data.examples, cfg.power.horizon, cfg.data.feature_dim, data_stream)
          : gen_synthetic2d_dataset(cfg.data.examples, cfg.data.noise, data_stream);
  RngStream split_stream(cfg.seed, {0, 0, StreamPurpose::kSplit});
  const auto parts = split_indices(all.size(), cfg.data.split, split_stream);

  make_dirs(out.data_dir());
  write_dataset_csv(out.train_csv(), all.subset(parts.front()));
  if (parts.size() == 3) write_dataset_csv(out.validation_csv(), all.subset(parts[1]));
  write_dataset_csv(out.test_csv(), all.subset(parts.back()));
  save_config(out.root / "config.json", cfg);

  log << "gen-data: " << to_string(cfg.task) << ", " << parts.front().size() << " train";
  if (parts.size() == 3) log << ", " << parts[1].size() << " validation";
  log << ", " << parts.back().size() << " test rows in " << out.data_dir().string() << '\n';
}

PreprocessResult cmd_preprocess(const RunConfig& cfg, const RunLayout& out, std::ostream& log) {
  cfg.validate();
  const std::string train_bytes = read_file(out.train_csv());
  const json full = to_json(cfg);
  const json inputs = {{"task", full.at("task")},
                       {"task_params", full.at("task_params")},
                       {"solve", full.at("solve").at("preprocess")}};
  const std::string input_hash = hex(fnv1a(inputs.dump(), fnv1a(train_bytes)));

  if (fs::exists(out.decisions_meta()) && fs::exists(out.decisions_csv())) {
    json meta;
    try {
      meta = json::parse(read_file(out.decisions_meta()));
    } catch (const json::exception&) {
      meta = json::object();
    }
    if (meta.value("input_hash", "") == input_hash &&
        meta.value("output_hash", "") == hex(fnv1a(read_file(out.decisions_csv())))) {
      const auto rows = meta.value("rows", std::size_t{0});
      log << "preprocess: cache hit (" << rows << " decisions, hash " << input_hash << ")\n";
      return {true, rows};
    }
  }

  const Dataset train = read_dataset_csv(out.train_csv());
  const auto task = cfg.make_task();
  if (train.label_dim() != task->label_dim()) {
    throw ConfigError("preprocess: training labels have " + std::to_string(train.label_dim()) +
                      " columns, task expects " + std::to_string(task->label_dim()));
  }
  DecisionDataset decisions;
  std::vector<std::size_t> failed;
  std::size_t stalled = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const SolveResult r = argmin_true_cost(*task, train.y[i], cfg.preprocess_solve);
    if (r.status == SolveStatus::kIterationCap || !task->is_feasible(r.decision)) {
      failed.push_back(i);
      continue;
    }
    if (r.status == SolveStatus::kStalled) ++stalled;
    decisions.x.push_back(train.x[i]);
    decisions.a.push_back(r.decision);
    decisions.cost.push_back(r.cost);
  }
  if (!failed.empty()) {
    std::ostringstream msg;
    msg << "preprocess: solver failed on " << failed.size() << " training example(s):";
    for (auto i : failed) msg << ' ' << i;
    throw NumericalError(msg.str());
  }

  write_decision_csv(out.decisions_csv(), decisions);
  const json meta = {{"input_hash", input_hash},
                     {"output_hash", hex(fnv1a(read_file(out.decisions_csv())))},
                     {"rows", decisions.size()},
                     {"stalled", stalled}};
  write_file(out.decisions_meta(), meta.dump(2) + "\n");
  log << "preprocess: solved " << decisions.size() << " examples (" << stalled
      << " stopped on a stalled line search)\n";
  return {false, decisions.size()};
}

TrainResult cmd_train(const RunConfig& cfg, const RunLayout& out, Mode mode, bool resume,
                      std::ostream& log) {
  cfg.validate();
  const Dataset train_set = read_split(out.train_csv());
  const auto task = cfg.make_task();
  if (train_set.label_dim() != task->label_dim()) {
    throw ConfigError("train: data has " + std::to_string(train_set.label_dim()) +
                      " label columns, task " + task->name() + " expects " +
                      std::to_string(task->label_dim()));
  }
  std::optional<Dataset> eval_set;
  if (cfg.train.eval_during_training) {
    eval_set = read_split(cfg.has_validation_split() ? out.validation_csv() : out.test_csv());
  }

  DecisionDataset decisions;
  if (mode != Mode::kTwoStage) {
    cmd_preprocess(cfg, out, log);
    decisions = read_decision_csv(out.decisions_csv());
    if (!aligned(train_set, decisions)) {
      throw ConfigError("train: decisions do not line up with the training data");
    }
  }

  TrainOptions opts;
  if (eval_set) {
    opts.eval_set = &*eval_set;
    opts.eval_solve = cfg.inference_solve;
  }

  std::optional<EnergyModel> model;
  const fs::path state_path = out.training_state(mode);
  if (resume && fs::exists(state_path)) {
    TrainingCheckpoint state = load_training_checkpoint(state_path);
    if (state.mode != to_string(mode)) {
      throw ConfigError("train: saved state is for mode " + state.mode);
    }
    model.emplace(EnergyModel{std::move(state.params), task, cfg.expectation, cfg.cost_scale});
    model->validate();
    opts.start_epoch = state.epochs_done;
    opts.resume_adam = std::move(state.adam);
    keep_first_lines(out.history(mode), opts.start_epoch);
    keep_first_lines(out.timing(mode), opts.start_epoch);
    log << "train: resuming " << to_string(mode) << " after epoch " << opts.start_epoch << '\n';
  } else {
    if (resume) log << "train: no saved state for " << to_string(mode) << ", starting fresh\n";
    if (mode == Mode::kTwoStage || cfg.train.cold_start) {
      model.emplace(fresh_model(cfg, train_set.feature_dim()));
    } else {
      const fs::path fingerprint = out.model_dir(Mode::kTwoStage) / "pretrain.fingerprint";
      const bool reusable = fs::exists(out.checkpoint(Mode::kTwoStage)) && fs::exists(fingerprint) &&
                            read_file(fingerprint) == pretrain_fingerprint(cfg) + "\n";
      if (reusable) {
        log << "train: starting from the two-stage checkpoint\n";
      } else {
        log << "train: no matching two-stage checkpoint, pretraining first\n";
        cmd_train(cfg, out, Mode::kTwoStage, false, log);
      }
      model.emplace(load_model(cfg, out, Mode::kTwoStage));
    }
    if (model->params.input_dim() != train_set.feature_dim()) {
      throw ConfigError("train: checkpoint input width does not match the data");
    }
    make_dirs(out.model_dir(mode));
    write_file(out.history(mode), "");
    write_file(out.timing(mode), "");
  }

  const TrainConfig tcfg = mode == Mode::kTwoStage ? pretrain_config(cfg) : soebm_train_config(cfg, mode);
  opts.on_epoch = [&](const EpochRecord& rec, const MlpParams& params, const AdamState& adam) {
    append_line(out.history(mode), record_json(rec, mode).dump());
    append_line(out.timing(mode), json{{"epoch", rec.epoch}, {"seconds", rec.seconds}}.dump());
    save_training_checkpoint(state_path, {to_string(mode), rec.epoch + 1, params, adam});
    log << to_string(mode) << " epoch " << rec.epoch + 1 << "/" << tcfg.epochs << ": "
        << std::fixed << std::setprecision(3) << rec.seconds << " s" << std::defaultfloat;
    if (rec.eval_task_loss) log << ", eval task loss " << *rec.eval_task_loss;
    log << '\n';
  };

  const auto start = std::chrono::steady_clock::now();
  TrainHistory history = mode == Mode::kTwoStage
                             ? train_two_stage(*model, train_set, tcfg, opts)
                             : train(*model, train_set, decisions, tcfg, opts);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_params(out.checkpoint(mode), model->params);
  if (mode == Mode::kTwoStage) {
    write_file(out.model_dir(mode) / "pretrain.fingerprint", pretrain_fingerprint(cfg) + "\n");
  }
  log << "train: " << to_string(mode) << " done, " << history.epochs.size() << " epoch(s) in "
      << std::fixed << std::setprecision(2) << seconds << " s" << std::defaultfloat << '\n';
  return {history.epochs.size(), opts.start_epoch, seconds};
}

EvalReport cmd_eval(const RunConfig& cfg, const RunLayout& out, Mode mode, std::ostream& log) {
  cfg.validate();
  const EnergyModel model = load_model(cfg, out, mode);
  const Dataset test = read_split(out.test_csv());
  if (test.feature_dim() != model.params.input_dim()) {
    throw ConfigError("eval: test features do not match the checkpoint");
  }
  const EvalReport report = eval_task_loss(model, test, cfg.inference_solve, cfg.seed);

  std::ostringstream csv;
  csv << "index,task_loss,optimal_cost,regret,nll,status\n";
  for (std::size_t i = 0; i < report.examples.size(); ++i) {
    const auto& e = report.examples[i];
    csv << i << ',' << fmt(e.task_loss) << ',' << fmt(e.optimal_cost) << ',' << fmt(e.regret)
        << ',' << fmt(e.nll) << ',' << to_string(e.status) << '\n';
  }
  write_file(out.per_example(mode), csv.str());

  json summary = {{"mode", to_string(mode)},
                  {"task", to_string(cfg.task)},
                  {"seed", cfg.seed},
                  {"examples", report.examples.size()},
                  {"flagged", report.flagged},
                  {"mean_task_loss", report.mean_task_loss},
                  {"mean_regret", report.mean_regret},
                  {"mean_nll", report.mean_nll}};

  if (mode != Mode::kTwoStage && fs::exists(out.per_example(Mode::kTwoStage))) {
    const auto base = read_per_example_csv(out.per_example(Mode::kTwoStage));
    if (base.size() != report.examples.size()) {
      throw IoError("eval: two-stage results cover a different test set");
    }
    std::ostringstream paired;
    paired << "index,two_stage_task_loss,task_loss,difference\n";
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double diff = report.examples[i].task_loss - base[i].task_loss;
      paired << i << ',' << fmt(base[i].task_loss) << ',' << fmt(report.examples[i].task_loss)
             << ',' << fmt(diff) << '\n';
      if (base[i].status != "iteration_cap" &&
          report.examples[i].status != SolveStatus::kIterationCap) {
        total += diff;
        ++count;
      }
    }
    write_file(out.paired(mode), paired.str());
    summary["paired_examples"] = count;
    summary["paired_mean_difference"] = count > 0 ? total / static_cast<double>(count) : 0.0;
  }
  write_file(out.summary(mode), summary.dump(2) + "\n");

  log << "eval: " << to_string(mode) << " mean task loss " << report.mean_task_loss
      << ", regret " << report.mean_regret << ", nll " << report.mean_nll;
  if (report.flagged > 0) log << " (" << report.flagged << " decisions hit the iteration cap)";
  if (summary.contains("paired_mean_difference")) {
    log << ", paired difference vs two-stage " << summary["paired_mean_difference"].get<double>();
  }
  log << '\n';
  return report;
}

LandscapeGrid cmd_landscape(const RunConfig& cfg, const RunLayout& out, Mode mode,
                            std::size_t index, std::ostream& log) {
  cfg.validate();
  const EnergyModel model = load_model(cfg, out, mode);
  const Dataset test = read_split(out.test_csv());
  if (index >= test.size()) {
    throw UsageError("landscape: index " + std::to_string(index) + " out of range (test set has " +
                     std::to_string(test.size()) + " examples)");
  }
  const auto& task = *model.task;
  const Vector center = argmin_true_cost(task, test.y[index], cfg.preprocess_solve).decision;
  RngStream stream(cfg.seed, {0, static_cast<std::uint32_t>(index), StreamPurpose::kLandscape});
  const auto [v1, v2] = landscape_directions(task.decision_dim(), stream);
  LandscapeGrid grid = compute_landscape(model, test.x[index], test.y[index], center, v1, v2,
                                         cfg.landscape.extent, cfg.landscape.points, stream);
  write_landscape_csv(out.landscape(mode, index), grid, index);
  log << "landscape: wrote " << out.landscape(mode, index).string() << " (" << grid.points << "x"
      << grid.points << ", v1.v2 = " << grid.cos_angle << ")\n";
  return grid;
}

std::vector<PerExampleRow> read_per_example_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "index,task_loss,optimal_cost,regret,nll,status") {
    throw IoError(path.string() + ": unexpected header");
  }
  std::vector<PerExampleRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_csv(line);
    if (f.size() != 6) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
    }
    rows.push_back({parse_index(f[0], path), parse_double(f[1]), parse_double(f[2]),
                    parse_double(f[3]), parse_double(f[4]), f[5]});
  }
  return rows;
}

namespace {

std::string join(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ' ';
    s += fmt(v(i));
  }
  return s;
}

Vector parse_vector(const std::string& text) {
  std::istringstream ss(text);
  std::vector<double> values;
  std::string token;
  while (ss >> token) values.push_back(parse_double(token));
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

constexpr const char* kLandscapeMagic = "# soebm landscape 1";
constexpr const char* kLandscapeHeader = "i,j,d1,d2,model_energy,true_cost";

}  // namespace

void write_landscape_csv(const fs::path& path, const LandscapeGrid& grid, std::size_t index) {
  std::ostringstream csv;
  csv << kLandscapeMagic << '\n'
      << "# index: " << index << '\n'
      << "# center: " << join(grid.center) << '\n'
      << "# v1: " << join(grid.v1) << '\n'
      << "# v2: " << join(grid.v2) << '\n'
      << "# cos_angle: " << fmt(grid.cos_angle) << '\n'
      << "# extent: " << fmt(grid.extent) << '\n'
      << "# points: " << grid.points << '\n'
      << kLandscapeHeader << '\n';
  for (std::size_t i = 0; i < grid.points; ++i) {
    for (std::size_t j = 0; j < grid.points; ++j) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      csv << i << ',' << j << ',' << fmt(grid.offset(i)) << ',' << fmt(grid.offset(j)) << ','
          << fmt(grid.model_energy(r, c)) << ',' << fmt(grid.true_cost(r, c)) << '\n';
    }
  }
  write_file(path, csv.str());
}

LandscapeGrid read_landscape_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kLandscapeMagic) {
    throw IoError(path.string() + ": not a landscape file");
  }
  auto field = [&](const std::string& name) {
    const std::string prefix = "# " + name + ": ";
    if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) {
      throw IoError(path.string() + ": expected '" + prefix + "'");
    }
    return line.substr(prefix.size());
  };
  LandscapeGrid grid;
  field("index");
  grid.center = parse_vector(field("center"));
  grid.v1 = parse_vector(field("v1"));
  grid.v2 = parse_vector(field("v2"));
  grid.cos_angle = parse_double(field("cos_angle"));
  grid.extent = parse_double(field("extent"));
  grid.points = parse_index(field("points"), path);
  if (!std::getline(in, line) || line != kLandscapeHeader) {
    throw IoError(path.string() + ": unexpected column header");
  }
  const auto n = static_cast<Eigen::Index>(grid.points);
  grid.model_energy = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  grid.true_cost = grid.model_energy;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 6) throw IoError(path.string() + ": expected 6 fields per row");
    const std::size_t i = parse_index(f[0], path);
    const std::size_t j = parse_index(f[1], path);
    if (i >= grid.points || j >= grid.points) throw IoError(path.string() + ": cell out of range");
    grid.model_energy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(f[4]);
    grid.true_cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(f[5]);
    ++rows;
  }
  if (rows != grid.points * grid.points || !grid.model_energy.allFinite()) {
    throw IoError(path.string() + ": grid does not match the declared resolution");
  }
  return grid;
}

}  // namespace soebm::cli
