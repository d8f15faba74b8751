#include "soebm_cli/config.hpp"

#include <cmath>
#include <concepts>
#include <fstream>
#include <set>
#include <sstream>

#include "soebm/error.hpp"

namespace soebm::cli {

using nlohmann::json;

std::string to_string(TaskKind kind) {
  return kind == TaskKind::kPower ? "power" : "synthetic2d";
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kTwoStage:
      return "two-stage";
    case Mode::kSoebm:
      return "soebm";
    case Mode::kAblationNoMle:
      return "ablation-no-mle";
    case Mode::kAblationNoKl:
      return "ablation-no-kl";
  }
  return "unknown";
}

TaskKind parse_task(const std::string& text) {
  if (text == "synthetic2d") return TaskKind::kSynthetic2D;
  if (text == "power") return TaskKind::kPower;
  throw ConfigError("unknown task '" + text + "' (expected synthetic2d or power)");
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::kTwoStage, Mode::kSoebm, Mode::kAblationNoMle, Mode::kAblationNoKl}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown mode '" + text + "'");
}

RunConfig default_config(TaskKind task) {
  RunConfig cfg;
  cfg.task = task;
  if (task == TaskKind::kPower) {
    cfg.data.examples = 600;
    cfg.data.split = {0.6, 0.2, 0.2};
    cfg.model.hidden = {200, 200};
    cfg.model.dropout = 0.2;
    cfg.cost_scale = 0.1;
    cfg.train.epochs = 10;
    cfg.train.learning_rate = 5e-5;
  }
  return cfg;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(data.examples >= 10, "data.examples must be at least 10");
  require(std::isfinite(data.noise) && data.noise >= 0.0, "data.noise must be non-negative");
  require(data.split.size() == 2 || data.split.size() == 3,
          "data.split needs 2 (train, test) or 3 (train, validation, test) fractions");
  double total = 0.0;
  for (double f : data.split) {
    require(f > 0.0 && f < 1.0, "data.split fractions must lie in (0, 1)");
    total += f;
  }
  require(std::abs(total - 1.0) <= 1e-9, "data.split fractions must sum to 1");
  if (task == TaskKind::kPower) {
    require(power.horizon >= 1 && power.horizon <= 24, "task_params.power.horizon must be in [1, 24]");
    require(data.feature_dim >= 6 * power.horizon + 6,
            "data.feature_dim must be at least 6 * horizon + 6 = " +
                std::to_string(6 * power.horizon + 6));
    power.validate();
  } else {
    synthetic.validate();
  }

  require(!model.hidden.empty(), "model.hidden needs at least one layer");
  for (auto w : model.hidden) require(w >= 1, "model.hidden widths must be positive");
  require(model.dropout >= 0.0 && model.dropout < 1.0, "model.dropout must be in [0, 1)");
  require(std::isfinite(model.initial_sigma) && model.initial_sigma > 0.0,
          "model.initial_sigma must be positive");

  require(expectation.mc_samples >= 1, "expectation.mc_samples must be at least 1");
  require(std::isfinite(cost_scale) && cost_scale > 0.0, "energy.cost_scale must be positive");

  require(pretrain.batch_size >= 1, "pretrain.batch_size must be at least 1");
  require(std::isfinite(pretrain.learning_rate) && pretrain.learning_rate > 0.0,
          "pretrain.learning_rate must be positive");
  require(std::isfinite(train.lambda) && train.lambda >= 0.0, "train.lambda must be non-negative");
  require(train.batch_size >= 1, "train.batch_size must be at least 1");
  require(std::isfinite(train.learning_rate) && train.learning_rate > 0.0,
          "train.learning_rate must be positive");
  proposal.validate();
  preprocess_solve.validate();
  inference_solve.validate();

  require(std::isfinite(landscape.extent) && landscape.extent > 0.0,
          "landscape.extent must be positive");
  require(landscape.points >= 3 && landscape.points % 2 == 1,
          "landscape.points must be odd and at least 3");
}

std::shared_ptr<const Task> RunConfig::make_task() const {
  if (task == TaskKind::kPower) return std::make_shared<PowerTask>(power);
  return std::make_shared<Synthetic2DTask>(synthetic);
}

namespace {

json solve_json(const SolveConfig& s) {
  return {{"max_iterations", s.max_iterations}, {"step_size", s.step_size},
          {"backoff", s.backoff},               {"tolerance", s.tolerance},
          {"restarts", s.restarts},             {"armijo", s.armijo},
          {"min_step", s.min_step}};
}

// Reads the keys of one JSON object; anything left unread is an error.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("config: unknown key '" + where(key) + "'");
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void read(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError("config: '" + where(key) + "' must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError("config: '" + where(key) + "' must be finite");
  }
  template <std::unsigned_integral T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = static_cast<T>(unsigned_value(key, j_.at(key)));
  }
  void read(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError("config: '" + where(key) + "' must be true or false");
    out = v.get<bool>();
  }
  void read(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError("config: '" + where(key) + "' must be an array");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("config: '" + where(key) + "' entries must be numbers");
      out.push_back(e.get<double>());
    }
  }
  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError("config: '" + where(key) + "' must be an array");
    out.clear();
    for (const auto& e : v) out.push_back(unsigned_value(key, e));
  }
  std::optional<std::string> string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError("config: '" + where(key) + "' must be a string");
    return v.get<std::string>();
  }
  const json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }
  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::uint64_t unsigned_value(const std::string& key, const json& v) const {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError("config: '" + where(key) + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_solve(const json& j, const std::string& path, SolveConfig& s) {
  Section sec(j, path);
  sec.read("max_iterations", s.max_iterations);
  sec.read("step_size", s.step_size);
  sec.read("backoff", s.backoff);
  sec.read("tolerance", s.tolerance);
  sec.read("restarts", s.restarts);
  sec.read("armijo", s.armijo);
  sec.read("min_step", s.min_step);
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["task"] = to_string(cfg.task);
  j["seed"] = cfg.seed;
  j["data"] = {{"examples", cfg.data.examples},
               {"noise", cfg.data.noise},
               {"feature_dim", cfg.data.feature_dim},
               {"split", cfg.data.split}};
  j["task_params"] = {
      {"synthetic2d",
       {{"l1_weight", cfg.synthetic.l1_weight},
        {"quad_weight", cfg.synthetic.quad_weight},
        {"quad_center", cfg.synthetic.quad_center}}},
      {"power",
       {{"under_penalty", cfg.power.under_penalty},
        {"over_penalty", cfg.power.over_penalty},
        {"ramp_limit", cfg.power.ramp_limit},
        {"horizon", cfg.power.horizon}}}};
  j["model"] = {{"hidden", cfg.model.hidden},
                {"dropout", cfg.model.dropout},
                {"initial_sigma", cfg.model.initial_sigma}};
  j["expectation"] = {
      {"mode", cfg.expectation.mode == ExpectationMode::kClosedForm ? "closed_form" : "monte_carlo"},
      {"mc_samples", cfg.expectation.mc_samples}};
  j["energy"] = {{"cost_scale", cfg.cost_scale}};
  j["pretrain"] = {{"epochs", cfg.pretrain.epochs},
                   {"batch_size", cfg.pretrain.batch_size},
                   {"learning_rate", cfg.pretrain.learning_rate}};
  j["train"] = {{"lambda", cfg.train.lambda},
                {"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"cold_start", cfg.train.cold_start},
                {"eval_during_training", cfg.train.eval_during_training}};
  j["proposal"] = {{"sigmas", cfg.proposal.sigmas}, {"samples", cfg.proposal.samples}};
  j["solve"] = {{"preprocess", solve_json(cfg.preprocess_solve)},
                {"inference", solve_json(cfg.inference_solve)}};
  j["landscape"] = {{"extent", cfg.landscape.extent}, {"points", cfg.landscape.points}};
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  Section top(j, "");
  if (!top.has("schema_version")) throw ConfigError("config: missing schema_version");
  const json& version = j.at("schema_version");
  if (!version.is_number_integer() || version.get<long long>() != kSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + version.dump() + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  const auto task = top.string("task");
  if (!task) throw ConfigError("config: missing task");
  RunConfig cfg = default_config(parse_task(*task));
  top.read("seed", cfg.seed);

  if (const json* d = top.child("data")) {
    Section s(*d, "data");
    s.read("examples", cfg.data.examples);
    s.read("noise", cfg.data.noise);
    s.read("feature_dim", cfg.data.feature_dim);
    s.read("split", cfg.data.split);
  }
  if (const json* t = top.child("task_params")) {
    Section s(*t, "task_params");
    if (const json* syn = s.child("synthetic2d")) {
      Section p(*syn, "task_params.synthetic2d");
      p.read("l1_weight", cfg.synthetic.l1_weight);
      p.read("quad_weight", cfg.synthetic.quad_weight);
      p.read("quad_center", cfg.synthetic.quad_center);
    }
    if (const json* pow = s.child("power")) {
      Section p(*pow, "task_params.power");
      p.read("under_penalty", cfg.power.under_penalty);
      p.read("over_penalty", cfg.power.over_penalty);
      p.read("ramp_limit", cfg.power.ramp_limit);
      p.read("horizon", cfg.power.horizon);
    }
  }
  if (const json* m = top.child("model")) {
    Section s(*m, "model");
    s.read("hidden", cfg.model.hidden);
    s.read("dropout", cfg.model.dropout);
    s.read("initial_sigma", cfg.model.initial_sigma);
  }
  if (const json* e = top.child("expectation")) {
    Section s(*e, "expectation");
    if (auto mode = s.string("mode")) {
      if (*mode == "closed_form") {
        cfg.expectation.mode = ExpectationMode::kClosedForm;
      } else if (*mode == "monte_carlo") {
        cfg.expectation.mode = ExpectationMode::kMonteCarlo;
      } else {
        throw ConfigError("config: expectation.mode must be closed_form or monte_carlo");
      }
    }
    s.read("mc_samples", cfg.expectation.mc_samples);
  }
  if (const json* e = top.child("energy")) {
    Section s(*e, "energy");
    s.read("cost_scale", cfg.cost_scale);
  }
  if (const json* p = top.child("pretrain")) {
    Section s(*p, "pretrain");
    s.read("epochs", cfg.pretrain.epochs);
    s.read("batch_size", cfg.pretrain.batch_size);
    s.read("learning_rate", cfg.pretrain.learning_rate);
  }
  if (const json* t = top.child("train")) {
    Section s(*t, "train");
    s.read("lambda", cfg.train.lambda);
    s.read("epochs", cfg.train.epochs);
    s.read("batch_size", cfg.train.batch_size);
    s.read("learning_rate", cfg.train.learning_rate);
    s.read("cold_start", cfg.train.cold_start);
    s.read("eval_during_training", cfg.train.eval_during_training);
  }
  if (const json* p = top.child("proposal")) {
    Section s(*p, "proposal");
    s.read("sigmas", cfg.proposal.sigmas);
    s.read("samples", cfg.proposal.samples);
  }
  if (const json* sv = top.child("solve")) {
    Section s(*sv, "solve");
    if (const json* pre = s.child("preprocess")) read_solve(*pre, "solve.preprocess", cfg.preprocess_solve);
    if (const json* inf = s.child("inference")) read_solve(*inf, "solve.inference", cfg.inference_solve);
  }
  if (const json* l = top.child("landscape")) {
    Section s(*l, "landscape");
    s.read("extent", cfg.landscape.extent);
    s.read("points", cfg.landscape.points);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace soebm::cli
