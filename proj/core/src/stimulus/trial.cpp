#include "ctxrec/stimulus/trial.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ctxrec::stimulus {

using nlohmann::json;

namespace {

struct ExperimentName {
  Experiment e;
  std::string_view name;
};
constexpr ExperimentName kExperimentNames[] = {
    {Experiment::A1Minimal, "A1_minimal"},        {Experiment::A1Full, "A1_full"},
    {Experiment::A2Co, "A2_co"},                  {Experiment::B1BlurContext, "B1_blur_ctx"},
    {Experiment::B2BlurObject, "B2_blur_obj"},    {Experiment::B3Texture, "B3_texture"},
    {Experiment::B4Jigsaw, "B4_jigsaw"},          {Experiment::B5Congruence, "B5_congruence"},
};

template <typename T>
bool one_of(T v, std::initializer_list<T> allowed) {
  return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& n : kExperimentNames) {
    if (n.e == e) return n.name;
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view text) {
  for (const auto& n : kExperimentNames) {
    if (n.name == text) return n.e;
  }
  throw std::invalid_argument("unknown experiment: " + std::string(text));
}

std::string_view to_string(Congruence c) { return c == Congruence::Congruent ? "congruent" : "incongruent"; }

Congruence parse_congruence(std::string_view text) {
  if (text == "congruent") return Congruence::Congruent;
  if (text == "incongruent") return Congruence::Incongruent;
  throw std::invalid_argument("unknown congruence: " + std::string(text));
}

std::string_view to_string(TimingKind k) {
  switch (k) {
    case TimingKind::Sync: return "sync";
    case TimingKind::Masked: return "masked";
    case TimingKind::Async: return "async";
  }
  return "sync";
}

StimulusCondition StimulusCondition::minimal(std::uint64_t seed) { return {Experiment::A1Minimal, {}, {}, {}, {}, seed}; }
StimulusCondition StimulusCondition::full(std::uint64_t seed) { return {Experiment::A1Full, {}, {}, {}, {}, seed}; }
StimulusCondition StimulusCondition::co(int ratio, std::uint64_t seed) { return {Experiment::A2Co, ratio, {}, {}, {}, seed}; }
StimulusCondition StimulusCondition::blur_context(int sigma, std::uint64_t seed) {
  return {Experiment::B1BlurContext, {}, sigma, {}, {}, seed};
}
StimulusCondition StimulusCondition::blur_object(int sigma, std::uint64_t seed) {
  return {Experiment::B2BlurObject, {}, sigma, {}, {}, seed};
}
StimulusCondition StimulusCondition::texture(std::uint64_t seed) { return {Experiment::B3Texture, {}, {}, {}, {}, seed}; }
StimulusCondition StimulusCondition::jigsaw(int grid, std::uint64_t seed) { return {Experiment::B4Jigsaw, {}, {}, grid, {}, seed}; }
StimulusCondition StimulusCondition::congruence_paste(Congruence c, std::uint64_t seed) {
  return {Experiment::B5Congruence, {}, {}, {}, c, seed};
}

std::string StimulusCondition::key() const {
  std::string k(to_string(experiment));
  if (co_ratio) k += "/co=" + std::to_string(*co_ratio);
  if (sigma) k += "/sigma=" + std::to_string(*sigma);
  if (grid) k += "/grid=" + std::to_string(*grid) + "x" + std::to_string(*grid);
  if (congruence) k += "/" + std::string(to_string(*congruence));
  return k;
}

void validate(const StimulusCondition& c) {
  const bool wants_co = c.experiment == Experiment::A2Co;
  const bool wants_sigma = c.experiment == Experiment::B1BlurContext || c.experiment == Experiment::B2BlurObject;
  const bool wants_grid = c.experiment == Experiment::B4Jigsaw;
  const bool wants_cong = c.experiment == Experiment::B5Congruence;
  if (wants_co != c.co_ratio.has_value() || wants_sigma != c.sigma.has_value() ||
      wants_grid != c.grid.has_value() || wants_cong != c.congruence.has_value()) {
    throw std::invalid_argument("condition parameters do not match experiment " + std::string(to_string(c.experiment)));
  }
  if (c.co_ratio && !one_of(*c.co_ratio, {0, 2, 4, 8, 16, 128})) {
    throw std::invalid_argument("co_ratio must be one of 0, 2, 4, 8, 16, 128");
  }
  if (c.sigma && !one_of(*c.sigma, {2, 4, 8, 16, 32})) {
    throw std::invalid_argument("sigma must be one of 2, 4, 8, 16, 32");
  }
  if (c.grid && !one_of(*c.grid, {2, 4, 8})) throw std::invalid_argument("grid must be 2, 4 or 8");
}

std::string TimingVariant::key() const {
  switch (kind) {
    case TimingKind::Sync: return "T" + std::to_string(exposure_ms);
    case TimingKind::Masked: return "T" + std::to_string(exposure_ms) + "+mask";
    case TimingKind::Async: return "T1_" + std::to_string(t1_ms) + "+T2_" + std::to_string(t2_ms);
  }
  return {};
}

std::vector<Phase> build_schedule(const TimingVariant& variant, const TimingConfig& config) {
  std::vector<Phase> phases{{"fixation", config.fixation_ms}, {"cue", config.cue_ms}};
  switch (variant.kind) {
    case TimingKind::Sync:
      phases.push_back({"image", variant.exposure_ms});
      break;
    case TimingKind::Masked:
      phases.push_back({"image", variant.exposure_ms});
      phases.push_back({"mask", config.mask_ms});
      break;
    case TimingKind::Async:
      phases.push_back({"context_only", variant.t1_ms});
      phases.push_back({"object_only", variant.t2_ms});
      break;
  }
  for (const auto& p : phases) {
    if (p.ms <= 0 || p.ms % 25 != 0) {
      throw std::invalid_argument("phase '" + p.name + "' duration " + std::to_string(p.ms) +
                                  " ms is not a positive multiple of 25 ms");
    }
  }
  return phases;
}

json to_json(const TargetAnnotation& t) {
  return json{{"image_id", t.image_id},
              {"annotation_id", t.annotation_id},
              {"file_name", t.file_name},
              {"image_width", t.image_width},
              {"image_height", t.image_height},
              {"bbox", {t.bbox.x, t.bbox.y, t.bbox.width, t.bbox.height}},
              {"category", t.category},
              {"size_bin", to_string(t.size_bin)},
              {"extent", t.extent},
              {"touches_border", t.touches_border}};
}

TargetAnnotation target_from_json(const json& j) {
  TargetAnnotation t;
  t.image_id = j.at("image_id").get<std::int64_t>();
  t.annotation_id = j.value("annotation_id", std::int64_t{0});
  t.file_name = j.at("file_name").get<std::string>();
  t.image_width = j.at("image_width").get<int>();
  t.image_height = j.at("image_height").get<int>();
  const auto& b = j.at("bbox");
  t.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  t.category = j.at("category").get<std::string>();
  t.size_bin = parse_size_bin(j.at("size_bin").get<std::string>());
  t.extent = j.at("extent").get<double>();
  t.touches_border = j.value("touches_border", false);
  return t;
}

json to_json(const StimulusCondition& c) {
  json j{{"experiment", to_string(c.experiment)}, {"seed", c.seed}};
  if (c.co_ratio) j["co_ratio"] = *c.co_ratio;
  if (c.sigma) j["sigma"] = *c.sigma;
  if (c.grid) j["grid"] = std::to_string(*c.grid) + "x" + std::to_string(*c.grid);
  if (c.congruence) j["congruence"] = to_string(*c.congruence);
  return j;
}

StimulusCondition condition_from_json(const json& j) {
  StimulusCondition c;
  c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  c.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("co_ratio")) c.co_ratio = j.at("co_ratio").get<int>();
  if (j.contains("sigma")) c.sigma = j.at("sigma").get<int>();
  if (j.contains("grid")) {
    const auto g = j.at("grid").get<std::string>();
    c.grid = std::stoi(g.substr(0, g.find('x')));
  }
  if (j.contains("congruence")) c.congruence = parse_congruence(j.at("congruence").get<std::string>());
  validate(c);
  return c;
}

json to_json(const TrialSpec& t) {
  json timing{{"kind", to_string(t.timing.kind)}};
  if (t.timing.kind == TimingKind::Async) {
    timing["t1_ms"] = t.timing.t1_ms;
    timing["t2_ms"] = t.timing.t2_ms;
  } else {
    timing["exposure_ms"] = t.timing.exposure_ms;
  }
  json phases = json::array();
  for (const auto& p : t.phases) phases.push_back({{"phase", p.name}, {"ms", p.ms}});
  json j{{"trial_id", t.trial_id}, {"block", t.block},   {"target", to_json(t.target)},
         {"condition", to_json(t.condition)}, {"timing", timing}, {"phases", phases},
         {"assets", t.assets}};
  if (t.achieved_co_ratio) j["achieved_co_ratio"] = *t.achieved_co_ratio;
  if (t.donor_image_id) j["donor_image_id"] = *t.donor_image_id;
  return j;
}

TrialSpec trial_from_json(const json& j) {
  TrialSpec t;
  t.trial_id = j.at("trial_id").get<std::string>();
  t.block = j.value("block", std::string{});
  t.target = target_from_json(j.at("target"));
  t.condition = condition_from_json(j.at("condition"));
  const auto& timing = j.at("timing");
  const auto kind = timing.at("kind").get<std::string>();
  if (kind == "async") {
    t.timing = TimingVariant::async(timing.at("t1_ms").get<int>(), timing.at("t2_ms").get<int>());
  } else if (kind == "masked") {
    t.timing = TimingVariant::masked(timing.at("exposure_ms").get<int>());
  } else if (kind == "sync") {
    t.timing = TimingVariant::sync(timing.at("exposure_ms").get<int>());
  } else {
    throw std::invalid_argument("unknown timing kind: " + kind);
  }
  for (const auto& p : j.at("phases")) t.phases.push_back({p.at("phase").get<std::string>(), p.at("ms").get<int>()});
  t.assets = j.at("assets").get<std::map<std::string, std::string>>();
  if (j.contains("achieved_co_ratio")) t.achieved_co_ratio = j.at("achieved_co_ratio").get<double>();
  if (j.contains("donor_image_id")) t.donor_image_id = j.at("donor_image_id").get<std::int64_t>();
  return t;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.jsonl", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest.jsonl in " + dir.string());
    for (const auto& e : manifest.entries) out << to_json(e).dump() << '\n';
  }
  json config = manifest.generator_config;
  config["dataset_digest"] = manifest.dataset_digest;
  std::ofstream out(dir / "generator_config.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write generator_config.json in " + dir.string());
  out << config.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& manifest_file) {
  std::ifstream in(manifest_file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_file.string());
  Manifest m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      m.entries.push_back(trial_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(manifest_file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  const auto config_file = manifest_file.parent_path() / "generator_config.json";
  if (std::filesystem::exists(config_file)) {
    std::ifstream cin(config_file);
    m.generator_config = json::parse(cin);
    m.dataset_digest = m.generator_config.value("dataset_digest", std::string{});
  }
  return m;
}

}  // namespace ctxrec::stimulus

namespace ctxrec::stimulus {

const std::vector<std::string>& condition_columns() {
  static const std::vector<std::string> columns = {
      "block",   "experiment",  "condition_key", "co_ratio", "sigma",    "grid",   "congruence", "timing",
      "exposure_ms", "t1_ms", "t2_ms",         "size_bin", "extent",   "category", "image_id"};
  return columns;
}

std::vector<std::string> condition_values(const TrialSpec& trial) {
  auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  auto ms = [](int v) { return v > 0 ? std::to_string(v) : std::string(); };
  std::ostringstream extent;
  extent << trial.target.extent;
  return {trial.block,
          std::string(to_string(trial.condition.experiment)),
          trial.condition.key(),
          opt(trial.condition.co_ratio),
          opt(trial.condition.sigma),
          trial.condition.grid ? std::to_string(*trial.condition.grid) + "x" + std::to_string(*trial.condition.grid)
                               : std::string(),
          trial.condition.congruence ? std::string(to_string(*trial.condition.congruence)) : std::string(),
          trial.timing.key(),
          ms(trial.timing.exposure_ms),
          ms(trial.timing.t1_ms),
          ms(trial.timing.t2_ms),
          std::string(to_string(trial.target.size_bin)),
          extent.str(),
          trial.target.category,
          std::to_string(trial.target.image_id)};
}

}  // namespace ctxrec::stimulus
